"""Fits of (-Lap)^(s/2) u near a boundary point to c1 v0 (log delta + c2 chi) + h.

Two fixtures: the ball solution at x0 = 1 and the half-line profile (x_+)^s.
The relation c1^2 (pi^2 + c2^2) = Gamma(1+s)^2 is checked for both, and the
closed forms c1 = Gamma(1+s) sin(pi s/2)/pi, c2 = pi cot(pi s/2) that fit
the data are printed alongside.
"""
import math
import warnings

from fraclap import DomainSpec, ball_solution, frlap_point, gamma
from fraclap.boundary_trace import constant_relation_check, halfline_singularity_probe, log_singularity_fit

warnings.simplefilter("ignore")

print(f"{'s':>5} {'fixture':>9} {'c1':>10} {'c2':>10} {'ratio':>8}   closed form c1, c2")
for s in (1.25, 1.5, 1.75):
    u = ball_solution(1, s)
    fits = {
        "ball": log_singularity_fit(lambda X: frlap_point(u.field(), 0.5 * s, X), DomainSpec.interval(-1.0, 1.0),
                                    s, [1.0], v0=u.trace()),
        "halfline": log_singularity_fit(lambda X: halfline_singularity_probe(s, 1.0, X),
                                        DomainSpec.interval(0.0, 2.0), s, [0.0], v0=1.0),
    }
    c1 = gamma(1 + s) * math.sin(math.pi * s / 2) / math.pi
    c2 = math.pi / math.tan(math.pi * s / 2)
    for name, f in fits.items():
        print(f"{s:>5} {name:>9} {f.c1:>10.6f} {f.c2:>10.6f} {constant_relation_check(f, s):>8.5f}   "
              f"{c1:.6f}, {c2:.6f}")
