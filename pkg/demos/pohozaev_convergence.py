"""Pohozaev identity on (-1, 1) with (-Lap)^s u = 1: closed form vs the discrete solver.

The analytic residual sits at roundoff. With the solver the residual
decays roughly like h, the rate of the discrete boundary layer.
"""
import math

from fraclap import DomainSpec, ball_solution, pohozaev_check
from fraclap.solver1d import solve_with_traces

s = 1.5
dom = DomainSpec.interval(-1.0, 1.0)
ex = pohozaev_check(ball_solution(1, s), dom, s)
print(f"analytic: lhs {ex.lhs:.15f} (-pi/16 = {-math.pi / 16:.15f}), residual {ex.residual_abs:.1e}")

print(f"{'N':>6} {'res_rel':>10} {'trace(-1)':>10} {'trace(1)':>10}")
exact = ball_solution(1, s).trace()
for N in (256, 512, 1024, 2048, 4096):
    r = pohozaev_check(None, dom, s, "numeric", N=N)
    tr = solve_with_traces(dom, s, 1.0, N).traces
    print(f"{N:>6} {r.residual_rel:>10.2e} {tr[0]:>10.6f} {tr[1]:>10.6f}")
print(f"exact trace {exact:.6f}")
