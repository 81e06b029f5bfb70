"""First Dirichlet eigenfunction of (-Lap)^s on (-1, 1) and its boundary traces.

The traces are far from zero, and 2 s lam int phi^2 matches
Gamma(1+s)^2 (trace(-1)^2 + trace(1)^2), the semilinear identity with
f(u) = lam u.
"""
import numpy as np

from fraclap import DomainSpec
from fraclap.solver1d import eigen_demo

dom = DomainSpec.interval(-1.0, 1.0)
print(f"{'s':>4} {'N':>5} {'lambda1':>10} {'trace':>8} {'max phi':>8} {'2 s lam |phi|^2':>16} {'G^2 sum tr^2':>13}")
for s in (1.25, 1.5, 2.5):
    for N in (512, 1024):
        r = eigen_demo(dom, s, N)
        lhs, rhs = r.balance(s)
        print(f"{s:>4} {N:>5} {r.lam:>10.5f} {r.traces[1]:>8.4f} {np.abs(r.phi).max():>8.4f} {lhs:>16.5f} "
              f"{rhs:>13.5f}")
