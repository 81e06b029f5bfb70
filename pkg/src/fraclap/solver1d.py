"""Dense Dirichlet solver and eigensolver for (-Lap)^s on an interval.

On the lattice hZ the discrete operator (-Lap_h)^s0 (-Lap_h)^k has symbol
(4 sin^2(xi h / 2) / h^2)^s; its lattice weights are the fractional
centred differences

    a_m = (-1)^m Gamma(2s+1) / (Gamma(s-m+1) Gamma(s+m+1)) / h^(2s).

The same weights arise from composing the fractional part (a quadrature
of the second-difference kernel) with the 3-point stencil applied k
times. Zero extension outside the interval and restriction to the
interior nodes give a symmetric positive definite Toeplitz matrix.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

from .boundary_trace import sampled_trace
from .domains import DomainSpec
from .frlap_eval import GridField
from .specfun import FracOrder, gamma


class AssemblyError(RuntimeError):
    pass


def lattice_weights(s, M):
    """First M weights a_0, a_1, ... of the symbol (4 sin^2(xi/2))^s (h = 1)."""
    a = np.empty(M)
    a[0] = math.exp(math.lgamma(2.0 * s + 1.0) - 2.0 * math.lgamma(s + 1.0))
    for m in range(M - 1):
        a[m + 1] = a[m] * (m - s) / (m + s + 1.0)
    return a


@dataclass
class OperatorMatrix:
    N: int
    h: float
    entries: np.ndarray
    order: FracOrder
    x: np.ndarray
    domain: DomainSpec
    _chol: object = None

    def __matmul__(self, u):
        return self.entries @ u

    def factor(self):
        if self._chol is None:
            try:
                self._chol = sl.cho_factor(self.entries, lower=True)
            except np.linalg.LinAlgError as exc:
                raise AssemblyError(f"matrix is not positive definite: {exc}") from exc
        return self._chol

    def apply(self, f):
        """Discrete (-Lap)^s of a callable (zero outside the interval) or of samples."""
        u = f(self.x[:, None]) if callable(f) else np.asarray(f, dtype=float)
        return self.entries @ u


def grid(domain, N):
    a = domain.center[0] - domain.radius
    h = 2.0 * domain.radius / (N + 1)
    return a + h * np.arange(1, N + 1), h


def assemble(domain, s, N):
    """The N x N matrix of the discrete Dirichlet (-Lap)^s on the interval."""
    s = s if isinstance(s, FracOrder) else FracOrder(s)
    if domain.n != 1:
        raise ValueError("solver1d handles intervals only")
    if N < 64:
        raise ValueError("need N >= 64")
    x, h = grid(domain, N)
    A = sl.toeplitz(lattice_weights(s.s, N)) / h ** (2.0 * s.s)
    op = OperatorMatrix(N, h, A, s, x, domain)
    scale = np.abs(A).max()
    asym = np.abs(A - A.T).max()
    if asym > 1e-10 * scale:
        raise AssemblyError(f"symmetry defect {asym:.3e}")
    op.factor()
    return op


def solve(A, f):
    """u with A u = f at the interior nodes (u = 0 outside). ``f`` samples or callable."""
    rhs = f(A.x[:, None]) if callable(f) else np.asarray(f, dtype=float)
    rhs = np.broadcast_to(rhs, (A.N,)).astype(float)
    u = sl.cho_solve(A.factor(), rhs)
    res = np.abs(A.entries @ u - rhs).max()
    scale = np.abs(A.entries).sum(axis=1).max() * np.abs(u).max() + np.abs(rhs).max()
    if res > 1e-12 * max(scale, 1e-300):
        raise AssemblyError(f"linear solve residual {res:.3e}")
    return u


def coarse_size(N):
    """Interior size of the companion grid with about twice the spacing."""
    return N // 2


def traces(x, u, domain, s, window=None):
    """(trace at the left end, trace at the right end) from one grid."""
    a = domain.center[0] - domain.radius
    b = domain.center[0] + domain.radius
    return (sampled_trace(x, u, domain, s, [a], window),
            sampled_trace(x, u, domain, s, [b], window))


def two_grid_traces(fine, coarse, domain, s, window=None):
    """Endpoint traces with the O(h) bias removed by linear extrapolation in h.

    ``fine`` and ``coarse`` are (x, u) pairs on uniform grids.
    """
    tf = traces(*fine, domain, s, window)
    tc = traces(*coarse, domain, s, window)
    h1 = fine[0][1] - fine[0][0]
    h2 = coarse[0][1] - coarse[0][0]
    return tuple(float((h2 * a - h1 * b) / (h2 - h1)) for a, b in zip(tf, tc)), tf


@dataclass
class SolveResult:
    x: np.ndarray
    u: np.ndarray
    f: np.ndarray
    h: float
    traces: tuple
    single_grid_traces: tuple


def solve_with_traces(domain, s, f, N):
    """Solve on N and on the half grid; traces from the two-grid combination."""
    A = assemble(domain, s, N)
    u = solve(A, f)
    B = assemble(domain, s, coarse_size(N))
    uc = solve(B, f)
    tr, tf = two_grid_traces((A.x, u), (B.x, uc), domain, A.order.s)
    rhs = f(A.x[:, None]) if callable(f) else np.broadcast_to(f, (N,))
    return SolveResult(A.x, u, np.asarray(rhs, dtype=float), A.h, tr, tf)


@dataclass
class EigenResult:
    lam: float
    x: np.ndarray
    phi: np.ndarray
    h: float
    traces: tuple
    lam_coarse: float
    single_grid_traces: tuple

    def balance(self, s):
        """(2 s lam int phi^2, Gamma(1+s)^2 sum of squared traces)."""
        lhs = 2.0 * s * self.lam * float(np.sum(self.phi ** 2) * self.h)
        rhs = gamma(1.0 + s) ** 2 * sum(t * t for t in self.traces)
        return lhs, rhs


def _ground_state(A):
    try:
        lam, V = sl.eigh(A.entries, subset_by_index=[0, 0])
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    phi = V[:, 0] / math.sqrt(A.h)
    mid = A.N // 2
    phi = phi * np.sign(phi[mid] if phi[mid] != 0 else phi.sum())
    return float(lam[0]), phi


def eigen_demo(domain, s, N):
    """Smallest Dirichlet eigenpair, phi normalised in L2 and positive at the centre.

    Traces at both endpoints use the two-grid combination; the balance of
    the semilinear Pohozaev identity with f(u) = lam u is in
    :meth:`EigenResult.balance`.
    """
    sv = s.s if isinstance(s, FracOrder) else float(s)
    A = assemble(domain, s, N)
    lam, phi = _ground_state(A)
    B = assemble(domain, s, coarse_size(N))
    lam_c, phi_c = _ground_state(B)
    tr, tf = two_grid_traces((A.x, phi), (B.x, phi_c), domain, sv)
    return EigenResult(lam, A.x, phi, A.h, tr, lam_c, tf)


def to_gridfield(x, u, domain, pad=4):
    """Embed interior samples into a GridField on [-L, L), L = pad * R.

    Requires the interval centred at 0 and N + 1 a power of two, so both
    grids share nodes.
    """
    N = len(u)
    if domain.center[0] != 0 or (N + 1) & N:
        raise ValueError("need a centred interval and N + 1 a power of two")
    R = domain.radius
    L = pad * R
    h = 2.0 * R / (N + 1)
    M = int(round(2 * L / h))
    vals = np.zeros(M)
    off = int(round((L - R) / h))
    vals[off + 1:off + 1 + N] = u
    return GridField(1, L, M, vals, R)
