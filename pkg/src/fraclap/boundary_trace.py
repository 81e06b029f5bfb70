"""Boundary traces u/d^s and the logarithmic profile of (-Lap)^(s/2) u at the boundary.

Near a boundary point x0 the half-order operator behaves like

    w(x) = c1 v0 (log delta + c2 chi_Omega) + h(x)

with v0 the trace of u/d^s at x0 and h Hoelder continuous across the
boundary. The constants satisfy c1^2 (pi^2 + c2^2) = Gamma(1+s)^2.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exact_solutions import halfline_model
from .frlap_eval import Field, Kinks, frlap_compose, frlap_point
from .specfun import FracOrder, gamma


class TraceError(RuntimeError):
    """Extrapolation did not settle; ``table`` holds the Neville tableau."""

    def __init__(self, msg, table):
        super().__init__(msg)
        self.table = table


class FitError(RuntimeError):
    def __init__(self, msg, cond):
        super().__init__(msg)
        self.cond = cond


@dataclass(frozen=True)
class LogFit:
    c1: float
    c2: float
    v0: float
    rms: float
    window: tuple
    slopes: tuple = field(default=(math.nan, math.nan))
    cond: float = math.nan

    def constant_relation(self):
        """c1^2 (pi^2 + c2^2), to be compared with Gamma(1+s)^2."""
        return self.c1 ** 2 * (math.pi ** 2 + self.c2 ** 2)

    def to_dict(self):
        return {"c1": self.c1, "c2": self.c2, "v0": self.v0, "rms": self.rms,
                "window": list(self.window), "slopes": list(self.slopes), "cond": self.cond}


def _inward(domain, x0):
    x0 = np.asarray(x0, dtype=float).reshape(domain.n)
    return x0, -domain.outward_normal(x0)


def neville(depths, values):
    """Polynomial extrapolation to depth 0; returns the full tableau (rows = levels)."""
    t = np.asarray(depths, dtype=float)
    m = len(t)
    T = np.full((m, m), np.nan)
    T[:, 0] = values
    for j in range(1, m):
        for i in range(j, m):
            T[i, j] = (t[i] * T[i - 1, j - 1] - t[i - j] * T[i, j - 1]) / (t[i] - t[i - j])
    return T


def boundary_trace(u, domain, s, x0, depth=None, levels=7, rtol=1e-6, full_output=False):
    """lim u(x)/d(x)^s as x -> x0 along the inward normal.

    Samples at depths t, 2t, 4t, ... and extrapolates to depth 0. The error
    estimate is the gap between the last two diagonal entries. A tableau
    whose last gap is above ``rtol`` and shrank by less than a factor 4
    raises :class:`TraceError`.
    """
    s = s.s if isinstance(s, FracOrder) else float(s)
    x0, nu = _inward(domain, x0)
    t0 = depth or min(domain.radius / 256.0, domain.crossover / 2.0 ** (levels - 1))
    depths = t0 * 2.0 ** np.arange(levels)
    X = x0 + depths[:, None] * nu
    q = np.asarray(u(X), dtype=float) / domain.smoothed_distance(X) ** s
    T = neville(depths, q)
    diag = np.diag(T)
    gaps = np.abs(np.diff(diag))
    est = float(gaps[-1])
    scale = max(abs(diag[-1]), 1e-300)
    # ratio test: a converging tableau contracts its diagonal gaps fast
    if est > rtol * scale and gaps[-1] > 0.25 * gaps[-2]:
        raise TraceError(f"trace extrapolation did not converge (estimate {est:.3e})", T)
    val = float(diag[-1])
    if full_output:
        return val, {"error": est, "table": T, "depths": depths}
    return val


def sampled_trace(x, values, domain, s, x0, window=None, exponents=None):
    """Trace of 1D grid samples (e.g. solver output) at the endpoint x0.

    Fits u/delta^s against the depth tau over ``window`` (default
    (R/20, R/2)) with the powers tau^e, e in ``exponents`` (default
    0, 1, s, 2: when f vanishes like d^s, u/d^s picks up a d^s term), and
    returns the constant term. The discrete solution carries an O(h)
    boundary layer, so the result is biased by O(h); combine two grids to
    remove it (see solver1d).
    """
    s = s.s if isinstance(s, FracOrder) else float(s)
    x = np.asarray(x, dtype=float).ravel()
    x0, nu = _inward(domain, x0)
    tau = (x - x0[0]) * nu[0]
    lo, hi = window or (domain.radius / 20.0, 0.5 * domain.radius)
    ex = (0.0, 1.0, s, 2.0) if exponents is None else tuple(exponents)
    m = (tau >= lo) & (tau <= hi)
    if m.sum() < len(ex) + 4:
        raise ValueError("too few samples inside the trace window")
    q = np.asarray(values, dtype=float)[m] / tau[m] ** s
    M = np.stack([tau[m] ** e for e in ex], axis=1)
    c, *_ = np.linalg.lstsq(M, q, rcond=None)
    return float(c[0])


def _profile_samples(w, domain, x0, window, count, sides):
    x0, nu = _inward(domain, x0)
    lo, hi = window
    dl = np.geomspace(lo, hi, count)
    rows = []
    for side in sides:
        # side +1: inside the domain
        X = x0 + (side * dl)[:, None] * nu
        rows.append((np.full(count, side), dl, np.asarray(w(X), dtype=float)))
    sgn = np.concatenate([r[0] for r in rows])
    dl = np.concatenate([r[1] for r in rows])
    vals = np.concatenate([r[2] for r in rows])
    return sgn, dl, vals


def log_singularity_fit(w, domain, s, x0, window=None, v0=None, u=None, count=16,
                        samples=None, degree=2, dlogd=True, cond_max=1e12):
    """Least-squares fit of w near x0 to c1 v0 (log delta + c2 chi) + h.

    h is modelled as a shared constant plus one-sided polynomials of
    ``degree`` in delta.

    ``w`` is a callable or ``samples = (side, delta, values)`` with side +1
    inside and -1 outside. ``v0`` is pinned: pass it, or pass ``u`` so it
    is computed by :func:`boundary_trace`. With ``dlogd`` per-side
    delta log delta terms absorb the next order of the expansion. The
    returned ``slopes`` are the log coefficients of separate one-sided fits.
    """
    s = s.s if isinstance(s, FracOrder) else float(s)
    if v0 is None:
        if u is None:
            raise ValueError("need v0 or u to pin the trace")
        v0 = boundary_trace(u, domain, s, x0)
    window = tuple(window or (1e-3, domain.rho0 / 4.0))
    if not window[1] <= domain.rho0 / 2.0:
        raise ValueError("window extends beyond rho0/2")
    if samples is None:
        sgn, dl, vals = _profile_samples(w, domain, x0, window, count, (1, -1))
    else:
        sgn, dl, vals = (np.asarray(a, dtype=float) for a in samples)
    chi = (sgn > 0).astype(float)
    L = np.log(dl)
    out = 1.0 - chi
    # h is continuous across the boundary but only Hoelder: one shared
    # constant, one-sided polynomial corrections
    cols = [L, chi, np.ones_like(L)]
    for p in range(1, degree + 1):
        cols += [chi * dl ** p, out * dl ** p]
    if dlogd:
        cols += [chi * dl * L, out * dl * L]
    M = np.stack(cols, axis=1)
    colscale = np.linalg.norm(M, axis=0)
    cond = float(np.linalg.cond(M / colscale))
    if not np.isfinite(cond) or cond > cond_max:
        raise FitError(f"ill-conditioned log fit (condition number {cond:.3e})", cond)
    coef, *_ = np.linalg.lstsq(M / colscale, vals, rcond=None)
    coef = coef / colscale
    resid = vals - M @ coef
    A, B = coef[0], coef[1]
    c1 = A / v0
    c2 = B / A if A != 0 else math.nan

    slopes = []
    for side in (1.0, -1.0):
        m = sgn == side
        if m.sum() >= 5:
            Ms = np.stack([L[m], np.ones(m.sum())] + [dl[m] ** p for p in range(1, degree + 1)]
                          + ([dl[m] * L[m]] if dlogd else []), axis=1)
            cs, *_ = np.linalg.lstsq(Ms, vals[m], rcond=None)
            slopes.append(float(cs[0] / v0))
        else:
            slopes.append(math.nan)
    return LogFit(float(c1), float(c2), float(v0), float(np.sqrt(np.mean(resid ** 2))),
                  window, tuple(slopes), cond)


def constant_relation_check(fit, s):
    """Ratio c1^2 (pi^2 + c2^2) / Gamma(1+s)^2 (1 when the relation holds)."""
    return fit.constant_relation() / gamma(1.0 + s) ** 2


def halfline_field(s, rho0, cap=1.0):
    """phi(t) = (t_+)^s near 0, levelling off to cap rho0^s beyond 2 rho0, as a Field."""
    top = cap * rho0 ** s

    def f(X):
        return halfline_model(s, rho0, np.asarray(X)[..., 0], cap)

    def far(E):
        return np.where(np.asarray(E)[..., 0] > 0, top, 0.0)

    return Field(f, 1, np.array([rho0]), rho0, Kinks.points([0.0]), far)


def halfline_singularity_probe(s, rho0, x, cap=1.0, spec=None):
    """(-Lap)^(s/2) of the half-line profile at the point(s) x."""
    half = FracOrder(0.5 * (s.s if isinstance(s, FracOrder) else s))
    fld = halfline_field(half.s * 2.0, rho0, cap)
    x = np.asarray(x, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if half.k == 0:
            return frlap_point(fld, half.s0, x, spec)
        return frlap_compose(fld, half, x, spec, order="outer", fd_step=min(1e-3, 0.25 * np.min(np.abs(x))))
