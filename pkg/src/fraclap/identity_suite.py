"""Pohozaev-type identities as executable checks.

Every check returns an :class:`IdentityReport` holding the left side, the
volume and boundary parts of the right side and the residuals. Volume
integrals over balls use the Gauss-Jacobi rules of :mod:`fraclap.domains`
weighted by the expected boundary behaviour; boundary traces come from
:func:`fraclap.boundary_trace.boundary_trace` or, for solver output, from
the two-grid fit in :mod:`fraclap.solver1d`.
"""
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy.ndimage import map_coordinates

from . import solver1d
from .boundary_trace import boundary_trace, neville
from .exact_solutions import BallSolution, power_laplacian
from .frlap_eval import Field, GridField, fft_frlap, frlap_compose, interaction_kernel
from .quadrature import breakpoint_rule, interval_rule
from .specfun import FracOrder, gamma

EPS = 1e-14


class PreconditionError(ValueError):
    pass


class ExtrapolationError(RuntimeError):
    def __init__(self, msg, table):
        super().__init__(msg)
        self.table = table


@dataclass
class IdentityReport:
    name: str
    lhs: float
    rhs_volume: float
    rhs_boundary: float
    residual_abs: float
    residual_rel: float
    ingredients: dict
    provenance: str
    n: int = 1
    s: float = math.nan
    tolerance: float = math.nan

    @classmethod
    def build(cls, name, lhs, rhs_volume, rhs_boundary, ingredients, provenance, n, s, tolerance=math.nan):
        lhs, rv, rb = float(lhs), float(rhs_volume), float(rhs_boundary)
        res = abs(lhs - (rv + rb))
        norm = max(abs(lhs), abs(rv) + abs(rb), EPS)
        return cls(name, lhs, rv, rb, res, res / norm, dict(ingredients), provenance, n, float(s), tolerance)

    @property
    def rhs(self):
        return self.rhs_volume + self.rhs_boundary

    @property
    def passed(self):
        """Relative residual within tolerance (absolute when the sides vanish)."""
        if math.isnan(self.tolerance):
            return False
        if max(abs(self.lhs), abs(self.rhs_volume) + abs(self.rhs_boundary)) < 1e-8:
            return self.residual_abs <= self.tolerance
        return self.residual_rel <= self.tolerance

    def to_dict(self):
        d = asdict(self)
        d["ingredients"] = {k: _plain(v) for k, v in self.ingredients.items()}
        d["passed"] = self.passed
        return d


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _order(s):
    return s if isinstance(s, FracOrder) else FracOrder(s)


@dataclass(frozen=True)
class NonlinearitySpec:
    """f and its primitive F with F(0) = 0; F' = f is checked on construction."""

    f: Callable
    F: Callable
    check_range: float = 2.0

    def __post_init__(self):
        rng = np.random.default_rng(0)
        t = rng.uniform(-self.check_range, self.check_range, 100)
        h = 1e-4
        # 4th-order centred difference
        dF = (-self.F(t + 2 * h) + 8 * self.F(t + h) - 8 * self.F(t - h) + self.F(t - 2 * h)) / (12 * h)
        err = np.max(np.abs(dF - self.f(t)))
        if err > 1e-6 * max(1.0, np.max(np.abs(self.f(t)))):
            raise PreconditionError(f"F' differs from f by {err:.3e}")
        if abs(float(self.F(np.array([0.0]))[0])) > 1e-14:
            raise PreconditionError("F(0) must vanish")

    @classmethod
    def constant(cls, c=1.0):
        return cls(lambda t: np.full_like(np.asarray(t, dtype=float), c), lambda t: c * np.asarray(t, dtype=float))

    @classmethod
    def linear(cls, lam):
        return cls(lambda t: lam * np.asarray(t, dtype=float), lambda t: 0.5 * lam * np.asarray(t, dtype=float) ** 2)


@dataclass(frozen=True)
class Bump:
    """amplitude * exp(1 - 1/(1 - |x-c|^2/r^2)) inside |x - c| < r, zero outside."""

    center: tuple
    radius: float
    amplitude: float = 1.0

    @property
    def n(self):
        return len(self.center)

    def _q(self, X):
        X = np.asarray(X, dtype=float)
        d = X - np.asarray(self.center)
        return d, np.sum(d * d, axis=-1) / self.radius ** 2

    def __call__(self, X):
        _, q = self._q(X)
        inside = q < 1.0
        qq = np.where(inside, q, 0.0)
        return np.where(inside, self.amplitude * np.exp(1.0 - 1.0 / (1.0 - qq)), 0.0)

    def gradient(self, X):
        d, q = self._q(X)
        inside = q < 1.0
        qq = np.where(inside, q, 0.0)
        g = np.where(inside, -self(X) / (1.0 - qq) ** 2 * 2.0 / self.radius ** 2, 0.0)
        return g[..., None] * d

    def neg_laplacian(self, j=1):
        """Exact -Lap of the bump for j = 1 (radial formula in q = |x-c|^2/r^2)."""
        if j != 1:
            raise ValueError("closed form only for j = 1")

        def g(X):
            _, q = self._q(X)
            inside = q < 1.0
            qq = np.where(inside, q, 0.0)
            a = 1.0 / (1.0 - qq)
            f = self(X)
            d1 = -f * a ** 2
            d2 = f * (a ** 4 - 2.0 * a ** 3)
            return np.where(inside, -(4.0 * qq * d2 + 2.0 * self.n * d1) / self.radius ** 2, 0.0)

        return g

    def field(self):
        return Field(self, self.n, np.asarray(self.center, dtype=float), self.radius)

    def rule(self, m=12, angular=32):
        """Nodes and weights covering the support (radial Gauss panels times an angular rule)."""
        c = np.asarray(self.center, dtype=float)
        if self.n == 1:
            x, w = interval_rule(c[0] - self.radius, c[0] + self.radius, panels=m, order=16)
            return x.ravel()[:, None], w.ravel()
        r, wr = interval_rule(0.0, self.radius, panels=m, order=16)
        r, wr = r.ravel(), wr.ravel()
        if self.n == 2:
            th = 2.0 * np.pi * np.arange(angular) / angular
            E = np.stack([np.cos(th), np.sin(th)], axis=1)
            W = np.full(angular, 2.0 * np.pi / angular)
        else:
            z, wz = np.polynomial.legendre.leggauss(angular // 2)
            ph = np.pi * np.arange(angular) / (angular // 2)
            Z, PH = np.meshgrid(z, ph, indexing="ij")
            rho = np.sqrt(1.0 - Z ** 2)
            E = np.stack([rho * np.cos(PH), rho * np.sin(PH), Z], axis=-1).reshape(-1, 3)
            W = (wz[:, None] * np.full(angular, 2.0 * np.pi / angular)[None, :]).ravel()
        pts = c + r[:, None, None] * E[None]
        wts = (wr * r ** (self.n - 1))[:, None] * W[None]
        return pts.reshape(-1, self.n), wts.ravel()


def _volume_rule(u, domain, alpha, m):
    """Quadrature for integrands supported in the domain; bumps use their own support."""
    if isinstance(u, Bump):
        return u.rule()
    return domain.volume_rule(m, alpha)


def _boundary_term(traces_sq, bq, z):
    xnu = np.sum((bq.points - z) * bq.normals, axis=1)
    return float(np.dot(bq.weights, traces_sq * xnu))


def _traces(u, domain, s, bq):
    return np.array([boundary_trace(u, domain, s, p) for p in bq.points])


def _default_lap(u, s):
    if isinstance(u, BallSolution):
        return lambda X: np.ones(np.asarray(X).shape[:-1])
    return None


def _numeric_lap(u, s, spec=None):
    fld = u.field() if hasattr(u, "field") else u
    lap_k = None
    if s.k == 1 and hasattr(u, "neg_laplacian"):
        lap_k = u.neg_laplacian(1)

    def lap(X):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return frlap_compose(fld, s, X, spec, lap_k=lap_k)

    return lap


def pohozaev_check(u, domain, s, mode="analytic", *, lap=None, f=None, N=2048, z0=None,
                   m=64, boundary_nodes=64, tolerance=None):
    """int (x.grad u)(-Lap)^s u = ((2s-n)/2) int u (-Lap)^s u - (Gamma(1+s)^2/2) int (u/d^s)^2 (x.nu).

    ``mode="analytic"`` needs an exact ``lap`` (the ball solution supplies
    (-Lap)^s u = 1). ``mode="numeric"`` evaluates (-Lap)^s u by pointwise
    quadrature when ``u`` is a field, or, with ``u=None``, solves
    (-Lap)^s u = f on an N-point grid (intervals only) and works from the
    discrete solution. x is measured from ``z0`` (default the origin).
    """
    so = _order(s)
    sv, n = so.s, domain.n
    z = np.zeros(n) if z0 is None else np.asarray(z0, dtype=float)
    g2 = gamma(1.0 + sv) ** 2
    if mode == "numeric" and u is None:
        return _pohozaev_solver(domain, so, f, N, z, tolerance)
    if mode == "analytic":
        lap = lap or _default_lap(u, sv)
        if lap is None:
            raise PreconditionError("analytic mode needs an exact (-Lap)^s u")
        prov = "analytic"
    elif mode == "numeric":
        lap = lap or _numeric_lap(u, so)
        prov = "numeric"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    Xg, Wg = _volume_rule(u, domain, sv - 1.0, m)
    Xu, Wu = _volume_rule(u, domain, sv, m)
    lhs = np.dot(Wg, np.sum((Xg - z) * u.gradient(Xg), axis=-1) * lap(Xg))
    energy = np.dot(Wu, u(Xu) * lap(Xu))
    vol = 0.5 * (2.0 * sv - n) * energy
    bq = domain.boundary_quadrature(boundary_nodes)
    tr = _traces(u, domain, sv, bq)
    bnd = -0.5 * g2 * _boundary_term(tr ** 2, bq, z)
    tol = tolerance if tolerance is not None else (1e-10 if prov == "analytic" else 1e-4)
    ing = {"energy": energy, "trace_mean": float(tr.mean()), "trace_min": float(tr.min()),
           "trace_max": float(tr.max())}
    return IdentityReport.build("pohozaev", lhs, vol, bnd, ing, prov, n, sv, tol)


def _grid_gradient(x, u):
    h = x[1] - x[0]
    up = np.concatenate([[0.0], u, [0.0]])
    return (up[2:] - up[:-2]) / (2.0 * h)


def _pohozaev_solver(domain, so, f, N, z, tolerance):
    if domain.n != 1:
        raise ValueError("the solver pipeline handles intervals only")
    sv = so.s
    f = 1.0 if f is None else f
    res = solver1d.solve_with_traces(domain, so, f, N)
    x, u, h = res.x, res.u, res.h
    du = _grid_gradient(x, u)
    lhs = h * np.sum((x - z[0]) * du * res.f)
    energy = h * np.sum(u * res.f)
    vol = 0.5 * (2.0 * sv - 1.0) * energy
    a, b = domain.center[0] - domain.radius, domain.center[0] + domain.radius
    ta, tb = res.traces
    bnd = -0.5 * gamma(1.0 + sv) ** 2 * (ta ** 2 * (z[0] - a) + tb ** 2 * (b - z[0]))
    ing = {"energy": energy, "trace_left": ta, "trace_right": tb, "N": N, "h": h}
    return IdentityReport.build("pohozaev", lhs, vol, bnd, ing, "numeric", 1, sv,
                                2e-2 if tolerance is None else tolerance)


def _kernel_products(n, so, X1, X2, v1, v2):
    """(K v2 at X1, K^T v1 at X2) for the interaction kernel K(X1 - X2), in row blocks."""
    a = np.empty(len(X1))
    b = np.zeros(len(X2))
    step = max(1, 2 ** 18 // len(X2))
    for i in range(0, len(X1), step):
        K = interaction_kernel(n, so, X1[i:i + step, None, :] - X2[None, :, :])
        a[i:i + step] = K @ v2
        b += K.T @ v1[i:i + step]
    return a, b


def intbyparts_check(u1, u2, domain, s, i=0, *, lap1=None, lap2=None, f2=None, N=2048,
                     m=64, boundary_nodes=64, tolerance=None):
    """int (-Lap)^s u1 d_i u2 + int d_i u1 (-Lap)^s u2 = -Gamma(1+s)^2 int (u1/d^s)(u2/d^s) nu_i.

    Three ways in: exact fields with exact operators (analytic); u2 = None
    with ``f2`` given, so u2 is the discrete solution of (-Lap)^s u2 = f2
    (mixed, intervals only); two bumps with disjoint supports, where the
    operators come from the interaction kernel.
    """
    so = _order(s)
    sv, n = so.s, domain.n
    g2 = gamma(1.0 + sv) ** 2
    bq = domain.boundary_quadrature(boundary_nodes)
    if u2 is None:
        return _ibp_mixed(u1, domain, so, i, lap1, f2, N, tolerance)
    if isinstance(u1, Bump) and isinstance(u2, Bump) and lap1 is None and lap2 is None:
        _check_disjoint(u1, u2)
        X1, W1 = u1.rule()
        X2, W2 = u2.rule()
        L2at1, L1at2 = _kernel_products(n, so, X1, X2, W1 * u1(X1), W2 * u2(X2))
        # d_i u2 lives on supp u2, (-Lap)^s u1 there is L1at2; and vice versa
        lhs = np.dot(W2, L1at2 * u2.gradient(X2)[:, i]) + np.dot(W1, u1.gradient(X1)[:, i] * L2at1)
        tr1, tr2 = _traces(u1, domain, sv, bq), _traces(u2, domain, sv, bq)
        bnd = -g2 * float(np.dot(bq.weights, tr1 * tr2 * bq.normals[:, i]))
        tol = 1e-8 if tolerance is None else tolerance
        return IdentityReport.build("ibp", lhs, 0.0, bnd, {"kernel_pairs": len(X1) * len(X2)}, "numeric", n, sv, tol)
    lap1 = lap1 or _default_lap(u1, sv)
    lap2 = lap2 or _default_lap(u2, sv)
    if lap1 is None or lap2 is None:
        raise PreconditionError("need exact operators for both fields")
    X, W = domain.volume_rule(m, sv - 1.0)
    lhs = np.dot(W, lap1(X) * u2.gradient(X)[:, i] + u1.gradient(X)[:, i] * lap2(X))
    tr1, tr2 = _traces(u1, domain, sv, bq), _traces(u2, domain, sv, bq)
    bnd = -g2 * float(np.dot(bq.weights, tr1 * tr2 * bq.normals[:, i]))
    tol = 1e-12 if tolerance is None else tolerance
    return IdentityReport.build("ibp", lhs, 0.0, bnd, {"trace1": float(tr1.mean()), "trace2": float(tr2.mean())},
                                "analytic", n, sv, tol)


def _ibp_mixed(u1, domain, so, i, lap1, f2, N, tolerance):
    if domain.n != 1 or i != 0:
        raise ValueError("the mixed pipeline handles intervals only")
    if f2 is None:
        raise PreconditionError("need f2 to produce u2 with the solver")
    sv = so.s
    lap1 = lap1 or _default_lap(u1, sv)
    res = solver1d.solve_with_traces(domain, so, f2, N)
    x, h = res.x, res.h
    X = x[:, None]
    du2 = _grid_gradient(x, res.u)
    lhs = h * np.sum(lap1(X) * du2 + u1.gradient(X)[:, 0] * res.f)
    a, b = domain.center[0] - domain.radius, domain.center[0] + domain.radius
    t1a, t1b = boundary_trace(u1, domain, sv, [a]), boundary_trace(u1, domain, sv, [b])
    t2a, t2b = res.traces
    bnd = -gamma(1.0 + sv) ** 2 * (t1b * t2b - t1a * t2a)
    ing = {"trace1": [t1a, t1b], "trace2": [t2a, t2b], "N": N}
    return IdentityReport.build("ibp", lhs, 0.0, bnd, ing, "mixed", 1, sv,
                                2e-2 if tolerance is None else tolerance)


def semilinear_pohozaev(u, domain, s, nl, mode="analytic", *, lap=None, m=64, boundary_nodes=64,
                        constraint_tol=1e-8, tolerance=None):
    """(2s-n) int u f(u) + 2n int F(u) = Gamma(1+s)^2 int (u/d^s)^2 (x.nu).

    The pair must satisfy (-Lap)^s u = f(u); it is checked at the volume
    nodes against ``lap`` (exact in analytic mode, pointwise quadrature in
    numeric mode).
    """
    so = _order(s)
    sv, n = so.s, domain.n
    if mode == "analytic":
        lap = lap or _default_lap(u, sv)
        if lap is None:
            raise PreconditionError("analytic mode needs an exact (-Lap)^s u")
    else:
        lap = lap or _numeric_lap(u, so)
    X, W = domain.volume_rule(m, sv)
    uv = u(X)
    viol = float(np.max(np.abs(lap(X) - nl.f(uv))))
    if viol > constraint_tol:
        raise PreconditionError(f"(-Lap)^s u differs from f(u) by {viol:.3e}")
    uf = np.dot(W, uv * nl.f(uv))
    Fu = np.dot(W, nl.F(uv))
    lhs = (2.0 * sv - n) * uf + 2.0 * n * Fu
    bq = domain.boundary_quadrature(boundary_nodes)
    tr = _traces(u, domain, sv, bq)
    bnd = gamma(1.0 + sv) ** 2 * _boundary_term(tr ** 2, bq, np.zeros(n))
    tol = tolerance if tolerance is not None else (1e-10 if mode == "analytic" else 1e-4)
    return IdentityReport.build("semilinear", lhs, 0.0, bnd, {"int_uf": uf, "int_F": Fu, "constraint": viol},
                                mode, n, sv, tol)


def eigen_pohozaev_report(res, s, tolerance=3e-2):
    """Report for 2 s lam int phi^2 = Gamma(1+s)^2 (trace(a)^2 + trace(b)^2)."""
    lhs, rhs = res.balance(s)
    ing = {"lambda1": res.lam, "lambda1_coarse": res.lam_coarse, "traces": list(res.traces),
           "int_phi2": float(np.sum(res.phi ** 2) * res.h), "N": len(res.phi)}
    return IdentityReport.build("eigen", lhs, 0.0, rhs, ing, "numeric", 1, s, tolerance)


# ---------------------------------------------------------------- dilation

def _log_minus(a):
    a = np.asarray(a, dtype=float)
    pos = a > 0
    return np.where(pos, np.minimum(np.log(np.where(pos, a, 1.0)), 0.0), 0.0)


@dataclass(frozen=True)
class DilationModel:
    """phi(t) = A log^-|ct - 1| + B chi_[0,1](ct) + h(ct) on t >= 0.

    ``h`` must be smooth, bounded, and vanish beyond ``h_extent``;
    ``h_points`` lists places where h is only piecewise smooth or changes
    fast (e.g. the ends of a bump's support), used as quadrature breakpoints.
    ``scale`` is the dilation c (1 for the standard model).
    """

    A: float = 0.0
    B: float = 0.0
    h: Optional[Callable] = None
    h_extent: float = 4.0
    scale: float = 1.0
    h_points: tuple = ()

    def __call__(self, t):
        t = self.scale * np.asarray(t, dtype=float)
        out = self.A * _log_minus(np.abs(t - 1.0)) + self.B * ((t >= 0.0) & (t <= 1.0))
        if self.h is not None:
            out = out + self.h(t)
        return out

    @property
    def singular_points(self):
        return [p / self.scale for p in (1.0, 2.0) + tuple(self.h_points)]

    @property
    def extent(self):
        return max(2.0, self.h_extent if self.h is not None else 2.0) / self.scale

    def closed_form(self):
        return self.A ** 2 * math.pi ** 2 + self.B ** 2


def dilation_integral(phi, lam, singular_points, extent):
    """I(lam) = int_0^inf phi(lam t) phi(t / lam) dt with panels graded at every kink."""
    pts = [0.0, extent * lam]
    for p in singular_points:
        pts += [p / lam, p * lam]
    t, w = breakpoint_rule(pts, panels=8, order=16, levels=30, ratio=0.3)
    return float(np.sum(w * phi(lam * t) * phi(t / lam)))


def dilation_derivative(model, scheme="quadrature", ms=range(4, 9), *, singular_points=None,
                        extent=None, full_output=False, rtol=1e-5):
    """-d/dlam at lam = 1+ of int_0^inf phi(lam t) phi(t/lam) dt.

    ``quadrature`` takes forward differences at lam = 1 + 2^-m and
    extrapolates in the step (Neville). ``closed_form`` returns
    A^2 pi^2 + B^2 for a :class:`DilationModel`. A plain callable phi must
    come with its ``singular_points`` and ``extent`` (support bound).
    """
    if scheme == "closed_form":
        if not isinstance(model, DilationModel):
            raise ValueError("closed form needs a DilationModel")
        return model.closed_form()
    if scheme != "quadrature":
        raise ValueError(f"unknown scheme {scheme!r}")
    if isinstance(model, DilationModel):
        singular_points = model.singular_points if singular_points is None else singular_points
        extent = model.extent if extent is None else extent
    if singular_points is None or extent is None:
        raise ValueError("a callable phi needs singular_points and extent")
    I1 = dilation_integral(model, 1.0, singular_points, extent)
    eps = 2.0 ** -np.asarray(list(ms), dtype=float)
    D = np.array([-(dilation_integral(model, 1.0 + e, singular_points, extent) - I1) / e for e in eps])
    T = neville(eps, D)
    diag = np.diag(T)
    gaps = np.abs(np.diff(diag))
    val = float(diag[-1])
    if gaps[-1] > rtol * max(abs(val), 1.0) and gaps[-1] >= gaps[-2]:
        raise ExtrapolationError(f"lambda extrapolation did not settle (gap {gaps[-1]:.3e})", T)
    if full_output:
        return val, {"steps": eps, "differences": D, "table": T, "I1": I1}
    return val


# ---------------------------------------------------------------- scaling identity

def _dilated_w(u, s, n, L, N, lam, support):
    """(-Lap)^(s/2) u evaluated at lam * y on the FFT grid y.

    For evaluable u the dilate u(lam .) is sampled directly and the
    operator rescaled, (-Lap)^sig [u(lam .)] = lam^(2 sig) w(lam .).
    """
    g = GridField.sample(lambda X: u(lam * X), n, L, N, support / lam)
    return fft_frlap(g, 0.5 * s).values * lam ** (-s)


def _resampled_w(w, lam):
    """Linear resampling of a GridField at lam * y (for sampled input)."""
    Y = w.coords() * lam
    idx = (Y + w.L) / w.h
    coords = [idx[..., j] for j in range(w.n)]
    out = map_coordinates(w.values, coords, order=1, mode="constant", cval=0.0)
    return out


def scaling_identity_check(u, domain, s, *, lap=None, L=None, N=2 ** 16, eps=None, m=64,
                           tolerance=5e-2, full_output=False):
    """int (x.grad u)(-Lap)^s u = ((2s-n)/2) int u (-Lap)^s u + (1/2) d/dlam|1+ I_lam, I_lam = int w_lam w_(1/lam).

    w = (-Lap)^(s/2) u through the FFT. ``u`` is an evaluable field (the
    dilates u(lam .) are resampled from u itself) or a GridField (dilates by
    linear interpolation of w). The derivative is a forward difference at
    lam = 1 + eps (default eps = 0.1, 0.05, 0.025, 0.0125) with Neville
    extrapolation. The volume terms need (-Lap)^s u inside the domain
    only and use the quadrature of :func:`pohozaev_check` (exact ``lap``
    for the ball solution, pointwise quadrature otherwise); for GridField
    input they fall back to the FFT.
    """
    so = _order(s)
    sv, n = so.s, domain.n
    R = domain.radius
    eps = np.asarray(eps if eps is not None else 0.1 * 2.0 ** -np.arange(4), dtype=float)
    if np.max(eps) > 0.1 + 1e-12:
        raise ValueError("dilation beyond lam = 1.1 leaves the resampling guard")
    if isinstance(u, GridField):
        g = u
        L, N = g.L, g.N
        if not g.support_radius * 1.1 < L / 2:
            raise ValueError("resampling out of guard")
        w = fft_frlap(g, 0.5 * sv)
        w_at = lambda lam: _resampled_w(w, lam)
    else:
        L = L or 4.0 * R
        if not 1.1 * R < L / 2:
            raise ValueError("resampling out of guard")
        g = GridField.sample(u, n, L, N, R)
        w_at = lambda lam: _dilated_w(u, sv, n, L, N, lam, R)
    dv = g.h ** n
    w1 = w_at(1.0)
    I1 = float(np.sum(w1 * w1) * dv)
    D = np.array([-(float(np.sum(w_at(1.0 + e) * w_at(1.0 / (1.0 + e))) * dv) - I1) / e for e in eps])
    T = neville(eps, D)
    diag = np.diag(T)
    d_right = float(diag[-1])

    if isinstance(u, GridField):
        lapv = fft_frlap(g, sv).values
        X = g.coords()
        inside = np.linalg.norm(X, axis=-1) < R
        lhs = float(np.sum(np.where(inside, _spectral_xgrad(g) * lapv, 0.0)) * dv)
        energy = float(np.sum(np.where(inside, g.values * lapv, 0.0)) * dv)
        prov = "numeric"
    else:
        exact = lap or _default_lap(u, sv)
        prov = "mixed" if exact is not None else "numeric"
        lap = exact or _numeric_lap(u, so)
        Xg, Wg = _volume_rule(u, domain, sv - 1.0, m)
        Xu, Wu = _volume_rule(u, domain, sv, m)
        lhs = float(np.dot(Wg, np.sum(Xg * u.gradient(Xg), axis=-1) * lap(Xg)))
        energy = float(np.dot(Wu, u(Xu) * lap(Xu)))
    vol = 0.5 * (2.0 * sv - n) * energy
    bnd = -0.5 * d_right
    ing = {"I1": I1, "energy": energy, "minus_dI": d_right, "differences": D, "steps": eps,
           "table_diag": diag, "N": N, "L": L}
    rep = IdentityReport.build("scaling", lhs, vol, bnd, ing, prov, n, sv, tolerance)
    if full_output:
        return rep, {"w": w1, "grid": g}
    return rep


def _spectral_xgrad(g):
    freqs = 2.0 * np.pi * np.fft.fftfreq(g.N, d=g.h)
    F = np.fft.fftn(g.values)
    X = g.coords()
    out = np.zeros_like(g.values)
    for j in range(g.n):
        shape = [1] * g.n
        shape[j] = g.N
        dj = np.real(np.fft.ifftn(F * 1j * freqs.reshape(shape)))
        out += X[..., j] * dj
    return out


def dilation_symmetry(u, domain, s, lam, L=None, N=2 ** 14):
    """I_lam computed two ways on the FFT grid: directly, and after y = lam z,
    as lam int w(lam^2 z) w(z) dz. Both equal I_(1/lam) by symmetry."""
    R = domain.radius
    L = L or 4.0 * R
    n = domain.n
    dv = (2.0 * L / N) ** n
    direct = float(np.sum(_dilated_w(u, s, n, L, N, lam, R) * _dilated_w(u, s, n, L, N, 1.0 / lam, R)) * dv)
    moved = lam ** n * float(np.sum(_dilated_w(u, s, n, L, N, lam * lam, R) * _dilated_w(u, s, n, L, N, 1.0, R)) * dv)
    return direct, moved


# ---------------------------------------------------------------- disjoint supports

def _check_disjoint(u1, u2):
    gap = np.linalg.norm(np.asarray(u1.center) - np.asarray(u2.center)) - u1.radius - u2.radius
    if gap < 2.0 * max(u1.radius, u2.radius):
        raise PreconditionError(f"supports too close (gap {gap:.3g})")


def disjoint_support_check(u1, u2, s, tolerance=1e-6):
    """Scaling identity for two bumps with disjoint supports, via the interaction kernel.

    int (x.grad u1)(-Lap)^s u2 + int (x.grad u2)(-Lap)^s u1 = ((2s-n)/2) [int u1 (-Lap)^s u2 + int u2 (-Lap)^s u1].
    Also records the symmetry defect |int u1 (-Lap)^s u2 - int u2 (-Lap)^s u1|.
    """
    so = _order(s)
    sv = so.s
    _check_disjoint(u1, u2)
    n = u1.n
    X1, W1 = u1.rule()
    X2, W2 = u2.rule()
    v1, v2 = W1 * u1(X1), W2 * u2(X2)
    L2at1, L1at2 = _kernel_products(n, so, X1, X2, v1, v2)
    a12 = float(np.dot(v1, L2at1))
    a21 = float(np.dot(v2, L1at2))
    g1 = np.sum(X1 * u1.gradient(X1), axis=-1)
    g2 = np.sum(X2 * u2.gradient(X2), axis=-1)
    lhs = float(np.dot(W1 * g1, L2at1) + np.dot(W2 * g2, L1at2))
    vol = 0.5 * (2.0 * sv - n) * (a12 + a21)
    ing = {"u1_Lu2": a12, "u2_Lu1": a21, "symmetry_defect": abs(a12 - a21),
           "x_grad_u1_Lu2": float(np.dot(W1 * g1, L2at1)), "x_grad_u2_Lu1": float(np.dot(W2 * g2, L1at2))}
    return IdentityReport.build("disjoint", lhs, vol, 0.0, ing, "numeric", n, sv, tolerance)


# ---------------------------------------------------------------- commutator

def commutator_check(w, k, n=None, *, h=0.05, points=None, gradient=None):
    """(-Lap)^k (x.grad w) - x.grad (-Lap)^k w - 2k (-Lap)^k w.

    ``w`` a sympy expression (n taken from its symbols x0..x{n-1} or given)
    is reduced symbolically and the exact residual returned (0 for
    polynomials). A callable w is differenced at ``points`` with 8th-order
    stencils and the max residual returned; pass ``gradient`` (exact
    grad w) to avoid nesting difference quotients.
    """
    try:
        import sympy as sp
    except ImportError:  # pragma: no cover
        sp = None
    if sp is not None and isinstance(w, sp.Basic):
        xs = sp.symbols(f"x0:{n}")

        def nlap(e):
            return -sum(sp.diff(e, v, 2) for v in xs)

        def power(e, j):
            for _ in range(j):
                e = nlap(e)
            return e

        xgrad = lambda e: sum(v * sp.diff(e, v) for v in xs)
        res = sp.expand(power(xgrad(w), k) - xgrad(power(w, k)) - 2 * k * power(w, k))
        return sp.simplify(res)
    from .frlap_eval import neg_laplacian_stencil

    n = n or 1
    X = np.asarray(points, dtype=float).reshape(-1, n)
    grad = gradient or _fd_grad(w, n, h)
    offs, wts = neg_laplacian_stencil(n, k, h, accuracy=8)
    P = X[:, None, :] + offs[None]
    G = grad(P)

    def apply(v):
        # the weights sum to zero and are large: difference against the centre
        # value and sum pairwise (no BLAS, same rounding for any batch)
        return np.sum((v - v[:, :1]) * wts, axis=1)

    centre = int(np.argmin(np.abs(offs).sum(axis=1)))
    order = np.r_[centre, np.delete(np.arange(len(wts)), centre)]
    P, G, wts = P[:, order], G[:, order], wts[order]
    # (-Lap_h)^k (x.grad w) and x.grad (-Lap_h)^k w share the stencil
    lhs = apply(np.sum(P * G, axis=-1))
    rhs = apply(np.sum(X[:, None, :] * G, axis=-1)) + 2 * k * apply(w(P))
    return float(np.max(np.abs(lhs - rhs)))


def _fd_grad(f, n, h):
    # 8th-order centred first derivative
    c = np.array([1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280])
    off = np.arange(-4, 5)

    def g(X):
        X = np.asarray(X, dtype=float)
        out = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            P = X[..., None, :] + off[:, None] * e
            out.append(f(P) @ c / h)
        return np.stack(out, axis=-1)

    return g


def commutator_power_check(n, k, beta):
    """The commutator on |x|^beta through the closed power rule: returns the residual coefficient."""
    lk = power_laplacian(n, k, beta)
    # x.grad |x|^b = b |x|^b
    lhs = beta * lk.coeff
    rhs = lk.exponent * lk.coeff + 2 * k * lk.coeff
    return lhs - rhs
