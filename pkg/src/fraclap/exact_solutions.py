"""Closed-form objects: the explicit ball solution, Dyda's forward formula,
integer powers of the Laplacian on |x|^beta and on the distance, and the
truncated half-line profile (x_+)^s.

All normalisations here are free of a pi^(n/2) factor in the forward
formula; with it the ball coefficient and the forward value would not be
reciprocal and the classical 1D check (-Lap)^(1/2) (1-x^2)_+^(1/2) = 1
fails. The quadrature oracle in :mod:`fraclap.frlap_eval` confirms the
choice.
"""
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .specfun import DomainError, FracOrder, gamma, hyp2f1_terminating, pochhammer


def _order(s):
    return s if isinstance(s, FracOrder) else FracOrder(s)


def _check_dim(n):
    if n not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {n}")


def ball_coefficient(n, s):
    """C(n, s) = 2^(-2s) Gamma(n/2) / (Gamma((n+2s)/2) Gamma(1+s))."""
    return 2.0 ** (-2.0 * s) * gamma(n / 2.0) / (gamma((n + 2.0 * s) / 2.0) * gamma(1.0 + s))


def forward_total(n, s):
    """K(n, s) = (-Lap)^s (1-|x|^2)_+^s inside the unit ball."""
    s = _order(s).s
    _check_dim(n)
    return 2.0 ** (2.0 * s) * gamma(n / 2.0 + s) * gamma(1.0 + s) / gamma(n / 2.0)


@dataclass(frozen=True)
class BallSolution:
    """u = coeff (1 - |x|^2)_+^s, the solution of (-Lap)^s u = 1 in B_1, u = 0 outside."""

    order: FracOrder
    n: int
    coeff: float

    @property
    def s(self):
        return self.order.s

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        t = 1.0 - np.sum(X * X, axis=-1)
        return self.coeff * np.where(t > 0, np.abs(t) ** self.s, 0.0)

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        t = 1.0 - np.sum(X * X, axis=-1)
        g = np.where(t > 0, -2.0 * self.s * self.coeff * np.abs(t) ** (self.s - 1.0), 0.0)
        return g[..., None] * X

    def trace(self):
        """Boundary value of u / d^s, the same at every boundary point."""
        return self.coeff * 2.0 ** self.s

    def integral(self):
        """int_B u dx = coeff * |S^{n-1}| * B(n/2, s+1) / 2."""
        n, s = self.n, self.s
        return self.coeff * math.pi ** (n / 2.0) * gamma(s + 1.0) / gamma(n / 2.0 + s + 1.0)

    def neg_laplacian(self, j):
        """Exact (-Lap)^j u inside the ball (zero outside), as a callable."""
        return ball_power_neg_laplacian(self.n, self.s, j, self.coeff)

    def field(self):
        from .frlap_eval import Field, Kinks

        return Field(self, self.n, np.zeros(self.n), 1.0, Kinks.spheres(np.zeros(self.n), 1.0))


def ball_solution(n, s):
    s = _order(s)
    _check_dim(n)
    return BallSolution(s, n, ball_coefficient(n, s.s))


def ball_power_neg_laplacian(n, s, j, scale=1.0):
    """(-Lap)^j (1-|x|^2)_+^s in the open unit ball, zero outside.

    With t = |x|^2 the radial Laplacian is 4 t g'' + 2 n g'; functions are
    kept as sums p_i(t) (1-t)^(s-i) with polynomial p_i.
    """
    terms = {0: np.array([1.0])}
    for _ in range(j):
        # first derivative in t of p (1-t)^a: p' (1-t)^a - a p (1-t)^(a-1)
        def deriv(tm):
            out = {}
            for i, p in tm.items():
                a = s - i
                out[i] = P.polyadd(out.get(i, [0.0]), P.polyder(p))
                out[i + 1] = P.polysub(out.get(i + 1, [0.0]), a * p)
            return out

        d1 = deriv(terms)
        d2 = deriv(d1)
        new = {}
        for i, p in d2.items():
            new[i] = P.polysub(new.get(i, [0.0]), 4.0 * P.polymulx(p))
        for i, p in d1.items():
            new[i] = P.polysub(new.get(i, [0.0]), 2.0 * n * p)
        terms = new

    def g(X):
        X = np.asarray(X, dtype=float)
        t = np.sum(X * X, axis=-1)
        inside = t < 1.0
        om = np.where(inside, 1.0 - t, 1.0)
        val = np.zeros_like(t)
        for i, p in terms.items():
            val = val + P.polyval(t, p) * om ** (s - i)
        return scale * np.where(inside, val, 0.0)

    return g


def dyda_forward(n, s, r2):
    """(-Lap)^s0 (1-|x|^2)_+^s at |x|^2 = r2 < 1: constant * 2F1(n/2+s0, -k; n/2; r2)."""
    s = _order(s)
    _check_dim(n)
    r2 = np.asarray(r2, dtype=float)
    if np.any(r2 >= 1) or np.any(r2 < 0):
        raise DomainError("r2 must lie in [0, 1)")
    k, s0 = s.k, s.s0
    const = (2.0 ** (2.0 * s0) * gamma(n / 2.0 + s0) * gamma(k + 1.0 + s0)
             / (gamma(n / 2.0) * gamma(k + 1.0)))
    return const * hyp2f1_terminating(n / 2.0 + s0, k, n / 2.0, r2)


def dyda_polynomial(n, s):
    """Coefficients in r2 = |x|^2 (ascending) of the Dyda polynomial."""
    s = _order(s)
    k, s0 = s.k, s.s0
    const = (2.0 ** (2.0 * s0) * gamma(n / 2.0 + s0) * gamma(k + 1.0 + s0)
             / (gamma(n / 2.0) * gamma(k + 1.0)))
    a, c = n / 2.0 + s0, n / 2.0
    coef = [pochhammer(a, m) * pochhammer(-k, m) / (pochhammer(c, m) * math.factorial(m)) for m in range(k + 1)]
    return const * np.array(coef)


@dataclass(frozen=True)
class PowerLaplacianResult:
    """(-Lap)^k |x|^beta = coeff |x|^exponent."""

    coeff: float
    exponent: float


def power_laplacian(n, k, beta):
    """(-Lap)^k |x|^beta = beta(beta-2)...(beta-2k+2) (2-n-beta)(4-n-beta)...(2k-n-beta) |x|^(beta-2k)."""
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive integer, got {k}")
    c = 1.0
    for j in range(int(k)):
        c *= (beta - 2.0 * j) * (2.0 * (j + 1) - n - beta)
    return PowerLaplacianResult(c, beta - 2.0 * k)


def apply_neg_laplacian_radial_poly(n, coef, k):
    """(-Lap)^k of sum_m coef[m] |x|^(2m), returned as coefficients in |x|^2."""
    coef = np.asarray(coef, dtype=float)
    for _ in range(k):
        out = np.zeros(max(len(coef) - 1, 1))
        for m in range(1, len(coef)):
            res = power_laplacian(n, 1, 2.0 * m)
            out[m - 1] += coef[m] * res.coeff
        coef = out
    return coef


def dist_power_laplacian_1d(beta, k, t, exact_zone=None):
    """Lap^k d^beta = beta(beta-1)...(beta-2k+1) d^(beta-2k) where d is affine (1D).

    ``exact_zone`` is the depth up to which d equals the distance; depths
    outside (0, exact_zone] are rejected.
    """
    if not beta > k or float(beta).is_integer():
        raise DomainError("need noninteger beta > k")
    if t <= 0 or (exact_zone is not None and t > exact_zone):
        raise DomainError(f"depth {t} outside the exact-distance zone")
    c = 1.0
    for j in range(2 * int(k)):
        c *= beta - j
    return c * t ** (beta - 2.0 * k)


def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def halfline_model(s, rho0, t, cap=1.0):
    """phi(t) = (t_+)^s for t < rho0, blended smoothly to the constant
    ``cap * rho0^s`` over [rho0, 2 rho0]. Bounded, C-infinity on t > 0."""
    t = np.asarray(t, dtype=float)
    base = np.where(t > 0, np.abs(t) ** s, 0.0)
    lam = _smooth_step((t - rho0) / rho0)
    out = (1.0 - lam) * base + lam * cap * rho0 ** s
    return out if out.ndim else float(out)
