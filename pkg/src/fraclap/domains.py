"""Intervals and balls: distances, the smoothed distance d, normals and
boundary quadrature."""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .exact_solutions import _smooth_step
from .quadrature import interval_rule


@dataclass(frozen=True)
class BoundaryQuadrature:
    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray

    def integrate(self, values):
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class DomainSpec:
    """An interval (a, b) (n = 1) or a ball B_R(center) in dimension 1..3.

    ``crossover`` is the depth up to which the smoothed distance equals the
    true distance. Beyond it d bends over smoothly and is constant
    (= 1.5 crossover) from depth 2 crossover on.
    """

    kind: str
    n: int
    center: tuple
    radius: float
    crossover: float = 0.25
    z0: tuple = None

    def __post_init__(self):
        if self.kind not in ("interval", "ball"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.n not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if len(self.center) != self.n:
            raise ValueError("center has the wrong dimension")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not 0 < self.crossover < self.radius / 2:
            raise ValueError("crossover must lie in (0, radius/2)")
        if self.z0 is None:
            object.__setattr__(self, "z0", tuple(self.center))
        z0 = np.asarray(self.z0, dtype=float)
        if np.linalg.norm(z0 - np.asarray(self.center)) >= self.radius:
            raise ValueError("z0 must make the domain strictly star-shaped")

    @classmethod
    def interval(cls, a, b, crossover=None, z0=None):
        R = (b - a) / 2.0
        crossover = R / 4.0 if crossover is None else crossover
        return cls("interval", 1, ((a + b) / 2.0,), R, crossover, None if z0 is None else (z0,))

    @classmethod
    def ball(cls, n, radius=1.0, center=None, crossover=None, z0=None):
        center = tuple([0.0] * n) if center is None else tuple(center)
        crossover = radius / 4.0 if crossover is None else crossover
        return cls("ball", n, center, radius, crossover, None if z0 is None else tuple(z0))

    @classmethod
    def from_json(cls, text):
        cfg = json.loads(text) if isinstance(text, str) else dict(text)
        if cfg["kind"] == "interval":
            return cls.interval(cfg.get("a", -1.0), cfg.get("b", 1.0), cfg.get("crossover"))
        return cls.ball(cfg["n"], cfg.get("radius", 1.0), cfg.get("center"), cfg.get("crossover"))

    def to_json(self):
        if self.kind == "interval":
            c = self.center[0]
            return {"kind": "interval", "a": c - self.radius, "b": c + self.radius, "crossover": self.crossover}
        return {"kind": "ball", "n": self.n, "radius": self.radius, "center": list(self.center),
                "crossover": self.crossover}

    @property
    def rho0(self):
        """Radius of the interior/exterior touching balls."""
        return self.radius

    def _signed(self, X):
        """R - |x - center|: positive inside, negative outside."""
        X = np.asarray(X, dtype=float)
        return self.radius - np.linalg.norm(X - np.asarray(self.center), axis=-1)

    def exact_distance(self, X):
        """delta(x) = dist(x, boundary) on both sides."""
        return np.abs(self._signed(X))

    def inside(self, X):
        return self._signed(X) > 0

    def smoothed_distance(self, X):
        """d(x): positive in the domain, zero outside, equal to delta near the boundary."""
        t = self._signed(X)
        return np.where(t > 0, smooth_clamp(np.maximum(t, 0.0), self.crossover), 0.0)

    def outward_normal(self, X):
        X = np.asarray(X, dtype=float)
        d = X - np.asarray(self.center)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def boundary_quadrature(self, m=64):
        """Points, surface weights and outward normals on the boundary."""
        c = np.asarray(self.center)
        R = self.radius
        if self.n == 1:
            nu = np.array([[-1.0], [1.0]])
            return BoundaryQuadrature(c + R * nu, np.ones(2), nu)
        if self.n == 2:
            th = 2.0 * np.pi * np.arange(m) / m
            nu = np.stack([np.cos(th), np.sin(th)], axis=1)
            return BoundaryQuadrature(c + R * nu, np.full(m, 2.0 * np.pi * R / m), nu)
        z, wz = np.polynomial.legendre.leggauss(m)
        phi = np.pi * np.arange(2 * m) / m
        Z, PHI = np.meshgrid(z, phi, indexing="ij")
        rho = np.sqrt(1.0 - Z ** 2)
        nu = np.stack([rho * np.cos(PHI), rho * np.sin(PHI), Z], axis=-1).reshape(-1, 3)
        w = (wz[:, None] * np.full(2 * m, np.pi / m)[None, :]).ravel() * R * R
        return BoundaryQuadrature(c + R * nu, w, nu)

    def perimeter(self):
        R = self.radius
        return {1: 2.0, 2: 2.0 * math.pi * R, 3: 4.0 * math.pi * R * R}[self.n]

    def volume(self):
        n, R = self.n, self.radius
        return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * R ** n

    def volume_rule(self, m=64, alpha=0.0, angular=64):
        """Gauss-Jacobi rule for integrals over the domain.

        Exact (up to the angular rule) for F = (1 - |x-c|^2/R^2)^alpha p(|x-c|^2)
        with polynomial p of degree < m, so integrands behaving like
        d^alpha at the boundary are integrated to full accuracy.
        """
        return volume_rule(self, m, alpha, angular)


def smooth_clamp(t, c):
    """int_0^t psi, psi = 1 on [0, c], smooth decreasing to 0 on [c, 2c]."""
    t = np.asarray(t, dtype=float)
    out = np.minimum(t, c)
    zone = t > c
    if np.any(zone):
        x, w = interval_rule(0.0, 1.0, panels=8, order=16)
        tt = t[zone]
        # psi vanishes beyond 2c, so integrate only up to min(t - c, c)
        top = np.minimum(tt - c, c)
        a = top[:, None] * x[None, :]
        extra = np.sum((1.0 - _smooth_step(a / c)) * w[None, :], axis=1) * top
        out = out.astype(float)
        out[zone] = c + extra
    return out


def volume_rule(dom, m=64, alpha=0.0, angular=64):
    n, R = dom.n, dom.radius
    c = np.asarray(dom.center)
    beta = n / 2.0 - 1.0
    # t = r^2 / R^2 = (1 + u) / 2 with Jacobi weight (1-u)^alpha (1+u)^beta
    u, wu = roots_jacobi(m, alpha, beta)
    t = 0.5 * (1.0 + u)
    # undo the weight so the rule integrates plain functions
    wt = wu / ((1.0 - u) ** alpha * (1.0 + u) ** beta) * 0.5
    r = R * np.sqrt(t)
    # dx = (R^n / 2) t^(n/2 - 1) dt dOmega
    radial_w = 0.5 * R ** n * t ** beta * wt
    if n == 1:
        pts = np.concatenate([c[0] - r, c[0] + r])[:, None]
        return pts, np.concatenate([radial_w, radial_w])
    if n == 2:
        th = 2.0 * np.pi * np.arange(angular) / angular
        E = np.stack([np.cos(th), np.sin(th)], axis=1)
        W = np.full(angular, 2.0 * np.pi / angular)
    else:
        bq = dom.boundary_quadrature(angular)
        E, W = bq.normals, bq.weights / R ** 2
    pts = c + r[:, None, None] * E[None, :, :]
    return pts.reshape(-1, n), (radial_w[:, None] * W[None, :]).ravel()
