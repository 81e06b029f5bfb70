"""Panel quadrature helpers shared by the evaluators and the identity checks."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre01(order):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def graded_template(panels, order, levels, ratio, left=True, right=True):
    """Composite rule on [0, 1], uniform in the middle, geometric toward the ends.

    Returns (nodes, weights); weights sum to 1 and no node sits on an end.
    """
    edges = np.linspace(0.0, 1.0, panels + 1)
    cuts = [edges]
    width = 1.0 / panels
    if left and levels:
        cuts.append(width * ratio ** np.arange(1, levels + 1))
    if right and levels:
        cuts.append(1.0 - width * ratio ** np.arange(1, levels + 1))
    edges = np.unique(np.concatenate(cuts))
    t, w = gauss_legendre01(order)
    a, b = edges[:-1], edges[1:]
    nodes = (a[:, None] + (b - a)[:, None] * t[None, :]).ravel()
    weights = ((b - a)[:, None] * w[None, :]).ravel()
    return nodes, weights


def segment_rule(a, b, template):
    """Map a [0, 1] template onto segments [a, b] (broadcast over leading axes)."""
    t, w = template
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    return a + (b - a) * t, (b - a) * w


def interval_rule(a, b, panels=32, order=16, levels=0, ratio=0.25):
    """Composite Gauss rule on one finite interval, optionally graded at both ends."""
    tpl = graded_template(panels, order, levels, ratio)
    x, w = segment_rule(a, b, tpl)
    return x, w


def breakpoint_rule(points, panels=8, order=16, levels=24, ratio=0.25):
    """Rule on [points[0], points[-1]] graded toward every interior breakpoint."""
    points = np.unique(np.asarray(points, dtype=float))
    tpl = graded_template(panels, order, levels, ratio)
    xs, ws = segment_rule(points[:-1], points[1:], tpl)
    return xs.ravel(), ws.ravel()
