import math

import numpy as np
import pytest
import sympy as sp

from fraclap.exact_solutions import (apply_neg_laplacian_radial_poly, ball_coefficient, ball_power_neg_laplacian,
                                     ball_solution, dist_power_laplacian_1d, dyda_forward, dyda_polynomial,
                                     forward_total, halfline_model, power_laplacian)
from fraclap.specfun import DomainError


def test_ball_coefficients():
    assert ball_coefficient(1, 0.5) == pytest.approx(1.0, rel=1e-14)
    assert ball_coefficient(1, 1.5) == pytest.approx(1 / 6, rel=1e-14)
    assert ball_coefficient(2, 1.5) == pytest.approx(2 / (9 * math.pi), rel=1e-14)


def test_forward_totals():
    assert forward_total(1, 0.5) == pytest.approx(1.0, rel=1e-14)
    assert forward_total(1, 1.5) == pytest.approx(6.0, rel=1e-14)
    assert forward_total(2, 1.5) == pytest.approx(9 * math.pi / 2, rel=1e-14)


def test_dyda_forward():
    r2 = np.array([0.0, 0.1, 0.3, 0.81])
    assert np.allclose(dyda_forward(1, 0.5, r2), 1.0)
    assert np.allclose(dyda_forward(1, 1.5, r2), 1.5 * (1 - 2 * r2))
    # the documented figure 3.534 for n = 2 is off; the formula gives 3 pi / 4
    assert dyda_forward(2, 1.5, 0.0) == pytest.approx(3 * math.pi / 4, rel=1e-14)


def test_dyda_polynomial_reproduces_total():
    for n in (1, 2, 3):
        for s in (1.25, 1.5, 2.5, 3.75):
            k = int(s)
            c = apply_neg_laplacian_radial_poly(n, dyda_polynomial(n, s), k)
            assert c[0] == pytest.approx(forward_total(n, s), rel=1e-10)


def test_power_laplacian_symbolic():
    x, y = sp.symbols("x y", positive=True)
    r = sp.sqrt(x * x + y * y)
    beta = sp.Rational(5, 2)
    e = r ** beta
    lap = -(sp.diff(e, x, 2) + sp.diff(e, y, 2))
    lap2 = -(sp.diff(lap, x, 2) + sp.diff(lap, y, 2))
    res = power_laplacian(2, 2, 2.5)
    val = float(lap2.subs({x: 0.3, y: 0.4}))
    assert val == pytest.approx(res.coeff * 0.5 ** res.exponent, rel=1e-12)


def test_ball_power_laplacian_symbolic():
    x = sp.symbols("x")
    s = sp.Rational(5, 2)
    e = (1 - x ** 2) ** s
    ref = sp.diff(e, x, 4)
    g = ball_power_neg_laplacian(1, 2.5, 2)
    assert g(np.array([[0.3]]))[0] == pytest.approx(float(ref.subs(x, 0.3)), rel=1e-12)


def test_dist_power():
    assert dist_power_laplacian_1d(2.5, 1, 0.1) == pytest.approx(2.5 * 1.5 * 0.1 ** 0.5, rel=1e-14)
    with pytest.raises(DomainError):
        dist_power_laplacian_1d(2.5, 1, 0.5, exact_zone=0.25)


def test_ball_solution_trace_and_integral():
    u = ball_solution(1, 1.5)
    assert u.trace() == pytest.approx(math.sqrt(2) / 3, rel=1e-14)
    assert u.integral() == pytest.approx(math.pi / 16, rel=1e-14)
    assert ball_solution(2, 1.5).trace() == pytest.approx(2 ** 2.5 / (9 * math.pi), rel=1e-14)


def test_halfline_model_shape():
    t = np.array([-1.0, 0.0, 0.25, 0.5, 3.0])
    v = halfline_model(1.5, 0.5, t)
    assert v[0] == 0 and v[1] == 0
    assert v[2] == pytest.approx(0.25 ** 1.5)
    assert v[4] == pytest.approx(0.5 ** 1.5)
