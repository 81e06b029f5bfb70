import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from fraclap.domains import DomainSpec
from fraclap.exact_solutions import ball_solution
from fraclap.identity_suite import (Bump, DilationModel, ExtrapolationError, IdentityReport, NonlinearitySpec,
                                    PreconditionError, _dilated_w, commutator_check, commutator_power_check,
                                    dilation_derivative, dilation_symmetry, disjoint_support_check,
                                    intbyparts_check, pohozaev_check, scaling_identity_check, semilinear_pohozaev)
from fraclap.specfun import gamma

I1 = DomainSpec.interval(-1.0, 1.0)
B2 = DomainSpec.ball(2)


def test_pohozaev_ball_1d():
    r = pohozaev_check(ball_solution(1, 1.5), I1, 1.5)
    assert r.lhs == pytest.approx(-math.pi / 16, abs=1e-12)
    assert r.rhs_volume == pytest.approx(math.pi / 16, abs=1e-12)
    assert r.rhs_boundary == pytest.approx(-math.pi / 8, abs=1e-12)
    assert r.residual_abs <= 1e-10 and r.passed


def test_pohozaev_ball_2d():
    r = pohozaev_check(ball_solution(2, 1.5), B2, 1.5)
    assert r.lhs == pytest.approx(-8 / 45, abs=1e-12)
    assert r.rhs_volume == pytest.approx(2 / 45, abs=1e-12)
    assert r.rhs_boundary == pytest.approx(-2 / 9, abs=1e-12)


@pytest.mark.parametrize("s", [1.25, 2.5])
def test_pohozaev_other_orders(s):
    for dom, n in ((I1, 1), (B2, 2)):
        assert pohozaev_check(ball_solution(n, s), dom, s).residual_abs <= 1e-10


def test_pohozaev_shifted_center():
    # the identity holds for any origin once the boundary term uses (x - z0).nu
    r = pohozaev_check(ball_solution(1, 1.5), I1, 1.5, z0=[0.3])
    assert r.residual_abs <= 1e-10


def test_pohozaev_analytic_needs_operator():
    with pytest.raises(PreconditionError):
        pohozaev_check(Bump((0.0,), 0.5), I1, 1.5)


def test_pohozaev_bump_numeric():
    r = pohozaev_check(Bump((0.1,), 0.5), I1, 1.5, mode="numeric")
    assert r.residual_rel <= 1e-4


def test_pohozaev_solver_refines():
    a = pohozaev_check(None, I1, 1.5, "numeric", N=1024)
    b = pohozaev_check(None, I1, 1.5, "numeric", N=2048)
    assert b.residual_rel < a.residual_rel <= 2e-2


def test_ibp_ball_and_bumps():
    u = ball_solution(2, 1.5)
    assert intbyparts_check(u, u, B2, 1.5, i=1).residual_abs <= 1e-12
    r = intbyparts_check(Bump((-3.0,), 0.5), Bump((3.0,), 0.5, 0.7), DomainSpec.interval(-5.0, 5.0), 1.5)
    assert r.residual_abs <= 1e-8


def test_ibp_mixed():
    r = intbyparts_check(ball_solution(1, 1.5), None, I1, 1.5, f2=lambda X: X[..., 0], N=2048)
    assert r.residual_rel <= 2e-2


def test_ibp_disjoint_guard():
    with pytest.raises(PreconditionError):
        intbyparts_check(Bump((-0.6,), 0.5), Bump((0.6,), 0.5), I1, 1.5)


def test_semilinear_exact():
    f1 = NonlinearitySpec.constant(1.0)
    r1 = semilinear_pohozaev(ball_solution(1, 1.5), I1, 1.5, f1)
    assert r1.lhs == pytest.approx(math.pi / 4, abs=1e-12) and r1.residual_abs <= 1e-10
    r2 = semilinear_pohozaev(ball_solution(2, 1.5), B2, 1.5, f1)
    assert r2.lhs == pytest.approx(4 / 9, abs=1e-12) and r2.residual_abs <= 1e-10


def test_semilinear_rejects_wrong_pair():
    with pytest.raises(PreconditionError):
        semilinear_pohozaev(ball_solution(1, 1.5), I1, 1.5, NonlinearitySpec.constant(2.0))
    with pytest.raises(PreconditionError):
        NonlinearitySpec(lambda t: t, lambda t: t * t)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_nonlinearity_polynomials(a, b):
    nl = NonlinearitySpec(lambda t: a * t + b * t ** 3, lambda t: a * t * t / 2 + b * t ** 4 / 4)
    assert float(nl.F(np.array([0.0]))[0]) == 0.0


@pytest.mark.parametrize("A,B,h,ref,tol", [
    (0, 1, None, 1.0, 1e-6),
    (1, 0, None, math.pi ** 2, 1e-2),
    (1, 1, None, math.pi ** 2 + 1, 1e-2),
])
def test_dilation_models(A, B, h, ref, tol):
    v = dilation_derivative(DilationModel(A, B, h))
    assert abs(v - ref) <= tol * max(1.0, ref)


def test_dilation_smooth_part_vanishes():
    m = DilationModel(0, 0, lambda t: np.exp(-(t - 1) ** 2), h_extent=10.0)
    assert abs(dilation_derivative(m)) <= 1e-6


def test_dilation_closed_form_and_scale():
    m = DilationModel(1.0, 0.5)
    assert dilation_derivative(m, "closed_form") == pytest.approx(math.pi ** 2 + 0.25)
    # phi(c t) rescales the integral by 1/c
    ms = DilationModel(1.0, 0.5, scale=1.7)
    assert 1.7 * dilation_derivative(ms) == pytest.approx(dilation_derivative(m), rel=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_dilation_quadratic_form(A, B):
    v = dilation_derivative(DilationModel(A, B))
    assert v == pytest.approx(A * A * math.pi ** 2 + B * B, abs=1e-6 * (1 + A * A * 10 + B * B))


def test_dilation_callable_needs_breakpoints():
    with pytest.raises(ValueError):
        dilation_derivative(lambda t: t)
    with pytest.raises(ValueError):
        dilation_derivative(DilationModel(1, 0), scheme="bogus")


def test_dilation_slow_convergence_raises():
    # a steep compact bump is not resolved by the default steps
    h = lambda t: np.where(np.abs(t - 1) < 0.05, np.exp(1 - 1 / np.maximum(1 - ((t - 1) / 0.05) ** 2, 1e-300)), 0.0)
    with pytest.raises(ExtrapolationError):
        dilation_derivative(DilationModel(0, 0, h, h_points=(0.95, 1.05)), ms=range(1, 4))


def test_scaling_identity_ball():
    u = ball_solution(1, 1.5)
    r = scaling_identity_check(u, I1, 1.5, L=4.0, N=2 ** 16)
    assert r.ingredients["minus_dI"] == pytest.approx(math.pi / 4, rel=5e-2)
    assert r.residual_rel <= 5e-2


def test_weber_schafheitlin_oracle():
    # for the 1D ball solution I_lam = I_1 lam^(-2 nu) with nu = s + 1/2 (lam > 1)
    s = 1.5
    u = ball_solution(1, s)
    L, N = 4.0, 2 ** 16
    dv = 2 * L / N
    w1 = _dilated_w(u, s, 1, L, N, 1.0, 1.0)
    I1v = np.sum(w1 * w1) * dv
    assert I1v == pytest.approx(u.integral(), rel=1e-3)
    for lam in (1.05, 1.2):
        Il = np.sum(_dilated_w(u, s, 1, L, N, lam, 1.0) * _dilated_w(u, s, 1, L, N, 1 / lam, 1.0)) * dv
        assert Il == pytest.approx(I1v * lam ** (-2 * (s + 0.5)), rel=2e-3)


def test_dilation_symmetry_two_ways():
    a, b = dilation_symmetry(ball_solution(1, 1.5), I1, 1.5, 1.05)
    assert a == pytest.approx(b, rel=1e-4)


def test_disjoint_bumps():
    r = disjoint_support_check(Bump((-3.0,), 0.5), Bump((3.0,), 0.5, 0.7), 1.5)
    assert r.residual_rel <= 1e-6
    assert r.ingredients["symmetry_defect"] <= 1e-10 * abs(r.ingredients["u1_Lu2"])


def test_disjoint_bumps_2d():
    r = disjoint_support_check(Bump((-3.0, 0.0), 0.5), Bump((2.0, 2.0), 0.5), 2.5)
    assert r.residual_rel <= 1e-6


def test_commutator_polynomials():
    x0, x1 = sp.symbols("x0:2")
    for k in (1, 2, 3):
        assert commutator_check(x0 ** 5 * x1 ** 2 - 3 * x0 * x1 ** 4 + 7, k, 2) == 0


def test_commutator_gaussian_fd():
    w = lambda X: np.exp(-0.25 * np.sum(np.asarray(X) ** 2, axis=-1))
    grad = lambda X: -0.5 * np.asarray(X) * w(X)[..., None]
    pts = np.array([[0.0], [0.7], [-1.3]])
    assert commutator_check(w, 2, 1, points=pts, gradient=grad) <= 1e-7
    pts2 = np.array([[0.0, 0.0], [0.5, -0.9]])
    assert commutator_check(w, 2, 2, points=pts2, gradient=grad) <= 1e-7


@pytest.mark.parametrize("n,k,beta", [(1, 1, 3.5), (2, 2, 5.0), (3, 1, -1.5)])
def test_commutator_power_rule(n, k, beta):
    assert commutator_power_check(n, k, beta) == pytest.approx(0.0, abs=1e-12)


def test_report_serialises():
    r = IdentityReport.build("x", 1.0, 0.5, 0.5, {"a": np.arange(3)}, "analytic", 1, 1.5, 1e-10)
    d = r.to_dict()
    assert d["passed"] and d["ingredients"]["a"] == [0, 1, 2]
    assert IdentityReport.build("x", 1.0, 0.0, 0.0, {}, "analytic", 1, 1.5).passed is False
