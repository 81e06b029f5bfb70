"""Acceptance criteria 1-10, one summary line each.

Run with pytest (lines appear in the terminal summary) or directly:
``python tests/test_acceptance.py``.
"""
import json
import math
import os
import subprocess
import sys
import tempfile
import time
import warnings

import numpy as np
import sympy as sp

from fraclap import solver1d
from fraclap.boundary_trace import constant_relation_check, halfline_singularity_probe, log_singularity_fit
from fraclap.domains import DomainSpec
from fraclap.exact_solutions import (apply_neg_laplacian_radial_poly, ball_coefficient, ball_solution, dyda_forward,
                                     dyda_polynomial, forward_total)
from fraclap.frlap_eval import GridField, field1d, fft_frlap, frlap_compose, frlap_point
from fraclap.identity_suite import (Bump, DilationModel, NonlinearitySpec, commutator_check, dilation_derivative,
                                    disjoint_support_check, eigen_pohozaev_report, intbyparts_check, pohozaev_check,
                                    semilinear_pohozaev)
from fraclap.specfun import FracOrder, gamma

I1 = DomainSpec.interval(-1.0, 1.0)
B2 = DomainSpec.ball(2)


def _quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **kw)


def _ball_points(n):
    if n == 1:
        return np.linspace(-0.8, 0.8, 17)[:, None]
    th = np.linspace(0.0, 2 * np.pi, 9)[:-1]
    E = np.stack([np.cos(th), np.sin(th)], axis=1)
    return np.vstack([np.zeros((1, 2))] + [r * E for r in (0.2, 0.4, 0.6, 0.8)])


def criterion_1():
    worst, slow, ok = [], 0.0, True
    for n in (1, 2):
        for s in (1.25, 1.5, 2.5):
            t0 = time.perf_counter()
            u = ball_solution(n, s)
            v = _quiet(frlap_compose, u.field(), FracOrder(s), _ball_points(n), order="outer", fd_step=5e-2)
            dt = time.perf_counter() - t0
            err = float(np.abs(np.asarray(v) - 1).max())
            ok &= err <= (1e-4 if n == 1 else 1e-3) and dt <= 60
            worst.append(f"n={n},s={s}:{err:.1e}")
            slow = max(slow, dt)
    return ok, "ball (-Lap)^s u = 1 on |x|<=0.8: " + " ".join(worst) + f"; slowest pair {slow:.1f}s"


def criterion_2():
    grid = [(n, s) for n in (1, 2, 3) for s in (0.25, 0.5, 0.75, 1.25, 1.5, 2.5, 3.25, 4.5)]
    ck = max(abs(ball_coefficient(n, s) * forward_total(n, s) - 1) for n, s in grid)
    poly = max(abs(apply_neg_laplacian_radial_poly(n, dyda_polynomial(n, s), int(s))[0] / forward_total(n, s) - 1)
               for n, s in grid)
    one = float(dyda_forward(1, 0.5, 0.0))
    # oracle for the corrected constant: pointwise quadrature of (-Lap)^s0 (1-|x|^2)^s at 0
    u = ball_solution(2, 1.5)
    quad = _quiet(frlap_point, u.field(), 0.5, np.array([0.0, 0.0])) / u.coeff
    fw = float(dyda_forward(2, 1.5, 0.0))
    ok = ck <= 1e-12 and poly <= 1e-10 and abs(one - 1) <= 1e-14 and abs(quad - fw) <= 1e-5 * fw
    return ok, (f"24-point C*K max dev {ck:.1e}; Dyda poly -> K {poly:.1e}; n=1,s=0.5 forward {one:.15g}; "
                f"n=2,s=1.5 forward {fw:.7f} (=3pi/4) vs quadrature {quad:.7f}")


def criterion_3():
    r1 = pohozaev_check(ball_solution(1, 1.5), I1, 1.5)
    r2 = pohozaev_check(ball_solution(2, 1.5), B2, 1.5)
    a = pohozaev_check(None, I1, 1.5, "numeric", N=2048)
    b = pohozaev_check(None, I1, 1.5, "numeric", N=4096)
    ok = (r1.residual_abs <= 1e-10 and abs(r1.lhs + math.pi / 16) <= 1e-10
          and r2.residual_abs <= 1e-10 and abs(r2.lhs + 8 / 45) <= 1e-10 and abs(r2.rhs_boundary + 2 / 9) <= 1e-10
          and a.residual_rel <= 2e-2 and b.residual_rel < a.residual_rel)
    return ok, (f"analytic n=1 lhs {r1.lhs:.10f} res {r1.residual_abs:.1e}; n=2 lhs {r2.lhs:.10f} "
                f"bnd {r2.rhs_boundary:.10f} res {r2.residual_abs:.1e}; numeric res_rel N=2048 {a.residual_rel:.2e}, "
                f"N=4096 {b.residual_rel:.2e}")


def criterion_4():
    u1, u2 = ball_solution(1, 1.5), ball_solution(2, 1.5)
    ball = max(intbyparts_check(u1, u1, I1, 1.5).residual_abs, intbyparts_check(u2, u2, B2, 1.5, i=1).residual_abs)
    mixed = intbyparts_check(u1, None, I1, 1.5, f2=lambda X: X[..., 0], N=2048).residual_rel
    disj = intbyparts_check(Bump((-3.0,), 0.5), Bump((3.0,), 0.5, 0.7), DomainSpec.interval(-5.0, 5.0),
                            1.5).residual_abs
    ok = ball <= 1e-12 and mixed <= 2e-2 and disj <= 1e-6
    return ok, f"ball residual {ball:.1e}; mixed solver res_rel {mixed:.2e}; disjoint bumps residual {disj:.1e}"


def criterion_5():
    nl = NonlinearitySpec.constant(1.0)
    r1 = semilinear_pohozaev(ball_solution(1, 1.5), I1, 1.5, nl)
    r2 = semilinear_pohozaev(ball_solution(2, 1.5), B2, 1.5, nl)
    ok = (r1.residual_abs <= 1e-10 and abs(r1.lhs - math.pi / 4) <= 1e-10
          and r2.residual_abs <= 1e-10 and abs(r2.lhs - 4 / 9) <= 1e-10)
    return ok, (f"n=1: {r1.lhs:.12f} = {r1.rhs:.12f} (pi/4); n=2: {r2.lhs:.12f} = {r2.rhs:.12f} (4/9); "
                f"residuals {r1.residual_abs:.1e}, {r2.residual_abs:.1e}")


def criterion_6():
    smooth = lambda t: np.exp(-(t - 1.0) ** 2)
    v01 = dilation_derivative(DilationModel(0, 1))
    v10 = dilation_derivative(DilationModel(1, 0))
    v00 = dilation_derivative(DilationModel(0, 0, smooth, h_extent=10.0))
    v11 = dilation_derivative(DilationModel(1, 1))
    p2 = math.pi ** 2
    ok = (abs(v01 - 1) <= 1e-6 and abs(v10 - p2) <= 1e-2 * p2 and abs(v00) <= 1e-6
          and abs(v11 - p2 - 1) <= 1e-2 * (p2 + 1))
    return ok, f"(0,1,0) {v01:.9f}; (1,0,0) {v10:.9f}; (0,0,smooth) {v00:.1e}; (1,1,0) {v11:.9f}"


def criterion_7():
    ok, parts = True, []
    for s in (1.25, 1.5, 1.75):
        u = ball_solution(1, s)
        fb = log_singularity_fit(lambda X: _quiet(frlap_point, u.field(), 0.5 * s, X), I1, s, [1.0], v0=u.trace())
        fh = log_singularity_fit(lambda X: halfline_singularity_probe(s, 1.0, X), DomainSpec.interval(0.0, 2.0), s,
                                 [0.0], v0=1.0)
        rb, rh = constant_relation_check(fb, s), constant_relation_check(fh, s)
        d1 = abs(fb.c1 - fh.c1) / abs(fh.c1)
        d2 = abs(fb.c2 - fh.c2) / abs(fh.c2)
        ok &= 0.95 <= rb <= 1.05 and 0.95 <= rh <= 1.05 and d1 <= 5e-2 and d2 <= 5e-2
        parts.append(f"s={s}: ratio ball {rb:.4f} half-line {rh:.4f}, c1/c2 gap {max(d1, d2):.1e}")
    return ok, "; ".join(parts)


def criterion_8():
    ref = 2 ** 1.5 * gamma(2.0) / math.sqrt(math.pi)
    g = field1d(lambda x: np.exp(-0.5 * x * x))
    p = float(np.ravel(frlap_point(g, 1.5, np.array([0.0]), n=1))[0])
    grid = GridField.sample(lambda X: np.exp(-0.5 * X[..., 0] ** 2), 1, 20.0, 4096, 9.0)
    f = fft_frlap(grid, 1.5).at([0.0])
    ok = abs(ref - 1.5957691) <= 1e-7 and abs(p - ref) <= 1e-5 and abs(f - ref) <= 1e-6
    return ok, f"closed form {ref:.9f}; frlap_point err {abs(p - ref):.1e}; fft_frlap err {abs(f - ref):.1e}"


def criterion_9():
    s = 1.5
    r = solver1d.eigen_demo(I1, s, 1024)
    peak = float(np.abs(r.phi).max())
    rep = eigen_pohozaev_report(r, s)
    literal = 2 * s * float(np.sum(r.phi ** 2) * r.h)
    ok = min(r.traces) > 0.05 * peak and rep.residual_rel <= 3e-2
    return ok, (f"traces {r.traces[0]:.4f}, {r.traces[1]:.4f} vs 0.05*max|phi| = {0.05 * peak:.4f}; "
                f"2 s lam int phi^2 = {rep.lhs:.4f}, Gamma(1+s)^2 sum tr^2 = {rep.rhs:.4f}, res_rel "
                f"{rep.residual_rel:.1e} (lambda1 {r.lam:.5f}); without lambda the left side is {literal:.4f} "
                "(informational)")


def _run_all(threads, out):
    env = dict(os.environ, FRACLAP_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "fraclap", "all", "--out", out], env=env,
                          stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL).returncode


def _strip(path):
    with open(os.path.join(path, "report.json")) as fh:
        rep = json.load(fh)
    rep["config"].pop("output")
    return json.dumps(rep, sort_keys=True)


def criterion_10():
    xs = sp.symbols("x0:2")
    polys = [xs[0] ** 6 - 3 * xs[0] * xs[1] ** 3 + 2, xs[0] ** 2 * xs[1] ** 2 + xs[1]]
    exact = all(commutator_check(p, k, 2) == 0 for p in polys for k in (1, 2, 3))
    w = lambda X: np.exp(-0.25 * np.sum(np.asarray(X) ** 2, axis=-1))
    fd = commutator_check(w, 2, 2, points=np.array([[0.0, 0.0], [0.5, -0.9], [1.0, 0.3]]))
    dj = disjoint_support_check(Bump((-3.0,), 0.5), Bump((3.0,), 0.5, 0.7), 1.5)
    sym = dj.ingredients["symmetry_defect"] / abs(dj.ingredients["u1_Lu2"])
    with tempfile.TemporaryDirectory() as tmp:
        outs = [os.path.join(tmp, f"t{k}") for k in (1, 4)]
        codes = [_run_all(k, o) for k, o in zip((1, 4), outs)]
        same = _strip(outs[0]) == _strip(outs[1])
        csv_same = all(open(os.path.join(outs[0], "summary.csv")).read() == open(os.path.join(o, "summary.csv")).read()
                       for o in outs)
    ok = exact and fd <= 1e-7 and sym <= 1e-10 and same and csv_same and codes == [0, 0]
    return ok, (f"commutator exact on polynomials: {exact}; Gaussian FD residual {fd:.1e}; disjoint symmetry "
                f"(relative) {sym:.1e}; 'all' reports identical for 1 and 4 threads: {same and csv_same} "
                f"(exit codes {codes})")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10]


def _check(k, acceptance):
    passed, detail = CRITERIA[k - 1]()
    acceptance(k, passed, detail)
    assert passed, detail


def test_criterion_01_ball_solution(acceptance):
    _check(1, acceptance)


def test_criterion_02_ball_constants(acceptance):
    _check(2, acceptance)


def test_criterion_03_pohozaev(acceptance):
    _check(3, acceptance)


def test_criterion_04_integration_by_parts(acceptance):
    _check(4, acceptance)


def test_criterion_05_semilinear(acceptance):
    _check(5, acceptance)


def test_criterion_06_dilation(acceptance):
    _check(6, acceptance)


def test_criterion_07_log_singularity(acceptance):
    _check(7, acceptance)


def test_criterion_08_gaussian_oracle(acceptance):
    _check(8, acceptance)


def test_criterion_09_eigenfunction_traces(acceptance):
    _check(9, acceptance)


def test_criterion_10_properties(acceptance):
    _check(10, acceptance)


if __name__ == "__main__":
    bad = 0
    for k, fn in enumerate(CRITERIA, 1):
        passed, detail = fn()
        bad += not passed
        print(f"criterion {k:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
    sys.exit(1 if bad else 0)
