"""Command-line experiment runner: configure, execute, report.

Every command writes into the output directory

    report.json   versioned report (identity reports, log fits, goldens)
    summary.csv   one row per check: name,n,s,lhs,rhs,residual_rel,tolerance,pass
    *.dat         two-column text data (trace profiles, lambda convergence)

and exits with status 0 iff every executed check passes. Usage errors
exit with status 2. FRACLAP_THREADS caps the worker pool of ``all``.
"""
import argparse
import csv
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import solver1d
from .boundary_trace import constant_relation_check, halfline_singularity_probe, log_singularity_fit
from .domains import DomainSpec
from .exact_solutions import ball_solution
from .frlap_eval import AccuracyWarning, frlap_compose, frlap_point
from .identity_suite import (Bump, DilationModel, IdentityReport, NonlinearitySpec, dilation_derivative,
                             commutator_check, disjoint_support_check, eigen_pohozaev_report, intbyparts_check, pohozaev_check,
                             scaling_identity_check, semilinear_pohozaev)
from .specfun import DomainError, FracOrder, gamma

SCHEMA = "fraclap-report/1"
CSV_COLUMNS = ["name", "n", "s", "lhs", "rhs", "residual_rel", "tolerance", "pass"]
COMMANDS = ["verify-ball", "pohozaev", "ibp", "semilinear", "dilation", "trace-fit", "disjoint",
            "scaling", "solve", "eigen", "all"]

DEFAULT_TOL = {
    "verify-ball-1": 1e-4, "verify-ball-2": 1e-3,
    "pohozaev-analytic": 1e-10, "pohozaev-numeric": 2e-2,
    "ibp-ball": 1e-12, "ibp-mixed": 2e-2, "ibp-disjoint": 1e-6,
    "semilinear": 1e-10,
    "dilation-exact": 1e-6, "dilation-log": 1e-2,
    "trace-fit": 5e-2, "disjoint": 1e-6, "disjoint-symmetry": 1e-10,
    "scaling": 5e-2, "solve": 1e-2, "eigen": 3e-2,
    "golden": 1e-10,
}

# exact values for the ball solution (u = C(n,s)(1-|x|^2)_+^s)
GOLDENS = {
    ("pohozaev", 1, 1.5): {"lhs": -math.pi / 16},
    ("pohozaev", 2, 1.5): {"lhs": -8.0 / 45, "rhs_boundary": -2.0 / 9},
    ("semilinear", 1, 1.5): {"lhs": math.pi / 4},
    ("semilinear", 2, 1.5): {"lhs": 4.0 / 9},
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 1
    s: float = 1.5
    L: float = 4.0
    N: int = 2048
    tolerances: dict = field(default_factory=dict)
    output: str = "fraclap-out"
    seed: int = 0
    mode: str = "analytic"
    case: str = "ball"
    A: float = 1.0
    B: float = 0.0
    smooth: bool = False
    domain: dict = None

    def __post_init__(self):
        if self.domain is not None:
            try:
                dom = DomainSpec.from_json(self.domain)
            except (KeyError, TypeError, ValueError) as exc:
                raise UsageError(f"bad domain {self.domain!r}: {exc}") from exc
            if dom.radius != 1.0 or any(c != 0.0 for c in dom.center):
                raise UsageError("domain must be the unit ball (or interval (-1, 1)) centred at 0")
            self.domain = dom.to_json()
            self.n = dom.n
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.n not in (1, 2, 3):
            raise UsageError("n must be 1, 2 or 3")
        if not self.s > 0 or float(self.s).is_integer():
            raise UsageError("s must be positive and noninteger")
        if self.N < 64:
            raise UsageError("grid guard: need N >= 64")
        if not self.L > 2.0:
            raise UsageError("grid guard: need L > 2 (twice the unit radius)")
        unknown = set(self.tolerances) - set(DEFAULT_TOL)
        if unknown:
            raise UsageError(f"unknown tolerance keys {sorted(unknown)}")
        if self.mode not in ("analytic", "numeric"):
            raise UsageError("mode must be analytic or numeric")
        if self.case not in ("ball", "mixed", "disjoint"):
            raise UsageError("case must be ball, mixed or disjoint")

    def tol(self, key):
        return float(self.tolerances.get(key, DEFAULT_TOL[key]))

    def domain_spec(self, n=None):
        """The configured domain, else the unit ball (interval (-1, 1) for n = 1)."""
        n = self.n if n is None else n
        if self.domain is not None and DomainSpec.from_json(self.domain).n == n:
            return DomainSpec.from_json(self.domain)
        return DomainSpec.ball(n) if n > 1 else DomainSpec.interval(-1.0, 1.0)

    @classmethod
    def from_json(cls, text):
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not JSON: {exc}") from exc
        if not isinstance(cfg, dict) or "command" not in cfg:
            raise UsageError("config must be an object with a command")
        grid = cfg.pop("grid", {})
        cfg.update({k: grid[k] for k in ("L", "N") if k in grid})
        names = {f.name for f in cls.__dataclass_fields__.values()}
        extra = set(cfg) - names
        if extra:
            raise UsageError(f"unknown config keys {sorted(extra)}")
        return cls(**cfg)

    def to_dict(self):
        d = asdict(self)
        d["grid"] = {"L": d.pop("L"), "N": d.pop("N")}
        return d


@dataclass
class Outcome:
    reports: list = field(default_factory=list)
    logfits: list = field(default_factory=list)
    goldens: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def extend(self, other):
        self.reports += other.reports
        self.logfits += other.logfits
        self.goldens += other.goldens
        self.data.update(other.data)

    def failures(self):
        bad = [r.name for r in self.reports if not r.passed]
        return bad + [f"golden:{g['name']}:{g['quantity']}" for g in self.goldens if not g["passed"]]


def _golden(name, quantity, value, expected, tol, provenance="exact"):
    err = abs(value - expected)
    return {"name": name, "quantity": quantity, "value": value, "expected": expected,
            "abs_error": err, "tolerance": tol, "provenance": provenance, "passed": bool(err <= tol)}


def _quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **kw)


def _ball_points(n, rmax=0.8):
    """Interior sample points of |x| <= rmax."""
    if n == 1:
        return np.linspace(-rmax, rmax, 17)[:, None]
    r = np.linspace(0.0, rmax, 5)[1:]
    if n == 2:
        th = np.linspace(0.0, 2.0 * np.pi, 7)[:-1]
        E = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        E = np.vstack([np.eye(3), -np.eye(3)])
    return np.vstack([np.zeros((1, n))] + [a * E for a in r])


# ---------------------------------------------------------------- commands

def run_verify_ball(cfg):
    """max |(-Lap)^s u - 1| on |x| <= 0.8 for the ball solution."""
    u = ball_solution(cfg.n, cfg.s)
    X = _ball_points(cfg.n)
    v = np.asarray(_quiet(frlap_compose, u.field(), FracOrder(cfg.s), X, order="outer", fd_step=5e-2))
    j = int(np.argmax(np.abs(v - 1.0)))
    tol = cfg.tol("verify-ball-1" if cfg.n == 1 else "verify-ball-2")
    rep = IdentityReport.build("verify-ball", v[j], 1.0, 0.0,
                               {"max_error": float(np.abs(v - 1.0).max()), "points": len(X),
                                "coefficient": u.coeff}, "numeric", cfg.n, cfg.s, tol)
    return Outcome([rep])


def run_pohozaev(cfg):
    s, n = cfg.s, cfg.n
    dom = cfg.domain_spec(n)
    out = Outcome()
    if cfg.mode == "analytic":
        rep = pohozaev_check(ball_solution(n, s), dom, s, "analytic", tolerance=cfg.tol("pohozaev-analytic"))
        out.reports.append(rep)
        for q, val in GOLDENS.get(("pohozaev", n, s), {}).items():
            out.goldens.append(_golden("pohozaev", q, getattr(rep, q), val, cfg.tol("golden")))
        return out
    if n != 1:
        raise UsageError("numeric Pohozaev runs the 1D solver: use --n 1")
    rep = pohozaev_check(None, dom, s, "numeric", N=cfg.N, tolerance=cfg.tol("pohozaev-numeric"))
    out.reports.append(rep)
    return out


def run_ibp(cfg):
    s, n = cfg.s, cfg.n
    if cfg.case == "ball":
        dom = cfg.domain_spec(n)
        u = ball_solution(n, s)
        rep = intbyparts_check(u, u, dom, s, tolerance=cfg.tol("ibp-ball"))
    elif cfg.case == "mixed":
        if n != 1:
            raise UsageError("the mixed case runs the 1D solver: use --n 1")
        dom = cfg.domain_spec(1)
        rep = intbyparts_check(ball_solution(1, s), None, dom, s, f2=lambda X: X[..., 0], N=cfg.N,
                               tolerance=cfg.tol("ibp-mixed"))
    else:
        dom = _disjoint_domain(n)
        u1, u2 = _disjoint_bumps(n)
        rep = intbyparts_check(u1, u2, dom, s, tolerance=cfg.tol("ibp-disjoint"))
    rep.name = f"ibp-{cfg.case}"
    return Outcome([rep])


def run_semilinear(cfg):
    s, n = cfg.s, cfg.n
    dom = cfg.domain_spec(n)
    rep = semilinear_pohozaev(ball_solution(n, s), dom, s, NonlinearitySpec.constant(1.0),
                              tolerance=cfg.tol("semilinear"))
    out = Outcome([rep])
    for q, val in GOLDENS.get(("semilinear", n, s), {}).items():
        out.goldens.append(_golden("semilinear", q, getattr(rep, q), val, cfg.tol("golden")))
    return out


def _dilation_case(A, B, smooth, tol):
    h = (lambda t: np.exp(-(t - 1.0) ** 2)) if smooth else None
    model = DilationModel(A, B, h, h_extent=10.0 if smooth else 4.0)
    val, info = dilation_derivative(model, full_output=True)
    exact = model.closed_form()
    tag = f"dilation-A{A:g}-B{B:g}" + ("-smooth" if smooth else "")
    rep = IdentityReport.build(tag, val, exact, 0.0, {"I1": info["I1"], "A": A, "B": B, "smooth": smooth},
                               "numeric", 1, math.nan, tol)
    data = np.column_stack([info["steps"], info["differences"]])
    return Outcome([rep], data={f"lambda_convergence_{tag}.dat": data})


def run_dilation(cfg):
    key = "dilation-log" if cfg.A != 0 else "dilation-exact"
    return _dilation_case(cfg.A, cfg.B, cfg.smooth, cfg.tol(key))


def _trace_fit_one(s, fixture, tol):
    if fixture == "ball":
        u = ball_solution(1, s)
        dom = DomainSpec.interval(-1.0, 1.0)
        x0 = [1.0]
        w = lambda X: _quiet(frlap_point, u.field(), 0.5 * s, X)
        v0 = u.trace()
    else:
        dom = DomainSpec.interval(0.0, 2.0)
        x0 = [0.0]
        w = lambda X: halfline_singularity_probe(s, 1.0, X)
        v0 = 1.0
    fit = log_singularity_fit(w, dom, s, x0, v0=v0)
    ratio = constant_relation_check(fit, s)
    rep = IdentityReport.build(f"trace-fit-{fixture}", fit.constant_relation(), gamma(1.0 + s) ** 2, 0.0,
                               {"c1": fit.c1, "c2": fit.c2, "ratio": ratio, "rms": fit.rms}, "numeric", 1, s, tol)
    # profile: signed depth (positive inside) against w
    d = np.geomspace(fit.window[0], fit.window[1], 32)
    x0a, nu = np.asarray(x0, dtype=float), -dom.outward_normal(np.asarray(x0, dtype=float))
    sd = np.concatenate([-d[::-1], d])
    prof = np.asarray(w(x0a + sd[:, None] * nu), dtype=float)
    return rep, fit, np.column_stack([sd, prof])


def run_trace_fit(cfg):
    out = Outcome()
    tol = cfg.tol("trace-fit")
    fits = {}
    for fixture in ("ball", "halfline"):
        rep, fit, prof = _trace_fit_one(cfg.s, fixture, tol)
        out.reports.append(rep)
        d = fit.to_dict()
        d.update({"fixture": fixture, "s": cfg.s})
        out.logfits.append(d)
        out.data[f"trace_profile_{fixture}_s{cfg.s:g}.dat"] = prof
        fits[fixture] = fit
    a, b = fits["ball"], fits["halfline"]
    dc1 = abs(a.c1 - b.c1) / abs(b.c1)
    dc2 = abs(a.c2 - b.c2) / abs(b.c2)
    out.reports.append(IdentityReport.build("trace-fit-consistency", a.c1, b.c1, 0.0,
                                            {"rel_c1": dc1, "rel_c2": dc2, "c2_ball": a.c2, "c2_halfline": b.c2},
                                            "numeric", 1, cfg.s, tol))
    return out


def _disjoint_domain(n):
    return DomainSpec.ball(n, radius=5.0) if n > 1 else DomainSpec.interval(-5.0, 5.0)


def _disjoint_bumps(n):
    e = np.zeros(n)
    e[0] = 3.0
    return Bump(tuple(-e), 0.5), Bump(tuple(e), 0.5, 0.7)


def run_disjoint(cfg):
    u1, u2 = _disjoint_bumps(cfg.n)
    rep = disjoint_support_check(u1, u2, cfg.s, tolerance=cfg.tol("disjoint"))
    a12, a21 = rep.ingredients["u1_Lu2"], rep.ingredients["u2_Lu1"]
    sym = IdentityReport.build("disjoint-symmetry", a12, a21, 0.0, {}, "numeric", cfg.n, cfg.s,
                               cfg.tol("disjoint-symmetry"))
    return Outcome([rep, sym])


def run_scaling(cfg):
    if cfg.n != 1:
        raise UsageError("the scaling check runs on the 1D FFT grid: use --n 1")
    N = cfg.N if cfg.N & (cfg.N - 1) == 0 else None
    if N is None:
        raise UsageError("grid guard: the FFT grid needs N a power of two")
    dom = cfg.domain_spec(1)
    rep = scaling_identity_check(ball_solution(1, cfg.s), dom, cfg.s, L=cfg.L, N=max(N, 2 ** 12),
                                 tolerance=cfg.tol("scaling"))
    data = np.column_stack([rep.ingredients["steps"], rep.ingredients["differences"]])
    return Outcome([rep], data={f"lambda_convergence_scaling_s{cfg.s:g}.dat": data})


def run_solve(cfg):
    """(-Lap)^s u = 1 on (-1, 1); compared with the ball solution inside |x| <= 0.8."""
    if cfg.n != 1:
        raise UsageError("the solver handles intervals only: use --n 1")
    dom = cfg.domain_spec(1)
    N = cfg.N - 1 if cfg.N & (cfg.N - 1) == 0 else cfg.N
    res = solver1d.solve_with_traces(dom, cfg.s, 1.0, N)
    u = ball_solution(1, cfg.s)

    def rel_err(x, v):
        m = np.abs(x) <= 0.8
        ex = u(x[m, None])
        return float(np.abs(v[m] - ex).max() / np.abs(ex).max())

    m = np.abs(res.x) <= 0.8
    err = rel_err(res.x, res.u)
    A = solver1d.assemble(dom, cfg.s, solver1d.coarse_size(N))
    err_c = rel_err(A.x, solver1d.solve(A, 1.0))
    tr = u.trace()
    # the discrete solution converges at first order in h (boundary layer)
    rep = IdentityReport.build("solve", np.abs(res.u[m]).max(), np.abs(u(res.x[m, None])).max(), 0.0,
                               {"N": N, "h": res.h, "rel_error_coarse": err_c, "observed_order": math.log2(err_c / err),
                                "traces": list(res.traces), "trace_exact": tr}, "numeric", 1, cfg.s, cfg.tol("solve"))
    # residual: sup-norm relative error on |x| <= 0.8
    rep.residual_abs, rep.residual_rel = err * rep.rhs_volume, err
    out = Outcome([rep])
    out.goldens.append(_golden("solve", "trace_left", res.traces[0], tr, 5e-3, "exact"))
    out.goldens.append(_golden("solve", "trace_right", res.traces[1], tr, 5e-3, "exact"))
    out.data[f"solution_s{cfg.s:g}.dat"] = np.column_stack([res.x, res.u])
    if (N + 1) & N == 0:
        out.data[f"solution_s{cfg.s:g}.gridfield"] = solver1d.to_gridfield(res.x, res.u, dom)
    return out


def run_eigen(cfg):
    if cfg.n != 1:
        raise UsageError("the eigensolver handles intervals only: use --n 1")
    dom = cfg.domain_spec(1)
    res = solver1d.eigen_demo(dom, cfg.s, cfg.N)
    rep = eigen_pohozaev_report(res, cfg.s, tolerance=cfg.tol("eigen"))
    peak = float(np.abs(res.phi).max())
    rep.ingredients.update({"phi_max": peak, "trace_over_max": [t / peak for t in res.traces],
                            "literal_lhs": 2.0 * cfg.s * rep.ingredients["int_phi2"]})
    out = Outcome([rep])
    ok = min(res.traces) > 0.05 * peak
    out.goldens.append({"name": "eigen", "quantity": "lambda1", "value": res.lam, "expected": res.lam_coarse,
                        "abs_error": abs(res.lam - res.lam_coarse), "tolerance": 1e-2 * res.lam,
                        "provenance": "self-generated (grid refinement N/2 -> N)",
                        "passed": bool(abs(res.lam - res.lam_coarse) <= 1e-2 * res.lam)})
    out.goldens.append({"name": "eigen", "quantity": "min_trace_over_max", "value": min(res.traces) / peak,
                        "expected": 0.05, "abs_error": 0.0, "tolerance": 0.0, "provenance": "lower bound",
                        "passed": bool(ok)})
    return out


def run_commutator_sweep(cfg, count=4):
    """Commutator identity on random integer polynomials drawn from ``seed`` (exact arithmetic)."""
    import sympy as sp

    rng = np.random.default_rng(cfg.seed)
    xs = sp.symbols(f"x0:{cfg.n}")
    worst = 0
    for _ in range(count):
        deg = int(rng.integers(2, 7))
        w = sum(int(rng.integers(-5, 6)) * sp.Mul(*[v ** int(e) for v, e in zip(xs, rng.integers(0, deg + 1, cfg.n))])
                for _ in range(4))
        k = int(rng.integers(1, 4))
        res = commutator_check(sp.expand(w), k, cfg.n)
        worst = max(worst, abs(int(res != 0)))
    rep = IdentityReport.build("commutator", float(worst), 0.0, 0.0, {"seed": cfg.seed, "count": count},
                               "analytic", cfg.n, math.nan, 0.0)
    return Outcome([rep])


def _all_jobs(cfg):
    """Independent checks of the ``all`` command as (name, callable) pairs."""
    def mk(**kw):
        # the configured domain only applies to jobs of its dimension
        dom = cfg.domain if kw.get("n", cfg.n) == cfg.n else None
        return RunConfig(**{**asdict(cfg), "domain": dom, **kw})
    jobs = []
    for n in (1, 2):
        for s in (1.25, 1.5, 2.5):
            jobs.append((f"verify-ball n={n} s={s}", lambda c=mk(command="verify-ball", n=n, s=s): run_verify_ball(c)))
        jobs.append((f"pohozaev n={n}", lambda c=mk(command="pohozaev", n=n, s=1.5): run_pohozaev(c)))
        jobs.append((f"semilinear n={n}", lambda c=mk(command="semilinear", n=n, s=1.5): run_semilinear(c)))
        jobs.append((f"ibp-ball n={n}", lambda c=mk(command="ibp", n=n, s=1.5, case="ball"): run_ibp(c)))
        jobs.append((f"disjoint n={n}", lambda c=mk(command="disjoint", n=n, s=1.5): run_disjoint(c)))
    jobs.append(("commutator", lambda c=mk(command="all", n=2): run_commutator_sweep(c)))
    jobs.append(("pohozaev numeric", lambda c=mk(command="pohozaev", n=1, s=1.5, mode="numeric", N=2048):
                 run_pohozaev(c)))
    jobs.append(("ibp-mixed", lambda c=mk(command="ibp", n=1, s=1.5, case="mixed", N=2048): run_ibp(c)))
    jobs.append(("ibp-disjoint", lambda c=mk(command="ibp", n=1, s=1.5, case="disjoint"): run_ibp(c)))
    for A, B, sm in ((0, 1, False), (1, 0, False), (0, 0, True), (1, 1, False)):
        key = "dilation-log" if A else "dilation-exact"
        jobs.append((f"dilation {A} {B} {sm}", lambda A=A, B=B, sm=sm, k=key: _dilation_case(A, B, sm, cfg.tol(k))))
    for s in (1.25, 1.5, 1.75):
        jobs.append((f"trace-fit s={s}", lambda c=mk(command="trace-fit", n=1, s=s): run_trace_fit(c)))
    jobs.append(("scaling", lambda c=mk(command="scaling", n=1, s=1.5, N=2 ** 16, L=4.0): run_scaling(c)))
    jobs.append(("solve", lambda c=mk(command="solve", n=1, s=1.5, N=1024): run_solve(c)))
    jobs.append(("eigen", lambda c=mk(command="eigen", n=1, s=1.5, N=1024): run_eigen(c)))
    return jobs


def workers():
    try:
        cap = int(os.environ.get("FRACLAP_THREADS", "0"))
    except ValueError:
        raise UsageError("FRACLAP_THREADS must be an integer")
    return cap if cap > 0 else (os.cpu_count() or 1)


def run_all(cfg):
    jobs = sorted(_all_jobs(cfg), key=lambda j: j[0])
    # warning filters are process-wide; set them once before the workers start
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        with ThreadPoolExecutor(max_workers=workers()) as pool:
            results = list(pool.map(lambda j: j[1](), jobs))
    out = Outcome()
    for r in results:
        out.extend(r)
    return out


RUNNERS = {
    "verify-ball": run_verify_ball, "pohozaev": run_pohozaev, "ibp": run_ibp, "semilinear": run_semilinear,
    "dilation": run_dilation, "trace-fit": run_trace_fit, "disjoint": run_disjoint, "scaling": run_scaling,
    "solve": run_solve, "eigen": run_eigen, "all": run_all,
}


# ---------------------------------------------------------------- output

def _clean(v):
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return _clean(v.item())
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_outputs(cfg, out):
    os.makedirs(cfg.output, exist_ok=True)
    report = {
        "schema": SCHEMA,
        "config": cfg.to_dict(),
        "checks": [r.to_dict() for r in out.reports],
        "logfits": out.logfits,
        "goldens": out.goldens,
        "failures": out.failures(),
        "passed": not out.failures(),
    }
    with open(os.path.join(cfg.output, "report.json"), "w") as fh:
        json.dump(_clean(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(cfg.output, "summary.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(CSV_COLUMNS)
        for r in out.reports:
            wr.writerow([r.name, r.n, repr(r.s), repr(r.lhs), repr(r.rhs), repr(r.residual_rel),
                         repr(r.tolerance), int(r.passed)])
    for name, arr in sorted(out.data.items()):
        path = os.path.join(cfg.output, name)
        if name.endswith(".gridfield"):
            arr.save(path)
        else:
            np.savetxt(path, arr, fmt="%.17e")
    return report


def run(cfg):
    """Execute ``cfg``; returns (exit status, report dict)."""
    out = RUNNERS[cfg.command](cfg)
    report = write_outputs(cfg, out)
    return (0 if report["passed"] else 1), report


# ---------------------------------------------------------------- argument parsing

def _tol_pair(text):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {val!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="fraclap", description="Checks for higher-order fractional Laplacians.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="dimension (1..3)")
    common.add_argument("--s", type=float, default=None, help="order s > 0, noninteger")
    common.add_argument("--L", type=float, default=None, help="FFT half-width")
    common.add_argument("--N", type=int, default=None, help="grid size")
    common.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="KEY=VALUE",
                        help="tolerance override (repeatable)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="JSON config file (flags override it)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "pohozaev":
            sp.add_argument("--mode", choices=["analytic", "numeric"], default=None)
        if name == "ibp":
            sp.add_argument("--case", choices=["ball", "mixed", "disjoint"], default=None)
        if name == "dilation":
            sp.add_argument("--A", type=float, default=None)
            sp.add_argument("--B", type=float, default=None)
            sp.add_argument("--smooth", action="store_true", default=None, help="add a smooth Gaussian h")
    return p


def config_from_args(args):
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = RunConfig.from_json(fh.read()).to_dict()
        base.update(base.pop("grid"))
        if base["command"] != args.command:
            raise UsageError("config command differs from the subcommand")
    base["command"] = args.command
    names = {"n": "n", "s": "s", "L": "L", "N": "N", "out": "output", "seed": "seed",
             "mode": "mode", "case": "case", "A": "A", "B": "B", "smooth": "smooth"}
    for a, k in names.items():
        v = getattr(args, a, None)
        if v is not None:
            base[k] = v
    dom = base.get("domain")
    if dom is not None and args.n is not None and DomainSpec.from_json(dom).n != args.n:
        raise UsageError("--n disagrees with the configured domain")
    if args.tol:
        base["tolerances"] = {**base.get("tolerances", {}), **dict(args.tol)}
    return RunConfig(**base)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        status, report = run(cfg)
    except (UsageError, DomainError, OSError) as exc:
        parser.error(str(exc))
    for row in report["checks"]:
        flag = "PASS" if row["passed"] else "FAIL"
        print(f"{flag} {row['name']:<24} n={row['n']} s={row['s']} lhs={row['lhs']:.10g} "
              f"rhs={row['rhs_volume'] + row['rhs_boundary']:.10g} res_rel={row['residual_rel']:.3e}")
    for g in report["goldens"]:
        flag = "PASS" if g["passed"] else "FAIL"
        print(f"{flag} golden {g['name']}:{g['quantity']} value={g['value']:.12g} expected={g['expected']:.12g}")
    if status:
        print("failing: " + ", ".join(report["failures"]), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
