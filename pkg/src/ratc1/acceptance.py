"""The acceptance suite, shared by ``selftest`` and the pytest wrapper.

Each check returns a :class:`CriterionResult`; nothing here asserts, so a
failing criterion is reported alongside the measured numbers.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bspline import BSplineBasis, fit_spline, make_knots
from .harness import Grid, c1_error, fit_rate, get_target, unit_grid
from .newman import NewmanBasis, eval_r, eval_r_prime, eval_repu_pair, sup_errors
from .ratnet import (BuildConfig, build_spline_net, collapse_to_rational, degree_report,
                     eval_net, expected_bookkeeping, grad_net)
from .symreg import build_cancellation_net, convergence_scan, grad_symnet

NEWMAN_NS = (4, 9, 16, 25, 36, 49, 64)
C1_NS = (16, 32, 64, 128, 256)
SPLINE_NS = (4, 8, 16, 32)
M_SCAN = (8, 16, 32, 64)
SYMREG_SCHEDULE = (4, 8, 16, 32)
SYMREG_EPSILON = 1.5


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _strictly_decreasing(ys):
    return all(b < a for a, b in zip(ys, ys[1:]))


def _nonincreasing(ys):
    return all(b <= a for a, b in zip(ys, ys[1:]))


def _fmt(ys):
    return "[" + ", ".join(f"{y:.3g}" for y in ys) + "]"


def newman_c0_bound(n_uniform=100_000):
    rows = [sup_errors(n, n_uniform) for n in NEWMAN_NS]
    ok = all(r["c0_err_abs"] <= r["c0_bound"] for r in rows)
    worst = max(r["c0_err_abs"] / r["c0_bound"] for r in rows)
    return ok, f"max err/bound = {worst:.3g}", rows


def newman_c0_rate(n_uniform=100_000):
    rows = [sup_errors(n, n_uniform) for n in NEWMAN_NS]
    fit = fit_rate([r["n"] for r in rows], [r["c0_err_abs"] for r in rows], "sqrt")
    return -1.3 <= fit.slope <= -0.8, f"slope vs sqrt(n) = {fit.slope:.4f} (r2 {fit.r2:.4f})"


def requ_c1_decay(n_uniform=100_000):
    errs = [sup_errors(n, n_uniform)["c1_err_requ"] for n in C1_NS]
    fit = fit_rate(C1_NS, errs, "loglog")
    ok = _strictly_decreasing(errs) and fit.slope <= -1.0
    return ok, f"errors {_fmt(errs)}, log-log slope {fit.slope:.3f}"


def newman_exact_values(n_uniform=100_000):
    worst = 0.0
    for n in range(1, 65):
        b = NewmanBasis(n)
        worst = max(worst, abs(eval_r(b, 1.0) - 1.0), abs(eval_r(b, -1.0) + 1.0))
    x = np.linspace(-1.0, 1.0, n_uniform)
    ident = float(np.abs(eval_r(NewmanBasis(1), x) - x).max())
    return worst <= 1e-12 and ident <= 1e-14, f"|r_n(+-1) -+ 1| <= {worst:.2g}, |r_1 - id| = {ident:.2g}"


def bspline_bounds(n_grid=10_000):
    z = np.linspace(0.0, 1.0, n_grid)
    ok = True
    ratios = [0.0, 0.0, 0.0]
    for q in (3, 4):
        for N in (4, 8, 16):
            sweep = BSplineBasis(make_knots(q, N)).sweep(z)
            v2, d2 = sweep[2]
            vq, _ = sweep[q]
            c0 = np.abs(v2).max()
            c1 = (np.abs(v2).max(axis=1) + np.abs(d2).max(axis=1)).max()
            top = np.abs(vq).max()
            r = (c0 / N, c1 / (5 * N * N), top / (2 ** (q - 2) * N))
            ratios = [max(a, b) for a, b in zip(ratios, r)]
            ok &= c0 <= N and c1 <= 5 * N * N and top <= 2 ** (q - 2) * N
    return ok, "max ratio to bound: B2 %.3g, B2 C1 %.3g, Bq %.3g" % tuple(ratios)


def _oracle_cases(quick):
    for d in (1, 2):
        for N in ((4, 8) if not quick else (8,)):
            yield d, N


def oracle_equivalence(quick=False):
    worst = 0.0
    for d, N in _oracle_cases(quick):
        f = get_target("sin2pi*gauss" if d == 2 else "sin2pi")
        spline = fit_spline(f.sampler, 3, N, d=d)
        net = build_spline_net(BuildConfig(3, N, d=d), spline, oracle=True)
        x = unit_grid(d).points()
        worst = max(worst, float(np.abs(eval_net(net, x) - spline(x)).max()))
    return worst <= 1e-9, f"sup |oracle net - spline| = {worst:.3g}"


def spline_c1_series(Ns=SPLINE_NS, target="sin2pi", q=3):
    f = get_target(target)
    grid = unit_grid(1)
    return [c1_error(f, fit_spline(f.sampler, q, N), grid).c1_error for N in Ns]


def spline_c1_rate():
    errs = spline_c1_series()
    fit = fit_rate(SPLINE_NS, errs, "loglog")
    return fit.slope <= -1.5, f"errors {_fmt(errs)}, slope {fit.slope:.3f}"


def net_c1_error(N, M, target="sin2pi", beta=3.0):
    f = get_target(target)
    spline = fit_spline(f.sampler, int(beta), N)
    net = build_spline_net(BuildConfig(beta, N, M=M), spline)
    return c1_error(f, net, unit_grid(1)).c1_error


def network_c1_rate():
    errs = [net_c1_error(N, N) for N in SPLINE_NS]
    fit = fit_rate(SPLINE_NS, errs, "loglog")
    by_m = [net_c1_error(8, M) for M in M_SCAN]
    ok = fit.slope <= -1.5 and _nonincreasing(by_m)
    return ok, f"M=N errors {_fmt(errs)}, slope {fit.slope:.3f}; N=8 vs M {_fmt(by_m)}"


BOOKKEEPING_CONFIGS = tuple(
    (beta, N, M, d)
    for beta in (2.5, 3.0, 4.5)
    for N in (4, 8)
    for M in (None, 9)
    for d in (1, 2)
)


def bookkeeping():
    bad = []
    for beta, N, M, d in BOOKKEEPING_CONFIGS:
        cfg = BuildConfig(beta, N, M=M, d=d)
        spline = fit_spline(lambda x: np.zeros(len(x)), cfg.q, N, d=d)
        rep = degree_report(build_spline_net(cfg, spline))
        want = expected_bookkeeping(cfg)
        if any(rep[k] != want[k] for k in want):
            bad.append((beta, N, M, d))
    worst = 0.0
    f = get_target("sin2pi")
    for N in (2, 3, 4):
        for M in (2, 3, 4):
            cfg = BuildConfig(3.0, N, M=M)
            r = collapse_to_rational(build_spline_net(cfg, fit_spline(f.sampler, 3, N)))
            limit = (N + cfg.q) * (M + 1)
            worst = max(worst, r.degree_bound / limit)
    ok = not bad and worst <= 1.0
    return ok, (f"{len(BOOKKEEPING_CONFIGS) - len(bad)}/{len(BOOKKEEPING_CONFIGS)} configs exact"
                f"{' (mismatch ' + str(bad) + ')' if bad else ''}; "
                f"collapsed degree / d(N+q)^d(M+1) <= {worst:.3f}")


def polynomial_reproduction():
    grid = np.linspace(0.0, 1.0, 10_001)
    errs = []
    for N in (4, 8, 16):
        s = fit_spline(lambda x: x[:, 0] ** 2, 3, N)
        errs.append(float(np.abs(s(grid)[:, 0] - grid ** 2).max()))
    return max(errs) <= 1e-8, f"sup |S - x^2| = {_fmt(errs)}"


def symreg_scan(activations=("exp1",), schedule=SYMREG_SCHEDULE, target="sin2pi"):
    f = get_target(target)
    return convergence_scan(
        lambda N: build_cancellation_net(f.sampler, activations, N, epsilon=SYMREG_EPSILON),
        schedule, f)


def symreg_cancellation():
    scan = symreg_scan()
    c0 = [e.c0_error for e in scan]
    c1 = [e.c1_error for e in scan]
    cancel = scan[-1].cancel_errors[0]
    ok = _strictly_decreasing(c0) and _strictly_decreasing(c1) and c0[-1] <= 1e-2 and cancel <= 5e-2
    return ok, f"C0 {_fmt(c0)}, C1 {_fmt(c1)}, |S_1 - id| = {cancel:.2g}"


def _central(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def gradient_consistency(seed=0):
    """Analytic and forward-mode derivatives against central differences."""
    rng = np.random.default_rng(seed)
    errs = {}
    x = rng.uniform(-0.95, 0.95, 200)
    b = NewmanBasis(16)
    errs["newman r'"] = (np.abs(eval_r_prime(b, x) - _central(lambda t: eval_r(b, t), x, 1e-6)).max(), 1e-5)
    errs["newman R'"] = (np.abs(eval_repu_pair(b, 2, x)[1]
                                - _central(lambda t: eval_repu_pair(b, 2, t)[0], x, 1e-6)).max(), 1e-6)
    z = rng.uniform(0.01, 0.99, 200)
    basis = BSplineBasis(make_knots(4, 8))
    fd = _central(lambda t: basis.sweep(t)[4][0], z, 1e-6)
    errs["B^q'"] = (np.abs(basis.sweep(z)[4][1] - fd).max() / 8 ** 2, 1e-6)
    f2 = get_target("sin2pi*gauss")
    pts = rng.uniform(0.02, 0.98, (50, 2))
    errs["target grad"] = (fd_jacobian_error(f2, f2.grad, pts, 1e-6), 1e-6)
    s = fit_spline(f2.sampler, 3, 8, d=2)
    errs["spline grad"] = (fd_jacobian_error(s, s.grad, pts, 1e-6), 1e-5)
    net = build_spline_net(BuildConfig(3, 8, M=16, d=2), s)
    errs["net grad"] = (fd_jacobian_error(lambda p: eval_net(net, p), lambda p: grad_net(net, p), pts, 1e-5), 1e-4)
    f1 = get_target("sin2pi")
    sym = build_cancellation_net(f1.sampler, ("exp1", "atan2"), 8, epsilon=SYMREG_EPSILON)
    p1 = rng.uniform(0.02, 0.98, (25, 1))
    errs["symreg grad"] = (fd_jacobian_error(sym, lambda p: grad_symnet(sym, p), p1, 1e-5), 1e-4)
    bad = [k for k, (e, tol) in errs.items() if not e <= tol]
    detail = ", ".join(f"{k} {e:.1g}" for k, (e, _) in errs.items())
    return not bad, detail


def fd_jacobian_error(fn, jac, pts, h):
    J = np.asarray(jac(pts))
    d = pts.shape[1]
    worst = 0.0
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        fd = (np.asarray(fn(pts + e)) - np.asarray(fn(pts - e))) / (2 * h)
        worst = max(worst, float(np.abs(J[..., k].reshape(fd.shape) - fd).max()))
    return worst


CRITERIA = (
    (1, "Newman C0 bound", newman_c0_bound),
    (2, "Newman C0 rate", newman_c0_rate),
    (3, "ReQU C1 decay", requ_c1_decay),
    (4, "Newman exact values", newman_exact_values),
    (5, "B-spline sup bounds", bspline_bounds),
    (6, "Oracle equivalence", oracle_equivalence),
    (7, "Spline C1 rate", spline_c1_rate),
    (8, "Network C1 rate", network_c1_rate),
    (9, "Bookkeeping exactness", bookkeeping),
    (10, "Polynomial reproduction", polynomial_reproduction),
    (11, "Symbolic-regression cancellation", symreg_cancellation),
    (12, "Gradient consistency", gradient_consistency),
)


def run_criterion(number, quick=False):
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            kwargs = {"quick": True} if quick and fn is oracle_equivalence else {}
            out = fn(**kwargs)
            ok, detail = out[0], out[1]
            return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all(quick=False, echo=print):
    results = []
    for num, _, _ in CRITERIA:
        res = run_criterion(num, quick)
        if echo:
            echo(res.line())
        results.append(res)
    return results
