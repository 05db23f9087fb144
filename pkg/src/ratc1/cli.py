"""Command line entry point: ``ratc1 <subcommand> ...``.

Exit codes: 0 success, 1 acceptance failure, 2 usage error.  Flags may also
be given as ``key=value`` lines in a file passed with ``--config``.  The
environment variable RATC1_THREADS caps BLAS/OpenMP threads; it is applied
before numpy is imported.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class UsageError(Exception):
    pass


def _apply_thread_cap(environ=os.environ):
    raw = environ.get("RATC1_THREADS")
    if raw is None:
        return None
    if not raw.isdigit() or int(raw) < 1:
        raise UsageError(f"RATC1_THREADS must be a positive integer, got {raw!r}")
    for var in THREAD_VARS:
        environ[var] = raw
    return int(raw)


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _bool(text):
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def read_config(path):
    """``key=value`` lines; '#' starts a comment; dashes and underscores are equivalent."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="ratc1", description="Rational approximation in C1 norms.")
    p.add_argument("--config", help="key=value defaults file")
    sub = p.add_subparsers(dest="command", required=True)
    p.subcommands = sub.choices

    s = sub.add_parser("newman-table", help="sup errors of the Newman approximants")
    s.add_argument("--n-list", type=_int_list, default=[4, 9, 16, 25, 36, 49, 64])
    s.add_argument("--grid", type=int, default=100_000)
    s.add_argument("--out")

    s = sub.add_parser("spline-fit", help="least-squares tensor spline fit of a target")
    s.add_argument("--fn", default="sin2pi")
    s.add_argument("--beta", type=float, default=3.0)
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--boundary", default="symmetric", choices=("symmetric", "verbatim"))
    s.add_argument("--out")

    s = sub.add_parser("spline-eval", help="evaluate a fitted spline on a grid")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--grid", type=int, default=1000)
    s.add_argument("--out")

    s = sub.add_parser("net-build", help="build the spline network of a target")
    s.add_argument("--fn", default="sin2pi")
    s.add_argument("--beta", type=float, default=3.0)
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--M", type=int)
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--oracle", type=_bool, default=False)
    s.add_argument("--out")

    s = sub.add_parser("net-eval", help="evaluate a network against a target")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--grid", type=int, default=10_000)
    s.add_argument("--ref", default="sin2pi")
    s.add_argument("--out")

    s = sub.add_parser("rates", help="fit a convergence rate to two CSV columns")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--mode", choices=("loglog", "sqrt"), default="loglog")

    s = sub.add_parser("symreg-demo", help="convergence scan of a cancellation network")
    s.add_argument("--activations", default="exp1")
    s.add_argument("--fn", default="sin2pi")
    s.add_argument("--schedule", type=_int_list, default=[4, 8, 16, 32])
    s.add_argument("--epsilon", type=float, default=1.5)
    s.add_argument("--grid", type=int, default=2001)
    s.add_argument("--out")

    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.add_argument("--quick", action="store_true")
    return p


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_newman_table(args):
    from .harness import csv_text
    from .newman import sup_errors
    cols = ["n", "c0_err_abs", "c0_bound", "c0_err_requ", "c1_err_requ"]
    rows = []
    for n in args.n_list:
        r = sup_errors(n, args.grid)
        rows.append([r[c] for c in cols])
    _emit(args, csv_text(cols, rows))
    return 0


def cmd_spline_fit(args):
    from .bspline import fit_spline
    from .harness import get_target
    f = get_target(args.fn, args.d)
    s = fit_spline(f.sampler, int(args.beta), args.N, d=f.d, boundary=args.boundary)
    _emit(args, s.dumps() + "\n")
    return 0


def _grid_points(n, d):
    from .harness import Grid
    return Grid(n, d).points()


def cmd_spline_eval(args):
    import numpy as np
    from .bspline import TensorSpline
    from .harness import csv_text
    with open(args.inp) as fh:
        s = TensorSpline.from_json(json.load(fh))
    x = _grid_points(args.grid, s.d)
    v, g = s(x), s.grad(x)
    xs = ["x"] if s.d == 1 else [f"x{i + 1}" for i in range(s.d)]
    vs = ["s"] if s.p == 1 else [f"s{k + 1}" for k in range(s.p)]
    ds = [f"d{v_}/d{x_}" for v_ in vs for x_ in xs]
    rows = np.hstack([x, v, g.reshape(len(x), -1)])
    _emit(args, csv_text(xs + vs + ds, rows.tolist()))
    return 0


def cmd_net_build(args):
    from .bspline import fit_spline
    from .harness import get_target
    from .ratnet import BuildConfig, build_spline_net
    f = get_target(args.fn, args.d)
    cfg = BuildConfig(args.beta, args.N, M=args.M, d=f.d, epsilon=args.epsilon)
    spline = fit_spline(f.sampler, cfg.q, cfg.N, d=f.d)
    net = build_spline_net(cfg, spline, oracle=args.oracle)
    _emit(args, net.dumps() + "\n")
    return 0


def cmd_net_eval(args):
    import numpy as np
    from .harness import csv_text, get_target
    from .ratnet import RationalNetwork, eval_net_with_grad
    with open(args.inp) as fh:
        net = RationalNetwork.from_json(json.load(fh))
    f = get_target(args.ref, net.input_dim)
    lo, hi = net.domain
    x = _grid_points(args.grid, net.input_dim) * (hi - lo) + lo
    v, g = eval_net_with_grad(net, x)
    fv, fg = f(x), f.grad(x)
    d0 = np.abs(v - fv).max(axis=1)
    d1 = np.abs(g - fg).max(axis=(1, 2))
    xs = ["x"] if net.input_dim == 1 else [f"x{i + 1}" for i in range(net.input_dim)]
    rows = np.column_stack([x, fv[:, 0], v[:, 0], d0, d1])
    _emit(args, csv_text(xs + ["f", "net", "|Δ|", "|Δ′|"], rows.tolist()))
    return 0


def cmd_rates(args):
    from .harness import fit_rate, read_csv
    rows = read_csv(args.inp)
    if not rows or args.x not in rows[0] or args.y not in rows[0]:
        raise UsageError(f"columns {args.x!r} and {args.y!r} must exist in {args.inp}")
    fit = fit_rate([float(r[args.x]) for r in rows], [float(r[args.y]) for r in rows], args.mode)
    print(f"slope={fit.slope!r} intercept={fit.intercept!r} r2={fit.r2!r} mode={fit.mode}")
    return 0


def cmd_symreg_demo(args):
    from .harness import csv_text, get_target
    from .symreg import build_cancellation_net, convergence_scan, get_activation
    acts = [get_activation(a.strip()) for a in args.activations.split(",") if a.strip()]
    f = get_target(args.fn)
    scan = convergence_scan(
        lambda N: build_cancellation_net(f.sampler, acts, N, epsilon=args.epsilon),
        args.schedule, f, grid_size=args.grid)
    cols = ["schedule_entry", "c0_err", "c1_err"] + [f"cancel_err_{i + 1}" for i in range(len(acts))]
    rows = [[e.N, e.c0_error, e.c1_error, *e.cancel_errors] for e in scan]
    _emit(args, csv_text(cols, rows))
    return 0


def cmd_selftest(args):
    import numpy as np
    from .acceptance import fd_jacobian_error, run_all
    from .harness import get_target, target_names
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.02, 0.98, (100, 1))
    for name in target_names():
        f = get_target(name)
        if fd_jacobian_error(f, f.grad, pts, 1e-6) > 1e-6:
            print(f"registry gradient check failed for {name}")
            return 1
    results = run_all(quick=args.quick)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


COMMANDS = {
    "newman-table": cmd_newman_table,
    "spline-fit": cmd_spline_fit,
    "spline-eval": cmd_spline_eval,
    "net-build": cmd_net_build,
    "net-eval": cmd_net_eval,
    "rates": cmd_rates,
    "symreg-demo": cmd_symreg_demo,
    "selftest": cmd_selftest,
}

def _config_path(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    return known.config


def cli_dispatch(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_thread_cap()
        path = _config_path(argv)
        if path:
            defaults = read_config(path)
            for sub in parser.subcommands.values():
                dests = {a.dest for a in sub._actions}
                sub.set_defaults(**{k: v for k, v in defaults.items() if k in dests})
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError) as exc:
        print(f"ratc1: {exc}", file=sys.stderr)
        return 2

    from .errors import ArgumentError, ConfigMismatch, DegenerateSeries, DomainError
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ArgumentError, ConfigMismatch, DegenerateSeries, DomainError,
            OSError, ValueError) as exc:
        print(f"ratc1 {args.command}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
