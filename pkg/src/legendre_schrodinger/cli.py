"""Command line harness.

    legendre-schrodinger solve      --problem test1 --N 18 --h 0.05 --out surface.csv --plot
    legendre-schrodinger errors     --problem test2 --N 25 --h 0.05 --k0 2
    legendre-schrodinger converge   --problem test1 --h 0.02 --Ns 6,8,10,12,14,16,18
    legendre-schrodinger time-order --problem surrogate --hs 0.2,0.1,0.05,0.025
    legendre-schrodinger tableau
    legendre-schrodinger compare    --k0s 1,2

Every run option can also come from an INI file (``--config run.ini``,
section ``[run]``, keys spelled like the flags with underscores); flags win.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from pathlib import Path

from .gmres import PRECONDITIONERS, GmresConfig
from .irk import StepFailure, gauss3_tableau
from .problem import CompatibilityError
from .solver import (
    DEFAULT_K0,
    ERROR_COLUMNS,
    SAMPLE_TIMES,
    RunConfig,
    convergence_sweep,
    error_surface,
    error_table,
    time_order_sweep,
)

EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 3

# option name -> type, for both flags and config-file keys
RUN_OPTIONS = {
    "problem": str,
    "N": int,
    "h": float,
    "k0": float,
    "t0": float,
    "T": float,
    "quad_margin": int,
    "gmres_tol": float,
    "gmres_restart": int,
    "gmres_max_outer": int,
    "preconditioner": str,
    "out": str,
    "workers": int,
}
DEFAULTS = {
    "problem": "test1",
    "N": 18,
    "h": 0.05,
    "quad_margin": 8,
    "gmres_tol": 1e-12,
    "gmres_restart": 50,
    "gmres_max_outer": 200,
    "preconditioner": "stage_mass",
    "workers": 1,
}


def _fmt(value, col):
    if isinstance(value, int):
        return str(value)
    if col in ("t", "h", "k0"):
        return f"{value:.6g}"
    return f"{value:.5e}"


def format_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else _fmt(v, col) for v, col in zip(row, header)])
    return buf.getvalue()


def emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def load_config_file(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep N / T case
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("run"):
        raise ValueError(f"{path}: missing [run] section")
    values = {}
    for key, raw in parser.items("run"):
        key = key.replace("-", "_")
        if key not in RUN_OPTIONS:
            raise ValueError(f"{path}: unknown key {key!r}")
        values[key] = RUN_OPTIONS[key](raw)
    return values


def resolve_options(args):
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(load_config_file(args.config))
    for key in RUN_OPTIONS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def make_run_config(opts):
    k0 = opts.get("k0")
    if opts["problem"] == "test2" and k0 is None:
        k0 = DEFAULT_K0
    if opts["problem"] == "test2":
        print(f"# k0 = {k0:g}", file=sys.stderr)
    gmres = GmresConfig(
        tol=opts["gmres_tol"],
        restart=opts["gmres_restart"],
        max_outer=opts["gmres_max_outer"],
        preconditioner=opts["preconditioner"],
    )
    return RunConfig(
        problem=opts["problem"],
        N=opts["N"],
        h=opts["h"],
        k0=k0,
        t0=opts.get("t0"),
        T=opts.get("T"),
        quad_margin=opts["quad_margin"],
        gmres=gmres,
    )


def _maybe_plot(args, out, plot_fn, *plot_args):
    if not args.plot:
        return
    if not out:
        raise ValueError("--plot requires --out")
    from . import plotting

    path = plotting.figure_path(out)
    plot_fn(*plot_args, path)
    print(f"# figure written to {path}", file=sys.stderr)


def cmd_solve(args, opts):
    config = make_run_config(opts)
    if config.make_problem().exact is None:
        raise ValueError("solve reports errors and needs a problem with an exact solution")
    rows = error_surface(config)
    emit(format_csv(("x", "y", "abs_err_re", "abs_err_im"), rows), opts.get("out"))
    from . import plotting

    _maybe_plot(
        args, opts.get("out"),
        lambda r, p: plotting.plot_error_surface(r, p, f"{config.problem}, N={config.N}, h={config.h:g}"),
        rows,
    )


def cmd_errors(args, opts):
    config = make_run_config(opts)
    times = _float_list(args.times) if args.times else list(SAMPLE_TIMES)
    reports = error_table(config, times)
    emit(format_csv(ERROR_COLUMNS, [r.row() for r in reports]), opts.get("out"))


def cmd_converge(args, opts):
    config = make_run_config(opts)
    Ns = _int_list(args.Ns)
    rows = convergence_sweep(config, Ns, workers=opts["workers"])
    emit(format_csv(("N", "l2_re", "l2_im"), rows), opts.get("out"))
    from . import plotting

    _maybe_plot(
        args, opts.get("out"),
        lambda r, p: plotting.plot_convergence(r, p, f"{config.problem}, h={config.h:g}"),
        rows,
    )


def cmd_time_order(args, opts):
    config = make_run_config(opts)
    hs = _float_list(args.hs)
    rows, slope = time_order_sweep(config, hs, workers=opts["workers"])
    emit(format_csv(("h", "l2_re", "l2_im", "slope"), [r + (slope,) for r in rows]), opts.get("out"))
    if slope is not None:
        print(f"# fitted order {slope:.4f}", file=sys.stderr)
    from . import plotting

    _maybe_plot(args, opts.get("out"), lambda r, p: plotting.plot_time_order(r, slope, p), rows)


def cmd_tableau(args, opts):
    tab = gauss3_tableau()
    lines = []
    for i in range(tab.s):
        lines.append(" ".join([f"{tab.c[i]:.17g}", "|"] + [f"{a:.17g}" for a in tab.A[i]]))
    lines.append(" ".join(["", "|"] + [f"{b:.17g}" for b in tab.b]))
    emit("\n".join(lines) + "\n", opts.get("out"))


def cmd_compare(args, opts):
    from .reference import PUBLISHED_ERRORS, PUBLISHED_H, PUBLISHED_N, published_sweep

    # the published table is fixed at N = 25, h = 1/20
    base = make_run_config(
        dict(opts, problem="test2", N=PUBLISHED_N, h=PUBLISHED_H, k0=opts.get("k0") or DEFAULT_K0)
    )
    k0s = _float_list(args.k0s)
    results = published_sweep(k0s, base)
    best = results[0]
    header = ("k0",) + ERROR_COLUMNS + ("pub_max_re", "pub_max_im", "pub_avg_re", "pub_avg_im")
    rows = []
    for res in sorted(results, key=lambda r: r.k0):
        for rep in res.reports:
            rows.append((res.k0,) + rep.row() + PUBLISHED_ERRORS[round(rep.t, 2)])
    emit(format_csv(header, rows), opts.get("out"))
    for res in sorted(results, key=lambda r: r.k0):
        print(f"# k0 = {res.k0:g}: worst |log10(ours/published)| = {res.worst_log10_ratio:.3f}",
              file=sys.stderr)
    verdict = "within one order of magnitude" if best.within_one_order else "NOT within one order (k0 is unstated in the source)"
    print(f"# closest k0 = {best.k0:g}: {verdict}", file=sys.stderr)


COMMANDS = {
    "solve": cmd_solve,
    "errors": cmd_errors,
    "converge": cmd_converge,
    "time-order": cmd_time_order,
    "tableau": cmd_tableau,
    "compare": cmd_compare,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", help="INI file with a [run] section")
    g.add_argument("--problem", choices=("test1", "test2", "surrogate"))
    g.add_argument("--N", type=int)
    g.add_argument("--h", type=float)
    g.add_argument("--k0", type=float, help="wavenumber for test2 (default 1)")
    g.add_argument("--t0", type=float)
    g.add_argument("--T", type=float)
    g.add_argument("--quad-margin", dest="quad_margin", type=int)
    g.add_argument("--gmres-tol", dest="gmres_tol", type=float)
    g.add_argument("--gmres-restart", dest="gmres_restart", type=int)
    g.add_argument("--gmres-max-outer", dest="gmres_max_outer", type=int)
    g.add_argument("--preconditioner", choices=PRECONDITIONERS)
    g.add_argument("--workers", type=int, help="parallel configurations in sweeps")
    g.add_argument("--out", help="output CSV path (stdout if omitted)")
    g.add_argument("--plot", action="store_true", help="also write a PNG next to --out")

    parser = argparse.ArgumentParser(prog="legendre-schrodinger", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve and write the final-time error surface")
    p = sub.add_parser("errors", parents=[common], help="error table at sample times")
    p.add_argument("--times", help="comma-separated sample times (default 0.1,0.25,0.5,0.75,1)")
    p = sub.add_parser("converge", parents=[common], help="spatial convergence sweep")
    p.add_argument("--Ns", default="6,8,10,12,14,16,18")
    p = sub.add_parser("time-order", parents=[common], help="temporal order sweep")
    p.add_argument("--hs", default="0.2,0.1,0.05,0.025")
    sub.add_parser("tableau", parents=[common], help="print the Gauss-3 Butcher tableau")
    p = sub.add_parser("compare", parents=[common], help="compare test2 errors with the published table")
    p.add_argument("--k0s", default="1,2")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        if opts["problem"] == "surrogate" and args.command != "time-order":
            raise ValueError("the surrogate problem is only available for time-order")
        COMMANDS[args.command](args, opts)
    except StepFailure as exc:
        print(f"error: {exc} (step {exc.step_index})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ValueError, CompatibilityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
