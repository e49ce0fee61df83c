"""Command line front end.

    rpl phase-diagram   --n 3:17:2 --m 20:600:20 --s 0.05 --out pd.csv
    rpl threshold-sweep --n 5 --trials 3 --seed 7 --out sweep.csv
    rpl balance         --out curve.csv
    rpl robc            --n 20 --m 4000 --s 0 --trials 500 --out robc.csv
    rpl certificate     --n 50 --m 8000 --s 0.05 --trials 20 --out cert.csv
    rpl dist cdf        --rho 0.795 --x 0.1,1,3

Exit status is 0 on success, 1 for bad or missing flags and 2 when the
computation itself fails.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments as ex
from .product import get_dist
from .solver import solve

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for runtime failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_values(text: str, kind=float) -> list:
    """``"5"``, ``"3,5,7"`` or an inclusive range ``"start:stop:step"``."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            lo, hi, step = parts
            k = int(np.floor((hi - lo) / step + 1e-9))
            vals = [round(lo + i * step, 10) for i in range(k + 1)]
        else:
            vals = [float(p) for p in text.split(",") if p.strip()]
        if not vals:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid value list {text!r}") from None
    if kind is int:
        if any(v != int(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected integers in {text!r}")
        return [int(v) for v in vals]
    return vals


def _int_list(text):
    return parse_values(text, int)


def _float_list(text):
    return parse_values(text, float)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common(p, *, out_required=True, solver=True):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--out", required=out_required, metavar="PATH",
                   help="output CSV path" + ("" if out_required else " (default: stdout)"))
    p.add_argument("--format", choices=["csv"], default="csv", help="output format (csv only)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes (default: $RPL_THREADS or 1); output does not depend on it")
    if solver:
        p.add_argument("--max-iters", type=_positive_int, default=None,
                       help="solver iteration cap (default 5000)")
        p.add_argument("--step-c", type=float, default=None,
                       help="solver step constant (default 1.0)")
        p.add_argument("--history", metavar="PATH", default=None,
                       help="also solve trial 0 of the first cell and dump its objective trace")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rpl", description="Robust-PhaseLift experiments.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phase-diagram", help="success rate over an (n, m) grid")
    p.add_argument("--n", type=_int_list, default=parse_values("3:17:2", int),
                   help="signal lengths, list or start:stop:step (default 3:17:2)")
    p.add_argument("--m", type=_int_list, default=parse_values("20:600:20", int),
                   help="measurement counts (default 20:600:20; the wider panel is 100:1700:100)")
    p.add_argument("--s", type=_float_list, default=[0.0],
                   help="outlier fractions (default 0)")
    p.add_argument("--trials", type=_positive_int, default=10, help="trials per cell (default 10)")
    p.add_argument("--noise", choices=["adversarial", "rademacher"], default="adversarial",
                   help="outlier model (default adversarial)")
    p.add_argument("--magnitude", type=float, default=1.0,
                   help="Rademacher outlier magnitude (default 1.0)")
    _common(p)

    p = sub.add_parser("threshold-sweep", help="relative error against outlier fraction")
    p.add_argument("--n", type=_positive_int, default=5, help="signal length (default 5)")
    p.add_argument("--m", type=_positive_int, default=None, help="measurements (default 300 n)")
    p.add_argument("--s", type=_float_list, default=None,
                   help="outlier fractions (default 0:1:0.01)")
    p.add_argument("--trials", type=_positive_int, default=1,
                   help="trials per s; rel_error is their median (default 1)")
    _common(p)

    p = sub.add_parser("balance", help="critical fraction s* and the hstar curve")
    p.add_argument("--rho-step", type=float, default=0.005, help="rho grid step (default 0.005)")
    p.add_argument("--s-step", type=float, default=0.01, help="hstar sample step (default 0.01)")
    _common(p, solver=False)

    p = sub.add_parser("robc", help="empirical outlier bound ratio over tangent directions")
    p.add_argument("--n", type=_positive_int, default=20, help="signal length (default 20)")
    p.add_argument("--m", type=_positive_int, default=4000, help="measurements (default 4000)")
    p.add_argument("--s", type=float, default=0.0, help="outlier fraction (default 0)")
    p.add_argument("--trials", type=_positive_int, default=500, help="directions (default 500)")
    _common(p, solver=False)

    p = sub.add_parser("certificate", help="dual certificate measurements")
    p.add_argument("--n", type=_positive_int, default=50, help="signal length (default 50)")
    p.add_argument("--m", type=_positive_int, default=8000, help="measurements (default 8000)")
    p.add_argument("--s", type=float, default=0.05, help="outlier fraction (default 0.05)")
    p.add_argument("--trials", type=_positive_int, default=20, help="trials (default 20)")
    _common(p, solver=False)

    p = sub.add_parser("dist", help="|X Y| distribution values")
    p.add_argument("what", choices=["pdf", "cdf", "quantile"])
    p.add_argument("--rho", type=float, required=True, help="correlation in [-1, 1]")
    p.add_argument("--x", type=_float_list, required=True,
                   help="evaluation points (probabilities for quantile)")
    _common(p, out_required=False, solver=False)
    return ap


def _check_fraction(values):
    for s in values:
        if not 0.0 <= s <= 1.0:
            raise UsageError(f"outlier fraction {s} outside [0, 1]")


def _solver(args):
    try:
        return ex.default_solver(args.max_iters, args.step_c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dump_history(args, cfg):
    if not args.history:
        return
    task = ex.RecoveryTask(cfg.n_values[0], cfg.m_values[0], cfg.s_values[0], 0, cfg.seed,
                           cfg.solver, cfg.noise, cfg.magnitude)
    ens, b, _ = ex.recovery_problem(task)
    ex.write_history(solve(ens, b, cfg.solver), args.history)


def _run(args) -> None:
    cmd = args.command
    if cmd == "phase-diagram":
        _check_fraction(args.s)
        if min(args.n) < 2 or min(args.m) < 1:
            raise UsageError("need n >= 2 and m >= 1")
        cfg = ex.ExperimentConfig(cmd, args.n, args.m, args.s, args.trials, args.seed,
                                  _solver(args), args.noise, args.magnitude,
                                  threads=args.threads, out_path=args.out)
        ex.run_phase_diagram(cfg)
        _dump_history(args, cfg)
    elif cmd == "threshold-sweep":
        s_values = args.s if args.s is not None else ex.sweep_grid(0.01)
        _check_fraction(s_values)
        if args.n < 2:
            raise UsageError("need n >= 2")
        m = args.m if args.m is not None else 300 * args.n
        cfg = ex.ExperimentConfig(cmd, [args.n], [m], s_values, args.trials, args.seed,
                                  _solver(args), threads=args.threads, out_path=args.out)
        rows = ex.run_threshold_sweep(cfg)
        _dump_history(args, cfg)
        print(f"largest s with rel_error < {ex.SUCCESS_TOL}: "
              f"{ex.fmt(ex.largest_recoverable_fraction(rows))}")
    elif cmd == "balance":
        if not (0 < args.rho_step <= 0.5 and 0 < args.s_step <= 0.5):
            raise UsageError("grid steps must lie in (0, 0.5]")
        sol, elapsed = ex.run_balance(args.out, args.rho_step, args.s_step)
        print(f"s_star={ex.fmt(sol.s_star)} rho_star={ex.fmt(sol.rho_star)} "
              f"hstar_root={ex.fmt(sol.hstar_root)}")
        print(f"elapsed {elapsed:.1f}s", file=sys.stderr)
    elif cmd == "robc":
        _check_fraction([args.s])
        rep = ex.run_robc(args.n, args.m, args.s, args.trials, args.seed, args.out)
        print(f"min={ex.fmt(rep.min_ratio)} mean={ex.fmt(rep.mean_ratio)} "
              f"theoretical={ex.fmt(rep.theoretical)}")
    elif cmd == "certificate":
        _check_fraction([args.s])
        if args.n < 2:
            raise UsageError("need n >= 2")
        reps, dev = ex.run_certificate(args.n, args.m, args.s, args.trials, args.seed,
                                       args.out, args.threads)
        ok = np.mean([r.lambda_min_Tperp > 0 and r.y_T_frobenius <= 0.5 for r in reps])
        print(f"regime_rate={ex.fmt(ok)} mean_Y_deviation={ex.fmt(dev)}")
    elif cmd == "dist":
        if not -1.0 <= args.rho <= 1.0:
            raise UsageError("--rho must lie in [-1, 1]")
        xs = np.asarray(args.x)
        if args.what == "quantile" and np.any((xs <= 0) | (xs >= 1)):
            raise UsageError("quantile levels must lie in (0, 1)")
        if args.what == "pdf" and np.any(xs <= 0):
            raise UsageError("the density is evaluated at z > 0 only")
        if args.what == "cdf" and np.any(xs < 0):
            raise UsageError("cdf arguments must be nonnegative")
        d = get_dist(args.rho)
        fn = {"pdf": d.pdf, "cdf": d.cdf, "quantile": d.quantile}[args.what]
        rows = [(x, fn(x)) for x in args.x]
        header = ["p" if args.what == "quantile" else "x", args.what]
        if args.out:
            ex.write_csv(args.out, header, rows)
        else:
            print(",".join(header))
            for x, v in rows:
                print(f"{ex.fmt(x)},{ex.fmt(v)}")


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _run(args)
    except UsageError as exc:
        print(f"rpl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any computational failure maps to exit 2
        print(f"rpl {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
