"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 numerical-contract violation.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .condprob import DEFAULT_GRID_POINTS, PhiGrid, check_normalization, table_for
from .errors import ModelContradictionError, NumericalContractError
from .fileio import default_output_dir, write_csv
from .state import StatePrep

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

STANDARD_PANELS = {  # panel -> (delta_J, delta_m) at J = 10
    "a": (0.0, 0.0), "b": (0.0, 1.0), "c": (0.0, 3.0),
    "d": (3.0, 0.0), "e": (3.0, 1.0), "f": (3.0, 3.0),
}


class UsageError(Exception):
    pass


def parse_values(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (stop included) or a single number."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"empty or backwards range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None


def parse_ints(text: str) -> list[int]:
    vals = parse_values(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"integers required, got {text!r}")
    return [int(v) for v in vals]


def _fmt_num(v: float) -> str:
    return f"{v:g}".replace("-", "m").replace(".", "p")


def _prep(args, field: str = "dm") -> StatePrep:
    try:
        return StatePrep(args.j, args.dj, getattr(args, field))
    except ValueError as exc:
        raise UsageError(f"--j/--dj/--{field.replace('_', '-')}: {exc}") from None


def _grid(args) -> PhiGrid:
    try:
        return PhiGrid(args.grid_points)
    except ValueError as exc:
        raise UsageError(f"--grid-points: {exc}") from None


def _theta(args) -> float:
    if not (math.isfinite(args.theta) and abs(args.theta) <= math.pi / 2):
        raise UsageError(f"--theta must lie in [-pi/2, pi/2], got {args.theta}")
    return args.theta


def _threads(args) -> int:
    if args.threads is None:
        return os.cpu_count() or 1
    if args.threads < 1:
        raise UsageError(f"--threads must be >= 1, got {args.threads}")
    return args.threads


def _outdir(args) -> Path:
    out = Path(args.out) if args.out else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report(paths):
    for p in paths:
        print(p)


def cmd_condprob(args) -> int:
    grid = _grid(args)
    if args.panels in ("standard", "paper"):
        jobs = [(f"condprob_panel{k}_J10_dJ{_fmt_num(dj)}_dm{_fmt_num(dm)}", StatePrep(10, dj, dm), k)
                for k, (dj, dm) in STANDARD_PANELS.items()]
    else:
        prep = _prep(args)
        jobs = [(f"condprob_J{prep.J_mean}_dJ{_fmt_num(prep.delta_J)}_dm{_fmt_num(prep.delta_m)}",
                 prep, None)]
    out = _outdir(args)
    written = []
    for stem, prep, panel in jobs:
        table = check_normalization(table_for(prep, grid))
        meta = {"panel": panel} if panel else {}
        written.append(table.to_csv(out / f"{stem}.csv", **meta))
        if args.plot:
            from .plotting import plot_condprob

            title = f"J={prep.J_mean}, dJ={prep.delta_J:g}, dm={prep.delta_m:g}"
            written.append(plot_condprob(table, out / f"{stem}.png", title))
    _report(written)
    return 0


def cmd_reconstruct(args) -> int:
    from .montecarlo import run_reconstruction

    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    if args.snapshot_every < 1:
        raise UsageError(f"--snapshot-every must be >= 1, got {args.snapshot_every}")
    prep_true = _prep(args)
    if args.dm_est is None:
        args.dm_est = args.dm
    prep_inf = _prep(args, "dm_est")
    grid, theta = _grid(args), _theta(args)
    check_normalization(table_for(prep_true, grid))
    check_normalization(table_for(prep_inf, grid))
    run = run_reconstruction(prep_true, prep_inf, theta, args.n, args.seed, grid,
                             snapshot_every=args.snapshot_every)
    out = _outdir(args)
    stem = (f"reconstruct_J{prep_true.J_mean}_dm{_fmt_num(prep_true.delta_m)}"
            f"_dmest{_fmt_num(prep_inf.delta_m)}_n{args.n}_seed{args.seed}")
    written = [run.to_json(out / f"{stem}.json")]
    if args.full_density:
        header = ["phi"] + [f"n={s}" for s in run.snapshot_steps]
        data = np.column_stack([grid.points] + [p.density for p in run.posteriors])
        meta = {"tool": "fockphase", "version": __version__, "kind": "posterior_densities",
                "seed": args.seed, "generator": "numpy.random.PCG64", "grid_points": grid.count,
                "theta": theta, **{f"true_{k}": v for k, v in prep_true.as_dict().items()},
                "inference_delta_m": prep_inf.delta_m}
        written.append(write_csv(out / f"{stem}_posteriors.csv", header, data, meta))
    if args.plot:
        from .plotting import plot_reconstruction

        written.append(plot_reconstruction(run, out / f"{stem}.png"))
    _report(written)
    return 0


def cmd_sweep(args) -> int:
    from .analysis import FitError, fit_alpha, universal_sweep, write_sweep_csv

    if not args.j or not args.dm:
        raise UsageError("--j and --dm need at least one value each")
    if any(J < 1 for J in args.j) or any(d < 0 for d in args.dm):
        raise UsageError("--j values must be >= 1 and --dm values >= 0")
    if args.n <= 0:
        raise UsageError(f"--n must be positive, got {args.n}")
    grid, theta, threads = _grid(args), _theta(args), _threads(args)
    for J in args.j:
        for dm in args.dm:
            check_normalization(table_for(StatePrep(J, 0.0, dm), grid))
    rows = universal_sweep(args.j, args.dm, grid, args.n, theta, threads=threads)
    out = _outdir(args)
    params = {"J_values": args.j, "delta_m_values": args.dm, "delta_J": 0.0, "n": args.n,
              "theta": theta, "grid_points": grid.count}
    written = [write_sweep_csv(out / "sweep.csv", rows, **params)]
    fit = None
    try:
        fit = fit_alpha(rows)
        written.append(fit.to_json(out / "sweep_fit.json", **params))
    except FitError as exc:
        print(f"warning: alpha fit skipped: {exc}", file=sys.stderr)
    if args.plot:
        from .plotting import plot_sweep

        written.append(plot_sweep(rows, out / "sweep.png", fit.alpha if fit else None))
    _report(written)
    return 0


def cmd_mismatch(args) -> int:
    from .analysis import modality_scan
    from .fileio import provenance, write_rows_csv

    if not args.dmest:
        raise UsageError("--dmest scan list is empty")
    if any(v < 0 for v in args.dmest):
        raise UsageError("--dmest values must be >= 0")
    truth = _prep(args)
    grid, theta, threads = _grid(args), _theta(args), _threads(args)
    check_normalization(table_for(truth, grid))
    for v in args.dmest:
        check_normalization(table_for(truth.with_delta_m(v), grid))
    rows = modality_scan(truth.J_mean, truth.delta_m, args.dmest, theta, grid,
                         threads=threads, n=args.n)
    best = min(range(len(rows)), key=lambda k: rows[k].resolution)
    out = _outdir(args)
    params = {"J_mean": truth.J_mean, "delta_J": truth.delta_J, "delta_m": truth.delta_m,
              "theta": theta, "n": args.n, "grid_points": grid.count}
    written = [write_rows_csv(
        out / "mismatch_summary.csv",
        ["delta_m_est", "n_modes", "peak_location", "std", "resolution", "optimal"],
        [(r.delta_m_est, r.n_modes, r.peak_location, r.std, r.resolution, k == best)
         for k, r in enumerate(rows)],
        provenance(kind="mismatch_summary", delta_m_est_values=args.dmest, **params))]
    for r in rows:
        written.append(r.likelihood.to_csv(out / f"mismatch_F_dmest{_fmt_num(r.delta_m_est)}.csv",
                                           kind="likelihood", delta_m_est=r.delta_m_est,
                                           **params))
    if args.plot:
        from .plotting import plot_mismatch

        written.append(plot_mismatch(rows, out / "mismatch.png", truth.delta_m))
    _report(written)
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all(threads=_threads(args), verbose=True)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_NUMERICAL if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockphase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    common.add_argument("--theta", type=float, default=0.0, help="true phase (rad)")
    common.add_argument("--out", default=None,
                        help="output directory (default $FOCKPHASE_OUTPUT_DIR or .)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--plot", action="store_true", help="also render PNG figures")

    def prep_flags(J=10, dm=0.0):
        # a fresh parent per subcommand: argparse shares action objects with parents
        prep = argparse.ArgumentParser(add_help=False)
        prep.add_argument("--j", type=int, default=J, help="mean total spin J = N/2")
        prep.add_argument("--dj", type=float, default=0.0, help="std. dev. of J")
        prep.add_argument("--dm", type=float, default=dm, help="std. dev. of the imbalance m")
        return prep

    p = sub.add_parser("condprob", parents=[common, prep_flags()], help="conditional probability table")
    p.add_argument("--panels", choices=["standard", "paper"], default=None,
                   help="emit the six J=10 panels (dJ in {0,3} x dm in {0,1,3})")
    p.set_defaults(func=cmd_condprob)

    p = sub.add_parser("reconstruct", parents=[common, prep_flags()], help="Monte Carlo reconstruction run")
    p.add_argument("--dm-est", "--dmest", dest="dm_est", type=float, default=None,
                   help="imbalance width assumed by the inference (default: --dm)")
    p.add_argument("--n", type=int, default=30, help="record length")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--snapshot-every", type=int, default=1)
    p.add_argument("--full-density", action="store_true", help="write every posterior density")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep", parents=[common], help="universal resolution curve and alpha fit")
    p.add_argument("--j", type=parse_ints, default=[10, 20, 40, 80])
    p.add_argument("--dm", type=parse_values, default=parse_values("0:3:0.25"))
    p.add_argument("--n", type=float, default=5.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mismatch", parents=[common, prep_flags(20, 2.0)], help="likelihood under a wrong dm estimate")
    p.add_argument("--dmest", type=parse_values, default=parse_values("0.5:4:0.25"))
    p.add_argument("--n", type=float, default=5.0, help="power used for the resolution column")
    p.set_defaults(func=cmd_mismatch)

    p = sub.add_parser("verify", help="run the acceptance checks and print a report")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (NumericalContractError, ModelContradictionError) as exc:
        print(f"fockphase: numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
