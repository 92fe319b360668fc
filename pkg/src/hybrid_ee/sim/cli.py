"""Command line front end: ``solve``, ``sweep``, ``oracle-check`` and ``replay``.

Exit codes: 0 success, 2 configuration error, 3 infeasible single solve,
4 oracle-check violation.
"""

from __future__ import annotations

import argparse
import sys
import time
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..baselines import SchemeId
from ..channel import effective_gains, read_channel_dump, sample_channels, write_channel_dump
from ..duration import solve
from ..model import BeamformingMode, InfeasibleError, ThetaOverflowError
from ..oracle import brute_force_solve, verify_solution
from .config import SWEEPABLE, ConfigError, ExperimentConfig, load_config
from .output import emit_outputs, write_results_csv
from .sweep import ResultRow, SweepSpec, realization_for, run_sweep, solve_trial, summarize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_ORACLE = 4


def _modes(arg: Optional[str]):
    if arg is None:
        return None
    if arg == "both":
        return (BeamformingMode.COHERENT, BeamformingMode.NONCOHERENT)
    return (BeamformingMode(arg),)


def _schemes(arg: Optional[str]):
    if arg is None:
        return None
    if arg == "all":
        return tuple(SchemeId)
    return (SchemeId(arg),)


def _experiment(args) -> ExperimentConfig:
    exp = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if args.mode is not None:
        changes["modes"] = _modes(args.mode)
    if args.scheme is not None:
        changes["schemes"] = _schemes(args.scheme)
    return exp.replace(**changes) if changes else exp


def _describe(row: ResultRow) -> str:
    if not row.feasible:
        return f"{row.mode:<12} {row.scheme:<17} infeasible"
    powers = " ".join(f"{p:.4g}" for p in row.powers)
    return (
        f"{row.mode:<12} {row.scheme:<17} t*={row.t_star * 1e3:9.5f} ms  m*={row.m_star:3d}  "
        f"E={row.e_total:.6e} J  EE={row.ee:.6e} bit/J\n    powers (W): {powers}"
    )


def _solve_rows(exp: ExperimentConfig, real, trial: int) -> List[ResultRow]:
    rows = []
    for mode, scheme in product(exp.modes, exp.schemes):
        try:
            sol = solve_trial(exp, real, mode, scheme)
        except (InfeasibleError, ThetaOverflowError):
            rows.append(ResultRow.infeasible(mode, scheme, exp.rate_mbps, trial))
            continue
        rows.append(ResultRow.from_solution(sol, mode, scheme, exp.rate_mbps, trial))
    return rows


# -- subcommands -----------------------------------------------------------------


def cmd_solve(args) -> int:
    exp = _experiment(args)
    real = realization_for(exp, exp.seed, args.trial)
    if args.dump_channels:
        write_channel_dump(args.dump_channels, {args.trial: real})
    rows = _solve_rows(exp, real, args.trial)
    print(f"seed={exp.seed} trial={args.trial} M={exp.num_subarrays} K={exp.antennas_per_subarray} "
          f"rate={exp.rate / 1e6:g} Mbit/s")
    for row in rows:
        print(_describe(row))
    if args.csv:
        write_results_csv(args.csv, rows)
    return EXIT_OK if all(r.feasible for r in rows) else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    exp = _experiment(args)
    spec = SweepSpec.from_config(exp)
    start = time.perf_counter()
    rows = run_sweep(spec, exp, workers=args.workers)
    summaries = summarize(rows)
    formats = ("csv", "svg") if args.format == "both" else (args.format,)
    written = emit_outputs(rows, summaries, args.out, formats, x_label=SWEEPABLE[spec.swept_parameter][1])
    if args.dump_channels:
        first = exp.with_value(spec.swept_parameter, spec.values[0])
        write_channel_dump(args.dump_channels, {i: realization_for(first, spec.seed, i) for i in range(spec.trials)})
    for s in summaries:
        note = f"  ({s.excluded} infeasible excluded)" if s.excluded else ""
        print(f"{s.mode:<12} {s.scheme:<17} {spec.swept_parameter}={s.value:<10g} "
              f"EE={s.ee.mean:.5e} +/- {s.ee.half_width:.2e} bit/J  t*={s.t_star.mean * 1e3:.4f} ms  "
              f"m*={s.m_star.mean:.2f}{note}")
    print(f"{len(rows)} rows in {time.perf_counter() - start:.1f} s -> " + ", ".join(str(p) for p in written))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    exp = _experiment(args).replace(
        num_subarrays=args.subarrays, antennas_per_subarray=args.antennas, fixed_total_bits=0.0
    )
    if args.subarrays > 3:
        raise ConfigError("--subarrays", "the brute-force oracle handles at most 3 subarrays")
    rng = np.random.default_rng(exp.seed)
    rates = rng.uniform(args.rate_min, args.rate_max, size=args.instances)
    failures = 0
    for i, r in enumerate(rates):
        inst = exp.replace(rate_mbps=float(r))
        real = realization_for(inst, exp.seed, i)
        for mode in exp.modes:
            cfg = inst.system(mode)
            pa, circuit = inst.pa(), inst.circuit()
            eff = effective_gains(real, mode, pa)
            try:
                sol = solve(eff, pa, circuit, cfg)
            except InfeasibleError:
                try:
                    brute_force_solve(eff, pa, circuit, cfg, n_t=args.grid_t, n_p=args.grid_p)
                except InfeasibleError:
                    print(f"instance {i:3d} {mode.value:<12} r={r:6.2f} Mbit/s  infeasible for both: ok")
                    continue
                print(f"instance {i:3d} {mode.value:<12} solver infeasible but oracle found a point: VIOLATION")
                failures += 1
                continue
            ref = brute_force_solve(eff, pa, circuit, cfg, n_t=args.grid_t, n_p=args.grid_p)
            report = verify_solution(sol, eff, pa, circuit, cfg)
            ratio = sol.e_total / ref.e_total
            ok = ratio <= 1 + args.tolerance and report.passed
            failures += not ok
            print(f"instance {i:3d} {mode.value:<12} r={r:6.2f} Mbit/s  E_solver/E_oracle={ratio:.6f}  "
                  f"checks={'pass' if report.passed else ','.join(report.failed())}  {'ok' if ok else 'VIOLATION'}")
    print(f"{failures} violation(s) over {args.instances} instance(s)")
    return EXIT_ORACLE if failures else EXIT_OK


def cmd_replay(args) -> int:
    exp = _experiment(args)
    try:
        realizations = read_channel_dump(args.channels)
    except (OSError, ValueError) as exc:
        raise ConfigError("channels", str(exc)) from None
    rows = []
    for trial in sorted(realizations):
        real = realizations[trial]
        M, K = real.shape
        inst = exp.replace(num_subarrays=M, antennas_per_subarray=K)
        trial_rows = _solve_rows(inst, real, trial)
        print(f"trial {trial} (M={M}, K={K})")
        for row in trial_rows:
            print(_describe(row))
        rows.extend(trial_rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_results_csv(out / "results.csv", rows)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, trials: bool = False) -> None:
    p.add_argument("--config", type=Path, help="flat key=value file overriding the packaged defaults")
    p.add_argument("--seed", type=int, help="unsigned 64-bit master seed")
    if trials:
        p.add_argument("--trials", type=int, help="channel realizations per sweep point")
    p.add_argument("--mode", choices=("coherent", "noncoherent", "both"))
    p.add_argument("--scheme", choices=[s.value for s in SchemeId] + ["all"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-ee", description="Energy-efficient bursty transmission for hybrid arrays."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one channel realization")
    _common(p)
    p.add_argument("--trial", type=int, default=0, help="realization index under the seed")
    p.add_argument("--csv", type=Path, help="also write the rows to this CSV file")
    p.add_argument("--dump-channels", type=Path, help="write the realization as a channel-dump CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over one parameter")
    _common(p, trials=True)
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output is identical for any count)")
    p.add_argument("--dump-channels", type=Path, help="write the realizations at the first sweep value")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="compare the solver with the brute-force oracle on small instances")
    _common(p)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--subarrays", type=int, default=2)
    p.add_argument("--antennas", type=int, default=4)
    p.add_argument("--rate-min", type=float, default=10.0, help="Mbit/s")
    p.add_argument("--rate-max", type=float, default=80.0, help="Mbit/s")
    p.add_argument("--tolerance", type=float, default=5e-3, help="allowed relative excess over the oracle")
    p.add_argument("--grid-t", type=int, default=2000)
    p.add_argument("--grid-p", type=int, default=400)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("replay", help="solve the realizations stored in a channel-dump CSV")
    _common(p)
    p.add_argument("channels", type=Path, help="channel dump (trial, m, k, re, im)")
    p.add_argument("--out", type=Path, help="directory for results.csv")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
