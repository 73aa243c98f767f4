"""Command line front end.

Exit codes: 0 success, 1 I/O error or failed check, 2 bad flags,
3 profile parse error, 4 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from dataclasses import replace

from . import votegen
from .election import InvalidProfileError, TieBreak
from .experiments import (
    ALGORITHMS,
    AXES,
    POWERS_OF_TWO,
    ModelParams,
    SweepError,
    SweepSpec,
    coalition_axis,
    describe_query,
    fit_exponential,
    parse_sweep_spec,
    run_agreement_check,
    run_sweep,
)
from .formats import (
    ProfileParseError,
    read_profile_file,
    write_profile,
    write_profile_file,
)
from .oracle import OracleBudget, OracleBudgetError, brute_force_manipulable
from .solver import BranchOrder, ManipulationQuery, csl_possible_winners, manipulate_improved

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_BUDGET = 4


class UsageError(Exception):
    pass


def _ints(text: str) -> tuple[int, ...]:
    if text == "powers_of_two":
        return POWERS_OF_TWO
    return tuple(int(t) for t in text.replace(",", " ").split())


def _load_profile(path):
    try:
        return read_profile_file(path)
    except (ProfileParseError, InvalidProfileError) as exc:
        raise ProfileParseError(getattr(exc, "line", 0), f"{path}: {exc}") from exc


def cmd_gen(args) -> int:
    if args.model in ("urn", "sp_urn") and args.b is None:
        raise UsageError(f"--b is required for --model {args.model}")
    if args.model == "dataset" and args.dataset is None:
        raise UsageError("--dataset is required for --model dataset")
    if args.m < 1 or args.n < 0:
        raise UsageError("--m must be at least 1 and --n nonnegative")
    if args.model == "ic":
        profile = votegen.gen_ic(args.m, args.n, args.seed)
    elif args.model == "urn":
        profile = votegen.gen_urn(args.m, args.n, args.b, args.seed)
    elif args.model == "sp_urn":
        axis = _ints(args.axis) if args.axis else None
        if axis is not None and sorted(axis) != list(range(1, args.m + 1)):
            raise UsageError("--axis must be a permutation of 1..m")
        profile = votegen.gen_single_peaked_urn(args.m, args.n, args.b, axis, args.seed)
    else:
        if args.n < 1:
            raise UsageError("--n must be positive for --model dataset")
        profile = votegen.sample_dataset(_load_profile(args.dataset), args.m, args.n, args.seed)
    if args.out:
        write_profile_file(profile, args.out)
        print(f"{args.out}: m={profile.m} n={profile.n} ballots={len(profile.ballots)} model={args.model}")
    else:
        sys.stdout.write(write_profile(profile))
    return 0


def cmd_solve(args) -> int:
    profile = _load_profile(args.profile)
    if not 1 <= args.chosen <= profile.m:
        raise UsageError(f"--chosen must be in 1..{profile.m}")
    if args.weight < 1:
        raise UsageError("--weight must be positive")
    policy = TieBreak(args.tie_break)
    order = BranchOrder(args.branch_order)
    query = ManipulationQuery(profile, args.chosen, args.weight, policy)
    if args.algorithm == "improved":
        out = manipulate_improved(query, order)
        ok, witness, nodes, elapsed = out.manipulable, out.witness, out.stats.nodes, out.stats.elapsed
        extra = ""
    elif args.algorithm == "csl":
        winners, stats = csl_possible_winners(profile, args.weight, policy, order)
        ok, witness, nodes, elapsed = args.chosen in winners, None, stats.nodes, stats.elapsed
        extra = f" winners={len(winners)}"
    else:
        start = time.perf_counter()
        ok, witness = brute_force_manipulable(query)
        nodes, elapsed = 0, time.perf_counter() - start
        extra = ""
    wit = ",".join(map(str, witness)) if witness else "none"
    print(
        f"manipulable={str(ok).lower()} nodes={nodes} time_ms={1000 * elapsed:.3f} witness={wit}{extra}"
    )
    return 0


def _spec_from_args(args) -> SweepSpec:
    dataset = _load_profile(args.dataset) if args.dataset else None
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            try:
                spec = parse_sweep_spec(fh.read(), dataset)
            except ValueError as exc:
                raise UsageError(f"{args.spec}: {exc}") from exc
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        return spec
    if args.model in ("urn", "sp_urn") and args.b is None:
        raise UsageError(f"--b is required for --model {args.model}")
    try:
        model = ModelParams(args.model, args.b or 0.0, None, dataset)
        axis = args.axis
        n = args.n if args.n is not None else 16
        if args.points:
            points = _ints(args.points)
        elif axis == "vary_coalition":
            points = tuple(coalition_axis(n))
        else:
            points = POWERS_OF_TWO
        return SweepSpec(
            model=model,
            axis=axis,
            m=args.m if args.m is not None else 4,
            n=n,
            w=args.w,
            points=points,
            trials=args.trials,
            algorithms=ALGORITHMS if args.algorithm == "both" else (args.algorithm,),
            tie_break=TieBreak(args.tie_break),
            branch_order=BranchOrder(args.branch_order),
            seed=args.seed if args.seed is not None else 0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_bench(args) -> int:
    spec = _spec_from_args(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if os.path.exists(args.out):
        os.remove(args.out)

    def progress(row):
        print(f"[{row.branch_order}] m={row.m} n={row.n} w={row.w} p_manip={row.p_manip:.3f} "
              f"mean_nodes={row.mean_nodes:.2f}", file=sys.stderr)

    try:
        run_sweep(spec, args.out, jobs=args.jobs, timing=args.timing, progress=progress)
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{args.out}: {len(spec.points) * len(spec.algorithms)} rows")
    return 0


def cmd_fit(args) -> int:
    filters = {}
    for item in args.filter or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--filter expects key=value, got {item!r}")
        filters[key] = value
    with open(args.csv, newline="", encoding="utf-8") as fh:
        records = list(csv.DictReader(fh))
    if records and not set(filters) <= set(records[0]):
        raise UsageError(f"unknown filter columns {sorted(set(filters) - set(records[0]))}")
    chosen = [r for r in records if all(r[k] == v for k, v in filters.items())]
    if len(chosen) < 3:
        raise UsageError(f"need at least 3 matching rows to fit, found {len(chosen)}")
    try:
        fit = fit_exponential((float(r[args.x]), float(r[args.y])) for r in chosen)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"a={fit.a:.6g} b={fit.b:.6g} r2={fit.r_squared:.6g}")
    return 0


def cmd_check(args) -> int:
    if args.m_max > OracleBudget().max_m or args.m_max < 2:
        raise UsageError(f"--m-max must be in 2..{OracleBudget().max_m}")
    if args.n_max < 1 or args.trials < 1:
        raise UsageError("--n-max and --trials must be positive")
    report = run_agreement_check(
        range(2, args.m_max + 1), range(1, args.n_max + 1), args.trials, args.seed, solver=args.solver
    )
    print(f"instances={report.instances} agreements={report.agreements} "
          f"disagreements={report.disagreements}")
    for query, problem in report.counterexamples:
        print(f"# counterexample: {problem}")
        sys.stdout.write(describe_query(query))
    return 0 if report.disagreements == 0 else EXIT_IO


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stvmanip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p, algorithms):
        p.add_argument("--algorithm", choices=algorithms, default="improved")
        p.add_argument("--tie-break", choices=[t.value for t in TieBreak], default="lexicographic")
        p.add_argument("--branch-order", choices=[b.value for b in BranchOrder], default="right_first")

    p = sub.add_parser("gen", help="generate a random profile")
    p.add_argument("--model", choices=["ic", "urn", "sp_urn", "dataset"], required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=float)
    p.add_argument("--axis", help="single-peaked axis, e.g. '3 1 2 4'")
    p.add_argument("--dataset", help="profile file to resample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="decide one manipulation instance")
    p.add_argument("profile")
    p.add_argument("--chosen", type=int, required=True)
    p.add_argument("--weight", type=int, default=1)
    solver_flags(p, ["improved", "csl", "oracle"])
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run an experiment sweep and write CSV")
    p.add_argument("--spec", help="key = value sweep spec file")
    p.add_argument("--model", choices=["ic", "urn", "sp_urn", "dataset"], default="ic")
    p.add_argument("--b", type=float)
    p.add_argument("--dataset")
    p.add_argument("--axis", choices=AXES, default="vary_n")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--points", help="comma separated, or 'powers_of_two'")
    p.add_argument("--trials", type=int, default=1000)
    solver_flags(p, ["improved", "csl", "both"])
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record mean_time_ms (not reproducible)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="fit nodes = a * b^m to CSV rows")
    p.add_argument("csv")
    p.add_argument("--filter", action="append", help="column=value, repeatable")
    p.add_argument("--x", default="m")
    p.add_argument("--y", default="mean_nodes")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check", help="cross-check solvers against the brute-force oracle")
    p.add_argument("--m-max", type=int, default=5)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check, solver=manipulate_improved)
    return parser


def main(argv=None, **overrides) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in overrides.items():
        setattr(args, key, value)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProfileParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OracleBudgetError as exc:
        print(f"oracle budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
