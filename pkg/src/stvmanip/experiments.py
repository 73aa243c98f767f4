"""Experiment grids: generate random elections, solve them, aggregate.

Every trial is a pure function of ``(master_seed, point_index, trial_index)``
so results do not depend on scheduling or on how many worker processes run
the trials.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import votegen
from .election import Profile, TieBreak, stv_winner
from .formats import ResultRow, append_result_row, write_profile
from .oracle import OracleBudget, brute_force_manipulable
from .solver import BranchOrder, ManipulationQuery, csl_possible_winners, manipulate_improved

MODELS = ("ic", "urn", "sp_urn", "dataset")
AXES = ("vary_n", "vary_m", "vary_coalition")
ALGORITHMS = ("improved", "csl")
POWERS_OF_TWO = (1, 2, 4, 8, 16, 32, 64, 128)


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelParams:
    name: str = "ic"
    b: float = 0.0
    axis: Optional[tuple[int, ...]] = None
    dataset: Optional[Profile] = None

    def __post_init__(self):
        if self.name not in MODELS:
            raise ValueError(f"unknown vote model {self.name!r}; expected one of {MODELS}")
        if self.name == "dataset" and self.dataset is None:
            raise ValueError("the dataset model needs a source profile")

    def generate(self, m: int, n: int, rng: np.random.Generator) -> Profile:
        if self.name == "ic":
            return votegen.gen_ic(m, n, rng)
        if self.name == "urn":
            return votegen.gen_urn(m, n, self.b, rng)
        if self.name == "sp_urn":
            axis = self.axis if self.axis is not None and len(self.axis) == m else None
            return votegen.gen_single_peaked_urn(m, n, self.b, axis, rng)
        if n == 0:
            return Profile(m)
        return votegen.sample_dataset(self.dataset, m, n, rng)


@dataclass(frozen=True)
class SolverOptions:
    algorithm: str = "improved"
    tie_break: TieBreak = TieBreak.LEXICOGRAPHIC
    branch_order: BranchOrder = BranchOrder.RIGHT_FIRST

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))
        object.__setattr__(self, "branch_order", BranchOrder(self.branch_order))

    @property
    def order_label(self) -> str:
        # CSL always explores both branches, so its rows carry "csl" in the
        # branch_order column instead of an ordering
        return "csl" if self.algorithm == "csl" else self.branch_order.value


@dataclass(frozen=True)
class TrialRecord:
    manipulable: bool
    nodes: int
    elapsed: float


@dataclass(frozen=True)
class StatSummary:
    trials: int
    p_manip: float
    mean_nodes: float
    median_nodes: float
    p90_nodes: float
    mean_time_ms: float

    @classmethod
    def from_records(cls, records: Sequence[TrialRecord]) -> "StatSummary":
        nodes = np.array([r.nodes for r in records], dtype=float)
        return cls(
            trials=len(records),
            p_manip=sum(r.manipulable for r in records) / len(records),
            mean_nodes=float(nodes.mean()),
            median_nodes=float(np.median(nodes)),
            p90_nodes=float(np.percentile(nodes, 90)),
            mean_time_ms=1000.0 * sum(r.elapsed for r in records) / len(records),
        )


def trial_instance(model: ModelParams, m: int, n: int, seed: int, point_index: int, trial_index: int):
    """The profile and chosen candidate for one trial."""
    profile = model.generate(m, n, votegen.make_rng(seed, point_index, trial_index, 0))
    chosen = int(votegen.make_rng(seed, point_index, trial_index, 1).integers(1, m + 1))
    return profile, chosen


def solve(profile: Profile, chosen: int, w: int, opts: SolverOptions) -> TrialRecord:
    if opts.algorithm == "csl":
        winners, stats = csl_possible_winners(profile, w, opts.tie_break, opts.branch_order)
        return TrialRecord(chosen in winners, stats.nodes, stats.elapsed)
    out = manipulate_improved(ManipulationQuery(profile, chosen, w, opts.tie_break), opts.branch_order)
    return TrialRecord(out.manipulable, out.stats.nodes, out.stats.elapsed)


def _run_trials(args) -> list[TrialRecord]:
    model, m, n, w, opts, seed, point_index, trial_indices = args
    return [
        solve(*trial_instance(model, m, n, seed, point_index, t), w, opts) for t in trial_indices
    ]


def run_point(
    model: ModelParams,
    m: int,
    n: int,
    w: int,
    opts: SolverOptions,
    trials: int,
    seed: int,
    point_index: int = 0,
    jobs: int = 1,
    executor=None,
) -> StatSummary:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if jobs <= 1 and executor is None:
        records = _run_trials((model, m, n, w, opts, seed, point_index, range(trials)))
    else:
        chunks = np.array_split(np.arange(trials), max(jobs, 1) * 4)
        tasks = [
            (model, m, n, w, opts, seed, point_index, [int(t) for t in c]) for c in chunks if len(c)
        ]
        if executor is None:
            with ProcessPoolExecutor(jobs) as pool:
                parts = list(pool.map(_run_trials, tasks))
        else:
            parts = list(executor.map(_run_trials, tasks))
        records = [r for part in parts for r in part]
    return StatSummary.from_records(records)


@dataclass(frozen=True)
class SweepSpec:
    model: ModelParams = field(default_factory=ModelParams)
    axis: str = "vary_n"
    m: int = 4
    n: int = 16
    w: int = 1
    points: tuple[int, ...] = POWERS_OF_TWO
    trials: int = 1000
    algorithms: tuple[str, ...] = ("improved",)
    tie_break: TieBreak = TieBreak.LEXICOGRAPHIC
    branch_order: BranchOrder = BranchOrder.RIGHT_FIRST
    seed: int = 0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        pts = tuple(int(p) for p in self.points)
        if not pts or any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError(f"points must be nonempty and strictly increasing, got {pts}")
        object.__setattr__(self, "points", pts)
        for a in self.algorithms:
            SolverOptions(a)

    def dims(self, point: int) -> tuple[int, int, int]:
        """``(m, n, w)`` at one sweep point."""
        if self.axis == "vary_n":
            return self.m, point, self.w
        if self.axis == "vary_m":
            return point, self.n, self.w
        return self.m, self.n, point


def run_sweep(
    spec: SweepSpec,
    sink=None,
    jobs: int = 1,
    timing: bool = False,
    progress: Optional[Callable[[ResultRow], None]] = None,
) -> list[ResultRow]:
    """Run every point of ``spec``; rows come out in point order.

    ``mean_time_ms`` is only filled in when ``timing`` is set, since wall
    clock is the one measurement that is not reproducible.
    """
    rows = []
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for index, point in enumerate(spec.points):
            m, n, w = spec.dims(point)
            for algorithm in spec.algorithms:
                opts = SolverOptions(algorithm, spec.tie_break, spec.branch_order)
                try:
                    summary = run_point(
                        spec.model, m, n, w, opts, spec.trials, spec.seed, index, jobs, pool
                    )
                except Exception as exc:
                    raise SweepError(f"sweep point {index} (m={m}, n={n}, w={w}, {algorithm}) failed: {exc}") from exc
                row = ResultRow(
                    model=spec.model.name,
                    m=m,
                    n=n,
                    w=w,
                    b=spec.model.b,
                    trials=summary.trials,
                    tie_break=opts.tie_break.value,
                    branch_order=opts.order_label,
                    p_manip=summary.p_manip,
                    mean_nodes=summary.mean_nodes,
                    median_nodes=summary.median_nodes,
                    p90_nodes=summary.p90_nodes,
                    mean_time_ms=summary.mean_time_ms if timing else None,
                    seed=spec.seed,
                )
                rows.append(row)
                if sink is not None:
                    append_result_row(row, sink)
                if progress is not None:
                    progress(row)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def coalition_axis(n: int) -> list[int]:
    """Coalition sizes with ``k / sqrt(n)`` near 1/4, 1/2, 1, 2 and 4.

    Sizes are capped at ``n``: a coalition is never larger than the electorate.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    root = math.sqrt(n)
    return sorted({min(n, max(1, round(r * root))) for r in (0.25, 0.5, 1.0, 2.0, 4.0)})


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    r_squared: float


def fit_exponential(points: Iterable[tuple[float, float]]) -> FitResult:
    """Least-squares fit of ``nodes = a * b**m`` in log space."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least three points to fit")
    if any(y <= 0 for _, y in pts):
        raise ValueError("mean node counts must be positive")
    x = np.array([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-24 else max(0.0, 1.0 - ss_res / ss_tot)
    return FitResult(a=math.exp(intercept), b=math.exp(slope), r_squared=r2)


def _parse_points(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text == "powers_of_two":
        return POWERS_OF_TWO
    return tuple(int(t) for t in text.replace(",", " ").split())


def parse_sweep_spec(text: str, dataset: Optional[Profile] = None) -> SweepSpec:
    """Read a ``key = value`` spec file.

    Keys: model, b, axis, m, n, w, points (space or comma separated, or
    ``powers_of_two``), trials, algorithm (improved, csl or both),
    tie_break, branch_order, seed, sp_axis. ``#`` starts a comment.
    """
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"spec line {lineno}: expected 'key = value'")
        kv[key.strip()] = value.strip()
    known = {"model", "b", "axis", "m", "n", "w", "points", "trials", "algorithm",
             "tie_break", "branch_order", "seed", "sp_axis"}
    unknown = set(kv) - known
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    model = ModelParams(
        kv.get("model", "ic"),
        float(kv.get("b", 0.0)),
        _parse_points(kv["sp_axis"]) if "sp_axis" in kv else None,
        dataset,
    )
    algorithm = kv.get("algorithm", "improved")
    spec = SweepSpec(
        model=model,
        axis=kv.get("axis", "vary_n"),
        m=int(kv.get("m", 4)),
        n=int(kv.get("n", 16)),
        w=int(kv.get("w", 1)),
        trials=int(kv.get("trials", 1000)),
        algorithms=ALGORITHMS if algorithm == "both" else (algorithm,),
        tie_break=TieBreak(kv.get("tie_break", "lexicographic")),
        branch_order=BranchOrder(kv.get("branch_order", "right_first")),
        seed=int(kv.get("seed", 0)),
    )
    if "points" in kv:
        spec = replace(spec, points=_parse_points(kv["points"]))
    elif spec.axis == "vary_coalition":
        spec = replace(spec, points=tuple(coalition_axis(spec.n)))
    return spec


@dataclass
class CheckReport:
    instances: int = 0
    agreements: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def disagreements(self) -> int:
        return self.instances - self.agreements


def check_instance(query: ManipulationQuery, solver=manipulate_improved, budget=OracleBudget()) -> Optional[str]:
    """Compare solver, CSL and oracle on one query; describe any mismatch."""
    outcome = solver(query)
    oracle, _ = brute_force_manipulable(query, budget)
    winners, _ = csl_possible_winners(query.profile, query.weight, query.policy)
    csl = query.chosen in winners
    if not outcome.manipulable == oracle == csl:
        return f"improved={outcome.manipulable} oracle={oracle} csl={csl}"
    if outcome.manipulable:
        result = stv_winner(query.profile.with_ballot(outcome.witness, query.weight), query.policy)
        elected = result == query.chosen if query.policy is TieBreak.LEXICOGRAPHIC else query.chosen in result
        if not elected:
            return f"witness {outcome.witness} does not elect {query.chosen}"
    return None


def run_agreement_check(
    m_values: Iterable[int] = range(2, 6),
    n_values: Iterable[int] = range(1, 9),
    trials: int = 200,
    seed: int = 0,
    weights: Sequence[int] = (1, 2),
    models: Sequence[ModelParams] = (ModelParams("ic"), ModelParams("urn", 1.0)),
    policies: Sequence[TieBreak] = tuple(TieBreak),
    solver=manipulate_improved,
    max_counterexamples: int = 5,
) -> CheckReport:
    report = CheckReport()
    config = 0
    for m in m_values:
        for n in n_values:
            for w in weights:
                for model in models:
                    for policy in policies:
                        for t in range(trials):
                            profile, chosen = trial_instance(model, m, n, seed, config, t)
                            query = ManipulationQuery(profile, chosen, w, policy)
                            problem = check_instance(query, solver)
                            report.instances += 1
                            if problem is None:
                                report.agreements += 1
                            elif len(report.counterexamples) < max_counterexamples:
                                report.counterexamples.append((query, problem))
                        config += 1
    return report


def describe_query(query: ManipulationQuery) -> str:
    return (
        f"# chosen={query.chosen} weight={query.weight} tie_break={query.policy.value}\n"
        + write_profile(query.profile)
    )

