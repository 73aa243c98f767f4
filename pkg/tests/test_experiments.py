import io
import math

import pytest

from stvmanip.election import Profile, TieBreak
from stvmanip.experiments import (
    ModelParams,
    SolverOptions,
    SweepError,
    SweepSpec,
    coalition_axis,
    fit_exponential,
    parse_sweep_spec,
    run_agreement_check,
    run_point,
    run_sweep,
    trial_instance,
)
from stvmanip.formats import parse_rows
from stvmanip.solver import SolveOutcome, SolveStats

IC = ModelParams("ic")


def test_single_candidate_always_manipulable():
    s = run_point(IC, 1, 7, 1, SolverOptions(), 50, seed=1)
    assert s.p_manip == 1.0
    assert s.mean_nodes == 1.0


@pytest.mark.parametrize("algorithm", ["improved", "csl"])
def test_no_voters_always_manipulable(algorithm):
    assert run_point(IC, 6, 0, 1, SolverOptions(algorithm), 50, seed=2).p_manip == 1.0


def test_summary_invariants():
    s = run_point(ModelParams("urn", 1.0), 6, 6, 1, SolverOptions(), 200, seed=3)
    assert s.trials == 200
    assert 0 <= s.p_manip <= 1
    assert s.median_nodes <= s.p90_nodes


def test_sixteen_by_sixteen_regime():
    imp = run_point(IC, 16, 16, 1, SolverOptions("improved"), 1000, seed=4)
    csl = run_point(IC, 16, 16, 1, SolverOptions("csl"), 1000, seed=4)
    # a small constant number of nodes, and cheaper than CSL
    assert 1 <= imp.mean_nodes < 100
    assert imp.mean_nodes < csl.mean_nodes
    assert imp.p_manip == csl.p_manip


def test_trials_are_pure_functions_of_indices():
    a = trial_instance(IC, 5, 5, 9, 3, 17)
    b = trial_instance(IC, 5, 5, 9, 3, 17)
    assert a == b
    assert trial_instance(IC, 5, 5, 9, 3, 18) != a


def test_run_point_parallel_matches_serial():
    serial = run_point(IC, 6, 6, 1, SolverOptions(), 40, seed=5, point_index=2)
    parallel = run_point(IC, 6, 6, 1, SolverOptions(), 40, seed=5, point_index=2, jobs=2)
    assert (serial.p_manip, serial.mean_nodes, serial.p90_nodes) == (
        parallel.p_manip, parallel.mean_nodes, parallel.p90_nodes)


@pytest.mark.parametrize("n, expected", [(16, [1, 2, 4, 8, 16]), (1, [1]), (100, [2, 5, 10, 20, 40])])
def test_coalition_axis(n, expected):
    assert coalition_axis(n) == expected


@pytest.mark.parametrize("n", range(1, 200))
def test_coalition_axis_increasing(n):
    ks = coalition_axis(n)
    assert ks[0] >= 1 and all(b > a for a, b in zip(ks, ks[1:]))


def test_fit_recovers_exact_model():
    fit = fit_exponential([(m, 2 * 1.01 ** m) for m in (4, 8, 16, 32, 64)])
    assert abs(fit.b - 1.01) < 1e-9
    assert abs(fit.a - 2) < 1e-9
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_constant_is_degenerate_but_defined():
    fit = fit_exponential([(m, 5.0) for m in (1, 2, 3, 4)])
    assert fit.b == pytest.approx(1.0)
    assert fit.r_squared == 1.0


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_exponential([(1, 1.0), (2, 2.0)])
    with pytest.raises(ValueError):
        fit_exponential([(1, 1.0), (2, 0.0), (3, 4.0)])


def test_fit_matches_closed_form_regression():
    pts = [(1, 3.0), (2, 5.0), (4, 6.0), (8, 30.0)]
    xs = [p[0] for p in pts]
    ys = [math.log(p[1]) for p in pts]
    xbar, ybar = sum(xs) / 4, sum(ys) / 4
    slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum((x - xbar) ** 2 for x in xs)
    intercept = ybar - slope * xbar
    ss_res = sum((y - intercept - slope * x) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - ybar) ** 2 for y in ys)
    fit = fit_exponential(pts)
    assert fit.b == pytest.approx(math.exp(slope))
    assert fit.r_squared == pytest.approx(1 - ss_res / ss_tot)


def small_spec(**kw):
    base = dict(model=IC, axis="vary_n", m=4, points=(1, 2, 4, 8), trials=30, seed=11)
    base.update(kw)
    return SweepSpec(**base)


def test_sweep_rows_and_csv():
    buf = io.StringIO()
    rows = run_sweep(small_spec(algorithms=("improved", "csl")), buf)
    assert len(rows) == 8
    assert [(r.n, r.branch_order) for r in rows[:2]] == [(1, "right_first"), (1, "csl")]
    assert all(r.mean_time_ms is None for r in rows)
    assert len(parse_rows(buf.getvalue())) == 8


def test_sweep_is_deterministic():
    a, b = io.StringIO(), io.StringIO()
    run_sweep(small_spec(), a)
    run_sweep(small_spec(), b, jobs=2)
    assert a.getvalue() == b.getvalue()


def test_sweep_timing_opt_in():
    rows = run_sweep(small_spec(points=(2,)), timing=True)
    assert rows[0].mean_time_ms is not None and rows[0].mean_time_ms >= 0


def test_sweep_axes():
    assert small_spec(axis="vary_m", n=3, points=(2, 3)).dims(3) == (3, 3, 1)
    assert small_spec(axis="vary_coalition", n=9).dims(4) == (4, 9, 4)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        small_spec(points=(4, 2))
    with pytest.raises(ValueError):
        small_spec(points=())
    with pytest.raises(ValueError):
        small_spec(axis="vary_x")
    with pytest.raises(ValueError):
        small_spec(trials=0)


def test_dataset_model_sweep():
    source = Profile.from_rankings(3, [(1, 2, 3), (3, 1, 2), (2, 3, 1)])
    spec = SweepSpec(model=ModelParams("dataset", dataset=source), axis="vary_m", n=5, points=(2, 6), trials=5)
    assert [r.m for r in run_sweep(spec)] == [2, 6]


def test_sweep_failure_names_point():
    with pytest.raises(SweepError, match="point 0"):
        run_sweep(SweepSpec(model=IC, axis="vary_m", n=2, points=(0, 1), trials=2))


def test_parse_sweep_spec():
    spec = parse_sweep_spec(
        "# figure: urn, vary m\nmodel = urn\nb = 1\naxis = vary_m\nn = 16\n"
        "points = 2, 4, 8\ntrials = 10\nalgorithm = both\ntie_break = optimistic\nseed = 3\n"
    )
    assert spec.model.name == "urn" and spec.model.b == 1.0
    assert spec.points == (2, 4, 8)
    assert spec.algorithms == ("improved", "csl")
    assert spec.tie_break is TieBreak.OPTIMISTIC
    assert parse_sweep_spec("axis = vary_coalition\nn = 16\n").points == (1, 2, 4, 8, 16)
    assert parse_sweep_spec("points = powers_of_two\n").points == (1, 2, 4, 8, 16, 32, 64, 128)
    with pytest.raises(ValueError):
        parse_sweep_spec("colour = red\n")
    with pytest.raises(ValueError):
        parse_sweep_spec("just words\n")


def test_agreement_check_passes():
    report = run_agreement_check(range(2, 4), range(1, 4), trials=10, seed=1)
    assert report.instances == 2 * 3 * 2 * 2 * 2 * 10
    assert report.disagreements == 0


def always_yes(query):
    return SolveOutcome(True, tuple(range(1, query.profile.m + 1)), SolveStats(nodes=1))


def test_agreement_check_catches_mutant():
    report = run_agreement_check(range(2, 4), range(1, 4), trials=10, seed=1, solver=always_yes)
    assert report.disagreements > 0
    assert report.counterexamples
