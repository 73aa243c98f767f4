import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stvmanip.election import Profile, TieBreak, WeightedBallot, stv_winner
from stvmanip.solver import (
    BranchOrder,
    ManipulationQuery,
    csl_possible_winners,
    manipulate_improved,
    reconstruct_witness,
)
from stvmanip.votegen import gen_ic

from conftest import as_pairs, naive_manipulable, profiles

POLICIES = list(TieBreak)
ORDERS = list(BranchOrder)


def elects(profile, ballot, w, chosen, policy):
    res = stv_winner(profile.with_ballot(ballot, w), policy)
    return res == chosen if policy is TieBreak.LEXICOGRAPHIC else chosen in res


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("policy", POLICIES)
def test_lone_manipulator_is_dictator(m, policy):
    for c in range(1, m + 1):
        out = manipulate_improved(ManipulationQuery(Profile(m), c, 1, policy))
        assert out.manipulable
        assert elects(Profile(m), out.witness, 1, c, policy)


def test_two_candidate_swing():
    p = Profile.from_rankings(2, [(1, 2), (2, 1)])
    out = manipulate_improved(ManipulationQuery(p, 2))
    assert out.manipulable
    assert out.witness[0] == 2


def test_three_candidate_example_agrees_with_enumeration():
    p = Profile(3, (WeightedBallot((1, 2, 3), 3), WeightedBallot((2, 1, 3), 3), WeightedBallot((3, 1, 2), 1)))
    out = manipulate_improved(ManipulationQuery(p, 3))
    # one extra vote for 3 still leaves it last
    assert out.manipulable is naive_manipulable(3, as_pairs(p), 3, 1) is False
    assert out.witness is None


def test_stats_recorded():
    out = manipulate_improved(ManipulationQuery(gen_ic(6, 6, seed=1), 2), BranchOrder.LEFT_FIRST)
    assert out.stats.nodes >= 1
    assert out.stats.elapsed >= 0
    assert out.stats.branch_order is BranchOrder.LEFT_FIRST


def test_single_candidate_is_one_node():
    out = manipulate_improved(ManipulationQuery(Profile.from_rankings(1, [(1,)]), 1))
    assert out.manipulable and out.stats.nodes == 1


def test_query_validation():
    with pytest.raises(ValueError):
        ManipulationQuery(Profile(3), 4)
    with pytest.raises(ValueError):
        ManipulationQuery(Profile(3), 1, 0)


def test_csl_examples():
    assert csl_possible_winners(Profile(3))[0] == {1, 2, 3}
    two = Profile(2, (WeightedBallot((1, 2), 2),))
    assert csl_possible_winners(two, 1)[0] == {1}
    assert csl_possible_winners(two, 1, TieBreak.OPTIMISTIC)[0] == {1}
    assert csl_possible_winners(two, 2, TieBreak.OPTIMISTIC)[0] == {1, 2}


@pytest.mark.parametrize(
    "fixes, chosen, m, ballot",
    [([], 2, 3, (2, 1, 3)), ([3], 1, 3, (3, 1, 2)), ([2, 3], 4, 4, (2, 3, 4, 1)), ([1, 3], 3, 3, (1, 3, 2))],
)
def test_reconstruct_witness(fixes, chosen, m, ballot):
    assert reconstruct_witness(fixes, chosen, m) == ballot


def test_reconstruct_witness_rejects_duplicates():
    with pytest.raises(ValueError):
        reconstruct_witness([2, 2], 1, 3)


@settings(max_examples=400, deadline=None)
@given(profiles(max_m=5, max_ballots=7, max_weight=2), st.integers(1, 2), st.sampled_from(POLICIES),
       st.sampled_from(ORDERS), st.data())
def test_agrees_with_naive_enumeration(profile, w, policy, order, data):
    c = data.draw(st.integers(1, profile.m))
    lex = policy is TieBreak.LEXICOGRAPHIC
    out = manipulate_improved(ManipulationQuery(profile, c, w, policy), order)
    assert out.manipulable == naive_manipulable(profile.m, as_pairs(profile), c, w, lex)
    assert (out.witness is not None) == out.manipulable
    if out.manipulable:
        assert elects(profile, out.witness, w, c, policy)


@settings(max_examples=300, deadline=None)
@given(profiles(max_m=6, max_ballots=8, max_weight=2), st.integers(1, 3), st.sampled_from(POLICIES),
       st.sampled_from(ORDERS))
def test_csl_membership_and_node_dominance(profile, w, policy, order):
    winners, csl_stats = csl_possible_winners(profile, w, policy, order)
    for c in range(1, profile.m + 1):
        out = manipulate_improved(ManipulationQuery(profile, c, w, policy), order)
        assert out.manipulable == (c in winners)
        assert out.stats.nodes <= csl_stats.nodes


@given(profiles(max_m=6), st.sampled_from(POLICIES), st.sampled_from(ORDERS))
def test_node_count_deterministic(profile, policy, order):
    q = ManipulationQuery(profile, 1, 1, policy)
    a = manipulate_improved(q, order)
    b = manipulate_improved(q, order)
    assert (a.manipulable, a.witness, a.stats.nodes) == (b.manipulable, b.witness, b.stats.nodes)


def test_deep_recursion_is_safe():
    m = 256
    p = gen_ic(m, 4, seed=3)
    out = manipulate_improved(ManipulationQuery(p, 7))
    assert out.stats.nodes >= 1
    if out.manipulable:
        assert stv_winner(p.with_ballot(out.witness)) == 7
