import itertools

import pytest
from hypothesis import strategies as st

from stvmanip.election import Profile, WeightedBallot


def naive_irv(m, weighted_rankings, lexicographic=True):
    """Textbook STV by re-counting from scratch every round.

    Returns the winner (lexicographic) or the set of possible winners.
    """
    def rounds(remaining):
        if len(remaining) == 1:
            return {next(iter(remaining))}
        score = {c: 0 for c in remaining}
        for ranking, w in weighted_rankings:
            top = next(c for c in ranking if c in remaining)
            score[top] += w
        low = min(score.values())
        losers = sorted(c for c in remaining if score[c] == low)
        if lexicographic:
            losers = losers[:1]
        out = set()
        for d in losers:
            out |= rounds(remaining - {d})
        return out

    result = rounds(frozenset(range(1, m + 1)))
    return next(iter(result)) if lexicographic else result


def naive_manipulable(m, weighted_rankings, chosen, w, lexicographic=True):
    for ballot in itertools.permutations(range(1, m + 1)):
        res = naive_irv(m, list(weighted_rankings) + [(ballot, w)], lexicographic)
        if (res == chosen) if lexicographic else (chosen in res):
            return True
    return False


def as_pairs(profile):
    return [(b.ranking, b.weight) for b in profile.ballots]


@st.composite
def profiles(draw, max_m=6, max_ballots=10, max_weight=3, min_m=1):
    m = draw(st.integers(min_m, max_m))
    ballots = draw(
        st.lists(
            st.tuples(st.permutations(range(1, m + 1)), st.integers(1, max_weight)),
            max_size=max_ballots,
        )
    )
    return Profile(m, tuple(WeightedBallot(tuple(r), w) for r, w in ballots))


@pytest.fixture
def three_way():
    return Profile.from_rankings(3, [(1, 2, 3), (2, 3, 1), (3, 1, 2)])
