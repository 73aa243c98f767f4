"""Ballots, profiles and the single-winner STV tally.

Candidates are the integers ``1..m``. A ballot is a tuple holding a strict
total order over all of them, most preferred first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Ballot = tuple[int, ...]


class InvalidProfileError(ValueError):
    """Raised for malformed ballots or profiles."""


class TieBreak(str, enum.Enum):
    """How ties for the lowest score are resolved when eliminating."""

    LEXICOGRAPHIC = "lexicographic"  # smallest index is eliminated
    OPTIMISTIC = "optimistic"  # any tied candidate may go, in the manipulator's favour


def check_ballot(ranking: Sequence[int], m: int) -> Ballot:
    ranking = tuple(map(int, ranking))
    if len(ranking) != m or set(ranking) != set(range(1, m + 1)):
        raise InvalidProfileError(f"ballot {ranking} is not a permutation of 1..{m}")
    return ranking


@dataclass(frozen=True)
class WeightedBallot:
    ranking: Ballot
    weight: int = 1

    def __post_init__(self):
        if int(self.weight) != self.weight or self.weight < 1:
            raise InvalidProfileError(f"ballot weight must be a positive integer, got {self.weight}")


@dataclass(frozen=True)
class Profile:
    """A multiset of weighted ballots over ``m`` candidates."""

    m: int
    ballots: tuple[WeightedBallot, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.m < 0:
            raise InvalidProfileError(f"candidate count must be nonnegative, got {self.m}")
        ballots = tuple(
            b if isinstance(b, WeightedBallot) else WeightedBallot(*b) for b in self.ballots
        )
        for b in ballots:
            check_ballot(b.ranking, self.m)
        object.__setattr__(self, "ballots", ballots)

    @classmethod
    def from_rankings(cls, m: int, rankings: Iterable[Sequence[int]]) -> "Profile":
        return cls(m, tuple(WeightedBallot(tuple(r)) for r in rankings))

    @property
    def n(self) -> int:
        """Total ballot weight."""
        return sum(b.weight for b in self.ballots)

    def with_ballot(self, ranking: Sequence[int], weight: int = 1) -> "Profile":
        extra = WeightedBallot(check_ballot(ranking, self.m), weight)
        # existing ballots are already validated
        out = object.__new__(Profile)
        object.__setattr__(out, "m", self.m)
        object.__setattr__(out, "ballots", self.ballots + (extra,))
        return out

    def expanded(self) -> list[Ballot]:
        """One ranking per unit of weight."""
        return [b.ranking for b in self.ballots for _ in range(b.weight)]


class ElectionState:
    """Remaining candidates and their first-place scores during elimination.

    ``scores[j]`` is the weight of ballots whose highest-ranked remaining
    candidate is ``j`` (index 0 unused). ``tops[i]`` is the position in
    ballot ``i`` of its current top, and ``piles[j]`` lists the ballots
    currently sitting on ``j``, so a transfer touches only the eliminated
    candidate's ballots.
    """

    __slots__ = ("rankings", "weights", "remaining", "alive", "scores", "tops", "piles")

    def __init__(self, rankings, weights, remaining, alive, scores, tops, piles):
        self.rankings = rankings
        self.weights = weights
        self.remaining = remaining
        self.alive = alive
        self.scores = scores
        self.tops = tops
        self.piles = piles

    def score_map(self) -> dict[int, int]:
        return {j: self.scores[j] for j in self.remaining}

    def top(self, i: int) -> int:
        return self.rankings[i][self.tops[i]]

    def __repr__(self):
        return f"ElectionState(remaining={self.remaining}, scores={self.score_map()})"


def initial_state(profile: Profile) -> ElectionState:
    m = profile.m
    if m < 1:
        raise InvalidProfileError("an election needs at least one candidate")
    rankings = tuple(b.ranking for b in profile.ballots)
    weights = tuple(b.weight for b in profile.ballots)
    scores = [0] * (m + 1)
    piles: list[tuple[int, ...]] = [()] * (m + 1)
    by_top: dict[int, list[int]] = {}
    for i, r in enumerate(rankings):
        scores[r[0]] += weights[i]
        by_top.setdefault(r[0], []).append(i)
    for j, idx in by_top.items():
        piles[j] = tuple(idx)
    alive = bytearray([0]) + bytearray([1]) * m
    return ElectionState(
        rankings, weights, tuple(range(1, m + 1)), alive, scores, [0] * len(rankings), piles
    )


def transfer(state: ElectionState, d: int) -> ElectionState:
    """Eliminate ``d`` and move its ballots to their next remaining preference."""
    if not (0 < d < len(state.alive)) or not state.alive[d]:
        raise ValueError(f"candidate {d} is not in the remaining set {state.remaining}")
    if len(state.remaining) < 2:
        raise ValueError("cannot eliminate the last remaining candidate")
    alive = bytearray(state.alive)
    alive[d] = 0
    scores = list(state.scores)
    scores[d] = 0
    tops = list(state.tops)
    piles = list(state.piles)
    piles[d] = ()
    rankings, weights = state.rankings, state.weights
    moved: dict[int, list[int]] = {}
    for i in state.piles[d]:
        r = rankings[i]
        pos = tops[i] + 1
        while not alive[r[pos]]:
            pos += 1
        tops[i] = pos
        dest = r[pos]
        scores[dest] += weights[i]
        moved.setdefault(dest, []).append(i)
    for dest, idx in moved.items():
        piles[dest] = piles[dest] + tuple(idx)
    remaining = tuple(j for j in state.remaining if j != d)
    return ElectionState(rankings, weights, remaining, alive, scores, tops, piles)


def min_score_candidates(state: ElectionState, bonus_to: int = 0, bonus: int = 0) -> list[int]:
    """Candidates tied for the lowest score, ascending.

    ``bonus`` is added to the score of ``bonus_to`` first; this is how a
    manipulator's ballot is counted without storing it in the state.
    """
    scores = state.scores
    best = None
    out: list[int] = []
    for j in state.remaining:
        s = scores[j] + bonus if j == bonus_to else scores[j]
        if best is None or s < best:
            best = s
            out = [j]
        elif s == best:
            out.append(j)
    return out


def stv_winner(profile: Profile, policy: TieBreak = TieBreak.LEXICOGRAPHIC):
    """Run STV down to a single remaining candidate.

    Returns the winner under lexicographic tie-breaking, or the set of every
    candidate that wins under some resolution of elimination ties when
    ``policy`` is optimistic.
    """
    state = initial_state(profile)
    if TieBreak(policy) is TieBreak.LEXICOGRAPHIC:
        while len(state.remaining) > 1:
            state = transfer(state, min_score_candidates(state)[0])
        return state.remaining[0]

    # the state is determined by the remaining set, so memoise on it
    seen: set[tuple[int, ...]] = set()
    winners: set[int] = set()
    stack = [state]
    while stack:
        st = stack.pop()
        if len(st.remaining) == 1:
            winners.add(st.remaining[0])
            continue
        for d in min_score_candidates(st):
            key = tuple(j for j in st.remaining if j != d)
            if key not in seen:
                seen.add(key)
                stack.append(transfer(st, d))
    return winners


def majority_winner(profile: Profile) -> int:
    """Lexicographic STV that stops as soon as someone holds a strict majority."""
    state = initial_state(profile)
    total = profile.n
    while len(state.remaining) > 1:
        for j in state.remaining:
            if 2 * state.scores[j] > total:
                return j
        state = transfer(state, min_score_candidates(state)[0])
    return state.remaining[0]
