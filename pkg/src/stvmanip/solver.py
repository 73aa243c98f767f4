"""Deciding whether one manipulator (or a coalition voting in unison) can
make a chosen candidate win an STV election.

Both searches walk the same tree. A frame is the current election state of
the sincere ballots plus the manipulator's position: either FREE (its top
among the remaining candidates is not yet committed) or fixed on some
candidate, whose score then carries the manipulator's weight.

``manipulate_improved`` prunes every branch that eliminates the chosen
candidate, stops at the first success and, with the default right-first
ordering, skips the left branch once the right one succeeds.
``csl_possible_winners`` explores the whole tree and collects every
candidate that can be made to win.

Under optimistic tie-breaking the tree branches over every tied minimum,
and different elimination orders of tied candidates reach the same frame.
A frame is fully determined by the remaining set and the manipulator's
fixed top, so in that mode both searches skip frames they have already
expanded (a revisit still counts as a node).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional

from .election import (
    Ballot,
    ElectionState,
    Profile,
    TieBreak,
    initial_state,
    min_score_candidates,
    transfer,
)

FREE = 0


class BranchOrder(str, enum.Enum):
    RIGHT_FIRST = "right_first"
    LEFT_FIRST = "left_first"


@dataclass(frozen=True)
class ManipulationQuery:
    profile: Profile
    chosen: int
    weight: int = 1
    policy: TieBreak = TieBreak.LEXICOGRAPHIC

    def __post_init__(self):
        if not 1 <= self.chosen <= self.profile.m:
            raise ValueError(f"chosen candidate {self.chosen} outside 1..{self.profile.m}")
        if int(self.weight) != self.weight or self.weight < 1:
            raise ValueError(f"manipulator weight must be a positive integer, got {self.weight}")
        object.__setattr__(self, "policy", TieBreak(self.policy))


@dataclass
class SolveStats:
    nodes: int = 0
    elapsed: float = 0.0
    branch_order: BranchOrder = BranchOrder.RIGHT_FIRST


@dataclass
class SolveOutcome:
    manipulable: bool
    witness: Optional[Ballot]
    stats: SolveStats = field(default_factory=SolveStats)


def _children(state: ElectionState, fixed: int, weight: int, policy: TieBreak, order: BranchOrder):
    """Yield ``(eliminated, next_fixed)`` moves available from a frame.

    A move that fixes the manipulator's top on a new candidate is a "right"
    move; eliminating without a new commitment is a "left" move.
    """
    if fixed != FREE:
        # the elimination is forced (up to optimistic ties); the manipulator
        # is freed again when its own top goes
        for d in _mins(state, fixed, weight, policy):
            yield d, (FREE if d == fixed else fixed)
        return

    lows = min_score_candidates(state)
    if policy is TieBreak.LEXICOGRAPHIC:
        d = lows[0]
        e = min_score_candidates(state, d, weight)[0]
        if d == e:
            yield d, FREE
            return
        left = [(d, FREE)]
        right = [(e, d)]
    else:
        left = [(d, FREE) for d in lows]
        right = []
        if len(lows) == 1:
            d = lows[0]
            right = [(e, d) for e in min_score_candidates(state, d, weight) if e != d]
    if order is BranchOrder.RIGHT_FIRST:
        yield from right
        yield from left
    else:
        yield from left
        yield from right


def _mins(state, fixed, weight, policy):
    lows = min_score_candidates(state, fixed, weight)
    return lows[:1] if policy is TieBreak.LEXICOGRAPHIC else lows


def reconstruct_witness(fix_sequence, chosen: int, m: int) -> Ballot:
    """Turn the tops the search committed to into a full ballot.

    The fixed candidates come first in the order they were fixed, then the
    chosen candidate (unless it was itself fixed), then everyone else in
    ascending order.
    """
    head = list(fix_sequence)
    if len(set(head)) != len(head):
        raise ValueError(f"fix sequence {head} repeats a candidate")
    if chosen not in head:
        head.append(chosen)
    used = set(head)
    return tuple(head + [j for j in range(1, m + 1) if j not in used])


def manipulate_improved(
    query: ManipulationQuery, branch_order: BranchOrder = BranchOrder.RIGHT_FIRST
) -> SolveOutcome:
    order = BranchOrder(branch_order)
    c, w, policy = query.chosen, query.weight, query.policy
    stats = SolveStats(branch_order=order)
    path: list[int] = []
    found: list[Ballot] = []
    memo = set() if policy is TieBreak.OPTIMISTIC else None

    def search(state: ElectionState, fixed: int) -> bool:
        stats.nodes += 1
        if memo is not None:
            key = (state.remaining, fixed)
            if key in memo:
                return False  # expanded before without success
            memo.add(key)
        if len(state.remaining) == 1:
            if state.remaining[0] != c:
                return False
            found.append(reconstruct_witness(path, c, query.profile.m))
            return True
        if fixed != FREE:
            for d, nxt in _children(state, fixed, w, policy, order):
                if d != c and search(transfer(state, d), nxt):
                    return True
            return False
        for d, nxt in _children(state, fixed, w, policy, order):
            if d == c:
                continue
            if nxt != FREE:
                path.append(nxt)
                ok = search(transfer(state, d), nxt)
                path.pop()
            else:
                ok = search(transfer(state, d), nxt)
            if ok:
                return True
        return False

    start = time.perf_counter()
    state = initial_state(query.profile)
    ok = search(state, FREE)
    stats.elapsed = time.perf_counter() - start
    return SolveOutcome(ok, found[0] if ok else None, stats)


def csl_possible_winners(
    profile: Profile,
    weight: int = 1,
    policy: TieBreak = TieBreak.LEXICOGRAPHIC,
    branch_order: BranchOrder = BranchOrder.RIGHT_FIRST,
) -> tuple[set[int], SolveStats]:
    """Every candidate a manipulator of ``weight`` can make win, by full search."""
    order = BranchOrder(branch_order)
    policy = TieBreak(policy)
    stats = SolveStats(branch_order=order)
    winners: set[int] = set()
    memo = set() if policy is TieBreak.OPTIMISTIC else None

    def search(state: ElectionState, fixed: int) -> None:
        stats.nodes += 1
        if memo is not None:
            key = (state.remaining, fixed)
            if key in memo:
                return
            memo.add(key)
        if len(state.remaining) == 1:
            winners.add(state.remaining[0])
            return
        for d, nxt in _children(state, fixed, weight, policy, order):
            search(transfer(state, d), nxt)

    start = time.perf_counter()
    search(initial_state(profile), FREE)
    stats.elapsed = time.perf_counter() - start
    return winners, stats
