"""Exhaustive reference: try every one of the m! manipulator ballots."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .election import Ballot, Profile, TieBreak, stv_winner
from .solver import ManipulationQuery


class OracleBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_m: int = 8
    max_enumerations: int = 10**7

    def __post_init__(self):
        if self.max_m > 10:
            raise ValueError("the oracle is capped at 10 candidates")


def _elects(profile: Profile, chosen: int, policy: TieBreak) -> bool:
    result = stv_winner(profile, policy)
    if policy is TieBreak.LEXICOGRAPHIC:
        return result == chosen
    return chosen in result


def brute_force_manipulable(
    query: ManipulationQuery, budget: OracleBudget = OracleBudget()
) -> tuple[bool, Optional[Ballot]]:
    """Return the first ballot, in lexicographic order, that elects ``query.chosen``."""
    m = query.profile.m
    if m > budget.max_m:
        raise OracleBudgetError(f"m={m} exceeds the oracle budget of {budget.max_m} candidates")
    for count, ballot in enumerate(itertools.permutations(range(1, m + 1))):
        if count >= budget.max_enumerations:
            raise OracleBudgetError(f"more than {budget.max_enumerations} tallies needed")
        trial = query.profile.with_ballot(ballot, query.weight)
        if _elects(trial, query.chosen, query.policy):
            return True, ballot
    return False, None


def possible_winners_brute(
    profile: Profile,
    weight: int = 1,
    policy: TieBreak = TieBreak.LEXICOGRAPHIC,
    budget: OracleBudget = OracleBudget(),
) -> set[int]:
    return {
        c
        for c in range(1, profile.m + 1)
        if brute_force_manipulable(ManipulationQuery(profile, c, weight, policy), budget)[0]
    }
