"""Manipulation of single-winner STV elections: exact search, a brute-force
oracle, random vote models and an experiment harness."""

from .election import (
    Ballot,
    ElectionState,
    InvalidProfileError,
    Profile,
    TieBreak,
    WeightedBallot,
    initial_state,
    min_score_candidates,
    stv_winner,
    transfer,
)
from .oracle import OracleBudget, OracleBudgetError, brute_force_manipulable, possible_winners_brute
from .solver import (
    BranchOrder,
    ManipulationQuery,
    SolveOutcome,
    SolveStats,
    csl_possible_winners,
    manipulate_improved,
    reconstruct_witness,
)

__version__ = "0.1.0"
