"""Random profile generators.

Every generator takes ``seed``, which may be an int, a
``numpy.random.SeedSequence`` or a ``numpy.random.Generator``; the same seed
always gives the same profile. Use :func:`make_rng` to derive independent
streams from a master seed.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .election import Ballot, InvalidProfileError, Profile, WeightedBallot, check_ballot


def make_rng(seed, *stream) -> np.random.Generator:
    """Generator for the stream ``stream`` (a tuple of ints) under ``seed``."""
    if isinstance(seed, np.random.Generator):
        if stream:
            raise TypeError("cannot derive a stream from an existing Generator")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        if stream:
            seed = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + tuple(stream))
        return np.random.default_rng(seed)
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    )


def _profile(m: int, ballots) -> Profile:
    return Profile(m, tuple(WeightedBallot(b) for b in ballots))


def _uniform_ballot(rng: np.random.Generator, m: int) -> Ballot:
    return tuple(int(c) + 1 for c in rng.permutation(m))


def gen_ic(m: int, n: int, seed=0) -> Profile:
    """Impartial culture: ``n`` independent uniform rankings."""
    rng = make_rng(seed)
    return _profile(m, [_uniform_ballot(rng, m) for _ in range(n)])


def _urn(n: int, b: float, rng: np.random.Generator, fresh) -> list[Ballot]:
    # An urn holding every order once, with a = b*m! copies returned per draw:
    # after t draws it holds t*a copies of earlier draws out of m! + t*a balls.
    if b < 0:
        raise ValueError(f"urn correlation must be nonnegative, got {b}")
    drawn: list[Ballot] = []
    for t in range(n):
        if t and b > 0 and rng.random() < t * b / (1.0 + t * b):
            drawn.append(drawn[int(rng.integers(t))])
        else:
            drawn.append(fresh(rng))
    return drawn


def gen_urn(m: int, n: int, b: float, seed=0) -> Profile:
    """Polya-Eggenberger urn with normalised correlation ``b = a / m!``."""
    rng = make_rng(seed)
    return _profile(m, _urn(n, b, rng, lambda r: _uniform_ballot(r, m)))


def single_peaked_ballot(rng: np.random.Generator, axis: Sequence[int]) -> Ballot:
    m = len(axis)
    peak = int(rng.integers(m))
    lo = hi = peak
    out = [axis[peak]]
    while len(out) < m:
        if lo == 0:
            hi += 1
            out.append(axis[hi])
        elif hi == m - 1:
            lo -= 1
            out.append(axis[lo])
        elif rng.random() < 0.5:
            lo -= 1
            out.append(axis[lo])
        else:
            hi += 1
            out.append(axis[hi])
    return tuple(out)


def is_single_peaked(ranking: Sequence[int], axis: Sequence[int]) -> bool:
    """Each prefix of the ranking must be a contiguous stretch of the axis."""
    where = {c: i for i, c in enumerate(axis)}
    lo = hi = where[ranking[0]]
    for c in ranking[1:]:
        p = where[c]
        if p == lo - 1:
            lo = p
        elif p == hi + 1:
            hi = p
        else:
            return False
    return True


def gen_single_peaked_urn(
    m: int, n: int, b: float, axis: Optional[Sequence[int]] = None, seed=0
) -> Profile:
    """Urn model whose fresh draws are single-peaked with respect to ``axis``."""
    axis = check_ballot(axis if axis is not None else range(1, m + 1), m)
    rng = make_rng(seed)
    return _profile(m, _urn(n, b, rng, lambda r: single_peaked_ballot(r, axis)))


def sample_dataset(dataset: Profile, target_m: int, target_n: int, seed=0) -> Profile:
    """Resample a real election to ``target_n`` agents over ``target_m`` candidates.

    Fewer agents: a random subset of the voters. More: voters drawn with
    replacement. Fewer candidates: one random subset shared by all voters,
    relabelled ``1..target_m`` in index order. More candidates: clones
    ``j, j + m, j + 2m, ...`` of each original ``j`` are tied with it and every
    voter breaks those ties at random.
    """
    if target_m < 1 or target_n < 1:
        raise InvalidProfileError("target_m and target_n must be positive")
    voters = dataset.expanded()
    if not voters:
        raise InvalidProfileError("cannot sample from an empty dataset")
    rng = make_rng(seed)
    m = dataset.m

    if target_n <= len(voters):
        picked = [voters[i] for i in rng.permutation(len(voters))[:target_n]]
    else:
        picked = [voters[i] for i in rng.integers(len(voters), size=target_n)]

    if target_m <= m:
        keep = sorted(int(c) + 1 for c in rng.choice(m, size=target_m, replace=False))
        relabel = {c: i + 1 for i, c in enumerate(keep)}
        ballots = [tuple(relabel[c] for c in r if c in relabel) for r in picked]
    else:
        clones = {j: list(range(j, target_m + 1, m)) for j in range(1, m + 1)}
        ballots = []
        for r in picked:
            out: list[int] = []
            for c in r:
                group = clones[c]
                out.extend(group[i] for i in rng.permutation(len(group)))
            ballots.append(tuple(out))
    return _profile(target_m, ballots)
