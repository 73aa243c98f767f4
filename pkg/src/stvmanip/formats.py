"""Text formats for profiles and experiment result rows.

Profile files look like::

    # optional comments
    m 3
    2: 1 2 3
    1: 3 2 1

one ``<weight>: <ranking>`` line per weighted ballot. Results are CSV with
the fixed header :data:`RESULT_COLUMNS`.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, fields
from typing import Optional, TextIO, Union

from .election import Profile, WeightedBallot


class ProfileParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedHeaderError(ProfileParseError):
    pass


class MalformedLineError(ProfileParseError):
    pass


class DuplicateCandidateError(ProfileParseError):
    pass


class UnknownCandidateError(ProfileParseError):
    pass


class BadWeightError(ProfileParseError):
    pass


def parse_profile(text: str) -> Profile:
    m: Optional[int] = None
    ballots = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if m is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "m" or not parts[1].isdigit():
                raise MalformedHeaderError(lineno, f"expected 'm <int>', got {line!r}")
            m = int(parts[1])
            continue
        weight_text, sep, rest = line.partition(":")
        if not sep:
            raise MalformedLineError(lineno, f"expected '<weight>: <ids>', got {line!r}")
        try:
            weight = int(weight_text)
        except ValueError:
            raise BadWeightError(lineno, f"weight {weight_text.strip()!r} is not an integer") from None
        if weight < 1:
            raise BadWeightError(lineno, f"weight must be at least 1, got {weight}")
        try:
            ranking = [int(tok) for tok in rest.split()]
        except ValueError:
            raise MalformedLineError(lineno, f"non-integer candidate id in {rest.strip()!r}") from None
        seen = set()
        for c in ranking:
            if not 1 <= c <= m:
                raise UnknownCandidateError(lineno, f"candidate {c} outside 1..{m}")
            if c in seen:
                raise DuplicateCandidateError(lineno, f"candidate {c} ranked twice")
            seen.add(c)
        if len(ranking) != m:
            raise MalformedLineError(lineno, f"expected {m} candidates, got {len(ranking)}")
        ballots.append(WeightedBallot(tuple(ranking), weight))
    if m is None:
        raise MalformedHeaderError(1, "missing 'm <int>' header")
    return Profile(m, tuple(ballots))


def write_profile(profile: Profile) -> str:
    lines = [f"m {profile.m}"]
    lines += [f"{b.weight}: " + " ".join(map(str, b.ranking)) for b in profile.ballots]
    return "\n".join(lines) + "\n"


def read_profile_file(path: Union[str, os.PathLike]) -> Profile:
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read())


def write_profile_file(profile: Profile, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_profile(profile))


@dataclass(frozen=True)
class ResultRow:
    model: str
    m: int
    n: int
    w: int
    b: float
    trials: int
    tie_break: str
    branch_order: str
    p_manip: float
    mean_nodes: float
    median_nodes: float
    p90_nodes: float
    mean_time_ms: Optional[float]  # None when timing was not requested
    seed: int


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))
HEADER = ",".join(RESULT_COLUMNS)
_INT_COLUMNS = {"m", "n", "w", "trials", "seed"}
_STR_COLUMNS = {"model", "tie_break", "branch_order"}


def _fmt(name, value) -> str:
    if name in _STR_COLUMNS:
        return str(value)
    if name in _INT_COLUMNS:
        return str(int(value))
    if value is None:
        return ""
    return f"{float(value):.6g}"


def format_row(row: ResultRow) -> str:
    return ",".join(_fmt(name, getattr(row, name)) for name in RESULT_COLUMNS)


def parse_rows(text: str) -> list[ResultRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        vals = {}
        for name in RESULT_COLUMNS:
            v = rec[name]
            if name in _STR_COLUMNS:
                vals[name] = v
            elif name in _INT_COLUMNS:
                vals[name] = int(v)
            else:
                vals[name] = None if v == "" else float(v)
        rows.append(ResultRow(**vals))
    return rows


def normalize_row(row: ResultRow) -> ResultRow:
    """The row as it reads back from CSV (floats at 6 significant digits)."""
    return parse_rows(HEADER + "\n" + format_row(row) + "\n")[0]


def append_result_row(row: ResultRow, sink: Union[str, os.PathLike, TextIO]) -> None:
    """Append one CSV line, writing the header first if the file is empty."""
    line = format_row(row) + "\n"
    if hasattr(sink, "write"):
        if sink.tell() == 0:
            sink.write(HEADER + "\n")
        sink.write(line)
        return
    new = not os.path.exists(sink) or os.path.getsize(sink) == 0
    with open(sink, "a", encoding="utf-8", newline="\n") as fh:
        if new:
            fh.write(HEADER + "\n")
        fh.write(line)

