"""Partition-based planners, homotopies and LS-category witnesses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import CoverageGapError, InvalidHomotopyError, ModeError, PartitionViolationError
from ..geometry.domains import Domain
from ..geometry.spaces import EPS_SPACE, Space, as_point
from ..paths import MODES, ParamPath

WHOLE = (("whole", lambda x, y: True),)


@dataclass(frozen=True, eq=False)
class Piece:
    """One continuity domain U_i together with its section s_i.

    ``subparts`` partition the piece into mutually separated parts.  The
    continuity probe only compares pairs lying in the same subpart.
    """

    label: str
    contains: Callable
    section: Callable
    subparts: tuple = WHOLE

    def subpart_of(self, x, y) -> int:
        for k, (_, pred) in enumerate(self.subparts):
            if pred(x, y):
                return k
        return -1

    def subpart_hits(self, x, y) -> int:
        return sum(1 for _, pred in self.subparts if pred(x, y))


@dataclass(frozen=True, eq=False)
class Planner:
    domain: Domain
    pieces: tuple
    mode: str = "path"
    provenance: tuple = ("builtin",)
    base: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModeError(f"unknown planner mode {self.mode!r}")
        if self.mode == "based-loop" and self.base is None:
            raise ModeError("a based-loop planner needs a base point")
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @property
    def space(self) -> Space:
        return self.domain.space

    @property
    def count(self) -> int:
        return len(self.pieces)

    def locate(self, x, y) -> list:
        return [i for i, piece in enumerate(self.pieces) if piece.contains(x, y)]

    def derive(self, pieces, step: str, domain=None, mode=None, base=None) -> "Planner":
        return Planner(domain if domain is not None else self.domain, tuple(pieces),
                       mode or self.mode, self.provenance + (step,),
                       base if base is not None else self.base)

    def describe(self) -> dict:
        return {"count": self.count, "mode": self.mode, "provenance": list(self.provenance),
                "pieces": [p.label for p in self.pieces], "domain": self.domain.descriptor,
                "space": self.space.name}


def evaluate_planner(pl: Planner, x, y):
    """Section of the unique piece containing (x, y): (path, piece, subpart)."""
    x = as_point(x)
    y = as_point(y)
    hits = pl.locate(x, y)
    if not hits:
        raise CoverageGapError(f"pair ({x.tolist()}, {y.tolist()}) lies in no piece", (x, y))
    if len(hits) > 1:
        raise PartitionViolationError(
            f"pair ({x.tolist()}, {y.tolist()}) lies in pieces {hits}", (x, y), hits)
    piece = pl.pieces[hits[0]]
    return piece.section(x, y), hits[0], piece.subpart_of(x, y)


@dataclass(frozen=True, eq=False)
class HomotopySpec:
    """H : space x [0,1] -> target, vectorised in t: ``evaluator(p, ts) -> (m, d)``.

    ``start_map`` / ``end_map`` are the declared maps at t = 0 and t = 1
    (callables on points); ``start_tag`` / ``end_tag`` name them.
    """

    space: Space
    evaluator: Callable
    start_map: Callable
    end_map: Callable
    start_tag: str = ""
    end_tag: str = ""
    target: Optional[Space] = None

    def __post_init__(self):
        if self.target is None:
            object.__setattr__(self, "target", self.space)

    def __call__(self, p, t):
        return self.evaluator(as_point(p), np.atleast_1d(np.asarray(t, dtype=float)))

    def endpoint_gap(self, points) -> float:
        worst = 0.0
        for p in points:
            ends = self.evaluator(p, np.array([0.0, 1.0]))
            worst = max(worst,
                        float(self.target.distance(ends[0], self.start_map(p))),
                        float(self.target.distance(ends[1], self.end_map(p))))
        return worst

    def verify(self, points, tol: float = EPS_SPACE, what: str = "homotopy"):
        gap = self.endpoint_gap(points)
        if gap > tol:
            raise InvalidHomotopyError(
                f"{what} does not match its declared ends {self.start_tag!r} -> {self.end_tag!r} "
                f"(gap {gap:.3g})")


@dataclass(frozen=True, eq=False)
class CatEntry:
    label: str
    contains: Callable
    homotopy: HomotopySpec
    subpart_of: Callable = field(default=lambda y: 0)
    n_subparts: int = 1


@dataclass(frozen=True, eq=False)
class CatWitness:
    """Cover of X by sets V_i, each contracted to the base point by h_i.

    h_i(y, 0) = x0 and h_i(y, 1) = y.  The entry count bounds cat(X) from
    above (covers counted from 1).
    """

    space: Space
    base: np.ndarray
    entries: tuple

    @property
    def count(self) -> int:
        return len(self.entries)

    def locate(self, y) -> list:
        return [i for i, e in enumerate(self.entries) if e.contains(y)]
