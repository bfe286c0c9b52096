"""Deliberately broken planners.

Each one violates exactly one verified property, so the verification
harness can be shown to catch it.
"""
from __future__ import annotations

import numpy as np

from .core import Piece, Planner
from ..errors import UnsupportedError
from ..geometry.domains import FullProduct
from ..geometry.spaces import EPS_SPACE, norm, get_space
from ..paths import ParamPath, ccw_tangent, geodesic


def with_gap(pl: Planner) -> Planner:
    """Drop the last piece."""
    return pl.derive(pl.pieces[:-1], "corrupted(gap)")


def with_overlap(pl: Planner) -> Planner:
    """Duplicate the first piece, so its members lie in two pieces."""
    first = pl.pieces[0]
    dup = Piece(first.label + "(dup)", first.contains, first.section, first.subparts)
    return pl.derive(pl.pieces + (dup,), "corrupted(overlap)")


def with_broken_endpoint(pl: Planner) -> Planner:
    """Sections stop after their first two thirds and never reach y."""
    pieces = []
    for piece in pl.pieces:
        def section(x, y, piece=piece):
            s = piece.section(x, y)
            f = s.func
            return ParamPath(s.space, lambda ts: f(ts * (2.0 / 3.0)), s.start, s(2.0 / 3.0),
                             check=False)
        pieces.append(Piece(piece.label, piece.contains, section, piece.subparts))
    return pl.derive(pieces, "corrupted(broken-endpoint)")


def _rotate(p, angle):
    c, s = np.cos(angle)[:, None], np.sin(angle)[:, None]
    return np.concatenate([c * p[:, :1] - s * p[:, 1:], s * p[:, :1] + c * p[:, 1:]], axis=-1)


def with_perturbed_midpoint(pl: Planner, amount: float = 0.01) -> Planner:
    """Loops on S^1 rotated by amount * sin(pi t): the t = 1/2 point misses y by ``amount``."""
    if pl.space.name != "S1" or pl.mode == "path":
        raise UnsupportedError("midpoint corruption is defined for loop planners on S1")
    pieces = []
    for piece in pl.pieces:
        def section(x, y, piece=piece):
            s = piece.section(x, y)
            f = s.func
            return ParamPath(s.space, lambda ts: _rotate(f(ts), amount * np.sin(np.pi * ts)),
                             s.start, s.end, s.mode, check=False)
        pieces.append(Piece(piece.label, piece.contains, section, piece.subparts))
    return pl.derive(pieces, f"corrupted(midpoint {amount:g})")


def seam_planner() -> Planner:
    """One piece on S^1 x S^1: shorter arcs, with a fixed ccw half-turn on the antidiagonal.

    Every section has the right endpoints, but the section jumps across the
    antipodal seam.
    """
    s1 = get_space("S1")

    def section(x, y):
        if norm(x + y) <= EPS_SPACE:
            return geodesic(s1, x, y, ccw_tangent(x))
        return geodesic(s1, x, y)

    piece = Piece("shortest-everywhere", lambda x, y: True, section)
    return Planner(FullProduct(s1), (piece,), provenance=("corrupted(seam)",))
