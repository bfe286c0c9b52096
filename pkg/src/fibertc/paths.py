"""Parametric paths and the path algebra used by planner constructions.

A :class:`ParamPath` wraps a vectorised evaluator ``ts -> points`` with
``ts`` of shape ``(m,)`` and points of shape ``(m, d)``.  Paths are never
discretised; sampling only happens during verification or export.
"""
from __future__ import annotations

import numpy as np

from .errors import GlueError, ModeError, ParameterError, PathContractError
from .geometry.spaces import EPS_SPACE, Space, as_point

EPS_GLUE = 1e-9
MODES = ("path", "free-loop", "based-loop")

# Endpoint check at construction.  Verification re-measures endpoints
# independently, so switching this off only removes early failure.
CHECK_ENDPOINTS = True


class ParamPath:
    __slots__ = ("space", "func", "start", "end", "mode")

    def __init__(self, space: Space, func, start, end, mode: str = "path", check: bool | None = None):
        if mode not in MODES:
            raise ModeError(f"unknown path mode {mode!r}")
        self.space = space
        self.func = func
        self.start = as_point(start)
        self.end = as_point(end)
        self.mode = mode
        if mode != "path" and float(space.distance(self.start, self.end)) > EPS_SPACE:
            raise PathContractError(f"{mode} must start and end at the same point")
        if CHECK_ENDPOINTS if check is None else check:
            ends = func(np.array([0.0, 1.0]))
            gap = max(float(space.distance(ends[0], self.start)), float(space.distance(ends[1], self.end)))
            if gap > EPS_SPACE:
                raise PathContractError(f"evaluator misses its declared endpoints by {gap:.3g}")

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.func(np.array([float(t)]))[0]
        return self.func(np.asarray(t, dtype=float))

    def sample(self, n: int) -> np.ndarray:
        return self.func(np.linspace(0.0, 1.0, n))

    def with_mode(self, mode: str) -> "ParamPath":
        return ParamPath(self.space, self.func, self.start, self.end, mode, check=False)


def path_eval(p: ParamPath, t: float) -> np.ndarray:
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"path parameter {t} outside [0, 1]")
    return p(t)


def constant_path(space: Space, x) -> ParamPath:
    x = as_point(x)
    return ParamPath(space, lambda ts: np.broadcast_to(x, (len(ts), x.size)).copy(), x, x, check=False)


def reverse(p: ParamPath) -> ParamPath:
    f = p.func
    return ParamPath(p.space, lambda ts: f(1.0 - ts), p.end, p.start, p.mode, check=False)


def _glue(space, a, b, what):
    gap = float(space.distance(a, b))
    if gap > EPS_GLUE:
        raise GlueError(f"{what}: endpoints differ by {gap:.3g}", gap)


def concat_thirds(p1: ParamPath, p2: ParamPath, p3: ParamPath, mode: str = "path") -> ParamPath:
    """p1 on [0, 1/3], p2 on [1/3, 2/3], p3 on [2/3, 1]."""
    space = p1.space
    _glue(space, p1.end, p2.start, "first/second third")
    _glue(space, p2.end, p3.start, "second/third third")
    f1, f2, f3 = p1.func, p2.func, p3.func

    def func(ts):
        s = np.clip(3.0 * ts, 0.0, 3.0)
        out = np.empty((len(ts), space.ambient_dim))
        a = s <= 1.0
        c = s > 2.0
        b = ~(a | c)
        if a.any():
            out[a] = f1(s[a])
        if b.any():
            out[b] = f2(s[b] - 1.0)
        if c.any():
            out[c] = f3(s[c] - 2.0)
        return out

    return ParamPath(space, func, p1.start, p3.end, mode, check=False)


def concat_halves(p1: ParamPath, p2: ParamPath, mode: str = "path") -> ParamPath:
    """p1 on [0, 1/2] at parameter 2t, p2 on [1/2, 1] at parameter 2t - 1."""
    space = p1.space
    _glue(space, p1.end, p2.start, "halves")
    f1, f2 = p1.func, p2.func

    def func(ts):
        s = np.clip(2.0 * ts, 0.0, 2.0)
        out = np.empty((len(ts), space.ambient_dim))
        a = s <= 1.0
        if a.any():
            out[a] = f1(s[a])
        if (~a).any():
            out[~a] = f2(s[~a] - 1.0)
        return out

    return ParamPath(space, func, p1.start, p2.end, mode, check=False)


def geodesic(space: Space, x, y, orientation_hint=None) -> ParamPath:
    """Constant-speed minimizing path; antipodal sphere pairs need a tangent hint at x."""
    x = space.check(x)
    y = space.check(y)
    return ParamPath(space, space.geodesic_fn(x, y, orientation_hint), x, y)


def map_path(m, p: ParamPath) -> ParamPath:
    """Push a path forward along a map (``u^*`` in the transport constructions)."""
    f = p.func
    ev = m.evaluator
    return ParamPath(m.target, lambda ts: ev(f(ts)), ev(p.start), ev(p.end), p.mode)


def product_path(space: Space, paths) -> ParamPath:
    funcs = [q.func for q in paths]
    return ParamPath(space, lambda ts: np.concatenate([f(ts) for f in funcs], axis=-1),
                     np.concatenate([q.start for q in paths]), np.concatenate([q.end for q in paths]),
                     check=False)


def homotopy_path(h, point) -> ParamPath:
    """t -> H(point, t) for a homotopy spec ``h``."""
    point = as_point(point)
    ev = h.evaluator
    ends = ev(point, np.array([0.0, 1.0]))
    return ParamPath(h.space, lambda ts: ev(point, ts), ends[0], ends[1], check=False)


def ccw_tangent(x) -> np.ndarray:
    """Counterclockwise unit tangent of S^1 at x."""
    x = as_point(x)
    return np.array([-x[1], x[0]])
