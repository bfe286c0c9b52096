"""Maps between spaces.

An evaluator maps arrays of shape ``(..., d_source)`` to ``(..., d_target)``.
Maps may also know their fibres: ``fiber_sample(z, rng)`` draws a point of
the preimage of ``z`` and ``fiber_nearest(z, hint)`` returns the point of the
preimage closest to ``hint``.  Both return ``None`` when the preimage is
empty or unknown; fibered domains then fall back to rejection sampling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .spaces import EPS_SPACE, Quotient, Space, as_point, get_space
from ..errors import ConfigurationError

TAGS = ("identity", "constant-at-basepoint", "quotient-projection", "composition", "custom")


@dataclass(frozen=True, eq=False)
class MapSpec:
    source: Space
    target: Space
    evaluator: Callable
    tag: str
    name: str
    base: Optional[np.ndarray] = None
    fiber_sampler: Optional[Callable] = None
    fiber_projector: Optional[Callable] = None
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ConfigurationError(f"unknown map tag {self.tag!r}")

    def __call__(self, p):
        return self.evaluator(np.asarray(p, dtype=float))

    def fiber_sample(self, z, rng):
        if self.fiber_sampler is None:
            return None
        return self.fiber_sampler(np.asarray(z, dtype=float), rng)

    def fiber_nearest(self, z, hint):
        if self.fiber_projector is None:
            return None
        return self.fiber_projector(np.asarray(z, dtype=float), np.asarray(hint, dtype=float))


def identity(space: Space) -> MapSpec:
    return MapSpec(space, space, lambda p: p, "identity", f"id_{space.name}",
                   fiber_sampler=lambda z, rng: z,
                   fiber_projector=lambda z, hint: z,
                   descriptor={"map": "identity", "space": space.name})


def constant(source: Space, target: Space, base) -> MapSpec:
    base = target.check(base)

    def on_base(z):
        return float(target.distance(z, base)) <= EPS_SPACE

    def evaluate(p):
        return np.broadcast_to(base, p.shape[:-1] + base.shape).copy()

    return MapSpec(source, target, evaluate, "constant-at-basepoint", f"cst_{base.tolist()}",
                   base=base,
                   fiber_sampler=lambda z, rng: source.sample(rng) if on_base(z) else None,
                   fiber_projector=lambda z, hint: hint if on_base(z) else None,
                   descriptor={"map": "constant", "space": source.name, "target": target.name,
                               "base": base.tolist()})


def quotient_projection(quotient: Quotient) -> MapSpec:
    if not isinstance(quotient, Quotient):
        raise ConfigurationError(f"{quotient.name} is not a quotient space")

    def fiber_sample(z, rng):
        orbit = quotient.orbit(z)
        return orbit[int(rng.integers(len(orbit)))]

    def fiber_nearest(z, hint):
        orbit = quotient.orbit(z)
        d = [float(quotient.total.distance(hint, q)) for q in orbit]
        return orbit[int(np.argmin(d))]

    return MapSpec(quotient.total, quotient, quotient.canonical, "quotient-projection",
                   f"p_{quotient.name}", fiber_sampler=fiber_sample, fiber_projector=fiber_nearest,
                   descriptor={"map": "projection", "quotient": quotient.name})


def compose(outer: MapSpec, inner: MapSpec) -> MapSpec:
    """``outer ∘ inner``."""
    if inner.target.name != outer.source.name:
        raise ConfigurationError(f"cannot compose {outer.name} after {inner.name}: "
                                 f"{inner.target.name} != {outer.source.name}")

    def fiber_sample(z, rng):
        w = outer.fiber_sample(z, rng)
        return None if w is None else inner.fiber_sample(w, rng)

    def fiber_nearest(z, hint):
        w = outer.fiber_nearest(z, inner(hint))
        return None if w is None else inner.fiber_nearest(w, hint)

    base = outer.base if outer.tag == "constant-at-basepoint" else None
    return MapSpec(inner.source, outer.target, lambda p: outer.evaluator(inner.evaluator(p)),
                   "composition", f"{outer.name}∘{inner.name}", base=base,
                   fiber_sampler=fiber_sample, fiber_projector=fiber_nearest,
                   descriptor={"map": "compose", "outer": outer.descriptor, "inner": inner.descriptor})


def custom(source: Space, target: Space, evaluator, name: str, fiber_sampler=None,
           fiber_projector=None, descriptor=None) -> MapSpec:
    return MapSpec(source, target, evaluator, "custom", name, fiber_sampler=fiber_sampler,
                   fiber_projector=fiber_projector,
                   descriptor=descriptor or {"map": "custom", "name": name})


def linear_isometry(space: Space, matrix, name: str, descriptor=None) -> MapSpec:
    """x -> M x for an orthogonal M preserving ``space``; fibres are single points."""
    m = np.asarray(matrix, dtype=float)
    inv = m.T
    return custom(space, space, lambda p: p @ m.T, name,
                  fiber_sampler=lambda z, rng: z @ inv.T,
                  fiber_projector=lambda z, hint: z @ inv.T,
                  descriptor=descriptor or {"map": "linear", "name": name, "matrix": m.tolist()})


def rotation_s1(angle: float) -> MapSpec:
    c, s = np.cos(angle), np.sin(angle)
    return linear_isometry(get_space("S1"), [[c, -s], [s, c]], f"rot({angle:g})",
                           descriptor={"map": "rotation", "angle": angle})


def swap_t2() -> MapSpec:
    m = np.zeros((4, 4))
    m[0, 2] = m[1, 3] = m[2, 0] = m[3, 1] = 1.0
    return linear_isometry(get_space("T2"), m, "swap", descriptor={"map": "swap"})


def cylinder_projection() -> MapSpec:
    """v : S^1 x [0,1] -> S^1, forgetting the height."""
    cyl, circle = get_space("cylinder"), get_space("S1")
    return custom(cyl, circle, lambda p: p[..., :2].copy(), "v_cyl",
                  fiber_sampler=lambda z, rng: np.concatenate([z, [rng.random()]]),
                  fiber_projector=lambda z, hint: np.concatenate([z, np.clip(hint[2:3], 0.0, 1.0)]),
                  descriptor={"map": "cylinder_projection"})


def cylinder_inclusion(height: float = 0.0) -> MapSpec:
    """u : S^1 -> S^1 x [0,1] at a fixed height."""
    cyl, circle = get_space("cylinder"), get_space("S1")

    def at_height(p):
        h = np.full(p.shape[:-1] + (1,), height)
        return np.concatenate([p, h], axis=-1)

    def preimage(z):
        return z[:2].copy() if abs(z[2] - height) <= EPS_SPACE else None

    return custom(circle, cyl, at_height, f"u_cyl({height:g})",
                  fiber_sampler=lambda z, rng: preimage(z),
                  fiber_projector=lambda z, hint: preimage(z),
                  descriptor={"map": "cylinder_inclusion", "height": height})


def map_from_descriptor(desc: dict) -> MapSpec:
    """Registry of named maps, as referenced by scenario files."""
    kind = desc.get("map")
    if kind == "identity":
        return identity(get_space(desc["space"]))
    if kind == "constant":
        source = get_space(desc["space"])
        target = get_space(desc.get("target", desc["space"]))
        return constant(source, target, as_point(desc["base"]))
    if kind == "projection":
        return quotient_projection(get_space(desc["quotient"]))
    if kind == "compose":
        return compose(map_from_descriptor(desc["outer"]), map_from_descriptor(desc["inner"]))
    if kind == "rotation":
        return rotation_s1(float(desc["angle"]))
    if kind == "swap":
        return swap_t2()
    if kind == "cylinder_projection":
        return cylinder_projection()
    if kind == "cylinder_inclusion":
        return cylinder_inclusion(float(desc.get("height", 0.0)))
    raise ConfigurationError(f"unknown map reference {desc!r}")
