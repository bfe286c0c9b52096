"""Configuration spaces: spheres, boxes, products and finite quotients.

Points are plain float arrays in the ambient chart of their space.  All
space methods that take points accept arrays with arbitrary leading axes,
so a whole path sample ``(m, d)`` can be measured in one call.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError, DomainError, AmbiguityError

EPS_SPACE = 1e-9

# Probabilities used when drawing a partner point relative to an anchor.
# Equal and antipodal partners are measure zero for uniform sampling but are
# exactly where planners switch pieces, so they are drawn on purpose.
_P_EQUAL = 0.25
_P_ANTIPODAL = 0.25


def norm(a):
    """Euclidean norm over the last axis (a lighter np.linalg.norm for hot loops)."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return math.sqrt(float(a @ a))
    return np.sqrt(np.sum(a * a, axis=-1))


def as_point(coords) -> np.ndarray:
    return np.asarray(coords, dtype=float)


class Space:
    kind = "abstract"

    def __init__(self, name: str, ambient_dim: int):
        self.name = name
        self.ambient_dim = ambient_dim

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    # -- membership -------------------------------------------------------
    def residual(self, pts) -> np.ndarray:
        raise NotImplementedError

    def contains(self, p, tol: float = EPS_SPACE) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape[-1:] != (self.ambient_dim,):
            return False
        r = self.residual(p)
        if p.ndim == 1:
            return float(r) <= tol
        return bool(np.all(r <= tol))

    def check(self, p, tol: float = EPS_SPACE) -> np.ndarray:
        p = as_point(p)
        if not self.contains(p, tol):
            raise DomainError(f"point {p.tolist()} is not in {self.name}")
        return p

    # -- metric -----------------------------------------------------------
    def distance(self, p, q):
        raise NotImplementedError

    # -- sampling ---------------------------------------------------------
    def sample(self, rng) -> np.ndarray:
        raise NotImplementedError

    def blocks(self) -> list:
        """``(slice, atomic_space)`` pairs covering the ambient coordinates."""
        return [(slice(0, self.ambient_dim), self)]

    def perturb(self, p, delta: float, rng) -> np.ndarray:
        raise NotImplementedError

    def sample_partner(self, x, rng) -> np.ndarray:
        """A point y drawn relative to x; equal / antipodal strata get mass."""
        raise NotImplementedError

    def relation(self, x, y, tol: float = EPS_SPACE):
        """'equal', 'antipodal' or None for an atomic space."""
        if norm(x - y) <= tol:
            return "equal"
        return None

    # -- geodesics --------------------------------------------------------
    def geodesic_fn(self, x, y, hint=None):
        raise NotImplementedError


class Sphere(Space):
    """Unit sphere S^n in R^(n+1) with the arc-length metric."""

    kind = "embedded"

    def __init__(self, n: int, name: str | None = None):
        super().__init__(name or f"S{n}", n + 1)
        self.n = n

    def residual(self, pts):
        return np.abs(norm(pts) - 1.0)

    def distance(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        # atan2 form stays accurate near 0 and pi, unlike arccos of the dot product
        if p.ndim == 1 and q.ndim == 1:
            return 2.0 * math.atan2(norm(p - q), norm(p + q))
        return 2.0 * np.arctan2(norm(p - q), norm(p + q))

    def sample(self, rng):
        v = rng.normal(size=self.ambient_dim)
        return v / norm(v)

    def perturb(self, p, delta, rng):
        g = rng.normal(size=self.ambient_dim)
        u = g - np.dot(g, p) * p
        u /= norm(u)
        q = np.cos(delta) * p + np.sin(delta) * u
        return q / norm(q)

    def sample_partner(self, x, rng):
        r = rng.random()
        if r < _P_EQUAL:
            return np.array(x, dtype=float)
        if r < _P_EQUAL + _P_ANTIPODAL:
            return -np.asarray(x, dtype=float)
        return self.sample(rng)

    def relation(self, x, y, tol=EPS_SPACE):
        if norm(x - y) <= tol:
            return "equal"
        if norm(x + y) <= tol:
            return "antipodal"
        return None

    def geodesic_fn(self, x, y, hint=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if norm(x + y) <= EPS_SPACE:
            if hint is None:
                raise AmbiguityError(
                    f"antipodal pair {x.tolist()} -> {y.tolist()} needs an orientation hint")
            v = np.asarray(hint, dtype=float)
            v = v - np.dot(v, x) * x
            nv = norm(v)
            if nv <= EPS_SPACE:
                raise AmbiguityError("orientation hint is not tangent to the sphere at the start point")
            v = v / nv

            def half_turn(ts):
                ts = ts[:, None]
                return np.cos(np.pi * ts) * x + np.sin(np.pi * ts) * v
            return half_turn

        theta = float(self.distance(x, y))
        if theta == 0.0:
            return lambda ts: np.broadcast_to(x, (len(ts), x.size)).copy()
        if theta < 1e-6:
            def nlerp(ts):
                ts = ts[:, None]
                w = (1.0 - ts) * x + ts * y
                return w / norm(w)[..., None]
            return nlerp
        s = np.sin(theta)

        def slerp(ts):
            ts = ts[:, None]
            return (np.sin((1.0 - ts) * theta) * x + np.sin(ts * theta) * y) / s
        return slerp

    def eigen_sample(self, m, rng):
        """Point of the sphere, drawn generically or from a +-1 eigenspace of m.

        ``m`` must be an orthogonal involution of the ambient space.  Proper
        eigenspaces are the loci where (x, m x) is an equal or antipodal pair.
        """
        choices = []
        eye = np.eye(self.ambient_dim)
        for sign in (1.0, -1.0):
            proj = 0.5 * (eye + sign * m)
            rank = int(round(np.trace(proj)))
            if 0 < rank < self.ambient_dim:
                choices.append(proj)
        r = rng.random()
        if choices and r < 0.5:
            proj = choices[int(r * 2 * len(choices))]
            while True:
                v = proj @ rng.normal(size=self.ambient_dim)
                nv = norm(v)
                if nv > 1e-6:
                    return v / nv
        return self.sample(rng)


class Box(Space):
    """Axis-aligned box with the Euclidean metric (a convex, contractible region)."""

    kind = "euclidean-region"

    def __init__(self, lo, hi, name: str | None = None):
        lo = as_point(lo)
        hi = as_point(hi)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ConfigurationError("box bounds must satisfy lo < hi componentwise")
        super().__init__(name or f"Box{lo.size}", lo.size)
        self.lo = lo
        self.hi = hi

    def residual(self, pts):
        pts = np.asarray(pts, dtype=float)
        out = np.maximum(self.lo - pts, 0.0) + np.maximum(pts - self.hi, 0.0)
        return np.max(out, axis=-1)

    def distance(self, p, q):
        return norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))

    def sample(self, rng):
        return self.lo + (self.hi - self.lo) * rng.random(self.ambient_dim)

    def perturb(self, p, delta, rng):
        u = rng.normal(size=self.ambient_dim)
        u /= norm(u)
        return np.clip(p + delta * u, self.lo, self.hi)

    def sample_partner(self, x, rng):
        if rng.random() < _P_EQUAL:
            return np.array(x, dtype=float)
        return self.sample(rng)

    def geodesic_fn(self, x, y, hint=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return lambda ts: (1.0 - ts[:, None]) * x + ts[:, None] * y

    def eigen_sample(self, m, rng):
        return self.sample(rng)


class Product(Space):
    """Finite product with the flat (root-sum-of-squares) product metric."""

    kind = "product"

    def __init__(self, *factors: Space, name: str | None = None):
        if len(factors) < 2:
            raise ConfigurationError("a product needs at least two factors")
        super().__init__(name or "*".join(f.name for f in factors), sum(f.ambient_dim for f in factors))
        self.factors = tuple(factors)
        self.slices = []
        start = 0
        for f in factors:
            self.slices.append(slice(start, start + f.ambient_dim))
            start += f.ambient_dim

    def split(self, p):
        p = np.asarray(p, dtype=float)
        return [p[..., s] for s in self.slices]

    def residual(self, pts):
        parts = self.split(pts)
        return np.max(np.stack([f.residual(q) for f, q in zip(self.factors, parts)], axis=-1), axis=-1)

    def distance(self, p, q):
        ps, qs = self.split(p), self.split(q)
        sq = sum(f.distance(a, b) ** 2 for f, a, b in zip(self.factors, ps, qs))
        return np.sqrt(sq)

    def sample(self, rng):
        return np.concatenate([f.sample(rng) for f in self.factors])

    def blocks(self):
        out = []
        for f, s in zip(self.factors, self.slices):
            for inner, a in f.blocks():
                out.append((slice(s.start + inner.start, s.start + inner.stop), a))
        return out

    def perturb(self, p, delta, rng):
        w = np.abs(rng.normal(size=len(self.factors)))
        w /= norm(w)
        return np.concatenate([f.perturb(q, delta * wi, rng)
                               for f, q, wi in zip(self.factors, self.split(p), w)])

    def sample_partner(self, x, rng):
        return np.concatenate([f.sample_partner(q, rng) for f, q in zip(self.factors, self.split(x))])

    def geodesic_fn(self, x, y, hint=None):
        hs = self.split(hint) if hint is not None else [None] * len(self.factors)
        fns = [f.geodesic_fn(a, b, h) for f, a, b, h in zip(self.factors, self.split(x), self.split(y), hs)]
        return lambda ts: np.concatenate([fn(ts) for fn in fns], axis=-1)

    def eigen_sample(self, m, rng):
        return np.concatenate([f.eigen_sample(m[s, s], rng) for f, s in zip(self.factors, self.slices)])


class Quotient(Space):
    """Quotient of ``total`` by a finite group of linear isometries.

    ``transforms`` lists every group element as an ambient matrix, identity
    first.  Points are represented by any orbit element; ``canonical`` picks
    the representative used by the quotient projection.
    """

    kind = "quotient"

    def __init__(self, total: Space, transforms, canonical, name: str):
        super().__init__(name, total.ambient_dim)
        self.total = total
        self.transforms = tuple(np.asarray(m, dtype=float) for m in transforms)
        if not np.array_equal(self.transforms[0], np.eye(total.ambient_dim)):
            raise ConfigurationError("first orbit transform must be the identity")
        self._canonical = canonical

    def orbit(self, p):
        p = np.asarray(p, dtype=float)
        return [p @ m.T for m in self.transforms]

    def residual(self, pts):
        return self.total.residual(pts)

    def distance(self, p, q):
        if np.ndim(p) == 1 and np.ndim(q) == 1:
            return min(float(self.total.distance(p, gq)) for gq in self.orbit(q))
        return np.min(np.stack([self.total.distance(p, gq) for gq in self.orbit(q)], axis=-1), axis=-1)

    def canonical(self, p):
        return self._canonical(np.asarray(p, dtype=float))

    def sample(self, rng):
        return self.total.sample(rng)

    def blocks(self):
        return self.total.blocks()

    def perturb(self, p, delta, rng):
        return self.total.perturb(p, delta, rng)

    def sample_partner(self, x, rng):
        return self.total.sample_partner(x, rng)

    def geodesic_fn(self, x, y, hint=None):
        orbit = self.orbit(y)
        k = int(np.argmin([float(self.total.distance(x, gy)) for gy in orbit]))
        return self.total.geodesic_fn(x, orbit[k], hint)


def _rp_canonical(p):
    if p.ndim == 1:
        for c in p:
            if abs(c) > 1e-9:
                return -p if c < 0 else p
        return p
    significant = np.abs(p) > 1e-9
    first = np.argmax(significant, axis=-1)
    lead = np.take_along_axis(p, first[..., None], axis=-1)
    return np.where(lead < 0, -p, p)


KLEIN_INVOLUTION = np.diag([1.0, -1.0, -1.0, -1.0])


def _klein_canonical(p):
    # omega-angle in [0, pi): sin > 0, or sin == 0 with cos > 0
    c, s = p[..., 2], p[..., 3]
    keep = (s > 0) | ((s == 0) & (c > 0))
    return np.where(keep[..., None], p, p @ KLEIN_INVOLUTION.T)


def space_distance(space: Space, p, q) -> float:
    p = space.check(p)
    q = space.check(q)
    return float(space.distance(p, q))


def quotient_project(total: Space, quotient: Space, p) -> np.ndarray:
    if not isinstance(quotient, Quotient) or quotient.total is not total:
        raise ConfigurationError(f"{quotient.name} is not a declared quotient of {total.name}")
    p = total.check(p)
    return quotient.canonical(p)


_BASE = {
    "S1": lambda: Sphere(1),
    "S2": lambda: Sphere(2),
    "S3": lambda: Sphere(3),
    "I": lambda: Box([0.0], [1.0], name="I"),
    "D2": lambda: Box([-1.0, -1.0], [1.0, 1.0], name="D2"),
    "T2": lambda: Product(get_space("S1"), get_space("S1"), name="T2"),
    "cylinder": lambda: Product(get_space("S1"), get_space("I"), name="cylinder"),
    "RP1": lambda: Quotient(get_space("S1"), [np.eye(2), -np.eye(2)], _rp_canonical, "RP1"),
    "RP2": lambda: Quotient(get_space("S2"), [np.eye(3), -np.eye(3)], _rp_canonical, "RP2"),
    "RP3": lambda: Quotient(get_space("S3"), [np.eye(4), -np.eye(4)], _rp_canonical, "RP3"),
    "K": lambda: Quotient(get_space("T2"), [np.eye(4), KLEIN_INVOLUTION], _klein_canonical, "K"),
}


@lru_cache(maxsize=None)
def get_space(name: str) -> Space:
    """Registry lookup; ``"A*B"`` builds the product of registered spaces."""
    if name in _BASE:
        return _BASE[name]()
    if "*" in name:
        return Product(*(get_space(part) for part in name.split("*")), name=name)
    raise ConfigurationError(f"unknown space {name!r}; known: {sorted(_BASE)}")


def space_names():
    return sorted(_BASE)


def product_space(a: Space, b: Space) -> Space:
    """Product of two spaces, reusing a registered name when one matches."""
    for name in ("T2", "cylinder"):
        reg = get_space(name)
        if tuple(f.name for f in reg.factors) == (a.name, b.name):
            return reg
    return get_space(f"{a.name}*{b.name}")
