"""Planner domains: subsets A of X x X.

Three kinds are provided.  :class:`FullProduct` is all of X x X (the domain
of an ordinary motion planner), :class:`FiberedDomain` is the fibre product
``{(x, y) : f(x) = g(y)}`` of a pair of maps, and :class:`RegionDomain` is a
subset cut out by an arbitrary predicate.

Every domain can draw deterministic member samples and, for continuity
probing, nearby members ("partners") of a given member.
"""
from __future__ import annotations

import numpy as np

from .maps import MapSpec, identity, constant, quotient_projection
from .spaces import EPS_SPACE, Quotient, Space, as_point, norm
from ..errors import ConfigurationError, MembershipError, SamplingExhaustedError

FIBER_TOL = 1e-9
RETRY_BUDGET = 1000
_SQRT2 = np.sqrt(2.0)


def _split_delta(space, delta, rng):
    blocks = space.blocks()
    w = np.abs(rng.normal(size=len(blocks)))
    return blocks, delta * w / norm(w)


def _related_partner(space: Space, x, y, delta, rng, move_x=True):
    """Perturb (x, y) keeping each block's equal / antipodal relation intact."""
    blocks, deltas = _split_delta(space, delta / _SQRT2, rng)
    xp, yp = x.copy(), y.copy()
    for (s, atom), d in zip(blocks, deltas):
        xb = atom.perturb(x[s], d, rng) if move_x else x[s]
        rel = atom.relation(x[s], y[s])
        if rel == "equal":
            yb = xb
        elif rel == "antipodal":
            yb = -xb
        else:
            yb = atom.perturb(y[s], d, rng)
        xp[s], yp[s] = xb, yb
    return xp, yp


def _has_relation(space: Space, x, y) -> bool:
    return any(atom.relation(x[s], y[s]) is not None for s, atom in space.blocks())


class Domain:
    space: Space
    kind = "abstract"

    def contains(self, x, y) -> bool:
        raise NotImplementedError

    def residual(self, x, y) -> float:
        return 0.0 if self.contains(x, y) else float("inf")

    def sample_one(self, rng):
        raise NotImplementedError

    def sample(self, n: int, seed: int) -> list:
        if n < 1:
            raise ValueError("need at least one sample")
        rng = np.random.default_rng(seed)
        return [self.sample_one(rng) for _ in range(n)]

    def partners(self, x, y, delta: float, seed) -> list:
        """Nearby members of the domain; entries are ``None`` when unavailable.

        The list layout depends only on (x, y), and the random directions only
        on ``seed``, so calls with smaller ``delta`` refine the same probes.
        """
        raise NotImplementedError

    @property
    def descriptor(self) -> dict:
        raise NotImplementedError


class FullProduct(Domain):
    kind = "full"

    def __init__(self, space: Space):
        self.space = space

    def contains(self, x, y):
        return self.space.contains(x) and self.space.contains(y)

    def sample_one(self, rng):
        x = self.space.sample(rng)
        return x, self.space.sample_partner(x, rng)

    def partners(self, x, y, delta, seed):
        rng = np.random.default_rng(seed)
        free = (self.space.perturb(x, delta / _SQRT2, rng), self.space.perturb(y, delta / _SQRT2, rng))
        out = [free]
        if _has_relation(self.space, x, y):
            out.append(_related_partner(self.space, x, y, delta, np.random.default_rng(seed + [1])))
        return out

    @property
    def descriptor(self):
        return {"kind": "full", "space": self.space.name}


class FiberedDomain(Domain):
    """A = X x_Z X = (f x g)^{-1}(diagonal of Z)."""

    kind = "fibered"

    def __init__(self, f: MapSpec, g: MapSpec, fiber_tol: float = FIBER_TOL):
        if f.source.name != g.source.name or f.target.name != g.target.name:
            raise ConfigurationError("f and g must share source and target spaces")
        if fiber_tol < 0:
            raise ConfigurationError("fiber_tol must be non-negative")
        self.f, self.g = f, g
        self.fiber_tol = fiber_tol
        self.space = f.source
        self.target = f.target
        self._graph = (f.tag == g.tag == "quotient-projection" and f.target.name == g.target.name
                       and isinstance(f.target, Quotient))

    def residual(self, x, y):
        if self._graph:
            # the quotient metric is already an orbit minimum
            return float(self.target.distance(x, y))
        return float(self.target.distance(self.f(x), self.g(y)))

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if not (self.space.contains(x) and self.space.contains(y)):
            return False
        return self.residual(x, y) <= self.fiber_tol

    # -- sampling ---------------------------------------------------------
    def sample_one(self, rng):
        f, g, X = self.f, self.g, self.space
        if self._graph:
            # one component per group element: the graph of that element
            transforms = self.target.transforms
            m = transforms[int(rng.integers(len(transforms)))]
            x = X.eigen_sample(m, rng)
            return x, x @ m.T
        if g.tag == "constant-at-basepoint" or g.base is not None:
            x = f.fiber_sample(g.base, rng)
            if x is not None:
                return x, X.sample_partner(x, rng)
        elif f.tag == "constant-at-basepoint" or f.base is not None:
            y = g.fiber_sample(f.base, rng)
            if y is not None:
                return X.sample_partner(y, rng), y
        else:
            x = X.sample(rng)
            y = g.fiber_sample(f(x), rng)
            if y is not None and self.contains(x, y):
                return x, y
        return self._reject(rng)

    def _reject(self, rng):
        X = self.space
        for _ in range(RETRY_BUDGET):
            x = X.sample(rng)
            y = X.sample_partner(x, rng)
            if self.contains(x, y):
                return x, y
        raise SamplingExhaustedError(
            f"no member of {self.f.name} x_Z {self.g.name} found in {RETRY_BUDGET} draws")

    def partners(self, x, y, delta, seed):
        return [self._free_partner(x, y, delta, np.random.default_rng(seed)),
                self._stratum_partner(x, y, delta, np.random.default_rng(seed + [1]))]

    def _free_partner(self, x, y, delta, rng):
        f, g, X = self.f, self.g, self.space
        xh = X.perturb(x, delta / _SQRT2, rng)
        yh = X.perturb(y, delta / _SQRT2, rng)
        if g.base is not None:
            xp = f.fiber_nearest(g.base, xh)
            yp = yh
        elif f.base is not None:
            xp = xh
            yp = g.fiber_nearest(f.base, yh)
        else:
            xp = xh
            yp = g.fiber_nearest(f(xh), yh)
        if xp is None or yp is None:
            xp, yp = xh, yh
        return (xp, yp) if self.contains(xp, yp) else None

    def _eigen_projections(self, k):
        """Per block, the proper +-1 eigenprojections of the k-th orbit transform."""
        cache = self.__dict__.setdefault("_eigen_cache", {})
        if k not in cache:
            m = self.target.transforms[k]
            eye = np.eye(self.space.ambient_dim)
            out = []
            for s, atom in self.space.blocks():
                projs = [0.5 * (eye[s, s] + sign * m[s, s]) for sign in (1.0, -1.0)]
                out.append([q for q in projs if 0 < int(round(np.trace(q))) < atom.ambient_dim])
            cache[k] = out
        return cache[k]

    def _stratum_partner(self, x, y, delta, rng):
        X = self.space
        if self._graph:
            k = min(range(len(self.target.transforms)),
                    key=lambda i: float(X.distance(y, x @ self.target.transforms[i].T)))
            m = self.target.transforms[k]
            blocks, deltas = _split_delta(X, delta, rng)
            xp = x.copy()
            special = False
            for (s, atom), d, projs in zip(blocks, deltas, self._eigen_projections(k)):
                xb = atom.perturb(x[s], d, rng)
                for proj in projs:
                    if norm(proj @ x[s] - x[s]) <= EPS_SPACE:
                        xb = proj @ xb
                        xb /= norm(xb)
                        special = True
                xp[s] = xb
            if not special:
                return None
            yp = xp @ m.T
        else:
            if not _has_relation(X, x, y):
                return None
            move_x = self.g.base is None
            xp, yp = _related_partner(X, x, y, delta, rng, move_x=move_x)
        return (xp, yp) if self.contains(xp, yp) else None

    @property
    def descriptor(self):
        return {"kind": "fibered", "f": self.f.descriptor, "g": self.g.descriptor,
                "fiber_tol": self.fiber_tol}


class RegionDomain(Domain):
    """Subset of X x X given by a predicate, sampled by rejection unless a sampler is supplied."""

    kind = "region"

    def __init__(self, space: Space, predicate, name: str, sampler=None, descriptor=None):
        self.space = space
        self.predicate = predicate
        self.name = name
        self._sampler = sampler
        self._descriptor = descriptor or {"kind": "region", "name": name, "space": space.name}

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.space.contains(x) and self.space.contains(y) and bool(self.predicate(x, y))

    def sample_one(self, rng):
        X = self.space
        for _ in range(RETRY_BUDGET):
            if self._sampler is not None:
                x, y = self._sampler(rng)
            else:
                x = X.sample(rng)
                y = X.sample_partner(x, rng)
            if self.contains(x, y):
                return x, y
        raise SamplingExhaustedError(f"no member of region {self.name} found in {RETRY_BUDGET} draws")

    def partners(self, x, y, delta, seed):
        X = self.space
        rng = np.random.default_rng(seed)
        free = (X.perturb(x, delta / _SQRT2, rng), X.perturb(y, delta / _SQRT2, rng))
        out = [free if self.contains(*free) else None]
        # moving x alone keeps y on strata defined relative to a fixed point
        lone = (X.perturb(x, delta, np.random.default_rng(seed + [2])), y)
        out.append(lone if self.contains(*lone) else None)
        if _has_relation(X, x, y):
            rel = _related_partner(X, x, y, delta, np.random.default_rng(seed + [1]))
            out.append(rel if self.contains(*rel) else None)
        return out

    @property
    def descriptor(self):
        return dict(self._descriptor)


# -- constructors ------------------------------------------------------------

def diagonal_domain(space: Space) -> FiberedDomain:
    ident = identity(space)
    return FiberedDomain(ident, ident)


def based_domain(space: Space, base) -> FiberedDomain:
    """(Id, cst_x0): the domain {x0} x X."""
    return FiberedDomain(identity(space), constant(space, space, as_point(base)))


def quotient_domain(quotient: Quotient) -> FiberedDomain:
    p = quotient_projection(quotient)
    return FiberedDomain(p, p)


def band_domain(space: Space, radius: float) -> RegionDomain:
    """{(x, y) : d(x, y) < radius}."""
    return RegionDomain(space, lambda x, y: float(space.distance(x, y)) < radius, f"band({radius:g})",
                        descriptor={"kind": "band", "space": space.name, "radius": radius})


def base_neighborhood_domain(space: Space, base, radius: float) -> RegionDomain:
    """{(x, y) : d(x, x0) < radius}, with y drawn relative to x0 so +-x0 are hit."""
    base = space.check(base)

    def sampler(rng):
        x = space.sample(rng)
        return x, space.sample_partner(base, rng)

    return RegionDomain(space, lambda x, y: float(space.distance(x, base)) < radius,
                        f"nbhd({base.tolist()}, {radius:g})", sampler=sampler,
                        descriptor={"kind": "base_neighborhood", "space": space.name,
                                    "base": base.tolist(), "radius": radius})


def fibered_domain_membership(dom: Domain, x, y) -> bool:
    X = dom.space
    X.check(x)
    X.check(y)
    return dom.contains(x, y)


def sample_fibered_domain(dom: Domain, n: int, seed: int) -> list:
    return dom.sample(n, seed)


def require_member(dom: Domain, x, y):
    if not dom.contains(x, y):
        raise MembershipError(f"pair ({np.asarray(x).tolist()}, {np.asarray(y).tolist()}) "
                              f"is not in the domain {dom.descriptor}")
