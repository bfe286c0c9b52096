"""Planner transformations.

Each construction keeps the partition discipline of its input and changes
the piece count only where noted (restriction and combination may drop
pieces that no sampled member reaches).
"""
from __future__ import annotations

import numpy as np

from .core import CatEntry, CatWitness, HomotopySpec, Piece, Planner
from ..errors import (ConfigurationError, CoverError, DominationError, InvalidHomotopyError,
                      ModeError, NotAnIsomorphismError, PreconditionError)
from ..geometry.domains import (Domain, FiberedDomain, FullProduct, RegionDomain, based_domain)
from ..geometry.maps import MapSpec, compose
from ..geometry.spaces import EPS_SPACE, as_point, norm
from ..paths import (ParamPath, concat_halves, concat_thirds, homotopy_path, map_path, reverse)

N_PROBE = 2048


def _space_samples(space, n, seed):
    rng = np.random.default_rng(seed)
    return [space.sample(rng) for _ in range(n)]


def _pull_subparts(piece, pull):
    return tuple((label, (lambda x, y, pred=pred: pred(*pull(x, y)))) for label, pred in piece.subparts)


# -- restriction ----------------------------------------------------------------

def restrict_planner(pl: Planner, dom: Domain, n_probe: int = N_PROBE, seed: int = 0) -> Planner:
    """Intersect every piece with ``dom``; pieces no sampled member reaches are dropped."""
    if dom.space.name != pl.space.name:
        raise PreconditionError(f"domain lives on {dom.space.name}, planner on {pl.space.name}")
    samples = dom.sample(n_probe, seed)
    for x, y in samples:
        if not pl.domain.contains(x, y):
            raise PreconditionError(
                f"restriction target is not inside the planner domain: ({x.tolist()}, {y.tolist()})")
    hits = [0] * pl.count
    for x, y in samples:
        for i, piece in enumerate(pl.pieces):
            if piece.contains(x, y):
                hits[i] += 1
    pieces = []
    for piece, n in zip(pl.pieces, hits):
        if n == 0:
            continue
        pieces.append(Piece(piece.label,
                            lambda x, y, piece=piece: dom.contains(x, y) and piece.contains(x, y),
                            piece.section, piece.subparts))
    return pl.derive(pieces, "restricted", domain=dom)


# -- transport along a bundle isomorphism ---------------------------------------

def _check_inverse(phi: MapSpec, phi_inv: MapSpec, n: int, seed: int):
    worst = 0.0
    for p in _space_samples(phi.source, n, seed):
        worst = max(worst, float(phi.source.distance(phi_inv(phi(p)), p)))
    for q in _space_samples(phi.target, n, seed + 1):
        worst = max(worst, float(phi.target.distance(phi(phi_inv(q)), q)))
    if worst > EPS_SPACE:
        raise NotAnIsomorphismError(f"{phi.name} and {phi_inv.name} are not inverse (gap {worst:.3g})")


def _pull_domain(dom: Domain, m: MapSpec, new_space, push=None) -> Domain:
    """Domain on ``new_space`` whose members map into ``dom`` under m x m."""
    if isinstance(dom, FullProduct):
        return FullProduct(new_space)
    if isinstance(dom, FiberedDomain):
        return FiberedDomain(compose(dom.f, m), compose(dom.g, m), dom.fiber_tol)
    if isinstance(dom, RegionDomain):
        sampler = None
        if push is not None:
            def sampler(rng):
                x, y = dom.sample_one(rng)
                return push(x), push(y)
        return RegionDomain(new_space, lambda x, y: dom.predicate(m(x), m(y)),
                            f"{dom.name}∘{m.name}", sampler=sampler,
                            descriptor={"kind": "pullback", "domain": dom.descriptor,
                                        "map": m.descriptor})
    raise ConfigurationError(f"cannot transport domain of kind {dom.kind}")


def transport_bundle_iso(pl: Planner, phi: MapSpec, phi_inv: MapSpec,
                         n_check: int = 256, seed: int = 0) -> Planner:
    """Conjugate every section by phi: s'(x', y') = phi ∘ s(phi^-1 x', phi^-1 y')."""
    if phi.source.name != pl.space.name or phi_inv.target.name != pl.space.name:
        raise ConfigurationError("phi must start, and phi_inv end, at the planner space")
    _check_inverse(phi, phi_inv, n_check, seed)
    new_space = phi.target

    def pull(x, y):
        return phi_inv(x), phi_inv(y)

    pieces = []
    for piece in pl.pieces:
        def contains(x, y, piece=piece):
            return piece.contains(*pull(x, y))

        def section(x, y, piece=piece):
            return map_path(phi, piece.section(*pull(x, y)))

        pieces.append(Piece(piece.label, contains, section, _pull_subparts(piece, pull)))
    dom = _pull_domain(pl.domain, phi_inv, new_space, push=phi)
    return pl.derive(pieces, f"transported(iso {phi.name})", domain=dom)


# -- transport along a homotopy equivalence -------------------------------------

def _check_homotopy(h: HomotopySpec, start, end, points, what):
    worst = 0.0
    for p in points:
        ends = h.evaluator(p, np.array([0.0, 1.0]))
        worst = max(worst, float(h.target.distance(ends[0], start(p))),
                    float(h.target.distance(ends[1], end(p))))
    if worst > EPS_SPACE:
        raise InvalidHomotopyError(f"{what}: endpoint maps do not match (gap {worst:.3g})")


def transport_fhe(pl: Planner, u: MapSpec, v: MapSpec, H: HomotopySpec, H_prime: HomotopySpec,
                  n_check: int = 256, seed: int = 0) -> Planner:
    """Move a planner on X to X' along v : X' -> X with homotopy inverse u.

    H : X' x I -> X' runs from u∘v to the identity, H_prime : X x I -> X from
    the identity to v∘u.  The new section is
    ``reverse(H(x', .)) * u∘s(v x', v y') * H(y', .)`` in thirds, i.e.
    H(x', 1 - 3t), then u[s(v x', v y')(3t - 1)], then H(y', 3t - 2).
    """
    X, Xp = pl.space, v.source
    if u.source.name != X.name or u.target.name != Xp.name or v.target.name != X.name:
        raise ConfigurationError("expected u : X -> X' and v : X' -> X")
    if pl.mode != "path":
        raise ModeError("transport_fhe expects a path-mode planner")
    _check_homotopy(H, lambda p: u(v(p)), lambda p: p, _space_samples(Xp, n_check, seed),
                    "H (u∘v ≃ Id)")
    _check_homotopy(H_prime, lambda p: p, lambda p: v(u(p)), _space_samples(X, n_check, seed + 1),
                    "H' (Id ≃ v∘u)")

    def pull(x, y):
        return v(x), v(y)

    pieces = []
    for piece in pl.pieces:
        def contains(x, y, piece=piece):
            return piece.contains(*pull(x, y))

        def section(x, y, piece=piece):
            middle = map_path(u, piece.section(*pull(x, y)))
            return concat_thirds(reverse(homotopy_path(H, x)), middle, homotopy_path(H, y))

        pieces.append(Piece(piece.label, contains, section, _pull_subparts(piece, pull)))
    dom = _pull_domain(pl.domain, v, Xp)
    return pl.derive(pieces, f"transported(fhe {v.name})", domain=dom)


def transport_fhe_back(pl: Planner, u: MapSpec, v: MapSpec, H_prime: HomotopySpec,
                       n_check: int = 256, seed: int = 0) -> Planner:
    """Inverse direction: a planner on X' becomes one on X.

    Section: H'(x, 3t), then v[s'(u x, u y)(3t - 1)], then H'(y, 3 - 3t).
    """
    Xp, X = pl.space, u.source
    if u.target.name != Xp.name or v.source.name != Xp.name or v.target.name != X.name:
        raise ConfigurationError("expected a planner on X' with u : X -> X' and v : X' -> X")
    if pl.mode != "path":
        raise ModeError("transport_fhe_back expects a path-mode planner")
    _check_homotopy(H_prime, lambda p: p, lambda p: v(u(p)), _space_samples(X, n_check, seed + 1),
                    "H' (Id ≃ v∘u)")

    def pull(x, y):
        return u(x), u(y)

    pieces = []
    for piece in pl.pieces:
        def contains(x, y, piece=piece):
            return piece.contains(*pull(x, y))

        def section(x, y, piece=piece):
            middle = map_path(v, piece.section(*pull(x, y)))
            return concat_thirds(homotopy_path(H_prime, x), middle, reverse(homotopy_path(H_prime, y)))

        pieces.append(Piece(piece.label, contains, section, _pull_subparts(piece, pull)))
    dom = _pull_domain(pl.domain, u, X)
    return pl.derive(pieces, f"transported(fhe-back {u.name})", domain=dom)


# -- domination ----------------------------------------------------------------

def dominate_planner(pl: Planner, B: Domain, D: HomotopySpec, n_check: int = 512, seed: int = 0) -> Planner:
    """Extend a planner on A to B when the inclusion of B deforms into A.

    D acts on concatenated pairs (x, y); D(., 0) is the inclusion and D(., 1)
    lands in A.  Section at (x, y): slide x along D, apply the planner at
    D((x, y), 1), slide back to y along the reversed second component.
    """
    X = pl.space
    d = X.ambient_dim
    if D.space.ambient_dim != 2 * d or B.space.name != X.name:
        raise ConfigurationError("D must act on pairs of points of the planner space")
    worst_start = 0.0
    for x, y in B.sample(n_check, seed):
        b = np.concatenate([x, y])
        ends = D.evaluator(b, np.array([0.0, 1.0]))
        worst_start = max(worst_start, float(D.space.distance(ends[0], b)))
        x1, y1 = ends[1, :d], ends[1, d:]
        if not pl.domain.contains(x1, y1):
            raise DominationError(
                f"D((x, y), 1) escapes the planner domain at ({x.tolist()}, {y.tolist()})")
    if worst_start > EPS_SPACE:
        raise InvalidHomotopyError(f"D(., 0) is not the inclusion (gap {worst_start:.3g})")

    def end_pair(x, y):
        e = D.evaluator(np.concatenate([x, y]), np.array([1.0]))[0]
        return e[:d], e[d:]

    pieces = []
    for piece in pl.pieces:
        def contains(x, y, piece=piece):
            return B.contains(x, y) and piece.contains(*end_pair(x, y))

        def section(x, y, piece=piece):
            b = np.concatenate([x, y])
            ev = D.evaluator
            ends = ev(b, np.array([0.0, 1.0]))
            first = ParamPath(X, lambda ts: ev(b, ts)[:, :d], x, ends[1, :d], check=False)
            second = ParamPath(X, lambda ts: ev(b, ts)[:, d:], y, ends[1, d:], check=False)
            return concat_thirds(first, piece.section(ends[1, :d], ends[1, d:]), reverse(second))

        pieces.append(Piece(piece.label, contains, section, _pull_subparts(piece, end_pair)))
    return pl.derive(pieces, "dominated", domain=B)


# -- loops -------------------------------------------------------------------------

def to_loop_planner(pl: Planner, mode: str = "free-loop") -> Planner:
    """s(x, y) becomes the loop s(x, y) * reverse(s(x, y)), passing y at t = 1/2."""
    if pl.mode != "path":
        raise ModeError("to_loop_planner expects a path-mode planner")
    if mode not in ("free-loop", "based-loop"):
        raise ModeError(f"unsupported loop mode {mode!r}")
    base = None
    if mode == "based-loop":
        g = getattr(pl.domain, "g", None)
        if g is None or g.base is None:
            raise ModeError("based loops need a domain of the form (f, cst_x0)")
        base = g.base
    pieces = []
    for piece in pl.pieces:
        def section(x, y, piece=piece):
            s = piece.section(x, y)
            return concat_halves(s, reverse(s), mode=mode)
        pieces.append(Piece(piece.label, piece.contains, section, piece.subparts))
    return pl.derive(pieces, f"loop({mode})", mode=mode, base=base)


# -- LS-category ---------------------------------------------------------------------

def _default_base(pl: Planner):
    g = getattr(pl.domain, "g", None)
    if g is not None and g.base is not None:
        return g.base
    raise PreconditionError("no base point given and the domain is not of the form (f, cst_x0)")


def planner_to_cat_cover(pl: Planner, base=None, n_probe: int = N_PROBE, seed: int = 0) -> CatWitness:
    """V_i = {y : (x0, y) in piece i}, h_i(y, t) = s_i(x0, y)(t)."""
    if pl.mode != "path":
        raise ModeError("planner_to_cat_cover expects a path-mode planner")
    X = pl.space
    x0 = X.check(_default_base(pl) if base is None else base)
    rng = np.random.default_rng(seed)
    ys = [x0] + [X.sample_partner(x0, rng) for _ in range(n_probe)]
    for y in ys:
        if not pl.domain.contains(x0, y):
            raise PreconditionError(f"({x0.tolist()}, {y.tolist()}) is outside the planner domain")
    cst = lambda p: x0
    entries = []
    for piece in pl.pieces:
        if not any(piece.contains(x0, y) for y in ys):
            continue

        def contains(y, piece=piece):
            return piece.contains(x0, y)

        def h(y, ts, piece=piece):
            return piece.section(x0, y).func(ts)

        entries.append(CatEntry(piece.label, contains,
                                HomotopySpec(X, h, cst, lambda p: p, "cst_x0", "id"),
                                lambda y, piece=piece: piece.subpart_of(x0, y),
                                len(piece.subparts)))
    return CatWitness(X, x0, tuple(entries))


def _cat_pieces(w: CatWitness, loop: bool):
    x0 = w.base
    mode = "based-loop" if loop else "path"
    pieces = []
    for i, entry in enumerate(w.entries):
        earlier = w.entries[:i]

        def contains(x, y, entry=entry, earlier=earlier):
            if norm(x - x0) > EPS_SPACE:
                return False
            return entry.contains(y) and not any(e.contains(y) for e in earlier)

        def section(x, y, entry=entry):
            h = homotopy_path(entry.homotopy, y)
            if loop:
                return concat_halves(h, reverse(h), mode=mode)
            return h

        subparts = tuple((f"sub{j}", (lambda x, y, j=j, entry=entry: entry.subpart_of(y) == j))
                         for j in range(entry.n_subparts))
        pieces.append(Piece(entry.label, contains, section, subparts))
    return pieces


def cat_cover_to_planner(w: CatWitness) -> Planner:
    """Planner on {x0} x X for (Id, cst_x0): s_i(x0, y)(t) = h_i(y, t)."""
    return Planner(based_domain(w.space, w.base), tuple(_cat_pieces(w, loop=False)),
                   provenance=("cat-witness", "converted(cat->planner)"))


def based_loop_planner_from_cat(w: CatWitness) -> Planner:
    """Based loops at x0: h_i(y, .) followed by its reverse, passing y at t = 1/2."""
    return Planner(based_domain(w.space, w.base), tuple(_cat_pieces(w, loop=True)), mode="based-loop",
                   provenance=("cat-witness", "converted(cat->based-loop)"), base=w.base)


# -- subadditivity ------------------------------------------------------------------

def combine_cover_planners(planners, n_probe: int = 4096, seed: int = 0) -> Planner:
    """Glue planners whose domains cover X x X; earlier domains take priority."""
    planners = list(planners)
    if not planners:
        raise ConfigurationError("need at least one planner")
    X = planners[0].space
    mode = planners[0].mode
    if any(p.space.name != X.name or p.mode != mode for p in planners):
        raise ConfigurationError("planners must share their space and mode")
    if len(planners) == 1 and isinstance(planners[0].domain, FullProduct):
        return planners[0]
    full = FullProduct(X)
    samples = full.sample(n_probe, seed)
    domains = [p.domain for p in planners]
    for x, y in samples:
        if not any(d.contains(x, y) for d in domains):
            raise CoverError(f"({x.tolist()}, {y.tolist()}) is in none of the domains", (x, y))
    pieces = []
    for j, pl in enumerate(planners):
        before = domains[:j]
        for piece in pl.pieces:
            def contains(x, y, dom=domains[j], piece=piece, before=before):
                return dom.contains(x, y) and piece.contains(x, y) and not any(
                    d.contains(x, y) for d in before)
            if not any(contains(x, y) for x, y in samples):
                continue
            pieces.append(Piece(f"{j}:{piece.label}", contains, piece.section, piece.subparts))
    provenance = ("combined(" + " | ".join("/".join(p.provenance) for p in planners) + ")",)
    base = planners[0].base
    return Planner(full, tuple(pieces), mode, provenance, base)
