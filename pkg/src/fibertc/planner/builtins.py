"""Built-in planners on the registered spaces."""
from __future__ import annotations

import itertools

import numpy as np

from .core import Piece, Planner
from ..errors import ConfigurationError, UnsupportedError
from ..geometry.domains import FullProduct, RegionDomain, diagonal_domain, quotient_domain
from ..geometry.spaces import EPS_SPACE, norm, Box, Space, get_space, product_space
from ..paths import ParamPath, ccw_tangent, constant_path, geodesic, product_path

# Cap threshold for the even-sphere planner: the antipodal piece switches
# tangent field where |x.e| crosses 1 - ETA.
ETA = 0.5


def _equal(x, y):
    return norm(x - y) <= EPS_SPACE


def _antipodal(x, y):
    return norm(x + y) <= EPS_SPACE


def circle_planner() -> Planner:
    """Two pieces on S^1 x S^1: shorter arc off the antidiagonal, ccw half-turn on it."""
    s1 = get_space("S1")
    f1 = Piece("F1:shorter-arc", lambda x, y: not _antipodal(x, y), lambda x, y: geodesic(s1, x, y))
    f2 = Piece("F2:ccw-half-turn", _antipodal, lambda x, y: geodesic(s1, x, y, ccw_tangent(x)))
    return Planner(FullProduct(s1), (f1, f2), provenance=("builtin:circle",))


def _odd_tangent(x):
    # complex structure: a nowhere-vanishing tangent field on odd spheres
    v = np.empty_like(x)
    v[0::2] = -x[1::2]
    v[1::2] = x[0::2]
    return v


def sphere_antipodal_planner(n: int) -> Planner:
    """Planner on A = diagonal ∪ antidiagonal of S^n, the domain of TC(S^n -> RP^n)."""
    if n not in (1, 2, 3):
        raise UnsupportedError(f"sphere_antipodal_planner supports n in {{1, 2, 3}}, got {n}")
    sphere = get_space(f"S{n}")
    dom = quotient_domain(get_space(f"RP{n}"))

    def constant(x, y):
        return constant_path(sphere, x)

    diag = ("diagonal", _equal)
    if n % 2 == 1:
        def section(x, y):
            if _equal(x, y):
                return constant(x, y)
            return geodesic(sphere, x, y, _odd_tangent(x))
        piece = Piece("diag+antidiag", lambda x, y: _equal(x, y) or _antipodal(x, y), section,
                      (diag, ("antidiagonal", _antipodal)))
        return Planner(dom, (piece,), provenance=(f"builtin:sphere_antipodal({n})",))

    e = np.array([0.0, 0.0, 1.0])
    e_perp = np.array([1.0, 0.0, 0.0])

    def band(x, y):
        return _antipodal(x, y) and abs(np.dot(x, e)) <= 1.0 - ETA

    def caps(x, y):
        return _antipodal(x, y) and abs(np.dot(x, e)) > 1.0 - ETA

    def band_section(x, y):
        if _equal(x, y):
            return constant(x, y)
        # geodesic projects e to the tangent plane: v(x) = e - (x.e) x
        return geodesic(sphere, x, y, e)

    p1 = Piece("diag+antipodal-band", lambda x, y: _equal(x, y) or band(x, y), band_section,
               (diag, ("antipodal-band", band)))
    p2 = Piece("antipodal-caps", caps, lambda x, y: geodesic(sphere, x, y, e_perp))
    return Planner(dom, (p1, p2), provenance=("builtin:sphere_antipodal(2)",))


def diagonal_planner(space: Space) -> Planner:
    """One piece on the diagonal: constant paths."""
    dom = diagonal_domain(space)
    piece = Piece("diagonal", lambda x, y: bool(np.all(x == y)) or _equal(x, y),
                  lambda x, y: constant_path(space, x))
    return Planner(dom, (piece,), provenance=(f"builtin:diagonal({space.name})",))


def convex_planner(space: Space) -> Planner:
    """Straight-line planner: one piece on a convex Euclidean region."""
    if not isinstance(space, Box):
        raise UnsupportedError(f"convex_planner needs a box, got {space.name}")
    piece = Piece("segment", lambda x, y: True, lambda x, y: geodesic(space, x, y))
    return Planner(FullProduct(space), (piece,), provenance=(f"builtin:convex({space.name})",))


def shorter_arc_planner() -> Planner:
    """One piece on {(x, y) in S^1 x S^1 : y != -x}."""
    s1 = get_space("S1")
    dom = RegionDomain(s1, lambda x, y: not _antipodal(x, y), "off-antidiagonal",
                       descriptor={"kind": "off_antidiagonal", "space": "S1"})
    piece = Piece("shorter-arc", lambda x, y: True, lambda x, y: geodesic(s1, x, y))
    return Planner(dom, (piece,), provenance=("builtin:shorter_arc",))


def _ccw_angle(x, y):
    theta = np.arctan2(x[0] * y[1] - x[1] * y[0], np.dot(x, y))
    return theta if theta >= 0 else theta + 2 * np.pi


def ccw_path(x, y) -> ParamPath:
    """Counterclockwise arc on S^1 from x to y (angle in [0, 2 pi))."""
    theta = _ccw_angle(x, y)

    def func(ts):
        a = theta * ts
        c, s = np.cos(a), np.sin(a)
        return np.stack([c * x[0] - s * x[1], s * x[0] + c * x[1]], axis=-1)

    return ParamPath(get_space("S1"), func, x, y)


def ccw_planner() -> Planner:
    """One piece on {(x, y) in S^1 x S^1 : y != x}: rotate counterclockwise."""
    s1 = get_space("S1")
    dom = RegionDomain(s1, lambda x, y: not _equal(x, y), "off-diagonal",
                       descriptor={"kind": "off_diagonal", "space": "S1"})
    piece = Piece("ccw-arc", lambda x, y: True, ccw_path)
    return Planner(dom, (piece,), provenance=("builtin:ccw",))


def _product_domain(dx, dy, space, cut):
    if isinstance(dx, FullProduct) and isinstance(dy, FullProduct):
        return FullProduct(space)

    def contains(x, y):
        return dx.contains(x[:cut], y[:cut]) and dy.contains(x[cut:], y[cut:])

    def sampler(rng):
        (x1, y1), (x2, y2) = dx.sample_one(rng), dy.sample_one(rng)
        return np.concatenate([x1, x2]), np.concatenate([y1, y2])

    return RegionDomain(space, contains, f"product({dx.kind}, {dy.kind})", sampler=sampler,
                        descriptor={"kind": "product", "left": dx.descriptor, "right": dy.descriptor})


def product_planner(pl_x: Planner, pl_y: Planner) -> Planner:
    """Index-sum product: W_k is the union of P_i x Q_j over i + j = k."""
    if pl_x.mode != "path" or pl_y.mode != "path":
        raise ConfigurationError("product_planner needs path-mode planners")
    sx, sy = pl_x.space, pl_y.space
    space = product_space(sx, sy)
    cut = sx.ambient_dim
    a, b = pl_x.count, pl_y.count

    def make_piece(k):
        pairs = [(i, k - i) for i in range(a) if 0 <= k - i < b]

        def split(x, y):
            return x[:cut], x[cut:], y[:cut], y[cut:]

        def contains(x, y):
            x1, x2, y1, y2 = split(x, y)
            return any(pl_x.pieces[i].contains(x1, y1) and pl_y.pieces[j].contains(x2, y2)
                       for i, j in pairs)

        def section(x, y):
            x1, x2, y1, y2 = split(x, y)
            for i, j in pairs:
                if pl_x.pieces[i].contains(x1, y1) and pl_y.pieces[j].contains(x2, y2):
                    return product_path(space, [pl_x.pieces[i].section(x1, y1),
                                                pl_y.pieces[j].section(x2, y2)])
            raise ConfigurationError("pair outside product piece")

        subparts = []
        for i, j in pairs:
            pi, pj = pl_x.pieces[i], pl_y.pieces[j]
            for (la, pa), (lb, pb) in itertools.product(pi.subparts, pj.subparts):
                def pred(x, y, pi=pi, pj=pj, pa=pa, pb=pb):
                    x1, x2, y1, y2 = split(x, y)
                    return (pi.contains(x1, y1) and pj.contains(x2, y2)
                            and pa(x1, y1) and pb(x2, y2))
                subparts.append((f"{pi.label}/{la} x {pj.label}/{lb}", pred))
        return Piece(f"W{k + 1}", contains, section, tuple(subparts))

    pieces = [make_piece(k) for k in range(a + b - 1)]
    return Planner(_product_domain(pl_x.domain, pl_y.domain, space, cut), pieces,
                   provenance=(f"product({'/'.join(pl_x.provenance)} ; {'/'.join(pl_y.provenance)})",))


def torus_planner() -> Planner:
    return product_planner(circle_planner(), circle_planner())
