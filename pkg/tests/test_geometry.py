import numpy as np
import pytest
from hypothesis import given, strategies as st

from fibertc.errors import ConfigurationError, DomainError, SamplingExhaustedError
from fibertc.geometry import (FiberedDomain, RegionDomain, based_domain, compose, constant,
                              diagonal_domain, fibered_domain_membership, get_space, identity,
                              quotient_domain, quotient_projection, quotient_project,
                              sample_fibered_domain, space_distance, space_names)
from fibertc.geometry.maps import map_from_descriptor, rotation_s1, swap_t2
from fibertc.geometry.spaces import KLEIN_INVOLUTION

from conftest import angle_point

SPACES = space_names()
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def klein_point(a, b):
    return np.concatenate([angle_point(a), angle_point(b)])


# -- distances -------------------------------------------------------------------

def test_circle_antipodes_are_pi_apart():
    assert space_distance(get_space("S1"), [1, 0], [-1, 0]) == pytest.approx(np.pi, abs=1e-12)


def test_rp1_identifies_antipodes():
    assert space_distance(get_space("RP1"), [1, 0], [-1, 0]) == pytest.approx(0.0, abs=1e-12)


def test_klein_identifies_involution_pairs():
    p = klein_point(0.3, 1.1)
    # (z, w) ~ (conj z, -w)
    q = klein_point(-0.3, 1.1 + np.pi)
    assert space_distance(get_space("K"), p, q) == pytest.approx(0.0, abs=1e-12)


def test_distance_rejects_points_outside_the_space():
    with pytest.raises(DomainError, match=r"\[2.0, 0.0\]"):
        space_distance(get_space("S1"), [2.0, 0.0], [1.0, 0.0])


def test_torus_metric_is_flat_product():
    T = get_space("T2")
    p = klein_point(0.0, 0.0)
    q = klein_point(0.3, 0.4)
    assert space_distance(T, p, q) == pytest.approx(0.5, abs=1e-12)


def test_unknown_space_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        get_space("S7")


def test_products_of_registered_spaces():
    P = get_space("S1*S2")
    assert P.ambient_dim == 5
    assert P.contains(np.array([1.0, 0.0, 0.0, 0.0, 1.0]))


# -- quotient projection ------------------------------------------------------------

def test_rp2_projection_merges_antipodes(rng):
    S2, RP2 = get_space("S2"), get_space("RP2")
    x = S2.sample(rng)
    a, b = quotient_project(S2, RP2, x), quotient_project(S2, RP2, -x)
    assert np.array_equal(a, b)


def test_klein_projection_merges_orbit():
    T2, K = get_space("T2"), get_space("K")
    p = klein_point(0.7, 4.0)
    a = quotient_project(T2, K, p)
    b = quotient_project(T2, K, p @ KLEIN_INVOLUTION.T)
    assert np.array_equal(a, b)
    # representative has omega-angle in [0, pi)
    assert np.arctan2(a[3], a[2]) % (2 * np.pi) < np.pi


def test_projection_fixes_fundamental_domain_points():
    T2, K = get_space("T2"), get_space("K")
    p = klein_point(2.0, 0.5)
    assert np.array_equal(quotient_project(T2, K, p), p)
    S2, RP2 = get_space("S2"), get_space("RP2")
    x = np.array([0.6, -0.8, 0.0])
    assert np.array_equal(quotient_project(S2, RP2, x), x)


def test_projection_rejects_mismatched_pair():
    with pytest.raises(ConfigurationError):
        quotient_project(get_space("S2"), get_space("K"), np.array([1.0, 0.0, 0.0]))


def test_rp_representative_skips_tiny_leading_coordinates():
    RP2 = get_space("RP2")
    x = np.array([1e-12, -0.6, 0.8])
    x = x / np.linalg.norm(x)
    rep = RP2.canonical(x)
    assert rep[1] > 0


# -- maps ---------------------------------------------------------------------------

def test_identity_and_constant_maps_are_exact(rng):
    S2 = get_space("S2")
    x = S2.sample(rng)
    base = np.array([0.0, 0.0, 1.0])
    assert np.array_equal(identity(S2)(x), x)
    assert np.array_equal(constant(S2, S2, base)(x), base)


def test_composition_requires_matching_spaces():
    with pytest.raises(ConfigurationError):
        compose(identity(get_space("S1")), identity(get_space("S2")))


def test_composition_propagates_base_point():
    S1 = get_space("S1")
    c = compose(constant(S1, S1, [0.0, 1.0]), rotation_s1(0.5))
    assert c.tag == "composition"
    assert np.array_equal(c.base, [0.0, 1.0])


def test_map_registry_round_trip():
    for m in (rotation_s1(0.25), swap_t2(), quotient_projection(get_space("K")),
              constant(get_space("S1"), get_space("S1"), [1.0, 0.0])):
        again = map_from_descriptor(m.descriptor)
        p = m.source.sample(np.random.default_rng(3))
        assert np.allclose(again(p), m(p), atol=1e-15)


def test_map_registry_rejects_unknown():
    with pytest.raises(ConfigurationError):
        map_from_descriptor({"map": "teleport"})


# -- fibered domains ------------------------------------------------------------------

def test_antipodal_pair_is_in_rp2_domain():
    dom = quotient_domain(get_space("RP2"))
    x = np.array([0.0, 0.6, 0.8])
    assert fibered_domain_membership(dom, x, -x)


def test_pole_and_equator_are_not_in_rp2_domain():
    dom = quotient_domain(get_space("RP2"))
    assert not fibered_domain_membership(dom, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])


def test_based_domain_is_base_times_space(rng):
    S1 = get_space("S1")
    x0 = np.array([1.0, 0.0])
    dom = based_domain(S1, x0)
    for _ in range(20):
        y = S1.sample(rng)
        assert fibered_domain_membership(dom, x0, y)
        assert not fibered_domain_membership(dom, angle_point(0.1), y)


def test_diagonal_samples():
    pairs = sample_fibered_domain(diagonal_domain(get_space("S1")), 4, seed=0)
    assert len(pairs) == 4
    for x, y in pairs:
        assert np.array_equal(x, y)


def test_rp2_samples_cover_both_components():
    pairs = sample_fibered_domain(quotient_domain(get_space("RP2")), 200, seed=1)
    equal = sum(np.allclose(x, y, atol=1e-12) for x, y in pairs)
    antipodal = sum(np.allclose(x, -y, atol=1e-12) for x, y in pairs)
    assert equal + antipodal == 200
    assert equal > 50 and antipodal > 50


def test_klein_samples_are_graph_or_diagonal():
    pairs = sample_fibered_domain(quotient_domain(get_space("K")), 200, seed=2)
    kinds = set()
    for x, y in pairs:
        if np.allclose(x, y, atol=1e-12):
            kinds.add("diagonal")
        else:
            assert np.allclose(y, x @ KLEIN_INVOLUTION.T, atol=1e-12)
            kinds.add("graph")
    assert kinds == {"diagonal", "graph"}


def test_klein_samples_reach_fixed_circle_strata():
    # pairs with z = +-i satisfy (z, w) -> (z, -w): the involution acts on w only
    pairs = sample_fibered_domain(quotient_domain(get_space("K")), 400, seed=3)
    assert any(abs(x[0]) < 1e-12 and not np.allclose(x, y) for x, y in pairs)


def test_sampling_is_deterministic():
    dom = quotient_domain(get_space("RP3"))
    a = dom.sample(30, seed=9)
    b = dom.sample(30, seed=9)
    assert all(np.array_equal(x1, x2) and np.array_equal(y1, y2) for (x1, y1), (x2, y2) in zip(a, b))


def test_empty_region_exhausts_sampling():
    dom = RegionDomain(get_space("S1"), lambda x, y: False, "empty")
    with pytest.raises(SamplingExhaustedError):
        dom.sample(1, seed=0)


# -- properties -----------------------------------------------------------------------

@pytest.mark.parametrize("name", SPACES)
@given(seed=seeds)
def test_metric_axioms(name, seed):
    X = get_space(name)
    rng = np.random.default_rng(seed)
    for _ in range(25):
        p, q, r = X.sample(rng), X.sample_partner(X.sample(rng), rng), X.sample(rng)
        assert X.distance(p, q) >= 0
        assert X.distance(p, q) == pytest.approx(X.distance(q, p), abs=1e-12)
        assert X.distance(p, r) <= X.distance(p, q) + X.distance(q, r) + 1e-9
        assert X.distance(p, p) <= 1e-12


@pytest.mark.parametrize("name", SPACES)
@given(seed=seeds)
def test_samplers_land_in_space(name, seed):
    X = get_space(name)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x = X.sample(rng)
        assert X.contains(x)
        assert X.contains(X.sample_partner(x, rng))
        assert X.contains(X.perturb(x, 1e-3, rng))


@pytest.mark.parametrize("name", ["RP1", "RP2", "RP3", "K"])
@given(seed=seeds)
def test_projection_idempotent_and_orbit_invariant(name, seed):
    Q = get_space(name)
    rng = np.random.default_rng(seed)
    p, q = Q.total.sample(rng), Q.total.sample(rng)
    once = Q.canonical(p)
    assert np.array_equal(Q.canonical(once), once)
    for m in Q.transforms:
        assert Q.distance(p, q @ m.T) == pytest.approx(Q.distance(p, q), abs=1e-12)
        assert Q.distance(p, p @ m.T) <= 1e-12


@given(seed=seeds)
def test_fibered_domain_monotonicity(seed):
    # diagonal = (Id x Id)^-1(Delta) is contained in (p x p)^-1(Delta) for p = p_K o Id
    T2, K = get_space("T2"), get_space("K")
    small = diagonal_domain(T2)
    big = FiberedDomain(compose(quotient_projection(K), identity(T2)),
                        compose(quotient_projection(K), identity(T2)))
    for x, y in small.sample(20, seed):
        assert big.contains(x, y)


@given(seed=seeds)
def test_injective_fiber_forces_equal_points(seed):
    S2 = get_space("S2")
    dom = FiberedDomain(identity(S2), identity(S2))
    for x, y in dom.sample(20, seed):
        assert S2.distance(x, y) <= 1e-9


@pytest.mark.parametrize("name", ["RP2", "K"])
@given(seed=seeds)
def test_domain_samples_are_members(name, seed):
    dom = quotient_domain(get_space(name))
    for x, y in dom.sample(20, seed):
        assert dom.residual(x, y) <= 1e-9
