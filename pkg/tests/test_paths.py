import numpy as np
import pytest
from hypothesis import given, strategies as st

from fibertc.errors import AmbiguityError, GlueError, ModeError, ParameterError, PathContractError
from fibertc.geometry import get_space
from fibertc.paths import (ParamPath, ccw_tangent, concat_halves, concat_thirds, constant_path,
                           geodesic, path_eval, reverse)

from conftest import angle_point

S1 = get_space("S1")
GRID = np.linspace(0.0, 1.0, 64)
R2 = np.sqrt(2.0) / 2.0
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def quarter():
    return geodesic(S1, [1.0, 0.0], [0.0, 1.0])


def arc(a, b):
    """Oracle: counterclockwise arc from angle a to angle b by angle interpolation."""
    return ParamPath(S1, lambda ts: np.stack([np.cos(a + (b - a) * ts), np.sin(a + (b - a) * ts)], -1),
                     angle_point(a), angle_point(b))


def test_constant_path_is_constant():
    x = np.array([0.6, 0.8])
    c = constant_path(S1, x)
    assert np.array_equal(c.sample(7), np.tile(x, (7, 1)))


def test_quarter_arc_endpoint_and_midpoint():
    q = quarter()
    assert np.allclose(path_eval(q, 1.0), [0.0, 1.0], atol=1e-15)
    assert np.allclose(path_eval(q, 0.5), [R2, R2], atol=1e-15)


@pytest.mark.parametrize("t", [-0.1, 1.5, np.nan])
def test_parameter_outside_unit_interval(t):
    with pytest.raises(ParameterError):
        path_eval(quarter(), t)


def test_reverse_examples():
    q = quarter()
    assert np.allclose(path_eval(reverse(q), 0.5), [R2, R2], atol=1e-15)
    assert np.allclose(reverse(reverse(q)).sample(64), q.sample(64), atol=1e-12)
    c = constant_path(S1, [0.0, 1.0])
    assert np.array_equal(reverse(c).sample(5), c.sample(5))


def test_concat_thirds_examples():
    c = constant_path(S1, [1.0, 0.0])
    assert np.array_equal(concat_thirds(c, c, c).sample(64), c.sample(64))
    p = concat_thirds(arc(0, np.pi / 2), arc(np.pi / 2, np.pi), arc(np.pi, 3 * np.pi / 2))
    assert np.allclose(p(1.0), angle_point(3 * np.pi / 2), atol=1e-15)
    p2 = arc(np.pi / 2, np.pi)
    assert np.allclose(p(0.5), p2(0.5), atol=1e-15)


def test_concat_thirds_reports_gap():
    with pytest.raises(GlueError) as info:
        concat_thirds(quarter(), constant_path(S1, [1.0, 0.0]), constant_path(S1, [1.0, 0.0]))
    assert info.value.gap == pytest.approx(np.pi / 2)


def test_concat_halves_examples():
    q = quarter()
    loop = concat_halves(q, reverse(q), mode="free-loop")
    assert np.allclose(loop(0.5), q.end, atol=1e-15)
    assert np.allclose(loop(1.0), q.start, atol=1e-15)
    c = constant_path(S1, [0.0, -1.0])
    assert np.array_equal(concat_halves(c, c).sample(64), c.sample(64))
    half = geodesic(S1, [1.0, 0.0], [-1.0, 0.0], ccw_tangent([1.0, 0.0]))
    assert np.allclose(concat_halves(half, reverse(half))(0.25), [0.0, 1.0], atol=1e-15)


def test_concat_halves_reports_gap():
    with pytest.raises(GlueError):
        concat_halves(quarter(), quarter())


def test_geodesic_examples():
    assert np.allclose(quarter()(0.5), [R2, R2], atol=1e-15)
    half = geodesic(S1, [1.0, 0.0], [-1.0, 0.0], ccw_tangent([1.0, 0.0]))
    assert np.allclose(half(0.5), [0.0, 1.0], atol=1e-15)
    x = np.array([0.0, 1.0])
    assert np.array_equal(geodesic(S1, x, x).sample(9), np.tile(x, (9, 1)))


def test_antipodal_geodesic_needs_hint():
    with pytest.raises(AmbiguityError):
        geodesic(S1, [1.0, 0.0], [-1.0, 0.0])
    with pytest.raises(AmbiguityError):
        geodesic(get_space("S2"), [0.0, 0.0, 1.0], [0.0, 0.0, -1.0])


def test_sphere_half_turn_follows_hint():
    S2 = get_space("S2")
    x = np.array([1.0, 0.0, 0.0])
    p = geodesic(S2, x, -x, np.array([0.3, 0.0, 2.0]))  # tangential part points to +e3
    assert np.allclose(p(0.5), [0.0, 0.0, 1.0], atol=1e-15)


def test_endpoint_contract_checked_at_construction():
    with pytest.raises(PathContractError):
        ParamPath(S1, lambda ts: np.tile([1.0, 0.0], (len(ts), 1)), [1.0, 0.0], [0.0, 1.0])


def test_loop_modes_need_closed_paths():
    with pytest.raises(PathContractError):
        quarter().with_mode("free-loop")
    with pytest.raises(ModeError):
        ParamPath(S1, quarter().func, [1.0, 0.0], [0.0, 1.0], mode="spiral")


def test_box_geodesic_is_a_segment():
    D2 = get_space("D2")
    p = geodesic(D2, [-1.0, -1.0], [1.0, 0.0])
    assert np.allclose(p(0.25), [-0.5, -0.75], atol=1e-15)


# -- properties -----------------------------------------------------------------------

def _pair(name, seed):
    X = get_space(name)
    rng = np.random.default_rng(seed)
    x = X.sample(rng)
    y = X.sample(rng)
    return X, x, y


@pytest.mark.parametrize("name", ["S1", "S2", "S3", "T2", "cylinder", "D2", "RP2", "K"])
@given(seed=seeds)
def test_geodesic_has_constant_speed(name, seed):
    X, x, y = _pair(name, seed)
    p = geodesic(X, x, y)
    pts = p.sample(65)
    steps = X.distance(pts[:-1], pts[1:])
    assert np.allclose(steps, X.distance(x, y) / 64, atol=1e-6)
    assert np.all(X.residual(pts) <= 1e-9)


@pytest.mark.parametrize("name", ["S1", "S2", "S3", "T2", "D2"])
@given(seed=seeds)
def test_geodesic_symmetric_up_to_reversal(name, seed):
    X, x, y = _pair(name, seed)
    assert np.allclose(geodesic(X, y, x).func(GRID), reverse(geodesic(X, x, y)).func(GRID), atol=1e-9)


@given(seed=seeds)
def test_reverse_is_an_involution(seed):
    X, x, y = _pair("S3", seed)
    p = geodesic(X, x, y)
    assert np.allclose(reverse(reverse(p)).func(GRID), p.func(GRID), atol=1e-12)


@given(seed=seeds, t=st.floats(min_value=0.0, max_value=1.0))
def test_thirds_and_halves_reparametrize(seed, t):
    X, x, y = _pair("S2", seed)
    rng = np.random.default_rng(seed + 1)
    z, w = X.sample(rng), X.sample(rng)
    p1, p2, p3 = geodesic(X, x, y), geodesic(X, y, z), geodesic(X, z, w)
    th = concat_thirds(p1, p2, p3)
    s = 3 * t
    expect = p1(s) if s <= 1 else (p2(s - 1) if s <= 2 else p3(s - 2))
    assert np.allclose(th(t), expect, atol=1e-12)
    ha = concat_halves(p1, p2)
    expect = p1(2 * t) if t <= 0.5 else p2(2 * t - 1)
    assert np.allclose(ha(t), expect, atol=1e-12)
