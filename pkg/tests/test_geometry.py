import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paretolab.geometry import (
    MaskedDomain,
    Rect,
    Simplex,
    cover_boundary_tube,
    cover_simplex,
    dist_to_curved_boundary,
    dominates,
    geometric_mean,
    omega_contains,
    rejection_sample_simplex,
    sample_tube_order_interval,
    simplex_contains,
    simplex_measure,
)

coords = st.lists(st.floats(0.0, 10.0, allow_nan=False), min_size=2, max_size=4)


def test_dominates_examples():
    assert dominates((0.1, 0.2), (0.3, 0.4))
    assert not dominates((0.1, 0.5), (0.3, 0.4))
    x = (0.7, 0.7)
    assert dominates(x, x)


def test_dominates_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        dominates((0.1, 0.2), (0.1, 0.2, 0.3))


@given(coords)
def test_dominates_reflexive(x):
    assert dominates(x, x)


@given(st.integers(2, 4), st.data())
@settings(max_examples=50, deadline=None)
def test_partial_order_properties(d, data):
    pt = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=d, max_size=d)
    x = data.draw(pt)
    y = data.draw(pt)
    z = data.draw(pt)
    # antisymmetry on distinct points
    if x != y and dominates(x, y):
        assert not dominates(y, x)
    # transitivity
    if dominates(x, y) and dominates(y, z):
        assert dominates(x, z)


def test_omega_contains_examples():
    assert omega_contains(MaskedDomain(R=0.0, M=1.0), (0.5, 0.5))
    # geometric mean exactly 0.6: boundary excluded by the strict inequality
    assert not omega_contains(MaskedDomain(R=0.6, M=1.0), (0.36, 1.0))
    assert omega_contains(MaskedDomain(R=0.5, M=1.0), (0.49, 1.0))


def test_masked_domain_validation():
    with pytest.raises(ValueError):
        MaskedDomain(R=1.0, M=1.0)
    with pytest.raises(ValueError):
        MaskedDomain(R=-0.1, M=1.0)


def test_simplex_measure_examples():
    assert simplex_measure(Simplex(y=np.zeros(2), p=np.ones(2))) == pytest.approx(0.25)
    assert simplex_measure(Simplex(y=np.zeros(3), p=np.ones(3))) == pytest.approx(1 / 27)
    assert simplex_measure(Simplex(y=np.zeros(2), p=np.array([2.0, 0.5]))) == pytest.approx(0.25)


def test_simplex_contains_examples():
    s = Simplex(y=np.zeros(2), p=np.ones(2))
    assert simplex_contains(s, (-0.25, -0.25))
    assert not simplex_contains(s, (-0.75, -0.5))
    assert not simplex_contains(s, (0.1, -0.5))
    # apex is always inside
    assert simplex_contains(s, s.y)


def test_simplex_validation():
    with pytest.raises(ValueError):
        Simplex(y=np.zeros(2), p=np.array([1.0, 0.0]))


def test_dist_to_curved_boundary_on_surface():
    dom = MaskedDomain(R=0.5, M=1.0)
    assert dist_to_curved_boundary(dom, (0.25, 1.0)) == 0.0
    assert dist_to_curved_boundary(dom, (0.5, 0.5)) == 0.0


def test_dist_to_curved_boundary_golden_section_oracle():
    # independent oracle: golden-section search on the curve (t, R^2/t)
    dom = MaskedDomain(R=0.5, M=1.0)

    def golden(x):
        lo, hi = 0.25, 1.0
        phi = (np.sqrt(5) - 1) / 2
        f = lambda t: np.hypot(t - x[0], 0.25 / t - x[1])
        a, b = lo, hi
        for _ in range(200):
            c, d = b - phi * (b - a), a + phi * (b - a)
            if f(c) < f(d):
                b = d
            else:
                a = c
        return f((a + b) / 2)

    for x in [(0.49, 1.0), (0.8, 0.9), (0.6, 0.55), (1.0, 1.0)]:
        got = dist_to_curved_boundary(dom, x)
        want = golden(x)
        assert got == pytest.approx(want, rel=1e-6)


def test_dist_outside_domain_rejected():
    with pytest.raises(ValueError, match="outside"):
        dist_to_curved_boundary(MaskedDomain(R=0.5, M=1.0), (0.1, 0.1))


def test_dist_zero_iff_on_surface():
    dom = MaskedDomain(R=0.5, M=1.0)
    rng = np.random.default_rng(3)
    for _ in range(20):
        t = rng.uniform(0.25, 1.0)
        on = (t, 0.25 / t)
        assert dist_to_curved_boundary(dom, on) <= 1e-6
    for _ in range(20):
        x = rng.uniform(0, 1, 2)
        if geometric_mean(x) > 0.5 + 1e-3:
            assert dist_to_curved_boundary(dom, x) > 1e-6


def test_dist_lower_bound_scaling():
    # dist >= c * delta * R^(d-1) uniformly over delta, with a fitted c
    dom = MaskedDomain(R=0.5, M=1.0)
    rng = np.random.default_rng(4)
    for delta in (0.05, 0.1, 0.2):
        inner = MaskedDomain(R=0.5 + delta, M=1.0)
        ratios = []
        count = 0
        while count < 30:
            x = rng.uniform(0, 1, 2)
            if inner.contains(x):
                ratios.append(dist_to_curved_boundary(dom, x) / (delta * 0.5))
                count += 1
        assert min(ratios) > 0.3


def test_dist_r_zero_is_min_coordinate():
    assert dist_to_curved_boundary(MaskedDomain(R=0.0, M=1.0), (0.3, 0.7)) == 0.3


@pytest.mark.parametrize("d", [2, 3])
def test_cover_simplex_full_hit_rate(d):
    rng = np.random.default_rng(10 + d)
    s = Simplex(y=rng.uniform(0.5, 1.5, d), p=rng.uniform(0.5, 2.0, d))
    for eps in (0.5, 0.1):
        cover = cover_simplex(s, eps)
        pts = rejection_sample_simplex(s, 2000, rng)
        assert cover.covers_points(pts).all()


def test_cover_simplex_count_growth():
    s = Simplex(y=np.ones(2), p=np.ones(2))
    epss = [0.2, 0.1, 0.05, 0.025]
    counts = [len(cover_simplex(s, e)) for e in epss]
    fit = np.polyfit(np.log([1 / e for e in epss]), np.log(counts), 1)
    assert abs(fit[0] - 1.0) < 0.5  # exponent d - 1 = 1


def test_cover_simplex_degenerate_eps():
    s = Simplex(y=np.ones(2), p=np.ones(2))
    cover = cover_simplex(s, 1.5)
    assert len(cover) == 1
    rng = np.random.default_rng(0)
    pts = rejection_sample_simplex(s, 500, rng)
    assert cover.covers_points(pts).all()


def test_cover_simplex_measure_bounds():
    s = Simplex(y=np.zeros(2), p=np.ones(2))
    eps = 0.1
    cover = cover_simplex(s, eps)
    area = simplex_measure(s)
    for r in cover.rects:
        root = r.measure() ** 0.5
        assert root >= eps * area  # loose form of the lower bound
        assert root <= area**0.5 + 5 * eps


def test_cover_simplex_eps_validation():
    with pytest.raises(ValueError):
        cover_simplex(Simplex(y=np.zeros(2), p=np.ones(2)), 0.0)


def test_tube_cover_contains_order_intervals():
    rng = np.random.default_rng(7)
    tube = cover_boundary_tube(0.5, 0.1, 2)
    for _ in range(200):
        x, y = sample_tube_order_interval(0.5, 0.1, 2, rng)
        rect = tube.member_containing(x, y)
        assert rect is not None
        assert np.all(rect.lower <= x) and np.all(y <= rect.upper)


def test_tube_cover_member_sizes():
    rng = np.random.default_rng(8)
    R, eps = 0.5, 0.1
    tube = cover_boundary_tube(R, eps, 2)
    roots = []
    for _ in range(200):
        x, y = sample_tube_order_interval(R, eps, 2, rng)
        rect = tube.member_containing(x, y)
        roots.append(rect.measure() ** 0.5)
    # C1 * R^(d-1) * eps <= |E|^(1/d) <= C2 * R^(-1) * eps with fitted C1, C2
    assert min(roots) >= 2 * tube.h
    assert max(roots) <= 2.0 * eps / R


def test_tube_cover_extreme_eps():
    rng = np.random.default_rng(9)
    tube = cover_boundary_tube(0.4, 0.2, 2)  # eps = R/2, the widest allowed
    for _ in range(50):
        x, y = sample_tube_order_interval(0.4, 0.2, 2, rng)
        assert tube.member_containing(x, y) is not None


def test_tube_cover_parameter_validation():
    with pytest.raises(ValueError):
        cover_boundary_tube(0.8, 0.1, 2)  # R > 1/2
    with pytest.raises(ValueError):
        cover_boundary_tube(0.5, 0.3, 2)  # eps > R/2


def test_tube_cover_materialize_small():
    tube = cover_boundary_tube(0.5, 0.25, 2, spacing=0.15)
    coll = tube.materialize()
    assert len(coll) > 0
    for r in coll.rects:
        assert geometric_mean(r.lower) >= 0.25 - 1e-12
        assert geometric_mean(r.upper) <= 1.0 + 1e-12


def test_rect_validation():
    with pytest.raises(ValueError):
        Rect(lower=np.array([0.0, 0.0]), upper=np.array([1.0, 0.0]))
