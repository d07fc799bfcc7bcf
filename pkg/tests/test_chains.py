import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paretolab.chains import (
    ChainScalingConstants,
    DuplicatePointError,
    chain_constant_lower_bound,
    chain_depths,
    depth_function_eval,
    depth_on_grid,
    longest_chain,
    longest_chain_in,
    nondominated_sort,
    pareto_depths,
    scaled_depth,
)
from paretolab.geometry import MaskedDomain, Simplex
from paretolab.hj import Grid

from oracles import brute_force_peel, exhaustive_longest_chain


def test_longest_chain_examples():
    assert longest_chain(np.zeros((0, 2))) == 0
    pts = np.array([[0.2, 0.3], [0.5, 0.1], [0.6, 0.7], [0.8, 0.8]])
    assert longest_chain(pts) == 3
    antichain = np.array([[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]])
    assert longest_chain(antichain) == 1


def test_longest_chain_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    for trial in range(60):
        d = 2 + trial % 2
        n = int(rng.integers(1, 13))
        pts = rng.random((n, d))
        assert longest_chain(pts) == exhaustive_longest_chain(pts)
        assert longest_chain(pts, method="dp") == exhaustive_longest_chain(pts)


def test_fast_paths_agree_with_dp():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(2, 600))
        pts = rng.random((n, 2))
        assert np.array_equal(chain_depths(pts), chain_depths(pts, method="dp"))
    # d = 3 compiled kernel, including tied coordinates
    from paretolab.chains import _depths_sorted_3d

    for _ in range(20):
        n = int(rng.integers(2, 300))
        pts = np.round(rng.random((n, 3)) * 6) / 6
        pts = np.unique(pts, axis=0)
        rng.shuffle(pts)
        order = np.lexsort(pts.T[::-1])
        got = np.empty(pts.shape[0], dtype=np.int64)
        got[order] = _depths_sorted_3d(pts[order])
        assert np.array_equal(got, chain_depths(pts, method="dp"))


def test_longest_chain_in_regions():
    rng = np.random.default_rng(2)
    pts = rng.random((200, 2))
    assert longest_chain_in(pts, np.array([0.0, 0.0])) == 0
    assert longest_chain_in(pts, np.array([1.0, 1.0])) == longest_chain(pts)
    s = Simplex(y=np.ones(2), p=np.ones(2))
    keep = s.contains_points(pts)
    assert longest_chain_in(pts, s) == longest_chain(pts[keep])
    dom = MaskedDomain(R=0.4, M=1.0)
    assert longest_chain_in(pts, dom) == longest_chain(pts[dom.contains_points(pts)])


def test_scaled_chain_in_simplex_near_limit():
    # unit-side simplex with apex (1, 1): the scaled chain length approaches
    # d * (measure)^(1/d) = 2 * (1/4)^(1/2) = 1
    from paretolab.sampling import SampleConfig, constant_density, sample_poisson, unit_box

    n = 10**5
    cloud = sample_poisson(constant_density(1.0),
                           SampleConfig(n=n, seed=21, region=unit_box(2)))
    s = Simplex(y=np.ones(2), p=np.ones(2))
    val = scaled_depth(longest_chain_in(cloud.points, s), n,
                       ChainScalingConstants.for_dimension(2))
    assert abs(val - 1.0) < 0.1


def test_pareto_depths_examples():
    assert pareto_depths(np.array([[0.3, 0.4]])).depth.tolist() == [1]
    pts = np.array([[1, 5], [2, 2], [5, 1], [3, 3]], dtype=float)
    assert pareto_depths(pts).depth.tolist() == [1, 1, 1, 2]
    chain = np.cumsum(np.ones((5, 3)), axis=0)
    assert pareto_depths(chain).depth.tolist() == [1, 2, 3, 4, 5]


def test_pareto_depths_matches_peeling_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(1, 60))
        d = int(rng.integers(2, 5))
        pts = rng.random((n, d))
        assert np.array_equal(pareto_depths(pts).depth, brute_force_peel(pts))


def test_duplicates_rejected_with_pair():
    pts = np.array([[0.1, 0.2], [0.5, 0.5], [0.1, 0.2]])
    with pytest.raises(DuplicatePointError, match="indices 0 and 2"):
        pareto_depths(pts)
    with pytest.raises(DuplicatePointError):
        nondominated_sort(pts)


def test_nondominated_sort_examples():
    pts = np.array([[1, 5], [2, 2], [5, 1], [3, 3]], dtype=float)
    fr = nondominated_sort(pts)
    assert sorted(fr.fronts[0].tolist()) == [0, 1, 2]
    assert fr.fronts[1].tolist() == [3]
    antichain = np.array([[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]])
    assert len(nondominated_sort(antichain).fronts) == 1
    chain = np.cumsum(np.ones((4, 2)), axis=0)
    assert len(nondominated_sort(chain).fronts) == 4


def test_front_equals_depth():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 200))
        d = int(rng.integers(2, 5))
        pts = rng.random((n, d))
        assert np.array_equal(
            nondominated_sort(pts).front_index, pareto_depths(pts).depth
        )


def test_depth_function_eval_oracle():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = int(rng.integers(1, 12))
        pts = rng.random((n, 2))
        x = rng.random(2)
        keep = np.all(pts <= x, axis=1)
        assert depth_function_eval(pts, x) == exhaustive_longest_chain(pts[keep])
    pts = rng.random((50, 2))
    assert depth_function_eval(pts, np.zeros(2)) == 0
    assert depth_function_eval(pts, np.ones(2)) == longest_chain(pts)


def test_depth_function_monotone():
    rng = np.random.default_rng(6)
    pts = rng.random((300, 2))
    for _ in range(50):
        x = rng.random(2)
        y = np.minimum(x + rng.random(2) * 0.3, 1.0)
        assert depth_function_eval(pts, x) <= depth_function_eval(pts, y)


def test_chain_gluing_superadditivity():
    rng = np.random.default_rng(7)
    pts = rng.random((400, 2))
    for _ in range(25):
        x = rng.uniform(0.2, 0.7, 2)
        z = np.minimum(x + rng.uniform(0.1, 0.3, 2), 1.0)
        between = pts[np.all(pts > x, axis=1) & np.all(pts <= z, axis=1)]
        lhs = depth_function_eval(pts, z)
        rhs = depth_function_eval(pts, x) + longest_chain(between)
        assert lhs >= rhs


def test_chain_level_set_property():
    # for a sample point x0 of depth >= k, the set of points below x0 whose
    # depth is within k of it carries a chain of length k or k + 1
    rng = np.random.default_rng(8)
    for trial in range(15):
        pts = rng.random((300, 2))
        depths = pareto_depths(pts).depth
        k = int(rng.integers(2, 6))
        candidates = np.flatnonzero(depths >= k)
        if candidates.size == 0:
            continue
        i0 = int(candidates[rng.integers(candidates.size)])
        x0 = pts[i0]
        u0 = depths[i0]
        below = np.all(pts <= x0, axis=1)
        sub = pts[below & (u0 - depths <= k)]
        length = longest_chain(sub)
        assert k <= length <= k + 1


def test_scaling_constants():
    c2 = ChainScalingConstants.for_dimension(2)
    assert c2.c_d == 2.0
    assert scaled_depth(7, 100, c2) == pytest.approx(0.7)
    assert scaled_depth(0, 100, c2) == 0.0
    assert chain_constant_lower_bound(3) == pytest.approx(1.8493, abs=1e-3)
    with pytest.raises(ValueError):
        ChainScalingConstants.for_dimension(3)  # value must be supplied
    with pytest.raises(ValueError):
        ChainScalingConstants(c_d=3.0, d=3)  # above e
    c3 = ChainScalingConstants.for_dimension(3, c_d=2.3)
    assert scaled_depth(46, 10**6, c3) == pytest.approx(3 / 2.3 * 46 / 100)


def test_scaled_depth_validation():
    with pytest.raises(ValueError):
        scaled_depth(5, 0, ChainScalingConstants.for_dimension(2))


def test_depth_on_grid_empty_and_single():
    grid = Grid(d=2, m=17)
    empty = depth_on_grid(np.zeros((0, 2)), grid)
    assert not empty.values.any()
    single = depth_on_grid(np.array([[0.5, 0.5]]), grid)
    X, Y = np.meshgrid(grid.axis, grid.axis, indexing="ij")
    assert np.array_equal(single.values, ((X >= 0.5) & (Y >= 0.5)).astype(float))


def test_depth_on_grid_matches_direct_eval():
    rng = np.random.default_rng(9)
    grid = Grid(d=2, m=32)
    pts = rng.random((400, 2))
    U = depth_on_grid(pts, grid)
    direct = np.array([depth_function_eval(pts, x) for x in grid.nodes()])
    assert np.array_equal(U.values.ravel(), direct)
    # masked variant
    mask = MaskedDomain(R=0.3, M=1.0)
    Um = depth_on_grid(pts, grid, mask=mask)
    fil = pts[mask.contains_points(pts)]
    directm = np.array([depth_function_eval(fil, x) for x in grid.nodes()])
    assert np.array_equal(Um.values.ravel(), directm)


def test_depth_on_grid_d3():
    rng = np.random.default_rng(10)
    grid = Grid(d=3, m=8)
    pts = rng.random((150, 3))
    U = depth_on_grid(pts, grid)
    direct = np.array([depth_function_eval(pts, x) for x in grid.nodes()])
    assert np.array_equal(U.values.ravel(), direct)


def test_depth_on_grid_rejects_uncovered_cloud():
    grid = Grid(d=2, m=8)
    with pytest.raises(ValueError, match="cover"):
        depth_on_grid(np.array([[1.5, 0.5]]), grid)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_depth_bounds_property(seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((30, 2))
    depths = pareto_depths(pts).depth
    assert np.all(depths >= 1)
    assert depths.max() == longest_chain(pts)
    # monotone along the partial order
    for i in range(30):
        for j in range(30):
            if i != j and np.all(pts[i] <= pts[j]):
                assert depths[j] >= depths[i] + 1
