"""Longest chains, Pareto depth, nondominated sorting into fronts, and the
scaled depth function."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _fastchains
from .geometry import MaskedDomain, Simplex
from .sampling import PointCloud


class DuplicatePointError(ValueError):
    pass


def _as_points(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2:
        raise ValueError("expected a (k, d) array of points")
    return pts


def _check_distinct(pts: np.ndarray) -> None:
    if pts.shape[0] < 2:
        return
    order = np.lexsort(pts.T[::-1])
    sorted_pts = pts[order]
    same = np.all(sorted_pts[1:] == sorted_pts[:-1], axis=1)
    if np.any(same):
        k = int(np.argmax(same))
        i, j = int(order[k]), int(order[k + 1])
        raise DuplicatePointError(
            f"duplicate points at indices {min(i, j)} and {max(i, j)}: "
            f"{sorted_pts[k]}"
        )


def _depths_sorted_dp(pts: np.ndarray) -> np.ndarray:
    """O(n^2) depth DP, any dimension: points sorted by coordinate sum with
    lexicographic tie-breaks, so every predecessor precedes its successors
    (comparable distinct points always have distinct sums)."""
    n = pts.shape[0]
    dp = np.ones(n, dtype=np.int64)
    for i in range(1, n):
        mask = np.all(pts[:i] <= pts[i], axis=1)
        if mask.any():
            dp[i] = dp[:i][mask].max() + 1
    return dp


def _depths_sorted_2d(pts: np.ndarray) -> np.ndarray:
    """Chain depths for points sorted by (x, y): longest nondecreasing
    subsequence of the second coordinate, O(n log n)."""
    y = np.ascontiguousarray(pts[:, 1])
    if _fastchains.HAVE_NUMBA:
        return _fastchains.lis_nondecreasing(y)
    return _fastchains.lis_nondecreasing_py(y)


def _depths_sorted_3d(pts: np.ndarray) -> np.ndarray:
    z = pts[:, 2]
    uniq = np.unique(z)
    zrank = np.searchsorted(uniq, z, side="right").astype(np.int64)
    return _fastchains.chain_depths_3d(np.ascontiguousarray(pts[:, 1]), zrank)


# points above this count route to the O(n log^2 n) kernel in d = 3
_DP_CUTOVER_3D = 3000


def chain_depths(cloud, method: str = "auto") -> np.ndarray:
    """Longest-chain length ending at each point (the point included), in the
    original point order.

    method: 'auto' picks a fast path by dimension, 'dp' forces the general
    dynamic program (used as a cross-check).
    """
    pts = _as_points(cloud)
    n, d = pts.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if method == "dp":
        order = np.lexsort((*pts.T[::-1], pts.sum(axis=1)))
        dp = _depths_sorted_dp(pts[order])
    elif method == "auto":
        order = np.lexsort(pts.T[::-1])
        sorted_pts = pts[order]
        if d == 2:
            dp = _depths_sorted_2d(sorted_pts)
        elif d == 3 and n > _DP_CUTOVER_3D and _fastchains.HAVE_NUMBA:
            dp = _depths_sorted_3d(sorted_pts)
        else:
            order = np.lexsort((*pts.T[::-1], pts.sum(axis=1)))
            dp = _depths_sorted_dp(pts[order])
    else:
        raise ValueError(f"unknown method {method!r}")
    out = np.empty(n, dtype=np.int64)
    out[order] = dp
    return out


def longest_chain(cloud, method: str = "auto") -> int:
    """Maximum cardinality of a totally ordered subset under componentwise <=."""
    pts = _as_points(cloud)
    if pts.shape[0] == 0:
        return 0
    return int(chain_depths(pts, method=method).max())


def longest_chain_in(cloud, region) -> int:
    """Longest chain among the cloud points inside a region.

    region may be an order interval given as a point x (meaning [0, x]),
    a Simplex, a MaskedDomain, or any object with contains_points.
    """
    pts = _as_points(cloud)
    if pts.shape[0] == 0:
        return 0
    if isinstance(region, (Simplex, MaskedDomain)):
        keep = region.contains_points(pts)
    elif callable(getattr(region, "contains_points", None)):
        keep = region.contains_points(pts)
    elif callable(region):
        keep = np.asarray(region(pts), dtype=bool)
    else:
        upper = np.asarray(region, dtype=float)
        keep = np.all((pts >= 0.0) & (pts <= upper), axis=1)
    return longest_chain(pts[keep])


@dataclass(frozen=True)
class DepthLabeling:
    depth: np.ndarray  # int64, one entry per cloud point


@dataclass(frozen=True)
class FrontPartition:
    front_index: np.ndarray  # int64, 1-based front of each point
    fronts: list[np.ndarray]  # point indices per front


def pareto_depths(cloud) -> DepthLabeling:
    """Depth of each point: length of the longest chain of cloud points below
    it (itself included). Duplicate points are rejected."""
    pts = _as_points(cloud)
    _check_distinct(pts)
    return DepthLabeling(depth=chain_depths(pts))


def nondominated_sort(cloud) -> FrontPartition:
    """Partition into Pareto fronts by iterative peeling of minimal elements."""
    pts = _as_points(cloud)
    _check_distinct(pts)
    n = pts.shape[0]
    front_index = np.zeros(n, dtype=np.int64)
    remaining = np.arange(n)
    fronts: list[np.ndarray] = []
    k = 0
    while remaining.size:
        k += 1
        sub = pts[remaining]
        le = np.all(sub[:, None, :] <= sub[None, :, :], axis=2)
        np.fill_diagonal(le, False)
        minimal = ~le.any(axis=0)
        idx = remaining[minimal]
        fronts.append(idx)
        front_index[idx] = k
        remaining = remaining[~minimal]
    return FrontPartition(front_index=front_index, fronts=fronts)


def depth_function_eval(cloud, x) -> int:
    """Depth function U_n at x: longest chain among cloud points <= x."""
    pts = _as_points(cloud)
    x = np.asarray(x, dtype=float)
    if pts.shape[0] == 0:
        return 0
    keep = np.all(pts <= x, axis=1)
    return longest_chain(pts[keep])


@dataclass(frozen=True)
class ChainScalingConstants:
    """Chain growth constant c_d: a.s. limit of n^(-1/d) * (longest chain in
    a unit-intensity sample of size scale n on the unit cube)."""

    c_d: float
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need d >= 2")
        lower = chain_constant_lower_bound(self.d)
        if not (lower <= self.c_d < math.e):
            raise ValueError(
                f"c_d={self.c_d} outside the admissible range "
                f"[{lower:.6f}, e) for d={self.d}"
            )

    @classmethod
    def for_dimension(cls, d: int, c_d: float | None = None) -> "ChainScalingConstants":
        """d = 2 defaults to the proven value 2; higher d must be supplied
        (typically a Monte-Carlo estimate)."""
        if c_d is None:
            if d != 2:
                raise ValueError(f"c_d is only known exactly for d=2; supply it for d={d}")
            c_d = 2.0
        return cls(c_d=float(c_d), d=d)


def chain_constant_lower_bound(d: int) -> float:
    """Rigorous lower bound d^2 / (d!^(1/d) * Gamma(1/d)) for the chain
    growth constant; the known upper bound is e."""
    return d * d / (math.factorial(d) ** (1.0 / d) * math.gamma(1.0 / d))


def scaled_depth(U: int | np.ndarray, n: int, consts: ChainScalingConstants):
    """(d / c_d) * n^(-1/d) * U."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (consts.d / consts.c_d) * n ** (-1.0 / consts.d) * U


def depth_on_grid(cloud, grid, mask: MaskedDomain | None = None):
    """Depth function values at every grid node.

    Buckets each point to the smallest node that dominates it and takes
    cumulative running maxima along each axis; with a mask, the cloud is
    first restricted to the masked domain.
    """
    from .hj import Grid, GridFunction  # local import to avoid a cycle

    assert isinstance(grid, Grid)
    pts = _as_points(cloud)
    if mask is not None and pts.shape[0]:
        pts = pts[mask.contains_points(pts)]
    values = np.zeros((grid.m,) * grid.d)
    if pts.shape[0] == 0:
        return GridFunction(grid=grid, values=values)
    if np.any(pts < 0) or np.any(pts > grid.side):
        raise ValueError("grid does not cover the cloud")
    depths = chain_depths(pts)
    axis = grid.axis
    idx = tuple(
        np.searchsorted(axis, pts[:, j], side="left") for j in range(grid.d)
    )
    np.maximum.at(values, idx, depths)
    for ax in range(grid.d):
        np.maximum.accumulate(values, axis=ax, out=values)
    return GridFunction(grid=grid, values=values)
