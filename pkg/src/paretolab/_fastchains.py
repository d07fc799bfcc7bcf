"""Compiled kernels for per-point chain depths.

Points must be pre-sorted lexicographically; both kernels return, for each
point, the length of the longest chain (under componentwise <=) ending at
that point. Pure-Python fallbacks keep the package usable without numba.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def lis_nondecreasing(y: np.ndarray) -> np.ndarray:
    """Longest nondecreasing subsequence length ending at each element.

    For points sorted by (x, y) this equals the chain depth in d = 2.
    """
    n = y.shape[0]
    dp = np.empty(n, dtype=np.int64)
    tails = np.empty(n, dtype=np.float64)
    size = 0
    for i in range(n):
        v = y[i]
        lo, hi = 0, size
        while lo < hi:
            mid = (lo + hi) // 2
            if tails[mid] <= v:
                lo = mid + 1
            else:
                hi = mid
        tails[lo] = v
        if lo == size:
            size += 1
        dp[i] = lo + 1
    return dp


def lis_nondecreasing_py(y: np.ndarray) -> np.ndarray:
    from bisect import bisect_right

    n = y.shape[0]
    dp = np.empty(n, dtype=np.int64)
    tails: list[float] = []
    for i in range(n):
        v = y[i]
        k = bisect_right(tails, v)
        if k == len(tails):
            tails.append(v)
        else:
            tails[k] = v
        dp[i] = k + 1
    return dp


@njit(cache=True)
def chain_depths_3d(ys: np.ndarray, zrank: np.ndarray) -> np.ndarray:
    """Chain depths for lexicographically sorted 3-d points.

    After the lex sort, j precedes i in the partial order iff j < i,
    y_j <= y_i, and z_j <= z_i, which is an offline 2-d dominance problem
    solved by divide and conquer with a max-Fenwick tree over z ranks
    (O(n log^2 n)).
    """
    n = ys.shape[0]
    nrank = int(zrank.max()) if n > 0 else 0
    dp = np.ones(n, dtype=np.int64)
    bit = np.zeros(nrank + 1, dtype=np.int64)

    # explicit stack: (lo, hi, phase); phase 0 = split, 1 = merge + right
    cap = 4 * 64 + 8
    st_lo = np.empty(cap, dtype=np.int64)
    st_hi = np.empty(cap, dtype=np.int64)
    st_ph = np.empty(cap, dtype=np.int64)
    top = 0
    st_lo[top], st_hi[top], st_ph[top] = 0, n, 0
    top += 1

    while top > 0:
        top -= 1
        lo, hi, ph = st_lo[top], st_hi[top], st_ph[top]
        if hi - lo <= 1:
            continue
        mid = (lo + hi) // 2
        if ph == 0:
            st_lo[top], st_hi[top], st_ph[top] = lo, hi, 1
            top += 1
            st_lo[top], st_hi[top], st_ph[top] = lo, mid, 0
            top += 1
            continue

        # merge step: left block [lo, mid) updates right block [mid, hi)
        li = np.argsort(ys[lo:mid], kind="mergesort") + lo
        ri = np.argsort(ys[mid:hi], kind="mergesort") + mid
        nl = mid - lo
        p = 0
        for qi in range(hi - mid):
            i = ri[qi]
            while p < nl and ys[li[p]] <= ys[i]:
                j = li[p]
                k = zrank[j]
                v = dp[j]
                while k <= nrank:
                    if bit[k] < v:
                        bit[k] = v
                    k += k & (-k)
                p += 1
            k = zrank[i]
            best = 0
            while k > 0:
                if bit[k] > best:
                    best = bit[k]
                k -= k & (-k)
            if best + 1 > dp[i]:
                dp[i] = best + 1
        # clear only the touched Fenwick paths
        for t in range(p):
            k = zrank[li[t]]
            while k <= nrank:
                bit[k] = 0
                k += k & (-k)

        st_lo[top], st_hi[top], st_ph[top] = mid, hi, 0
        top += 1

    return dp
