"""Independent oracles used by the unit and acceptance suites.

These deliberately avoid the library's algorithms: the longest chain is found
by scanning all subsets, and fronts by plain-loop minimal-element peeling.
"""

import numpy as np


def exhaustive_longest_chain(pts: np.ndarray) -> int:
    """Scan all 2^n subsets and keep the largest totally ordered one."""
    n = pts.shape[0]
    if n == 0:
        return 0
    le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
    comparable = le | le.T
    masks = np.arange(2**n)[:, None]
    has = (masks >> np.arange(n)) & 1
    valid = np.ones(2**n, dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if not comparable[i, j]:
                valid &= ~((has[:, i] == 1) & (has[:, j] == 1))
    sizes = has.sum(axis=1)
    return int(sizes[valid].max())


def brute_force_peel(pts: np.ndarray) -> np.ndarray:
    """Front index of each point by repeated minimal-element removal."""
    n = pts.shape[0]
    front = np.zeros(n, dtype=int)
    alive = list(range(n))
    k = 0
    while alive:
        k += 1
        minimal = []
        for i in alive:
            dominated = False
            for j in alive:
                if i != j and np.all(pts[j] <= pts[i]):
                    dominated = True
                    break
            if not dominated:
                minimal.append(i)
        for i in minimal:
            front[i] = k
            alive.remove(i)
    return front
