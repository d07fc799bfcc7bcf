"""Inf-convolution, discrete semiconvexity / semiconcavity and Lipschitz
measurements, and blow-up-rate fits on rounded domains."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import MaskedDomain
from .hj import Grid, GridFunction, SolveSpec, solve_hj
from .sampling import DensityField


def _domain_mask(f: GridFunction, domain) -> np.ndarray:
    """Resolve a domain argument (bool array, predicate over points, or
    MaskedDomain) to a boolean node mask."""
    g = f.grid
    if domain is None:
        return np.ones((g.m,) * g.d, dtype=bool)
    if isinstance(domain, np.ndarray) and domain.dtype == bool:
        if domain.shape != f.values.shape:
            raise ValueError("mask shape mismatch")
        return domain
    if isinstance(domain, MaskedDomain):
        return domain.contains_points(g.nodes()).reshape((g.m,) * g.d)
    if callable(domain):
        return np.asarray(domain(g.nodes()), dtype=bool).reshape((g.m,) * g.d)
    raise TypeError(f"unsupported domain {type(domain)}")


def admissible_mask(grid: Grid, R: float, margin_cells: int = 2) -> np.ndarray:
    """Nodes with geometric mean > R + margin_cells * h: clears the one-cell
    smearing band of the masked solver."""
    return (grid.node_geomeans() > R + margin_cells * grid.h)


def _lower_envelope_1d(vals: np.ndarray) -> np.ndarray:
    """out[i] = min_j vals[j] + (i - j)^2, with +inf entries skipped."""
    m = vals.shape[0]
    finite = np.flatnonzero(np.isfinite(vals))
    if finite.size == 0:
        return np.full(m, np.inf)
    v = np.empty(finite.size, dtype=np.int64)
    z = np.empty(finite.size + 1)
    k = 0
    v[0] = finite[0]
    z[0] = -np.inf
    z[1] = np.inf
    for q in finite[1:]:
        while True:
            p = v[k]
            s = ((vals[q] + q * q) - (vals[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    out = np.empty(m)
    k = 0
    for i in range(m):
        while z[k + 1] < i:
            k += 1
        p = v[k]
        out[i] = vals[p] + (i - p) * (i - p)
    return out


def _inf_convolution_separable(values: np.ndarray, alpha: float, h: float) -> np.ndarray:
    work = 2.0 * alpha * values / (h * h)
    for ax in range(values.ndim):
        work = np.apply_along_axis(_lower_envelope_1d, ax, work)
    return work * (h * h) / (2.0 * alpha)


def _inf_convolution_exact(values: np.ndarray, alpha: float, h: float,
                           return_argmin: bool = False):
    m_shape = values.shape
    d = values.ndim
    flat = values.ravel()
    finite = np.isfinite(flat)
    idx = np.indices(m_shape).reshape(d, -1).T.astype(float)
    src = idx[finite]
    fv = flat[finite]
    out = np.full(flat.shape, np.inf)
    arg = np.full(flat.shape, -1, dtype=np.int64)
    src_ids = np.flatnonzero(finite)
    for k in range(flat.shape[0]):
        diff = src - idx[k]
        cand = fv + (h * h) * np.einsum("ij,ij->i", diff, diff) / (2.0 * alpha)
        j = int(np.argmin(cand))
        out[k] = cand[j]
        arg[k] = src_ids[j]
    out = out.reshape(m_shape)
    if return_argmin:
        return out, arg.reshape(m_shape)
    return out


def inf_convolution(f: GridFunction, alpha: float, domain=None,
                    method: str = "auto", return_argmin: bool = False):
    """u_alpha(x) = min over grid nodes y of f(y) + |x - y|^2 / (2 alpha).

    Nodes outside `domain` are excluded from the minimization and get +inf in
    the output. 'exact' scans all node pairs; 'separable' uses per-axis
    lower-envelope transforms; both agree to roundoff.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    mask = _domain_mask(f, domain)
    vals = np.where(mask, f.values, np.inf)
    h = f.grid.h
    if method == "auto":
        method = "separable"
    if method == "separable":
        if return_argmin:
            raise ValueError("argmin tracking requires method='exact'")
        out = _inf_convolution_separable(vals, alpha, h)
        return GridFunction(grid=f.grid, values=out)
    if method == "exact":
        if return_argmin:
            out, arg = _inf_convolution_exact(vals, alpha, h, return_argmin=True)
            return GridFunction(grid=f.grid, values=out), arg
        out = _inf_convolution_exact(vals, alpha, h)
        return GridFunction(grid=f.grid, values=out)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SecondDifferenceReport:
    worst_value: float  # most negative second difference, as a ratio to |h|^2
    arg_x: np.ndarray
    arg_h: np.ndarray
    samples: int


def default_offsets(d: int, ks=(1, 2, 4)) -> list[np.ndarray]:
    """Axis and two-axis diagonal index offsets k*e_i, k*(e_i +- e_j)."""
    offs = []
    for k in ks:
        for i in range(d):
            e = np.zeros(d, dtype=np.int64)
            e[i] = k
            offs.append(e.copy())
        for i, j in combinations(range(d), 2):
            e = np.zeros(d, dtype=np.int64)
            e[i], e[j] = k, k
            offs.append(e.copy())
            e[j] = -k
            offs.append(e.copy())
    return offs


def _offset_views(shape, o):
    center, plus, minus = [], [], []
    for m, oi in zip(shape, o):
        a = abs(int(oi))
        if 2 * a >= m:
            return None
        center.append(slice(a, m - a))
        plus.append(slice(a + oi, m - a + oi if m - a + oi != 0 else None))
        minus.append(slice(a - oi, m - a - oi if m - a - oi != 0 else None))
    return tuple(center), tuple(plus), tuple(minus)


def semiconvexity_constant(f: GridFunction, domain=None, offsets=None) -> SecondDifferenceReport:
    """Largest violation of discrete convexity: max over admissible (x, h) of
    -(f(x+h) - 2 f(x) + f(x-h)) / |h|^2, clamped below at 0.

    Admissible means x and x +- h are grid nodes inside the domain.
    """
    g = f.grid
    mask = _domain_mask(f, domain)
    if offsets is None:
        offsets = default_offsets(g.d)
    h = g.h
    worst = 0.0
    arg_x = None
    arg_h = None
    samples = 0
    for o in offsets:
        views = _offset_views(f.values.shape, o)
        if views is None:
            continue
        c, pl, mi = views
        ok = mask[c] & mask[pl] & mask[mi]
        count = int(ok.sum())
        if count == 0:
            continue
        samples += count
        with np.errstate(invalid="ignore"):
            sd = f.values[pl] - 2.0 * f.values[c] + f.values[mi]
        norm2 = float(np.sum((h * o.astype(float)) ** 2))
        ratio = np.where(ok & np.isfinite(sd), -sd / norm2, -np.inf)
        k = int(np.argmax(ratio))
        val = float(ratio.flat[k])
        if val > worst:
            worst = val
            local = np.unravel_index(k, ratio.shape)
            base = tuple(s.start + i for s, i in zip(c, local))
            arg_x = g.axis[np.array(base)]
            arg_h = h * o.astype(float)
    if samples == 0:
        raise ValueError("no admissible (x, h) pair in the domain")
    if arg_x is None:
        arg_x = np.full(g.d, np.nan)
        arg_h = np.zeros(g.d)
    return SecondDifferenceReport(worst_value=worst, arg_x=arg_x, arg_h=arg_h,
                                  samples=samples)


def semiconcavity_constant(f: GridFunction, domain=None, offsets=None) -> SecondDifferenceReport:
    """Dual measurement: semiconvexity constant of -f."""
    neg = GridFunction(grid=f.grid, values=-f.values)
    return semiconvexity_constant(neg, domain=domain, offsets=offsets)


def lipschitz_constant(f: GridFunction, domain=None) -> float:
    """Max |difference| / h over axis-adjacent node pairs inside the domain."""
    g = f.grid
    mask = _domain_mask(f, domain)
    if int(mask.sum()) < 2:
        raise ValueError("domain contains fewer than two nodes")
    best = 0.0
    for ax in range(g.d):
        lo = [slice(None)] * g.d
        hi = [slice(None)] * g.d
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        ok = mask[lo] & mask[hi]
        if not ok.any():
            continue
        diff = np.abs(f.values[hi] - f.values[lo])[ok] / g.h
        best = max(best, float(diff.max()))
    return best


@dataclass(frozen=True)
class BlowupFit:
    radii: np.ndarray
    constants: np.ndarray
    slope: float
    r2: float
    samples: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if np.any(np.diff(r) >= 0):
            raise ValueError("radii must be strictly decreasing")
        if not (0.0 <= self.r2 <= 1.0):
            raise ValueError("r2 must lie in [0, 1]")


def semiconvexity_blowup_fit(density: DensityField, radii, grid: Grid,
                             margin_cells: int = 2) -> BlowupFit:
    """Solve the masked problem at each radius, measure the semiconvexity
    constant away from the smearing band, and fit log(constant) vs log(R).
    The expected slope is -(2d - 1)."""
    from .experiments import fit_loglog

    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    if grid.h > float(radii.min()) / 8.0:
        raise ValueError(
            f"grid too coarse for R={radii.min():g}: h={grid.h:g} > R/8"
        )
    constants = []
    samples = []
    for R in radii:
        u = solve_hj(SolveSpec(density=density, mask=MaskedDomain(R=R, M=grid.side)), grid)
        report = semiconvexity_constant(u, domain=admissible_mask(grid, R, margin_cells))
        constants.append(report.worst_value)
        samples.append(report.samples)
    constants = np.asarray(constants)
    slope, _, r2 = fit_loglog(radii, constants)
    r2 = max(r2, 0.0)  # hopeless fits report 0 rather than negative values
    return BlowupFit(radii=radii, constants=constants, slope=slope, r2=r2,
                     samples=np.asarray(samples, dtype=np.int64))
