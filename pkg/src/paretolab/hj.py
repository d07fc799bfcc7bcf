"""Monotone upwind solver for the degenerate Hamilton-Jacobi equation
u_x1 * u_x2 * ... * u_xd = rho with zero boundary data on the coordinate
hyperplanes, plus closed-form solutions, an analytic boundary expansion,
and a variational lower-bound oracle.

The scheme replaces each u_xi by a backward difference; at a node the update
solves prod_i (t - a_i) = h^d * rho for the unique root t >= max(a_i). The
upwind stencil is strictly lower in the product order, so one lexicographic
sweep is exact for the discrete system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import MaskedDomain, geometric_mean_many
from .sampling import DensityField


class NumericError(RuntimeError):
    """Root solver failed to converge; treated as fatal by the CLI."""


@dataclass(frozen=True)
class Grid:
    d: int
    m: int
    side: float = 1.0

    def __post_init__(self):
        if self.d < 1 or self.m < 2:
            raise ValueError("need d >= 1 and m >= 2")
        if self.side <= 0:
            raise ValueError("side must be positive")

    @property
    def h(self) -> float:
        return self.side / (self.m - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, self.side, self.m)

    def nodes(self) -> np.ndarray:
        """(m^d, d) array of node coordinates in C order."""
        grids = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def node_geomeans(self) -> np.ndarray:
        """Geometric mean of every node, shaped (m,)*d."""
        return geometric_mean_many(self.nodes()).reshape((self.m,) * self.d)


@dataclass
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.m,) * self.grid.d
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")

    def at_multi_index(self, idx) -> float:
        return float(self.values[tuple(idx)])


@dataclass(frozen=True)
class SolveSpec:
    density: DensityField
    mask: MaskedDomain | None = None
    root_tolerance: float = 1e-12

    def __post_init__(self):
        if self.root_tolerance <= 0:
            raise ValueError("root_tolerance must be positive")


def node_update(a, h: float, rhoval: float, tol: float = 1e-12) -> float:
    """Unique t >= max(a) solving prod_i (t - a_i) = h^d * rhoval.

    Bracketed Newton with a bisection fallback; rhoval = 0 returns max(a).
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if h <= 0:
        raise ValueError("h must be positive")
    if rhoval < 0:
        raise ValueError("rhoval must be >= 0")
    top = float(a.max())
    c = h**d * rhoval
    if c == 0.0 or top + c ** (1.0 / d) == top:
        # rhoval = 0, or the root is within one ulp of max(a)
        return top
    lo = top
    hi = top + h * rhoval ** (1.0 / d) * d

    def g(t):
        return float(np.prod(t - a)) - c

    t = top + c ** (1.0 / d)  # upper end of the tight bracket, g(t) >= 0
    for _ in range(100):
        diff = t - a
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            P = float(np.prod(diff))
            step = (P - c) / (P * float(np.sum(1.0 / diff)))
        t_new = t - step
        if not np.isfinite(t_new) or t_new < lo or t_new > hi:
            break
        if abs(step) <= tol * max(1.0, abs(t)) * 1e-3 or abs(step) <= 1e-16:
            return float(t_new)
        t = t_new
    # bisection fallback
    glo, ghi = g(lo), g(hi)
    if glo > 0 or ghi < 0:
        raise NumericError("node update bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
    raise NumericError("node update bisection did not converge")


def _newton_batch(A: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorized root solve of prod_i (t - A[k, i]) = c[k], t >= max row.

    Newton from the upper bracket end converges monotonically for the convex
    increasing residual; driven to machine accuracy.
    """
    top = A.max(axis=1)
    d = A.shape[1]
    t = top + c ** (1.0 / d)
    active = (c > 0.0) & (t > top)  # skip roots within one ulp of max(a)
    out = top.copy()
    if not np.any(active):
        return out
    ta = t[active]
    Aa = A[active]
    ca = c[active]
    for _ in range(80):
        diff = ta[:, None] - Aa
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            P = diff.prod(axis=1)
            S = (1.0 / diff).sum(axis=1)
            step = (P - ca) / (P * S)
        ta = ta - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, float(np.max(np.abs(ta)))):
            break
    else:
        raise NumericError("batched node update did not converge")
    if not np.all(np.isfinite(ta)):
        raise NumericError("batched node update produced nonfinite values")
    out[active] = ta
    return out


def solve_hj(spec: SolveSpec, grid: Grid) -> GridFunction:
    """Sweep solution of the discrete system on [0, side]^d.

    u = 0 on nodes with any zero coordinate; with a mask, the right-hand side
    is rho * 1{geometric mean > R}, which forces u = 0 through the excluded
    corner region up to one cell of smearing at the curved boundary.
    """
    d, m, h = grid.d, grid.m, grid.h
    nodes = grid.nodes()
    rho_vals = spec.density(nodes)
    if spec.mask is not None:
        rho_vals = np.where(spec.mask.contains_points(nodes), rho_vals, 0.0)
    rho_vals = rho_vals.reshape((m,) * d)

    values = np.zeros((m,) * d)
    flat = values.ravel()
    rho_flat = rho_vals.ravel()

    idx_grids = np.meshgrid(*([np.arange(m)] * d), indexing="ij")
    idx = np.stack([g.ravel() for g in idx_grids], axis=-1)
    interior = np.all(idx > 0, axis=1)
    idx = idx[interior]
    flat_ids = np.flatnonzero(interior)
    sums = idx.sum(axis=1)
    order = np.argsort(sums, kind="stable")
    idx = idx[order]
    flat_ids = flat_ids[order]
    sums = sums[order]

    strides = np.array(values.strides) // values.itemsize
    c_scale = h**d
    boundaries = np.searchsorted(sums, np.arange(d, d * (m - 1) + 1))
    boundaries = np.append(boundaries, idx.shape[0])
    for b in range(len(boundaries) - 1):
        s0, s1 = boundaries[b], boundaries[b + 1]
        if s0 == s1:
            continue
        ids = flat_ids[s0:s1]
        A = np.empty((s1 - s0, d))
        for j in range(d):
            A[:, j] = flat[ids - strides[j]]
        c = c_scale * rho_flat[ids]
        flat[ids] = _newton_batch(A, c)
    return GridFunction(grid=grid, values=values)


def exact_constant_solution(rho0: float, R: float, x) -> float:
    """d * rho0^(1/d) * ((x_1...x_d)^(1/d) - R), the solution for constant
    density on the rounded domain."""
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    gm = np.prod(x, axis=-1) ** (1.0 / d)
    if np.any(gm < R - 1e-12):
        raise ValueError("point outside the closed rounded domain")
    val = d * rho0 ** (1.0 / d) * (gm - R)
    return float(val) if np.isscalar(gm) or np.ndim(val) == 0 else val


@dataclass(frozen=True)
class BoundaryExpansion:
    """Smooth near-boundary approximate solution u = w + v around a base
    point x0 on the unit-geometric-mean surface, for right-hand side
    a + p.(x - x0):

        w(x) = a^(1/d) d ((x_1...x_d)^(1/d) - 1)
        v(x) = (1/2) a^(-(d-1)/d) [ (p.x)(G - 1/G) - 2 (p.x0)(G - 1) ]

    with G = (x_1...x_d)^(1/d). v vanishes on the surface, the product of the
    partial derivatives equals a + p.(x - x0) up to a residual that is
    quadratic in |x - x0|.
    """

    x0: np.ndarray
    a: float
    p: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "p", p)
        if self.a <= 0:
            raise ValueError("need a > 0")
        d = x0.shape[0]
        gm = float(np.prod(x0) ** (1.0 / d))
        if abs(gm - 1.0) > 1e-9:
            raise ValueError("x0 must lie on the unit geometric-mean surface")

    @property
    def d(self) -> int:
        return self.x0.shape[0]

    def _gm(self, x: np.ndarray) -> np.ndarray:
        if np.any(x <= 0):
            raise ValueError("expansion is singular at zero coordinates")
        return np.prod(x, axis=-1) ** (1.0 / self.d)

    def value(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.d
        G = self._gm(x)
        a, p, x0 = self.a, self.p, self.x0
        w = a ** (1.0 / d) * d * (G - 1.0)
        c0 = 0.5 * a ** (-(d - 1.0) / d)
        v = c0 * ((x @ p) * (G - 1.0 / G) - 2.0 * (x0 @ p) * (G - 1.0))
        return w + v

    __call__ = value

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.d
        G = self._gm(x)
        H = 1.0 / G
        a, p, x0 = self.a, self.p, self.x0
        Gi = G / (d * x)
        Hi = -H / (d * x)
        wi = a ** (1.0 / d) * d * Gi
        c0 = 0.5 * a ** (-(d - 1.0) / d)
        px = float(x @ p)
        px0 = float(x0 @ p)
        vi = c0 * (p * (G - H) + px * (Gi - Hi) - 2.0 * px0 * Gi)
        return wi + vi

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.d
        G = float(self._gm(x))
        H = 1.0 / G
        a, p, x0 = self.a, self.p, self.x0
        xi = x[:, None] * x[None, :]
        eye = np.eye(d)
        Gi = G / (d * x)
        Hi = -H / (d * x)
        Gij = G / (d * d * xi) - eye * (G / (d * x**2))
        Hij = H / (d * d * xi) + eye * (H / (d * x**2))
        wij = a ** (1.0 / d) * d * Gij
        c0 = 0.5 * a ** (-(d - 1.0) / d)
        px = float(x @ p)
        px0 = float(x0 @ p)
        vij = c0 * (
            p[:, None] * (Gi - Hi)[None, :]
            + p[None, :] * (Gi - Hi)[:, None]
            + px * (Gij - Hij)
            - 2.0 * px0 * Gij
        )
        return wij + vij

    def residual(self, x) -> float | np.ndarray:
        """prod_i u_xi - a - p.(x - x0), the defect of the expansion."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            grad = self.gradient(x)
            return float(np.prod(grad) - self.a - (x - self.x0) @ self.p)
        vals = np.empty(x.shape[0])
        for k in range(x.shape[0]):
            vals[k] = self.residual(x[k])
        return vals


def boundary_expansion(x0, a: float, p) -> BoundaryExpansion:
    return BoundaryExpansion(x0=np.asarray(x0, dtype=float), a=float(a),
                             p=np.asarray(p, dtype=float))


def variational_value(density: DensityField, polyline, quadrature_steps: int = 64) -> float:
    """Curve functional d * integral rho(gamma)^(1/d) (prod_i gamma_i')^(1/d) dt
    over a monotone polyline, by Gauss-Legendre quadrature per segment.

    Any monotone curve's value is a lower bound for the solution of
    prod u_xi = rho at the curve's endpoint.
    """
    pts = np.asarray(polyline, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("polyline needs at least two points")
    deltas = np.diff(pts, axis=0)
    if np.any(deltas < -1e-12):
        raise ValueError("polyline must be monotone nondecreasing")
    deltas = np.maximum(deltas, 0.0)
    d = pts.shape[1]
    xi, wq = np.polynomial.legendre.leggauss(quadrature_steps)
    xi = 0.5 * (xi + 1.0)  # map to (0, 1)
    wq = 0.5 * wq
    total = 0.0
    for seg in range(deltas.shape[0]):
        speed = float(np.prod(deltas[seg]) ** (1.0 / d))
        if speed == 0.0:
            continue
        samples = pts[seg][None, :] + xi[:, None] * deltas[seg][None, :]
        rho_vals = density(samples) ** (1.0 / d)
        total += d * speed * float(wq @ rho_vals)
    return total
