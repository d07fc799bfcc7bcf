"""Points, the coordinatewise partial order, rounded-corner box domains,
orthogonal simplices, and constructive rectangle covers."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import optimize

SURFACE_TOL = 1e-12  # tolerance on the geometric mean for surface membership


def as_point(x) -> np.ndarray:
    """Coerce to a 1-d float array and check finiteness."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"point must be 1-d, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has nonfinite coordinates")
    return p


def dominates(x, y) -> bool:
    """True iff x <= y in every coordinate (x is dominated by / below y)."""
    x = as_point(x)
    y = as_point(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return bool(np.all(x <= y))


def geometric_mean(x) -> float:
    """(x_1 * ... * x_d)^(1/d) for nonnegative coordinates."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return float(np.prod(x, axis=-1) ** (1.0 / d))


def geometric_mean_many(pts: np.ndarray) -> np.ndarray:
    """Row-wise geometric mean of a (k, d) array."""
    pts = np.asarray(pts, dtype=float)
    d = pts.shape[-1]
    return np.prod(pts, axis=-1) ** (1.0 / d)


@dataclass(frozen=True)
class MaskedDomain:
    """The box [0, M]^d with the corner region of geometric mean <= R removed.

    Membership uses the strict inequality (x_1...x_d)^(1/d) > R; points with
    geometric mean within SURFACE_TOL of R are considered on the surface.
    """

    R: float
    M: float = 1.0

    def __post_init__(self):
        if self.R < 0:
            raise ValueError("R must be >= 0")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.R >= self.M:
            raise ValueError("need R < M, otherwise the domain is empty")

    def contains(self, x) -> bool:
        x = as_point(x)
        if np.any(x < 0) or np.any(x > self.M):
            return False
        return geometric_mean(x) > self.R

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        inside_box = np.all((pts >= 0) & (pts <= self.M), axis=-1)
        return inside_box & (geometric_mean_many(pts) > self.R)

    def on_surface(self, x) -> bool:
        x = as_point(x)
        if np.any(x < 0) or np.any(x > self.M):
            return False
        return abs(geometric_mean(x) - self.R) <= SURFACE_TOL


def omega_contains(dom: MaskedDomain, x) -> bool:
    """True iff the geometric mean of x exceeds the rounding radius."""
    return dom.contains(x)


@dataclass(frozen=True)
class Simplex:
    """Orthogonal simplex with apex y and side length p_i along -e_i:
    {x <= y : 1 + sum_i (x_i - y_i)/p_i >= 0}."""

    y: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", as_point(self.y))
        object.__setattr__(self, "p", as_point(self.p))
        if self.y.shape != self.p.shape:
            raise ValueError("apex and side lengths must share a dimension")
        if np.any(self.p <= 0):
            raise ValueError("side lengths must be positive")

    @property
    def d(self) -> int:
        return self.y.shape[0]

    def contains(self, x) -> bool:
        x = as_point(x)
        if x.shape != self.y.shape:
            raise ValueError("dimension mismatch")
        if np.any(x > self.y):
            return False
        return 1.0 + float(np.sum((x - self.y) / self.p)) >= 0.0

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        below = np.all(pts <= self.y, axis=-1)
        slack = 1.0 + np.sum((pts - self.y) / self.p, axis=-1)
        return below & (slack >= 0.0)


def simplex_measure(s: Simplex) -> float:
    """Lebesgue measure p_1*...*p_d / d^d."""
    d = s.d
    return float(np.prod(s.p)) / d**d


def simplex_contains(s: Simplex, x) -> bool:
    return s.contains(x)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box [lower, upper]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", as_point(self.lower))
        object.__setattr__(self, "upper", as_point(self.upper))
        if not np.all(self.lower < self.upper):
            raise ValueError("need lower < upper componentwise")

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=-1)

    def measure(self) -> float:
        return float(np.prod(self.upper - self.lower))


@dataclass
class RectCollection:
    rects: list[Rect] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rects)

    def covers_points(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask: point lies in at least one rectangle."""
        pts = np.asarray(pts, dtype=float)
        hit = np.zeros(pts.shape[0], dtype=bool)
        for r in self.rects:
            hit |= r.contains_points(pts)
        return hit


def dist_to_curved_boundary(dom: MaskedDomain, x) -> float:
    """Euclidean distance from x to {(x_1...x_d)^(1/d) = R} within [0, M]^d.

    Minimizes |x - s|^2 over the surface with multi-start SLSQP on the
    log-coordinate constraint sum_i log s_i = d log R; accurate to ~1e-6
    relative.
    """
    x = as_point(x)
    d = x.shape[0]
    R, M = dom.R, dom.M
    gm = geometric_mean(x)
    if gm < R - SURFACE_TOL or np.any(x < -SURFACE_TOL) or np.any(x > M + SURFACE_TOL):
        raise ValueError("point outside the closed domain")
    if R == 0:
        # the surface degenerates to the union of coordinate hyperplanes
        return float(np.min(x))
    if abs(gm - R) <= SURFACE_TOL:
        return 0.0

    target = d * np.log(R)
    lo = R**d / M ** (d - 1)  # smallest admissible surface coordinate

    def objective(s):
        diff = s - x
        return float(diff @ diff), 2.0 * diff

    constraint = {
        "type": "eq",
        "fun": lambda s: np.sum(np.log(s)) - target,
        "jac": lambda s: 1.0 / s,
    }
    bounds = [(lo, M)] * d

    rng = np.random.default_rng(12345)
    best = np.inf
    starts = [np.clip(x * (R / gm), lo, M)]
    for _ in range(7):
        t = rng.uniform(np.log(lo), np.log(M), size=d)
        s0 = np.exp(t - (np.sum(t) - target) / d)
        starts.append(np.clip(s0, lo, M))
    for s0 in starts:
        res = optimize.minimize(
            objective,
            s0,
            jac=True,
            bounds=bounds,
            constraints=[constraint],
            method="SLSQP",
            options={"maxiter": 200, "ftol": 1e-16},
        )
        if res.fun < best and abs(np.sum(np.log(res.x)) - target) < 1e-8:
            best = res.fun
    return float(np.sqrt(best))


def _diagonal_face_lattice(d: int, eps: float) -> np.ndarray:
    """Lattice points x_0 + eps*Z^d on the hyperplane sum(z) = 1, kept when
    all coordinates lie in [-eps, 1 + eps]; x_0 is the face barycenter."""
    x0 = np.full(d, 1.0 / d)
    if eps >= 1.0:
        return x0[None, :]
    k_lo = int(np.floor((-eps - 1.0 / d) / eps)) - 1
    k_hi = int(np.ceil((1.0 + eps - 1.0 / d) / eps)) + 1
    pts = []
    for k_head in product(range(k_lo, k_hi + 1), repeat=d - 1):
        k_last = -sum(k_head)
        if k_last < k_lo or k_last > k_hi:
            continue
        z = x0 + eps * np.array(k_head + (k_last,), dtype=float)
        if np.all(z >= -eps - 1e-12) and np.all(z <= 1.0 + eps + 1e-12):
            pts.append(z)
    return np.array(pts)


def cover_simplex(s: Simplex, eps: float) -> RectCollection:
    """Constructive rectangle cover of an orthogonal simplex.

    In the coordinates z_i = (y_i - x_i)/p_i the simplex is the standard one
    {z >= 0 : z.1 <= 1}. Rectangles are [0, z* + eps*1] for lattice translates
    z* of the diagonal-face barycenter; negative lattice coordinates are
    clamped to 0, which enlarges nothing and keeps every corner admissible.
    The union always covers the simplex, each rectangle has measure^(1/d)
    between eps and about 1/d + 2*eps, and the count grows like eps^-(d-1).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = s.d
    anchors = _diagonal_face_lattice(d, eps)
    rects = []
    for z in anchors:
        upper_std = np.maximum(z, 0.0) + eps
        # map the standard-coordinate box [0, upper_std] back through
        # x = y - p * z (orientation reverses)
        lower = s.y - s.p * upper_std
        rects.append(Rect(lower=lower, upper=s.y.copy()))
    return RectCollection(rects)


def default_tube_spacing(R: float, eps: float, d: int) -> float:
    """Lattice spacing for the boundary-tube cover: moving 2h along the
    diagonal changes the geometric mean by at most eps inside the shell."""
    return R ** (d - 1) * eps / 2 ** (2 * d + 1)


@dataclass(frozen=True)
class BoundaryTubeCover:
    """Rectangle cover of order intervals inside the shell R < gm <= R + eps.

    The collection is the set of boxes [h*a, h*b] with integer corners inside
    the enlarged shell B = {x in [0,2]^d : R - eps <= gm(x) <= R + 2 eps}.
    It is represented implicitly through the lattice spacing h: the full set
    of corner pairs is astronomically large at the default spacing, while the
    member enclosing a given order interval is computable in O(d).
    """

    R: float
    eps: float
    d: int
    h: float

    def in_shell(self, x: np.ndarray) -> bool:
        x = as_point(x)
        if np.any(x < 0) or np.any(x > 2.0):
            return False
        g = geometric_mean(x)
        return self.R - self.eps <= g <= self.R + 2 * self.eps

    def member_containing(self, x, y) -> Rect | None:
        """The canonical collection member enclosing the order interval
        [x, y], or None if no member contains it."""
        x = as_point(x)
        y = as_point(y)
        if not np.all(x <= y):
            raise ValueError("need x <= y componentwise")
        h = self.h
        lower = h * (np.floor(x / h) - 1.0)
        upper = h * (np.ceil(y / h) + 1.0)
        # gm is monotone in each coordinate, so corner checks suffice
        if np.any(lower < 0) or np.any(upper > 2.0):
            return None
        if geometric_mean(lower) < self.R - self.eps:
            return None
        if geometric_mean(upper) > self.R + 2 * self.eps:
            return None
        return Rect(lower=lower, upper=upper)

    def materialize(self, limit: int = 200000) -> RectCollection:
        """Enumerate the full pair collection; only feasible for coarse
        spacings. Raises if more than `limit` corners would be scanned."""
        axis = np.arange(0.0, 2.0 + self.h, self.h)
        grids = np.meshgrid(*([axis] * self.d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        g = geometric_mean_many(pts)
        corners = pts[(g >= self.R - self.eps) & (g <= self.R + 2 * self.eps)]
        if corners.shape[0] ** 2 > limit:
            raise ValueError(
                f"{corners.shape[0]}^2 corner pairs exceed limit={limit}; "
                "use member_containing instead"
            )
        rects = []
        # gm is monotone, so any corner pair inside the shell bounds a box
        # that stays inside the shell
        for a in corners:
            for b in corners:
                if np.all(a < b):
                    rects.append(Rect(lower=a.copy(), upper=b.copy()))
        return RectCollection(rects)


def rejection_sample_simplex(s: Simplex, k: int, rng: np.random.Generator) -> np.ndarray:
    """k points uniform in the simplex, by rejection from the unit box in the
    normalized coordinates z = (y - x)/p."""
    d = s.d
    chunks = []
    have = 0
    while have < k:
        z = rng.random((max(4 * (k - have), 256), d))
        z = z[z.sum(axis=1) <= 1.0]
        chunks.append(z)
        have += z.shape[0]
    z = np.concatenate(chunks)[:k]
    return s.y - s.p * z


def sample_tube_order_interval(
    R: float, eps: float, d: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Random order interval [x, y] (x <= y) contained in the tube
    {R < gm <= R + eps} within the unit box."""
    while True:
        x = rng.random(d)
        g = geometric_mean(x)
        if R < g <= R + eps:
            break
    s = rng.random(d) * 0.3
    y = np.minimum(x * (1.0 + s), 1.0)
    if geometric_mean(y) > R + eps:
        # shrink the growth toward x until the upper corner re-enters;
        # gm(x * (1 + t s)) is increasing in t and equals gm(x) at t = 0
        t_lo, t_hi = 0.0, 1.0
        for _ in range(60):
            t = 0.5 * (t_lo + t_hi)
            cand = np.minimum(x * (1.0 + t * s), 1.0)
            if geometric_mean(cand) > R + eps:
                t_hi = t
            else:
                t_lo = t
        y = np.minimum(x * (1.0 + t_lo * s), 1.0)
    return x, y


def cover_boundary_tube(
    R: float, eps: float, d: int, spacing: float | None = None
) -> BoundaryTubeCover:
    """Lattice-backed cover of the boundary tube; see BoundaryTubeCover."""
    if not (0 < R <= 0.5):
        raise ValueError("need R in (0, 1/2]")
    if not (0 < eps <= R / 2):
        raise ValueError("need 0 < eps <= R/2")
    if d < 2:
        raise ValueError("need d >= 2")
    h = default_tube_spacing(R, eps, d) if spacing is None else float(spacing)
    if h <= 0:
        raise ValueError("spacing must be positive")
    return BoundaryTubeCover(R=R, eps=eps, d=d, h=h)
