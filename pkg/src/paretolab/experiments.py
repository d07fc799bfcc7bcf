"""Monte-Carlo harness: chain-constant estimation, cell-problem rates,
sup-norm convergence studies, boundary tube statistics, and log-log fits.

Every experiment is a pure function of its arguments: per-trial randomness
comes from substream seeds hashed from (master seed, n, trial index, tag),
trials are independent jobs safe to run on worker threads, and aggregation
is ordered by (n, trial index) so outputs do not depend on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chains import ChainScalingConstants, chain_depths, longest_chain, scaled_depth
from .geometry import MaskedDomain, Simplex, geometric_mean_many, simplex_measure
from .hj import Grid, GridFunction, SolveSpec, exact_constant_solution, solve_hj
from .regularity import admissible_mask
from .sampling import Box, DensityField, SampleConfig, constant_density, sample_poisson


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    seed: int
    statistic: float
    n: int


@dataclass
class RateFitResult:
    ns: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    slope: float
    intercept: float
    r2: float
    theory_slope: float
    trials: list[TrialResult] = field(default_factory=list, repr=False)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ns = np.asarray(self.ns)
        if np.any(np.diff(self.ns) <= 0):
            raise ValueError("ns must be strictly increasing")
        self.means = np.asarray(self.means, dtype=float)
        self.stds = np.asarray(self.stds, dtype=float)
        if np.any(self.stds < 0):
            raise ValueError("stds must be >= 0")


def fit_loglog(xs, ys) -> tuple[float, float, float]:
    """Least-squares slope, intercept, and r^2 of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 3:
        raise ValueError("need at least 3 paired values")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)


def _fit_or_nan(xs, ys) -> tuple[float, float, float]:
    """fit_loglog, degrading to NaNs when the ladder is too short or the data
    touches zero."""
    try:
        return fit_loglog(xs, ys)
    except ValueError:
        return float("nan"), float("nan"), float("nan")


def flag_preasymptotic(ns, means) -> bool:
    """True when the smallest-n point sits more than 2 sigma off the line
    fitted through the remaining points, hinting that it is outside the
    asymptotic regime. Needs at least 4 ladder points to judge."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    if ns.size < 4 or np.any(means <= 0):
        return False
    lx, ly = np.log(ns), np.log(means)
    s, b = np.polyfit(lx[1:], ly[1:], 1)
    resid_rest = ly[1:] - (s * lx[1:] + b)
    sigma = max(float(np.std(resid_rest)), 1e-12)  # floor guards exact fits
    return bool(abs(ly[0] - (s * lx[0] + b)) > 2.0 * sigma)


def _run_ordered(jobs, fn, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def _resolve_constants(d: int, c_d: float | None, ns, seed: int,
                       workers: int = 1):
    """c_2 = 2 is built in; for d >= 3 use the supplied value or estimate it
    at the largest configured n."""
    if c_d is not None:
        return ChainScalingConstants(c_d=float(c_d), d=d), None
    if d == 2:
        return ChainScalingConstants.for_dimension(2), None
    est = estimate_cd(d, int(max(ns)), trials=10, seed=seed, workers=workers)
    return ChainScalingConstants(c_d=est.estimate, d=d), est


@dataclass
class CdEstimate:
    estimate: float
    ci_halfwidth: float
    d: int
    n: int
    trials: list[TrialResult] = field(default_factory=list, repr=False)

    def __iter__(self):
        yield self.estimate
        yield self.ci_halfwidth


def estimate_cd(d: int, n: int, trials: int = 20, seed: int = 0,
                workers: int = 1) -> CdEstimate:
    """Mean and 95% normal CI of n^(-1/d) * (longest chain) over independent
    unit-intensity samples on [0,1]^d."""
    if d < 2:
        raise ValueError("need d >= 2")
    if trials < 2:
        raise ValueError("need at least 2 trials")
    rho = constant_density(1.0)
    box = Box(np.zeros(d), np.ones(d))

    def one(trial: int) -> TrialResult:
        cfg = SampleConfig(n=n, seed=seed, region=box, purpose=("cd", d, trial))
        cloud = sample_poisson(rho, cfg)
        stat = n ** (-1.0 / d) * longest_chain(cloud)
        return TrialResult(trial_index=trial, seed=cfg.seed, statistic=stat, n=n)

    rows = _run_ordered(range(trials), one, workers)
    stats = np.array([r.statistic for r in rows])
    est = float(stats.mean())
    ci = 1.96 * float(stats.std(ddof=1)) / np.sqrt(trials)
    return CdEstimate(estimate=est, ci_halfwidth=ci, d=d, n=n, trials=rows)


def cell_problem_experiment(d: int, rho0: float, p, ns, trials: int = 50,
                            seed: int = 0, c_d: float | None = None,
                            workers: int = 1) -> RateFitResult:
    """Scaled longest chain in the orthogonal simplex with side lengths p
    under constant density rho0, over a ladder of intensities.

    The limit is d * rho0^(1/d) * |S|^(1/d); the returned slope is the
    log-log rate of the trial standard deviation (theory: -1/(2d)), and the
    bias fit |mean - limit| vs n is stored in extras.
    """
    p = np.asarray(p, dtype=float)
    ns = sorted(int(v) for v in ns)
    simplex = Simplex(y=p.copy(), p=p.copy())
    msr = simplex_measure(simplex)
    if d * msr ** (1.0 / d) > 1.0 + 1e-12:
        raise ValueError("need d * |S|^(1/d) <= 1")
    limit = d * rho0 ** (1.0 / d) * msr ** (1.0 / d)
    consts, est = _resolve_constants(d, c_d, ns, seed, workers)
    rho = constant_density(rho0)
    box = Box(np.zeros(d), p.copy())

    def one(job) -> TrialResult:
        n, trial = job
        cfg = SampleConfig(n=n, seed=seed, region=box, purpose=("cell", n, trial))
        cloud = sample_poisson(rho, cfg)
        pts = cloud.points[simplex.contains_points(cloud.points)]
        stat = scaled_depth(longest_chain(pts), n, consts)
        return TrialResult(trial_index=trial, seed=cfg.seed, statistic=stat, n=n)

    jobs = [(n, t) for n in ns for t in range(trials)]
    rows = _run_ordered(jobs, one, workers)
    means, stds = _aggregate(rows, ns)
    slope, intercept, r2 = _fit_or_nan(ns, stds)
    extras = {"limit": limit, "measure": msr}
    bias = np.abs(means - limit)
    if np.all(bias > 0):
        extras["bias_fit"] = _fit_or_nan(ns, bias)
    if est is not None:
        extras["c_d_estimate"] = (est.estimate, est.ci_halfwidth)
    return RateFitResult(ns=np.array(ns), means=means, stds=stds, slope=slope,
                         intercept=intercept, r2=r2, theory_slope=-1.0 / (2 * d),
                         trials=rows, extras=extras)


def _aggregate(rows: list[TrialResult], ns) -> tuple[np.ndarray, np.ndarray]:
    means, stds = [], []
    for n in ns:
        vals = np.array([r.statistic for r in rows if r.n == n])
        means.append(vals.mean())
        stds.append(vals.std(ddof=1) if vals.size > 1 else 0.0)
    return np.array(means), np.array(stds)


def _depth_grid_scaled(cloud, grid: Grid, mask, n: int,
                       consts: ChainScalingConstants) -> np.ndarray:
    from .chains import depth_on_grid

    U = depth_on_grid(cloud, grid, mask=mask)
    return scaled_depth(U.values, n, consts)


def rate_experiment(d: int, R: float, density: DensityField, ns, trials: int = 10,
                    grid: Grid | None = None, seed: int = 0,
                    c_d: float | None = None, workers: int = 1
                    ) -> tuple[RateFitResult, RateFitResult]:
    """One-sided sup-norm gaps between the scaled depth function and the PDE
    solution on the rounded domain, over an intensity ladder.

    Returns (upper, lower) fits for sup(u_n - u)_+ and sup(u - u_n)_+ over
    nodes with geometric mean > R + 2h; recorded theory slopes are -1/(4d)
    and -1/(3d).
    """
    if not (0 < R <= 0.5):
        raise ValueError("need R in (0, 1/2]")
    if grid is None:
        grid = Grid(d=d, m=257, side=1.0)
    if grid.h > R / 16.0:
        raise ValueError(f"grid too coarse: h={grid.h:g} > R/16={R / 16.0:g}")
    ns = sorted(int(v) for v in ns)
    consts, est = _resolve_constants(d, c_d, ns, seed, workers)
    mask = MaskedDomain(R=R, M=grid.side)
    u = solve_hj(SolveSpec(density=density, mask=mask), grid)
    adm = admissible_mask(grid, R, 2)
    box = Box(np.zeros(d), np.full(d, grid.side))

    def one(job) -> tuple[TrialResult, TrialResult]:
        n, trial = job
        cfg = SampleConfig(n=n, seed=seed, region=box, purpose=("rate", R, n, trial))
        cloud = sample_poisson(density, cfg)
        un = _depth_grid_scaled(cloud, grid, mask, n, consts)
        gap = un - u.values
        upper = max(0.0, float(gap[adm].max()))
        lower = max(0.0, float((-gap)[adm].max()))
        return (
            TrialResult(trial_index=trial, seed=cfg.seed, statistic=upper, n=n),
            TrialResult(trial_index=trial, seed=cfg.seed, statistic=lower, n=n),
        )

    jobs = [(n, t) for n in ns for t in range(trials)]
    pairs = _run_ordered(jobs, one, workers)
    rows_up = [p[0] for p in pairs]
    rows_lo = [p[1] for p in pairs]
    out = []
    for rows, theory in ((rows_up, -1.0 / (4 * d)), (rows_lo, -1.0 / (3 * d))):
        means, stds = _aggregate(rows, ns)
        slope, intercept, r2 = _fit_or_nan(ns, means)
        extras = {"R": R}
        if est is not None:
            extras["c_d_estimate"] = (est.estimate, est.ci_halfwidth)
        out.append(RateFitResult(ns=np.array(ns), means=means, stds=stds,
                                 slope=slope, intercept=intercept, r2=r2,
                                 theory_slope=theory, trials=rows, extras=extras))
    return out[0], out[1]


def full_domain_rate_experiment(d: int, density: DensityField, ns,
                                trials: int = 10, grid: Grid | None = None,
                                seed: int = 0, c_d: float | None = None,
                                workers: int = 1, collect_field: bool = False):
    """Sup-norm study on the full box (no rounding): the corner singularity
    makes the proved exponents much smaller, 1/(2d^3 + d^2 + 5d + 1) and
    1/(2d^3 - d^2 + 3d + 1).

    With collect_field=True also returns the mean (v - v_n) node field at the
    largest n, useful as a diagnostic heat map.
    """
    if grid is None:
        grid = Grid(d=d, m=257, side=1.0)
    ns = sorted(int(v) for v in ns)
    consts, est = _resolve_constants(d, c_d, ns, seed, workers)
    v = solve_hj(SolveSpec(density=density), grid)
    box = Box(np.zeros(d), np.full(d, grid.side))
    theory_up = -1.0 / (2 * d**3 + d**2 + 5 * d + 1)
    theory_lo = -1.0 / (2 * d**3 - d**2 + 3 * d + 1)

    n_top = max(ns)
    field_sum = np.zeros_like(v.values)
    field_count = 0

    def one(job):
        n, trial = job
        cfg = SampleConfig(n=n, seed=seed, region=box, purpose=("ratefull", n, trial))
        cloud = sample_poisson(density, cfg)
        vn = _depth_grid_scaled(cloud, grid, None, n, consts)
        gap = vn - v.values
        upper = max(0.0, float(gap.max()))
        lower = max(0.0, float((-gap).max()))
        return n, trial, upper, lower, (-gap if (collect_field and n == n_top) else None)

    jobs = [(n, t) for n in ns for t in range(trials)]
    results = _run_ordered(jobs, one, workers)
    rows_up, rows_lo = [], []
    for n, trial, upper, lower, fld in results:
        rows_up.append(TrialResult(trial_index=trial, seed=seed, statistic=upper, n=n))
        rows_lo.append(TrialResult(trial_index=trial, seed=seed, statistic=lower, n=n))
        if fld is not None:
            field_sum += fld
            field_count += 1
    out = []
    for rows, theory in ((rows_up, theory_up), (rows_lo, theory_lo)):
        means, stds = _aggregate(rows, ns)
        slope, intercept, r2 = _fit_or_nan(ns, means)
        extras = {}
        if est is not None:
            extras["c_d_estimate"] = (est.estimate, est.ci_halfwidth)
        out.append(RateFitResult(ns=np.array(ns), means=means, stds=stds,
                                 slope=slope, intercept=intercept, r2=r2,
                                 theory_slope=theory, trials=rows, extras=extras))
    if collect_field:
        mean_field = GridFunction(grid=grid, values=field_sum / max(field_count, 1))
        return out[0], out[1], mean_field
    return out[0], out[1]


@dataclass
class BoundarySupResult:
    statistic: float  # mean over trials of the tube sup of u_n
    trial_stats: np.ndarray
    tube_bound: float  # d * rho_max^(1/d) * eps
    pde_tube_sup: float | None  # exact for constant density, else None
    trials: list[TrialResult] = field(default_factory=list, repr=False)


def boundary_sup_experiment(d: int, R: float, eps: float, density: DensityField,
                            n: int, trials: int = 10, seed: int = 0,
                            c_d: float | None = None, workers: int = 1
                            ) -> BoundarySupResult:
    """Sup of the scaled depth over the tube R < gm <= R + eps.

    Any chain below a tube point stays in the tube, so the sup is attained at
    sample points and needs no grid. The PDE solution obeys the exact bound
    d * rho_max^(1/d) * eps on the same tube.
    """
    if not (0 < eps <= R):
        raise ValueError("need 0 < eps <= R")
    consts, _ = _resolve_constants(d, c_d, [n], seed, workers)
    mask = MaskedDomain(R=R, M=1.0)
    box = Box(np.zeros(d), np.ones(d))

    def one(trial: int) -> TrialResult:
        cfg = SampleConfig(n=n, seed=seed, region=box,
                           purpose=("boundary", R, eps, trial))
        cloud = sample_poisson(density, cfg)
        pts = cloud.points[mask.contains_points(cloud.points)]
        stat = 0.0
        if pts.shape[0]:
            depths = chain_depths(pts)
            in_tube = geometric_mean_many(pts) <= R + eps
            if in_tube.any():
                stat = float(scaled_depth(int(depths[in_tube].max()), n, consts))
        return TrialResult(trial_index=trial, seed=cfg.seed, statistic=stat, n=n)

    rows = _run_ordered(range(trials), one, workers)
    stats = np.array([r.statistic for r in rows])
    bound = d * density.rho_max ** (1.0 / d) * eps
    pde_sup = None
    if density.rho_min == density.rho_max:
        # exact solution d*rho^(1/d)*(gm - R) peaks at gm = R + eps
        pde_sup = exact_constant_solution(density.rho_max, R, np.full(d, R + eps))
    return BoundarySupResult(statistic=float(stats.mean()), trial_stats=stats,
                             tube_bound=bound, pde_tube_sup=pde_sup, trials=rows)
