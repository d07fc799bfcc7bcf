"""Command-line entry point.

Subcommands run the library's experiments and write CSV/JSON outputs plus a
config.echo.json with the exact resolved parameters. Configuration comes
from flags, from a JSON file via --config, or both (flags win).

Exit codes: 0 success, 2 configuration error, 3 runtime numeric failure.
"""

from __future__ import annotations

import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as plio
from .chains import nondominated_sort, pareto_depths, longest_chain
from .experiments import (
    boundary_sup_experiment,
    cell_problem_experiment,
    estimate_cd,
    fit_loglog,
    flag_preasymptotic,
    full_domain_rate_experiment,
    rate_experiment,
)
from .geometry import (
    MaskedDomain,
    Simplex,
    cover_boundary_tube,
    cover_simplex,
    rejection_sample_simplex,
    sample_tube_order_interval,
)
from .hj import Grid, NumericError, SolveSpec, solve_hj
from .regularity import semiconvexity_blowup_fit
from .sampling import (
    DensityField,
    SampleConfig,
    affine_density,
    bump_density,
    constant_density,
    rng_for,
    sample_iid,
    sample_poisson,
    unit_box,
)

OUT_ENV = "PARETOLAB_OUT"


class ConfigError(Exception):
    pass


def _to_int(v) -> int:
    return int(float(v))


def _to_float(v) -> float:
    return float(v)


def _to_int_list(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [_to_int(x) for x in v]
    return [_to_int(x) for x in str(v).split(",") if x]


def _to_float_list(v) -> list[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).split(",") if x]


_CASTS = {
    "d": _to_int,
    "n": _to_int,
    "trials": _to_int,
    "seed": _to_int,
    "workers": _to_int,
    "grid": _to_int,
    "quadrature": _to_int,
    "M": _to_float,
    "R": _to_float,
    "eps": _to_float,
    "rho0": _to_float,
    "c_d": _to_float,
    "ns": _to_int_list,
    "radii": _to_float_list,
    "p": _to_float_list,
    "eps_list": _to_float_list,
    "density": str,
    "input": str,
    "out": str,
    "mode": str,
}

# command -> (required keys, defaults)
_SPECS: dict[str, tuple[list[str], dict]] = {
    "sort": ([], {"density": "constant:1", "mode": "iid"}),
    "depth": ([], {"density": "constant:1", "mode": "iid"}),
    "chain": ([], {"density": "constant:1", "mode": "iid"}),
    "cell": (["d", "rho0", "p", "ns"], {"trials": 50}),
    "solve": (["d", "grid"], {"density": "constant:1", "M": 1.0}),
    "rates": (["d", "R", "ns"], {"density": "constant:1", "trials": 10, "grid": 257}),
    "rates-full": (["d", "ns"], {"density": "constant:1", "trials": 10, "grid": 257}),
    "cd": (["d", "n"], {"trials": 20}),
    "semiconvexity": (["d", "radii"], {"density": "constant:1", "grid": 257}),
    "boundary": (["d", "R", "eps", "n"], {"density": "constant:1", "trials": 10}),
    "cover-check": (["d"], {"eps_list": [0.2, 0.1, 0.05, 0.025], "R": 0.5, "eps": 0.1}),
}

_COMMON_DEFAULTS = {"seed": 0, "workers": 1}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        return cls(command=data["command"], params=dict(data["params"]))


def parse_config(argv: list[str]) -> RunConfig:
    """Resolve a RunConfig from CLI tokens; flags override --config values."""
    if not argv:
        raise ConfigError("missing command; one of " + ", ".join(sorted(_SPECS)))
    command, *rest = argv
    if command in ("-h", "--help"):
        raise ConfigError(_usage())
    if command not in _SPECS:
        raise ConfigError(f"unknown command: {command}")

    flags: dict[str, str] = {}
    it = iter(rest)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected token: {tok}")
        key = tok[2:].replace("-", "_")
        try:
            flags[key] = next(it)
        except StopIteration:
            raise ConfigError(f"flag --{key} needs a value") from None

    params: dict = {}
    if "config" in flags:
        path = flags.pop("config")
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        if data.get("command", command) != command:
            raise ConfigError(
                f"config file is for command {data.get('command')!r}, not {command!r}"
            )
        params.update(data.get("params", {}))
    params.update(flags)

    required, defaults = _SPECS[command]
    merged = {**_COMMON_DEFAULTS, **defaults, **params}
    for key in required:
        if key not in merged:
            raise ConfigError(f"missing key: {key}")
    out: dict = {}
    for key, val in merged.items():
        if key not in _CASTS:
            raise ConfigError(f"unknown key: {key}")
        try:
            out[key] = _CASTS[key](val)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for key: {key}") from None
    _validate_ranges(command, out)
    return RunConfig(command=command, params=out)


def _validate_ranges(command: str, p: dict) -> None:
    checks = [
        ("d", lambda v: v >= 2),
        ("n", lambda v: v >= 1),
        ("trials", lambda v: v >= 1),
        ("grid", lambda v: v >= 2),
        ("workers", lambda v: v >= 1),
        ("rho0", lambda v: v > 0),
        ("eps", lambda v: v > 0),
        ("R", lambda v: v >= 0),
    ]
    for key, ok in checks:
        if key in p and not ok(p[key]):
            raise ConfigError(f"out of range: {key}")
    if command in ("sort", "depth", "chain") and "input" not in p:
        for key in ("d", "n"):
            if key not in p:
                raise ConfigError(f"missing key: {key}")


def parse_density(spec: str, d: int, side: float = 1.0) -> DensityField:
    name, _, args = spec.partition(":")
    vals = [float(v) for v in args.split(",")] if args else []
    if name == "constant":
        return constant_density(vals[0] if vals else 1.0)
    if name == "affine":
        if len(vals) != d + 1:
            raise ConfigError(f"affine density needs 1+{d} parameters")
        return affine_density(vals[0], vals[1:], side=side)
    if name == "bump":
        if len(vals) != 3:
            raise ConfigError("bump density needs base,amplitude,width")
        return bump_density(vals[0], vals[1], vals[2], d=d, side=side)
    raise ConfigError(f"unknown density: {name}")


def _outdir(p: dict) -> Path:
    out = Path(p.get("out") or os.environ.get(OUT_ENV, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(cfg: RunConfig, out: Path) -> None:
    with open(out / "config.echo.json", "w") as fh:
        fh.write(cfg.to_json())
        fh.write("\n")


def _load_or_sample_cloud(p: dict):
    if "input" in p:
        return plio.read_cloud_csv(p["input"])
    d = p["d"]
    density = parse_density(p["density"], d)
    cfg = SampleConfig(n=p["n"], seed=p["seed"], mode=p["mode"], region=unit_box(d))
    if p["mode"] == "iid":
        return sample_iid(density, cfg)
    return sample_poisson(density, cfg)


def _cmd_sort(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    cloud = _load_or_sample_cloud(p)
    labeling = pareto_depths(cloud)
    fronts = nondominated_sort(cloud)
    name = cfg.command
    plio.write_labeling_csv(out / f"{name}.csv", cloud, labeling.depth,
                            fronts.front_index)
    plio.write_summary_json(out / f"{name}.summary.json", {
        "points": cloud.size,
        "fronts": len(fronts.fronts),
        "max_depth": int(labeling.depth.max()) if cloud.size else 0,
    })


def _cmd_chain(cfg: RunConfig, out: Path) -> None:
    cloud = _load_or_sample_cloud(cfg.params)
    length = longest_chain(cloud)
    plio.write_summary_json(out / "chain.summary.json",
                            {"points": cloud.size, "longest_chain": length})
    print(f"longest chain: {length}")


def _cmd_cd(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    t0 = time.time()
    est = estimate_cd(p["d"], p["n"], trials=p["trials"], seed=p["seed"],
                      workers=p["workers"])
    plio.write_trials_csv(out / "cd.csv", est.trials)
    from .chains import chain_constant_lower_bound

    plio.write_summary_json(out / "cd.summary.json", {
        "estimate": est.estimate,
        "ci_halfwidth": est.ci_halfwidth,
        "lower_bound": chain_constant_lower_bound(p["d"]),
        "upper_bound": float(np.e),
        "wall_time_s": time.time() - t0,
    })
    print(f"c_{p['d']} estimate: {est.estimate:.5f} +- {est.ci_halfwidth:.5f}")


def _cmd_cell(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    t0 = time.time()
    fit = cell_problem_experiment(p["d"], p["rho0"], p["p"], p["ns"],
                                  trials=p["trials"], seed=p["seed"],
                                  c_d=p.get("c_d"), workers=p["workers"])
    plio.write_trials_csv(out / "cell.csv", fit.trials)
    summary = plio.rate_fit_summary(fit)
    summary["flag_smallest_n"] = flag_preasymptotic(fit.ns, fit.stds)
    summary["wall_time_s"] = time.time() - t0
    plio.write_summary_json(out / "cell.summary.json", summary)
    plio.emit_plot([("std", fit.ns, fit.stds)], "loglog", out / "cell.svg")


def _cmd_solve(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    grid = Grid(d=p["d"], m=p["grid"], side=p["M"])
    density = parse_density(p["density"], p["d"], side=p["M"])
    mask = MaskedDomain(R=p["R"], M=p["M"]) if "R" in p and p["R"] > 0 else None
    gf = solve_hj(SolveSpec(density=density, mask=mask), grid)
    plio.write_gridfunction_csv(out / "solution.csv", gf)
    plio.write_gridfunction_binary(out / "solution.bin", gf)
    plio.write_summary_json(out / "solve.summary.json", {
        "max_value": float(gf.values.max()),
        "grid": p["grid"],
        "masked": mask is not None,
    })


def _write_rate_pair(out: Path, name: str, upper, lower) -> None:
    rows_u = sorted(upper.trials, key=lambda r: (r.n, r.trial_index))
    rows_l = sorted(lower.trials, key=lambda r: (r.n, r.trial_index))
    with open(out / f"{name}.csv", "w") as fh:
        fh.write("n,trial_index,seed,statistic_upper,statistic_lower\n")
        for ru, rl in zip(rows_u, rows_l):
            fh.write(f"{ru.n},{ru.trial_index},{ru.seed},"
                     f"{ru.statistic:.17g},{rl.statistic:.17g}\n")
    summary = {
        "upper": plio.rate_fit_summary(upper),
        "lower": plio.rate_fit_summary(lower),
        "flag_smallest_n_upper": flag_preasymptotic(upper.ns, upper.means),
        "flag_smallest_n_lower": flag_preasymptotic(lower.ns, lower.means),
    }
    plio.write_summary_json(out / f"{name}.summary.json", summary)
    plio.emit_plot(
        [("sup(u_n - u)+", upper.ns, upper.means),
         ("sup(u - u_n)+", lower.ns, lower.means)],
        "loglog", out / f"{name}.svg",
    )


def _cmd_rates(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    density = parse_density(p["density"], p["d"])
    grid = Grid(d=p["d"], m=p["grid"], side=1.0)
    upper, lower = rate_experiment(p["d"], p["R"], density, p["ns"],
                                   trials=p["trials"], grid=grid, seed=p["seed"],
                                   c_d=p.get("c_d"), workers=p["workers"])
    _write_rate_pair(out, "rates", upper, lower)


def _cmd_rates_full(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    density = parse_density(p["density"], p["d"])
    grid = Grid(d=p["d"], m=p["grid"], side=1.0)
    upper, lower, field = full_domain_rate_experiment(
        p["d"], density, p["ns"], trials=p["trials"], grid=grid, seed=p["seed"],
        c_d=p.get("c_d"), workers=p["workers"], collect_field=True)
    _write_rate_pair(out, "rates-full", upper, lower)
    plio.write_gridfunction_csv(out / "rates-full.deviation.csv", field)


def _cmd_semiconvexity(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    density = parse_density(p["density"], p["d"])
    grid = Grid(d=p["d"], m=p["grid"], side=1.0)
    fit = semiconvexity_blowup_fit(density, p["radii"], grid)
    plio.write_blowup_outputs(out / "semiconvexity", fit)
    plio.emit_plot([("constant", fit.radii, fit.constants)], "loglog",
                   out / "semiconvexity.svg")


def _cmd_boundary(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    density = parse_density(p["density"], p["d"])
    res = boundary_sup_experiment(p["d"], p["R"], p["eps"], density, p["n"],
                                  trials=p["trials"], seed=p["seed"],
                                  c_d=p.get("c_d"), workers=p["workers"])
    plio.write_trials_csv(out / "boundary.csv", res.trials)
    plio.write_summary_json(out / "boundary.summary.json", {
        "mean_tube_sup": res.statistic,
        "tube_bound": res.tube_bound,
        "pde_tube_sup": res.pde_tube_sup,
    })


def _cmd_cover_check(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    d = p["d"]
    rng = rng_for(p["seed"], "cover-check")
    simplex = Simplex(y=np.ones(d), p=np.ones(d))

    counts = []
    for eps in p["eps_list"]:
        cover = cover_simplex(simplex, eps)
        counts.append(len(cover))
    slope, _, _ = fit_loglog([1.0 / e for e in p["eps_list"]], counts)

    cover = cover_simplex(simplex, min(p["eps_list"]))
    pts = rejection_sample_simplex(simplex, 10000, rng)
    hit_rate = float(cover.covers_points(pts).mean())

    tube = cover_boundary_tube(p["R"], p["eps"], d)
    contained = 0
    total = 1000
    for _ in range(total):
        x, y = sample_tube_order_interval(p["R"], p["eps"], d, rng)
        if tube.member_containing(x, y) is not None:
            contained += 1
    payload = {
        "simplex_hit_rate": hit_rate,
        "count_growth_exponent": slope,
        "expected_exponent": d - 1,
        "tube_containment_rate": contained / total,
    }
    plio.write_summary_json(out / "cover-check.summary.json", payload)
    print(json.dumps(plio.jsonable(payload), indent=2))


_HANDLERS = {
    "sort": _cmd_sort,
    "depth": _cmd_sort,
    "chain": _cmd_chain,
    "cd": _cmd_cd,
    "cell": _cmd_cell,
    "solve": _cmd_solve,
    "rates": _cmd_rates,
    "rates-full": _cmd_rates_full,
    "semiconvexity": _cmd_semiconvexity,
    "boundary": _cmd_boundary,
    "cover-check": _cmd_cover_check,
}


def _usage() -> str:
    return "usage: paretolab <command> [--key value ...]; commands: " + \
        ", ".join(sorted(_SPECS))


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    out = _outdir(cfg.params)
    _echo(cfg, out)
    try:
        _HANDLERS[cfg.command](cfg, out)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
