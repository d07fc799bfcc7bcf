#!/usr/bin/env python3
"""Sup-norm convergence study of the scaled depth function against the PDE
solution, on the rounded domain and on the full box."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from paretolab import io as plio
from paretolab.experiments import full_domain_rate_experiment, rate_experiment
from paretolab.hj import Grid
from paretolab.sampling import constant_density


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/rate_study")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--R", type=float, default=0.25)
    ap.add_argument("--grid", type=int, default=257)
    ap.add_argument("--ns", default="1e3,1e4,1e5,1e6")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ns = [int(float(v)) for v in args.ns.split(",")]
    grid = Grid(d=2, m=args.grid)
    dens = constant_density(1.0)

    upper, lower = rate_experiment(2, args.R, dens, ns, trials=args.trials,
                                   grid=grid, seed=args.seed)
    print(f"rounded domain R={args.R}: upper slope {upper.slope:.3f} "
          f"(theory {upper.theory_slope:.3f}), lower slope {lower.slope:.3f} "
          f"(theory {lower.theory_slope:.3f})")
    plio.write_summary_json(out / "rates.summary.json", {
        "upper": plio.rate_fit_summary(upper),
        "lower": plio.rate_fit_summary(lower),
    })
    plio.emit_plot(
        [("sup(u_n-u)+", upper.ns, upper.means),
         ("sup(u-u_n)+", lower.ns, lower.means)],
        "loglog", out / "rates.svg",
    )

    up_f, lo_f, field = full_domain_rate_experiment(
        2, dens, ns, trials=args.trials, grid=grid, seed=args.seed,
        collect_field=True)
    print(f"full box: upper slope {up_f.slope:.3f} (theory {up_f.theory_slope:.4f}), "
          f"lower slope {lo_f.slope:.3f} (theory {lo_f.theory_slope:.4f})")
    plio.write_summary_json(out / "rates_full.summary.json", {
        "upper": plio.rate_fit_summary(up_f),
        "lower": plio.rate_fit_summary(lo_f),
    })
    plio.write_gridfunction_csv(out / "rates_full.deviation.csv", field)


if __name__ == "__main__":
    main()
