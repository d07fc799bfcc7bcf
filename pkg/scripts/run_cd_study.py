#!/usr/bin/env python3
"""Estimate the chain growth constant for d = 2 and d = 3 over an n ladder
and write trial CSVs plus a summary with the rigorous bounds."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from paretolab import io as plio
from paretolab.chains import chain_constant_lower_bound
from paretolab.experiments import estimate_cd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/cd_study")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--max-n", type=float, default=1e6)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary = {}
    for d in (2, 3):
        ns = [10**k for k in range(3, int(np.log10(args.max_n)) + 1)]
        rows = []
        series = []
        for n in ns:
            est = estimate_cd(d, n, trials=args.trials, seed=args.seed)
            rows.extend(est.trials)
            series.append((n, est.estimate, est.ci_halfwidth))
            print(f"d={d} n={n:>8d}: {est.estimate:.5f} +- {est.ci_halfwidth:.5f}")
        plio.write_trials_csv(out / f"cd_d{d}.csv", rows)
        summary[f"d{d}"] = {
            "ns": [s[0] for s in series],
            "estimates": [s[1] for s in series],
            "ci_halfwidths": [s[2] for s in series],
            "lower_bound": chain_constant_lower_bound(d),
            "upper_bound": float(np.e),
        }
        plio.emit_plot(
            [(f"d={d}", [s[0] for s in series], [s[1] for s in series])],
            "linear", out / f"cd_d{d}.svg",
        )
    plio.write_summary_json(out / "cd_study.summary.json", summary)


if __name__ == "__main__":
    main()
