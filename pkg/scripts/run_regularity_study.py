#!/usr/bin/env python3
"""Blow-up of the semiconvexity and Lipschitz constants of the PDE solution
as the rounding radius shrinks."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from paretolab import io as plio
from paretolab.experiments import fit_loglog
from paretolab.geometry import MaskedDomain
from paretolab.hj import Grid, SolveSpec, solve_hj
from paretolab.regularity import (
    admissible_mask,
    lipschitz_constant,
    semiconvexity_blowup_fit,
)
from paretolab.sampling import affine_density


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/regularity_study")
    ap.add_argument("--grid", type=int, default=257)
    ap.add_argument("--radii", default="0.4,0.3,0.22,0.16")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    radii = [float(v) for v in args.radii.split(",")]
    grid = Grid(d=2, m=args.grid)
    dens = affine_density(1.0, [0.5, 0.25])

    fit = semiconvexity_blowup_fit(dens, radii, grid)
    print(f"semiconvexity blow-up slope {fit.slope:.3f} (theory -3), r2 {fit.r2:.3f}")
    plio.write_blowup_outputs(out / "semiconvexity", fit)
    plio.emit_plot([("constant", fit.radii, fit.constants)], "loglog",
                   out / "semiconvexity.svg")

    lips = []
    for R in radii:
        u = solve_hj(SolveSpec(density=dens, mask=MaskedDomain(R=R)), grid)
        lips.append(lipschitz_constant(u, domain=admissible_mask(grid, R, 2)))
    slope, _, r2 = fit_loglog(radii, lips)
    print(f"Lipschitz blow-up slope {slope:.3f} (theory -(d-1) = -1), r2 {r2:.3f}")
    plio.write_summary_json(out / "lipschitz.summary.json", {
        "radii": radii, "constants": lips, "slope": slope, "r2": r2,
        "theory_slope": -1.0,
    })
    plio.emit_plot([("lipschitz", np.array(radii), np.array(lips))], "loglog",
                   out / "lipschitz.svg")


if __name__ == "__main__":
    main()
