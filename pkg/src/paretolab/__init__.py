"""Numerical laboratory for nondominated sorting, longest chains in the
coordinatewise partial order, and the Hamilton-Jacobi equation that arises
as their continuum limit.

Submodules
----------
geometry     points, domains with a rounded-off corner, orthogonal simplices,
             and constructive rectangle covers
sampling     Poisson point processes, i.i.d. sampling, thinning couplings
chains       longest chains, Pareto depth, nondominated sorting
hj           monotone upwind solver for u_x1 * ... * u_xd = rho, closed forms,
             boundary expansions, variational lower bounds
regularity   inf-convolution, semiconvexity / Lipschitz measurements
experiments  Monte-Carlo harness: chain-constant estimates, rate studies
cli          command-line entry point and file I/O
"""

__version__ = "0.1.0"
