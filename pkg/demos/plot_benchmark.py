"""
Benchmarking the lower bound against the grid upper bound
=========================================================

On random Lipschitz PL functions, compare D with the brute-force upper
bound for d_G on every pair and report the mean absolute and relative
errors per group.
"""

from giph.dataset import GenSpec1D, generate_1d
from giph.operators import builtin_set
from giph.retrieval import benchmark

# Small sizes keep this quick; ``giph bench`` runs the full-size version.
functions = generate_1d(GenSpec1D(40, lipschitz_cap=5.0, seed=2024))
for group in ("G1", "G2", "G3", "G4", "G5"):
    r = benchmark(functions, group, builtin_set(group))
    print(
        "%s: %d pairs, mean dG %.3f, MAE %.3f, MRE %.3f, violations %d"
        % (r.group, r.pairs, r.mean_dG, r.MAE, r.MRE, r.violations)
    )
