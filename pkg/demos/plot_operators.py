"""
Group-equivariant non-expansive operators
=========================================

Operators act on filtering functions, commute with a group of
reparametrizations and never increase sup-norm distances. Each builtin
set targets one subgroup of the affine maps of the line.
"""

import numpy as np

from giph import AffineMap, compose_affine
from giph.dataset import GenSpec1D, generate_1d
from giph.operators import apply, builtin_set, check_equivariance, check_nonexpansive

fs = generate_1d(GenSpec1D(20, seed=1))

# The builtin families: G1 (all affine maps) down to G5 (identity only).
for group in ("G1", "G2", "G3", "G4", "G5"):
    print(group, [op.name for op in builtin_set(group)])

# An affine-sup operator: F(f)(x) = sup_r sum_i w_i f(x + c_i r).
op = builtin_set("G1")[2]
out = apply(op, fs[0])
print("%s on %d nodes, range [%.3f, %.3f]" % (op.name, len(out.nodes), out.values.min(), out.values.max()))

# Equivariance: F(f o g) = F(f) o g for g in the operator's group.
g = AffineMap(-1.7, 0.4)
x = np.linspace(-1, 2, 7)
print("F(f o g) :", np.round(op.evaluate(compose_affine(fs[0], g), x), 6))
print("F(f) o g :", np.round(op.evaluate(fs[0], g(x)), 6))

# Non-expansiveness over a batch of pairs: the worst excess is <= 0.
pairs = list(zip(fs[::2], fs[1::2]))
for op in builtin_set("G3"):
    rng = np.random.default_rng(0)
    print(
        "%-4s excess %+.2e  equivariance error %.1e"
        % (op.name, check_nonexpansive(op, pairs), check_equivariance(op, [op.group.sample(rng)], fs[:3]))
    )
