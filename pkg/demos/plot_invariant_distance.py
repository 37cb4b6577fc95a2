"""
A lower bound and an upper bound for the natural pseudo-distance
================================================================

The natural pseudo-distance d_G(f1, f2) is the infimum of ||f1 - f2 o g||
over a group G. The operator-based distance D (the sup over operators of
bottleneck distances) is a cheap lower bound; a brute-force search over a
grid of group elements gives an upper bound.
"""

from giph import AffineMap, compose_affine, sup_distance
from giph.dataset import GenSpec1D, generate_1d
from giph.metrics import GroupGrid, d_match_sup, natural_pseudo_distance
from giph.operators import builtin_set

f, h = generate_1d(GenSpec1D(2, seed=3))

# A reflected and translated copy of f is at distance zero for the
# isometry group G3, but not for the translations G4.
copy = compose_affine(f, AffineMap(-1.0, 1.2))
for group in ("G3", "G4"):
    D = d_match_sup(f, copy, builtin_set(group)).value
    dG = natural_pseudo_distance(f, copy, GroupGrid(group))
    print("%s: D = %.4f <= dG_upper = %.4f <= d_inf = %.4f" % (group, D, dG, sup_distance(f, copy)))

# The grid search is only an upper bound. The default refines around the
# single best element of the coarse pass (offset step 1), which here is a
# translation; refining around the best two also explores the reflection
# and finds the exact alignment.
dG, g = natural_pseudo_distance(f, copy, GroupGrid("G3", top_k=2), return_element=True)
print("G3 with top_k=2: dG_upper = %.2e at %s" % (dG, g))

# For two unrelated functions the sandwich D <= d_G <= d_inf holds at
# every level of the group chain; larger groups give smaller distances.
for group in ("G1", "G2", "G3", "G4", "G5"):
    res = d_match_sup(f, h, builtin_set(group))
    dG, g = natural_pseudo_distance(f, h, GroupGrid(group), return_element=True)
    print("%s: D = %.4f (argmax %s), dG_upper = %.4f at %s" % (group, res.value, res.argmax, dG, g))
