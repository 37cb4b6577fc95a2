"""
Persistence diagrams of piecewise-linear functions
==================================================

Build a few exact PL functions, compute their degree-0 sublevel-set
diagrams and compare them with the bottleneck distance.
"""

import numpy as np

from giph import PLFunction, bottleneck_distance, diagram_of_pl, sup_distance

# A "W" shape: two valleys separated by a low ridge. The deeper valley is
# born first and never dies; the shallow one is born at -0.5 and merges
# with the deep one when the sublevel set crosses the ridge at 0.2.
w = PLFunction([0, 0.25, 0.5, 0.75, 1], [0, -1, 0.2, -0.5, 0])
print("W shape:", diagram_of_pl(w))

# Sublevel topology of a PL function only changes at breakpoints, so the
# diagram does not depend on the sampling resolution.
print("same diagram at 16 and 4096 nodes:", diagram_of_pl(w, 16) == diagram_of_pl(w, 4096))

# Two unit bumps on disjoint intervals: far apart in sup-norm, but the
# diagrams cannot tell them apart.
f1, f2 = PLFunction.tent(0.25, 1, 0.2), PLFunction.tent(0.75, 1, 0.2)
print("sup distance:", sup_distance(f1, f2))
print("bottleneck distance:", bottleneck_distance(diagram_of_pl(f1), diagram_of_pl(f2)))

# Stability: moving a function by eps in sup-norm moves its diagram by at
# most eps in bottleneck distance.
rng = np.random.default_rng(0)
noisy = PLFunction(w.xs, w.ys + np.r_[0, rng.uniform(-0.05, 0.05, 3), 0])
print(
    "bottleneck %.4f <= sup %.4f"
    % (bottleneck_distance(diagram_of_pl(w), diagram_of_pl(noisy)), sup_distance(w, noisy))
)
