"""
What operators can and cannot see
=================================

Three small constructions about the space of operators.
"""

import math

import numpy as np

from giph import PLFunction, sup_distance
from giph.checks import QUARTER_TURN, narrowing_tents
from giph.dataset import GenSpec1D, generate_1d
from giph.metrics import Rotation, construct_F_psi, d_match_sup, estimate_dF, mu_S, periodic_samples
from giph.operators import ConstantIntegral, ConstantMax

# Restricting the minimisation to a set that is not a group breaks the
# triangle inequality: with S = {identity, quarter turn} the sine is close
# to the cosine and the cosine to minus the sine, but sine and minus sine
# are sqrt(2) apart.
sin, cos = periodic_samples(np.sin), periodic_samples(np.cos)
S = [Rotation(0.0), QUARTER_TURN]
print("mu(sin, cos) = %.2e, mu(cos, -sin) = %.2e, mu(sin, -sin) = %.4f (sqrt 2 = %.4f)"
      % (mu_S(sin, cos, S), mu_S(cos, -sin, S), mu_S(sin, -sin, S), math.sqrt(2)))

# A single well-chosen operator recovers the natural pseudo-distance:
# F_psi maps f to the constant d_G(f, psi). With psi = f2 and the trivial
# group, D equals the sup distance.
f1, f2 = generate_1d(GenSpec1D(2, seed=5))
print("D with F_psi = %.6f, d_inf = %.6f" % (d_match_sup(f1, f2, [construct_F_psi(f2, sup_distance)]).value, sup_distance(f1, f2)))

# The operators "constant max" and "constant integral" are at distance 1
# (probe with ever narrower unit tents), yet no single function separates
# them by 1.
probes = narrowing_tents(200)
print("estimated distance between max and integral operators: %.4f" % estimate_dF(ConstantMax("max", "G5"), ConstantIntegral("integral", "G5"), probes))
print("narrowest probe: max %.1f, integral %.4f" % (probes[-1].sup_norm(), probes[-1].integral()))
