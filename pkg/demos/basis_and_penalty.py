"""Spline bases and difference penalties on a toy feature.

Walks through what the model builds for every feature: a clamped cubic
B-spline basis sized to the observed range, and a squared difference
penalty on its coefficients.
"""

import numpy as np

from ahofm.basis import diff_penalty, eval_basis_matrix, make_spec

rng = np.random.default_rng(0)
x = rng.uniform(0.0, 10.0, size=200)

spec = make_spec(x, num_basis=8)
print("feature range:", (round(spec.domain_lo, 3), round(spec.domain_hi, 3)))
print("knot vector:", np.round(spec.knots, 3))

# each row of the basis matrix is one observation evaluated in all 8
# functions; rows always sum to one and at most degree+1 entries are active
b = eval_basis_matrix(x, spec)
row_sums = b.values.sum(axis=1)
active = (b.values > 1e-12).sum(axis=1)
print("row sums in [%.15f, %.15f]" % (row_sums.min(), row_sums.max()))
print("active functions per row:", sorted(set(active)))

# values outside the training range are clamped to the boundary
outside = eval_basis_matrix(np.array([-5.0, 15.0]), spec)
boundary = eval_basis_matrix(np.array([spec.domain_lo, spec.domain_hi]), spec)
print("clamping matches boundary rows:",
      np.allclose(outside.values, boundary.values))

# the order-2 penalty charges curvature: linear coefficient sequences are
# free, wiggly ones are not
pen = diff_penalty(8, 2).values
linear = np.linspace(0.0, 1.0, 8)
wiggly = np.array([0, 1, 0, 1, 0, 1, 0, 1.0])
print("penalty(linear coefs) =", abs(round(float(linear @ pen @ linear), 12)))
print("penalty(wiggly coefs) =", round(float(wiggly @ pen @ wiggly), 3))
