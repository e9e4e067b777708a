"""From degrees of freedom to smoothing parameters.

Smoothness is specified as an effective degrees of freedom target per
interaction degree; the library converts that to one lambda per feature
through a spectral decomposition of the basis against its penalty.
"""

import numpy as np

from ahofm.basis import diff_penalty, eval_basis_matrix, make_spec
from ahofm.smoothing import dffun, dro, homogeneous_smoothing, sv2la

rng = np.random.default_rng(1)
x = rng.normal(size=400)
spec = make_spec(x, num_basis=10)
b = eval_basis_matrix(x, spec)
pen = diff_penalty(10, 2)

s = dro(b, pen)
print("singular values:", np.round(s.values, 4))
print("penalty null dimension:", s.null_dim)

# dffun maps lambda to effective df; sv2la inverts it
for df in (3.0, 5.0, 8.0, 10.0):
    lam = sv2la(s, df)
    print(f"df target {df:4.1f} -> lambda {lam:12.5g} "
          f"(round trip df {dffun(s, lam):.6f})")

# at huge lambda only the penalty null space survives
print("df at lambda=1e9:", round(dffun(s, 1e9), 4))

# one call builds the whole table for a model: every feature gets its own
# lambda per degree, replicated over that degree's latent factors
cols = [rng.normal(size=400), rng.uniform(0, 1, size=400)]
specs = [make_spec(c, num_basis=10, feature_index=j) for j, c in enumerate(cols)]
bases = [eval_basis_matrix(c, sp) for c, sp in zip(cols, specs)]
pens = [diff_penalty(10, 2) for _ in specs]
table = homogeneous_smoothing(bases, pens, {1: 5.0, 2: 4.0}, {2: 3})
print("table rows (degree, feature, factor, lambda, df target):")
for row in table.rows():
    print("  (%d, %d, %d, %.5g, %.1f)" % row)
