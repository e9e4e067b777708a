"""B-spline bases on clamped knot vectors and difference penalties.

Each feature gets its own univariate spline basis. Knot vectors use
coincident boundary knots (degree + 1 copies at each end) with equidistant
interior knots, so the basis forms a partition of unity on the domain and
evaluation outside the domain is handled by clamping to the boundary.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline


@dataclass(frozen=True)
class SplineSpec:
    """Everything needed to evaluate one feature's spline basis."""

    feature_index: int
    degree: int
    num_basis: int
    penalty_order: int
    domain_lo: float
    domain_hi: float
    knots: np.ndarray = field(repr=False)

    @property
    def num_knots(self):
        return self.num_basis + self.degree + 1


@dataclass
class BasisMatrix:
    """Matrix of basis evaluations, one row per observation.

    Rows are nonnegative and sum to one. At most degree + 1 consecutive
    entries per row are nonzero (local support).
    """

    values: np.ndarray
    spec: SplineSpec

    @property
    def num_basis(self):
        return self.values.shape[1]


@dataclass
class PenaltyMatrix:
    """Squared difference penalty D'D of a given order.

    Positive semidefinite with null-space dimension equal to the order
    (polynomials of degree order - 1 are unpenalized).
    """

    values: np.ndarray
    order: int


def make_spec(column, num_basis=10, degree=3, penalty_order=2, feature_index=0):
    """Build a spline spec from observed feature values.

    The domain is the observed [min, max]. Interior knots are equidistant
    and boundary knots are repeated degree + 1 times.

    Parameters
    ----------
    column : array, shape (n,)
        Observed values of one feature.
    num_basis : int
        Number of basis functions M. Must satisfy M >= degree + 1.
    degree : int
        Spline degree (3 for cubic).
    penalty_order : int
        Order of the difference penalty associated with this basis.
    feature_index : int
        Position of the feature in the model, 0-based.
    """
    x = np.asarray(column, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("column must be a 1-d array with at least 2 values")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input in feature column")
    if num_basis < degree + 1:
        raise ValueError(f"num_basis must be at least degree + 1, got {num_basis}")
    if not 1 <= penalty_order < num_basis:
        raise ValueError(f"penalty_order must lie in [1, num_basis), got {penalty_order}")
    lo = float(x.min())
    hi = float(x.max())
    if lo == hi:
        raise ValueError(f"degenerate feature {feature_index}: fewer than 2 distinct values")
    n_interior = num_basis - degree - 1
    interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
    knots = np.concatenate([np.full(degree + 1, lo), interior, np.full(degree + 1, hi)])
    return SplineSpec(
        feature_index=feature_index,
        degree=degree,
        num_basis=num_basis,
        penalty_order=penalty_order,
        domain_lo=lo,
        domain_hi=hi,
        knots=knots,
    )


def eval_basis_matrix(column, spec):
    """Evaluate all basis functions at every value of `column`.

    Values outside [domain_lo, domain_hi] are clamped to the boundary, so
    the partition-of-unity property holds for every row.
    """
    x = np.asarray(column, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input in basis evaluation")
    x = np.clip(x, spec.domain_lo, spec.domain_hi)
    dm = BSpline.design_matrix(x, spec.knots, spec.degree, extrapolate=False)
    return BasisMatrix(values=dm.toarray(), spec=spec)


def eval_basis(x, spec):
    """Evaluate the basis at a single point, returning a length-M vector."""
    return eval_basis_matrix(np.atleast_1d(float(x)), spec).values[0]


def diff_penalty(num_basis, order=2):
    """Difference penalty P = D'D where D takes order-th differences.

    For order=1 and M=3 this is the familiar tridiagonal
    [[1,-1,0],[-1,2,-1],[0,-1,1]].
    """
    if not 1 <= order < num_basis:
        raise ValueError(f"order must lie in [1, num_basis), got {order}")
    d = np.diff(np.eye(num_basis), n=order, axis=0)
    return PenaltyMatrix(values=d.T @ d, order=order)
