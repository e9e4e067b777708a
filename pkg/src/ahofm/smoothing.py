"""Degrees-of-freedom calibration of smoothing parameters.

The amount of penalization is specified on the degrees-of-freedom scale
and converted to a lambda per feature through a Demmler-Reinsch
orthogonalization: with B'B = R'R (Cholesky) and s the eigenvalues of
R^{-T} P R^{-1}, the effective degrees of freedom of the penalized
smoother are sum_j 1 / (1 + lambda * s_j). That scalar equation is
inverted by a uniroot (bisection) search on log10(lambda).

One lambda is computed per feature and interaction degree and replicated
across all latent factors of that degree, so every factor of a feature
receives an equal amount of penalization.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg


@dataclass
class DroSingularValues:
    """Eigenvalues of the penalty in the orthogonalized basis, descending."""

    values: np.ndarray
    feature_index: int = 0

    @property
    def null_dim(self):
        return int(np.sum(self.values == 0.0))


@dataclass
class SmoothingTable:
    """Lambda per (degree, feature, factor) plus the df targets that produced it."""

    lambdas: dict
    df_targets: dict

    def lam(self, degree, feature, factor=0):
        return self.lambdas[(degree, feature, factor)]

    def rows(self):
        """Table rows (degree, feature, factor, lambda, df_target), sorted."""
        out = []
        for (d, j, f) in sorted(self.lambdas):
            out.append((d, j, f, self.lambdas[(d, j, f)], self.df_targets[d]))
        return out


def _chol_gram(b_values):
    btb = b_values.T @ b_values
    try:
        return linalg.cholesky(btb)
    except linalg.LinAlgError:
        pass
    ridged = btb + 1e-10 * np.diag(np.diag(btb))
    try:
        return linalg.cholesky(ridged)
    except linalg.LinAlgError:
        raise ValueError("singular design: basis Gram matrix is not positive definite")


def dro(basis, penalty):
    """Demmler-Reinsch values for one feature's basis and penalty.

    Returns the eigenvalues of R^{-T} P R^{-1} (with B'B = R'R) sorted in
    descending order. Values below a relative threshold are snapped to
    exact zero; the count of zeros equals the penalty null-space dimension.
    """
    r = _chol_gram(basis.values)
    c = linalg.solve_triangular(r.T, penalty.values, lower=True)
    a = linalg.solve_triangular(r.T, c.T, lower=True)
    a = 0.5 * (a + a.T)
    s = linalg.eigvalsh(a)[::-1].copy()
    if s.size and s[0] > 0:
        s[s < s[0] * 1e-10] = 0.0
    else:
        s[:] = 0.0
    return DroSingularValues(values=s, feature_index=basis.spec.feature_index)


def _sv(s):
    return s.values if isinstance(s, DroSingularValues) else np.asarray(s, dtype=float)


def dffun(s, lam):
    """Effective degrees of freedom sum_j 1 / (1 + lam * s_j), i.e. tr(H)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return float(np.sum(1.0 / (1.0 + lam * _sv(s))))


def sv2la(s, df, tol=1e-8, max_iter=200):
    """Invert dffun: find lambda >= 0 with dffun(s, lambda) = df.

    dffun decreases monotonically from M at lambda=0 to the penalty
    null-space dimension as lambda grows, so df is reachable only on
    (null_dim, M]. df = M returns lambda = 0 exactly. The root is found
    by bisection on log10(lambda) over [-12, 12], widened if necessary.
    """
    sv = _sv(s)
    m = sv.size
    null_dim = int(np.sum(sv == 0.0))
    if not null_dim < df <= m:
        raise ValueError(
            f"unreachable df {df}: achievable interval is ({null_dim}, {m}]"
        )
    if df == m:
        return 0.0
    lo, hi = -12.0, 12.0
    while dffun(sv, 10.0 ** lo) < df and lo > -30:
        lo -= 6.0
    while dffun(sv, 10.0 ** hi) > df and hi < 30:
        hi += 6.0
    lam = 10.0 ** (0.5 * (lo + hi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        lam = 10.0 ** mid
        val = dffun(sv, lam)
        if abs(val - df) <= tol:
            return lam
        if val > df:
            lo = mid
        else:
            hi = mid
    return lam


def homogeneous_smoothing(bases, penalties, df_targets, factor_counts):
    """Degrees-of-freedom driven lambdas for every (degree, feature, factor).

    The Demmler-Reinsch values of each feature are computed once and then
    inverted for every degree's df target; the resulting lambda is shared
    by all factors of that degree (an equal amount of penalization per
    factor). Degree 1 covers the univariate coefficient blocks and always
    has a single factor slot.

    Parameters
    ----------
    bases : list of BasisMatrix, one per feature.
    penalties : list of PenaltyMatrix, aligned with `bases`.
    df_targets : dict mapping degree d >= 1 to the df target for that degree.
    factor_counts : dict mapping degree d >= 2 to the number of latent factors.
    """
    lambdas = {}
    for j, (basis, penalty) in enumerate(zip(bases, penalties)):
        s = dro(basis, penalty)
        for d in sorted(df_targets):
            try:
                lam = sv2la(s, df_targets[d])
            except ValueError as err:
                raise ValueError(f"feature {j}, degree {d}: {err}") from None
            count = 1 if d == 1 else factor_counts[d]
            for f in range(count):
                lambdas[(d, j, f)] = lam
    return SmoothingTable(lambdas=lambdas, df_targets=dict(df_targets))


def df_exact(basis, penalty, lam):
    """Exact effective degrees of freedom tr(2H - H'H) of one smoother.

    Agrees with dffun at lambda = 0 and exceeds tr(H) for lambda > 0.
    Intended as a reference quantity for diagnostics and tests, not used
    anywhere in the fitting path.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    btb = basis.values.T @ basis.values
    a = linalg.solve(btb + lam * penalty.values, btb, assume_a="pos")
    return float(2.0 * np.trace(a) - np.trace(a @ a))
