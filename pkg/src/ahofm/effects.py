"""Interpretation exports: interaction surfaces and marginal effect curves.

The fitted interaction of a feature subset J with |J| = d is the
reconstruction sum_f prod_{j in J} phi_{j,f}(x_j), a direct readout of the
degree-d latent blocks. Bivariate surfaces are evaluated on grids; for
higher-order terms a marginal view fixes one feature on a grid and
averages the reconstruction over quasi-random draws of the remaining
coordinates, reporting the mean with 5% and 95% quantile bands.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .basis import eval_basis_matrix


@dataclass
class MarginalSummary:
    subset: tuple
    feature: int
    grid: np.ndarray
    mean: np.ndarray
    q05: np.ndarray
    q95: np.ndarray


def pairwise_surface(state, k, l, grid_k, grid_l, degree=2):
    """Fitted interaction surface of features k and l on a grid.

    Evaluates sum_f phi_{k,f}(grid_k) * phi_{l,f}(grid_l) using the
    degree-`degree` latent blocks; the result has shape
    (len(grid_k), len(grid_l)). Grid values outside the training domain
    are clamped by the basis evaluation.
    """
    if k == l:
        raise ValueError("surface needs two distinct features")
    if degree not in state.latents:
        raise ValueError(f"model has no interaction terms of degree {degree}")
    lat = state.latents[degree]
    bk = eval_basis_matrix(np.asarray(grid_k, dtype=float), state.specs[k]).values
    bl = eval_basis_matrix(np.asarray(grid_l, dtype=float), state.specs[l]).values
    return (bk @ lat.gamma[k]) @ (bl @ lat.gamma[l]).T


def _factor_curves(state, degree, feature, values):
    lat = state.latents[degree]
    b = eval_basis_matrix(np.asarray(values, dtype=float), state.specs[feature]).values
    return b @ lat.gamma[feature]


def marginal_summary(state, subset, feature, grid=None, mc_draws=256, grid_points=40):
    """Marginal view of one reconstructed interaction term.

    For the term over `subset` (all distinct feature indices), the chosen
    `feature` runs over `grid` while the other coordinates are drawn from a
    deterministic Sobol sequence over their training domains; mc_draws is
    rounded up to the next power of two to keep the sequence balanced.
    Returns the per-grid-point mean and 5%/95% quantiles of the term.

    A singleton subset summarizes the univariate spline effect itself; the
    bands then collapse onto the mean.
    """
    subset = tuple(int(j) for j in subset)
    if len(set(subset)) != len(subset):
        raise ValueError(f"term {subset} has repeated features")
    if feature not in subset:
        raise ValueError(f"feature {feature} not in term {subset}")
    spec = state.specs[feature]
    if grid is None:
        grid = np.linspace(spec.domain_lo, spec.domain_hi, grid_points)
    grid = np.asarray(grid, dtype=float)

    if len(subset) == 1:
        b = eval_basis_matrix(grid, spec).values
        curve = b @ state.theta.beta[feature]
        return MarginalSummary(subset, feature, grid, curve, curve.copy(), curve.copy())

    d = len(subset)
    if d not in state.latents:
        raise ValueError(f"model has no interaction terms of degree {d}")
    others = [j for j in subset if j != feature]
    draws = 1 << max(0, int(np.ceil(np.log2(max(1, mc_draws)))))
    sob = qmc.Sobol(d=len(others), scramble=False)
    u = sob.random(draws)
    prod_other = np.ones((draws, state.latents[d].num_factors))
    for t, j in enumerate(others):
        s = state.specs[j]
        vals = s.domain_lo + u[:, t] * (s.domain_hi - s.domain_lo)
        prod_other *= _factor_curves(state, d, j, vals)
    phi_feat = _factor_curves(state, d, feature, grid)
    effect = phi_feat @ prod_other.T
    return MarginalSummary(
        subset=subset,
        feature=feature,
        grid=grid,
        mean=effect.mean(axis=1),
        q05=np.quantile(effect, 0.05, axis=1),
        q95=np.quantile(effect, 0.95, axis=1),
    )
