"""Exact tensor-product spline GAM, the unfactorized reference model.

Each requested feature subset gets a full tensor-product basis (row-wise
Kronecker product of the marginal bases) with the Kronecker-sum penalty

    sum_t lambda_t (I x ... x P_t x ... x I),

and all subsets are fitted jointly through penalized normal equations.
Cost grows with the product of the marginal basis sizes, which is the
point: this model is the accuracy gold standard the factorized predictor
is compared against, not something to run at scale. Guard rails reject
designs past roughly 10^4 columns per subset and 2 * 10^4 overall.

Tensor-product designs contain the constant function, so with an
intercept the normal equations are rank deficient by construction; a tiny
ridge is added when the factorization fails, with a warning.
"""

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import linalg

from .basis import diff_penalty, eval_basis_matrix, make_spec
from .smoothing import homogeneous_smoothing

MAX_DESIGN_COLUMNS = 10_000
MAX_TOTAL_COLUMNS = 20_000


@dataclass
class TpsDesign:
    """Tensor-product design and penalty for one feature subset."""

    subset: tuple
    design: np.ndarray
    penalty: np.ndarray
    sizes: tuple


def tps_design(bases, penalties, lambdas):
    """Row-wise Kronecker design with its Kronecker-sum penalty.

    Parameters
    ----------
    bases : list of BasisMatrix
        Marginal bases of the subset, all with the same number of rows.
        The first basis varies slowest in the column ordering.
    penalties : list of PenaltyMatrix, aligned with `bases`.
    lambdas : list of float, one smoothing parameter per direction.
    """
    sizes = tuple(b.values.shape[1] for b in bases)
    total = int(np.prod(sizes))
    if total > MAX_DESIGN_COLUMNS:
        raise ValueError(
            f"tensor-product basis has {total} columns, above the "
            f"{MAX_DESIGN_COLUMNS} guard"
        )
    design = bases[0].values
    for b in bases[1:]:
        design = (design[:, :, None] * b.values[:, None, :]).reshape(design.shape[0], -1)
    penalty = np.zeros((total, total))
    for t, (pen, lam) in enumerate(zip(penalties, lambdas)):
        mats = [np.eye(m) for m in sizes]
        mats[t] = pen.values
        penalty += lam * reduce(np.kron, mats)
    subset = tuple(b.spec.feature_index for b in bases)
    return TpsDesign(subset=subset, design=design, penalty=penalty, sizes=sizes)


@dataclass
class ExactGamFit:
    """Penalized least-squares fit over tensor-product blocks."""

    intercept: float
    blocks: dict
    subsets: list
    specs: list
    sizes: dict

    def _assemble(self, x):
        cols = [np.ones((x.shape[0], 1))]
        for subset in self.subsets:
            bases = [eval_basis_matrix(x[:, j], self.specs[j]) for j in subset]
            design = bases[0].values
            for b in bases[1:]:
                design = (design[:, :, None] * b.values[:, None, :]).reshape(x.shape[0], -1)
            cols.append(design)
        return np.hstack(cols)

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        coef = np.concatenate(
            [[self.intercept]] + [self.blocks[s].ravel() for s in self.subsets]
        )
        return self._assemble(x) @ coef

    def surface(self, subset, grids):
        """Partial-effect values of one subset on a grid per direction."""
        subset = tuple(subset)
        coef = self.blocks[subset].reshape(self.sizes[subset])
        mats = [eval_basis_matrix(g, self.specs[j]).values for j, g in zip(subset, grids)]
        if len(subset) == 1:
            return mats[0] @ coef
        if len(subset) == 2:
            return mats[0] @ coef @ mats[1].T
        if len(subset) == 3:
            return np.einsum("abc,ia,jb,kc->ijk", coef, mats[0], mats[1], mats[2])
        raise ValueError("surfaces supported up to 3 directions")


def fit_exact_gam(dataset, subsets, config, table=None):
    """Fit the exact GAM jointly over the given feature subsets.

    Basis specs and penalties are built from the data exactly as in the
    factorized model, and each subset of size d draws its per-direction
    lambdas from the degree-d row of the smoothing table (computed on the
    fly when no table is given). Gaussian response only.

    Returns an ExactGamFit with the intercept, one coefficient block per
    subset, and predict/surface helpers.
    """
    x = np.asarray(dataset.x, dtype=float)
    y = np.asarray(dataset.y, dtype=float)
    p = x.shape[1]
    specs = [
        make_spec(
            x[:, j],
            num_basis=config.num_basis,
            degree=config.spline_degree,
            penalty_order=config.penalty_order,
            feature_index=j,
        )
        for j in range(p)
    ]
    bases = [eval_basis_matrix(x[:, j], specs[j]) for j in range(p)]
    penalties = [diff_penalty(s.num_basis, s.penalty_order) for s in specs]
    if table is None:
        table = homogeneous_smoothing(bases, penalties, config.df_targets, config.factor_counts)

    subsets = [tuple(s) for s in subsets]
    designs = []
    for subset in subsets:
        if len(set(subset)) != len(subset):
            raise ValueError(f"subset {subset} has repeated features")
        lams = [table.lam(len(subset), j, 0) for j in subset]
        designs.append(
            tps_design([bases[j] for j in subset], [penalties[j] for j in subset], lams)
        )
    total_cols = 1 + sum(d.design.shape[1] for d in designs)
    if total_cols > MAX_TOTAL_COLUMNS:
        raise ValueError(
            f"joint design has {total_cols} columns, above the {MAX_TOTAL_COLUMNS} guard"
        )

    design = np.hstack([np.ones((x.shape[0], 1))] + [d.design for d in designs])
    penalty = np.zeros((total_cols, total_cols))
    pos = 1
    for d in designs:
        k = d.design.shape[1]
        penalty[pos:pos + k, pos:pos + k] = d.penalty
        pos += k
    lhs = design.T @ design + penalty
    rhs = design.T @ y
    try:
        coef = linalg.solve(lhs, rhs, assume_a="pos")
    except linalg.LinAlgError:
        warnings.warn("singular normal equations, adding 1e-8 ridge")
        coef = linalg.solve(
            lhs + 1e-8 * np.eye(total_cols), rhs, assume_a="pos"
        )

    blocks = {}
    sizes = {}
    pos = 1
    for d in designs:
        k = d.design.shape[1]
        blocks[d.subset] = coef[pos:pos + k].copy()
        sizes[d.subset] = d.sizes
        pos += k
    return ExactGamFit(
        intercept=float(coef[0]),
        blocks=blocks,
        subsets=subsets,
        specs=specs,
        sizes=sizes,
    )


def surface_mse(grid_a, grid_b):
    """Mean squared difference of two effect grids, each centered first.

    Partial effects are identified only up to additive constants, so both
    grids are shifted to mean zero before comparison; two grids differing
    by a constant have MSE zero.
    """
    a = np.asarray(grid_a, dtype=float)
    b = np.asarray(grid_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"grid shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - a.mean() - b + b.mean()) ** 2))
