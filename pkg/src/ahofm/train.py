"""Model fitting: stochastic Adam and blockwise coordinate descent.

Both optimizers share the same initialization and the same seeded
validation split (the last contiguous slice of a shuffled index vector).
Adam walks minibatches over all coefficient blocks at once; the penalty
gradient of a minibatch is scaled by batch_size / n_train so one epoch
accumulates the full penalty exactly once.

Coordinate descent exploits that the predictor is affine in every
coefficient block: freezing all other blocks, the block enters eta as
eta = rest + Z @ coef with Z the basis matrix scaled by the leave-one-out
cofactor of the block's factor curve. For squared error the block update
is the exact penalized least-squares minimizer, so the training objective
never increases; for the bernoulli loss the logistic curvature is bounded
by 1/4 and the update minimizes that quadratic majorizer.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import expit

from . import core
from .basis import diff_penalty, eval_basis_matrix, make_spec
from .smoothing import homogeneous_smoothing


@dataclass
class TrainOptions:
    optimizer: str = "adam"
    batch_size: int = 128
    max_epochs: int = 500
    learning_rate: float = 1e-3
    patience: int = 50
    validation_fraction: float = 0.15
    seed: int = 0
    init_scale: float = 0.1


@dataclass
class FitState:
    """Fitted (or in-training) model: parameters plus cached evaluations.

    eta_hat mirrors the predictor on the cached training rows and is kept
    in sync after every parameter update round. bases and y are the
    training-data caches; they are dropped on persistence.
    """

    config: core.ModelConfig
    specs: list
    penalties: list
    table: object
    theta: core.ThetaParams
    latents: dict
    column_names: list
    rng_seed: int = 0
    epoch: int = 0
    phi_cache: core.PhiCache = None
    eta_hat: np.ndarray = None
    bases: list = None
    y: np.ndarray = None
    history: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)


@dataclass
class Gradients:
    """Objective gradient in the same block layout as the parameters."""

    alpha0: float
    beta: list
    gamma: dict

    def pack(self):
        return _pack(self.alpha0, self.beta, self.gamma)


def _pack(alpha0, beta, gamma):
    parts = [np.array([alpha0])]
    parts.extend(beta)
    for d in sorted(gamma):
        parts.extend(block.ravel() for block in gamma[d])
    return np.concatenate(parts)


def _unpack_into(vec, state):
    state.theta.alpha0 = float(vec[0])
    pos = 1
    for b in state.theta.beta:
        b[:] = vec[pos:pos + b.size]
        pos += b.size
    for d in sorted(state.latents):
        for block in state.latents[d].gamma:
            block[:] = vec[pos:pos + block.size].reshape(block.shape)
            pos += block.size
    return pos


def _snapshot(state):
    return (
        state.theta.alpha0,
        [b.copy() for b in state.theta.beta],
        {d: [g.copy() for g in lat.gamma] for d, lat in state.latents.items()},
    )


def _restore(state, snap):
    alpha0, beta, gamma = snap
    state.theta.alpha0 = alpha0
    for b, src in zip(state.theta.beta, beta):
        b[:] = src
    for d, lat in state.latents.items():
        for g, src in zip(lat.gamma, gamma[d]):
            g[:] = src


def init(dataset, config, seed=0, init_scale=0.1, rng=None):
    """Build a FitState: specs, bases, smoothing table, initial parameters.

    The intercept starts at the link-scale mean of the response, the
    univariate coefficients at zero and every latent fiber entry is drawn
    i.i.d. normal with standard deviation `init_scale`. init_scale = 0 is
    handy for debugging: the initial predictor is then flat at alpha0.
    """
    config.validate(dataset.x.shape[1])
    if rng is None:
        rng = np.random.default_rng(seed)
    specs = [
        make_spec(
            dataset.x[:, j],
            num_basis=config.num_basis,
            degree=config.spline_degree,
            penalty_order=config.penalty_order,
            feature_index=j,
        )
        for j in range(dataset.x.shape[1])
    ]
    bases = [eval_basis_matrix(dataset.x[:, j], specs[j]) for j in range(len(specs))]
    penalties = [diff_penalty(s.num_basis, s.penalty_order) for s in specs]
    table = homogeneous_smoothing(bases, penalties, config.df_targets, config.factor_counts)
    theta = core.ThetaParams(
        alpha0=core.mean_response(dataset.y, config.loss_family),
        beta=[np.zeros(s.num_basis) for s in specs],
    )
    latents = {}
    for d in config.degrees():
        gamma = [
            rng.normal(0.0, init_scale, size=(s.num_basis, config.factor_counts[d]))
            for s in specs
        ]
        latents[d] = core.LatentTensor(degree=d, gamma=gamma)
    state = FitState(
        config=config,
        specs=specs,
        penalties=penalties,
        table=table,
        theta=theta,
        latents=latents,
        column_names=list(dataset.column_names),
        rng_seed=seed,
        bases=bases,
        y=np.asarray(dataset.y, dtype=float).copy(),
    )
    sync_caches(state)
    return state


def sync_caches(state):
    """Recompute phi_cache and eta_hat from the current parameters."""
    bvals = [bm.values for bm in state.bases]
    state.phi_cache = core.build_phi_cache(bvals, state.latents)
    eta = np.full(bvals[0].shape[0], state.theta.alpha0)
    for j, b in enumerate(bvals):
        eta = eta + b @ state.theta.beta[j]
    for d in sorted(state.latents):
        e = core.elementary_from_power_sums(state.phi_cache.power_sums[d], d)
        eta = eta + e[d].sum(axis=-1)
    state.eta_hat = eta


def gradient(batch, state, table, n_total=None):
    """Gradient of the penalized objective restricted to a batch of rows.

    The loss part is the exact gradient of the batch's summed loss; the
    penalty part is scaled by len(batch) / n_total so that summing over
    all batches of an epoch reproduces the full objective gradient.
    n_total defaults to the number of cached training rows.
    """
    idx = np.asarray(batch, dtype=int)
    if n_total is None:
        n_total = state.y.shape[0]
    scale = idx.size / n_total
    y = state.y[idx]
    bvals = [bm.values[idx] for bm in state.bases]
    theta = state.theta
    eta = np.full(idx.size, theta.alpha0)
    for j, b in enumerate(bvals):
        eta = eta + b @ theta.beta[j]
    phis = {}
    terms = {}
    for d, lat in sorted(state.latents.items()):
        ph = core.phi_from_bases(bvals, lat)
        e = core.elementary_terms(ph, d)
        phis[d] = ph
        terms[d] = e
        eta = eta + e[d].sum(axis=-1)
    lg = core.loss_grad(y, eta, state.config.loss_family)
    g_alpha0 = float(lg.sum())
    g_beta = []
    for j, b in enumerate(bvals):
        pen = scale * table.lam(1, j, 0) * (state.penalties[j].values @ theta.beta[j])
        g_beta.append(b.T @ lg + pen)
    g_gamma = {}
    for d, lat in sorted(state.latents.items()):
        cof = core.downdated_cofactors(terms[d], phis[d])[d - 1]
        blocks = []
        for j, b in enumerate(bvals):
            gb = b.T @ (lg[:, None] * cof[:, j, :])
            lams = np.array(
                [table.lam(d, j, f) for f in range(lat.gamma[j].shape[1])]
            )
            gb = gb + scale * (state.penalties[j].values @ lat.gamma[j]) * lams[None, :]
            blocks.append(gb)
        g_gamma[d] = blocks
    return Gradients(alpha0=g_alpha0, beta=g_beta, gamma=g_gamma)


def _validation_split(n, options, rng):
    n_valid = max(1, int(round(options.validation_fraction * n)))
    if not 0 < options.validation_fraction < 1 or n_valid >= n:
        raise ValueError("validation_fraction must lie strictly between 0 and 1")
    perm = rng.permutation(n)
    return perm[:n - n_valid], perm[n - n_valid:]


def _epoch_losses(state, tr, va):
    family = state.config.loss_family
    losses = core.loss_terms(state.y, state.eta_hat, family)
    return float(losses[tr].mean()), float(losses[va].mean()), float(losses[tr].sum())


def fit_adam(dataset, config, options=None):
    """Fit by minibatch Adam with early stopping on a validation split.

    Walks shuffled minibatches each epoch, tracks the mean validation loss
    and restores the best-epoch parameters after patience runs out. Raises
    if the loss turns non-finite.
    """
    options = options or TrainOptions()
    rng = np.random.default_rng(options.seed)
    state = init(dataset, config, seed=options.seed, init_scale=options.init_scale, rng=rng)
    table = state.table
    n = state.y.shape[0]
    tr, va = _validation_split(n, options, rng)

    w = _pack(state.theta.alpha0, state.theta.beta,
              {d: lat.gamma for d, lat in state.latents.items()})
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    b1, b2, eps = 0.9, 0.999, 1e-7
    step = 0

    best = _snapshot(state)
    best_valid = np.inf
    since_best = 0
    for epoch in range(1, options.max_epochs + 1):
        t0 = time.perf_counter()
        order = rng.permutation(tr)
        for start in range(0, order.size, options.batch_size):
            idx = order[start:start + options.batch_size]
            g = gradient(idx, state, table, n_total=tr.size).pack()
            step += 1
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            mhat = m / (1 - b1 ** step)
            vhat = v / (1 - b2 ** step)
            w = w - options.learning_rate * mhat / (np.sqrt(vhat) + eps)
            _unpack_into(w, state)
        sync_caches(state)
        train_loss, valid_loss, train_sum = _epoch_losses(state, tr, va)
        pen = core.penalty_value(state, table)
        seconds = time.perf_counter() - t0
        state.history.append((epoch, train_loss, valid_loss, pen, seconds))
        state.objective_trace.append(train_sum + 0.5 * pen)
        state.epoch = epoch
        if not (np.isfinite(train_loss) and np.isfinite(valid_loss) and np.isfinite(pen)):
            raise RuntimeError(f"diverged at epoch {epoch}")
        if valid_loss < best_valid:
            best_valid = valid_loss
            best = _snapshot(state)
            since_best = 0
        else:
            since_best += 1
            if since_best >= options.patience:
                break
    _restore(state, best)
    sync_caches(state)
    return state


# ---------------------------------------------------------------------------
# blockwise coordinate descent
# ---------------------------------------------------------------------------

def _solve_block(h, rhs):
    try:
        return linalg.solve(h, rhs, assume_a="pos")
    except linalg.LinAlgError:
        warnings.warn("singular block system, adding 1e-8 ridge")
        return linalg.solve(h + 1e-8 * np.eye(h.shape[0]), rhs, assume_a="pos")


class _BcdContext:
    """Caches for coordinate descent on a fixed row subset.

    Keeps the factor curves, their power sums and the predictor vector in
    step with the parameters; every update method writes the new block
    into the shared state and patches the caches incrementally.
    """

    def __init__(self, state, rows):
        self.state = state
        self.rows = np.asarray(rows, dtype=int)
        self.b = [bm.values[self.rows] for bm in state.bases]
        self.y = state.y[self.rows]
        self.family = state.config.loss_family
        self.table = state.table
        self.resync()

    def resync(self):
        state = self.state
        self.phi = {d: core.phi_from_bases(self.b, lat) for d, lat in state.latents.items()}
        self.s = {d: core.power_sums(ph, d) for d, ph in self.phi.items()}
        self.eta = core.eta_from_bases(self.b, state.theta, state.latents)

    def _gaussian_solve(self, z, resid, lam, pen):
        h = 2.0 * (z.T @ z) + lam * pen
        return _solve_block(h, 2.0 * (z.T @ resid))

    def _bernoulli_step(self, z, coef, lam, pen):
        g = z.T @ (expit(self.eta) - self.y) + lam * (pen @ coef)
        h = 0.25 * (z.T @ z) + lam * pen
        return coef - _solve_block(h, g)

    def update_intercept(self):
        state = self.state
        if self.family == "gaussian":
            delta = float(np.mean(self.y - (self.eta - state.theta.alpha0))) - state.theta.alpha0
        else:
            g = float(np.sum(expit(self.eta) - self.y))
            delta = -g / (0.25 * self.y.size)
        state.theta.alpha0 += delta
        self.eta = self.eta + delta

    def update_beta(self, j):
        state = self.state
        lam = self.table.lam(1, j, 0)
        pen = state.penalties[j].values
        old = state.theta.beta[j]
        if self.family == "gaussian":
            resid = self.y - (self.eta - self.b[j] @ old)
            new = self._gaussian_solve(self.b[j], resid, lam, pen)
        else:
            new = self._bernoulli_step(self.b[j], old, lam, pen)
        self.eta = self.eta + self.b[j] @ (new - old)
        state.theta.beta[j] = new

    def _cofactor(self, d, f, j):
        """Leave-feature-j-out term of order d-1 for factor f, from power sums."""
        e = core.elementary_from_power_sums(self.s[d][:, :, [f]], d)[:, :, 0]
        phi_j = self.phi[d][:, j, f]
        cof = np.ones_like(phi_j)
        for t in range(1, d):
            cof = e[t] - phi_j * cof
        return cof

    def update_fiber(self, d, f, j):
        state = self.state
        lam = self.table.lam(d, j, f)
        pen = state.penalties[j].values
        old = state.latents[d].gamma[j][:, f].copy()
        zeta = self._cofactor(d, f, j)
        z = self.b[j] * zeta[:, None]
        phi_old = self.phi[d][:, j, f]
        if self.family == "gaussian":
            resid = self.y - (self.eta - phi_old * zeta)
            new = self._gaussian_solve(z, resid, lam, pen)
        else:
            new = self._bernoulli_step(z, old, lam, pen)
        phi_new = self.b[j] @ new
        self.eta = self.eta + zeta * (phi_new - phi_old)
        for t in range(d):
            self.s[d][t, :, f] += phi_new ** (t + 1) - phi_old ** (t + 1)
        self.phi[d][:, j, f] = phi_new
        state.latents[d].gamma[j][:, f] = new

    def sweep(self):
        state = self.state
        self.update_intercept()
        for j in range(len(self.b)):
            self.update_beta(j)
        for d in sorted(state.latents):
            for f in range(state.latents[d].num_factors):
                for j in range(len(self.b)):
                    self.update_fiber(d, f, j)
        self.resync()

    def train_objective(self):
        loss = float(np.sum(core.loss_terms(self.y, self.eta, self.family)))
        return loss + 0.5 * core.penalty_value(self.state, self.table)


def bcd_update_fiber(state, d, f, j, rows=None):
    """Apply one exact block update to fiber (d, f, j) on the cached data.

    Operates on all cached rows by default. Updates the state's
    coefficients and caches in place and returns the new fiber.
    """
    rows = np.arange(state.y.shape[0]) if rows is None else rows
    ctx = _BcdContext(state, rows)
    ctx.update_fiber(d, f, j)
    sync_caches(state)
    return state.latents[d].gamma[j][:, f].copy()


def fit_bcd(dataset, config, options=None):
    """Fit by cyclic blockwise coordinate descent.

    Sweeps intercept, univariate blocks, then every (degree, factor,
    feature) fiber; squared-error blocks are solved exactly, bernoulli
    blocks through the 1/4-curvature majorizer. One sweep counts as one
    epoch for logging and early stopping.
    """
    options = options or TrainOptions(optimizer="bcd")
    rng = np.random.default_rng(options.seed)
    state = init(dataset, config, seed=options.seed, init_scale=options.init_scale, rng=rng)
    n = state.y.shape[0]
    tr, va = _validation_split(n, options, rng)
    tr = np.sort(tr)
    va = np.sort(va)
    ctx = _BcdContext(state, tr)

    best = _snapshot(state)
    best_valid = np.inf
    since_best = 0
    for epoch in range(1, options.max_epochs + 1):
        t0 = time.perf_counter()
        ctx.sweep()
        sync_caches(state)
        train_loss, valid_loss, train_sum = _epoch_losses(state, tr, va)
        pen = core.penalty_value(state, state.table)
        seconds = time.perf_counter() - t0
        state.history.append((epoch, train_loss, valid_loss, pen, seconds))
        state.objective_trace.append(train_sum + 0.5 * pen)
        state.epoch = epoch
        if not (np.isfinite(train_loss) and np.isfinite(valid_loss) and np.isfinite(pen)):
            raise RuntimeError(f"diverged at epoch {epoch}")
        if valid_loss < best_valid:
            best_valid = valid_loss
            best = _snapshot(state)
            since_best = 0
        else:
            since_best += 1
            if since_best >= options.patience:
                break
    _restore(state, best)
    sync_caches(state)
    return state


def fit(dataset, config, options=None):
    """Dispatch to the requested optimizer."""
    options = options or TrainOptions()
    if options.optimizer == "adam":
        return fit_adam(dataset, config, options)
    if options.optimizer == "bcd":
        return fit_bcd(dataset, config, options)
    raise ValueError(f"unknown optimizer {options.optimizer!r}")
