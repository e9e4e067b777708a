"""Timing/storage benchmarks and the accuracy comparison study."""

import time
from itertools import combinations

import numpy as np

from . import core, effects, oracle
from .data import simulate
from .train import TrainOptions, fit_adam

BENCH_COLUMNS = ("p", "n", "seconds", "peak_bytes")
COMPARE_COLUMNS = (
    "n",
    "factors",
    "seed",
    "afm_surface_mse",
    "gam_surface_mse",
    "afm_test_mse",
    "gam_test_mse",
)


def storage_bytes(state):
    """Array-accounting storage metric: bytes of the p-proportional caches.

    Counts the cached basis matrices, univariate coefficients, latent
    blocks, and factor-curve caches. Every counted array has a leading or
    middle dimension linear in p, so doubling p doubles the metric
    exactly; the OS resident set is deliberately not used here.
    """
    total = sum(bm.values.nbytes for bm in state.bases)
    total += sum(b.nbytes for b in state.theta.beta)
    total += sum(g.nbytes for lat in state.latents.values() for g in lat.gamma)
    total += sum(ph.nbytes for ph in state.phi_cache.phi.values())
    return int(total)


def bench(p_list, n_list, factors=5, df=5.0, epochs=3, repeats=3, seed=0,
          batch_size=128):
    """Median wall time and storage for a fixed-epoch fit per (p, n) cell.

    Every cell simulates standard normal features, fits a degree-2 model
    for exactly `epochs` epochs (patience disabled) `repeats` times and
    records the median seconds plus the storage metric. Returns rows
    matching BENCH_COLUMNS.
    """
    rows = []
    for p in p_list:
        for n in n_list:
            sim = simulate("scaling", {"p": p, "n": n}, seed)
            config = core.ModelConfig(
                interaction_degree=2,
                factor_counts={2: factors},
                df_targets={1: df, 2: df},
            )
            times = []
            state = None
            for rep in range(repeats):
                options = TrainOptions(
                    batch_size=batch_size,
                    max_epochs=epochs,
                    patience=epochs + 1,
                    seed=seed + rep,
                )
                t0 = time.perf_counter()
                state = fit_adam(sim.train, config, options)
                times.append(time.perf_counter() - t0)
            rows.append((p, n, float(np.median(times)), storage_bytes(state)))
    return rows


def compare(n_list, factor_list, num_seeds=5, df=8.0, num_basis=10,
            options=None, base_seed=0):
    """Factorized model vs exact GAM on the all-pairs simulation.

    For every (n, seed) cell one dataset is simulated; the exact GAM
    (univariate plus all pairwise tensor-product blocks) is fitted once,
    then the factorized model once per factor count. Each row reports the
    mean centered-surface MSE against the simulated truth across all
    pairs, plus held-out prediction MSE, matching COMPARE_COLUMNS.
    """
    options = options or TrainOptions(
        batch_size=256, max_epochs=400, patience=30, learning_rate=1e-2
    )
    rows = []
    for n in n_list:
        for seed in range(num_seeds):
            sim = simulate("bivariate_study", {"n": n}, base_seed + seed)
            p = sim.train.p
            pairs = list(combinations(range(p), 2))
            config = core.ModelConfig(
                interaction_degree=2,
                factor_counts={2: 1},
                df_targets={1: df, 2: df},
                num_basis=num_basis,
            )
            gam = oracle.fit_exact_gam(
                sim.train, [(j,) for j in range(p)] + pairs, config
            )
            gam_test = float(np.mean((gam.predict(sim.test.x) - sim.test.y) ** 2))
            gam_surf = float(np.mean([
                oracle.surface_mse(
                    gam.surface(pair, sim.truth[pair][:2]), sim.truth[pair][2]
                )
                for pair in pairs
            ]))
            for factors in factor_list:
                fit_config = core.ModelConfig(
                    interaction_degree=2,
                    factor_counts={2: factors},
                    df_targets={1: df, 2: df},
                    num_basis=num_basis,
                )
                fit_options = TrainOptions(
                    batch_size=options.batch_size,
                    max_epochs=options.max_epochs,
                    patience=options.patience,
                    learning_rate=options.learning_rate,
                    validation_fraction=options.validation_fraction,
                    seed=base_seed + seed,
                )
                state = fit_adam(sim.train, fit_config, fit_options)
                afm_test = float(
                    np.mean((core.predict_eta(sim.test.x, state) - sim.test.y) ** 2)
                )
                afm_surf = float(np.mean([
                    oracle.surface_mse(
                        effects.pairwise_surface(
                            state, k, l, sim.truth[(k, l)][0], sim.truth[(k, l)][1]
                        ),
                        sim.truth[(k, l)][2],
                    )
                    for k, l in pairs
                ]))
                rows.append(
                    (n, factors, seed, afm_surf, gam_surf, afm_test, gam_test)
                )
    return rows
