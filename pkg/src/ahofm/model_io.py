"""Model persistence: a single JSON document per fitted model.

The document is written with sorted keys and a fixed layout, so
save -> load -> save reproduces the file byte for byte. Coefficients are
stored as plain lists; Python's float repr round-trips exactly through
JSON. Data caches (training bases, responses) are not persisted; a loaded
model predicts but cannot resume training.
"""

import json

import numpy as np

from . import core
from .basis import SplineSpec, diff_penalty
from .smoothing import SmoothingTable
from .train import FitState

FORMAT_VERSION = 1


def to_document(state):
    config = state.config
    doc = {
        "format_version": FORMAT_VERSION,
        "config": {
            "interaction_degree": config.interaction_degree,
            "factor_counts": {str(d): int(f) for d, f in config.factor_counts.items()},
            "df_targets": {str(d): float(v) for d, v in config.df_targets.items()},
            "loss_family": config.loss_family,
            "num_basis": config.num_basis,
            "spline_degree": config.spline_degree,
            "penalty_order": config.penalty_order,
        },
        "column_names": list(state.column_names),
        "specs": [
            {
                "feature_index": s.feature_index,
                "degree": s.degree,
                "num_basis": s.num_basis,
                "penalty_order": s.penalty_order,
                "domain_lo": s.domain_lo,
                "domain_hi": s.domain_hi,
                "knots": [float(t) for t in s.knots],
            }
            for s in state.specs
        ],
        "smoothing": {
            "df_targets": {str(d): float(v) for d, v in state.table.df_targets.items()},
            "lambdas": [
                [d, j, f, float(state.table.lambdas[(d, j, f)])]
                for (d, j, f) in sorted(state.table.lambdas)
            ],
        },
        "params": {
            "alpha0": float(state.theta.alpha0),
            "beta": [[float(v) for v in b] for b in state.theta.beta],
            "gamma": {
                str(d): [lat.gamma[j].tolist() for j in range(len(lat.gamma))]
                for d, lat in sorted(state.latents.items())
            },
        },
        "epoch": int(state.epoch),
        "rng_seed": int(state.rng_seed),
    }
    return doc


def save_model(state, path):
    text = json.dumps(to_document(state), sort_keys=True, indent=2) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(
            f"unsupported model format version {version!r}, expected {FORMAT_VERSION}"
        )
    cfg = doc["config"]
    config = core.ModelConfig(
        interaction_degree=int(cfg["interaction_degree"]),
        factor_counts={int(d): int(f) for d, f in cfg["factor_counts"].items()},
        df_targets={int(d): float(v) for d, v in cfg["df_targets"].items()},
        loss_family=cfg["loss_family"],
        num_basis=int(cfg["num_basis"]),
        spline_degree=int(cfg["spline_degree"]),
        penalty_order=int(cfg["penalty_order"]),
    )
    specs = [
        SplineSpec(
            feature_index=int(s["feature_index"]),
            degree=int(s["degree"]),
            num_basis=int(s["num_basis"]),
            penalty_order=int(s["penalty_order"]),
            domain_lo=float(s["domain_lo"]),
            domain_hi=float(s["domain_hi"]),
            knots=np.array(s["knots"], dtype=float),
        )
        for s in doc["specs"]
    ]
    penalties = [diff_penalty(s.num_basis, s.penalty_order) for s in specs]
    table = SmoothingTable(
        lambdas={(d, j, f): float(v) for d, j, f, v in doc["smoothing"]["lambdas"]},
        df_targets={int(d): float(v) for d, v in doc["smoothing"]["df_targets"].items()},
    )
    params = doc["params"]
    theta = core.ThetaParams(
        alpha0=float(params["alpha0"]),
        beta=[np.array(b, dtype=float) for b in params["beta"]],
    )
    latents = {
        int(d): core.LatentTensor(
            degree=int(d), gamma=[np.array(g, dtype=float) for g in blocks]
        )
        for d, blocks in params["gamma"].items()
    }
    return FitState(
        config=config,
        specs=specs,
        penalties=penalties,
        table=table,
        theta=theta,
        latents=latents,
        column_names=list(doc["column_names"]),
        rng_seed=int(doc["rng_seed"]),
        epoch=int(doc["epoch"]),
    )
