"""Command line interface.

Subcommands: fit, predict, smooth, simulate, bench, compare, effects.
Every subcommand accepts --config (flat key=value file) and --seed; a
command line flag overrides the config file, which overrides the built-in
default. Exit codes: 0 on success, 2 on usage errors (bad flags, bad
config lines), 1 on runtime failures.
"""

import argparse
import os
import sys

import numpy as np
import pandas as pd

from . import core, effects
from .bench import BENCH_COLUMNS, COMPARE_COLUMNS, bench, compare
from .data import Dataset, ingest_csv, simulate
from .model_io import load_model, save_model
from .smoothing import homogeneous_smoothing
from .basis import diff_penalty, eval_basis_matrix, make_spec
from .train import TrainOptions, fit


class UsageError(ValueError):
    pass


_CONFIG_KEYS = {
    "degree", "factors", "df", "num_basis", "spline_degree", "penalty_order",
    "loss", "optimizer", "batch_size", "max_epochs", "learning_rate",
    "patience", "validation_fraction", "init_scale", "seed", "target",
}


def _read_config(path):
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"malformed config line {lineno}: {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r} on line {lineno}")
            cfg[key] = value.strip()
    return cfg


def _resolve(flag_value, cfg, key, default, conv):
    if flag_value is not None:
        return flag_value
    if key in cfg:
        try:
            return conv(cfg[key])
        except (TypeError, ValueError):
            raise UsageError(f"bad value for config key {key!r}: {cfg[key]!r}")
    return default


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")


def _per_degree(values, degrees, what):
    if len(values) == 1:
        return {d: values[0] for d in degrees}
    if len(values) != len(degrees):
        raise UsageError(
            f"{what} needs 1 or {len(degrees)} values for degrees {list(degrees)}, "
            f"got {len(values)}"
        )
    return dict(zip(degrees, values))


def _model_config(args, cfg):
    degree = _resolve(args.degree, cfg, "degree", 2, int)
    factors = _resolve(args.factors, cfg, "factors", [5], _int_list)
    dfs = _resolve(args.df, cfg, "df", [5.0], _float_list)
    return core.ModelConfig(
        interaction_degree=degree,
        factor_counts=_per_degree(factors, range(2, degree + 1), "factors"),
        df_targets=_per_degree(dfs, range(1, degree + 1), "df"),
        loss_family=_resolve(args.loss, cfg, "loss", "gaussian", str),
        num_basis=_resolve(args.num_basis, cfg, "num_basis", 10, int),
        spline_degree=_resolve(args.spline_degree, cfg, "spline_degree", 3, int),
        penalty_order=_resolve(args.penalty_order, cfg, "penalty_order", 2, int),
    )


def _train_options(args, cfg):
    return TrainOptions(
        optimizer=_resolve(args.optimizer, cfg, "optimizer", "adam", str),
        batch_size=_resolve(args.batch_size, cfg, "batch_size", 128, int),
        max_epochs=_resolve(args.max_epochs, cfg, "max_epochs", 500, int),
        learning_rate=_resolve(args.learning_rate, cfg, "learning_rate", 1e-3, float),
        patience=_resolve(args.patience, cfg, "patience", 50, int),
        validation_fraction=_resolve(
            args.validation_fraction, cfg, "validation_fraction", 0.15, float
        ),
        seed=_resolve(args.seed, cfg, "seed", 0, int),
        init_scale=_resolve(args.init_scale, cfg, "init_scale", 0.1, float),
    )


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _feature_frame(path, column_names):
    """Read prediction inputs, requiring the model's feature columns."""
    df = pd.read_csv(path)
    missing = [c for c in column_names if c not in df.columns]
    if missing:
        raise ValueError(f"missing feature columns {missing} in {path}")
    out = {}
    for col in column_names:
        was_na = df[col].isna()
        vals = pd.to_numeric(df[col], errors="coerce")
        if (vals.isna() & ~was_na).any():
            raise ValueError(f"non-numeric values in column {col!r}")
        out[col] = vals
    frame = pd.DataFrame(out).dropna()
    if len(frame) < len(df):
        import warnings

        warnings.warn(f"dropped {len(df) - len(frame)} rows with missing values")
    return frame.to_numpy(dtype=float)


def _resolve_feature(token, column_names):
    token = str(token).strip()
    if token in column_names:
        return column_names.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise UsageError(f"unknown feature {token!r}")
    if not 0 <= idx < len(column_names):
        raise UsageError(f"feature index {idx} out of range")
    return idx


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fit(args):
    cfg = _read_config(args.config) if args.config else {}
    target = _resolve(args.target, cfg, "target", "y", str)
    dataset = ingest_csv(args.data, target)
    config = _model_config(args, cfg)
    options = _train_options(args, cfg)
    state = fit(dataset, config, options)
    save_model(state, args.model)
    if args.log:
        _write_csv(
            args.log,
            ("epoch", "train_loss", "valid_loss", "penalty", "seconds"),
            state.history,
        )
    print(f"fitted {args.data} ({dataset.n} rows, {dataset.p} features) "
          f"in {state.epoch} epochs -> {args.model}")
    return 0


def cmd_predict(args):
    state = load_model(args.model)
    x = _feature_frame(args.data, state.column_names)
    preds = core.predict_response(x, state)
    _write_csv(args.out, ("prediction",), [(float(v),) for v in preds])
    return 0


def cmd_smooth(args):
    cfg = _read_config(args.config) if args.config else {}
    target = _resolve(args.target, cfg, "target", "y", str)
    dataset = ingest_csv(args.data, target)
    config = _model_config(args, cfg)
    config.validate(dataset.p)
    specs = [
        make_spec(dataset.x[:, j], config.num_basis, config.spline_degree,
                  config.penalty_order, j)
        for j in range(dataset.p)
    ]
    bases = [eval_basis_matrix(dataset.x[:, j], specs[j]) for j in range(dataset.p)]
    penalties = [diff_penalty(s.num_basis, s.penalty_order) for s in specs]
    table = homogeneous_smoothing(bases, penalties, config.df_targets,
                                  config.factor_counts)
    _write_csv(args.out, ("degree", "feature", "factor", "lambda", "df_target"),
               table.rows())
    return 0


def cmd_simulate(args):
    cfg = _read_config(args.config) if args.config else {}
    seed = _resolve(args.seed, cfg, "seed", 0, int)
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.p is not None:
        params["p"] = args.p
    if args.n_test is not None:
        params["n_test"] = args.n_test
    result = simulate(args.kind, params, seed)

    def write_dataset(ds, path):
        header = tuple(ds.column_names) + ("y",)
        rows = [tuple(ds.x[i]) + (ds.y[i],) for i in range(ds.n)]
        _write_csv(path, header, rows)

    write_dataset(result.train, args.out)
    if result.test is not None and args.test_out:
        write_dataset(result.test, args.test_out)
    if result.truth is not None and args.truth_out:
        os.makedirs(args.truth_out, exist_ok=True)
        for (k, l), (grid_k, grid_l, values) in result.truth.items():
            rows = [
                (grid_k[a], grid_l[b], values[a, b])
                for a in range(grid_k.size)
                for b in range(grid_l.size)
            ]
            _write_csv(
                os.path.join(args.truth_out, f"truth_{k}_{l}.csv"),
                (f"x{k}", f"x{l}", "effect"),
                rows,
            )
    info = " ".join(f"{k}={v:.4g}" for k, v in result.info.items())
    print(f"simulated kind={args.kind} rows={result.train.n} -> {args.out}"
          + (f" [{info}]" if info else ""))
    return 0


def cmd_bench(args):
    cfg = _read_config(args.config) if args.config else {}
    rows = bench(
        p_list=_int_list(args.p_list),
        n_list=_int_list(args.n_list),
        factors=_resolve(args.factors_count, cfg, "factors", [5], _int_list)[0],
        epochs=args.epochs,
        repeats=args.repeats,
        seed=_resolve(args.seed, cfg, "seed", 0, int),
        batch_size=_resolve(args.batch_size, cfg, "batch_size", 128, int),
    )
    _write_csv(args.out, BENCH_COLUMNS, rows)
    return 0


def cmd_compare(args):
    cfg = _read_config(args.config) if args.config else {}
    options = TrainOptions(
        batch_size=_resolve(args.batch_size, cfg, "batch_size", 256, int),
        max_epochs=_resolve(args.max_epochs, cfg, "max_epochs", 400, int),
        learning_rate=_resolve(args.learning_rate, cfg, "learning_rate", 1e-2, float),
        patience=_resolve(args.patience, cfg, "patience", 30, int),
    )
    rows = compare(
        n_list=_int_list(args.n_list),
        factor_list=_int_list(args.factors_list),
        num_seeds=args.seeds,
        df=args.df if args.df is not None else 8.0,
        options=options,
        base_seed=_resolve(args.seed, cfg, "seed", 0, int),
    )
    _write_csv(args.out, COMPARE_COLUMNS, rows)
    return 0


def cmd_effects(args):
    state = load_model(args.model)
    if bool(args.pair) == bool(args.term):
        raise UsageError("pass exactly one of --pair or --term")
    names = state.column_names
    if args.pair:
        tokens = args.pair.split(",")
        if len(tokens) != 2:
            raise UsageError("--pair needs two features, like --pair x0,x1")
        k, l = (_resolve_feature(t, names) for t in tokens)
        grid_k = np.linspace(state.specs[k].domain_lo, state.specs[k].domain_hi,
                             args.grid_points)
        grid_l = np.linspace(state.specs[l].domain_lo, state.specs[l].domain_hi,
                             args.grid_points)
        surf = effects.pairwise_surface(state, k, l, grid_k, grid_l)
        rows = [
            (grid_k[a], grid_l[b], surf[a, b])
            for a in range(grid_k.size)
            for b in range(grid_l.size)
        ]
        _write_csv(args.out, (names[k], names[l], "effect"), rows)
        return 0
    subset = tuple(_resolve_feature(t, names) for t in args.term.split(","))
    feature = _resolve_feature(args.feature, names) if args.feature is not None \
        else subset[0]
    summary = effects.marginal_summary(
        state, subset, feature, mc_draws=args.draws, grid_points=args.grid_points
    )
    term = "*".join(names[j] for j in subset)
    rows = [
        (term, names[feature], summary.grid[i], summary.mean[i],
         summary.q05[i], summary.q95[i])
        for i in range(summary.grid.size)
    ]
    _write_csv(args.out, ("term", "feature", "grid_value", "mean", "q05", "q95"),
               rows)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--seed", type=int, default=None)


def _add_model_flags(sub):
    sub.add_argument("--degree", type=int, default=None,
                     help="maximum interaction degree D")
    sub.add_argument("--factors", type=_int_list, default=None,
                     help="latent factors per degree 2..D, comma separated")
    sub.add_argument("--df", type=_float_list, default=None,
                     help="df targets per degree 1..D, comma separated")
    sub.add_argument("--num-basis", dest="num_basis", type=int, default=None)
    sub.add_argument("--spline-degree", dest="spline_degree", type=int, default=None)
    sub.add_argument("--penalty-order", dest="penalty_order", type=int, default=None)
    sub.add_argument("--loss", choices=("gaussian", "bernoulli"), default=None)


def _add_train_flags(sub):
    sub.add_argument("--optimizer", choices=("adam", "bcd"), default=None)
    sub.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    sub.add_argument("--max-epochs", dest="max_epochs", type=int, default=None)
    sub.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    sub.add_argument("--patience", type=int, default=None)
    sub.add_argument("--validation-fraction", dest="validation_fraction",
                     type=float, default=None)
    sub.add_argument("--init-scale", dest="init_scale", type=float, default=None)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ahofm",
        description="Penalized additive models with factorized interactions",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("fit", help="fit a model to a CSV dataset")
    _add_common(sub)
    sub.add_argument("--data", required=True)
    sub.add_argument("--target", default=None)
    sub.add_argument("--model", default="model.json")
    sub.add_argument("--log", default=None, help="training log CSV path")
    _add_model_flags(sub)
    _add_train_flags(sub)
    sub.set_defaults(func=cmd_fit)

    sub = subs.add_parser("predict", help="predict with a saved model")
    _add_common(sub)
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", default="-")
    sub.set_defaults(func=cmd_predict)

    sub = subs.add_parser("smooth", help="print the smoothing table for a dataset")
    _add_common(sub)
    sub.add_argument("--data", required=True)
    sub.add_argument("--target", default=None)
    sub.add_argument("--out", default="-")
    _add_model_flags(sub)
    sub.set_defaults(func=cmd_smooth)

    sub = subs.add_parser("simulate", help="generate a study dataset")
    _add_common(sub)
    sub.add_argument("--kind", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--p", type=int, default=None)
    sub.add_argument("--n-test", dest="n_test", type=int, default=None)
    sub.add_argument("--test-out", dest="test_out", default=None)
    sub.add_argument("--truth-out", dest="truth_out", default=None)
    sub.set_defaults(func=cmd_simulate)

    sub = subs.add_parser("bench", help="timing and storage benchmark")
    _add_common(sub)
    sub.add_argument("--p-list", dest="p_list", required=True)
    sub.add_argument("--n-list", dest="n_list", required=True)
    sub.add_argument("--factors", dest="factors_count", default=None)
    sub.add_argument("--epochs", type=int, default=3)
    sub.add_argument("--repeats", type=int, default=3)
    sub.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    sub.add_argument("--out", default="-")
    sub.set_defaults(func=cmd_bench)

    sub = subs.add_parser("compare", help="accuracy study vs the exact model")
    _add_common(sub)
    sub.add_argument("--n-list", dest="n_list", required=True)
    sub.add_argument("--factors", dest="factors_list", required=True)
    sub.add_argument("--seeds", type=int, default=5)
    sub.add_argument("--df", type=float, default=None)
    sub.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    sub.add_argument("--max-epochs", dest="max_epochs", type=int, default=None)
    sub.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    sub.add_argument("--patience", type=int, default=None)
    sub.add_argument("--out", default="-")
    sub.set_defaults(func=cmd_compare)

    sub = subs.add_parser("effects", help="export fitted effects from a model")
    _add_common(sub)
    sub.add_argument("--model", required=True)
    sub.add_argument("--pair", default=None, help="two features, like x0,x1")
    sub.add_argument("--term", default=None, help="feature subset, like x0,x1,x2")
    sub.add_argument("--feature", default=None, help="marginal feature of --term")
    sub.add_argument("--grid-points", dest="grid_points", type=int, default=40)
    sub.add_argument("--draws", type=int, default=256)
    sub.add_argument("--out", default="-")
    sub.set_defaults(func=cmd_effects)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
