import json

import numpy as np
import pandas as pd
import pytest

from ahofm import core
from ahofm.cli import _feature_frame, main
from ahofm.model_io import load_model


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Simulated dataset plus a small fitted model, shared by the tests."""
    root = tmp_path_factory.mktemp("cli")
    train = root / "train.csv"
    test = root / "test.csv"
    truth = root / "truth"
    model = root / "model.json"
    log = root / "log.csv"
    rc = main([
        "simulate", "--kind", "bivariate_study", "--out", str(train),
        "--n", "300", "--p", "3", "--n-test", "60",
        "--test-out", str(test), "--truth-out", str(truth), "--seed", "1",
    ])
    assert rc == 0
    rc = main([
        "fit", "--data", str(train), "--model", str(model), "--log", str(log),
        "--max-epochs", "3", "--factors", "2", "--num-basis", "6", "--seed", "0",
    ])
    assert rc == 0
    return {
        "root": root, "train": train, "test": test, "truth": truth,
        "model": model, "log": log,
    }


class TestSimulateCommand:
    def test_train_csv_layout(self, workspace):
        df = pd.read_csv(workspace["train"])
        assert list(df.columns) == ["x0", "x1", "x2", "y"]
        assert len(df) == 300

    def test_test_split_written(self, workspace):
        df = pd.read_csv(workspace["test"])
        assert len(df) == 60

    def test_truth_directory(self, workspace):
        files = sorted(p.name for p in workspace["truth"].iterdir())
        assert files == ["truth_0_1.csv", "truth_0_2.csv", "truth_1_2.csv"]
        df = pd.read_csv(workspace["truth"] / "truth_0_2.csv")
        assert list(df.columns) == ["x0", "x2", "effect"]
        assert len(df) == 21 * 21

    def test_unknown_kind_is_runtime_error(self, tmp_path):
        rc = main(["simulate", "--kind", "nope", "--out", str(tmp_path / "x.csv")])
        assert rc == 1

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--kind", "scaling"])
        assert exc.value.code == 2


class TestFitCommand:
    def test_model_written(self, workspace):
        doc = json.loads(workspace["model"].read_text())
        assert doc["format_version"] == 1
        assert doc["column_names"] == ["x0", "x1", "x2"]

    def test_log_rows_per_epoch(self, workspace):
        df = pd.read_csv(workspace["log"])
        assert list(df.columns) == [
            "epoch", "train_loss", "valid_loss", "penalty", "seconds"
        ]
        assert list(df["epoch"]) == [1, 2, 3]

    def test_missing_data_file(self, tmp_path):
        rc = main(["fit", "--data", str(tmp_path / "nope.csv"),
                   "--model", str(tmp_path / "m.json")])
        assert rc == 1


class TestConfigFile:
    def test_config_values_used(self, workspace, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nmax_epochs = 2\nfactors = 2\nnum_basis = 6\n")
        log = tmp_path / "log.csv"
        rc = main(["fit", "--data", str(workspace["train"]),
                   "--model", str(tmp_path / "m.json"), "--log", str(log),
                   "--config", str(cfg)])
        assert rc == 0
        assert list(pd.read_csv(log)["epoch"]) == [1, 2]

    def test_flag_overrides_config(self, workspace, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("max_epochs = 2\nfactors = 2\nnum_basis = 6\n")
        log = tmp_path / "log.csv"
        rc = main(["fit", "--data", str(workspace["train"]),
                   "--model", str(tmp_path / "m.json"), "--log", str(log),
                   "--config", str(cfg), "--max-epochs", "3"])
        assert rc == 0
        assert list(pd.read_csv(log)["epoch"]) == [1, 2, 3]

    def test_malformed_line(self, workspace, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("max_epochs 2\n")
        rc = main(["fit", "--data", str(workspace["train"]),
                   "--model", str(tmp_path / "m.json"), "--config", str(cfg)])
        assert rc == 2

    def test_unknown_key(self, workspace, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("momentum = 0.9\n")
        rc = main(["fit", "--data", str(workspace["train"]),
                   "--model", str(tmp_path / "m.json"), "--config", str(cfg)])
        assert rc == 2


class TestPredictCommand:
    def test_predictions_match_library(self, workspace, tmp_path):
        out = tmp_path / "pred.csv"
        rc = main(["predict", "--model", str(workspace["model"]),
                   "--data", str(workspace["test"]), "--out", str(out)])
        assert rc == 0
        # full-precision floats are written; parse them back losslessly
        pred = pd.read_csv(out, float_precision="round_trip")["prediction"]
        state = load_model(workspace["model"])
        x = _feature_frame(str(workspace["test"]), state.column_names)
        np.testing.assert_array_equal(
            pred.to_numpy(), core.predict_response(x, state)
        )

    def test_stdout_output(self, workspace, capsys):
        rc = main(["predict", "--model", str(workspace["model"]),
                   "--data", str(workspace["test"]), "--out", "-"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "prediction"
        assert len(lines) == 61


class TestSmoothCommand:
    def test_table_schema(self, workspace, tmp_path):
        out = tmp_path / "table.csv"
        rc = main(["smooth", "--data", str(workspace["train"]),
                   "--num-basis", "6", "--factors", "2", "--out", str(out)])
        assert rc == 0
        df = pd.read_csv(out)
        assert list(df.columns) == ["degree", "feature", "factor", "lambda",
                                    "df_target"]
        # degree 1: one row per feature; degree 2: factors x features
        assert len(df[df["degree"] == 1]) == 3
        assert len(df[df["degree"] == 2]) == 6
        assert (df["lambda"] >= 0).all()


class TestEffectsCommand:
    def test_pair_surface_csv(self, workspace, tmp_path):
        out = tmp_path / "surf.csv"
        rc = main(["effects", "--model", str(workspace["model"]),
                   "--pair", "x0,x1", "--grid-points", "5", "--out", str(out)])
        assert rc == 0
        df = pd.read_csv(out)
        assert list(df.columns) == ["x0", "x1", "effect"]
        assert len(df) == 25

    def test_marginal_csv(self, workspace, tmp_path):
        out = tmp_path / "marg.csv"
        rc = main(["effects", "--model", str(workspace["model"]),
                   "--term", "x0,x2", "--feature", "2", "--grid-points", "4",
                   "--draws", "64", "--out", str(out)])
        assert rc == 0
        df = pd.read_csv(out)
        assert list(df.columns) == ["term", "feature", "grid_value", "mean",
                                    "q05", "q95"]
        assert set(df["term"]) == {"x0*x2"}
        assert set(df["feature"]) == {"x2"}
        assert len(df) == 4

    def test_pair_and_term_exclusive(self, workspace):
        rc = main(["effects", "--model", str(workspace["model"]),
                   "--pair", "x0,x1", "--term", "x0,x1"])
        assert rc == 2
        rc = main(["effects", "--model", str(workspace["model"])])
        assert rc == 2

    def test_unknown_feature(self, workspace):
        rc = main(["effects", "--model", str(workspace["model"]),
                   "--pair", "x0,banana"])
        assert rc == 2

    def test_index_out_of_range(self, workspace):
        rc = main(["effects", "--model", str(workspace["model"]),
                   "--pair", "0,7"])
        assert rc == 2


class TestStudyCommands:
    def test_bench_csv(self, tmp_path):
        out = tmp_path / "bench.csv"
        rc = main(["bench", "--p-list", "2,4", "--n-list", "400",
                   "--epochs", "1", "--repeats", "1", "--out", str(out)])
        assert rc == 0
        df = pd.read_csv(out)
        assert list(df.columns) == ["p", "n", "seconds", "peak_bytes"]
        assert list(df["p"]) == [2, 4]
        assert (df["peak_bytes"] > 0).all()

    @pytest.mark.filterwarnings("ignore:singular normal equations")
    def test_compare_csv(self, tmp_path):
        out = tmp_path / "cmp.csv"
        rc = main(["compare", "--n-list", "300", "--factors", "1",
                   "--seeds", "1", "--max-epochs", "5", "--out", str(out)])
        assert rc == 0
        df = pd.read_csv(out)
        assert list(df.columns) == [
            "n", "factors", "seed", "afm_surface_mse", "gam_surface_mse",
            "afm_test_mse", "gam_test_mse",
        ]
        assert len(df) == 1
        assert (df.to_numpy() >= 0).all()


class TestParser:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
