import json

import numpy as np
import pytest

from ahofm import core
from ahofm.core import ModelConfig
from ahofm.data import Dataset
from ahofm.model_io import load_model, save_model, to_document
from ahofm.train import TrainOptions, fit_adam


def fitted_state(seed=0, loss="gaussian"):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(120, 3))
    y = np.sin(x[:, 0]) + x[:, 1] * x[:, 2] + 0.2 * rng.normal(size=120)
    if loss == "bernoulli":
        y = (y > 0).astype(float)
    ds = Dataset(x, y, ["u", "v", "w"])
    config = ModelConfig(
        factor_counts={2: 3},
        df_targets={1: 4.0, 2: 4.0},
        loss_family=loss,
        num_basis=7,
    )
    state = fit_adam(ds, config, TrainOptions(max_epochs=5, seed=seed))
    return ds, state


class TestRoundTrip:
    def test_file_is_byte_stable(self, tmp_path):
        _, state = fitted_state(seed=1)
        first = tmp_path / "m1.json"
        second = tmp_path / "m2.json"
        save_model(state, first)
        save_model(load_model(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_predictions_bit_identical(self, tmp_path):
        ds, state = fitted_state(seed=2)
        path = tmp_path / "m.json"
        save_model(state, path)
        loaded = load_model(path)
        np.testing.assert_array_equal(
            core.predict_eta(ds.x, loaded), core.predict_eta(ds.x, state)
        )

    def test_bernoulli_response_scale_preserved(self, tmp_path):
        ds, state = fitted_state(seed=3, loss="bernoulli")
        path = tmp_path / "m.json"
        save_model(state, path)
        loaded = load_model(path)
        pred = core.predict_response(ds.x, loaded)
        np.testing.assert_array_equal(pred, core.predict_response(ds.x, state))
        assert np.all((pred > 0) & (pred < 1))

    def test_loaded_model_has_no_data_caches(self, tmp_path):
        ds, state = fitted_state(seed=4)
        path = tmp_path / "m.json"
        save_model(state, path)
        loaded = load_model(path)
        assert loaded.bases is None and loaded.y is None
        assert loaded.epoch == state.epoch
        assert loaded.column_names == ["u", "v", "w"]
        # predicting new points needs only specs and parameters
        x_new = np.random.default_rng(9).normal(size=(10, 3))
        assert np.all(np.isfinite(core.predict_eta(x_new, loaded)))

    def test_smoothing_table_round_trips(self, tmp_path):
        _, state = fitted_state(seed=5)
        path = tmp_path / "m.json"
        save_model(state, path)
        loaded = load_model(path)
        assert loaded.table.lambdas == state.table.lambdas
        assert loaded.table.df_targets == state.table.df_targets


class TestDocument:
    def test_layout(self):
        _, state = fitted_state(seed=6)
        doc = to_document(state)
        assert doc["format_version"] == 1
        assert set(doc["params"]["gamma"]) == {"2"}
        assert len(doc["params"]["beta"]) == 3
        assert len(doc["specs"]) == 3
        # every value JSON-serializable without numpy types
        json.dumps(doc)

    def test_version_mismatch_rejected(self, tmp_path):
        _, state = fitted_state(seed=7)
        path = tmp_path / "m.json"
        save_model(state, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="unsupported model format version 99"):
            load_model(path)
