"""Experiment configuration: defaults, validation, learning-rate table, IO."""
from __future__ import annotations

import json

import pytest

from dirlink.config import (
    DEFAULT_LR,
    DEFAULT_SEEDS,
    ExperimentConfig,
    default_lr,
)
from dirlink.errors import ConfigError
from dirlink.split_builder import SplitFractions


def _cfg(**kw) -> ExperimentConfig:
    base = dict(dataset="synthetic", model="gravity", strategy="baseline")
    base.update(kw)
    return ExperimentConfig(**base)


class TestDefaults:
    def test_five_default_seeds(self):
        c = _cfg()
        assert c.seeds == DEFAULT_SEEDS == (0, 1, 2, 3, 4)
        assert c.epochs == 1000
        assert c.patience == 200
        assert c.dropout == 0.5

    def test_lr_left_for_table_resolution(self):
        assert _cfg().lr is None


class TestValidation:
    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            _cfg(model="gcn")

    def test_unknown_strategy(self):
        with pytest.raises(ConfigError):
            _cfg(strategy="curriculum")

    def test_empty_seeds(self):
        with pytest.raises(ConfigError):
            _cfg(seeds=())

    def test_bad_epochs_patience(self):
        with pytest.raises(ConfigError):
            _cfg(epochs=0)
        with pytest.raises(ConfigError):
            _cfg(patience=0)

    def test_bad_lr(self):
        with pytest.raises(ConfigError):
            _cfg(lr=0.0)

    def test_bad_neg_ratio(self):
        with pytest.raises(ConfigError):
            _cfg(neg_ratio=0)

    def test_bad_scalarization_norm(self):
        with pytest.raises(ConfigError):
            _cfg(scalarization_norm="softmax")


class TestLearningRateTable:
    def test_tuned_entries(self):
        assert default_lr("cora", "baseline", "gravity") == 0.01
        assert default_lr("citeseer", "baseline", "gravity") == 0.05
        assert default_lr("cora", "mc", "mlp") == 0.001
        assert default_lr("cora", "s", "mlp") == 0.002
        assert default_lr("web", "mc", "digae") == 0.002

    def test_gae_baseline_special_case_everywhere(self):
        for ds in ("cora", "citeseer", "web", "anything"):
            assert default_lr(ds, "baseline", "gae") == 0.05

    def test_unlisted_combination_falls_back(self):
        assert default_lr("synthetic", "s", "gravity") == DEFAULT_LR

    def test_resolved_lr_prefers_explicit_value(self):
        assert _cfg(lr=0.123).resolved_lr() == 0.123

    def test_resolved_lr_uses_dataset_name(self):
        c = _cfg(dataset="cora", model="gravity", strategy="baseline")
        assert c.resolved_lr() == 0.01
        assert c.resolved_lr("citeseer") == 0.05

    def test_resolved_lr_derives_name_from_path_stem(self):
        c = _cfg(dataset="/some/where/CiteSeer.edges", model="gravity", strategy="s")
        assert c.resolved_lr() == 0.05


class TestModelConfig:
    def test_class_head_only_for_mlp_with_mc(self):
        assert _cfg(model="mlp", strategy="mc").model_config().class_head
        assert not _cfg(model="mlp", strategy="s").model_config().class_head
        assert not _cfg(model="gravity", strategy="mc").model_config().class_head

    def test_forwarding_of_dimensions(self):
        mc = _cfg(hidden_dim=16, output_dim=8, activation="identity", dropout=0.0).model_config()
        assert (mc.hidden_dim, mc.output_dim, mc.activation, mc.dropout) == (16, 8, "identity", 0.0)


class TestSerialization:
    def test_dict_roundtrip(self):
        c = _cfg(
            seeds=(7, 8),
            lr=0.005,
            fractions=SplitFractions(0.2, 0.1, 0.3, 0.15),
            full_negatives=True,
        )
        assert ExperimentConfig.from_dict(c.to_dict()) == c

    def test_dict_is_json_compatible(self):
        d = _cfg().to_dict()
        assert ExperimentConfig.from_dict(json.loads(json.dumps(d))) == _cfg()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict(
                {"dataset": "synthetic", "model": "gae", "strategy": "baseline", "optimizer": "sgd"}
            )
        assert "optimizer" in str(err.value)

    def test_from_file(self, tmp_path):
        payload = {
            "dataset": "synthetic",
            "model": "st",
            "strategy": "mo",
            "seeds": [1, 2, 3],
            "epochs": 50,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(payload))
        c = ExperimentConfig.from_file(path)
        assert c.model == "st"
        assert c.seeds == (1, 2, 3)
        assert c.epochs == 50

    def test_with_overrides_skips_none(self):
        c = _cfg(epochs=100)
        d = c.with_overrides(epochs=None, patience=9, seeds=[4, 5])
        assert d.epochs == 100
        assert d.patience == 9
        assert d.seeds == (4, 5)

    def test_with_overrides_revalidates(self):
        with pytest.raises(ConfigError):
            _cfg().with_overrides(strategy="annealed")
