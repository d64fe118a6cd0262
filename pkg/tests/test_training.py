"""Training loop, early stopping, evaluation, and the experiment runner."""
from __future__ import annotations

import csv

import numpy as np
import pytest

import dirlink.training as training
from dirlink.config import ExperimentConfig
from dirlink.datasets import synthetic_graph
from dirlink.errors import TrainingDiverged
from dirlink.graph_core import with_self_loops
from dirlink.models import build_model, score_edges
from dirlink.split_builder import build_split
from dirlink.training import (
    EVAL_METRICS,
    EVAL_TASKS,
    RNG_STREAMS,
    SeedRun,
    TRACE_COLUMNS,
    aggregate_metrics,
    edge_probabilities,
    evaluate,
    fork_streams,
    run_experiment,
    train_run,
    write_trace_csv,
)

from .conftest import OracleModel


def _config(**kw) -> ExperimentConfig:
    base = dict(
        dataset="synthetic",
        model="gae",
        strategy="s",
        seeds=(0,),
        epochs=10,
        patience=3,
        hidden_dim=8,
        output_dim=4,
        dropout=0.0,
    )
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def twelve_bundle():
    g = synthetic_graph(num_nodes=12, num_uni=20, num_bi=7, seed=21)
    return build_split(g, seed=fork_streams(1)["split"])


class TestForkStreams:
    def test_stream_names(self):
        streams = fork_streams(0)
        assert tuple(streams) == RNG_STREAMS

    def test_reproducible_per_seed(self):
        a = fork_streams(5)
        b = fork_streams(5)
        for name in RNG_STREAMS:
            assert a[name].random() == b[name].random()

    def test_streams_differ_from_each_other(self):
        streams = fork_streams(0)
        draws = {name: streams[name].random() for name in RNG_STREAMS}
        assert len(set(draws.values())) == len(RNG_STREAMS)

    def test_seeds_differ(self):
        assert fork_streams(0)["init"].random() != fork_streams(1)["init"].random()


class TestTrainRunWithOracle:
    def test_constant_score_stops_after_patience(self, small_graph, small_bundle):
        model = OracleModel(small_graph)
        outcome = train_run(
            _config(strategy="s", patience=1, epochs=50),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        assert outcome.epochs_run == 2
        assert outcome.best_epoch == 0
        assert outcome.stop_reason == "patience"

    def test_perfect_model_scores_six_at_epoch_zero(self, small_graph, small_bundle):
        model = OracleModel(small_graph, margin=40.0)
        outcome = train_run(
            _config(strategy="s", patience=2, epochs=50),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        assert outcome.best_epoch == 0
        assert outcome.best_score == 6.0

    def test_baseline_score_caps_at_two(self, small_graph, small_bundle):
        model = OracleModel(small_graph, margin=40.0)
        outcome = train_run(
            _config(strategy="baseline", patience=1, epochs=10),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        assert outcome.best_score == 2.0

    def test_zero_gradients_are_pareto_stationary(self, small_graph, small_bundle):
        model = OracleModel(small_graph)
        outcome = train_run(
            _config(strategy="mo", patience=5, epochs=50),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        assert outcome.stop_reason == "pareto_stationary"
        assert outcome.epochs_run == 1

    def test_epoch_budget_stop_reason(self, small_graph, small_bundle):
        model = OracleModel(small_graph)
        outcome = train_run(
            _config(strategy="s", patience=100, epochs=3),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        assert outcome.stop_reason == "epochs"
        assert outcome.epochs_run == 3

    def test_scalarization_starts_uniform(self, small_graph, small_bundle):
        model = OracleModel(small_graph)
        outcome = train_run(
            _config(strategy="s", patience=2, epochs=5),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        first = outcome.trace[0]
        assert first["w_G"] == first["w_D"] == first["w_B"] == pytest.approx(1 / 3)

    def test_trace_rows_follow_schema(self, small_graph, small_bundle):
        model = OracleModel(small_graph)
        outcome = train_run(
            _config(strategy="mc", patience=2, epochs=4),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        for row in outcome.trace:
            assert set(row) == set(TRACE_COLUMNS)
            assert isinstance(row["L_MC"], float)
            assert row["L_G"] == ""  # unused columns stay blank for mc
        assert [r["epoch"] for r in outcome.trace] == list(range(outcome.epochs_run))


class TestTrainRunRealModels:
    def test_twelve_node_gravity_mc_loss_decreases(self, twelve_bundle):
        config = _config(
            model="gravity",
            strategy="mc",
            epochs=200,
            patience=200,
            hidden_dim=16,
            output_dim=8,
            full_negatives=True,
            lr=0.01,
        )
        outcome = train_run(config, twelve_bundle, seed=0)
        first = outcome.trace[0]["L_MC"]
        last = outcome.trace[-1]["L_MC"]
        assert np.isfinite(first) and np.isfinite(last)
        assert last < first

    def test_same_seed_reproduces_trace_exactly(self, small_bundle):
        config = _config(model="gravity", strategy="s", epochs=5, patience=5, dropout=0.5)
        a = train_run(config, small_bundle, seed=3)
        b = train_run(config, small_bundle, seed=3)
        assert a.trace == b.trace
        assert np.array_equal(a.best_theta.values, b.best_theta.values)
        assert (a.best_epoch, a.best_score) == (b.best_epoch, b.best_score)

    def test_different_seeds_diverge(self, small_bundle):
        config = _config(model="gravity", strategy="s", epochs=3, patience=3)
        a = train_run(config, small_bundle, seed=0)
        b = train_run(config, small_bundle, seed=1)
        assert a.trace[0]["L_G"] != b.trace[0]["L_G"]

    def test_mgda_on_adam_variant_runs(self, small_bundle):
        config = _config(model="gravity", strategy="mo", epochs=3, patience=3, mgda_on_adam=True)
        outcome = train_run(config, small_bundle, seed=0)
        assert outcome.epochs_run >= 1
        for row in outcome.trace:
            assert np.isfinite(row["dir_norm"])

    def test_best_theta_is_snapshot_not_alias(self, small_bundle):
        config = _config(model="gravity", strategy="baseline", epochs=4, patience=4)
        model = build_model(config.model_config(), with_self_loops(small_bundle.train_graph))
        theta = model.init_params(fork_streams(0)["init"])
        outcome = train_run(config, small_bundle, seed=0, model=model, theta=theta)
        assert outcome.best_theta.values is not theta.values
        if outcome.best_epoch < outcome.epochs_run - 1:
            assert not np.array_equal(outcome.best_theta.values, theta.values)


class TestEvaluate:
    def test_perfect_oracle_scores_one_everywhere(self, small_graph, small_bundle):
        model = OracleModel(small_graph, margin=40.0)
        metrics = evaluate(model, model.init_params(None), small_bundle, stage="test")
        for task in EVAL_TASKS:
            for metric in EVAL_METRICS:
                assert metrics[task][metric] == 1.0

    def test_symmetric_decoder_directional_roc_is_exactly_half(self, small_bundle):
        config = _config(model="gae", strategy="baseline")
        model = build_model(config.model_config(), with_self_loops(small_bundle.train_graph))
        theta = model.init_params(fork_streams(7)["init"])
        metrics = evaluate(model, theta, small_bundle, stage="test")
        assert metrics["directional"]["roc_auc"] == 0.5

    def test_random_parameters_yield_finite_metrics(self, small_bundle):
        config = _config(model="st", strategy="s")
        model = build_model(config.model_config(), with_self_loops(small_bundle.train_graph))
        theta = model.init_params(fork_streams(2)["init"])
        metrics = evaluate(model, theta, small_bundle, stage="val")
        for task in EVAL_TASKS:
            for metric in EVAL_METRICS:
                assert 0.0 <= metrics[task][metric] <= 1.0

    def test_evaluation_is_deterministic(self, small_bundle):
        config = _config(model="mlp", strategy="s", dropout=0.5)
        model = build_model(config.model_config(), with_self_loops(small_bundle.train_graph))
        theta = model.init_params(fork_streams(4)["init"])
        assert evaluate(model, theta, small_bundle) == evaluate(model, theta, small_bundle)


class TestEdgeProbabilities:
    def test_sigmoid_path_matches_score_edges(self, small_bundle):
        config = _config(model="gravity", strategy="s")
        model = build_model(config.model_config(), with_self_loops(small_bundle.train_graph))
        theta = model.init_params(fork_streams(0)["init"])
        pairs = small_bundle.general.test.pairs()[:10]
        cache = model.encode(theta)
        assert np.array_equal(
            edge_probabilities(model, theta, cache, pairs), score_edges(model, theta, pairs)
        )

    def test_class_head_reports_edge_existence_mass(self, small_bundle):
        config = _config(model="mlp", strategy="mc")
        model = build_model(config.model_config(), with_self_loops(small_bundle.train_graph))
        theta = model.init_params(fork_streams(0)["init"])
        pairs = small_bundle.general.test.pairs()[:10]
        cache = model.encode(theta)
        p = edge_probabilities(model, theta, cache, pairs)
        rows = score_edges(model, theta, pairs)  # softmax rows (n, 4)
        assert np.allclose(p, rows[:, 2] + rows[:, 3], atol=1e-15)
        assert np.all((p > 0) & (p < 1))


class TestTraceCsv:
    def test_roundtrip_preserves_floats_exactly(self, small_graph, small_bundle, tmp_path):
        model = OracleModel(small_graph, margin=1.0)
        outcome = train_run(
            _config(strategy="s", epochs=3, patience=3),
            small_bundle,
            seed=0,
            model=model,
            theta=model.init_params(None),
        )
        path = tmp_path / "trace.csv"
        write_trace_csv(outcome.trace, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(TRACE_COLUMNS)
        assert len(rows) == 1 + len(outcome.trace)
        for raw, row in zip(rows[1:], outcome.trace):
            parsed = dict(zip(TRACE_COLUMNS, raw))
            assert float(parsed["val_score"]) == row["val_score"]
            assert float(parsed["L_G"]) == row["L_G"]
            assert int(parsed["epoch"]) == row["epoch"]
            assert parsed["L_MC"] == ""


class TestAggregation:
    @staticmethod
    def _ok(seed: int, value: float) -> SeedRun:
        metrics = {t: {m: value for m in EVAL_METRICS} for t in EVAL_TASKS}
        return SeedRun(seed=seed, status="ok", metrics=metrics)

    def test_single_seed_std_is_zero(self):
        agg = aggregate_metrics([self._ok(7, 0.9)])
        assert agg["general"]["roc_auc"] == {"mean": 0.9, "std": 0.0, "values": [0.9]}

    def test_two_seeds_sample_std(self):
        agg = aggregate_metrics([self._ok(0, 0.8), self._ok(1, 0.9)])
        cell = agg["directional"]["auprc"]
        assert cell["mean"] == pytest.approx(0.85)
        assert cell["std"] == pytest.approx(np.std([0.8, 0.9], ddof=1))

    def test_failed_seeds_excluded(self):
        runs = [self._ok(0, 0.8), SeedRun(seed=1, status="failed", error="boom")]
        agg = aggregate_metrics(runs)
        assert agg["general"]["roc_auc"]["values"] == [0.8]

    def test_all_failed_gives_nan(self):
        agg = aggregate_metrics([SeedRun(seed=0, status="failed", error="x")])
        assert np.isnan(agg["general"]["roc_auc"]["mean"])
        assert np.isnan(agg["general"]["roc_auc"]["std"])


class TestRunExperiment:
    def test_repeated_seed_gives_identical_runs_and_zero_std(self):
        config = _config(
            model="gravity", strategy="baseline", seeds=(3, 3), epochs=2, patience=2
        )
        result = run_experiment(config)
        a, b = result.seed_runs
        assert a.status == b.status == "ok"
        assert a.metrics == b.metrics
        for task in EVAL_TASKS:
            assert result.std(task, "roc_auc") == 0.0
        assert not result.partial
        assert result.dataset_name == "synthetic"

    def test_failed_seed_marks_experiment_partial(self, monkeypatch):
        real_run_seed = training.run_seed

        def flaky(config, graph, seed, dataset_name, out_dir=None):
            if seed == 1:
                raise TrainingDiverged("synthetic failure for testing")
            return real_run_seed(config, graph, seed, dataset_name, out_dir)

        monkeypatch.setattr(training, "run_seed", flaky)
        config = _config(
            model="gravity", strategy="baseline", seeds=(0, 1), epochs=2, patience=2
        )
        echoes: list[str] = []
        result = run_experiment(config, echo=echoes.append)
        assert result.partial
        assert result.n_seeds_succeeded == 1
        statuses = {r.seed: r.status for r in result.seed_runs}
        assert statuses == {0: "ok", 1: "failed"}
        assert any("FAILED" in line for line in echoes)
        ok_value = result.seed_runs[0].metrics["general"]["roc_auc"]
        assert result.mean("general", "roc_auc") == ok_value
