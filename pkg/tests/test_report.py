"""Result tables and rendered figures."""
from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from dirlink.config import ExperimentConfig
from dirlink.report import (
    RESULTS_COLUMNS,
    plot_summary,
    plot_training_curves,
    write_results_csv,
    write_results_json,
)
from dirlink.training import (
    EVAL_METRICS,
    EVAL_TASKS,
    ExperimentResult,
    SeedRun,
    aggregate_metrics,
)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _seed_run(seed: int, base: float, status: str = "ok") -> SeedRun:
    if status != "ok":
        return SeedRun(seed=seed, status=status, error="diverged")
    metrics = {
        t: {m: base + 0.01 * i for i, m in enumerate(EVAL_METRICS)} for t in EVAL_TASKS
    }
    return SeedRun(
        seed=seed,
        status="ok",
        metrics=metrics,
        best_epoch=4,
        best_score=5.5,
        epochs_run=9,
        stop_reason="patience",
    )


@pytest.fixture
def result() -> ExperimentResult:
    config = ExperimentConfig(dataset="synthetic", model="gravity", strategy="s", seeds=(0, 1, 2))
    runs = [_seed_run(0, 0.81), _seed_run(1, 0.84), _seed_run(2, 0.0, status="failed")]
    return ExperimentResult(
        config=config,
        dataset_name="synthetic",
        seed_runs=runs,
        aggregates=aggregate_metrics(runs),
    )


class TestResultsCsv:
    def test_one_row_per_task_metric(self, result, tmp_path):
        path = tmp_path / "results.csv"
        write_results_csv(result, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(RESULTS_COLUMNS)
        assert len(rows) == 1 + len(EVAL_TASKS) * len(EVAL_METRICS)
        seen = {(r[3], r[4]) for r in rows[1:]}
        assert seen == {(t, m) for t in EVAL_TASKS for m in EVAL_METRICS}

    def test_values_parse_back_exactly(self, result, tmp_path):
        path = tmp_path / "results.csv"
        write_results_csv(result, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            cell = result.aggregates[row["task"]][row["metric"]]
            assert float(row["mean"]) == cell["mean"]
            assert float(row["std"]) == cell["std"]
            assert int(row["n_seeds"]) == 2
            assert row["dataset"] == "synthetic"
            assert row["model"] == "gravity"
            assert row["strategy"] == "s"


class TestResultsJson:
    def test_full_record_roundtrips(self, result, tmp_path):
        path = tmp_path / "results.json"
        write_results_json(result, path)
        payload = json.loads(path.read_text())
        assert payload["dataset"] == "synthetic"
        assert payload["partial"] is True
        assert payload["n_seeds_succeeded"] == 2
        assert ExperimentConfig.from_dict(payload["config"]) == result.config
        assert len(payload["seeds"]) == 3
        failed = [s for s in payload["seeds"] if s["status"] == "failed"]
        assert failed[0]["best_score"] is None  # NaN encodes as null
        agg = payload["aggregates"]["general"]["roc_auc"]
        assert agg["mean"] == result.mean("general", "roc_auc")


class TestFigures:
    def test_training_curves_render_png(self, tmp_path):
        trace = []
        for epoch in range(6):
            row = dict.fromkeys(("L_G", "L_D", "L_B", "L_MC"), "")
            row.update(
                epoch=epoch,
                L_G=1.0 / (epoch + 1),
                L_D=0.5 / (epoch + 1),
                L_B=0.25,
                val_score=4.0 + 0.1 * epoch,
            )
            trace.append(row)
        path = tmp_path / "curves.png"
        plot_training_curves(trace, path)
        assert path.read_bytes()[:8] == PNG_MAGIC

    def test_summary_renders_png(self, result, tmp_path):
        path = tmp_path / "summary.png"
        plot_summary(result, path)
        assert path.read_bytes()[:8] == PNG_MAGIC
        assert path.stat().st_size > 1000

    def test_empty_trace_still_renders(self, tmp_path):
        path = tmp_path / "empty.png"
        plot_training_curves([], path)
        assert path.read_bytes()[:8] == PNG_MAGIC
