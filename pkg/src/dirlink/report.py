"""Delimited result tables and rendered figures for finished experiments.

Figures are drawn with the Agg backend so runs work headless; every figure is
written next to the CSV/JSON output it illustrates.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

RESULTS_COLUMNS = ("dataset", "model", "strategy", "task", "metric", "mean", "std", "n_seeds")

_LOSS_KEYS = ("L_G", "L_D", "L_B", "L_MC")
_LOSS_LABELS = {
    "L_G": "general",
    "L_D": "directional",
    "L_B": "bidirectional",
    "L_MC": "four-class",
}
_TASK_LABELS = {
    "general": "General",
    "directional": "Directional",
    "bidirectional": "Bidirectional",
}
_METRIC_LABELS = {"roc_auc": "ROC-AUC", "auprc": "AUPRC"}


def write_results_csv(result, path: str | Path) -> None:
    """One row per (task, metric): mean and sample std across seeds."""
    from .training import EVAL_METRICS, EVAL_TASKS

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for task in EVAL_TASKS:
            for metric in EVAL_METRICS:
                cell = result.aggregates[task][metric]
                writer.writerow(
                    [
                        result.dataset_name,
                        result.config.model,
                        result.config.strategy,
                        task,
                        metric,
                        repr(cell["mean"]),
                        repr(cell["std"]),
                        result.n_seeds_succeeded,
                    ]
                )


def write_results_json(result, path: str | Path) -> None:
    """Full experiment record: config, per-seed outcomes, aggregates."""
    payload = {
        "config": result.config.to_dict(),
        "dataset": result.dataset_name,
        "partial": result.partial,
        "n_seeds_succeeded": result.n_seeds_succeeded,
        "aggregates": result.aggregates,
        "seeds": [
            {
                "seed": r.seed,
                "status": r.status,
                "metrics": r.metrics,
                "best_epoch": r.best_epoch,
                "best_score": None if np.isnan(r.best_score) else r.best_score,
                "epochs_run": r.epochs_run,
                "stop_reason": r.stop_reason,
                "error": r.error,
            }
            for r in result.seed_runs
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def plot_training_curves(trace: Sequence[dict], path: str | Path) -> None:
    """Two panels per run: training losses and the validation score."""
    epochs = [row["epoch"] for row in trace]
    fig, (ax_loss, ax_score) = plt.subplots(1, 2, figsize=(10, 4))

    plotted_any = False
    for key in _LOSS_KEYS:
        ys = [row.get(key) for row in trace]
        pts = [(e, y) for e, y in zip(epochs, ys) if isinstance(y, float)]
        if pts:
            ax_loss.plot([p[0] for p in pts], [p[1] for p in pts], label=_LOSS_LABELS[key])
            plotted_any = True
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("training loss")
    if plotted_any:
        ax_loss.legend()
    ax_loss.set_title("Training losses")

    scores = [row["val_score"] for row in trace]
    ax_score.plot(epochs, scores, color="tab:green")
    if trace:
        best = max(range(len(scores)), key=scores.__getitem__)
        ax_score.axvline(epochs[best], color="tab:gray", linestyle="--", linewidth=1)
    ax_score.set_xlabel("epoch")
    ax_score.set_ylabel("validation score")
    ax_score.set_title("Early-stopping score")

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_summary(result, path: str | Path) -> None:
    """Grouped bars: test ROC-AUC and AUPRC per sub-task, std as error bars."""
    from .training import EVAL_METRICS, EVAL_TASKS

    x = np.arange(len(EVAL_TASKS))
    width = 0.35
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, metric in enumerate(EVAL_METRICS):
        means = [result.aggregates[t][metric]["mean"] for t in EVAL_TASKS]
        stds = [result.aggregates[t][metric]["std"] for t in EVAL_TASKS]
        ax.bar(
            x + (i - 0.5) * width,
            means,
            width,
            yerr=stds,
            capsize=4,
            label=_METRIC_LABELS[metric],
        )
    ax.set_xticks(x)
    ax.set_xticklabels([_TASK_LABELS[t] for t in EVAL_TASKS])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("test score")
    ax.set_title(
        f"{result.dataset_name}: {result.config.model} / {result.config.strategy} "
        f"({result.n_seeds_succeeded} seeds)"
    )
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
