"""Training loop with validation-score early stopping, plus the multi-seed
experiment runner that reproduces the results tables.

One master seed per run forks into named substreams (split, init, dropout,
negatives), so toggling one consumer never perturbs the others. Runs are
sequential and fully deterministic given (config, seed).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .datasets import load_dataset_full
from .diffmath import ParameterVector, sigmoid, softmax_rows
from .errors import ConfigError, ContractViolation, TrainingDiverged
from .graph_core import DirectedGraph, EdgeClass, with_self_loops
from .metrics import auprc, early_stop_score, roc_auc
from .models import Model, build_model, save_checkpoint
from .optim import AdamState, adam_step, preconditioned_direction
from .split_builder import SplitBundle, build_split, save_split, validate_split
from .strategies import (
    StepInfo,
    multiclass_epoch,
    scalarization_weights,
    strategy_step_direction,
    task_losses,
    validation_losses,
)

RNG_STREAMS = ("split", "init", "dropout", "negatives")

EVAL_TASKS = ("general", "directional", "bidirectional")
EVAL_METRICS = ("roc_auc", "auprc")

TRACE_COLUMNS = (
    "epoch",
    "L_G",
    "L_D",
    "L_B",
    "L_MC",
    "w_G",
    "w_D",
    "w_B",
    "dir_norm",
    "val_roc_general",
    "val_ap_general",
    "val_roc_directional",
    "val_ap_directional",
    "val_roc_bidirectional",
    "val_ap_bidirectional",
    "val_score",
    "best_epoch",
)


def fork_streams(seed: int) -> dict[str, np.random.Generator]:
    """Named independent generators derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(len(RNG_STREAMS))
    return {name: np.random.default_rng(c) for name, c in zip(RNG_STREAMS, children)}


def edge_probabilities(model: Model, theta: ParameterVector, cache: dict, pairs) -> np.ndarray:
    """p(edge) for a pair list in eval mode. The 4-class head reports
    P(PU) + P(PB), the probability that the forward direction exists."""
    us = [p[0] for p in pairs]
    vs = [p[1] for p in pairs]
    if model.config.class_head:
        logits4, _ = model.pair_class_logits(theta, cache, us, vs, train=False)
        probs = softmax_rows(logits4)
        return probs[:, int(EdgeClass.PU)] + probs[:, int(EdgeClass.PB)]
    logits, _ = model.pair_logits(theta, cache, us, vs, train=False)
    return np.asarray(sigmoid(logits))


def evaluate(
    model: Model, theta: ParameterVector, bundle: SplitBundle, stage: str = "test"
) -> dict[str, dict[str, float]]:
    """ROC-AUC and AUPRC for the three sub-tasks at one stage (val/test)."""
    cache = model.encode(theta)
    out: dict[str, dict[str, float]] = {}
    for task in EVAL_TASKS:
        es = bundle.task(task).stage(stage)
        scores = edge_probabilities(model, theta, cache, es.pairs())
        labels = es.labels()
        out[task] = {
            "roc_auc": float(roc_auc(scores, labels)),
            "auprc": float(auprc(scores, labels)),
        }
    return out


@dataclass
class TrainOutcome:
    best_theta: ParameterVector
    best_epoch: int
    best_score: float
    epochs_run: int
    stop_reason: str
    trace: list[dict] = field(default_factory=list)


def _compute_step(
    config: ExperimentConfig,
    model: Model,
    theta: ParameterVector,
    bundle: SplitBundle,
    streams: dict[str, np.random.Generator],
    prev_val_losses: tuple[float, float, float] | None,
    task_adam: list[AdamState] | None,
) -> StepInfo:
    dropout_rng = streams["dropout"] if model.config.dropout > 0 else None
    if config.strategy == "mc":
        me = multiclass_epoch(
            model,
            theta,
            bundle,
            neg_rng=streams["negatives"],
            dropout_rng=dropout_rng,
            full_negatives=config.full_negatives,
        )
        return strategy_step_direction("mc", me)
    tl = task_losses(
        model,
        theta,
        bundle,
        neg_rng=streams["negatives"],
        dropout_rng=dropout_rng,
        include_self_loops=True,
        full_negatives=config.full_negatives,
    )
    if config.strategy == "baseline":
        return strategy_step_direction("baseline", tl)
    if config.strategy == "s":
        alpha = scalarization_weights(prev_val_losses, config.scalarization_norm)
        return strategy_step_direction("s", tl, {"alpha": alpha})
    if config.strategy == "mo":
        aux = {}
        if config.mgda_on_adam and task_adam is not None:
            aux["preconditioned_grads"] = [
                preconditioned_direction(g, st)
                for g, st in zip((tl.g_g, tl.g_d, tl.g_b), task_adam)
            ]
        return strategy_step_direction("mo", tl, aux)
    raise ConfigError(f"unknown strategy {config.strategy!r}")


def train_run(
    config: ExperimentConfig,
    bundle: SplitBundle,
    seed: int,
    model: Model | None = None,
    theta: ParameterVector | None = None,
    lr: float | None = None,
    dataset_name: str | None = None,
) -> TrainOutcome:
    """Train one seed to early stopping.

    Per epoch: losses and gradients on the training sets, one strategy step
    direction, one Adam update, then validation metrics on the updated
    parameters. The best-validation snapshot is kept; training stops after
    ``patience`` epochs without improvement, at the epoch budget, or at a
    Pareto-stationary point.
    """
    streams = fork_streams(seed)
    if model is None:
        model = build_model(config.model_config(), with_self_loops(bundle.train_graph))
    if theta is None:
        theta = model.init_params(streams["init"])
    lr = lr if lr is not None else config.resolved_lr(dataset_name)

    adam = AdamState(theta.size)
    task_adam = (
        [AdamState(theta.size) for _ in range(3)]
        if (config.strategy == "mo" and config.mgda_on_adam)
        else None
    )
    prev_val_losses: tuple[float, float, float] | None = None
    best_score = -np.inf
    best_theta = theta.copy()
    best_epoch = -1
    since_best = 0
    trace: list[dict] = []
    stop_reason = "epochs"
    epochs_run = 0

    for epoch in range(config.epochs):
        info = _compute_step(
            config, model, theta, bundle, streams, prev_val_losses, task_adam
        )
        theta.values[:] = adam_step(theta.values, info.direction, adam, lr)
        epochs_run = epoch + 1

        val_metrics = evaluate(model, theta, bundle, stage="val")
        score = early_stop_score(val_metrics, config.strategy)
        if config.strategy == "s":
            prev_val_losses = validation_losses(model, theta, bundle)

        if score > best_score:
            best_score = score
            best_epoch = epoch
            best_theta = theta.copy()
            since_best = 0
        else:
            since_best += 1

        row: dict = {c: "" for c in TRACE_COLUMNS}
        row["epoch"] = epoch
        row.update({k: v for k, v in info.losses.items()})
        if info.weights is not None:
            row["w_G"], row["w_D"], row["w_B"] = info.weights
        row["dir_norm"] = info.direction_norm
        for task in EVAL_TASKS:
            short = {"general": "general", "directional": "directional", "bidirectional": "bidirectional"}[task]
            row[f"val_roc_{short}"] = val_metrics[task]["roc_auc"]
            row[f"val_ap_{short}"] = val_metrics[task]["auprc"]
        row["val_score"] = score
        row["best_epoch"] = best_epoch
        trace.append(row)

        if info.stationary:
            stop_reason = "pareto_stationary"
            break
        if since_best >= config.patience:
            stop_reason = "patience"
            break

    return TrainOutcome(best_theta, best_epoch, best_score, epochs_run, stop_reason, trace)


def write_trace_csv(trace: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace:
            writer.writerow(
                [
                    repr(row[c]) if isinstance(row[c], float) else row[c]
                    for c in TRACE_COLUMNS
                ]
            )


@dataclass
class SeedRun:
    seed: int
    status: str  # "ok" | "failed"
    metrics: dict[str, dict[str, float]] | None = None
    best_epoch: int = -1
    best_score: float = float("nan")
    epochs_run: int = 0
    stop_reason: str = ""
    error: str = ""
    trace: list[dict] = field(default_factory=list)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    dataset_name: str
    seed_runs: list[SeedRun]
    aggregates: dict[str, dict[str, dict[str, float]]]

    @property
    def n_seeds_succeeded(self) -> int:
        return sum(1 for r in self.seed_runs if r.status == "ok")

    @property
    def partial(self) -> bool:
        return self.n_seeds_succeeded < len(self.seed_runs)

    def mean(self, task: str, metric: str) -> float:
        return self.aggregates[task][metric]["mean"]

    def std(self, task: str, metric: str) -> float:
        return self.aggregates[task][metric]["std"]


def aggregate_metrics(seed_runs: Sequence[SeedRun]) -> dict:
    """Mean and sample standard deviation (n-1) across successful seeds."""
    out: dict = {}
    ok = [r for r in seed_runs if r.status == "ok" and r.metrics]
    for task in EVAL_TASKS:
        out[task] = {}
        for metric in EVAL_METRICS:
            values = [r.metrics[task][metric] for r in ok]
            if values:
                mean = float(np.mean(values))
                std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            else:
                mean, std = float("nan"), float("nan")
            out[task][metric] = {"mean": mean, "std": std, "values": values}
    return out


def run_seed(
    config: ExperimentConfig,
    graph: DirectedGraph,
    seed: int,
    dataset_name: str,
    out_dir: Path | None = None,
) -> SeedRun:
    """Split, train and evaluate a single seed; artifacts land in out_dir."""
    streams = fork_streams(seed)
    bundle = build_split(
        graph, config.fractions, seed=streams["split"], neg_ratio=config.neg_ratio
    )
    report = validate_split(bundle, graph)
    if not report.ok:
        failed = ", ".join(c.name for c in report.failures())
        raise ContractViolation(f"split validation failed: {failed}")
    if out_dir is not None:
        save_split(bundle, out_dir / "split")

    model = build_model(config.model_config(), with_self_loops(bundle.train_graph))
    theta = model.init_params(streams["init"])
    outcome = train_run(
        config, bundle, seed, model=model, theta=theta, dataset_name=dataset_name
    )
    metrics = evaluate(model, outcome.best_theta, bundle, stage="test")

    if out_dir is not None:
        write_trace_csv(outcome.trace, out_dir / "trace.csv")
        save_checkpoint(out_dir / "checkpoint.npz", outcome.best_theta, model.config)
        from . import report as report_mod

        report_mod.plot_training_curves(outcome.trace, out_dir / "curves.png")

    return SeedRun(
        seed=seed,
        status="ok",
        metrics=metrics,
        best_epoch=outcome.best_epoch,
        best_score=outcome.best_score,
        epochs_run=outcome.epochs_run,
        stop_reason=outcome.stop_reason,
        trace=outcome.trace,
    )


def run_experiment(config: ExperimentConfig, echo=None) -> ExperimentResult:
    """Fresh split + training + test evaluation per seed, then aggregation.

    A failing seed (divergence, contract violation) marks the experiment
    partial but does not abort the remaining seeds. When config.out is set,
    per-seed artifacts, results.csv/results.json and summary figures are
    written there.
    """
    dataset = load_dataset_full(config.dataset, config.data_root)
    out_root = Path(config.out) if config.out else None
    if out_root is not None:
        out_root.mkdir(parents=True, exist_ok=True)
        if dataset.path is not None or dataset.mapping:
            from .graph_core import write_node_mapping

            write_node_mapping(dataset.mapping, out_root / "node_ids.csv")

    seed_runs: list[SeedRun] = []
    for seed in config.seeds:
        seed_dir = out_root / "runs" / f"seed_{seed}" if out_root else None
        if seed_dir is not None:
            seed_dir.mkdir(parents=True, exist_ok=True)
        try:
            run = run_seed(config, dataset.graph, seed, dataset.name, seed_dir)
        except (TrainingDiverged, ContractViolation, ConfigError) as exc:
            run = SeedRun(seed=seed, status="failed", error=str(exc))
        seed_runs.append(run)
        if echo:
            if run.status == "ok":
                echo(
                    f"seed {seed}: best epoch {run.best_epoch}, "
                    f"val score {run.best_score:.4f}, "
                    f"stopped by {run.stop_reason} after {run.epochs_run} epochs"
                )
            else:
                echo(f"seed {seed}: FAILED: {run.error}")

    result = ExperimentResult(
        config=config,
        dataset_name=dataset.name,
        seed_runs=seed_runs,
        aggregates=aggregate_metrics(seed_runs),
    )
    if out_root is not None:
        from . import report as report_mod

        report_mod.write_results_csv(result, out_root / "results.csv")
        report_mod.write_results_json(result, out_root / "results.json")
        report_mod.plot_summary(result, out_root / "summary.png")
    return result
