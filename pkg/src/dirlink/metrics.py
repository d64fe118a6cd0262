"""Ranking metrics with exact tie handling, plus the early-stopping score.

Both metrics treat tied scores the way the underlying definitions demand:
ROC-AUC counts a tied positive-negative pair as half concordant (midrank
Mann-Whitney), and AUPRC walks the precision-recall curve one distinct
score at a time so a tie block contributes a single point.
"""
from __future__ import annotations

import numpy as np

from .errors import InputError

_EVAL_TASKS = ("general", "directional", "bidirectional")


def _validate(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise InputError("scores and labels must have matching length")
    if scores.size == 0:
        raise InputError("empty score array")
    if not np.all(np.isfinite(scores)):
        raise InputError("scores must be finite")
    uniq = np.unique(labels)
    if not np.all(np.isin(uniq, (0, 1))):
        raise InputError("labels must be 0 or 1")
    labels = labels.astype(np.int64)
    return scores, labels


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via midranks.

    Equals (concordant + 0.5 * tied) / (n_pos * n_neg) over all
    positive-negative pairs. Requires both classes present.
    """
    scores, labels = _validate(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("roc_auc needs at least one positive and one negative")

    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # 1-based ranks i+1..j+1 share the midrank.
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = float(ranks[labels == 1].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def auprc(scores, labels) -> float:
    """Area under the precision-recall curve (average precision).

    Computed as sum over distinct thresholds of (R_k - R_{k-1}) * P_k,
    descending through unique scores, so ties form one curve point.
    Requires at least one positive.
    """
    scores, labels = _validate(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise InputError("auprc needs at least one positive")

    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    predicted = np.arange(1, y.size + 1)
    # Block ends: last index of each run of equal scores.
    block_end = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    recall = tp[block_end] / n_pos
    precision = tp[block_end] / predicted[block_end]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * precision))


def early_stop_score(val_metrics: dict, strategy: str) -> float:
    """Validation model-selection score.

    The baseline strategy trains only the existence objective, so it is
    selected on General ROC-AUC + AUPRC; every multi-task strategy sums both
    metrics over the General, Directional and Bidirectional validation sets.
    """
    tasks = ("general",) if strategy == "baseline" else _EVAL_TASKS
    total = 0.0
    for task in tasks:
        try:
            m = val_metrics[task]
            total += float(m["roc_auc"]) + float(m["auprc"])
        except KeyError as exc:
            raise InputError(f"missing validation metrics for task {task!r}") from exc
    return total
