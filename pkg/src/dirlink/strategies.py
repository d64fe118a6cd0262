"""The four training objectives over one shared model interface.

  baseline  weighted binary cross-entropy on the General (existence) set
  mc        four-class cross-entropy over the joint state of (u,v),(v,u)
  s         scalarization: convex combination of the three task losses
  mo        multi-objective: Adam consumes the min-norm point of the convex
            hull of the three task gradients (MGDA)

Losses are means over pairs. Task gradients are computed jointly over all
trainable parameters. The step-direction dispatch at the bottom is the only
place the four strategies differ from the optimizer's point of view.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diffmath import sigmoid, softplus
from .errors import ConfigError, ContractViolation, InputError
from .graph_core import EdgeClass, census
from .models import Model
from .split_builder import (
    EvalSet,
    SplitBundle,
    build_general_train,
    build_multiclass_train,
    enumerate_general_train,
)

STRATEGY_KINDS = ("baseline", "mc", "s", "mo")

# Probability floor inside the multi-class log; clamped pairs contribute a
# constant penalty and no gradient, and are counted in diagnostics.
CLASS_PROB_FLOOR = 1e-12

# Below this direction norm MGDA reports Pareto-stationarity.
STATIONARY_NORM = 1e-12

SCALARIZATION_NORMS = ("sum", "max", "minmax")


# ---------------------------------------------------------------------------
# Losses


def loss_weighted_bce(logits, labels, pos_weight: float = 1.0):
    """Mean of -[pos_weight * y * ln p + (1-y) * ln(1-p)], p = sigmoid(logit).

    Computed in logit space (softplus) so saturated predictions stay finite.
    Returns (loss, dloss/dlogits).
    """
    logits = np.asarray(logits, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if logits.size == 0:
        raise InputError("empty batch")
    if logits.shape != labels.shape:
        raise InputError("logits and labels must align")
    if pos_weight <= 0:
        raise InputError(f"pos_weight must be positive, got {pos_weight}")
    n = logits.size
    per = pos_weight * labels * softplus(-logits) + (1.0 - labels) * softplus(logits)
    p = sigmoid(logits)
    dlogits = (pos_weight * labels * (p - 1.0) + (1.0 - labels) * p) / n
    return float(per.mean()), dlogits


def class_weights(cns) -> dict[EdgeClass, float]:
    """Inverse-frequency class weights, anchored at the most numerous class.

    w_c = n_x / n_c with x the argmax class; empty classes get weight 0 and
    are thereby excluded from the loss.
    """
    counts = {c: int(cns[c]) for c in EdgeClass}
    n_x = max(counts.values())
    if n_x == 0:
        raise InputError("all four classes are empty")
    return {c: (n_x / n if n > 0 else 0.0) for c, n in counts.items()}


def factorize_multiclass(p_uv, p_vu) -> np.ndarray:
    """Joint four-class probabilities from the two directed edge
    probabilities, assuming independence of the two directions:

        [ (1-p_uv)(1-p_vu), (1-p_uv) p_vu, p_uv (1-p_vu), p_uv p_vu ]

    Rows sum to 1 up to rounding. Accepts scalars or aligned arrays; the
    column order matches EdgeClass (NB, NU, PU, PB).
    """
    a = np.asarray(p_uv, dtype=np.float64)
    b = np.asarray(p_vu, dtype=np.float64)
    out = np.stack(
        [(1.0 - a) * (1.0 - b), (1.0 - a) * b, a * (1.0 - b), a * b], axis=-1
    )
    return out


def factorize_backward(p_uv, p_vu, dprobs) -> tuple[np.ndarray, np.ndarray]:
    """Chain rule through :func:`factorize_multiclass`."""
    a = np.asarray(p_uv, dtype=np.float64)
    b = np.asarray(p_vu, dtype=np.float64)
    d = np.asarray(dprobs, dtype=np.float64)
    d_nb, d_nu, d_pu, d_pb = d[..., 0], d[..., 1], d[..., 2], d[..., 3]
    da = -(1.0 - b) * d_nb - b * d_nu + (1.0 - b) * d_pu + b * d_pb
    db = -(1.0 - a) * d_nb + (1.0 - a) * d_nu - a * d_pu + a * d_pb
    return da, db


def loss_multiclass(class_probs, labels, weights: dict[EdgeClass, float]):
    """Weighted four-class cross-entropy, mean over pairs.

    ``class_probs`` is (n, 4) in EdgeClass column order; ``labels`` is a
    sequence of EdgeClass. Returns (loss, dloss/dclass_probs, n_clamped).
    """
    probs = np.asarray(class_probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != 4:
        raise InputError("class_probs must be (n, 4)")
    idx = np.asarray([int(c) for c in labels], dtype=np.int64)
    if idx.shape[0] != probs.shape[0]:
        raise InputError("labels must align with class_probs rows")
    if probs.shape[0] == 0:
        raise InputError("empty batch")
    w = np.asarray([weights[EdgeClass(i)] for i in range(4)], dtype=np.float64)
    w_row = w[idx]
    p_true = probs[np.arange(idx.size), idx]
    clamped = p_true < CLASS_PROB_FLOOR
    p_safe = np.maximum(p_true, CLASS_PROB_FLOOR)
    n = idx.size
    loss = float(np.mean(w_row * -np.log(p_safe)))
    dprobs = np.zeros_like(probs)
    live = ~clamped
    dprobs[np.arange(n)[live], idx[live]] = -w_row[live] / (p_safe[live] * n)
    return loss, dprobs, int(clamped.sum())


def softmax_class_loss(logits4, labels, weights: dict[EdgeClass, float]):
    """Weighted cross-entropy straight from 4 logits (the mlp class head)."""
    logits = np.asarray(logits4, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != 4:
        raise InputError("class logits must be (n, 4)")
    idx = np.asarray([int(c) for c in labels], dtype=np.int64)
    if idx.shape[0] != logits.shape[0] or idx.size == 0:
        raise InputError("labels must align with a nonempty logit batch")
    w = np.asarray([weights[EdgeClass(i)] for i in range(4)], dtype=np.float64)
    w_row = w[idx]
    n = idx.size
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    logp_true = logits[np.arange(n), idx] - lse
    loss = float(np.mean(w_row * -logp_true))
    sm = np.exp(logits - lse[:, None])
    onehot = np.zeros_like(logits)
    onehot[np.arange(n), idx] = 1.0
    dlogits = (sm - onehot) * w_row[:, None] / n
    return loss, dlogits


# ---------------------------------------------------------------------------
# Per-epoch task losses and gradients


@dataclass
class TaskLosses:
    l_g: float
    l_d: float
    l_b: float
    g_g: np.ndarray
    g_d: np.ndarray
    g_b: np.ndarray

    def as_dict(self) -> dict[str, float]:
        return {"general": self.l_g, "directional": self.l_d, "bidirectional": self.l_b}


def _bce_on_pairs(model, theta, cache, pairs, labels, pos_weight, train, rng):
    us = [p[0] for p in pairs]
    vs = [p[1] for p in pairs]
    logits, pc = model.pair_logits(theta, cache, us, vs, train=train, rng=rng)
    loss, dlogits = loss_weighted_bce(logits, labels, pos_weight)
    grad = model.backward_pairs(theta, cache, pc, dlogits)
    return loss, grad


def _general_train_set(bundle: SplitBundle, neg_rng, full_negatives: bool) -> EvalSet:
    if full_negatives:
        return enumerate_general_train(bundle.train_graph)
    return build_general_train(bundle.train_graph, neg_rng, bundle.neg_ratio)


def task_losses(
    model: Model,
    theta,
    bundle: SplitBundle,
    *,
    neg_rng: np.random.Generator,
    dropout_rng: np.random.Generator | None = None,
    include_self_loops: bool = True,
    full_negatives: bool = False,
) -> TaskLosses:
    """The three per-epoch training losses and their full gradients.

    General negatives are resampled from this epoch's ``neg_rng`` (or fully
    enumerated); self-loops enter the General set as positives. Order of
    computation is fixed (General, Directional, Bidirectional) so RNG
    consumption is reproducible.
    """
    cache = model.encode(theta)

    general = _general_train_set(bundle, neg_rng, full_negatives)
    pos = list(general.positives)
    if include_self_loops:
        pos += [(v, v) for v in range(bundle.train_graph.num_nodes)]
    pairs_g = pos + list(general.negatives)
    labels_g = np.concatenate([np.ones(len(pos)), np.zeros(len(general.negatives))])
    if len(general.negatives) == 0:
        raise ConfigError("General training set has no negatives")
    pos_weight = len(general.negatives) / len(pos)
    l_g, g_g = _bce_on_pairs(
        model, theta, cache, pairs_g, labels_g, pos_weight, True, dropout_rng
    )

    d_train = bundle.directional.train
    if d_train.size == 0:
        raise ConfigError("Directional training set is empty")
    l_d, g_d = _bce_on_pairs(
        model, theta, cache, d_train.pairs(), d_train.labels(), 1.0, True, dropout_rng
    )

    b_train = bundle.bidirectional.train
    if b_train.size == 0:
        raise ConfigError("Bidirectional training set is empty")
    l_b, g_b = _bce_on_pairs(
        model, theta, cache, b_train.pairs(), b_train.labels(), 1.0, True, dropout_rng
    )

    for name, l in (("general", l_g), ("directional", l_d), ("bidirectional", l_b)):
        if not np.isfinite(l):
            raise ContractViolation(f"{name} loss is not finite")
    return TaskLosses(l_g, l_d, l_b, g_g, g_d, g_b)


@dataclass
class MulticlassEpoch:
    loss: float
    grad: np.ndarray
    weights: dict[EdgeClass, float]
    counts: dict[EdgeClass, int]
    n_clamped: int


def multiclass_epoch(
    model: Model,
    theta,
    bundle: SplitBundle,
    *,
    neg_rng: np.random.Generator,
    dropout_rng: np.random.Generator | None = None,
    full_negatives: bool = False,
) -> MulticlassEpoch:
    """One epoch of the four-class objective.

    The supervision set is the General training set (fresh negatives unless
    fully enumerated) plus every self-loop labeled NB; labels and class
    weights are recomputed against the training graph each epoch.
    """
    general = _general_train_set(bundle, neg_rng, full_negatives)
    labeled = build_multiclass_train(bundle.train_graph, general)
    pairs = [p for p, _ in labeled]
    labels = [c for _, c in labeled]
    counts: dict[EdgeClass, int] = {c: 0 for c in EdgeClass}
    for c in labels:
        counts[c] += 1
    weights = class_weights(_CountsView(counts))

    cache = model.encode(theta)
    us = [p[0] for p in pairs]
    vs = [p[1] for p in pairs]

    if model.config.class_head:
        logits4, pc = model.pair_class_logits(
            theta, cache, us, vs, train=True, rng=dropout_rng
        )
        loss, dlogits4 = softmax_class_loss(logits4, labels, weights)
        grad = model.backward_class_pairs(theta, cache, pc, dlogits4)
        n_clamped = 0
    else:
        logits_fwd, pc_fwd = model.pair_logits(
            theta, cache, us, vs, train=True, rng=dropout_rng
        )
        logits_rev, pc_rev = model.pair_logits(
            theta, cache, vs, us, train=True, rng=dropout_rng
        )
        p_uv = sigmoid(logits_fwd)
        p_vu = sigmoid(logits_rev)
        probs = factorize_multiclass(p_uv, p_vu)
        loss, dprobs, n_clamped = loss_multiclass(probs, labels, weights)
        da, db = factorize_backward(p_uv, p_vu, dprobs)
        dl_fwd = da * p_uv * (1.0 - p_uv)
        dl_rev = db * p_vu * (1.0 - p_vu)
        grad = model.backward_pairs(theta, cache, pc_fwd, dl_fwd)
        grad = grad + model.backward_pairs(theta, cache, pc_rev, dl_rev)

    if not np.isfinite(loss):
        raise ContractViolation("multi-class loss is not finite")
    return MulticlassEpoch(loss, grad, weights, counts, n_clamped)


class _CountsView:
    """Adapter so plain count dicts satisfy the census lookup protocol."""

    def __init__(self, counts: dict[EdgeClass, int]):
        self._c = counts

    def __getitem__(self, c: EdgeClass) -> int:
        return self._c.get(c, 0)


def validation_losses(model: Model, theta, bundle: SplitBundle) -> tuple[float, float, float]:
    """Plain mean BCE of the three validation sets, evaluation mode.

    These feed the next epoch's scalarization weights.
    """
    cache = model.encode(theta)
    out = []
    for task in ("general", "directional", "bidirectional"):
        es = bundle.task(task).val
        us = [p[0] for p in es.pairs()]
        vs = [p[1] for p in es.pairs()]
        if model.config.class_head:
            from .diffmath import softmax_rows  # local: avoids cycle at import

            logits4, _ = model.pair_class_logits(theta, cache, us, vs, train=False)
            p_edge = softmax_rows(logits4)[:, (int(EdgeClass.PU), int(EdgeClass.PB))].sum(axis=1)
            p_edge = np.clip(p_edge, CLASS_PROB_FLOOR, 1.0 - 1e-12)
            logits = np.log(p_edge) - np.log1p(-p_edge)
        else:
            logits, _ = model.pair_logits(theta, cache, us, vs, train=False)
        loss, _ = loss_weighted_bce(logits, es.labels(), 1.0)
        out.append(loss)
    return tuple(out)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Scalarization and MGDA


def scalarization_weights(
    prev_val_losses: tuple[float, float, float] | None,
    norm: str = "sum",
) -> tuple[float, float, float]:
    """Task weights from the previous epoch's validation losses.

    With no history (epoch 0) or an all-zero vector the weights are uniform.
    ``norm`` picks the normalization: divide-by-sum (default, weights form a
    convex combination), divide-by-max, or min-max rescaling.
    """
    if norm not in SCALARIZATION_NORMS:
        raise ConfigError(f"unknown scalarization norm {norm!r}")
    if prev_val_losses is None:
        return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    l = np.asarray(prev_val_losses, dtype=np.float64)
    if l.shape != (3,) or np.any(l < 0) or not np.all(np.isfinite(l)):
        raise InputError("validation losses must be three finite non-negative floats")
    if norm == "sum":
        s = l.sum()
        if s == 0:
            return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        w = l / s
    elif norm == "max":
        m = l.max()
        if m == 0:
            return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        w = l / m
    else:  # minmax
        lo, hi = l.min(), l.max()
        if hi == lo:
            return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        w = (l - lo) / (hi - lo)
    return (float(w[0]), float(w[1]), float(w[2]))


@dataclass
class MgdaSolution:
    weights: np.ndarray
    direction: np.ndarray
    norm: float

    @property
    def stationary(self) -> bool:
        return self.norm < STATIONARY_NORM


def _min_norm_pair(g11: float, g12: float, g22: float) -> tuple[float, float]:
    # Weight on the first gradient minimizing ||a*g1 + (1-a)*g2||.
    denom = g11 - 2.0 * g12 + g22
    if denom <= 0.0:
        return 0.5, 0.5
    a = (g22 - g12) / denom
    a = min(1.0, max(0.0, a))
    return a, 1.0 - a


def _simplex_quadratic(gram: np.ndarray, alpha: np.ndarray) -> float:
    return float(alpha @ gram @ alpha)


def _frank_wolfe(gram: np.ndarray, max_iter: int = 100, min_improvement: float = 1e-10) -> np.ndarray:
    k = gram.shape[0]
    alpha = np.full(k, 1.0 / k)
    f = _simplex_quadratic(gram, alpha)
    for _ in range(max_iter):
        t = int(np.argmin(gram @ alpha))
        a = f
        c = float(gram[t] @ alpha)
        b = float(gram[t, t])
        denom = a - 2.0 * c + b
        if denom <= 0.0:
            gamma = 1.0 if b < a else 0.0
        else:
            gamma = min(1.0, max(0.0, (a - c) / denom))
        new_alpha = (1.0 - gamma) * alpha
        new_alpha[t] += gamma
        new_f = _simplex_quadratic(gram, new_alpha)
        improved = f - new_f
        alpha, f = new_alpha, new_f
        if improved < min_improvement:
            break
    return alpha


def _exact_simplex_min_norm(gram: np.ndarray) -> np.ndarray:
    """Global min of a'Ga over the simplex by enumerating its faces.

    For 2 or 3 gradients every face has a closed form (vertices, segment
    projections, and the equality-constrained interior stationary point), so
    the best candidate is the exact minimizer up to linear-algebra rounding.
    """
    k = gram.shape[0]
    candidates: list[np.ndarray] = []
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        candidates.append(e)
    for i in range(k):
        for j in range(i + 1, k):
            ai, aj = _min_norm_pair(gram[i, i], gram[i, j], gram[j, j])
            e = np.zeros(k)
            e[i], e[j] = ai, aj
            candidates.append(e)
    if k == 3:
        try:
            x = np.linalg.solve(gram, np.ones(k))
        except np.linalg.LinAlgError:
            x = np.linalg.lstsq(gram, np.ones(k), rcond=None)[0]
        s = x.sum()
        if s > 0:
            interior = x / s
            if np.all(interior >= -1e-12):
                candidates.append(np.maximum(interior, 0.0) / np.maximum(interior, 0.0).sum())
    values = [_simplex_quadratic(gram, a) for a in candidates]
    return candidates[int(np.argmin(values))]


def mgda_min_norm(gradients: list[np.ndarray]) -> MgdaSolution:
    """Minimum-norm point of the convex hull of 2 or 3 task gradients.

    Two gradients use the closed form directly. Three gradients run
    Frank-Wolfe on the 3x3 Gram matrix (absolute improvement threshold
    1e-10, at most 100 iterations) and the result is replaced by the exact
    face-enumeration minimizer whenever that is shorter; the exact step is
    what makes the optimality certificate hold at machine precision even
    for small-norm gradients.
    """
    if len(gradients) not in (2, 3):
        raise InputError(f"mgda_min_norm expects 2 or 3 gradients, got {len(gradients)}")
    gs = [np.asarray(g, dtype=np.float64).ravel() for g in gradients]
    dim = gs[0].size
    if dim == 0:
        raise InputError("zero-length gradients")
    for g in gs:
        if g.size != dim:
            raise InputError("gradient length mismatch")
        if not np.all(np.isfinite(g)):
            raise InputError("non-finite gradient")
    k = len(gs)
    gram = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            gram[i, j] = gram[j, i] = float(np.dot(gs[i], gs[j]))

    if k == 2:
        a1, a2 = _min_norm_pair(gram[0, 0], gram[0, 1], gram[1, 1])
        alpha = np.array([a1, a2])
    else:
        alpha = _frank_wolfe(gram)
        exact = _exact_simplex_min_norm(gram)
        if _simplex_quadratic(gram, exact) < _simplex_quadratic(gram, alpha):
            alpha = exact

    direction = sum(a * g for a, g in zip(alpha, gs))
    norm = float(np.linalg.norm(direction))
    return MgdaSolution(alpha, direction, norm)


# ---------------------------------------------------------------------------
# Step-direction dispatch


@dataclass
class StepInfo:
    direction: np.ndarray
    losses: dict[str, float]
    weights: tuple[float, ...] | None = None
    stationary: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def direction_norm(self) -> float:
        return float(np.linalg.norm(self.direction))


def strategy_step_direction(
    strategy: str,
    losses: TaskLosses | MulticlassEpoch,
    aux: dict | None = None,
) -> StepInfo:
    """Turn this epoch's losses/gradients into one optimizer direction.

    baseline: the General gradient alone. s: sum of task gradients weighted
    by ``aux['alpha']``. mo: the MGDA min-norm direction (flags
    Pareto-stationarity when its norm vanishes). mc: the four-class
    gradient.
    """
    aux = aux or {}
    if strategy == "baseline":
        if not isinstance(losses, TaskLosses):
            raise InputError("baseline expects TaskLosses")
        return StepInfo(losses.g_g, {"L_G": losses.l_g})
    if strategy == "s":
        if not isinstance(losses, TaskLosses):
            raise InputError("s expects TaskLosses")
        alpha = aux.get("alpha")
        if alpha is None:
            raise InputError("s strategy needs aux['alpha']")
        a_g, a_d, a_b = (float(a) for a in alpha)
        direction = a_g * losses.g_g + a_d * losses.g_d + a_b * losses.g_b
        return StepInfo(
            direction,
            {"L_G": losses.l_g, "L_D": losses.l_d, "L_B": losses.l_b},
            weights=(a_g, a_d, a_b),
        )
    if strategy == "mo":
        if not isinstance(losses, TaskLosses):
            raise InputError("mo expects TaskLosses")
        grads = aux.get("preconditioned_grads")
        if grads is None:
            grads = [losses.g_g, losses.g_d, losses.g_b]
        sol = mgda_min_norm(grads)
        return StepInfo(
            sol.direction,
            {"L_G": losses.l_g, "L_D": losses.l_d, "L_B": losses.l_b},
            weights=tuple(float(w) for w in sol.weights),
            stationary=sol.stationary,
            diagnostics={"mgda_norm": sol.norm},
        )
    if strategy == "mc":
        if not isinstance(losses, MulticlassEpoch):
            raise InputError("mc expects MulticlassEpoch")
        return StepInfo(
            losses.grad,
            {"L_MC": losses.loss},
            diagnostics={"n_clamped": losses.n_clamped},
        )
    raise ConfigError(f"unknown strategy {strategy!r}")
