"""Central-difference verification of every hand-written backward pass.

Each (model kind, strategy) pair gets closures over the scalar losses the
strategy backpropagates; the harness probes random parameter coordinates and
compares analytic gradients against central finite differences. Dropout is
disabled and training negatives are fully enumerated so every closure is a
deterministic function of the parameter vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .datasets import synthetic_graph
from .diffmath import GradCheckReport, ParameterVector, finite_diff_check
from .graph_core import with_self_loops
from .models import MODEL_KINDS, Model, ModelConfig, build_model
from .split_builder import SplitBundle, build_split
from .strategies import (
    STRATEGY_KINDS,
    multiclass_epoch,
    task_losses,
)

# Scalar losses each strategy differentiates. The multi-objective strategy
# combines the three task gradients, so those inputs are checked one by one.
GRADCHECK_LOSSES: dict[str, tuple[str, ...]] = {
    "baseline": ("L_G",),
    "mc": ("L_MC",),
    "s": ("scalarized",),
    "mo": ("L_G", "L_D", "L_B"),
}

_S_ALPHA = (0.5, 0.3, 0.2)  # fixed valid weights for the scalarized closure


def harness_bundle(
    num_nodes: int = 20, num_uni: int = 40, num_bi: int = 8, seed: int = 7
) -> tuple[SplitBundle, object]:
    """Small random graph plus a split whose training sets are non-empty."""
    g = synthetic_graph(num_nodes=num_nodes, num_uni=num_uni, num_bi=num_bi, seed=seed)
    rng = np.random.default_rng(seed)
    bundle = build_split(g, seed=rng)
    return bundle, g


def _model_for(kind: str, strategy: str, bundle: SplitBundle, seed: int) -> tuple[Model, ParameterVector]:
    config = ModelConfig(
        kind=kind,
        hidden_dim=16,
        output_dim=8,
        dropout=0.0,  # checks run without dropout so the loss is deterministic
        class_head=(kind == "mlp" and strategy == "mc"),
    )
    model = build_model(config, with_self_loops(bundle.train_graph))
    theta = model.init_params(np.random.default_rng(seed))
    return model, theta


def make_loss_fn(
    model: Model, theta: ParameterVector, bundle: SplitBundle, strategy: str, loss_name: str
) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
    """Closure mapping a flat parameter vector to (scalar loss, full gradient)."""
    work = theta.copy()

    def fn(values: np.ndarray) -> tuple[float, np.ndarray]:
        work.values[:] = values
        rng = np.random.default_rng(0)  # unused: negatives are enumerated
        if strategy == "mc":
            me = multiclass_epoch(model, work, bundle, neg_rng=rng, full_negatives=True)
            return me.loss, me.grad.copy()
        tl = task_losses(model, work, bundle, neg_rng=rng, full_negatives=True)
        if loss_name == "L_G":
            return tl.l_g, tl.g_g.copy()
        if loss_name == "L_D":
            return tl.l_d, tl.g_d.copy()
        if loss_name == "L_B":
            return tl.l_b, tl.g_b.copy()
        if loss_name == "scalarized":
            a_g, a_d, a_b = _S_ALPHA
            loss = a_g * tl.l_g + a_d * tl.l_d + a_b * tl.l_b
            grad = a_g * tl.g_g + a_d * tl.g_d + a_b * tl.g_b
            return loss, grad
        raise ValueError(f"unknown loss {loss_name!r}")

    return fn


@dataclass
class PairCheck:
    model: str
    strategy: str
    loss: str
    report: GradCheckReport

    @property
    def ok(self) -> bool:
        return self.report.ok

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        return (
            f"model={self.model:8s} strategy={self.strategy:8s} loss={self.loss:10s} "
            f"max_rel={self.report.max_rel_error:.3e} {status}"
        )


def run_gradcheck(
    kinds: Sequence[str] = MODEL_KINDS,
    strategies: Sequence[str] = STRATEGY_KINDS,
    num_nodes: int = 20,
    eps: float = 1e-5,
    tol: float = 1e-4,
    n_coords: int = 200,
    seed: int = 7,
) -> list[PairCheck]:
    """Probe every requested (model, strategy) pair; one result per closure."""
    bundle, _ = harness_bundle(num_nodes=num_nodes, seed=seed)
    results: list[PairCheck] = []
    for kind in kinds:
        for strategy in strategies:
            model, theta = _model_for(kind, strategy, bundle, seed)
            for loss_name in GRADCHECK_LOSSES[strategy]:
                fn = make_loss_fn(model, theta, bundle, strategy, loss_name)
                report = finite_diff_check(
                    fn,
                    theta,
                    eps=eps,
                    tol=tol,
                    n_coords=n_coords,
                    rng=np.random.default_rng(seed + 1),
                )
                results.append(PairCheck(kind, strategy, loss_name, report))
    return results
