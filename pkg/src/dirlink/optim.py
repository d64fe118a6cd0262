"""Adam with bias correction, operating on flat parameter vectors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, TrainingDiverged


@dataclass
class AdamState:
    dim: int
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    t: int = 0
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("AdamState needs a positive dimension")
        self.m = np.zeros(self.dim, dtype=np.float64)
        self.v = np.zeros(self.dim, dtype=np.float64)


def adam_step(
    values: np.ndarray, grad: np.ndarray, state: AdamState, lr: float
) -> np.ndarray:
    """One bias-corrected Adam update. Returns the new parameter vector;
    the state's moments and step counter advance in place."""
    values = np.asarray(values, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != values.shape or grad.shape != (state.dim,):
        raise InputError("parameter, gradient and state dimensions must agree")
    if not np.all(np.isfinite(grad)):
        raise TrainingDiverged("non-finite gradient reached the optimizer")
    if lr <= 0:
        raise InputError(f"learning rate must be positive, got {lr}")
    if state.weight_decay:
        grad = grad + state.weight_decay * values
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return values - lr * m_hat / (np.sqrt(v_hat) + state.eps)


def preconditioned_direction(grad: np.ndarray, state: AdamState, lr_free: bool = True) -> np.ndarray:
    """The Adam update direction for ``grad`` without applying it.

    Used by the variant that feeds per-task Adam directions into the
    min-norm combination instead of raw gradients. Advances the state.
    """
    if not np.all(np.isfinite(grad)):
        raise TrainingDiverged("non-finite gradient reached the optimizer")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return m_hat / (np.sqrt(v_hat) + state.eps)
