"""Numeric kernels, stable scalar nonlinearities, parameter flattening,
and the finite-difference gradient oracle.

Everything is float64. Dense matrices are numpy arrays; sparse matrices are
scipy CSR in canonical form (sorted indices, no duplicates). The handwritten
backward passes in :mod:`dirlink.models` and :mod:`dirlink.strategies` are
all checked against :func:`finite_diff_check`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, InputError
from .graph_core import DirectedGraph

DenseMatrix = np.ndarray
SparseMatrix = sp.csr_matrix

_TINY = float(np.finfo(np.float64).smallest_subnormal)
_ONE_MINUS = float(np.nextafter(1.0, 0.0))


def sigmoid(x):
    """Numerically stable logistic function.

    Branches on sign so neither tail overflows; outputs are clamped to the
    open interval (0, 1) in float64 (the true value of sigmoid(-1000)
    underflows to 0, which would poison log-space consumers).
    """
    arr = np.asarray(x, dtype=np.float64)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    np.clip(out, _TINY, _ONE_MINUS, out=out)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def softplus(x):
    """log(1 + exp(x)) without overflow."""
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def relu(x):
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# Activations available to the encoders. Each entry is (f, df_from_preact).
ACTIVATIONS: dict[str, tuple[Callable, Callable]] = {
    "relu": (relu, lambda a: (a > 0).astype(np.float64)),
    "identity": (lambda a: np.asarray(a, dtype=np.float64), lambda a: np.ones_like(a)),
    "sigmoid": (sigmoid, lambda a: sigmoid(a) * (1.0 - sigmoid(a))),
}


def spmm(a: SparseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Sparse @ dense product returning a dense float64 array."""
    if not sp.issparse(a):
        raise InputError("spmm: left operand must be sparse")
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise InputError(f"spmm: shape mismatch {a.shape} @ {b.shape}")
    return np.asarray(a @ b, dtype=np.float64)


def adjacency_csr(g: DirectedGraph) -> SparseMatrix:
    """Binary adjacency A with A[u, v] = 1 iff (u, v) is an edge."""
    n = g.num_nodes
    if g.num_edges == 0:
        return sp.csr_matrix((n, n), dtype=np.float64)
    rows = np.fromiter((u for u, _ in g.edge_list), dtype=np.int64, count=g.num_edges)
    cols = np.fromiter((v for _, v in g.edge_list), dtype=np.int64, count=g.num_edges)
    data = np.ones(g.num_edges, dtype=np.float64)
    m = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    m.sum_duplicates()
    m.sort_indices()
    return m


def out_degree_normalize(a: SparseMatrix) -> SparseMatrix:
    """Divide every row by its sum. Zero rows are a contract violation
    (callers insert self-loops first, which makes every row sum positive)."""
    if not sp.issparse(a):
        a = sp.csr_matrix(np.asarray(a, dtype=np.float64))
    a = a.tocsr().astype(np.float64)
    row_sums = np.asarray(a.sum(axis=1)).ravel()
    if np.any(row_sums == 0):
        bad = int(np.flatnonzero(row_sums == 0)[0])
        raise ContractViolation(f"out_degree_normalize: row {bad} sums to zero")
    inv = sp.diags(1.0 / row_sums)
    out = (inv @ a).tocsr()
    out.sort_indices()
    return out


@dataclass(frozen=True)
class Segment:
    name: str
    shape: tuple[int, ...]
    offset: int

    @property
    def size(self) -> int:
        return int(np.prod(self.shape)) if self.shape else 1


class ParameterVector:
    """All trainable parameters flattened into one float64 vector.

    Named segments address slices as shaped views (shared memory), so the
    optimizer sees one array while models read structured weights. A parallel
    ``grad`` buffer accumulates gradients and is zeroed between steps.
    """

    def __init__(self, segments: Sequence[Segment], values: np.ndarray):
        self.segments = {s.name: s for s in segments}
        self._order = [s.name for s in segments]
        total = sum(s.size for s in segments)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (total,):
            raise InputError(f"expected flat vector of size {total}, got {values.shape}")
        self.values = values
        self.grad = np.zeros(total, dtype=np.float64)

    @classmethod
    def from_arrays(cls, named: Sequence[tuple[str, np.ndarray]]) -> "ParameterVector":
        segs: list[Segment] = []
        chunks: list[np.ndarray] = []
        offset = 0
        for name, arr in named:
            arr = np.asarray(arr, dtype=np.float64)
            segs.append(Segment(name, arr.shape, offset))
            chunks.append(arr.ravel())
            offset += arr.size
        values = np.concatenate(chunks) if chunks else np.zeros(0)
        return cls(segs, values)

    @property
    def size(self) -> int:
        return self.values.size

    def view(self, name: str) -> np.ndarray:
        s = self._seg(name)
        return self.values[s.offset : s.offset + s.size].reshape(s.shape)

    def grad_view(self, name: str) -> np.ndarray:
        s = self._seg(name)
        return self.grad[s.offset : s.offset + s.size].reshape(s.shape)

    def slice_of(self, name: str) -> slice:
        s = self._seg(name)
        return slice(s.offset, s.offset + s.size)

    def zero_grad(self) -> None:
        self.grad[:] = 0.0

    def copy(self) -> "ParameterVector":
        out = ParameterVector(
            [self.segments[n] for n in self._order], self.values.copy()
        )
        out.grad = self.grad.copy()
        return out

    def segment_names(self) -> list[str]:
        return list(self._order)

    def _seg(self, name: str) -> Segment:
        try:
            return self.segments[name]
        except KeyError:
            raise InputError(f"unknown parameter segment {name!r}") from None


@dataclass
class CoordError:
    index: int
    analytic: float
    numeric: float
    rel_error: float


@dataclass
class GradCheckReport:
    n_checked: int
    max_rel_error: float
    tol: float
    worst: CoordError | None
    failures: list[CoordError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and np.isfinite(self.max_rel_error)


def finite_diff_check(
    loss_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    theta: ParameterVector,
    eps: float = 1e-5,
    tol: float = 1e-4,
    n_coords: int = 200,
    rng: np.random.Generator | None = None,
) -> GradCheckReport:
    """Compare an analytic gradient against central finite differences.

    ``loss_and_grad`` must be deterministic at fixed parameters (freeze any
    negative sampling or dropout before calling). A random subset of
    ``n_coords`` coordinates is probed; the relative error denominator is
    floored at 1e-3 so coordinates with near-zero gradients are compared at
    the scale the central-difference noise allows.
    """
    rng = rng or np.random.default_rng(0)
    base = theta.values.copy()
    loss0, analytic = loss_and_grad(base)
    analytic = np.asarray(analytic, dtype=np.float64)
    if analytic.shape != base.shape:
        raise InputError("analytic gradient has wrong shape")
    if not np.isfinite(loss0) or not np.all(np.isfinite(analytic)):
        bad = CoordError(-1, float("nan"), float("nan"), float("inf"))
        return GradCheckReport(0, float("inf"), tol, bad, [bad])

    n = base.size
    if n_coords >= n:
        coords = np.arange(n)
    else:
        coords = rng.choice(n, size=n_coords, replace=False)

    failures: list[CoordError] = []
    worst: CoordError | None = None
    max_rel = 0.0
    work = base.copy()
    for i in coords:
        work[i] = base[i] + eps
        lp, _ = loss_and_grad(work)
        work[i] = base[i] - eps
        lm, _ = loss_and_grad(work)
        work[i] = base[i]
        numeric = (lp - lm) / (2.0 * eps)
        an = float(analytic[i])
        rel = abs(numeric - an) / max(abs(numeric), abs(an), 1e-3)
        entry = CoordError(int(i), an, float(numeric), float(rel))
        if worst is None or rel > worst.rel_error:
            worst = entry
        max_rel = max(max_rel, rel)
        if rel > tol:
            failures.append(entry)
    return GradCheckReport(len(coords), max_rel, tol, worst, failures)
