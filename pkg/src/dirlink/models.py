"""Graph autoencoders: one shared propagation encoder, five decoders,
and hand-derived backward passes for each composition.

Encoders use the one-hot feature matrix X = I implicitly: the first-layer
product X @ W0 is just W0, so W0's rows double as per-node input features.
All models expose the same protocol:

    init_params(rng)                     -> ParameterVector
    encode(theta)                        -> cache holding Z and intermediates
    pair_logits(theta, cache, us, vs)    -> (logits, pair_cache)
    backward_pairs(theta, cache, pair_cache, dlogits) -> flat gradient

Gradients returned by ``backward_pairs`` cover the full parameter vector for
that one decode batch; callers sum across batches. Every pass is pinned by
the central-difference oracle in :mod:`dirlink.diffmath`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .diffmath import (
    ACTIVATIONS,
    ParameterVector,
    adjacency_csr,
    out_degree_normalize,
    sigmoid,
    softmax_rows,
    spmm,
)
from .errors import ConfigError, ContractViolation, InputError
from .graph_core import DirectedGraph

MODEL_KINDS = ("gae", "gravity", "st", "mlp", "digae")

# Floor for the squared embedding distance inside the gravity decoder; the
# log of a coincident pair would otherwise be -inf. Gradients are zeroed
# where the floor is active.
GRAVITY_DISTANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    hidden_dim: int = 64
    output_dim: int = 32
    activation: str = "relu"
    dropout: float = 0.5
    lambda_init: float = 1.0
    class_head: bool = False
    digae_alpha: float = 0.5  # recorded, not used by the printed propagation
    digae_beta: float = 0.5

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.hidden_dim < 1 or self.output_dim < 1:
            raise ConfigError("hidden_dim and output_dim must be positive")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.kind in ("st", "digae") and self.output_dim % 2 != 0:
            raise ConfigError(f"{self.kind} needs an even output_dim")
        if self.kind == "gravity" and self.output_dim < 2:
            raise ConfigError("gravity needs output_dim >= 2 (mass + position)")
        if not (0.0 <= self.dropout < 1.0):
            raise ConfigError("dropout must lie in [0, 1)")
        if self.lambda_init <= 0:
            raise ConfigError("lambda_init must be positive")
        if self.class_head and self.kind != "mlp":
            raise ConfigError("the 4-class decoder head exists only for the mlp kind")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "hidden_dim": self.hidden_dim,
            "output_dim": self.output_dim,
            "activation": self.activation,
            "dropout": self.dropout,
            "lambda_init": self.lambda_init,
            "class_head": self.class_head,
            "digae_alpha": self.digae_alpha,
            "digae_beta": self.digae_beta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    scale = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=shape)


def _as_index_arrays(us, vs, n: int) -> tuple[np.ndarray, np.ndarray]:
    us = np.asarray(us, dtype=np.int64).ravel()
    vs = np.asarray(vs, dtype=np.int64).ravel()
    if us.shape != vs.shape:
        raise InputError("pair index arrays must have equal length")
    if us.size and (us.min() < 0 or us.max() >= n or vs.min() < 0 or vs.max() >= n):
        raise InputError("pair index outside node range")
    return us, vs


class _SharedEncoder:
    """Two propagation layers, P = row-normalized adjacency-with-loops."""

    def __init__(self, g: DirectedGraph, config: ModelConfig):
        self.p = out_degree_normalize(adjacency_csr(g))
        self.pt = self.p.transpose().tocsr()
        self.act, self.dact = ACTIVATIONS[config.activation]
        self.n = g.num_nodes
        self.hidden = config.hidden_dim
        self.out = config.output_dim

    def segments(self, rng: np.random.Generator) -> list[tuple[str, np.ndarray]]:
        return [
            ("enc.W0", _glorot(rng, self.n, self.hidden, (self.n, self.hidden))),
            ("enc.W1", _glorot(rng, self.hidden, self.out, (self.hidden, self.out))),
        ]

    def forward(self, theta: ParameterVector) -> dict:
        w0 = theta.view("enc.W0")
        w1 = theta.view("enc.W1")
        a0 = spmm(self.p, w0)
        h1 = self.act(a0)
        b = spmm(self.p, h1)
        z = b @ w1
        if not np.all(np.isfinite(z)):
            raise ContractViolation("non-finite embeddings")
        return {"a0": a0, "h1": h1, "b": b, "z": z}

    def backward(self, theta: ParameterVector, cache: dict, dz: np.ndarray, grad: ParameterVector) -> None:
        w1 = theta.view("enc.W1")
        grad.grad_view("enc.W1")[...] += cache["b"].T @ dz
        db = dz @ w1.T
        dh1 = spmm(self.pt, db)
        da0 = dh1 * self.dact(cache["a0"])
        grad.grad_view("enc.W0")[...] += spmm(self.pt, da0)


class _DigaeEncoder:
    """Coupled source/target stacks on the unnormalized looped adjacency.

    Z_S = A @ act(A^T @ W0s) @ W1s ;  Z_T = A^T @ act(A @ W0t) @ W1t.
    The final embedding is the concatenation (Z_S || Z_T), each half of
    width output_dim / 2.
    """

    def __init__(self, g: DirectedGraph, config: ModelConfig):
        self.a = adjacency_csr(g)
        self.at = self.a.transpose().tocsr()
        self.act, self.dact = ACTIVATIONS[config.activation]
        self.n = g.num_nodes
        self.hidden = config.hidden_dim
        self.half = config.output_dim // 2

    def segments(self, rng: np.random.Generator) -> list[tuple[str, np.ndarray]]:
        return [
            ("enc.W0s", _glorot(rng, self.n, self.hidden, (self.n, self.hidden))),
            ("enc.W1s", _glorot(rng, self.hidden, self.half, (self.hidden, self.half))),
            ("enc.W0t", _glorot(rng, self.n, self.hidden, (self.n, self.hidden))),
            ("enc.W1t", _glorot(rng, self.hidden, self.half, (self.hidden, self.half))),
        ]

    def forward(self, theta: ParameterVector) -> dict:
        w0s, w1s = theta.view("enc.W0s"), theta.view("enc.W1s")
        w0t, w1t = theta.view("enc.W0t"), theta.view("enc.W1t")
        s_pre = spmm(self.at, w0s)
        s_hid = self.act(s_pre)
        s_prop = spmm(self.a, s_hid)
        z_s = s_prop @ w1s
        t_pre = spmm(self.a, w0t)
        t_hid = self.act(t_pre)
        t_prop = spmm(self.at, t_hid)
        z_t = t_prop @ w1t
        z = np.concatenate([z_s, z_t], axis=1)
        if not np.all(np.isfinite(z)):
            raise ContractViolation("non-finite embeddings")
        return {
            "s_pre": s_pre, "s_prop": s_prop,
            "t_pre": t_pre, "t_prop": t_prop,
            "z": z,
        }

    def backward(self, theta: ParameterVector, cache: dict, dz: np.ndarray, grad: ParameterVector) -> None:
        h = self.half
        dz_s, dz_t = dz[:, :h], dz[:, h:]
        w1s, w1t = theta.view("enc.W1s"), theta.view("enc.W1t")

        grad.grad_view("enc.W1s")[...] += cache["s_prop"].T @ dz_s
        ds_prop = dz_s @ w1s.T
        ds_hid = spmm(self.at, ds_prop)
        ds_pre = ds_hid * self.dact(cache["s_pre"])
        grad.grad_view("enc.W0s")[...] += spmm(self.a, ds_pre)

        grad.grad_view("enc.W1t")[...] += cache["t_prop"].T @ dz_t
        dt_prop = dz_t @ w1t.T
        dt_hid = spmm(self.a, dt_prop)
        dt_pre = dt_hid * self.dact(cache["t_pre"])
        grad.grad_view("enc.W0t")[...] += spmm(self.at, dt_pre)


class Model:
    """One (encoder, decoder) composition bound to a looped training graph."""

    def __init__(self, config: ModelConfig, g: DirectedGraph):
        for v in range(g.num_nodes):
            if not g.has_edge(v, v):
                raise InputError(
                    "models require every self-loop present; apply with_self_loops first"
                )
        self.config = config
        self.num_nodes = g.num_nodes
        if config.kind == "digae":
            self.encoder: _SharedEncoder | _DigaeEncoder = _DigaeEncoder(g, config)
        else:
            self.encoder = _SharedEncoder(g, config)

    # -- parameters ---------------------------------------------------------

    def init_params(self, rng: np.random.Generator) -> ParameterVector:
        segs = self.encoder.segments(rng)
        L = self.config.output_dim
        if self.config.kind == "gravity":
            segs.append(("dec.log_lambda", np.array([np.log(self.config.lambda_init)])))
        elif self.config.kind == "mlp":
            if self.config.class_head:
                segs.append(("dec.W", _glorot(rng, 2 * L, 4, (2 * L, 4))))
                segs.append(("dec.b", np.zeros(4)))
            else:
                segs.append(("dec.w", _glorot(rng, 2 * L, 1, (2 * L,))))
                segs.append(("dec.b", np.zeros(1)))
        return ParameterVector.from_arrays(segs)

    # -- forward ------------------------------------------------------------

    def encode(self, theta: ParameterVector) -> dict:
        return self.encoder.forward(theta)

    def embeddings(self, theta: ParameterVector) -> np.ndarray:
        return self.encode(theta)["z"]

    def pair_logits(
        self,
        theta: ParameterVector,
        cache: dict,
        us,
        vs,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, dict]:
        us, vs = _as_index_arrays(us, vs, self.num_nodes)
        z = cache["z"]
        kind = self.config.kind
        if kind == "gae":
            logits = np.einsum("ij,ij->i", z[us], z[vs])
            return logits, {"us": us, "vs": vs}
        if kind in ("st", "digae"):
            h = self.config.output_dim // 2
            logits = np.einsum("ij,ij->i", z[vs, :h], z[us, h:])
            return logits, {"us": us, "vs": vs}
        if kind == "gravity":
            lam = float(np.exp(theta.view("dec.log_lambda")[0]))
            diff = z[us, 1:] - z[vs, 1:]
            d2 = np.einsum("ij,ij->i", diff, diff)
            clamped = d2 < GRAVITY_DISTANCE_FLOOR
            d2 = np.maximum(d2, GRAVITY_DISTANCE_FLOOR)
            log_d2 = np.log(d2)
            logits = z[vs, 0] - lam * log_d2
            return logits, {
                "us": us, "vs": vs, "diff": diff, "d2": d2,
                "log_d2": log_d2, "clamped": clamped, "lam": lam,
            }
        if kind == "mlp":
            if self.config.class_head:
                raise InputError("this mlp model decodes 4-class logits; use pair_class_logits")
            x, mask = self._mlp_features(z, us, vs, train, rng)
            logits = x @ theta.view("dec.w") + theta.view("dec.b")[0]
            return logits, {"us": us, "vs": vs, "x": x, "mask": mask}
        raise ContractViolation(f"unhandled kind {kind}")

    def pair_class_logits(
        self,
        theta: ParameterVector,
        cache: dict,
        us,
        vs,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, dict]:
        """Four logits per pair (mlp kind with the class head only)."""
        if not (self.config.kind == "mlp" and self.config.class_head):
            raise InputError("pair_class_logits requires the mlp class head")
        us, vs = _as_index_arrays(us, vs, self.num_nodes)
        x, mask = self._mlp_features(cache["z"], us, vs, train, rng)
        logits = x @ theta.view("dec.W") + theta.view("dec.b")
        return logits, {"us": us, "vs": vs, "x": x, "mask": mask}

    def _mlp_features(self, z, us, vs, train, rng):
        x = np.concatenate([z[us], z[vs]], axis=1)
        mask = None
        if train and self.config.dropout > 0.0:
            if rng is None:
                raise InputError("training-mode mlp decode needs a dropout rng")
            keep = 1.0 - self.config.dropout
            mask = (rng.random(x.shape) < keep).astype(np.float64) / keep
            x = x * mask
        return x, mask

    # -- backward -----------------------------------------------------------

    def backward_pairs(
        self,
        theta: ParameterVector,
        cache: dict,
        pair_cache: dict,
        dlogits: np.ndarray,
    ) -> np.ndarray:
        """Gradient of sum(dlogits * logits) w.r.t. the full flat vector."""
        dlogits = np.asarray(dlogits, dtype=np.float64).ravel()
        us, vs = pair_cache["us"], pair_cache["vs"]
        if dlogits.shape != us.shape:
            raise InputError("dlogits length must match the pair batch")
        z = cache["z"]
        grad = self._fresh_grad(theta)
        dz = np.zeros_like(z)
        kind = self.config.kind

        if kind == "gae":
            np.add.at(dz, us, dlogits[:, None] * z[vs])
            np.add.at(dz, vs, dlogits[:, None] * z[us])
        elif kind in ("st", "digae"):
            h = self.config.output_dim // 2
            np.add.at(dz[:, :h], vs, dlogits[:, None] * z[us, h:])
            np.add.at(dz[:, h:], us, dlogits[:, None] * z[vs, :h])
        elif kind == "gravity":
            lam = pair_cache["lam"]
            np.add.at(dz[:, 0], vs, dlogits)
            live = ~pair_cache["clamped"]
            coef = np.where(live, -lam * dlogits / pair_cache["d2"], 0.0)
            ddiff = (2.0 * coef)[:, None] * pair_cache["diff"]
            np.add.at(dz[:, 1:], us, ddiff)
            np.add.at(dz[:, 1:], vs, -ddiff)
            dlam = -float(np.dot(dlogits, pair_cache["log_d2"]))
            grad.grad_view("dec.log_lambda")[0] += dlam * lam
        elif kind == "mlp":
            x = pair_cache["x"]
            grad.grad_view("dec.w")[...] += x.T @ dlogits
            grad.grad_view("dec.b")[0] += dlogits.sum()
            dx = np.outer(dlogits, theta.view("dec.w"))
            if pair_cache["mask"] is not None:
                dx = dx * pair_cache["mask"]
            L = self.config.output_dim
            np.add.at(dz, us, dx[:, :L])
            np.add.at(dz, vs, dx[:, L:])
        else:  # pragma: no cover
            raise ContractViolation(f"unhandled kind {kind}")

        self.encoder.backward(theta, cache, dz, grad)
        return grad.grad

    def backward_class_pairs(
        self,
        theta: ParameterVector,
        cache: dict,
        pair_cache: dict,
        dlogits: np.ndarray,
    ) -> np.ndarray:
        """Same as backward_pairs for the 4-logit head (dlogits is n x 4)."""
        dlogits = np.asarray(dlogits, dtype=np.float64)
        us, vs = pair_cache["us"], pair_cache["vs"]
        if dlogits.shape != (us.size, 4):
            raise InputError("class dlogits must be (n_pairs, 4)")
        grad = self._fresh_grad(theta)
        x = pair_cache["x"]
        grad.grad_view("dec.W")[...] += x.T @ dlogits
        grad.grad_view("dec.b")[...] += dlogits.sum(axis=0)
        dx = dlogits @ theta.view("dec.W").T
        if pair_cache["mask"] is not None:
            dx = dx * pair_cache["mask"]
        dz = np.zeros_like(cache["z"])
        L = self.config.output_dim
        np.add.at(dz, us, dx[:, :L])
        np.add.at(dz, vs, dx[:, L:])
        self.encoder.backward(theta, cache, dz, grad)
        return grad.grad

    def _fresh_grad(self, theta: ParameterVector) -> ParameterVector:
        g = theta.copy()
        g.grad[:] = 0.0
        return g

    def gravity_lambda(self, theta: ParameterVector) -> float:
        if self.config.kind != "gravity":
            raise InputError("lambda exists only for the gravity kind")
        return float(np.exp(theta.view("dec.log_lambda")[0]))


def build_model(config: ModelConfig, g_with_loops: DirectedGraph) -> Model:
    return Model(config, g_with_loops)


# ---------------------------------------------------------------------------
# Functional single-pair decoders. These mirror the batched paths and exist
# for direct use and doc-style tests.


def decode_inner(z_u: np.ndarray, z_v: np.ndarray) -> float:
    return float(sigmoid(float(np.dot(z_u, z_v))))


def decode_source_target(z_u: np.ndarray, z_v: np.ndarray) -> float:
    L = z_u.shape[-1]
    if L % 2 != 0:
        raise ConfigError("source/target decoding needs an even embedding width")
    h = L // 2
    return float(sigmoid(float(np.dot(z_v[:h], z_u[h:]))))


def decode_gravity(z_u: np.ndarray, z_v: np.ndarray, lam: float) -> float:
    diff = np.asarray(z_u[1:], dtype=np.float64) - np.asarray(z_v[1:], dtype=np.float64)
    d2 = max(float(np.dot(diff, diff)), GRAVITY_DISTANCE_FLOOR)
    return float(sigmoid(float(z_v[0]) - lam * np.log(d2)))


def decode_mlp(z_u: np.ndarray, z_v: np.ndarray, w: np.ndarray, b) -> np.ndarray | float:
    """Binary head when w is a vector, 4-class logits when w is (2L, 4)."""
    x = np.concatenate([z_u, z_v])
    w = np.asarray(w, dtype=np.float64)
    if w.ndim == 1:
        return float(x @ w + float(np.asarray(b).ravel()[0]))
    return x @ w + np.asarray(b, dtype=np.float64)


def encode_digae(g: DirectedGraph, theta: ParameterVector, config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Source and target embedding halves for a looped graph."""
    enc = _DigaeEncoder(g, config)
    z = enc.forward(theta)["z"]
    h = config.output_dim // 2
    return z[:, :h], z[:, h:]


def score_edges(model: Model, theta: ParameterVector, pairs: Sequence) -> np.ndarray:
    """Probabilities for a pair list, eval mode (no dropout).

    Returns a 1-d array of edge probabilities, or (n, 4) class-probability
    rows when the model carries the 4-class head.
    """
    pairs = list(pairs)
    if not pairs:
        return np.zeros((0, 4)) if model.config.class_head else np.zeros(0)
    us = [p[0] for p in pairs]
    vs = [p[1] for p in pairs]
    cache = model.encode(theta)
    if model.config.class_head:
        logits, _ = model.pair_class_logits(theta, cache, us, vs, train=False)
        return softmax_rows(logits)
    logits, _ = model.pair_logits(theta, cache, us, vs, train=False)
    return sigmoid(logits)


# ---------------------------------------------------------------------------
# Checkpoints


def save_checkpoint(path: str | Path, theta: ParameterVector, config: ModelConfig) -> None:
    """Named parameter segments plus the producing config, one .npz file."""
    arrays = {f"param::{name}": theta.view(name) for name in theta.segment_names()}
    meta = json.dumps({"config": config.to_dict(), "order": theta.segment_names()})
    arrays["__meta__"] = np.frombuffer(meta.encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str | Path) -> tuple[ParameterVector, ModelConfig]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"].tobytes()).decode("utf-8"))
        named = [(name, data[f"param::{name}"]) for name in meta["order"]]
    return ParameterVector.from_arrays(named), ModelConfig.from_dict(meta["config"])
