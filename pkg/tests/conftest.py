"""Shared fixtures: toy graphs, a perfect-scorer stub model, dataset gating."""
from __future__ import annotations

import numpy as np
import pytest

from dirlink.datasets import dataset_available, synthetic_graph
from dirlink.diffmath import ParameterVector
from dirlink.graph_core import DirectedGraph
from dirlink.models import ModelConfig
from dirlink.split_builder import build_split
from dirlink.training import fork_streams


@pytest.fixture
def toy_graph() -> DirectedGraph:
    """Nodes 1..3 with edges {(1,2),(2,1),(1,3)}: one reciprocal pair, one
    unidirectional edge."""
    return DirectedGraph(4, [(1, 2), (2, 1), (1, 3)])


@pytest.fixture(scope="session")
def small_graph() -> DirectedGraph:
    """30-node random graph with 60 unidirectional edges and 10 reciprocal
    pairs; large enough for non-degenerate splits."""
    return synthetic_graph(num_nodes=30, num_uni=60, num_bi=10, seed=3)


@pytest.fixture(scope="session")
def small_bundle(small_graph):
    streams = fork_streams(0)
    return build_split(small_graph, seed=streams["split"])


class OracleModel:
    """Duck-typed stand-in for a trained model that scores perfectly.

    Logits are +margin for pairs present in the reference graph (self-pairs
    count as present, matching their role as positive General supervision)
    and -margin otherwise; gradients are identically zero, so optimizer
    steps change nothing.
    """

    def __init__(self, reference: DirectedGraph, margin: float = 10.0, n_params: int = 4):
        self.reference = reference
        self.margin = margin
        self.config = ModelConfig(kind="gae", hidden_dim=2, output_dim=2, dropout=0.0)
        self._template = ParameterVector.from_arrays([("w", np.zeros(n_params))])

    def init_params(self, rng) -> ParameterVector:
        return self._template.copy()

    def encode(self, theta) -> dict:
        return {}

    def pair_logits(self, theta, cache, us, vs, train=False, rng=None):
        logits = np.array(
            [
                self.margin if (u == v or self.reference.has_edge(u, v)) else -self.margin
                for u, v in zip(us, vs)
            ],
            dtype=np.float64,
        )
        return logits, None

    def backward_pairs(self, theta, cache, pair_cache, dlogits) -> np.ndarray:
        return np.zeros(theta.size)


@pytest.fixture
def oracle_model(small_graph) -> OracleModel:
    return OracleModel(small_graph)


def requires_dataset(name: str):
    """Skip marker for tests that need a real downloaded dataset."""
    return pytest.mark.skipif(
        not dataset_available(name),
        reason=(
            f"dataset {name!r} not present under the data root; fetch it with "
            "tools/fetch_datasets.py (offline environments cannot run this test)"
        ),
    )
