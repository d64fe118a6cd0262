"""Dataset resolution and loading.

Datasets are whitespace-delimited ``src dst`` edge-list files. A name like
``cora`` resolves to ``<root>/cora.edges`` where the root comes from the
``DIRLINK_DATA`` environment variable (or an explicit argument, or ./data).
If a sidecar ``<name>.stats.json`` with expected node/edge counts sits next
to the file, the loaded graph is verified against it.

``synthetic`` is a built-in generated graph for demos and tests; it needs
no files.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .graph_core import DirectedGraph, LoadStats, load_edge_list, write_node_mapping

DATA_ENV = "DIRLINK_DATA"

SYNTHETIC_NAME = "synthetic"
_SYNTHETIC_SPEC = dict(num_nodes=300, num_uni=1500, num_bi=120, seed=20240601)


@dataclass(frozen=True)
class Dataset:
    name: str
    graph: DirectedGraph
    mapping: dict[str, int]
    stats: LoadStats
    path: Path | None


def data_root(root: str | Path | None = None) -> Path:
    if root is not None:
        return Path(root)
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return Path("data")


def dataset_path(name: str, root: str | Path | None = None) -> Path:
    return data_root(root) / f"{name}.edges"


def dataset_available(name: str, root: str | Path | None = None) -> bool:
    if name == SYNTHETIC_NAME:
        return True
    return dataset_path(name, root).is_file()


def synthetic_graph(
    num_nodes: int = _SYNTHETIC_SPEC["num_nodes"],
    num_uni: int = _SYNTHETIC_SPEC["num_uni"],
    num_bi: int = _SYNTHETIC_SPEC["num_bi"],
    seed: int = _SYNTHETIC_SPEC["seed"],
) -> DirectedGraph:
    """Random graph with exact unidirectional/bidirectional family sizes.

    Bidirectional pairs are drawn first as unordered pairs; unidirectional
    edges are then rejection-sampled so neither direction collides with an
    existing edge, keeping the family counts exact.
    """
    if num_nodes < 3:
        raise ConfigError("synthetic graph needs at least 3 nodes")
    cap = num_nodes * (num_nodes - 1) // 2
    if num_bi + num_uni > cap:
        raise ConfigError("requested more edge slots than unordered pairs exist")
    rng = np.random.default_rng(seed)
    edges: set[tuple[int, int]] = set()
    occupied: set[tuple[int, int]] = set()  # unordered keys

    while len(occupied) < num_bi:
        u, v = rng.integers(0, num_nodes, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in occupied:
            continue
        occupied.add(key)
        edges.add((int(u), int(v)))
        edges.add((int(v), int(u)))

    placed = 0
    while placed < num_uni:
        u, v = rng.integers(0, num_nodes, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in occupied:
            continue
        occupied.add(key)
        edges.add((int(u), int(v)))
        placed += 1
    return DirectedGraph(num_nodes, edges)


def _verify_stats(graph: DirectedGraph, manifest_path: Path) -> None:
    with open(manifest_path, "r", encoding="utf-8") as fh:
        expected = json.load(fh)
    nodes = expected.get("nodes")
    edges = expected.get("edges")
    if nodes is not None and int(nodes) != graph.num_nodes:
        raise ConfigError(
            f"{manifest_path}: expected {nodes} nodes, loaded {graph.num_nodes}"
        )
    if edges is not None and int(edges) != graph.num_edges:
        raise ConfigError(
            f"{manifest_path}: expected {edges} edges, loaded {graph.num_edges}"
        )


def load_dataset_full(
    name_or_path: str | Path,
    root: str | Path | None = None,
    mapping_out: str | Path | None = None,
) -> Dataset:
    """Resolve, load, dedupe, strip self-loops, remap ids, verify stats."""
    name = str(name_or_path)
    if name == SYNTHETIC_NAME:
        g = synthetic_graph()
        mapping = {str(v): v for v in range(g.num_nodes)}
        if mapping_out:
            write_node_mapping(mapping, mapping_out)
        return Dataset(SYNTHETIC_NAME, g, mapping, LoadStats(0, 0, 0), None)

    candidate = Path(name_or_path)
    if candidate.is_file():
        path = candidate
        dataset_name = candidate.stem
    else:
        path = dataset_path(name, root)
        dataset_name = name
        if not path.is_file():
            raise FileNotFoundError(
                f"dataset {name!r} not found at {path} "
                f"(set {DATA_ENV} or pass a file path; see README on fetching data)"
            )
    graph, mapping, stats = load_edge_list(path)
    manifest = path.with_suffix(".stats.json")
    if manifest.is_file():
        _verify_stats(graph, manifest)
    if mapping_out:
        write_node_mapping(mapping, mapping_out)
    return Dataset(dataset_name, graph, mapping, stats, path)


def load_dataset(
    name_or_path: str | Path, root: str | Path | None = None
) -> DirectedGraph:
    return load_dataset_full(name_or_path, root).graph
