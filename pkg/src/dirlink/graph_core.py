"""Directed graphs, the four-class edge taxonomy, and edge-list file IO.

Every ordered node pair (u, v), u != v, falls into exactly one of four
classes depending on which of (u, v) and (v, u) are edges:

    NB  neither direction present
    NU  only the reverse (v, u) present
    PU  only (u, v) present       ("positive unidirectional")
    PB  both directions present   ("positive bidirectional")

The class index order matches the four-entry probability vector
[nb, nu, pu, pb] produced by the multi-class factorization in
:mod:`dirlink.strategies`.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InputError, ParseError

Pair = tuple[int, int]


class EdgeClass(IntEnum):
    NB = 0
    NU = 1
    PU = 2
    PB = 3

    @property
    def tag(self) -> str:
        return self.name


class DirectedGraph:
    """Immutable directed graph over dense node ids 0..num_nodes-1.

    Edges are deduplicated; adjacency is kept in both directions so that
    membership tests and degree lookups are O(1)/O(deg). Iteration order
    (``edge_list``, adjacency lists) is sorted, so any computation driven
    by it is reproducible.
    """

    __slots__ = ("num_nodes", "edge_list", "_edge_set", "out_adj", "in_adj")

    def __init__(self, num_nodes: int, edges: Iterable[Pair]):
        if num_nodes < 0:
            raise InputError(f"num_nodes must be >= 0, got {num_nodes}")
        self.num_nodes = int(num_nodes)
        edge_set: set[Pair] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise InputError(f"edge ({u}, {v}) outside node range [0, {num_nodes})")
            edge_set.add((u, v))
        self._edge_set = frozenset(edge_set)
        self.edge_list: tuple[Pair, ...] = tuple(sorted(edge_set))
        out_lists: list[list[int]] = [[] for _ in range(num_nodes)]
        in_lists: list[list[int]] = [[] for _ in range(num_nodes)]
        for u, v in self.edge_list:
            out_lists[u].append(v)
            in_lists[v].append(u)
        self.out_adj = tuple(tuple(l) for l in out_lists)
        self.in_adj = tuple(tuple(sorted(l)) for l in in_lists)

    @property
    def num_edges(self) -> int:
        return len(self.edge_list)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_set

    def edge_set(self) -> frozenset[Pair]:
        return self._edge_set

    def out_degree(self, v: int) -> int:
        self._check_node(v)
        return len(self.out_adj[v])

    def in_degree(self, v: int) -> int:
        self._check_node(v)
        return len(self.in_adj[v])

    def has_self_loop(self) -> bool:
        return any(u == v for u, v in self.edge_list)

    def _check_node(self, v: int) -> None:
        if not (0 <= v < self.num_nodes):
            raise InputError(f"node {v} outside range [0, {self.num_nodes})")

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DirectedGraph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


@dataclass(frozen=True)
class ClassCensus:
    """Counts of ordered pairs per edge class."""

    counts: Mapping[EdgeClass, int]

    def __getitem__(self, c: EdgeClass) -> int:
        return int(self.counts.get(c, 0))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def nonzero_classes(self) -> list[EdgeClass]:
        return [c for c in EdgeClass if self[c] > 0]


def classify_edge(g: DirectedGraph, u: int, v: int) -> EdgeClass:
    """Class of the ordered pair (u, v). Self pairs are the caller's policy."""
    g._check_node(u)
    g._check_node(v)
    if u == v:
        raise InputError(f"cannot classify self pair ({u}, {u})")
    fwd = g.has_edge(u, v)
    rev = g.has_edge(v, u)
    if fwd and rev:
        return EdgeClass.PB
    if fwd:
        return EdgeClass.PU
    if rev:
        return EdgeClass.NU
    return EdgeClass.NB


def census(g: DirectedGraph, pairs: Iterable[Pair]) -> ClassCensus:
    counts = {c: 0 for c in EdgeClass}
    for u, v in pairs:
        counts[classify_edge(g, u, v)] += 1
    return ClassCensus(counts)


def edge_partition(g: DirectedGraph) -> tuple[list[Pair], list[Pair]]:
    """Split the edge set into unidirectional edges and bidirectional pairs.

    Returns (uni, bi) where ``uni`` holds every edge whose reverse is absent
    and ``bi`` holds one canonical (min, max) representative per reciprocal
    pair, so len(uni) + 2 * len(bi) == num_edges. Graphs with self-loops are
    rejected: a loop is its own reverse and belongs to neither bucket.
    """
    uni: list[Pair] = []
    bi: list[Pair] = []
    for u, v in g.edge_list:
        if u == v:
            raise InputError("edge_partition requires a graph without self-loops")
        if g.has_edge(v, u):
            if u < v:
                bi.append((u, v))
        else:
            uni.append((u, v))
    return uni, bi


def with_self_loops(g: DirectedGraph) -> DirectedGraph:
    """Copy of g with every self-loop (v, v) present. Idempotent."""
    loops = {(v, v) for v in range(g.num_nodes)}
    return DirectedGraph(g.num_nodes, set(g._edge_set) | loops)


@dataclass(frozen=True)
class LoadStats:
    lines_read: int
    duplicates_dropped: int
    self_loops_dropped: int


def _sort_raw_ids(ids: set[str]) -> list[str]:
    # Numeric ids sort numerically so the dense mapping is stable under
    # reformatting; anything else sorts lexicographically.
    if all(s.lstrip("-").isdigit() for s in ids):
        return sorted(ids, key=int)
    return sorted(ids)


def load_edge_list(path: str | Path) -> tuple[DirectedGraph, dict[str, int], LoadStats]:
    """Read a whitespace-delimited ``src dst`` edge list.

    Lines starting with ``#`` and blank lines are skipped. Raw node ids are
    arbitrary tokens; they are remapped to dense 0..N-1 ids (numeric ids in
    numeric order, otherwise lexicographic). Duplicate edges and self-loops
    are dropped and counted. An empty graph is an error.
    """
    path = Path(path)
    raw_edges: list[tuple[str, str]] = []
    lines_read = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            lines_read += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(
                    f"{path}:{lineno}: expected 'src dst', got {line.rstrip()!r}"
                )
            raw_edges.append((parts[0], parts[1]))
    if not raw_edges:
        raise InputError(f"{path}: no edges found")

    ids = {s for e in raw_edges for s in e}
    mapping = {raw: dense for dense, raw in enumerate(_sort_raw_ids(ids))}

    seen: set[Pair] = set()
    duplicates = 0
    self_loops = 0
    for a, b in raw_edges:
        u, v = mapping[a], mapping[b]
        if u == v:
            self_loops += 1
            continue
        if (u, v) in seen:
            duplicates += 1
            continue
        seen.add((u, v))
    if not seen:
        raise InputError(f"{path}: only self-loops present, graph is empty")
    graph = DirectedGraph(len(mapping), seen)
    return graph, mapping, LoadStats(lines_read, duplicates, self_loops)


def write_node_mapping(mapping: Mapping[str, int], path: str | Path) -> None:
    """Persist the raw-id to dense-id mapping as a two-column CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["raw_id", "dense_id"])
        for raw, dense in sorted(mapping.items(), key=lambda kv: kv[1]):
            writer.writerow([raw, dense])


def read_node_mapping(path: str | Path) -> dict[str, int]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["raw_id", "dense_id"]:
            raise ParseError(f"{path}:1: expected header 'raw_id,dense_id'")
        return {row[0]: int(row[1]) for row in reader if row}


def graph_from_pairs(pairs: Sequence[Pair]) -> DirectedGraph:
    """Convenience constructor: num_nodes inferred as max id + 1."""
    n = max((max(u, v) for u, v in pairs), default=-1) + 1
    return DirectedGraph(n, pairs)
