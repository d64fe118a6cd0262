"""Simultaneous evaluation splits for the three directed link-prediction
sub-tasks.

One reservation pass removes a fraction of unidirectional edges and one
direction of a fraction of bidirectional pairs from the input graph; the
surviving edges form the training graph. The reserved edges then serve as
positives for three sub-tasks evaluated on the same trained model:

  General        held-out edges vs. uniformly sampled absent ordered pairs
  Directional    held-out unidirectional edges vs. their exact reverses
  Bidirectional  held-out directions of reciprocal pairs vs. reverses of
                 unidirectional edges (pairs whose opposite direction exists
                 vs. pairs where it does not)

All sampling is driven by a single Generator so identical inputs give
byte-identical serialized bundles.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, InputError, ParseError
from .graph_core import (
    DirectedGraph,
    EdgeClass,
    Pair,
    classify_edge,
    edge_partition,
)

DEFAULT_NEG_RATIO = 1


@dataclass(frozen=True)
class SplitFractions:
    """Fractions of each edge family reserved for evaluation."""

    uni_test: float = 0.10
    uni_val: float = 0.05
    bi_test: float = 0.30
    bi_val: float = 0.15

    def __post_init__(self):
        for name in ("uni_test", "uni_val", "bi_test", "bi_val"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ConfigError(f"{name} must lie in [0, 1), got {v}")
        if self.uni_test + self.uni_val >= 1.0:
            raise ConfigError("uni_test + uni_val must stay below 1")
        if self.bi_test + self.bi_val >= 1.0:
            raise ConfigError("bi_test + bi_val must stay below 1")

    def to_dict(self) -> dict:
        return {
            "uni_test": self.uni_test,
            "uni_val": self.uni_val,
            "bi_test": self.bi_test,
            "bi_val": self.bi_val,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitFractions":
        return cls(**{k: float(d[k]) for k in ("uni_test", "uni_val", "bi_test", "bi_val")})


@dataclass(frozen=True)
class EvalSet:
    """Balanced-or-not labeled pair set. Positives first, then negatives."""

    positives: tuple[Pair, ...]
    negatives: tuple[Pair, ...]

    def pairs(self) -> list[Pair]:
        return list(self.positives) + list(self.negatives)

    def labels(self) -> np.ndarray:
        return np.concatenate(
            [np.ones(len(self.positives)), np.zeros(len(self.negatives))]
        ).astype(np.int64)

    @property
    def size(self) -> int:
        return len(self.positives) + len(self.negatives)


@dataclass(frozen=True)
class TaskSets:
    train: EvalSet
    val: EvalSet
    test: EvalSet

    def stage(self, name: str) -> EvalSet:
        return getattr(self, name)


@dataclass(frozen=True)
class Reservation:
    """Edges removed from the graph, tagged by family and stage."""

    uni_test: tuple[Pair, ...]
    uni_val: tuple[Pair, ...]
    bi_test: tuple[Pair, ...]
    bi_val: tuple[Pair, ...]
    train_graph: DirectedGraph

    def stage_positives(self, stage: str) -> tuple[Pair, ...]:
        if stage == "test":
            return self.uni_test + self.bi_test
        if stage == "val":
            return self.uni_val + self.bi_val
        raise InputError(f"unknown stage {stage!r}")


@dataclass(frozen=True)
class SplitBundle:
    train_graph: DirectedGraph
    general: TaskSets
    directional: TaskSets
    bidirectional: TaskSets
    multiclass_train: tuple[tuple[Pair, EdgeClass], ...]
    fractions: SplitFractions
    seed: int | None
    num_nodes: int
    original_num_edges: int
    neg_ratio: int = DEFAULT_NEG_RATIO

    def task(self, name: str) -> TaskSets:
        return getattr(self, name)


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_absent_pairs(
    rng: np.random.Generator,
    num_nodes: int,
    forbidden: set[Pair],
    count: int,
    taken: set[Pair] | None = None,
) -> list[Pair]:
    """Uniform sample, without replacement, of ordered pairs (u, v), u != v,
    that are neither forbidden nor already taken.

    Small pair spaces are enumerated outright; larger ones use batched
    rejection sampling. Raises ConfigError when the complement is too small.
    """
    if count == 0:
        return []
    taken = taken if taken is not None else set()
    space = num_nodes * (num_nodes - 1)
    blocked = {p for p in forbidden if p[0] != p[1]} | {
        p for p in taken if p[0] != p[1]
    }
    available = space - len(blocked)
    if count > available:
        raise ConfigError(
            f"need {count} absent pairs but only {available} exist "
            f"({num_nodes} nodes, {len(blocked)} blocked)"
        )
    if space <= 200_000:
        pool = [
            (u, v)
            for u in range(num_nodes)
            for v in range(num_nodes)
            if u != v and (u, v) not in blocked
        ]
        idx = rng.choice(len(pool), size=count, replace=False)
        return [pool[i] for i in idx]

    out: list[Pair] = []
    chosen: set[Pair] = set()
    # Rejection sampling; batch size scales with the remaining need.
    while len(out) < count:
        need = count - len(out)
        batch = max(1024, 2 * need)
        us = rng.integers(0, num_nodes, size=batch)
        vs = rng.integers(0, num_nodes, size=batch)
        for u, v in zip(us.tolist(), vs.tolist()):
            if u == v:
                continue
            p = (u, v)
            if p in blocked or p in chosen:
                continue
            chosen.add(p)
            out.append(p)
            if len(out) == count:
                break
    return out


def reserve_edges(
    g: DirectedGraph, fractions: SplitFractions, rng
) -> Reservation:
    """Sample the evaluation reservation and build the training graph.

    Reservation counts are floor(fraction * family size). For a reserved
    bidirectional pair only its canonical (min, max) direction is removed;
    the reverse stays in the training graph.
    """
    rng = _as_generator(rng)
    uni, bi = edge_partition(g)
    if not uni:
        raise ConfigError("graph has no unidirectional edges; nothing to reserve")
    if not bi:
        raise ConfigError("graph has no bidirectional pairs; nothing to reserve")

    n_ut = math.floor(fractions.uni_test * len(uni))
    n_uv = math.floor(fractions.uni_val * len(uni))
    n_bt = math.floor(fractions.bi_test * len(bi))
    n_bv = math.floor(fractions.bi_val * len(bi))
    if n_ut + n_uv > len(uni) or n_bt + n_bv > len(bi):
        raise ConfigError("fractions reserve more edges than exist")

    uni_perm = rng.permutation(len(uni))
    bi_perm = rng.permutation(len(bi))
    uni_test = tuple(uni[i] for i in uni_perm[:n_ut])
    uni_val = tuple(uni[i] for i in uni_perm[n_ut : n_ut + n_uv])
    bi_test = tuple(bi[i] for i in bi_perm[:n_bt])
    bi_val = tuple(bi[i] for i in bi_perm[n_bt : n_bt + n_bv])

    removed = set(uni_test) | set(uni_val) | set(bi_test) | set(bi_val)
    train_graph = DirectedGraph(g.num_nodes, g.edge_set() - removed)
    return Reservation(uni_test, uni_val, bi_test, bi_val, train_graph)


def build_general_sets(
    g: DirectedGraph, reservation: Reservation, rng
) -> tuple[EvalSet, EvalSet]:
    """General (existence) val and test sets.

    Positives are all reserved edges of the stage. Negatives are ordered
    pairs absent from the *full* graph, balanced per stage and disjoint
    between val and test. Test negatives are drawn first.
    """
    rng = _as_generator(rng)
    full_edges = set(g.edge_set())
    test_pos = reservation.stage_positives("test")
    val_pos = reservation.stage_positives("val")
    test_neg = sample_absent_pairs(rng, g.num_nodes, full_edges, len(test_pos))
    val_neg = sample_absent_pairs(
        rng, g.num_nodes, full_edges, len(val_pos), taken=set(test_neg)
    )
    return (
        EvalSet(tuple(val_pos), tuple(val_neg)),
        EvalSet(tuple(test_pos), tuple(test_neg)),
    )


def build_general_train(
    train_graph: DirectedGraph, rng, neg_ratio: int = DEFAULT_NEG_RATIO
) -> EvalSet:
    """Training existence set: every training edge as a positive plus
    neg_ratio * |edges| pairs absent from the training graph."""
    rng = _as_generator(rng)
    if train_graph.num_edges == 0:
        raise ConfigError("training graph has no edges")
    if neg_ratio < 1:
        raise ConfigError(f"neg_ratio must be >= 1, got {neg_ratio}")
    pos = train_graph.edge_list
    neg = sample_absent_pairs(
        rng,
        train_graph.num_nodes,
        set(train_graph.edge_set()),
        neg_ratio * len(pos),
    )
    return EvalSet(tuple(pos), tuple(neg))


def enumerate_general_train(train_graph: DirectedGraph) -> EvalSet:
    """Full-enumeration variant: every absent ordered pair is a negative."""
    edges = set(train_graph.edge_set())
    neg = [
        (u, v)
        for u in range(train_graph.num_nodes)
        for v in range(train_graph.num_nodes)
        if u != v and (u, v) not in edges
    ]
    return EvalSet(tuple(train_graph.edge_list), tuple(neg))


def build_directional_sets(
    reservation: Reservation,
) -> tuple[EvalSet, EvalSet]:
    """Direction-discrimination val and test sets.

    Positives are the reserved unidirectional edges; negatives are their
    element-wise reverses (absent by definition of unidirectionality).
    """
    val = EvalSet(
        tuple(reservation.uni_val),
        tuple((v, u) for u, v in reservation.uni_val),
    )
    test = EvalSet(
        tuple(reservation.uni_test),
        tuple((v, u) for u, v in reservation.uni_test),
    )
    return val, test


def build_directional_train(train_graph: DirectedGraph) -> EvalSet:
    """Training direction set relative to the training graph: its
    unidirectional edges against their reverses."""
    uni, _ = edge_partition(train_graph)
    return EvalSet(tuple(uni), tuple((v, u) for u, v in uni))


def _strict_reverse_pool(
    full_graph: DirectedGraph, train_graph: DirectedGraph
) -> list[Pair]:
    # Reverses of training-graph unidirectional edges that are absent from
    # the full graph, so they are genuine negatives at evaluation time.
    uni, _ = edge_partition(train_graph)
    full = full_graph.edge_set()
    return [(v, u) for u, v in uni if (v, u) not in full]


def build_bidirectional_sets(
    full_graph: DirectedGraph,
    reservation: Reservation,
    rng,
) -> tuple[EvalSet, EvalSet]:
    """Reciprocity val and test sets.

    Positives are the reserved directions of bidirectional pairs (their
    reverses remain training edges). Negatives are reverses of training
    unidirectional edges that are absent from the full graph; test and val
    draw disjoint samples (test first).
    """
    rng = _as_generator(rng)
    pool = _strict_reverse_pool(full_graph, reservation.train_graph)
    n_test = len(reservation.bi_test)
    n_val = len(reservation.bi_val)
    if n_test + n_val > len(pool):
        raise ConfigError(
            f"bidirectional negatives: need {n_test + n_val}, pool has {len(pool)}"
        )
    perm = rng.permutation(len(pool))
    test_neg = tuple(pool[i] for i in perm[:n_test])
    val_neg = tuple(pool[i] for i in perm[n_test : n_test + n_val])
    val = EvalSet(tuple(reservation.bi_val), val_neg)
    test = EvalSet(tuple(reservation.bi_test), test_neg)
    return val, test


def build_bidirectional_train(
    full_graph: DirectedGraph,
    train_graph: DirectedGraph,
    rng,
    exclude: Iterable[Pair] = (),
) -> EvalSet:
    """Training reciprocity set: canonical directions of bidirectional pairs
    fully inside the training graph, against reverses of training
    unidirectional edges not used by the val/test pools."""
    rng = _as_generator(rng)
    _, bi = edge_partition(train_graph)
    pos = tuple(bi)
    excluded = set(exclude)
    pool = [p for p in _strict_reverse_pool(full_graph, train_graph) if p not in excluded]
    if len(pos) > len(pool):
        raise ConfigError(
            f"bidirectional train negatives: need {len(pos)}, pool has {len(pool)}"
        )
    perm = rng.permutation(len(pool)) if pool else np.zeros(0, dtype=np.int64)
    neg = tuple(pool[i] for i in perm[: len(pos)])
    return EvalSet(pos, neg)


def build_multiclass_train(
    train_graph: DirectedGraph, general_train: EvalSet
) -> tuple[tuple[Pair, EdgeClass], ...]:
    """Label every General training pair with its four-way class relative to
    the training graph, then append every self-loop labeled NB (loops carry
    no pair direction, so the all-absent class is the convention)."""
    labeled: list[tuple[Pair, EdgeClass]] = []
    for pair in general_train.pairs():
        u, v = pair
        if u == v:
            labeled.append((pair, EdgeClass.NB))
        else:
            labeled.append((pair, classify_edge(train_graph, u, v)))
    for v in range(train_graph.num_nodes):
        labeled.append(((v, v), EdgeClass.NB))
    return tuple(labeled)


def build_split(
    g: DirectedGraph,
    fractions: SplitFractions | None = None,
    seed=0,
    neg_ratio: int = DEFAULT_NEG_RATIO,
) -> SplitBundle:
    """One reservation, all sub-task sets, one RNG.

    Draw order is fixed: reservation (unidirectional then bidirectional
    permutations), General negatives (test, val), Bidirectional negatives
    (test, val, then train), General training negatives. Identical
    (graph, fractions, seed) inputs therefore produce identical bundles.
    """
    fractions = fractions or SplitFractions()
    rng = _as_generator(seed)
    seed_value = seed if isinstance(seed, int) else None

    reservation = reserve_edges(g, fractions, rng)
    train_graph = reservation.train_graph
    general_val, general_test = build_general_sets(g, reservation, rng)
    directional_val, directional_test = build_directional_sets(reservation)
    bi_val, bi_test = build_bidirectional_sets(g, reservation, rng)
    bi_train = build_bidirectional_train(
        g, train_graph, rng, exclude=list(bi_val.negatives) + list(bi_test.negatives)
    )
    general_train = build_general_train(train_graph, rng, neg_ratio)
    directional_train = build_directional_train(train_graph)
    multiclass = build_multiclass_train(train_graph, general_train)

    return SplitBundle(
        train_graph=train_graph,
        general=TaskSets(general_train, general_val, general_test),
        directional=TaskSets(directional_train, directional_val, directional_test),
        bidirectional=TaskSets(bi_train, bi_val, bi_test),
        multiclass_train=multiclass,
        fractions=fractions,
        seed=seed_value,
        num_nodes=g.num_nodes,
        original_num_edges=g.num_edges,
        neg_ratio=neg_ratio,
    )


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class SplitCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class SplitReport:
    checks: tuple[SplitCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[SplitCheck]:
        return [c for c in self.checks if not c.ok]

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok" if c.ok else "FAIL"
            suffix = f" ({c.detail})" if c.detail and not c.ok else ""
            lines.append(f"{status:4s} {c.name}{suffix}")
        return "\n".join(lines)


def _eval_set_well_formed(name: str, es: EvalSet, num_nodes: int) -> list[SplitCheck]:
    checks = []
    pairs = es.pairs()
    ok_range = all(0 <= u < num_nodes and 0 <= v < num_nodes for u, v in pairs)
    checks.append(SplitCheck(f"{name}.ids_in_range", ok_range))
    no_self = all(u != v for u, v in pairs)
    checks.append(SplitCheck(f"{name}.no_self_pairs", no_self))
    pos, neg = set(es.positives), set(es.negatives)
    checks.append(
        SplitCheck(
            f"{name}.no_duplicates",
            len(pos) == len(es.positives) and len(neg) == len(es.negatives),
        )
    )
    checks.append(SplitCheck(f"{name}.pos_neg_disjoint", not (pos & neg)))
    return checks


def validate_split(bundle: SplitBundle, original: DirectedGraph) -> SplitReport:
    """Re-derive every structural invariant of a bundle from scratch."""
    checks: list[SplitCheck] = []
    full = set(original.edge_set())
    train = bundle.train_graph
    train_edges = set(train.edge_set())

    checks.append(
        SplitCheck(
            "train_graph.subset_of_original",
            train_edges <= full and train.num_nodes == original.num_nodes,
        )
    )

    uni_full, bi_full = edge_partition(original)
    n_ut = math.floor(bundle.fractions.uni_test * len(uni_full))
    n_uv = math.floor(bundle.fractions.uni_val * len(uni_full))
    n_bt = math.floor(bundle.fractions.bi_test * len(bi_full))
    n_bv = math.floor(bundle.fractions.bi_val * len(bi_full))

    dir_test, dir_val = bundle.directional.test, bundle.directional.val
    bi_test, bi_val = bundle.bidirectional.test, bundle.bidirectional.val
    gen_test, gen_val = bundle.general.test, bundle.general.val

    checks.append(
        SplitCheck(
            "reservation.counts",
            (
                len(dir_test.positives) == n_ut
                and len(dir_val.positives) == n_uv
                and len(bi_test.positives) == n_bt
                and len(bi_val.positives) == n_bv
            ),
            f"expected uni {n_ut}/{n_uv}, bi {n_bt}/{n_bv}; got "
            f"{len(dir_test.positives)}/{len(dir_val.positives)}, "
            f"{len(bi_test.positives)}/{len(bi_val.positives)}",
        )
    )
    checks.append(
        SplitCheck(
            "reservation.count_law",
            train.num_edges == original.num_edges - (n_ut + n_uv + n_bt + n_bv),
            f"train edges {train.num_edges}",
        )
    )

    reserved = (
        set(dir_test.positives)
        | set(dir_val.positives)
        | set(bi_test.positives)
        | set(bi_val.positives)
    )
    checks.append(
        SplitCheck(
            "reservation.removed_from_train",
            not (reserved & train_edges),
        )
    )
    checks.append(
        SplitCheck(
            "reservation.stage_unique",
            not (set(gen_val.positives) & set(gen_test.positives)),
        )
    )
    checks.append(
        SplitCheck(
            "general.positives_cover_stage",
            set(gen_test.positives)
            == set(dir_test.positives) | set(bi_test.positives)
            and set(gen_val.positives)
            == set(dir_val.positives) | set(bi_val.positives),
        )
    )
    checks.append(
        SplitCheck(
            "reservation.positives_are_edges",
            reserved <= full,
        )
    )
    checks.append(
        SplitCheck(
            "bidirectional.reverse_retained",
            all(
                train.has_edge(v, u)
                for u, v in list(bi_test.positives) + list(bi_val.positives)
            ),
        )
    )
    checks.append(
        SplitCheck(
            "bidirectional.positives_canonical",
            all(u < v for u, v in list(bi_test.positives) + list(bi_val.positives)),
        )
    )

    for task in ("general", "directional", "bidirectional"):
        for stage in ("val", "test"):
            es = bundle.task(task).stage(stage)
            name = f"{task}.{stage}"
            checks.extend(_eval_set_well_formed(name, es, original.num_nodes))
            checks.append(
                SplitCheck(
                    f"{name}.balanced",
                    len(es.positives) == len(es.negatives),
                )
            )
            checks.append(
                SplitCheck(
                    f"{name}.negatives_absent_from_full",
                    all(p not in full for p in es.negatives),
                )
            )

    checks.append(
        SplitCheck(
            "directional.negatives_are_reverses",
            all(
                n == (p[1], p[0])
                for es in (dir_val, dir_test)
                for p, n in zip(es.positives, es.negatives)
            ),
        )
    )
    checks.append(
        SplitCheck(
            "bidirectional.negative_reverse_in_train",
            all(
                train.has_edge(v, u)
                for u, v in list(bi_val.negatives) + list(bi_test.negatives)
            ),
        )
    )
    bi_train = bundle.bidirectional.train
    pools = [set(bi_train.negatives), set(bi_val.negatives), set(bi_test.negatives)]
    disjoint = all(
        not (pools[i] & pools[j]) for i in range(3) for j in range(i + 1, 3)
    )
    checks.append(SplitCheck("bidirectional.negative_pools_disjoint", disjoint))

    uni_train, bi_pairs_train = edge_partition(train)
    checks.append(
        SplitCheck(
            "directional.train_matches_train_graph",
            list(bundle.directional.train.positives) == uni_train
            and list(bundle.directional.train.negatives)
            == [(v, u) for u, v in uni_train],
        )
    )
    checks.append(
        SplitCheck(
            "bidirectional.train_positives",
            set(bi_train.positives) == set(bi_pairs_train)
            and all(u < v for u, v in bi_train.positives),
        )
    )
    checks.append(
        SplitCheck(
            "bidirectional.train_balanced",
            len(bi_train.positives) == len(bi_train.negatives),
        )
    )

    gen_train = bundle.general.train
    checks.append(
        SplitCheck(
            "general.train_positives_are_train_edges",
            set(gen_train.positives) == train_edges,
        )
    )
    checks.append(
        SplitCheck(
            "general.train_negatives_absent_from_train",
            all(p not in train_edges and p[0] != p[1] for p in gen_train.negatives),
        )
    )
    checks.append(
        SplitCheck(
            "general.train_negative_count",
            len(gen_train.negatives) >= len(gen_train.positives),
            f"{len(gen_train.negatives)} negatives for {len(gen_train.positives)} positives",
        )
    )

    relabeled = build_multiclass_train(train, gen_train)
    checks.append(
        SplitCheck(
            "multiclass.labels_match_train_graph",
            relabeled == bundle.multiclass_train,
        )
    )
    checks.append(
        SplitCheck(
            "multiclass.self_loops_labeled_nb",
            all(c == EdgeClass.NB for (u, v), c in bundle.multiclass_train if u == v),
        )
    )

    return SplitReport(tuple(checks))


# ---------------------------------------------------------------------------
# Serialization

_EVAL_FILES = {
    ("general", "train"): "general_train.csv",
    ("general", "val"): "general_val.csv",
    ("general", "test"): "general_test.csv",
    ("directional", "train"): "directional_train.csv",
    ("directional", "val"): "directional_val.csv",
    ("directional", "test"): "directional_test.csv",
    ("bidirectional", "train"): "bidirectional_train.csv",
    ("bidirectional", "val"): "bidirectional_val.csv",
    ("bidirectional", "test"): "bidirectional_test.csv",
}


def _write_eval_csv(es: EvalSet, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "label"])
        for u, v in es.positives:
            writer.writerow([u, v, 1])
        for u, v in es.negatives:
            writer.writerow([u, v, 0])


def _read_eval_csv(path: Path) -> EvalSet:
    pos: list[Pair] = []
    neg: list[Pair] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["u", "v", "label"]:
            raise ParseError(f"{path}:1: expected header 'u,v,label'")
        for row in reader:
            if not row:
                continue
            u, v, label = int(row[0]), int(row[1]), row[2]
            (pos if label == "1" else neg).append((u, v))
    return EvalSet(tuple(pos), tuple(neg))


def save_split(bundle: SplitBundle, out_dir: str | Path) -> Path:
    """Write the bundle as a directory of CSVs plus a JSON manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "train_graph.edges", "w", encoding="utf-8") as fh:
        fh.write("# training graph edge list: src dst\n")
        for u, v in bundle.train_graph.edge_list:
            fh.write(f"{u} {v}\n")

    for (task, stage), fname in _EVAL_FILES.items():
        _write_eval_csv(bundle.task(task).stage(stage), out / fname)

    with open(out / "multiclass_train.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "edge_class"])
        for (u, v), c in bundle.multiclass_train:
            writer.writerow([u, v, c.tag])

    counts = {
        f"{task}_{stage}": bundle.task(task).stage(stage).size
        for (task, stage) in _EVAL_FILES
    }
    manifest = {
        "format": "dirlink-split-v1",
        "seed": bundle.seed,
        "fractions": bundle.fractions.to_dict(),
        "num_nodes": bundle.num_nodes,
        "original_num_edges": bundle.original_num_edges,
        "train_edges": bundle.train_graph.num_edges,
        "neg_ratio": bundle.neg_ratio,
        "counts": counts,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def load_split(split_dir: str | Path) -> SplitBundle:
    """Rebuild a bundle from :func:`save_split` output."""
    d = Path(split_dir)
    with open(d / "manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "dirlink-split-v1":
        raise ParseError(f"{d}/manifest.json: unrecognized split format")
    num_nodes = int(manifest["num_nodes"])

    edges: list[Pair] = []
    with open(d / "train_graph.edges", "r", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            a, b = s.split()
            edges.append((int(a), int(b)))
    train_graph = DirectedGraph(num_nodes, edges)

    sets = {
        key: _read_eval_csv(d / fname) for key, fname in _EVAL_FILES.items()
    }
    multiclass: list[tuple[Pair, EdgeClass]] = []
    with open(d / "multiclass_train.csv", "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["u", "v", "edge_class"]:
            raise ParseError(f"{d}/multiclass_train.csv:1: bad header")
        for row in reader:
            if not row:
                continue
            multiclass.append(((int(row[0]), int(row[1])), EdgeClass[row[2]]))

    return SplitBundle(
        train_graph=train_graph,
        general=TaskSets(
            sets[("general", "train")], sets[("general", "val")], sets[("general", "test")]
        ),
        directional=TaskSets(
            sets[("directional", "train")],
            sets[("directional", "val")],
            sets[("directional", "test")],
        ),
        bidirectional=TaskSets(
            sets[("bidirectional", "train")],
            sets[("bidirectional", "val")],
            sets[("bidirectional", "test")],
        ),
        multiclass_train=tuple(multiclass),
        fractions=SplitFractions.from_dict(manifest["fractions"]),
        seed=manifest.get("seed"),
        num_nodes=num_nodes,
        original_num_edges=int(manifest["original_num_edges"]),
        neg_ratio=int(manifest.get("neg_ratio", DEFAULT_NEG_RATIO)),
    )
