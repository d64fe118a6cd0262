#!/usr/bin/env python3
"""Download the Cora/CiteSeer citation networks and convert them to the
edge-list format this package loads.

The published archives list one citation per line as ``<cited> <citing>``;
the converted files store one directed edge per line as ``<citing> <cited>``
(an edge points from the citing paper to the paper it cites). A stats
sidecar ``<name>.stats.json`` records the node/edge counts observed after
deduplication and self-loop removal; the loader verifies against it.

Usage:
    python tools/fetch_datasets.py [--root DATA_DIR] [--dataset cora|citeseer|all]

The data root defaults to $DIRLINK_DATA, then ./data. Expected counts for
the canonical archives: cora 2708 nodes / 5429 edges, citeseer 3327 nodes /
4732 edges. A mismatch (a mirror shipping a variant preprocessing) is
reported as a warning; the sidecar always records what was observed so
later loads stay consistent.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tarfile
import urllib.request
from pathlib import Path

URL_BASE = "https://linqs-data.soe.ucsc.edu/public/lbc"

DATASETS = {
    "cora": {
        "archive": "cora.tgz",
        "cites_member": "cora/cora.cites",
        "expected": {"nodes": 2708, "edges": 5429},
    },
    "citeseer": {
        "archive": "citeseer.tgz",
        "cites_member": "citeseer/citeseer.cites",
        "expected": {"nodes": 3327, "edges": 4732},
    },
}


def default_root() -> Path:
    env = os.environ.get("DIRLINK_DATA")
    return Path(env) if env else Path("data")


def fetch_archive(url: str) -> bytes:
    print(f"downloading {url} ...")
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read()


def convert(cites_text: str) -> list[tuple[str, str]]:
    """``<cited> <citing>`` lines to deduplicated (citing, cited) edges."""
    seen: set[tuple[str, str]] = set()
    edges: list[tuple[str, str]] = []
    for lineno, line in enumerate(cites_text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SystemExit(f"line {lineno}: expected two ids, got {line!r}")
        cited, citing = parts
        if citing == cited:
            continue  # self-citation rows are dropped, matching the loader
        edge = (citing, cited)
        if edge not in seen:
            seen.add(edge)
            edges.append(edge)
    return edges


def write_dataset(name: str, edges: list[tuple[str, str]], root: Path) -> None:
    root.mkdir(parents=True, exist_ok=True)
    edge_path = root / f"{name}.edges"
    with open(edge_path, "w", encoding="utf-8") as fh:
        fh.write("# directed citation edges: citing cited\n")
        for src, dst in edges:
            fh.write(f"{src} {dst}\n")

    nodes = {u for e in edges for u in e}
    observed = {"nodes": len(nodes), "edges": len(edges)}
    with open(root / f"{name}.stats.json", "w", encoding="utf-8") as fh:
        json.dump(observed, fh, indent=2, sort_keys=True)
        fh.write("\n")

    expected = DATASETS[name]["expected"]
    status = "matches" if observed == expected else "DIFFERS FROM"
    print(
        f"{name}: wrote {edge_path} ({observed['nodes']} nodes, "
        f"{observed['edges']} edges); {status} the canonical counts "
        f"{expected['nodes']}/{expected['edges']}"
    )
    if observed != expected:
        print(
            f"warning: {name} counts differ; the archive may be a variant "
            "preprocessing. The stats sidecar records the observed counts.",
            file=sys.stderr,
        )


def fetch_one(name: str, root: Path, url_base: str) -> None:
    entry = DATASETS[name]
    blob = fetch_archive(f"{url_base}/{entry['archive']}")
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        member = tar.extractfile(entry["cites_member"])
        if member is None:
            raise SystemExit(f"{entry['archive']}: missing member {entry['cites_member']}")
        text = member.read().decode("utf-8")
    write_dataset(name, convert(text), root)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--root", type=Path, default=None, help="dataset directory")
    parser.add_argument("--dataset", choices=(*DATASETS, "all"), default="all")
    parser.add_argument("--url-base", default=URL_BASE, help="mirror base URL")
    args = parser.parse_args(argv)

    root = args.root if args.root is not None else default_root()
    names = list(DATASETS) if args.dataset == "all" else [args.dataset]
    for name in names:
        fetch_one(name, root, args.url_base)
    return 0


if __name__ == "__main__":
    sys.exit(main())
