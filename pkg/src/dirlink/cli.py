"""Command-line interface.

Subcommands: ``run`` (multi-seed experiment), ``split`` (build and save one
split), ``validate-split`` (re-check a saved split), ``gradcheck``
(finite-difference verification of all model/strategy gradients). A JSON
config file mirrors ExperimentConfig; explicit CLI flags override it. The
``DIRLINK_DATA`` environment variable sets the default dataset root.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import DEFAULT_SEEDS, ExperimentConfig
from .datasets import load_dataset_full
from .errors import ConfigError, ContractViolation, InputError, ParseError
from .graph_core import DirectedGraph
from .models import MODEL_KINDS
from .split_builder import (
    SplitFractions,
    build_split,
    load_split,
    save_split,
    validate_split,
)
from .strategies import SCALARIZATION_NORMS, STRATEGY_KINDS
from .training import fork_streams, run_experiment


def _parse_fractions(text: str) -> SplitFractions:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "expected 4 comma-separated fractions: uni_test,uni_val,bi_test,bi_val"
        )
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return SplitFractions(*vals)


def _parse_seed_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirlink",
        description=(
            "Directed link prediction: multi-class and multi-task training "
            "strategies over the General/Directional/Bidirectional sub-tasks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and evaluate one (dataset, model, strategy) cell")
    run.add_argument("--config", type=Path, help="JSON file mirroring the experiment config")
    run.add_argument("--dataset", help="dataset name under the data root, or a file path")
    run.add_argument("--model", choices=MODEL_KINDS)
    run.add_argument("--strategy", choices=STRATEGY_KINDS)
    run.add_argument("--seeds", type=int, help="number of seeds (0..N-1)")
    run.add_argument("--seed-list", type=_parse_seed_list, help="explicit seeds, e.g. 0,1,4")
    run.add_argument("--epochs", type=int)
    run.add_argument("--patience", type=int)
    run.add_argument("--lr", type=float, help="override the per-(dataset,strategy,model) default")
    run.add_argument("--hidden-dim", type=int)
    run.add_argument("--output-dim", type=int)
    run.add_argument("--activation", choices=("relu", "identity", "sigmoid"))
    run.add_argument("--dropout", type=float)
    run.add_argument("--lambda-init", type=float)
    run.add_argument("--fractions", type=_parse_fractions, metavar="UT,UV,BT,BV")
    run.add_argument("--neg-ratio", type=int)
    run.add_argument("--scalarization-norm", choices=tuple(SCALARIZATION_NORMS))
    run.add_argument("--mgda-on-adam", action="store_true", default=None)
    run.add_argument(
        "--full-negatives",
        action="store_true",
        default=None,
        help="enumerate all absent pairs instead of sampling training negatives",
    )
    run.add_argument(
        "--deterministic",
        action="store_true",
        default=None,
        help="accepted for interface stability; runs are always deterministic",
    )
    run.add_argument("--data-root", help="dataset root (defaults to $DIRLINK_DATA or ./data)")
    run.add_argument("--out", type=Path, help="output directory for results and figures")

    split = sub.add_parser("split", help="build one simultaneous sub-task split and save it")
    split.add_argument("--dataset", required=True)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--fractions", type=_parse_fractions, metavar="UT,UV,BT,BV")
    split.add_argument("--neg-ratio", type=int, default=1)
    split.add_argument("--data-root")
    split.add_argument("--out", type=Path, required=True)

    vsplit = sub.add_parser("validate-split", help="re-check every invariant of a saved split")
    vsplit.add_argument("--split", type=Path, required=True, help="directory written by `dirlink split`")
    vsplit.add_argument(
        "--dataset",
        help="original dataset for ground truth; omitted, the full graph is "
        "reconstructed from the split itself",
    )
    vsplit.add_argument("--data-root")

    gc = sub.add_parser("gradcheck", help="finite-difference check of every model/strategy gradient")
    gc.add_argument("--nodes", type=int, default=20)
    gc.add_argument("--eps", type=float, default=1e-5)
    gc.add_argument("--tol", type=float, default=1e-4)
    gc.add_argument("--coords", type=int, default=200)
    gc.add_argument("--seed", type=int, default=7)
    gc.add_argument("--model", choices=MODEL_KINDS, help="restrict to one model kind")
    gc.add_argument("--strategy", choices=STRATEGY_KINDS, help="restrict to one strategy")

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: dict = {}
    for key in (
        "dataset",
        "model",
        "strategy",
        "epochs",
        "patience",
        "lr",
        "hidden_dim",
        "output_dim",
        "activation",
        "dropout",
        "lambda_init",
        "neg_ratio",
        "scalarization_norm",
        "mgda_on_adam",
        "full_negatives",
        "deterministic",
        "data_root",
    ):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.fractions is not None:
        overrides["fractions"] = args.fractions
    if args.seed_list is not None:
        overrides["seeds"] = args.seed_list
    elif args.seeds is not None:
        overrides["seeds"] = tuple(range(args.seeds))
    if args.out is not None:
        overrides["out"] = str(args.out)

    if args.config is not None:
        config = ExperimentConfig.from_file(args.config)
        return config.with_overrides(**overrides)
    for required in ("dataset", "model", "strategy"):
        if required not in overrides:
            raise ConfigError(f"--{required} is required (or provide --config)")
    return ExperimentConfig(
        dataset=overrides.pop("dataset"),
        model=overrides.pop("model"),
        strategy=overrides.pop("strategy"),
        seeds=overrides.pop("seeds", DEFAULT_SEEDS),
        **overrides,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    print(
        f"running dataset={config.dataset} model={config.model} "
        f"strategy={config.strategy} seeds={list(config.seeds)}"
    )
    result = run_experiment(config, echo=print)
    print()
    print(f"{'task':<14}{'metric':<9}{'mean':>9}{'std':>9}")
    for task in ("general", "directional", "bidirectional"):
        for metric in ("roc_auc", "auprc"):
            cell = result.aggregates[task][metric]
            print(f"{task:<14}{metric:<9}{cell['mean']:>9.4f}{cell['std']:>9.4f}")
    if config.out:
        print(f"\nresults written to {config.out}")
    if result.n_seeds_succeeded == 0:
        print("all seeds failed", file=sys.stderr)
        return 1
    if result.partial:
        failed = [r.seed for r in result.seed_runs if r.status != "ok"]
        print(f"warning: partial result, failed seeds: {failed}", file=sys.stderr)
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    dataset = load_dataset_full(args.dataset, args.data_root)
    streams = fork_streams(args.seed)
    bundle = build_split(
        dataset.graph,
        args.fractions or SplitFractions(),
        seed=streams["split"],
        neg_ratio=args.neg_ratio,
    )
    report = validate_split(bundle, dataset.graph)
    save_split(bundle, args.out)
    print(f"split of {dataset.name} (seed {args.seed}) written to {args.out}")
    print(
        f"train edges: {bundle.train_graph.num_edges}  "
        f"general test/val: {bundle.general.test.size}/{bundle.general.val.size}  "
        f"directional: {bundle.directional.test.size}/{bundle.directional.val.size}  "
        f"bidirectional: {bundle.bidirectional.test.size}/{bundle.bidirectional.val.size}"
    )
    if not report.ok:
        print(str(report), file=sys.stderr)
        return 1
    print(f"all {len(report.checks)} split checks passed")
    return 0


def _reconstructed_full_graph(bundle) -> DirectedGraph:
    edges = set(bundle.train_graph.edge_set())
    for stage in (bundle.general.test, bundle.general.val):
        edges.update(stage.positives)
    return DirectedGraph(bundle.num_nodes, sorted(edges))


def _cmd_validate_split(args: argparse.Namespace) -> int:
    bundle = load_split(args.split)
    if args.dataset:
        graph = load_dataset_full(args.dataset, args.data_root).graph
    else:
        graph = _reconstructed_full_graph(bundle)
    report = validate_split(bundle, graph)
    print(str(report))
    return 0 if report.ok else 1


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    from .gradcheck import run_gradcheck

    kinds = (args.model,) if args.model else MODEL_KINDS
    strategies = (args.strategy,) if args.strategy else STRATEGY_KINDS
    results = run_gradcheck(
        kinds=kinds,
        strategies=strategies,
        num_nodes=args.nodes,
        eps=args.eps,
        tol=args.tol,
        n_coords=args.coords,
        seed=args.seed,
    )
    ok = True
    for check in results:
        print(check.line())
        ok = ok and check.ok
    n_fail = sum(1 for c in results if not c.ok)
    print(f"{len(results) - n_fail}/{len(results)} gradient checks passed")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "split":
            return _cmd_split(args)
        if args.command == "validate-split":
            return _cmd_validate_split(args)
        if args.command == "gradcheck":
            return _cmd_gradcheck(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, InputError, ParseError, ContractViolation, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
