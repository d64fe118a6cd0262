"""Multi-class and multi-task training strategies for directed link prediction.

The package trains small graph autoencoders on a directed graph and evaluates
them on three sub-tasks simultaneously: General (does an edge exist?),
Directional (which direction does it point?), and Bidirectional (is it
reciprocated?). Training strategies: a single-task baseline, a four-class
objective over edge states, validation-weighted loss scalarization, and
multiple-gradient descent (MGDA).
"""
from .config import DEFAULT_SEEDS, LR_TABLE, ExperimentConfig, default_lr
from .datasets import (
    DATA_ENV,
    Dataset,
    dataset_available,
    dataset_path,
    load_dataset,
    load_dataset_full,
    synthetic_graph,
)
from .diffmath import GradCheckReport, ParameterVector, finite_diff_check, sigmoid
from .errors import (
    ConfigError,
    ContractViolation,
    InputError,
    ParseError,
    TrainingDiverged,
)
from .graph_core import (
    ClassCensus,
    DirectedGraph,
    EdgeClass,
    census,
    classify_edge,
    edge_partition,
    graph_from_pairs,
    load_edge_list,
    with_self_loops,
)
from .gradcheck import run_gradcheck
from .metrics import auprc, early_stop_score, roc_auc
from .models import (
    MODEL_KINDS,
    Model,
    ModelConfig,
    build_model,
    decode_gravity,
    decode_inner,
    decode_mlp,
    decode_source_target,
    load_checkpoint,
    save_checkpoint,
)
from .optim import AdamState, adam_step, preconditioned_direction
from .split_builder import (
    EvalSet,
    SplitBundle,
    SplitFractions,
    build_split,
    load_split,
    sample_absent_pairs,
    save_split,
    validate_split,
)
from .strategies import (
    STRATEGY_KINDS,
    MgdaSolution,
    StepInfo,
    TaskLosses,
    class_weights,
    factorize_multiclass,
    loss_multiclass,
    loss_weighted_bce,
    mgda_min_norm,
    multiclass_epoch,
    scalarization_weights,
    strategy_step_direction,
    task_losses,
    validation_losses,
)
from .training import (
    ExperimentResult,
    SeedRun,
    TrainOutcome,
    evaluate,
    fork_streams,
    run_experiment,
    run_seed,
    train_run,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEEDS",
    "DATA_ENV",
    "LR_TABLE",
    "MODEL_KINDS",
    "STRATEGY_KINDS",
    "AdamState",
    "ClassCensus",
    "ConfigError",
    "ContractViolation",
    "Dataset",
    "DirectedGraph",
    "EdgeClass",
    "EvalSet",
    "ExperimentConfig",
    "ExperimentResult",
    "GradCheckReport",
    "InputError",
    "MgdaSolution",
    "Model",
    "ModelConfig",
    "ParameterVector",
    "ParseError",
    "SeedRun",
    "SplitBundle",
    "SplitFractions",
    "StepInfo",
    "TaskLosses",
    "TrainOutcome",
    "TrainingDiverged",
    "adam_step",
    "auprc",
    "build_model",
    "build_split",
    "census",
    "class_weights",
    "classify_edge",
    "dataset_available",
    "dataset_path",
    "decode_gravity",
    "decode_inner",
    "decode_mlp",
    "decode_source_target",
    "default_lr",
    "early_stop_score",
    "edge_partition",
    "evaluate",
    "factorize_multiclass",
    "finite_diff_check",
    "fork_streams",
    "graph_from_pairs",
    "load_checkpoint",
    "load_dataset",
    "load_dataset_full",
    "load_edge_list",
    "load_split",
    "loss_multiclass",
    "loss_weighted_bce",
    "mgda_min_norm",
    "multiclass_epoch",
    "preconditioned_direction",
    "roc_auc",
    "run_experiment",
    "run_gradcheck",
    "run_seed",
    "sample_absent_pairs",
    "save_checkpoint",
    "save_split",
    "scalarization_weights",
    "sigmoid",
    "strategy_step_direction",
    "synthetic_graph",
    "task_losses",
    "train_run",
    "validate_split",
    "validation_losses",
    "with_self_loops",
]
