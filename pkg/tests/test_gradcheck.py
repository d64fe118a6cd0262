"""Structure of the gradient-check harness (full grid runs in the acceptance gate)."""
from __future__ import annotations

import numpy as np

from dirlink.gradcheck import (
    GRADCHECK_LOSSES,
    harness_bundle,
    make_loss_fn,
    run_gradcheck,
)
from dirlink.models import ModelConfig, build_model
from dirlink.graph_core import with_self_loops
from dirlink.split_builder import validate_split


def test_harness_bundle_is_a_valid_split():
    bundle, graph = harness_bundle()
    assert validate_split(bundle, graph).ok


def test_restricted_run_returns_one_check_per_loss():
    checks = run_gradcheck(kinds=("gae",), strategies=("baseline", "mo"), n_coords=10)
    # baseline differentiates one loss, the multi-objective strategy three
    assert [(c.model, c.strategy, c.loss) for c in checks] == [
        ("gae", "baseline", "L_G"),
        ("gae", "mo", "L_G"),
        ("gae", "mo", "L_D"),
        ("gae", "mo", "L_B"),
    ]
    assert all(c.ok for c in checks)


def test_check_line_reports_pair_and_max_error():
    check = run_gradcheck(kinds=("gae",), strategies=("baseline",), n_coords=5)[0]
    line = check.line()
    assert "model=gae" in line and "strategy=baseline" in line
    assert "max_rel=" in line and line.endswith("ok")


def test_loss_closures_are_deterministic():
    bundle, _ = harness_bundle()
    model = build_model(
        ModelConfig(kind="gravity", hidden_dim=16, output_dim=8, dropout=0.0),
        with_self_loops(bundle.train_graph),
    )
    theta = model.init_params(np.random.default_rng(3))
    fn = make_loss_fn(model, theta, bundle, "s", "scalarized")
    l1, g1 = fn(theta.values.copy())
    l2, g2 = fn(theta.values.copy())
    assert l1 == l2
    assert np.array_equal(g1, g2)


def test_loss_table_covers_every_strategy():
    assert set(GRADCHECK_LOSSES) == {"baseline", "mc", "s", "mo"}
