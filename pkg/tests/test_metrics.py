"""Tie-aware ranking metrics against hand values and brute-force oracles."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from dirlink.errors import InputError
from dirlink.metrics import auprc, early_stop_score, roc_auc

from .oracles import auprc_bruteforce, random_scored_set, roc_auc_bruteforce


class TestRocAuc:
    def test_hand_example_half(self):
        # pos 0.9 beats neg 0.8; pos 0.3 loses: 1 concordant of 2 pairs
        assert roc_auc([0.9, 0.8, 0.3], [1, 0, 1]) == 0.5

    def test_all_tied_is_exactly_half(self):
        assert roc_auc([0.7] * 6, [1, 0, 1, 0, 0, 1]) == 0.5

    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_perfectly_wrong(self):
        assert roc_auc([0.1, 0.9], [1, 0]) == 0.0

    def test_single_class_rejected(self):
        with pytest.raises(InputError):
            roc_auc([0.5, 0.6], [1, 1])
        with pytest.raises(InputError):
            roc_auc([], [])

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            roc_auc([0.5, float("nan")], [1, 0])

    def test_bad_labels_rejected(self):
        with pytest.raises(InputError):
            roc_auc([0.5, 0.6], [1, 2])

    def test_complement_symmetry_tie_free(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(4, 50))
            scores = rng.permutation(n) / n  # distinct values
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                continue
            assert roc_auc(-scores, labels) == pytest.approx(
                1.0 - roc_auc(scores, labels), abs=1e-12
            )

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            scores, labels = random_scored_set(rng, max_n=80)
            assert abs(roc_auc(scores, labels) - roc_auc_bruteforce(scores, labels)) <= 1e-12


class TestAuprc:
    def test_hand_example(self):
        # descending-label order [1, 0, 1]: AP = 1/2 * (1/1 + 2/3)
        got = auprc([0.9, 0.8, 0.7], [1, 0, 1])
        assert got == pytest.approx(0.5 * (1.0 + 2.0 / 3.0), abs=1e-15)

    def test_perfect_ranking(self):
        assert auprc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0

    def test_all_tied_single_block(self):
        # one block at full recall: precision = p/n
        assert auprc([0.4] * 5, [1, 0, 0, 1, 0]) == pytest.approx(2.0 / 5.0, abs=1e-15)

    def test_no_positives_rejected(self):
        with pytest.raises(InputError):
            auprc([0.1, 0.2], [0, 0])

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            scores, labels = random_scored_set(rng, max_n=80)
            assert abs(auprc(scores, labels) - auprc_bruteforce(scores, labels)) <= 1e-12

    @settings(max_examples=60)
    @given(hs.integers(min_value=0, max_value=2**31 - 1))
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        scores, labels = random_scored_set(rng, max_n=40)
        perm = rng.permutation(len(scores))
        assert auprc(scores[perm], labels[perm]) == pytest.approx(
            auprc(scores, labels), abs=1e-12
        )
        assert roc_auc(scores[perm], labels[perm]) == pytest.approx(
            roc_auc(scores, labels), abs=1e-12
        )


class TestEarlyStopScore:
    @staticmethod
    def _metrics(value):
        return {
            t: {"roc_auc": value, "auprc": value}
            for t in ("general", "directional", "bidirectional")
        }

    def test_all_half_sums_to_three(self):
        assert early_stop_score(self._metrics(0.5), "s") == pytest.approx(3.0)

    def test_all_one_sums_to_six(self):
        assert early_stop_score(self._metrics(1.0), "mo") == pytest.approx(6.0)

    def test_baseline_uses_general_only(self):
        m = self._metrics(0.0)
        m["general"] = {"roc_auc": 0.8, "auprc": 0.9}
        assert early_stop_score(m, "baseline") == pytest.approx(1.7)

    def test_missing_task_rejected(self):
        with pytest.raises(InputError):
            early_stop_score({"general": {"roc_auc": 0.5, "auprc": 0.5}}, "mc")
