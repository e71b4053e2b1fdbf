import math

import numpy as np
import pytest

from qkfraud.dataset import SyntheticConfig, generate_synthetic
from qkfraud.feature_map import FeatureMapSpec, z_kernel_closed_form
from qkfraud.preprocess import SplitSpec, apply_scaler, fit_scaler, split
from qkfraud.qfis import (
    BudgetError,
    QfisConfig,
    evaluate_subset,
    expected_history_length,
    extend_greedy,
    run_qfis,
    select_initial_triples,
)
from qkfraud.quantum_kernel import KernelEvalMode


def scaled_split(cfg_seed, n_per_class=60, n_numeric=5, informative=1, pairs=0, noise=0.4):
    data = generate_synthetic(
        SyntheticConfig(
            n_genuine=n_per_class,
            n_fraud=n_per_class,
            n_numeric=n_numeric,
            n_informative_single=informative,
            n_informative_pair=pairs,
            noise_sd=noise,
            seed=cfg_seed,
        )
    )
    train, test = split(data, SplitSpec("random", 0.6, seed=1))
    scaler = fit_scaler(train, -1.0, 1.0)
    return apply_scaler(scaler, train), apply_scaler(scaler, test)


def small_cfg(m=4, target=3, p0=3, **kwargs):
    train, test = scaled_split(0, n_per_class=30, n_numeric=m)
    return QfisConfig(
        train=train,
        test=test,
        spec=FeatureMapSpec(order="Z", depth=1, alpha=2.0, n_features=p0),
        target_size=target,
        p0=p0,
        **kwargs,
    )


class TestEvaluateSubset:
    def test_repeated_calls_agree_exact_mode(self):
        cfg = small_cfg()
        assert evaluate_subset(cfg, (0, 1, 2)) == evaluate_subset(cfg, (0, 1, 2))

    def test_repeated_calls_agree_shots_mode(self):
        cfg = small_cfg(eval_mode=KernelEvalMode.shots(128, seed=5))
        assert evaluate_subset(cfg, (0, 2, 3)) == evaluate_subset(cfg, (0, 2, 3))

    def test_duplicate_features_rejected(self):
        cfg = small_cfg()
        with pytest.raises(ValueError, match="duplicates"):
            evaluate_subset(cfg, (0, 0, 1))

    def test_informative_subset_beats_noise_subset(self):
        train, test = scaled_split(3, n_per_class=120, n_numeric=8, informative=3, noise=0.3)
        cfg = QfisConfig(
            train=train, test=test,
            spec=FeatureMapSpec(order="ZZ", depth=1, alpha=2.0, n_features=3),
            target_size=3,
        )
        acc_signal, _ = evaluate_subset(cfg, (0, 1, 2))   # planted informative singles
        acc_noise, _ = evaluate_subset(cfg, (5, 6, 7))    # pure noise columns
        assert acc_signal > acc_noise


class TestInitialTriples:
    def test_m_equals_p0_single_triple(self):
        cfg = small_cfg(m=3, target=3)
        state = select_initial_triples(cfg)
        assert state.selected == [0, 1, 2]
        assert len(state.history) == 1

    def test_m5_gives_ten_history_entries(self):
        cfg = small_cfg(m=5, target=3)
        state = select_initial_triples(cfg)
        assert len(state.history) == math.comb(5, 3)
        feature_sets = [r.features for r in state.history]
        assert len(set(feature_sets)) == len(feature_sets)

    def test_selected_attains_stage_maximum(self):
        cfg = small_cfg(m=5, target=3)
        state = select_initial_triples(cfg)
        best = max(r.accuracy for r in state.history)
        chosen = [r for r in state.history if set(r.features) == set(state.selected)]
        assert chosen[0].accuracy == best

    def test_budget_guard(self):
        cfg = small_cfg(m=5, target=3, budget_cap=5)
        with pytest.raises(BudgetError, match="cap"):
            select_initial_triples(cfg)
        cfg_ok = small_cfg(m=5, target=3, budget_cap=5, allow_over_budget=True)
        assert len(select_initial_triples(cfg_ok).history) == 10


class TestGreedyExtension:
    def test_single_candidate_when_m4(self):
        cfg = small_cfg(m=4, target=4)
        state = select_initial_triples(cfg)
        before = len(state.history)
        state = extend_greedy(cfg, state)
        assert len(state.history) - before == 1
        assert len(state.selected) == 4

    def test_candidate_count_matches_remaining(self):
        cfg = small_cfg(m=7, target=4)
        state = select_initial_triples(cfg)
        before = len(state.history)
        state = extend_greedy(cfg, state)
        assert len(state.history) - before == 7 - 3


class TestRunQfis:
    def test_target_equals_p0_initial_stage_only(self):
        cfg = small_cfg(m=5, target=3)
        state = run_qfis(cfg)
        assert len(state.selected) == 3
        assert len(state.history) == math.comb(5, 3)

    def test_history_length_formula(self):
        cfg = small_cfg(m=6, target=5)
        state = run_qfis(cfg)
        assert len(state.history) == expected_history_length(6, 3, 5)
        assert expected_history_length(6, 3, 5) == math.comb(6, 3) + (6 - 3) + (6 - 4)

    def test_selected_sets_form_inclusion_chain(self):
        cfg = small_cfg(m=6, target=5)
        state = run_qfis(cfg)
        for size in range(3, 6):
            assert set(state.selected[:3]) <= set(state.selected[:size])
        assert len(set(state.selected)) == 5

    def test_stage_best_progression(self):
        cfg = small_cfg(m=6, target=5)
        state = run_qfis(cfg)
        records = state.stage_best()
        assert [r.stage for r in records] == [3, 4, 5]
        for r in records:
            stage_max = max(
                h.accuracy for h in state.history if h.stage == r.stage
            )
            assert r.accuracy == stage_max

    def test_jobs_do_not_change_result(self):
        cfg1 = small_cfg(m=5, target=4, jobs=1)
        cfg4 = small_cfg(m=5, target=4, jobs=4)
        s1, s4 = run_qfis(cfg1), run_qfis(cfg4)
        assert s1.selected == s4.selected
        assert [(r.features, r.accuracy) for r in s1.history] == [
            (r.features, r.accuracy) for r in s4.history
        ]

    def test_closed_form_oracle_full_path_identical(self):
        # Z depth-1 selections agree exactly when the Gram comes from the
        # closed-form product kernel instead of the statevector.
        cfg = small_cfg(m=6, target=5)
        state_sv = run_qfis(cfg)
        cfg_oracle = small_cfg(
            m=6, target=5,
            kernel_override=lambda spec, x, y: z_kernel_closed_form(spec.alpha, x, y),
        )
        state_cf = run_qfis(cfg_oracle)
        assert state_sv.selected == state_cf.selected
        for a, b in zip(state_sv.history, state_cf.history):
            assert a.features == b.features
            assert np.isclose(a.accuracy, b.accuracy, atol=1e-12)
            assert np.isclose(a.auc, b.auc, atol=1e-12)

    def test_invalid_config_rejected(self):
        train, test = scaled_split(0, n_per_class=20, n_numeric=4)
        with pytest.raises(ValueError):
            QfisConfig(train=train, test=test, target_size=5)  # > m
        with pytest.raises(ValueError):
            QfisConfig(train=train, test=test, target_size=4, objective="f1")
