import numpy as np
import pytest

from qkfraud.feature_map import FeatureMapSpec, z_kernel_closed_form
from qkfraud.quantum_kernel import (
    KernelEvalMode,
    KernelMatrix,
    ReadoutNoiseModel,
    apply_readout_noise,
    clip_quasi_probs,
    composed_probs,
    gram,
    gram_cross,
    kernel_exact,
    kernel_shots,
    load_kernel_matrix,
    mitigate_readout,
    psd_clip,
    save_kernel_matrix,
)


def dense_confusion(noise: ReadoutNoiseModel) -> np.ndarray:
    """Full calibration matrix as an explicit Kronecker product (oracle)."""
    mat = np.eye(1)
    # qubit 0 is the least-significant index bit, so it is the *last* factor
    for q in reversed(range(noise.n_qubits)):
        mat = np.kron(mat, noise.confusion_2x2(q))
    return mat


def probs_to_counts(probs, scale=1.0):
    n = int(np.log2(len(probs)))
    return {format(i, f"0{n}b"): float(p) * scale for i, p in enumerate(probs) if p != 0.0}


class TestKernelExact:
    def test_self_kernel_is_one(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=3)
        x = np.array([0.2, -0.5, 0.9])
        assert np.isclose(kernel_exact(spec, x, x), 1.0)

    def test_matches_z_closed_form(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 4):
            spec = FeatureMapSpec(order="Z", depth=1, alpha=2.0, n_features=n)
            x, y = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
            assert np.isclose(kernel_exact(spec, x, y), z_kernel_closed_form(2.0, x, y), atol=1e-10)

    def test_symmetry(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=2)
        rng = np.random.default_rng(1)
        x, y = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        assert np.isclose(kernel_exact(spec, x, y), kernel_exact(spec, y, x), atol=1e-12)

    def test_composed_probs_zero_entry_equals_kernel(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=3)
        rng = np.random.default_rng(2)
        x, y = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
        assert np.isclose(composed_probs(spec, x, y)[0], kernel_exact(spec, x, y), atol=1e-10)

    @pytest.mark.parametrize("order,depth", [("Z", 1), ("ZZ", 1), ("ZZ", 2), ("ZZ", 3)])
    def test_batch_composed_probs_matches_gate_reference(self, order, depth):
        from qkfraud.quantum_kernel import composed_probs_batch

        spec = FeatureMapSpec(order=order, depth=depth, alpha=2.0, n_features=3)
        rng = np.random.default_rng(depth)
        x = rng.uniform(-1, 1, 3)
        ys = rng.uniform(-1, 1, (4, 3))
        batch = composed_probs_batch(spec, x, ys)
        for j in range(4):
            assert np.allclose(batch[j], composed_probs(spec, x, ys[j]), atol=1e-12)


class TestKernelShots:
    def test_identical_inputs_give_exactly_one(self):
        spec = FeatureMapSpec(order="ZZ", depth=1, alpha=2.0, n_features=2)
        x = np.array([0.3, -0.8])
        assert kernel_shots(spec, x, x, 500, seed=0) == 1.0

    def test_single_shot_is_boolean(self):
        spec = FeatureMapSpec(order="Z", depth=1, alpha=1.0, n_features=1)
        values = {kernel_shots(spec, [0.2], [0.9], 1, seed=s) for s in range(20)}
        assert values <= {0.0, 1.0}

    def test_deterministic_per_seed(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=2)
        x, y = [0.1, 0.7], [-0.4, 0.2]
        assert kernel_shots(spec, x, y, 1024, 7) == kernel_shots(spec, x, y, 1024, 7)

    def test_unbiased_mean_over_seeds(self):
        # Mean over 200 seeds within 2 standard errors of the exact value.
        spec = FeatureMapSpec(order="Z", depth=1, alpha=1.0, n_features=1)
        x, y = [0.0], [np.pi / 4]
        exact = kernel_exact(spec, x, y)
        n_shots, n_seeds = 256, 200
        estimates = [kernel_shots(spec, x, y, n_shots, seed) for seed in range(n_seeds)]
        se = np.sqrt(exact * (1 - exact) / n_shots / n_seeds)
        assert abs(np.mean(estimates) - exact) < 2 * se


class TestReadoutNoise:
    def test_validation(self):
        with pytest.raises(ValueError):
            ReadoutNoiseModel((0.5,), (0.1,))
        with pytest.raises(ValueError):
            ReadoutNoiseModel((0.1, 0.1), (0.1,))

    def test_zero_noise_is_identity(self):
        counts = {"01": 30, "10": 70}
        noise = ReadoutNoiseModel.uniform(2, 0.0)
        assert apply_readout_noise(counts, noise, seed=0) == counts

    def test_total_shots_preserved(self):
        counts = {"00": 400, "11": 600}
        noise = ReadoutNoiseModel.uniform(2, 0.2)
        noisy = apply_readout_noise(counts, noise, seed=1)
        assert sum(noisy.values()) == 1000

    def test_near_half_flip_spreads_evenly(self):
        counts = {"00": 40000}
        noise = ReadoutNoiseModel.uniform(2, 0.499)
        noisy = apply_readout_noise(counts, noise, seed=2)
        for key in ("00", "01", "10", "11"):
            assert abs(noisy[key] - 10000) < 5 * np.sqrt(40000 * 0.25)

    def test_single_qubit_flip_rate_binomial(self):
        counts = {"0": 10000}
        noise = ReadoutNoiseModel((0.1,), (0.3,))
        noisy = apply_readout_noise(counts, noise, seed=3)
        sigma = np.sqrt(10000 * 0.1 * 0.9)
        assert abs(noisy.get("1", 0) - 1000) < 3 * sigma

    def test_deterministic_per_seed(self):
        counts = {"010": 500, "111": 500}
        noise = ReadoutNoiseModel.uniform(3, 0.05)
        assert apply_readout_noise(counts, noise, 9) == apply_readout_noise(counts, noise, 9)


class TestMitigateReadout:
    def test_zero_noise_returns_empirical(self):
        counts = {"00": 250, "11": 750}
        noise = ReadoutNoiseModel.uniform(2, 0.0)
        quasi = mitigate_readout(counts, noise)
        assert np.allclose(quasi, [0.25, 0.0, 0.0, 0.75])

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_round_trip_recovers_true_distribution(self, n):
        # Analytic noisy distribution (dense Kronecker oracle) -> mitigate.
        rng = np.random.default_rng(n)
        p_true = rng.dirichlet(np.ones(2 ** n))
        noise = ReadoutNoiseModel.uniform(n, 0.05)
        p_noisy = dense_confusion(noise) @ p_true
        quasi = mitigate_readout(probs_to_counts(p_noisy), noise)
        assert np.allclose(quasi, p_true, atol=1e-9)

    def test_asymmetric_round_trip(self):
        rng = np.random.default_rng(5)
        p_true = rng.dirichlet(np.ones(8))
        noise = ReadoutNoiseModel((0.02, 0.08, 0.05), (0.04, 0.01, 0.12))
        p_noisy = dense_confusion(noise) @ p_true
        quasi = mitigate_readout(probs_to_counts(p_noisy), noise)
        assert np.allclose(quasi, p_true, atol=1e-9)

    def test_renoised_matches_noisy(self):
        # Mitigating then re-applying the confusion matrix reproduces the input.
        rng = np.random.default_rng(6)
        p_true = rng.dirichlet(np.ones(4))
        noise = ReadoutNoiseModel.uniform(2, 0.05)
        p_noisy = dense_confusion(noise) @ p_true
        quasi = mitigate_readout(probs_to_counts(p_noisy), noise)
        assert np.allclose(dense_confusion(noise) @ quasi, p_noisy, atol=1e-9)

    def test_quasi_probs_sum_to_one(self):
        counts = {"00": 900, "01": 50, "10": 40, "11": 10}
        noise = ReadoutNoiseModel.uniform(2, 0.08)
        quasi = mitigate_readout(counts, noise)
        assert np.isclose(quasi.sum(), 1.0)

    def test_clip_renormalize(self):
        quasi = np.array([0.9, -0.1, 0.2])
        clipped = clip_quasi_probs(quasi)
        assert np.isclose(clipped.sum(), 1.0)
        assert (clipped >= 0).all()


class TestGram:
    def test_single_row(self):
        spec = FeatureMapSpec(order="ZZ", depth=1, alpha=2.0, n_features=2)
        mat = gram(spec, [[0.1, 0.2]], KernelEvalMode.exact())
        assert mat.values.shape == (1, 1) and mat.values[0, 0] == 1.0

    def test_exact_psd_and_bounds(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=3)
        rng = np.random.default_rng(7)
        rows = rng.uniform(-1, 1, (5, 3))
        mat = gram(spec, rows, KernelEvalMode.exact())
        assert np.linalg.eigvalsh(mat.values).min() >= -1e-8
        assert mat.values.min() >= 0.0 and mat.values.max() <= 1.0
        assert np.allclose(np.diag(mat.values), 1.0)

    def test_exact_matches_pairwise_kernel(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=2)
        rng = np.random.default_rng(8)
        rows = rng.uniform(-1, 1, (4, 2))
        mat = gram(spec, rows, KernelEvalMode.exact())
        for i in range(4):
            for j in range(4):
                expected = 1.0 if i == j else kernel_exact(spec, rows[i], rows[j])
                assert np.isclose(mat.values[i, j], expected, atol=1e-10)

    def test_permutation_consistency(self):
        spec = FeatureMapSpec(order="ZZ", depth=1, alpha=2.0, n_features=2)
        rng = np.random.default_rng(9)
        rows = rng.uniform(-1, 1, (5, 2))
        perm = rng.permutation(5)
        base = gram(spec, rows, KernelEvalMode.exact()).values
        permuted = gram(spec, rows[perm], KernelEvalMode.exact()).values
        assert np.allclose(permuted, base[np.ix_(perm, perm)], atol=1e-12)

    def test_shots_mode_reproducible(self):
        spec = FeatureMapSpec(order="ZZ", depth=1, alpha=2.0, n_features=2)
        rng = np.random.default_rng(10)
        rows = rng.uniform(-1, 1, (4, 2))
        mode = KernelEvalMode.shots(128, seed=3)
        a = gram(spec, rows, mode).values
        b = gram(spec, rows, mode).values
        assert np.array_equal(a, b)

    def test_shots_mode_symmetric_and_psd_clipped(self):
        spec = FeatureMapSpec(order="ZZ", depth=2, alpha=2.0, n_features=2)
        rng = np.random.default_rng(11)
        rows = rng.uniform(-1, 1, (6, 2))
        mat = gram(spec, rows, KernelEvalMode.shots(64, seed=1))
        assert np.array_equal(mat.values, mat.values.T)
        assert np.linalg.eigvalsh(mat.values).min() >= -1e-10

    def test_closed_form_kernel_fn_matches_statevector(self):
        from qkfraud.feature_map import z_kernel_closed_form

        spec = FeatureMapSpec(order="Z", depth=1, alpha=2.0, n_features=3)
        rng = np.random.default_rng(12)
        rows = rng.uniform(-1, 1, (5, 3))
        direct = gram(spec, rows, KernelEvalMode.exact()).values
        oracle = gram(
            spec,
            rows,
            KernelEvalMode.exact(),
            kernel_fn=lambda s, x, y: z_kernel_closed_form(s.alpha, x, y),
        ).values
        assert np.allclose(direct, oracle, atol=1e-10)

    def test_cross_matches_exact(self):
        spec = FeatureMapSpec(order="ZZ", depth=1, alpha=2.0, n_features=2)
        rng = np.random.default_rng(13)
        a, b = rng.uniform(-1, 1, (3, 2)), rng.uniform(-1, 1, (4, 2))
        cross = gram_cross(spec, a, b, KernelEvalMode.exact())
        assert cross.shape == (3, 4)
        for i in range(3):
            for j in range(4):
                assert np.isclose(cross[i, j], kernel_exact(spec, a[i], b[j]), atol=1e-10)

    def test_matrix_io_round_trip(self, tmp_path):
        values = np.array([[1.0, 0.5], [0.5, 1.0]])
        path = tmp_path / "gram.npy"
        save_kernel_matrix(path, values)
        assert np.array_equal(load_kernel_matrix(path), values)

    def test_asymmetric_matrix_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            KernelMatrix(np.array([[1.0, 0.2], [0.3, 1.0]]))


def test_psd_clip_removes_negative_eigenvalues():
    mat = np.array([[1.0, 0.99, 0.0], [0.99, 1.0, 0.99], [0.0, 0.99, 1.0]])
    assert np.linalg.eigvalsh(mat).min() < 0
    clipped = psd_clip(mat)
    assert np.linalg.eigvalsh(clipped).min() >= -1e-12


def test_mode_json_round_trip():
    noise = ReadoutNoiseModel.uniform(3, 0.05)
    for mode in (
        KernelEvalMode.exact(),
        KernelEvalMode.shots(8192, 4),
        KernelEvalMode.noisy_shots(1024, 2, noise, mitigate=True),
    ):
        assert KernelEvalMode.from_json_dict(mode.to_json_dict()) == mode
