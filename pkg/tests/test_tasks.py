"""Task quantization, sampling reproducibility, class densities, TV distance."""

import numpy as np
import pytest

from qtl.embedding import ThetaVector, single_qubit_rx_rot_rx
from qtl.errors import DegenerateSpec, DimMismatch, EmptyDataset
from qtl.qmath import DensityMatrix
from qtl.tasks import (
    Dataset,
    DiscreteTask,
    GaussianTaskSpec,
    class_average_density,
    derive_seed,
    dump_dataset_csv,
    empirical_class_density,
    quantize_gaussian_pair,
    quantize_gaussian_task,
    sample_dataset,
    tv_distance,
)

FIG2_SOURCE = GaussianTaskSpec(mu0=1.0, mu1=-1.0, sigma2=0.11)


class TestQuantizeGaussian:
    def test_equal_means_identical_rows(self):
        task = quantize_gaussian_task(GaussianTaskSpec(0.0, 0.0, 1.0))
        np.testing.assert_allclose(task.cond[0], task.cond[1])

    def test_fig2_source_task(self):
        task = quantize_gaussian_task(FIG2_SOURCE)
        sigma = np.sqrt(0.11)
        assert task.n_bins == 100
        assert task.features[0] == pytest.approx(-1.0 - 4 * sigma)
        assert task.features[-1] == pytest.approx(1.0 + 4 * sigma)
        np.testing.assert_allclose(task.prior, [0.5, 0.5])
        # class-0 mass concentrates near +1, class-1 near -1
        assert task.features[np.argmax(task.cond[0])] == pytest.approx(1.0, abs=0.05)
        assert task.features[np.argmax(task.cond[1])] == pytest.approx(-1.0, abs=0.05)

    def test_rows_renormalized(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            spec = GaussianTaskSpec(
                rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.05, 2.0)
            )
            task = quantize_gaussian_task(spec)
            np.testing.assert_allclose(task.cond.sum(axis=1), [1.0, 1.0], atol=1e-12)

    def test_translation_covariance(self):
        delta = 0.7
        base = quantize_gaussian_task(GaussianTaskSpec(0.4, -1.1, 0.3))
        shifted = quantize_gaussian_task(GaussianTaskSpec(0.4 + delta, -1.1 + delta, 0.3))
        np.testing.assert_allclose(shifted.features, base.features + delta, atol=1e-12)
        np.testing.assert_allclose(shifted.cond, base.cond, atol=1e-12)

    def test_zero_width_span(self):
        with pytest.raises(DegenerateSpec):
            quantize_gaussian_task(GaussianTaskSpec(0.0, 0.0, 1.0, span_sigmas=0.0))

    def test_pair_shares_bins(self):
        s, t = quantize_gaussian_pair(FIG2_SOURCE, GaussianTaskSpec(1.5, -0.5, 0.11))
        np.testing.assert_array_equal(s.features, t.features)
        assert s.features[0] == pytest.approx(-1.0 - 4 * np.sqrt(0.11))
        assert s.features[-1] == pytest.approx(1.5 + 4 * np.sqrt(0.11))


class TestSampleDataset:
    def test_empty(self):
        task = quantize_gaussian_task(FIG2_SOURCE)
        data = sample_dataset(task, 0, 1)
        assert len(data) == 0

    def test_degenerate_prior(self):
        task = DiscreteTask(
            np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.full((2, 2), 0.5)
        )
        data = sample_dataset(task, 50, 9)
        assert np.all(data.labels == 0)

    def test_law_of_large_numbers(self):
        task = quantize_gaussian_task(FIG2_SOURCE)
        data = sample_dataset(task, 100_000, 17)
        assert np.mean(data.labels == 0) == pytest.approx(0.5, abs=0.01)

    def test_bit_identical_replay(self):
        task = quantize_gaussian_task(FIG2_SOURCE)
        d1 = sample_dataset(task, 1000, 23)
        d2 = sample_dataset(task, 1000, 23)
        np.testing.assert_array_equal(d1.labels, d2.labels)
        np.testing.assert_array_equal(d1.x_index, d2.x_index)

    def test_prefix_sharing_across_sizes(self):
        task = quantize_gaussian_task(FIG2_SOURCE)
        small = sample_dataset(task, 4, 31)
        large = sample_dataset(task, 64, 31)
        np.testing.assert_array_equal(small.labels, large.labels[:4])
        np.testing.assert_array_equal(small.x_index, large.x_index[:4])

    def test_derive_seed_stable(self):
        assert derive_seed(5, 0, "target") == derive_seed(5, 0, "target")
        assert derive_seed(5, 0, "target") != derive_seed(5, 0, "source")
        assert derive_seed(5, 1, "target") != derive_seed(5, 0, "target")

    def test_csv_dump(self, tmp_path):
        task = quantize_gaussian_task(FIG2_SOURCE)
        data = sample_dataset(task, 5, 3)
        path = tmp_path / "data.csv"
        dump_dataset_csv(data, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "index,label,x_value,bin_index"
        assert len(lines) == 6


class TestClassAverageDensity:
    def setup_method(self):
        self.ansatz = single_qubit_rx_rot_rx()
        self.theta = ThetaVector([0.0, 0.0, 0.0])

    def test_point_mass_equals_embed(self):
        from qtl.embedding import embed

        feats = np.array([-0.5, 0.5])
        cond = np.array([[0.0, 1.0], [1.0, 0.0]])
        task = DiscreteTask(feats, np.array([0.5, 0.5]), cond)
        avg = class_average_density(task, self.ansatz, self.theta, 0)
        np.testing.assert_allclose(
            avg.mat, embed(self.ansatz, self.theta, 0.5).mat, atol=1e-12
        )

    def test_uniform_orthogonal_mixture(self):
        # theta = 0 maps x = 0 to |0><0| and x = pi/2 to |1><1|
        feats = np.array([0.0, np.pi / 2])
        task = DiscreteTask(feats, np.array([0.5, 0.5]), np.full((2, 2), 0.5))
        avg = class_average_density(task, self.ansatz, self.theta, 0)
        np.testing.assert_allclose(avg.mat, np.eye(2) / 2, atol=1e-12)

    def test_matches_monte_carlo_average(self):
        task = quantize_gaussian_task(FIG2_SOURCE)
        exact = class_average_density(task, self.ansatz, self.theta, 0).mat
        rng = np.random.default_rng(41)
        draws = rng.choice(task.n_bins, size=1_000_000, p=task.cond[0])
        counts = np.bincount(draws, minlength=task.n_bins) / draws.size
        from qtl.tasks import _bin_densities

        mats = _bin_densities(self.ansatz, self.theta, task.features)
        mc = np.tensordot(counts, mats, axes=([0], [0]))
        np.testing.assert_allclose(mc, exact, atol=1e-3)

    def test_valid_density_and_eigenvalue_range(self):
        rng = np.random.default_rng(43)
        task = quantize_gaussian_task(FIG2_SOURCE)
        for _ in range(10):
            theta = ThetaVector(rng.uniform(0, 2 * np.pi, size=3))
            avg = class_average_density(task, self.ansatz, theta, 1)
            assert isinstance(avg, DensityMatrix)
            ev = np.linalg.eigvalsh(avg.mat)
            assert ev.min() >= -1e-12 and ev.max() <= 1.0 + 1e-12


class TestEmpiricalClassDensity:
    def setup_method(self):
        self.ansatz = single_qubit_rx_rot_rx()
        self.theta = ThetaVector([0.0, 0.0, 0.0])
        self.feats = np.array([-0.3, 0.9])

    def test_single_sample(self):
        from qtl.embedding import embed

        data = Dataset(np.array([1]), np.array([0]), self.feats, seed=0)
        w, mat = empirical_class_density(data, self.ansatz, self.theta, 1)
        assert w == 1.0
        np.testing.assert_allclose(
            mat, embed(self.ansatz, self.theta, -0.3).mat, atol=1e-12
        )

    def test_balanced_weights(self):
        data = Dataset(np.array([0, 1]), np.array([0, 1]), self.feats, seed=0)
        w0, _ = empirical_class_density(data, self.ansatz, self.theta, 0)
        w1, _ = empirical_class_density(data, self.ansatz, self.theta, 1)
        assert (w0, w1) == (0.5, 0.5)

    def test_weights_match_label_frequencies(self):
        labels = np.array([0, 0, 0, 1])
        data = Dataset(labels, np.array([0, 0, 1, 1]), self.feats, seed=0)
        w0, _ = empirical_class_density(data, self.ansatz, self.theta, 0)
        assert w0 == 0.75

    def test_empty_class_sentinel(self):
        data = Dataset(np.array([0]), np.array([0]), self.feats, seed=0)
        w, mat = empirical_class_density(data, self.ansatz, self.theta, 1)
        assert w == 0.0
        np.testing.assert_array_equal(mat, np.zeros((2, 2)))

    def test_empty_dataset_raises(self):
        data = Dataset(np.array([], dtype=int), np.array([], dtype=int), self.feats, 0)
        with pytest.raises(EmptyDataset):
            empirical_class_density(data, self.ansatz, self.theta, 0)


class TestTvDistance:
    def test_identical(self):
        assert tv_distance([0.25, 0.75], [0.25, 0.75]) == 0.0

    def test_disjoint(self):
        assert tv_distance([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)

    def test_direct_sum(self):
        assert tv_distance([0.7, 0.3], [0.5, 0.5]) == pytest.approx(0.2)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            tv_distance([0.5, 0.5], [1.0, 0.0, 0.0])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            tv_distance([0.5, 0.6], [0.5, 0.5])
