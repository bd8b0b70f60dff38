"""POVM losses and risks, Helstrom synthesis, generalization-error supremum."""

import numpy as np
import pytest

from qtl.classifier import (
    Povm,
    empirical_risk,
    empirical_risk_profile,
    expected_risk,
    generalization_error,
    helstrom,
    loss,
    min_expected_risk,
    min_risk_profile,
    random_povms,
    train_povm,
)
from qtl.embedding import ThetaVector, make_theta_grid, single_qubit_rx_rot_rx
from qtl.errors import EmptyDataset, NotPSD
from qtl.qmath import DensityMatrix
from qtl.tasks import Dataset, DiscreteTask, GaussianTaskSpec, quantize_gaussian_task, sample_dataset

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)
ANSATZ = single_qubit_rx_rot_rx()
THETA0 = ThetaVector([0.0, 0.0, 0.0])


def random_task(rng, bins=8):
    features = np.sort(rng.uniform(-2.5, 2.5, size=bins))
    cond = rng.gamma(1.0, 1.0, size=(2, bins)) + 1e-3
    cond /= cond.sum(axis=1, keepdims=True)
    p0 = rng.uniform(0.15, 0.85)
    return DiscreteTask(features, np.array([p0, 1 - p0]), cond)


def povm_risk_batch(m1s, a0, a1):
    """Expected risk of many POVMs given weighted class densities."""
    return 1.0 - np.trace(a0).real - np.einsum("kij,ji->k", m1s, a1 - a0).real


class TestLoss:
    def test_certain_outcome(self):
        povm = Povm(np.eye(2), np.zeros((2, 2)))
        assert loss(povm, DensityMatrix(PLUS), 0) == 0.0

    def test_coin_flip_povm(self):
        povm = Povm(np.eye(2) / 2, np.eye(2) / 2)
        assert loss(povm, DensityMatrix(KET0), 0) == pytest.approx(0.5)
        assert loss(povm, DensityMatrix(KET1), 1) == pytest.approx(0.5)

    def test_perfect_projector(self):
        povm = Povm(np.eye(2) - PLUS, PLUS)
        assert loss(povm, DensityMatrix(PLUS), 1) == pytest.approx(0.0, abs=1e-12)


class TestExpectedRisk:
    def test_coin_flip_is_half(self):
        rng = np.random.default_rng(2)
        povm = Povm(np.eye(2) / 2, np.eye(2) / 2)
        task = random_task(rng)
        assert expected_risk(povm, task, ANSATZ, THETA0) == pytest.approx(0.5)

    def test_indistinguishable_classes_floor(self):
        feats = np.linspace(-1, 1, 5)
        cond = np.full((2, 5), 0.2)
        task = DiscreteTask(feats, np.array([0.5, 0.5]), cond)
        rng = np.random.default_rng(3)
        m1s = random_povms(2, 2000, rng)
        from qtl.tasks import class_average_density

        a = [
            0.5 * class_average_density(task, ANSATZ, THETA0, c).mat for c in (0, 1)
        ]
        risks = povm_risk_batch(m1s, a[0], a[1])
        assert risks.min() >= 0.5 - 1e-9
        assert min_expected_risk(task, ANSATZ, THETA0) == pytest.approx(0.5, abs=1e-12)

    def test_matches_monte_carlo(self):
        task = quantize_gaussian_task(GaussianTaskSpec(1.0, -1.0, 0.11))
        rng = np.random.default_rng(5)
        povm_m1 = random_povms(2, 1, rng)[0]
        povm = Povm(np.eye(2) - povm_m1, povm_m1)
        exact = expected_risk(povm, task, ANSATZ, THETA0)
        data = sample_dataset(task, 1_000_000, 99)
        mc = empirical_risk(povm, data, ANSATZ, THETA0)
        assert mc == pytest.approx(exact, abs=1e-3)


class TestEmpiricalRisk:
    def test_single_sample_zero(self):
        data = Dataset(np.array([0]), np.array([0]), np.array([0.4, 1.0]), 0)
        povm = Povm(np.eye(2), np.zeros((2, 2)))
        assert empirical_risk(povm, data, ANSATZ, THETA0) == 0.0

    def test_coin_flip(self):
        data = Dataset(np.array([0, 1]), np.array([0, 1]), np.array([0.4, 1.0]), 0)
        povm = Povm(np.eye(2) / 2, np.eye(2) / 2)
        assert empirical_risk(povm, data, ANSATZ, THETA0) == pytest.approx(0.5)

    def test_equals_expected_on_empirical_task(self):
        rng = np.random.default_rng(7)
        task = random_task(rng)
        data = sample_dataset(task, 40, 11)
        counts = data.joint_counts()
        prior = counts.sum(axis=1) / counts.sum()
        cond = counts / counts.sum(axis=1, keepdims=True)
        emp_task = DiscreteTask(task.features, prior, cond)
        m1 = random_povms(2, 1, rng)[0]
        povm = Povm(np.eye(2) - m1, m1)
        assert empirical_risk(povm, data, ANSATZ, THETA0) == pytest.approx(
            expected_risk(povm, emp_task, ANSATZ, THETA0), abs=1e-12
        )

    def test_empty_dataset(self):
        data = Dataset(np.array([], dtype=int), np.array([], dtype=int), np.array([0.0, 1.0]), 0)
        with pytest.raises(EmptyDataset):
            empirical_risk(Povm(np.eye(2) / 2, np.eye(2) / 2), data, ANSATZ, THETA0)


class TestHelstrom:
    def test_identical_mixtures_risk_half(self):
        povm = helstrom(PLUS / 2, PLUS / 2)
        risk = 1 - 0.5 * np.trace(povm.m0 @ PLUS).real - 0.5 * np.trace(povm.m1 @ PLUS).real
        assert risk == pytest.approx(0.5, abs=1e-12)

    def test_orthogonal_pure_states_risk_zero(self):
        povm = helstrom(KET0 / 2, KET1 / 2)
        np.testing.assert_allclose(povm.m1, KET1, atol=1e-12)

    def test_zero_vs_plus_closed_form(self):
        povm = helstrom(KET0 / 2, PLUS / 2)
        achieved = 1 - 0.5 * (
            np.trace(povm.m0 @ KET0) + np.trace(povm.m1 @ PLUS)
        ).real
        oracle = (1 - 1 / np.sqrt(2)) / 2
        assert achieved == pytest.approx(oracle, abs=1e-12)

    def test_tie_eigenvector_goes_to_m0(self):
        povm = helstrom(KET0, np.zeros((2, 2)))
        np.testing.assert_allclose(povm.m0, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(povm.m1, np.zeros((2, 2)), atol=1e-12)

    def test_rejects_non_psd(self):
        with pytest.raises(NotPSD):
            helstrom(np.diag([1.2, -0.2]), np.zeros((2, 2)))

    def test_rejects_bad_trace_sum(self):
        with pytest.raises(ValueError):
            helstrom(KET0, KET1)


class TestMinExpectedRisk:
    def test_orthogonal_class_embeddings(self):
        feats = np.array([0.0, np.pi / 2])
        cond = np.array([[1.0, 0.0], [0.0, 1.0]])
        task = DiscreteTask(feats, np.array([0.5, 0.5]), cond)
        assert min_expected_risk(task, ANSATZ, THETA0) == pytest.approx(0.0, abs=1e-12)

    def test_equals_achieved_helstrom_risk(self):
        rng = np.random.default_rng(13)
        from qtl.tasks import class_average_density

        for _ in range(25):
            task = random_task(rng)
            theta = ThetaVector(rng.uniform(0, 2 * np.pi, size=3))
            a = [
                task.prior[c] * class_average_density(task, ANSATZ, theta, c).mat
                for c in (0, 1)
            ]
            povm = helstrom(a[0], a[1])
            achieved = expected_risk(povm, task, ANSATZ, theta)
            assert min_expected_risk(task, ANSATZ, theta) == pytest.approx(
                achieved, abs=1e-10
            )

    def test_range(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            r = min_expected_risk(random_task(rng), ANSATZ,
                                  ThetaVector(rng.uniform(0, 2 * np.pi, 3)))
            assert -1e-12 <= r <= 0.5 + 1e-12

    def test_profile_matches_pointwise(self):
        rng = np.random.default_rng(19)
        task = random_task(rng)
        grid = make_theta_grid(ANSATZ, 3)
        profile = min_risk_profile(task, ANSATZ, grid)
        for i in range(len(grid)):
            assert profile[i] == pytest.approx(
                min_expected_risk(task, ANSATZ, grid.point(i)), abs=1e-12
            )


class TestTrainPovm:
    def test_single_sample(self):
        data = Dataset(np.array([0]), np.array([0]), np.array([0.3, 1.0]), 0)
        povm, risk = train_povm(data, ANSATZ, THETA0)
        np.testing.assert_allclose(povm.m0, np.eye(2), atol=1e-12)
        assert risk == pytest.approx(0.0, abs=1e-12)

    def test_conflicting_labels_same_point(self):
        data = Dataset(np.array([0, 1]), np.array([1, 1]), np.array([0.3, 1.0]), 0)
        _, risk = train_povm(data, ANSATZ, THETA0)
        assert risk == pytest.approx(0.5, abs=1e-12)

    def test_beats_random_povms(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            task = random_task(rng)
            data = sample_dataset(task, 25, int(rng.integers(0, 2**31)))
            if len(set(data.labels.tolist())) < 2:
                continue
            theta = ThetaVector(rng.uniform(0, 2 * np.pi, size=3))
            povm, risk = train_povm(data, ANSATZ, theta)
            assert risk == pytest.approx(
                empirical_risk(povm, data, ANSATZ, theta), abs=1e-9
            )
            m1s = random_povms(2, 10_000, rng)
            from qtl.tasks import empirical_class_density

            a = []
            for c in (0, 1):
                w, mean = empirical_class_density(data, ANSATZ, theta, c)
                a.append(w * mean)
            risks = povm_risk_batch(m1s, a[0], a[1])
            assert risk <= risks.min() + 1e-9

    def test_profile_matches_trained_risk(self):
        rng = np.random.default_rng(29)
        task = random_task(rng)
        data = sample_dataset(task, 30, 7)
        grid = make_theta_grid(ANSATZ, 3)
        profile = empirical_risk_profile(data, ANSATZ, grid)
        for i in (0, 5, 11):
            _, risk = train_povm(data, ANSATZ, grid.point(i))
            assert profile[i] == pytest.approx(risk, abs=1e-12)


class TestGeneralizationError:
    def test_full_enumeration_is_zero(self):
        feats = np.array([-0.5, 0.5])
        task = DiscreteTask(feats, np.array([0.5, 0.5]), np.full((2, 2), 0.5))
        # one sample per (class, bin) cell reproduces the joint exactly
        data = Dataset(np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1]), feats, 0)
        assert generalization_error(task, data, ANSATZ, THETA0) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_single_sample_positive(self):
        rng = np.random.default_rng(31)
        task = random_task(rng)
        data = sample_dataset(task, 1, 3)
        assert generalization_error(task, data, ANSATZ, THETA0) > 0.0

    def test_dominates_random_povm_search(self):
        rng = np.random.default_rng(37)
        from qtl.tasks import class_average_density, empirical_class_density

        for _ in range(10):
            task = random_task(rng)
            theta = ThetaVector(rng.uniform(0, 2 * np.pi, size=3))
            data = sample_dataset(task, int(rng.integers(2, 40)), int(rng.integers(1, 999)))
            closed = generalization_error(task, data, ANSATZ, theta)
            a = []
            for c in (0, 1):
                w, mean = empirical_class_density(data, ANSATZ, theta, c)
                a.append(w * mean - task.prior[c] * class_average_density(task, ANSATZ, theta, c).mat)
            c0 = np.trace(a[0]).real
            b = a[1] - a[0]
            m1s = random_povms(2, 100_000, rng)
            gaps = np.abs(c0 + np.einsum("kij,ji->k", m1s, b).real)
            assert gaps.max() <= closed + 1e-6
