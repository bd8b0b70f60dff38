"""Renyi-2 MI, Rademacher estimators with exact inner suprema, analytic caps."""

import numpy as np
import pytest

from qtl.classifier import random_povms
from qtl.complexity import (
    one_time_encoding_cap,
    rademacher_both,
    rademacher_cap_dim,
    rademacher_cap_mi,
    rademacher_joint,
    rademacher_povm,
    renyi2_mi,
    renyi2_mi_profile,
)
from qtl.embedding import (
    EmbeddingAnsatz,
    GateOp,
    Layer,
    TableEmbedding,
    ThetaVector,
    make_theta_grid,
    single_qubit_rx_rot_rx,
)
from qtl.errors import NotOneTimeEncoding
from qtl.tasks import DiscreteTask, sample_dataset

ANSATZ = single_qubit_rx_rot_rx()


def uniform_task(features):
    b = len(features)
    return DiscreteTask(
        np.asarray(features, dtype=float),
        np.array([0.5, 0.5]),
        np.full((2, b), 1.0 / b),
    )


def orthogonal_table(n):
    feats = np.arange(n, dtype=float)
    states = np.stack(
        [np.diag((np.arange(n) == k).astype(complex)) for k in range(n)]
    )
    return TableEmbedding(feats, states)


def random_task(rng, bins=10):
    features = np.sort(rng.uniform(-2.5, 2.5, size=bins))
    cond = rng.gamma(1.0, 1.0, size=(2, bins)) + 1e-3
    cond /= cond.sum(axis=1, keepdims=True)
    p0 = rng.uniform(0.2, 0.8)
    return DiscreteTask(features, np.array([p0, 1 - p0]), cond)


class TestRenyi2Mi:
    def test_constant_embedding_zero(self):
        feats = np.array([0.0, 1.0, 2.0])
        table = TableEmbedding(feats, np.repeat(np.diag([1.0, 0j])[None], 3, axis=0))
        assert renyi2_mi(uniform_task(feats), table, None) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_two_orthogonal_equiprobable(self):
        table = orthogonal_table(2)
        assert renyi2_mi(uniform_task([0.0, 1.0]), table, None) == pytest.approx(
            1.0, abs=1e-12
        )

    @pytest.mark.parametrize("n", [2, 4])
    def test_n_orthogonal_uniform(self, n):
        table = orthogonal_table(n)
        task = uniform_task(np.arange(n, dtype=float))
        assert renyi2_mi(task, table, None) == pytest.approx(np.log2(n), abs=1e-9)

    def test_nonnegative_and_bounded_for_circuit(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            task = random_task(rng)
            theta = ThetaVector(rng.uniform(0, 2 * np.pi, size=3))
            mi = renyi2_mi(task, ANSATZ, theta)
            assert -1e-12 <= mi <= 1.0 + 1e-12

    def test_profile_matches_pointwise(self):
        rng = np.random.default_rng(5)
        task = random_task(rng)
        grid = make_theta_grid(ANSATZ, 3)
        profile = renyi2_mi_profile(task, ANSATZ, grid)
        for i in (0, 7, 19):
            assert profile[i] == pytest.approx(
                renyi2_mi(task, ANSATZ, grid.point(i)), abs=1e-10
            )


class TestRademacherEstimators:
    def test_n1_exhaustive_is_half(self):
        rng = np.random.default_rng(7)
        task = random_task(rng)
        grid = make_theta_grid(ANSATZ, 3)
        est = rademacher_povm(task, ANSATZ, grid, n=1, outer=10, seed=42)
        assert est.value == pytest.approx(0.5, abs=1e-12)
        assert est.std_error <= 1e-12
        assert est.sigma_draws == 2
        est_j = rademacher_joint(task, ANSATZ, grid, n=1, outer=10, seed=42)
        assert est_j.value == pytest.approx(0.5, abs=1e-12)

    def test_singleton_grid_joint_equals_povm(self):
        table = orthogonal_table(2)
        task = uniform_task([0.0, 1.0])
        grid = make_theta_grid(table, 4)
        assert len(grid) == 1
        for n in (1, 3, 6):
            p = rademacher_povm(task, table, grid, n=n, outer=8, seed=9)
            j = rademacher_joint(task, table, grid, n=n, outer=8, seed=9)
            assert p.value == pytest.approx(j.value, abs=1e-15)

    def test_joint_dominates_povm_matched_seeds(self):
        rng = np.random.default_rng(11)
        grid = make_theta_grid(ANSATZ, 3)
        for trial in range(5):
            task = random_task(rng)
            n = int(rng.integers(2, 9))
            p, j = rademacher_both(task, ANSATZ, grid, n=n, outer=10, seed=trial)
            assert j.value >= p.value - 1e-12

    def test_nonnegative_with_mc_sigma(self):
        rng = np.random.default_rng(13)
        grid = make_theta_grid(ANSATZ, 2)
        task = random_task(rng)
        # n > 12 forces the antithetic MC path
        est = rademacher_povm(task, ANSATZ, grid, n=20, outer=3, sigma_draws=10, seed=1)
        assert est.value >= 0.0
        assert est.sigma_draws == 10

    def test_sigma_doubling_consistency(self):
        rng = np.random.default_rng(17)
        task = random_task(rng)
        grid = make_theta_grid(ANSATZ, 2)
        a = rademacher_povm(task, ANSATZ, grid, n=16, outer=20, sigma_draws=100, seed=3)
        b = rademacher_povm(task, ANSATZ, grid, n=16, outer=20, sigma_draws=200, seed=3)
        pooled = np.hypot(a.std_error, b.std_error)
        assert abs(a.value - b.value) < 3 * max(pooled, 1e-6)

    def test_below_caps_within_three_se(self):
        rng = np.random.default_rng(19)
        grid = make_theta_grid(ANSATZ, 4)
        for trial in range(8):
            task = random_task(rng)
            n = int(rng.integers(1, 11))
            p, j = rademacher_both(task, ANSATZ, grid, n=n, outer=30, seed=100 + trial)
            assert p.value <= rademacher_cap_mi(task, ANSATZ, grid) + 3 * p.std_error
            assert j.value <= rademacher_cap_dim(ANSATZ, task) + 3 * j.std_error

    def test_inner_sup_beats_random_povm_search(self):
        """Closed-form inner supremum vs. 10^4 random POVMs on fixed draws."""
        rng = np.random.default_rng(23)
        from qtl.qmath import positive_part_trace
        from qtl.tasks import _bin_densities

        hits = 0
        for trial in range(50):
            task = random_task(rng, bins=6)
            n = int(rng.integers(1, 10))
            data = sample_dataset(task, n, int(rng.integers(0, 2**31)))
            sigma = rng.choice([-1.0, 1.0], size=n)
            theta = ThetaVector(rng.uniform(0, 2 * np.pi, size=3))
            mats = _bin_densities(ANSATZ, theta, task.features)
            rho = mats[data.x_index]
            delta = np.where(data.labels == 0, 1.0, -1.0)
            label_term = float((sigma * (data.labels == 1)).sum()) / np.sqrt(n)
            s_mat = np.einsum("j,jab->ab", sigma * delta, rho)
            closed = label_term + positive_part_trace(s_mat) / np.sqrt(n)
            m1s = random_povms(2, 10_000, rng)
            vals = label_term + np.einsum("kij,ji->k", m1s, s_mat).real / np.sqrt(n)
            assert closed >= vals.max() - 1e-9
            # including the spectral projector recovers the closed form
            from qtl.qmath import hermitian_eig

            spec = hermitian_eig(s_mat)
            keep = spec.eigenvalues > 0
            proj = spec.eigenvectors[:, keep] @ spec.eigenvectors[:, keep].conj().T
            best = max(
                vals.max(),
                label_term + np.trace(proj @ s_mat).real / np.sqrt(n),
            )
            assert closed == pytest.approx(best, abs=1e-6)
            hits += 1
        assert hits == 50


class TestAnalyticCaps:
    def test_constant_embedding_cap_half(self):
        feats = np.array([0.0, 1.0, 2.0])
        table = TableEmbedding(feats, np.repeat(np.diag([1.0, 0j])[None], 3, axis=0))
        grid = make_theta_grid(table, 4)
        assert rademacher_cap_mi(uniform_task(feats), table, grid) == pytest.approx(0.5)

    def test_single_qubit_cap_below_half_sqrt2(self):
        rng = np.random.default_rng(29)
        grid = make_theta_grid(ANSATZ, 4)
        for _ in range(10):
            cap = rademacher_cap_mi(random_task(rng), ANSATZ, grid)
            assert cap <= 0.5 * np.sqrt(2) + 1e-12

    @pytest.mark.parametrize("n", [2, 4])
    def test_orthogonal_uniform_cap(self, n):
        table = orthogonal_table(n)
        task = uniform_task(np.arange(n, dtype=float))
        grid = make_theta_grid(table, 4)
        assert rademacher_cap_mi(task, table, grid) == pytest.approx(
            0.5 * np.sqrt(n), abs=1e-9
        )

    def test_dimension_cap_pure_ansatze(self):
        rng = np.random.default_rng(31)
        task = random_task(rng)
        assert rademacher_cap_dim(ANSATZ, task) == 2.0
        two_qubit = EmbeddingAnsatz(
            2,
            (Layer(data=(GateOp("rx", 0),), params=(GateOp("rot", 0), GateOp("rot", 1))),),
        )
        assert rademacher_cap_dim(two_qubit, task) == 4.0

    def test_dimension_cap_mixed_table(self):
        feats = np.array([0.0, 1.0])
        half_mixed = np.stack([np.eye(2, dtype=complex) / 2] * 2)
        table = TableEmbedding(feats, half_mixed)
        task = uniform_task(feats)
        assert rademacher_cap_dim(table, task) == pytest.approx(2 * np.sqrt(0.5))


class TestOneTimeEncodingCap:
    def one_time_ansatz(self):
        return EmbeddingAnsatz(
            1,
            (Layer(data=(GateOp("rx"),), params=(GateOp("rot"),)),),
            encoding_kind="one_time",
        )

    def test_constant_encoded_state(self):
        # features congruent mod 4*pi encode to the same kappa
        feats = np.array([0.0, 4 * np.pi, 8 * np.pi])
        task = uniform_task(feats)
        assert one_time_encoding_cap(task, self.one_time_ansatz()) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_two_orthogonal_encodings(self):
        task = uniform_task([0.0, np.pi])
        assert one_time_encoding_cap(task, self.one_time_ansatz()) == pytest.approx(
            np.sqrt(2), abs=1e-12
        )

    def test_matches_mi_identity(self):
        rng = np.random.default_rng(37)
        task = random_task(rng)
        ansatz = self.one_time_ansatz()
        cap = one_time_encoding_cap(task, ansatz)
        encoder = EmbeddingAnsatz(1, (Layer(data=(GateOp("rx"),)),), "one_time")
        mi = renyi2_mi(task, encoder, ThetaVector([]))
        assert cap == pytest.approx(2 ** (mi / 2), abs=1e-9)

    def test_rejects_repeated_encoding(self):
        rng = np.random.default_rng(41)
        with pytest.raises(NotOneTimeEncoding):
            one_time_encoding_cap(random_task(rng), ANSATZ)

    def test_rejects_table(self):
        table = orthogonal_table(2)
        with pytest.raises(NotOneTimeEncoding):
            one_time_encoding_cap(uniform_task([0.0, 1.0]), table)
