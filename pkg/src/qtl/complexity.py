"""Renyi-2 mutual information and Rademacher complexity estimators.

The Rademacher estimators never search over POVMs: for a fixed sign vector
the objective sum_j sigma_j l_j / sqrt(N) is affine in M1, so its supremum
over 0 <= M1 <= I is the positive-part trace of the signed state mixture
plus an M-independent label term.  Monte Carlo only ranges over data
redraws and sign vectors; for N <= 12 the sign average is enumerated
exactly.  Sign vectors are drawn in antithetic pairs, which makes every
averaged estimate nonnegative pathwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import (
    Ansatz,
    EmbeddingAnsatz,
    GridStates,
    Layer,
    TableEmbedding,
    ThetaGrid,
    ThetaVector,
)
from .errors import NotOneTimeEncoding
from .qmath import eigvalsh_batch, psd_sqrt
from .tasks import DiscreteTask, _bin_densities, derive_seed, rng_from_seed, sample_dataset

EXHAUSTIVE_SIGMA_MAX = 12
_MIX_CHUNK_ENTRIES = 4_000_000  # complex entries per signed-mixture chunk


@dataclass(frozen=True)
class RademacherEstimate:
    """Monte-Carlo Rademacher complexity with its standard error.

    ``std_error`` is the spread of the per-data-redraw means; it is zero
    when a single redraw is used.
    """

    value: float
    std_error: float
    outer_draws: int
    sigma_draws: int
    n: int


def _tr_sqrt_mixture(states: GridStates, px: np.ndarray) -> np.ndarray:
    """Tr sqrt(sum_x p(x) rho(x)^2) at every grid point, as a (G,) array."""
    mix = states.mixture_sq(px)
    ev = np.clip(eigvalsh_batch(mix), 0.0, None)
    tr = np.sqrt(ev).sum(axis=-1)
    if tr.shape[0] != len(states.grid):
        tr = np.broadcast_to(tr, (len(states.grid),)).copy()
    return tr


def renyi2_mi(task: DiscreteTask, ansatz: Ansatz, theta: ThetaVector | None) -> float:
    """2-Renyi mutual information 2 log2 Tr sqrt(sum_x p(x) rho_theta(x)^2)."""
    px = task.marginal_x()
    mats = _bin_densities(ansatz, theta, task.features)
    sq = np.einsum("bij,bjk->bik", mats, mats)
    mix = np.tensordot(px, sq, axes=([0], [0]))
    tr = float(np.trace(psd_sqrt(mix)).real)
    return 2.0 * math.log2(tr)


def renyi2_mi_profile(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
) -> np.ndarray:
    """renyi2_mi at every grid point, as a (G,) array."""
    if states is None:
        states = GridStates(ansatz, grid, task.features)
    tr = _tr_sqrt_mixture(states, task.marginal_x())
    return 2.0 * np.log2(tr)


def rademacher_cap_mi(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
) -> float:
    """Mutual-information cap 0.5 sqrt(sup_theta 2^{I_2}) on the POVM complexity.

    Since 2^{I_2} = (Tr sqrt(mixture))^2, this is half the largest
    trace-of-square-root over the grid.
    """
    if len(grid) == 0:
        raise ValueError("grid is empty")
    if states is None:
        states = GridStates(ansatz, grid, task.features)
    return float(0.5 * _tr_sqrt_mixture(states, task.marginal_x()).max())


def rademacher_cap_dim(ansatz: Ansatz, task: DiscreteTask) -> float:
    """Dimension cap n sqrt(E_{p(x)}[Tr rho(x)^2]) on the joint complexity.

    Exactly n for pure-state circuit ansatze; below n for mixed table
    embeddings.
    """
    n = ansatz.hilbert_dim
    if isinstance(ansatz, TableEmbedding):
        px = task.marginal_x()
        purities = np.einsum("bij,bji->b", ansatz.states, ansatz.states).real
        return float(n * np.sqrt(np.dot(px, purities)))
    return float(n)


def one_time_encoding_cap(task: DiscreteTask, ansatz: Ansatz) -> float:
    """Tighter one-time-encoding cap Tr sqrt(E_{p(x)}[kappa(x)^2]).

    kappa(x) = S(x)|0><0|S(x)^dag is the encoded state before any
    parameterized gate.  Rejects repeated-encoding ansatze (the built-in
    rx_rot_rx encodes twice) and table embeddings, which have no encoding
    stage at all.
    """
    if not isinstance(ansatz, EmbeddingAnsatz):
        raise NotOneTimeEncoding("table embeddings have no data-encoding stage")
    if ansatz.encoding_kind != "one_time":
        raise NotOneTimeEncoding(
            f"encoding_kind is {ansatz.encoding_kind!r}, need one_time"
        )
    encoder = EmbeddingAnsatz(
        num_qubits=ansatz.num_qubits,
        layers=(Layer(data=ansatz.layers[0].data if ansatz.layers else ()),),
        encoding_kind="one_time",
    )
    grid = ThetaGrid(np.zeros((1, 0)), resolution=2)
    states = GridStates(encoder, grid, task.features)
    return float(_tr_sqrt_mixture(states, task.marginal_x())[0])


def _sigma_exhaustive(n: int) -> np.ndarray:
    """All 2^n sign vectors, each row in {+1, -1}^n."""
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _sigma_antithetic(n: int, draws: int, rng: np.random.Generator) -> np.ndarray:
    """Antithetic sign draws: each sampled vector is paired with its negation."""
    half = max(1, (draws + 1) // 2)
    s = 1.0 - 2.0 * rng.integers(0, 2, size=(half, n))
    return np.concatenate([s, -s], axis=0)


def _inner_sup_sweep(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    n: int,
    outer: int,
    sigma_draws: int,
    seed: int,
    states: GridStates | None,
):
    """Per-draw exact inner suprema, reduced to the two estimator shapes.

    Returns (per_theta_outer_means (O, G), joint_outer_means (O,),
    sigma_count).  For each data redraw o and sign vector s the inner
    value is

        sum_j sigma_j 1[c_j = 1] / sqrt(N)
        + pos_part_trace(sum_j sigma_j Delta_j rho_theta(x_j)) / sqrt(N)

    with Delta_j = +1 for class 0 and -1 for class 1.
    """
    if n < 1:
        raise ValueError("sample size n must be >= 1")
    if outer < 1 or sigma_draws < 1:
        raise ValueError("outer and sigma_draws must be >= 1")
    if states is None:
        states = GridStates(ansatz, grid, task.features)
    n_grid = len(grid)
    b = task.n_bins
    sqrt_n = math.sqrt(n)
    per_theta = np.empty((outer, n_grid))
    joint = np.empty(outer)
    sigma_count = 0
    for o in range(outer):
        data = sample_dataset(task, n, derive_seed(seed, o, "rademacher-data"))
        if n <= EXHAUSTIVE_SIGMA_MAX:
            sig = _sigma_exhaustive(n)
        else:
            rng = rng_from_seed(derive_seed(seed, o, "rademacher-sigma"))
            sig = _sigma_antithetic(n, sigma_draws, rng)
        sigma_count = sig.shape[0]
        delta = np.where(data.labels == 0, 1.0, -1.0)
        label_term = (sig * (data.labels == 1)).sum(axis=1) / sqrt_n
        signed = sig * delta[None, :]
        coeff = np.zeros((sigma_count, b))
        np.add.at(coeff, (slice(None), data.x_index), signed)
        chunk = max(1, _MIX_CHUNK_ENTRIES // max(1, n_grid * states.n * states.n))
        acc_theta = np.zeros(n_grid)
        acc_joint = 0.0
        for lo in range(0, sigma_count, chunk):
            mix = states.signed_mixtures(coeff[lo : lo + chunk])
            ev = eigvalsh_batch(mix)
            pos = np.where(ev > 0.0, ev, 0.0).sum(axis=-1)
            if pos.shape[1] != n_grid:
                pos = np.broadcast_to(pos, (pos.shape[0], n_grid))
            vals = label_term[lo : lo + chunk, None] + pos / sqrt_n
            acc_theta += vals.sum(axis=0)
            acc_joint += vals.max(axis=1).sum()
        per_theta[o] = acc_theta / sigma_count
        joint[o] = acc_joint / sigma_count
    return per_theta, joint, sigma_count


def _std_error(outer_means: np.ndarray) -> float:
    if outer_means.size < 2:
        return 0.0
    return float(outer_means.std(ddof=1) / math.sqrt(outer_means.size))


def rademacher_povm(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    n: int,
    outer: int = 50,
    sigma_draws: int = 100,
    seed: int = 0,
    states: GridStates | None = None,
) -> RademacherEstimate:
    """POVM-space Rademacher complexity: sup over theta of the MC mean.

    The theta supremum sits outside the expectations; the estimate is the
    largest per-theta average, with the standard error taken at the
    maximizing grid point.
    """
    per_theta, _, sigma_count = _inner_sup_sweep(
        task, ansatz, grid, n, outer, sigma_draws, seed, states
    )
    profile = per_theta.mean(axis=0)
    g_star = int(np.argmax(profile))
    return RademacherEstimate(
        value=float(profile[g_star]),
        std_error=_std_error(per_theta[:, g_star]),
        outer_draws=outer,
        sigma_draws=sigma_count,
        n=n,
    )


def rademacher_both(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    n: int,
    outer: int = 50,
    sigma_draws: int = 100,
    seed: int = 0,
    states: GridStates | None = None,
) -> tuple[RademacherEstimate, RademacherEstimate]:
    """Both estimators from one shared sweep: (povm-space, joint)."""
    per_theta, joint, sigma_count = _inner_sup_sweep(
        task, ansatz, grid, n, outer, sigma_draws, seed, states
    )
    profile = per_theta.mean(axis=0)
    g_star = int(np.argmax(profile))
    povm_est = RademacherEstimate(
        value=float(profile[g_star]),
        std_error=_std_error(per_theta[:, g_star]),
        outer_draws=outer,
        sigma_draws=sigma_count,
        n=n,
    )
    joint_est = RademacherEstimate(
        value=float(joint.mean()),
        std_error=_std_error(joint),
        outer_draws=outer,
        sigma_draws=sigma_count,
        n=n,
    )
    return povm_est, joint_est


def rademacher_joint(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    n: int,
    outer: int = 50,
    sigma_draws: int = 100,
    seed: int = 0,
    states: GridStates | None = None,
) -> RademacherEstimate:
    """Joint (theta, POVM) Rademacher complexity: MC mean of per-draw suprema.

    Shares data and sign streams with rademacher_povm at equal seeds, so
    the joint estimate dominates the per-theta one pathwise.
    """
    _, joint, sigma_count = _inner_sup_sweep(
        task, ansatz, grid, n, outer, sigma_draws, seed, states
    )
    return RademacherEstimate(
        value=float(joint.mean()),
        std_error=_std_error(joint),
        outer_draws=outer,
        sigma_draws=sigma_count,
        n=n,
    )
