"""Two-stage transfer learning, excess risks, PAC bounds, and replication.

Pretraining picks the grid point minimizing the source training loss; the
target stage trains only the measurement at that fixed embedding.  Excess
risks compare the resulting expected risk against the best grid point for
the target task.  Replication cells derive per-replication Philox streams
as (master_seed, replication_index, role), so a replication's source and
target draws are shared across sweep cells (common random numbers) and
results are independent of worker scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .classifier import (
    Povm,
    empirical_risk_profile,
    expected_risk,
    helstrom,
    min_risk_profile,
    train_povm,
)
from .complexity import (
    rademacher_both,
    rademacher_cap_dim,
    rademacher_cap_mi,
)
from .divergence import TaskPair, dst_trace, dst_tv
from .embedding import Ansatz, GridStates, ThetaGrid, ThetaVector
from .errors import EmptyDataset
from .tasks import (
    Dataset,
    DiscreteTask,
    derive_seed,
    quantize_gaussian_pair,
    sample_dataset,
)

if TYPE_CHECKING:  # pragma: no cover
    from .config import ExperimentConfig


@dataclass(frozen=True)
class TrainedModel:
    """Output of the two-stage procedure: pre-trained embedding plus POVM."""

    theta_hat: ThetaVector
    povm: Povm
    source_train_risk: float
    target_train_risk: float


@dataclass(frozen=True)
class BoundConfig:
    """How the excess-risk bounds are assembled.

    ``r_mode`` selects Monte-Carlo Rademacher estimates or the analytic
    caps (mutual-information cap for the POVM term, dimension cap for the
    joint term).  The mc_* fields only matter in mc_estimate mode.
    """

    delta: float
    d_st_mode: str = "trace"
    r_mode: str = "analytic_cap"
    mc_outer: int = 50
    mc_sigma_draws: int = 100
    mc_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.d_st_mode not in ("trace", "tv"):
            raise ValueError(f"unknown d_st_mode {self.d_st_mode!r}")
        if self.r_mode not in ("mc_estimate", "analytic_cap"):
            raise ValueError(f"unknown r_mode {self.r_mode!r}")


@dataclass(frozen=True)
class RiskReport:
    """Replicated excess-risk statistics for one (n_source, n_target) cell."""

    n_source: int
    n_target: int
    replications: int
    median: float
    q25: float
    q75: float
    excess_raw_mean: float
    bound_value: float
    components: dict


@dataclass(frozen=True)
class ShiftReport:
    """One row of the mean-shift sweep."""

    shift: float
    median: float
    q25: float
    q75: float
    bound_value: float
    dst_trace: float
    dst_tv: float


def pretrain_theta(
    source_data: Dataset,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
    refine: bool = False,
) -> tuple[ThetaVector, float]:
    """Grid argmin of the minimized source training loss (lowest index on ties).

    With ``refine`` one extra half-step local search runs around the
    incumbent; the returned point may then leave the grid.
    """
    if len(source_data) == 0:
        raise EmptyDataset("source dataset has no samples")
    profile = empirical_risk_profile(source_data, ansatz, grid, states)
    best = int(np.argmin(profile))
    theta = grid.point(best)
    risk = float(profile[best])
    if refine and grid.angles.shape[1] > 0:
        theta, risk = _refine_local(source_data, ansatz, grid, theta, risk)
    return theta, risk


def _refine_local(data, ansatz, grid, theta, risk):
    """One resolution-halving pass around the incumbent grid point."""
    step = 2.0 * math.pi / grid.resolution / 2.0
    d = grid.angles.shape[1]
    offsets = np.array(np.meshgrid(*([[-step, 0.0, step]] * d), indexing="ij"))
    cand = (theta.angles + offsets.reshape(d, -1).T) % (2.0 * math.pi)
    local = GridStates(ansatz, ThetaGrid(cand, grid.resolution), data.features)
    profile = local.risk_profile(data.empirical_joint())
    best = int(np.argmin(profile))
    if profile[best] < risk:
        return ThetaVector(cand[best]), float(profile[best])
    return theta, risk


def transfer_learn(
    source_data: Dataset,
    target_data: Dataset,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
    refine: bool = False,
) -> TrainedModel:
    """Pretrain the embedding on source data, then fit the POVM on target data."""
    theta_hat, source_risk = pretrain_theta(source_data, ansatz, grid, states, refine)
    povm, target_risk = train_povm(target_data, ansatz, theta_hat)
    return TrainedModel(theta_hat, povm, source_risk, target_risk)


def transfer_excess_risk(
    model: TrainedModel,
    target_task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    grid_min_risk: float | None = None,
) -> float:
    """Expected target risk of the trained pair minus the best grid risk.

    Returns the raw difference; reporting clamps at zero because grid
    round-off can leave values at the -1e-16 level.
    """
    if grid_min_risk is None:
        grid_min_risk = float(min_risk_profile(target_task, ansatz, grid).min())
    achieved = expected_risk(model.povm, target_task, ansatz, model.theta_hat)
    return achieved - grid_min_risk


def no_transfer_excess_risk(
    target_data: Dataset,
    target_task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
    grid_min_risk: float | None = None,
) -> float:
    """Excess risk of joint (theta, POVM) training on target data alone.

    The embedding argmin nests the POVM minimization, so this coincides
    with transfer_learn fed the target data twice; reports label it as the
    n_source = 0 baseline.
    """
    model = transfer_learn(target_data, target_data, ansatz, grid, states)
    return transfer_excess_risk(model, target_task, ansatz, grid, grid_min_risk)


def _r_terms(cfg: BoundConfig, task, ansatz, grid, n, states=None):
    """(POVM-space, joint) complexity terms under the configured r_mode."""
    if cfg.r_mode == "analytic_cap":
        return (
            rademacher_cap_mi(task, ansatz, grid, states),
            rademacher_cap_dim(ansatz, task),
        )
    povm_est, joint_est = rademacher_both(
        task,
        ansatz,
        grid,
        n,
        outer=cfg.mc_outer,
        sigma_draws=cfg.mc_sigma_draws,
        seed=cfg.mc_seed,
        states=states,
    )
    return povm_est.value, joint_est.value


def bound_no_transfer(
    cfg: BoundConfig,
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    n_target: int,
    states: GridStates | None = None,
) -> tuple[float, dict]:
    """High-probability excess-risk bound for target-only joint training:
    2 (R_joint + R_povm) / sqrt(N) + sqrt(2 log(2/delta) / N)."""
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    r_povm, r_joint = _r_terms(cfg, task, ansatz, grid, n_target, states)
    complexity = 2.0 * (r_joint + r_povm) / math.sqrt(n_target)
    confidence = math.sqrt(2.0 / n_target * math.log(2.0 / cfg.delta))
    components = {
        "complexity_term": complexity,
        "confidence_term": confidence,
    }
    return complexity + confidence, components


def bound_transfer(
    cfg: BoundConfig,
    pair: TaskPair,
    ansatz: Ansatz,
    grid: ThetaGrid,
    n_source: int,
    n_target: int,
    states_source: GridStates | None = None,
    states_target: GridStates | None = None,
) -> tuple[float, dict]:
    """High-probability bound on the transfer excess risk:
    4 R^T_povm / sqrt(N^T) + sqrt(2 log(3/delta) / N^T) + D^ST
    + 2 (R^S_joint + R^S_povm) / sqrt(N^S) + sqrt(2 log(3/delta) / N^S)."""
    if n_source < 1 or n_target < 1:
        raise ValueError("sample counts must be >= 1")
    if cfg.r_mode == "analytic_cap":
        r_povm_t = rademacher_cap_mi(pair.target, ansatz, grid, states_target)
    else:
        r_povm_t = rademacher_both(
            pair.target,
            ansatz,
            grid,
            n_target,
            outer=cfg.mc_outer,
            sigma_draws=cfg.mc_sigma_draws,
            seed=cfg.mc_seed,
            states=states_target,
        )[0].value
    r_povm_s, r_joint_s = _r_terms(cfg, pair.source, ansatz, grid, n_source, states_source)
    d_st = dst_trace(pair, grid) if cfg.d_st_mode == "trace" else dst_tv(pair)
    log3 = math.log(3.0 / cfg.delta)
    components = {
        "target_complexity_term": 4.0 * r_povm_t / math.sqrt(n_target),
        "target_confidence_term": math.sqrt(2.0 / n_target * log3),
        "dst_term": d_st,
        "source_complexity_term": 2.0 * (r_joint_s + r_povm_s) / math.sqrt(n_source),
        "source_confidence_term": math.sqrt(2.0 / n_source * log3),
    }
    return sum(components.values()), components


_ROLE_SOURCE = "source"
_ROLE_TARGET = "target"


def _expected_risk_at(states: GridStates, joint_true, g_index, povm) -> float:
    """Expected risk of a POVM at one grid point, using precomputed states."""
    if states.psi is not None:
        psi = states.psi[g_index]
        dens = np.einsum("cb,bi,bj->cij", joint_true, psi, psi.conj())
    else:
        dens = np.einsum("cb,bij->cij", joint_true, states.rho)
    hit = np.trace(povm.m0 @ dens[0]) + np.trace(povm.m1 @ dens[1])
    return float(min(max(1.0 - hit.real, 0.0), 1.0))


def _train_povm_at(states: GridStates, counts, g_index) -> Povm:
    """train_povm specialized to a grid index with precomputed states."""
    n = states.n
    eye = np.eye(n)
    w = counts.sum(axis=1)
    total = w.sum()
    if w[0] == 0:
        return Povm(np.zeros((n, n)), eye)
    if w[1] == 0:
        return Povm(eye, np.zeros((n, n)))
    weights = counts / total
    if states.psi is not None:
        psi = states.psi[g_index]
        dens = np.einsum("cb,bi,bj->cij", weights, psi, psi.conj())
    else:
        dens = np.einsum("cb,bij->cij", weights, states.rho)
    return helstrom(dens[0], dens[1])


def _replicate_cell(
    experiment: "ExperimentConfig", master_seed: int, n_source: int, n_target: int
) -> RiskReport:
    """All replications and the bound for one sweep cell."""
    ansatz, grid = experiment.ansatz, experiment.grid
    source_task, target_task = experiment.source_task, experiment.target_task
    states = GridStates(ansatz, grid, target_task.features)
    true_profile = states.risk_profile(target_task.joint())
    grid_min = float(true_profile.min())
    joint_true = target_task.joint()
    raw = np.empty(experiment.replications)
    for rep in range(experiment.replications):
        target_data = sample_dataset(
            target_task, n_target, derive_seed(master_seed, rep, _ROLE_TARGET)
        )
        if experiment.refine:
            if n_source == 0:
                raw[rep] = no_transfer_excess_risk(
                    target_data, target_task, ansatz, grid, states, grid_min
                )
            else:
                source_data = sample_dataset(
                    source_task, n_source, derive_seed(master_seed, rep, _ROLE_SOURCE)
                )
                model = transfer_learn(
                    source_data, target_data, ansatz, grid, states, refine=True
                )
                raw[rep] = transfer_excess_risk(
                    model, target_task, ansatz, grid, grid_min
                )
            continue
        if n_source == 0:
            train_weights = target_data.empirical_joint()
        else:
            source_data = sample_dataset(
                source_task, n_source, derive_seed(master_seed, rep, _ROLE_SOURCE)
            )
            train_weights = source_data.empirical_joint()
        g_hat = int(np.argmin(states.risk_profile(train_weights)))
        povm = _train_povm_at(states, target_data.joint_counts(), g_hat)
        raw[rep] = _expected_risk_at(states, joint_true, g_hat, povm) - grid_min
    clamped = np.maximum(raw, 0.0)
    q25, median, q75 = np.percentile(clamped, [25.0, 50.0, 75.0])
    if n_source == 0:
        bound_value, components = bound_no_transfer(
            experiment.bound, target_task, ansatz, grid, n_target, states
        )
    else:
        pair = TaskPair(source_task, target_task, ansatz)
        bound_value, components = bound_transfer(
            experiment.bound, pair, ansatz, grid, n_source, n_target, states, states
        )
    return RiskReport(
        n_source=n_source,
        n_target=n_target,
        replications=experiment.replications,
        median=float(median),
        q25=float(q25),
        q75=float(q75),
        excess_raw_mean=float(raw.mean()),
        bound_value=bound_value,
        components=components,
    )


def _resolve_threads(threads: int, n_jobs: int) -> int:
    if threads <= 0:
        threads = os.cpu_count() or 1
    return max(1, min(threads, n_jobs))


def replicate(
    experiment: "ExperimentConfig", seed: int | None = None, threads: int = 1
) -> list[RiskReport]:
    """Replicated excess risks and bounds for every (n_source, n_target) cell.

    Deterministic given (experiment, seed) regardless of worker count;
    cells are independent jobs reduced in configuration order.
    """
    master = experiment.master_seed if seed is None else int(seed)
    cells = [(ns, nt) for ns in experiment.n_source for nt in experiment.n_target]
    workers = _resolve_threads(threads, len(cells))
    if workers == 1:
        return [_replicate_cell(experiment, master, ns, nt) for ns, nt in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_replicate_cell, experiment, master, ns, nt)
            for ns, nt in cells
        ]
        return [f.result() for f in futures]


def _shift_cell(
    experiment: "ExperimentConfig", master_seed: int, shift: float
) -> ShiftReport:
    spec_s = experiment.source_spec
    spec_t = replace(spec_s, mu0=spec_s.mu0 + shift, mu1=spec_s.mu1 + shift)
    source_task, target_task = quantize_gaussian_pair(spec_s, spec_t)
    shifted = experiment.with_tasks(source_task, target_task)
    n_source = shifted.n_source[0]
    n_target = shifted.n_target[0]
    report = _replicate_cell(shifted, master_seed, n_source, n_target)
    pair = TaskPair(source_task, target_task, shifted.ansatz)
    return ShiftReport(
        shift=shift,
        median=report.median,
        q25=report.q25,
        q75=report.q75,
        bound_value=report.bound_value,
        dst_trace=dst_trace(pair, shifted.grid),
        dst_tv=dst_tv(pair),
    )


def shift_sweep(
    experiment: "ExperimentConfig", seed: int | None = None, threads: int = 1
) -> list[ShiftReport]:
    """Transfer excess risk and dissimilarities as the target means shift.

    Each shift displaces both target class means off the source task; rows
    come back in ascending shift order.
    """
    master = experiment.master_seed if seed is None else int(seed)
    shifts = sorted(experiment.shifts)
    workers = _resolve_threads(threads, len(shifts))
    if workers == 1:
        return [_shift_cell(experiment, master, s) for s in shifts]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_shift_cell, experiment, master, s) for s in shifts]
        return [f.result() for f in futures]
