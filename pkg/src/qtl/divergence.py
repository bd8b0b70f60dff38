"""Task-induced distances between embedding parameters and the two
source-target dissimilarity measures.

Both dissimilarities certify the defining inequality
d^T(theta, theta*_T) <= d^S(theta, theta*_S) + D^ST for all grid points:
the trace version by construction on a shared grid, the TV version
because it upper-bounds the trace version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import min_expected_risk, min_risk_profile
from .embedding import Ansatz, GridStates, ThetaGrid, ThetaVector
from .errors import UnalignedSupport
from .tasks import DiscreteTask, tv_distance


@dataclass(frozen=True)
class TaskPair:
    """Source and target tasks evaluated through one shared ansatz."""

    source: DiscreteTask
    target: DiscreteTask
    ansatz: Ansatz

    def aligned(self) -> bool:
        return self.source.n_bins == self.target.n_bins and np.allclose(
            self.source.features, self.target.features, atol=1e-9
        )


@dataclass(frozen=True)
class DissimilarityReport:
    """Worst-case slack of the dissimilarity inequality over a grid."""

    max_violation: float
    worst_theta: ThetaVector
    violations: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def task_distance(
    task: DiscreteTask, theta: ThetaVector, theta2: ThetaVector, ansatz: Ansatz
) -> float:
    """Task-based distance |R_theta' - R_theta| between two parameter points."""
    r1 = min_expected_risk(task, ansatz, theta)
    r2 = min_expected_risk(task, ansatz, theta2)
    return abs(r2 - r1)


def dst_trace(pair: TaskPair, grid: ThetaGrid) -> float:
    """Trace dissimilarity 2 sup_theta |R^S_theta - R^T_theta| over the grid."""
    if len(grid) == 0:
        raise ValueError("grid is empty")
    rs = min_risk_profile(pair.source, pair.ansatz, grid)
    rt = min_risk_profile(pair.target, pair.ansatz, grid)
    return float(2.0 * np.max(np.abs(rs - rt)))


def dst_tv(pair: TaskPair) -> float:
    """TV dissimilarity 2 TV(priors) + 2 E_{p^S_c}[TV(conditionals)].

    Requires both tasks quantized on the same bins; asymmetric in the
    source expectation, exactly as defined.
    """
    if not pair.aligned():
        raise UnalignedSupport("tasks are quantized on different bins")
    prior_term = tv_distance(pair.target.prior, pair.source.prior)
    cond_term = sum(
        pair.source.prior[c] * tv_distance(pair.target.cond[c], pair.source.cond[c])
        for c in (0, 1)
    )
    return float(2.0 * prior_term + 2.0 * cond_term)


def check_dissimilarity(
    pair: TaskPair, grid: ThetaGrid, d_st: float, tolerance: float = 1e-9
) -> DissimilarityReport:
    """Verify d^T(theta, theta*_T) <= d^S(theta, theta*_S) + d_st on the grid.

    theta*_A is the grid argmin of the task-A minimum expected risk
    (lowest index on ties).  Returns the largest violation and the grid
    point attaining it.
    """
    states_kwargs = {}
    if pair.aligned():
        shared = GridStates(pair.ansatz, grid, pair.source.features)
        states_kwargs = {"states": shared}
    rs = min_risk_profile(pair.source, pair.ansatz, grid, **states_kwargs)
    rt = min_risk_profile(pair.target, pair.ansatz, grid, **states_kwargs)
    d_s = rs - rs[int(np.argmin(rs))]
    d_t = rt - rt[int(np.argmin(rt))]
    gap = d_t - d_s - d_st
    worst = int(np.argmax(gap))
    violations = int(np.count_nonzero(gap > tolerance))
    return DissimilarityReport(
        max_violation=float(gap[worst]),
        worst_theta=grid.point(worst),
        violations=violations,
        tolerance=tolerance,
    )
