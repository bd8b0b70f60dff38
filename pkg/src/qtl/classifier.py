"""Binary POVM classifiers: losses, risks, Helstrom synthesis.

The optimal binary measurement between weighted class densities a0 and a1
is the projector onto the positive eigenspace of (a1 - a0); its expected
error is 1/2 - T(a0, a1) in closed form.  Everything here is exact linear
algebra, no iterative optimization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .embedding import Ansatz, GridStates, ThetaGrid, ThetaVector
from .errors import DimMismatch, EmptyDataset, NotPSD
from .qmath import as_matrix, hermitize
from .tasks import Dataset, DiscreteTask, class_average_density, empirical_class_density

POVM_TOL = 1e-9
# Eigenvalues of (a1 - a0) within this band of zero are assigned to M0;
# any assignment is optimal, fixing one keeps outputs deterministic.
HELSTROM_TIE_TOL = 1e-10

# Debug hook for the validation suite's negative control: swapping the
# Helstrom outcomes must make the optimality check fail.
_SWAP_HELSTROM_OUTCOMES = False


@dataclass(frozen=True)
class Povm:
    """Two-outcome POVM (M0, M1): PSD matrices summing to the identity.

    Inputs are symmetrized; PSD and completeness are enforced to 1e-9.
    """

    m0: np.ndarray
    m1: np.ndarray

    def __post_init__(self):
        m0 = hermitize(as_matrix(self.m0))
        m1 = hermitize(as_matrix(self.m1))
        if m0.shape != m1.shape:
            raise DimMismatch(f"M0 shape {m0.shape} vs M1 shape {m1.shape}")
        for name, m in (("M0", m0), ("M1", m1)):
            w = np.linalg.eigvalsh(m)
            if w[0] < -POVM_TOL:
                raise NotPSD(f"{name} eigenvalue {w[0]:.3e} below {-POVM_TOL:.1e}")
        dev = float(np.max(np.abs(m0 + m1 - np.eye(m0.shape[0]))))
        if dev > POVM_TOL:
            raise ValueError(f"M0 + M1 deviates from identity by {dev:.3e}")
        m0.setflags(write=False)
        m1.setflags(write=False)
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "m1", m1)

    @property
    def dim(self) -> int:
        return self.m0.shape[0]

    def element(self, c: int) -> np.ndarray:
        return self.m0 if c == 0 else self.m1


def loss(povm: Povm, rho, c: int) -> float:
    """Per-example error probability 1 - Tr(M_c rho), clamped to [0, 1]."""
    m = povm.element(c)
    r = as_matrix(rho)
    if r.shape != m.shape:
        raise DimMismatch(f"state shape {r.shape} vs POVM shape {m.shape}")
    val = 1.0 - float(np.trace(m @ r).real)
    return min(max(val, 0.0), 1.0)


def expected_risk(
    povm: Povm, task: DiscreteTask, ansatz: Ansatz, theta: ThetaVector | None
) -> float:
    """Expected error 1 - sum_c p_c(c) Tr(M_c rho_{theta|c}) under the task."""
    total = 0.0
    for c in (0, 1):
        rho_c = class_average_density(task, ansatz, theta, c)
        total += task.prior[c] * float(np.trace(povm.element(c) @ rho_c.mat).real)
    return min(max(1.0 - total, 0.0), 1.0)


def empirical_risk(
    povm: Povm, data: Dataset, ansatz: Ansatz, theta: ThetaVector | None
) -> float:
    """Mean per-example loss over a dataset."""
    if len(data) == 0:
        raise EmptyDataset("dataset has no samples")
    total = 0.0
    for c in (0, 1):
        w, mean = empirical_class_density(data, ansatz, theta, c)
        total += w * float(np.trace(povm.element(c) @ mean).real)
    return min(max(1.0 - total, 0.0), 1.0)


def helstrom(a0, a1) -> Povm:
    """Optimal POVM for weighted densities (a0, a1) = (p0 rho0, p1 rho1).

    M1 projects onto the strictly positive eigenspace of (a1 - a0);
    eigenvalues within HELSTROM_TIE_TOL of zero go to M0.  The achieved
    expected risk equals 1/2 - T(a0, a1).
    """
    a0 = as_matrix(a0)
    a1 = as_matrix(a1)
    if a0.shape != a1.shape:
        raise DimMismatch(f"shape {a0.shape} vs {a1.shape}")
    for name, a in (("a0", a0), ("a1", a1)):
        w = np.linalg.eigvalsh(hermitize(a))
        if w[0] < -POVM_TOL:
            raise NotPSD(f"{name} eigenvalue {w[0]:.3e} below {-POVM_TOL:.1e}")
    tr_sum = float(np.trace(a0 + a1).real)
    if abs(tr_sum - 1.0) > POVM_TOL:
        raise ValueError(f"weighted traces sum to {tr_sum!r}, expected 1")
    spec = qmath.hermitian_eig(a1 - a0)
    keep = spec.eigenvalues > HELSTROM_TIE_TOL
    v = spec.eigenvectors[:, keep]
    m1 = v @ v.conj().T
    m0 = np.eye(a0.shape[0]) - m1
    if _SWAP_HELSTROM_OUTCOMES:
        m0, m1 = m1, m0
    return Povm(m0, m1)


def min_expected_risk(
    task: DiscreteTask, ansatz: Ansatz, theta: ThetaVector | None
) -> float:
    """Closed-form minimum expected risk 1/2 - T(p0 rho_0, p1 rho_1)."""
    a = [
        task.prior[c] * class_average_density(task, ansatz, theta, c).mat
        for c in (0, 1)
    ]
    return 0.5 - qmath.trace_distance(a[0], a[1])


def min_risk_profile(
    task: DiscreteTask,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
) -> np.ndarray:
    """min_expected_risk evaluated at every grid point, as a (G,) array."""
    if states is None:
        states = GridStates(ansatz, grid, task.features)
    return states.risk_profile(task.joint())


def empirical_risk_profile(
    data: Dataset,
    ansatz: Ansatz,
    grid: ThetaGrid,
    states: GridStates | None = None,
) -> np.ndarray:
    """Minimized training loss 1/2 - T(w0 m0, w1 m1) at every grid point."""
    if len(data) == 0:
        raise EmptyDataset("dataset has no samples")
    if states is None:
        states = GridStates(ansatz, grid, data.features)
    return states.risk_profile(data.empirical_joint())


def train_povm(
    data: Dataset, ansatz: Ansatz, theta: ThetaVector | None
) -> tuple[Povm, float]:
    """Empirical-risk-minimizing POVM and its training loss at fixed theta.

    Helstrom on the empirical weighted class densities is the global
    minimizer over all two-outcome POVMs.  If one class is absent the
    measurement falls back to classifying by the observed label alone
    (identity element for the present class), which attains loss zero.
    """
    if len(data) == 0:
        raise EmptyDataset("dataset has no samples")
    w0, mean0 = empirical_class_density(data, ansatz, theta, 0)
    w1, mean1 = empirical_class_density(data, ansatz, theta, 1)
    a0, a1 = w0 * mean0, w1 * mean1
    risk = 0.5 - qmath.trace_distance(a0, a1)
    n = ansatz.hilbert_dim
    eye = np.eye(n)
    if w0 == 0.0:
        povm = Povm(np.zeros((n, n)), eye)
    elif w1 == 0.0:
        povm = Povm(eye, np.zeros((n, n)))
    else:
        povm = helstrom(a0, a1)
    return povm, float(max(risk, 0.0))


def generalization_error(
    task: DiscreteTask, data: Dataset, ansatz: Ansatz, theta: ThetaVector | None
) -> float:
    """Exact sup over POVMs of |expected risk - empirical risk| at fixed theta.

    Writing the gap as a function of M1 gives c0 + Tr(M1 B) with
    c0 = Tr(A0), B = A1 - A0, and A_c the (empirical minus true) weighted
    class density.  The objective is affine in M1, so the supremum over
    0 <= M1 <= I is attained at a spectral projector of B:
    max(|c0 + pos_part(B)|, |c0 + neg_part(B)|).
    """
    if len(data) == 0:
        raise EmptyDataset("dataset has no samples")
    a = []
    for c in (0, 1):
        w, mean = empirical_class_density(data, ansatz, theta, c)
        true_c = task.prior[c] * class_average_density(task, ansatz, theta, c).mat
        a.append(w * mean - true_c)
    c0 = float(np.trace(a[0]).real)
    b = a[1] - a[0]
    hi = c0 + qmath.positive_part_trace(b)
    lo = c0 + qmath.negative_part_trace(b)
    return max(abs(hi), abs(lo))


def random_povms(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random two-outcome POVMs as a (count, n, n) batch of M1 elements.

    M1 = V diag(u) V^dag with Haar-ish V from a QR of a complex Gaussian
    and u uniform in [0, 1]; M0 = I - M1 is implied.
    """
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal(
        (count, dim, dim)
    )
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r, axis1=1, axis2=2).copy()
    phases /= np.abs(phases)
    q = q * phases[:, None, :]
    u = rng.random((count, dim))
    return np.einsum("kij,kj,klj->kil", q, u, q.conj())
