"""Dense complex-matrix kernel: Hermitian spectra, trace norms, matrix roots.

Everything downstream (state embeddings, Helstrom synthesis, mutual
information, Rademacher suprema) reduces to spectral decompositions of
small (n <= ~16) Hermitian matrices.  Inputs are symmetrized via
(A + A^dag)/2 before decomposition so that round-off accumulated in circuit
products does not trip the solver; robustness matters far more than speed
at these dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotHermitian, NotPSD, NumericalFailure

# Tolerances.  Spectral ops accept Hermiticity deviations up to
# HERMITIAN_INPUT_TOL; density matrices are held to the tighter DENSITY_TOL.
HERMITIAN_INPUT_TOL = 1e-8
DENSITY_TOL = 1e-10
# Eigenvalues in [-EIG_CLAMP, 0) are round-off from pure-state products and
# are clamped to zero by PSD-expecting operations.
EIG_CLAMP = 1e-10


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` (ndarray or DensityMatrix) to a square complex matrix."""
    m = np.asarray(getattr(a, "mat", a), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^dag) / 2."""
    return (m + m.conj().T) / 2


def _checked_hermitian(a, tol: float = HERMITIAN_INPUT_TOL) -> np.ndarray:
    m = as_matrix(a)
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise NotHermitian(f"max |A - A^dag| = {dev:.3e} exceeds {tol:.1e}")
    return hermitize(m)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` are sorted descending; ``eigenvectors`` holds the
    matching orthonormal eigenvectors as columns, so that
    A = V diag(w) V^dag reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(a, tol: float = HERMITIAN_INPUT_TOL) -> Spectrum:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Raises NotHermitian if the symmetry deviation exceeds ``tol`` and
    NumericalFailure if the underlying iteration does not converge.
    """
    m = _checked_hermitian(a, tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return Spectrum(np.ascontiguousarray(w[::-1]), np.ascontiguousarray(v[:, ::-1]))


def _eigvals(a, tol: float = HERMITIAN_INPUT_TOL) -> np.ndarray:
    m = _checked_hermitian(a, tol)
    return np.linalg.eigvalsh(m)


def trace_norm(a) -> float:
    """Trace norm ||A||_1 = sum |eigenvalue| for Hermitian A."""
    return float(np.abs(_eigvals(a)).sum())


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of (rho - sigma).

    Arguments need not be unit-trace: the Helstrom risk formula evaluates
    the trace distance between prior-weighted class densities.
    """
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise DimMismatch(f"shape {r.shape} vs {s.shape}")
    return trace_norm(r - s) / 2


def positive_part_trace(a) -> float:
    """Sum of the positive eigenvalues; equals (tr A + ||A||_1) / 2."""
    w = _eigvals(a)
    return float(w[w > 0].sum())


def negative_part_trace(a) -> float:
    """Sum of the negative eigenvalues; equals (tr A - ||A||_1) / 2."""
    w = _eigvals(a)
    return float(w[w < 0].sum())


def psd_sqrt(a) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [-1e-8, 0) are clamped to zero; anything lower raises
    NotPSD.
    """
    m = _checked_hermitian(a)
    w, v = np.linalg.eigh(m)
    if w[0] < -1e-8:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -1e-8")
    w = np.clip(w, 0.0, None)
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def eigvalsh_2x2(batch: np.ndarray) -> np.ndarray:
    """Closed-form eigenvalues (ascending) for a batch of 2x2 Hermitian matrices.

    Avoids per-matrix LAPACK calls inside grid sweeps; only the diagonal
    real parts and one off-diagonal entry are consumed.
    """
    t = (batch[..., 0, 0].real + batch[..., 1, 1].real) / 2
    z = (batch[..., 0, 0].real - batch[..., 1, 1].real) / 2
    r = np.sqrt(z * z + np.abs(batch[..., 0, 1]) ** 2)
    return np.stack([t - r, t + r], axis=-1)


def eigvalsh_batch(batch: np.ndarray) -> np.ndarray:
    """Batched Hermitian eigenvalues, ascending along the last axis."""
    if batch.shape[-1] == 2:
        return eigvalsh_2x2(batch)
    return np.linalg.eigvalsh(batch)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix describing a quantum state.

    Construction symmetrizes the input, clamps eigenvalues in
    [-1e-10, 0) to zero, and rejects anything that is not Hermitian,
    not PSD, or not unit trace within 1e-10.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.mat)
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > DENSITY_TOL:
            raise NotHermitian(f"max |A - A^dag| = {dev:.3e} exceeds {DENSITY_TOL:.1e}")
        m = hermitize(m)
        w, v = np.linalg.eigh(m)
        if w[0] < -EIG_CLAMP:
            raise NotPSD(f"eigenvalue {w[0]:.3e} below {-EIG_CLAMP:.1e}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            m = hermitize((v * w) @ v.conj().T)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > DENSITY_TOL:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond {DENSITY_TOL:.1e}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def purity(self) -> float:
        """Tr(rho^2); equals 1 for pure states."""
        return float(np.trace(self.mat @ self.mat).real)
