"""Classical-to-quantum embeddings: gates, layered circuits, parameter grids.

A circuit ansatz maps a scalar feature x to the pure state
rho_theta(x) = U |0><0| U^dag, where U is an alternating product of data
gates S_l(x) and parameterized gates U_l(theta_l).  The built-in
``rx_rot_rx`` ansatz is the single-qubit circuit
U_theta(x) = R_X(x) Rot_theta R_X(x) used throughout the experiments.

A ``TableEmbedding`` instead stores one explicit density matrix per
feature value; it has no parameters and may embed mixed states, which is
how the dimension-based complexity cap is exercised beyond pure circuits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArityMismatch, GridTooLarge, NotOneTimeEncoding, UnalignedSupport
from .qmath import DensityMatrix, eigvalsh_batch

TWO_PI = 2.0 * np.pi
GRID_POINT_CAP = 10**6

PARAM_GATE_ARITY = {"rx": 1, "rot": 3}
DATA_GATE_NAMES = ("rx",)


def rx_gate(x: float) -> np.ndarray:
    """Pauli-X rotation exp(-i x X / 2).

    [[cos(x/2), -i sin(x/2)], [-i sin(x/2), cos(x/2)]]; unitary and
    additive on its axis: R_X(a) R_X(b) = R_X(a + b).
    """
    return _rx_batch(np.asarray(float(x)))


def rot_gate(theta1: float, theta2: float, theta3: float) -> np.ndarray:
    """General single-qubit rotation with three Euler-style angles.

    [[e^{i(-t1/2 - t3/2)} cos(t2/2), -e^{i(-t1/2 + t3/2)} sin(t2/2)],
     [e^{i( t1/2 - t3/2)} sin(t2/2),  e^{i( t1/2 + t3/2)} cos(t2/2)]]
    """
    return _rot_batch(
        np.asarray(float(theta1)), np.asarray(float(theta2)), np.asarray(float(theta3))
    )


def _rx_batch(x: np.ndarray) -> np.ndarray:
    c, s = np.cos(x / 2), np.sin(x / 2)
    out = np.empty(np.shape(x) + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -1j * s
    out[..., 1, 0] = -1j * s
    out[..., 1, 1] = c
    return out


def _rot_batch(t1: np.ndarray, t2: np.ndarray, t3: np.ndarray) -> np.ndarray:
    t1, t2, t3 = np.broadcast_arrays(t1, t2, t3)
    c, s = np.cos(t2 / 2), np.sin(t2 / 2)
    out = np.empty(np.shape(t1) + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * (-t1 / 2 - t3 / 2)) * c
    out[..., 0, 1] = -np.exp(1j * (-t1 / 2 + t3 / 2)) * s
    out[..., 1, 0] = np.exp(1j * (t1 / 2 - t3 / 2)) * s
    out[..., 1, 1] = np.exp(1j * (t1 / 2 + t3 / 2)) * c
    return out


def _expand_1q(gates: np.ndarray, qubit: int, num_qubits: int) -> np.ndarray:
    """Kron-extend a batch of 2x2 gates to the full register (qubit 0 leftmost)."""
    if num_qubits == 1:
        return gates
    left = np.eye(2**qubit)
    right = np.eye(2 ** (num_qubits - qubit - 1))
    full = np.kron(np.kron(left, gates), right)
    return full


@dataclass(frozen=True)
class GateOp:
    """A named single-qubit gate applied to one register qubit."""

    name: str
    qubit: int = 0


@dataclass(frozen=True)
class Layer:
    """One circuit layer: data gates S_l(x) applied first, then U_l(theta_l)."""

    data: tuple[GateOp, ...] = ()
    params: tuple[GateOp, ...] = ()


@dataclass(frozen=True)
class EmbeddingAnsatz:
    """Layered circuit description; the full unitary is the layer product
    U_L(theta_L) S_L(x) ... U_1(theta_1) S_1(x) acting on |0...0>."""

    num_qubits: int
    layers: tuple[Layer, ...]
    encoding_kind: str = "repeated"

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ArityMismatch("num_qubits must be >= 1")
        if self.encoding_kind not in ("repeated", "one_time"):
            raise ValueError(f"unknown encoding_kind {self.encoding_kind!r}")
        for li, layer in enumerate(self.layers):
            for op in layer.data + layer.params:
                if not (0 <= op.qubit < self.num_qubits):
                    raise ArityMismatch(
                        f"layer {li}: gate on qubit {op.qubit} outside register"
                    )
            for op in layer.data:
                if op.name not in DATA_GATE_NAMES:
                    raise ValueError(f"unknown data gate {op.name!r}")
            for op in layer.params:
                if op.name not in PARAM_GATE_ARITY:
                    raise ValueError(f"unknown parameterized gate {op.name!r}")
        if self.encoding_kind == "one_time":
            for li, layer in enumerate(self.layers[1:], start=1):
                if layer.data:
                    raise NotOneTimeEncoding(
                        f"data gates in layer {li} but encoding_kind is one_time"
                    )

    @property
    def param_count(self) -> int:
        return sum(
            PARAM_GATE_ARITY[op.name] for layer in self.layers for op in layer.params
        )

    @property
    def hilbert_dim(self) -> int:
        return 2**self.num_qubits


@dataclass(frozen=True)
class TableEmbedding:
    """Explicit per-feature density matrices; theta-independent.

    ``states`` is a (B, n, n) array aligned with ``features``; each slice
    must satisfy the density-matrix invariants (checked on construction).
    """

    features: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        mats = np.asarray(self.states, dtype=complex)
        if feats.ndim != 1 or mats.ndim != 3 or mats.shape[0] != feats.size:
            raise ArityMismatch("need one density matrix per feature value")
        if np.any(np.diff(feats) <= 0):
            raise ValueError("features must be strictly increasing")
        mats = np.stack([DensityMatrix(m).mat for m in mats])
        feats.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "states", mats)

    @property
    def param_count(self) -> int:
        return 0

    @property
    def hilbert_dim(self) -> int:
        return self.states.shape[1]

    def lookup(self, x: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.features - x)))
        if abs(self.features[i] - x) > 1e-8:
            raise UnalignedSupport(f"feature {x!r} not in the embedding table")
        return self.states[i]


Ansatz = EmbeddingAnsatz | TableEmbedding


def single_qubit_rx_rot_rx() -> EmbeddingAnsatz:
    """The built-in ansatz U_theta(x) = R_X(x) Rot_theta R_X(x)."""
    return EmbeddingAnsatz(
        num_qubits=1,
        layers=(
            Layer(data=(GateOp("rx"),), params=(GateOp("rot"),)),
            Layer(data=(GateOp("rx"),)),
        ),
        encoding_kind="repeated",
    )


BUILTIN_ANSATZE = {"rx_rot_rx": single_qubit_rx_rot_rx}


@dataclass(frozen=True)
class ThetaVector:
    """Circuit parameter point; angles are reduced modulo 2*pi."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.mod(np.asarray(self.angles, dtype=float).reshape(-1), TWO_PI)
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self) -> int:
        return self.angles.size

    def __getitem__(self, i: int) -> float:
        return float(self.angles[i])


@dataclass(frozen=True)
class ThetaGrid:
    """Uniform lexicographic grid over [0, 2*pi)^d.

    ``angles`` has shape (points, d); the first axis varies slowest so the
    ordering is lexicographic by axis index and point 0 is the all-zeros
    vector.  Argmin ties over the grid are broken by lowest index.
    """

    angles: np.ndarray
    resolution: int

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self) -> int:
        return self.angles.shape[0]

    def point(self, i: int) -> ThetaVector:
        return ThetaVector(self.angles[i])

    @property
    def points(self) -> list[ThetaVector]:
        return [ThetaVector(row) for row in self.angles]


def make_theta_grid(ansatz: Ansatz, resolution: int) -> ThetaGrid:
    """Uniform grid with ``resolution`` points per parameter axis.

    A zero-parameter ansatz (a TableEmbedding) yields the single empty
    point, which keeps grid-sweeping code uniform.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    d = ansatz.param_count
    n_points = resolution**d
    if n_points > GRID_POINT_CAP:
        raise GridTooLarge(f"{resolution}^{d} = {n_points} exceeds {GRID_POINT_CAP}")
    if d == 0:
        return ThetaGrid(np.zeros((1, 0)), resolution)
    axis = np.arange(resolution) * (TWO_PI / resolution)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=1)
    return ThetaGrid(angles, resolution)


def _layer_param_matrix(
    ansatz: EmbeddingAnsatz, layer: Layer, angles: np.ndarray, offset: int
) -> tuple[np.ndarray, int]:
    """Product of a layer's parameterized gates for every grid row.

    ``angles`` has shape (G, d); returns ((G, n, n), next offset).  Gates
    listed first act first (appear rightmost in the product).
    """
    g = angles.shape[0]
    full = None
    for op in layer.params:
        k = PARAM_GATE_ARITY[op.name]
        sl = angles[:, offset : offset + k]
        offset += k
        if op.name == "rx":
            mat = _rx_batch(sl[:, 0])
        else:
            mat = _rot_batch(sl[:, 0], sl[:, 1], sl[:, 2])
        mat = _expand_1q(mat, op.qubit, ansatz.num_qubits)
        full = mat if full is None else np.einsum("gij,gjk->gik", mat, full)
    if full is None:
        full = np.broadcast_to(np.eye(ansatz.hilbert_dim, dtype=complex), (g,) + (ansatz.hilbert_dim,) * 2)
    return full, offset


def _layer_data_matrix(ansatz: EmbeddingAnsatz, layer: Layer, xs: np.ndarray) -> np.ndarray:
    """Product of a layer's data gates for every feature value: (B, n, n)."""
    full = None
    for op in layer.data:
        mat = _expand_1q(_rx_batch(xs), op.qubit, ansatz.num_qubits)
        full = mat if full is None else np.einsum("bij,bjk->bik", mat, full)
    if full is None:
        n = ansatz.hilbert_dim
        full = np.broadcast_to(np.eye(n, dtype=complex), (xs.size, n, n))
    return full


def state_batch(ansatz: EmbeddingAnsatz, angles: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Embedded pure states for every (grid row, feature) pair: (G, B, n).

    Workhorse of the grid sweeps; ``embed`` is the single-point wrapper.
    """
    if angles.shape[1] != ansatz.param_count:
        raise ArityMismatch(
            f"got {angles.shape[1]} parameters, ansatz needs {ansatz.param_count}"
        )
    g, b, n = angles.shape[0], xs.size, ansatz.hilbert_dim
    psi = np.zeros((g, b, n), dtype=complex)
    psi[:, :, 0] = 1.0
    offset = 0
    for layer in ansatz.layers:
        data = _layer_data_matrix(ansatz, layer, xs)
        psi = np.einsum("bij,gbj->gbi", data, psi)
        param, offset = _layer_param_matrix(ansatz, layer, angles, offset)
        psi = np.einsum("gij,gbj->gbi", param, psi)
    return psi


def circuit_unitary(ansatz: EmbeddingAnsatz, theta: ThetaVector, x: float) -> np.ndarray:
    """Full circuit unitary U(theta, x) as an (n, n) matrix."""
    if len(theta) != ansatz.param_count:
        raise ArityMismatch(
            f"theta has {len(theta)} entries, ansatz needs {ansatz.param_count}"
        )
    n = ansatz.hilbert_dim
    u = np.eye(n, dtype=complex)
    angles = theta.angles.reshape(1, -1)
    offset = 0
    for layer in ansatz.layers:
        u = _layer_data_matrix(ansatz, layer, np.asarray([float(x)]))[0] @ u
        param, offset = _layer_param_matrix(ansatz, layer, angles, offset)
        u = param[0] @ u
    return u


def embed(ansatz: Ansatz, theta: ThetaVector | None, x: float) -> DensityMatrix:
    """Density matrix rho_theta(x) for one parameter point and feature value."""
    if isinstance(ansatz, TableEmbedding):
        return DensityMatrix(ansatz.lookup(float(x)))
    if theta is None:
        theta = ThetaVector(np.zeros(ansatz.param_count))
    psi = circuit_unitary(ansatz, theta, x)[:, 0]
    return DensityMatrix(np.outer(psi, psi.conj()))


class GridStates:
    """Embeddings of a fixed feature set over a whole parameter grid.

    Precomputes pure states (circuits) or stacks the stored densities
    (tables) once, then serves the weighted-mixture contractions every
    risk sweep, mutual-information profile, and Rademacher supremum needs.
    Instances are immutable and safe to share across parallel workers.
    """

    def __init__(self, ansatz: Ansatz, grid: ThetaGrid, features: np.ndarray):
        self.ansatz = ansatz
        self.grid = grid
        self.features = np.asarray(features, dtype=float)
        self.n = ansatz.hilbert_dim
        if isinstance(ansatz, TableEmbedding):
            if self.features.size != ansatz.features.size or not np.allclose(
                self.features, ansatz.features, atol=1e-9
            ):
                raise UnalignedSupport("task features do not match the embedding table")
            self.psi = None
            self.rho = ansatz.states
        else:
            self.psi = state_batch(ansatz, grid.angles, self.features)
            self.rho = None
        self._outer = None

    def __len__(self) -> int:
        return len(self.grid)

    def pair_densities(self, weights: np.ndarray) -> np.ndarray:
        """Weighted class mixtures sum_b w[c,b] rho(theta, x_b): (G', 2, n, n).

        G' is the grid size for circuits and 1 for theta-independent tables.
        """
        if self.psi is not None:
            return np.einsum("cb,gbi,gbj->gcij", weights, self.psi, self.psi.conj())
        return np.einsum("cb,bij->cij", weights, self.rho)[None]

    def risk_profile(self, weights: np.ndarray) -> np.ndarray:
        """Helstrom risk 1/2 - T(a0(theta), a1(theta)) over the grid: (G,).

        ``weights`` is the (2, B) joint measure (true or empirical) over
        (class, feature bin); rows need not be normalized per class but must
        sum to 1 overall.
        """
        a = self.pair_densities(weights)
        ev = eigvalsh_batch(a[:, 1] - a[:, 0])
        risks = 0.5 - 0.5 * np.abs(ev).sum(axis=-1)
        if risks.shape[0] != len(self.grid):
            risks = np.broadcast_to(risks, (len(self.grid),)).copy()
        return risks

    def mixture_sq(self, px: np.ndarray) -> np.ndarray:
        """sum_b p(x_b) rho(theta, x_b)^2 over the grid: (G', n, n)."""
        if self.psi is not None:
            # pure states: rho^2 = rho
            return np.einsum("b,gbi,gbj->gij", px, self.psi, self.psi.conj())
        sq = np.einsum("bij,bjk->bik", self.rho, self.rho)
        return np.einsum("b,bij->ij", px, sq)[None]

    def purity_mean(self, px: np.ndarray) -> float:
        """E_{p(x)}[Tr rho(x)^2]; identically 1 for pure-state circuits."""
        if self.psi is not None:
            return 1.0
        sq = np.einsum("bij,bji->b", self.rho, self.rho).real
        return float(np.dot(px, sq))

    def signed_mixtures(self, coeff: np.ndarray) -> np.ndarray:
        """sum_b coeff[d, b] rho(theta, x_b) for a batch of sign patterns.

        Returns (D, G', n, n); used by the exact inner POVM supremum of the
        Rademacher estimators.
        """
        if self.psi is not None:
            if self._outer is None:
                self._outer = np.einsum("gbi,gbj->gbij", self.psi, self.psi.conj())
            return np.tensordot(coeff, self._outer, axes=([1], [1]))
        return np.tensordot(coeff, self.rho, axes=([1], [0]))[:, None]
