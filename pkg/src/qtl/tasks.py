"""Finite joint task distributions p(c, x), quantization, and sampling.

Tasks are discrete: a Gaussian class-conditional model is quantized onto a
uniform grid of feature bins, after which every expectation is a finite
sum.  Sampling uses counter-based Philox streams derived from a master
seed so that replications are reproducible and order-independent.
"""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass

import numpy as np

from .embedding import Ansatz, TableEmbedding, ThetaVector, state_batch
from .errors import DegenerateSpec, DimMismatch, EmptyDataset
from .qmath import DensityMatrix


def _path_entropy(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def derive_seed(master_seed: int, *path) -> int:
    """Deterministic 64-bit stream seed for (master_seed, *path).

    Path components may be ints (replication index) or short strings
    (role names); strings are folded through CRC-32 so the derivation is
    stable across platforms and sessions.
    """
    ss = np.random.SeedSequence([int(master_seed)] + [_path_entropy(p) for p in path])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by a single integer seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class GaussianTaskSpec:
    """Two-class Gaussian feature model prior to quantization."""

    mu0: float
    mu1: float
    sigma2: float
    prior0: float = 0.5
    bins: int = 100
    span_sigmas: float = 4.0

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if not 0.0 <= self.prior0 <= 1.0:
            raise ValueError("prior0 must lie in [0, 1]")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")


@dataclass(frozen=True)
class DiscreteTask:
    """Finite joint distribution over (class, feature bin).

    ``features`` holds the B bin centers (strictly increasing), ``prior``
    the two class probabilities, and ``cond[c]`` the conditional p(x|c)
    over bins (each row sums to 1).
    """

    features: np.ndarray
    prior: np.ndarray
    cond: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        prior = np.asarray(self.prior, dtype=float)
        cond = np.asarray(self.cond, dtype=float)
        if feats.ndim != 1 or np.any(np.diff(feats) <= 0):
            raise ValueError("features must be strictly increasing")
        if prior.shape != (2,) or abs(prior.sum() - 1.0) > 1e-12 or prior.min() < 0:
            raise ValueError("prior must be two nonnegative entries summing to 1")
        if cond.shape != (2, feats.size) or cond.min() < 0:
            raise ValueError("cond must be a nonnegative (2, B) table")
        if np.max(np.abs(cond.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("each cond row must sum to 1")
        for arr in (feats, prior, cond):
            arr.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "cond", cond)

    @property
    def n_bins(self) -> int:
        return self.features.size

    def joint(self) -> np.ndarray:
        """Joint weights p(c, x_b) as a (2, B) array."""
        return self.prior[:, None] * self.cond

    def marginal_x(self) -> np.ndarray:
        return self.joint().sum(axis=0)


def _gaussian_cond(centers: np.ndarray, mu: float, sigma2: float) -> np.ndarray:
    w = np.exp(-((centers - mu) ** 2) / (2.0 * sigma2))
    return w / w.sum()


def quantize_gaussian_task(spec: GaussianTaskSpec) -> DiscreteTask:
    """Quantize a Gaussian spec onto uniform bins with renormalized tails.

    Bin centers span [min(mu) - k sigma, max(mu) + k sigma] with
    k = span_sigmas.
    """
    sigma = float(np.sqrt(spec.sigma2))
    lo = min(spec.mu0, spec.mu1) - spec.span_sigmas * sigma
    hi = max(spec.mu0, spec.mu1) + spec.span_sigmas * sigma
    if hi <= lo:
        raise DegenerateSpec("feature span has zero width")
    centers = np.linspace(lo, hi, spec.bins)
    cond = np.stack(
        [_gaussian_cond(centers, mu, spec.sigma2) for mu in (spec.mu0, spec.mu1)]
    )
    return DiscreteTask(centers, np.array([spec.prior0, 1.0 - spec.prior0]), cond)


def quantize_gaussian_pair(
    source: GaussianTaskSpec, target: GaussianTaskSpec
) -> tuple[DiscreteTask, DiscreteTask]:
    """Quantize two Gaussian specs on one shared bin set (union span).

    Shared bins keep the per-class TV distances between the tasks well
    defined; pair-building configs always come through here.
    """
    if source.bins != target.bins:
        raise DimMismatch("paired tasks must share the bin count")
    means = (source.mu0, source.mu1, target.mu0, target.mu1)
    pad = max(
        source.span_sigmas * np.sqrt(source.sigma2),
        target.span_sigmas * np.sqrt(target.sigma2),
    )
    lo, hi = min(means) - pad, max(means) + pad
    if hi <= lo:
        raise DegenerateSpec("feature span has zero width")
    centers = np.linspace(lo, hi, source.bins)
    out = []
    for spec in (source, target):
        cond = np.stack(
            [_gaussian_cond(centers, mu, spec.sigma2) for mu in (spec.mu0, spec.mu1)]
        )
        out.append(
            DiscreteTask(centers, np.array([spec.prior0, 1.0 - spec.prior0]), cond)
        )
    return out[0], out[1]


@dataclass(frozen=True)
class Dataset:
    """Labeled sample of a DiscreteTask, reproducible from (task, seed, n).

    Stores the label and bin index per sample plus the generating bin
    centers, so downstream training never needs the task object back.
    """

    labels: np.ndarray
    x_index: np.ndarray
    features: np.ndarray
    seed: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        idx = np.asarray(self.x_index, dtype=np.int64)
        feats = np.asarray(self.features, dtype=float)
        if labels.shape != idx.shape:
            raise DimMismatch("labels and x_index must have equal length")
        if idx.size and (idx.min() < 0 or idx.max() >= feats.size):
            raise ValueError("x_index out of range")
        for arr in (labels, idx, feats):
            arr.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "x_index", idx)
        object.__setattr__(self, "features", feats)

    def __len__(self) -> int:
        return self.labels.size

    @property
    def x_values(self) -> np.ndarray:
        return self.features[self.x_index]

    def joint_counts(self) -> np.ndarray:
        """Per (class, bin) sample counts as a (2, B) array."""
        counts = np.zeros((2, self.features.size))
        np.add.at(counts, (self.labels, self.x_index), 1.0)
        return counts

    def empirical_joint(self) -> np.ndarray:
        """Empirical joint measure counts/N; raises on an empty dataset."""
        if len(self) == 0:
            raise EmptyDataset("dataset has no samples")
        return self.joint_counts() / len(self)


def sample_dataset(task: DiscreteTask, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. samples: c ~ prior, then x ~ cond[c].

    Uniform variates are drawn as (n, 2) rows so datasets of different
    sizes from the same stream share their common prefix.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = rng_from_seed(seed)
    u = rng.random((n, 2))
    labels = (u[:, 0] >= task.prior[0]).astype(np.int64)
    cum = np.cumsum(task.cond, axis=1)
    idx = np.empty(n, dtype=np.int64)
    for c in (0, 1):
        mask = labels == c
        idx[mask] = np.searchsorted(cum[c], u[mask, 1], side="right")
    idx = np.clip(idx, 0, task.n_bins - 1)
    return Dataset(labels, idx, task.features, int(seed))


def dump_dataset_csv(data: Dataset, path) -> None:
    """Write a dataset as CSV with columns index,label,x_value,bin_index."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "label", "x_value", "bin_index"])
        for i, (c, b) in enumerate(zip(data.labels, data.x_index)):
            writer.writerow([i, int(c), f"{data.features[b]:.12g}", int(b)])


def class_average_density(
    task: DiscreteTask, ansatz: Ansatz, theta: ThetaVector | None, c: int
) -> DensityMatrix:
    """Class-c average density matrix sum_b p(x_b|c) rho_theta(x_b)."""
    if c not in (0, 1):
        raise ValueError("class must be 0 or 1")
    mats = _bin_densities(ansatz, theta, task.features)
    avg = np.tensordot(task.cond[c], mats, axes=([0], [0]))
    return DensityMatrix(avg)


def empirical_class_density(
    data: Dataset, ansatz: Ansatz, theta: ThetaVector | None, c: int
) -> tuple[float, np.ndarray]:
    """Empirical class weight N_c/N and mean embedded density for class c.

    An empty class returns (0.0, zero matrix) as a documented sentinel so
    the Helstrom fallback can treat it uniformly.
    """
    if len(data) == 0:
        raise EmptyDataset("dataset has no samples")
    if c not in (0, 1):
        raise ValueError("class must be 0 or 1")
    mask = data.labels == c
    n_c = int(mask.sum())
    n_dim = ansatz.hilbert_dim
    if n_c == 0:
        return 0.0, np.zeros((n_dim, n_dim), dtype=complex)
    mats = _bin_densities(ansatz, theta, data.features)
    counts = np.bincount(data.x_index[mask], minlength=data.features.size).astype(float)
    mean = np.tensordot(counts / n_c, mats, axes=([0], [0]))
    return n_c / len(data), mean


def _bin_densities(ansatz: Ansatz, theta: ThetaVector | None, features: np.ndarray):
    """Densities rho_theta(x_b) for every bin center: (B, n, n)."""
    if isinstance(ansatz, TableEmbedding):
        return np.stack([ansatz.lookup(float(x)) for x in features])
    if theta is None:
        theta = ThetaVector(np.zeros(ansatz.param_count))
    psi = state_batch(ansatz, theta.angles.reshape(1, -1), features)[0]
    return np.einsum("bi,bj->bij", psi, psi.conj())


def tv_distance(p, q) -> float:
    """Total variation distance 0.5 * sum |p_i - q_i| between distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimMismatch(f"length {p.shape} vs {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if abs(v.sum() - 1.0) > 1e-9 or v.min() < 0:
            raise ValueError(f"{name} is not a normalized distribution")
    return float(0.5 * np.abs(p - q).sum())
