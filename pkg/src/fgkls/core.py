"""Energy-basis building blocks for FGKLS (Lindblad) open-system dynamics.

All operators live in the eigenbasis of the system Hamiltonian, so the
Hamiltonian itself is represented by its spectrum alone and every operator is
a dense complex matrix.  The module provides the FGKLS generator

    rho_dot = -i[H, rho] + sum_a L_a rho L_a^dag - 1/2 {sum_a L_a^dag L_a, rho},

its stationarity residual, the vectorized superoperator form, degeneracy
classification of the spectrum, and small-dimension Bloch helpers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "EnergySpectrum",
    "DegeneracyPartition",
    "DensityMatrix",
    "LiouvillianSuperoperator",
    "classify_pairs",
    "default_tol_degen",
    "dissipator",
    "fgkls_generator",
    "stationarity_residual",
    "vectorize_liouvillian",
    "vec",
    "unvec",
    "matrix_to_bloch",
    "bloch_to_matrix",
    "random_density_matrix",
    "weak_coupling_ratio",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances, sized for double precision at dimensions <= 64.

    herm / trace    validity of density matrices (Hermiticity, unit trace)
    psd             allowed negative eigenvalue magnitude of a state
    assembly        superoperator vs direct generator agreement
    rank            relative singular-value cutoff for rank decisions
    kernel          relative cutoff for Liouvillian null-space extraction
    """

    herm: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-8
    assembly: float = 1e-12
    rank: float = 1e-10
    kernel: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class EnergySpectrum:
    """Eigenvalues of the Hamiltonian in a fixed ordered basis (hbar = 1).

    The basis ordering is part of the data: index k of `energies` labels the
    k-th basis vector everywhere else in the package.
    """

    energies: np.ndarray

    def __post_init__(self):
        arr = np.array(self.energies, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("energies must be a non-empty 1-D real sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("all energies must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "energies", arr)

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    def hamiltonian(self) -> np.ndarray:
        """Dense diagonal Hamiltonian matrix."""
        return np.diag(self.energies).astype(complex)


def default_tol_degen(spectrum: EnergySpectrum) -> float:
    """Default degeneracy tolerance: 1e-9 times the largest energy scale."""
    scale = float(np.max(np.abs(spectrum.energies)))
    return 1e-9 * (scale if scale > 0.0 else 1.0)


@dataclass(frozen=True)
class DegeneracyPartition:
    """Partition of basis indices into groups of (numerically) equal energy.

    A pair of distinct indices sharing a class is called *internal*; all other
    pairs are *external*.  Internal pairs are exactly those whose commutator
    term -i (eps_m - eps_n) f_mn vanishes identically.
    """

    classes: tuple[tuple[int, ...], ...]
    tol_degen: float

    def __post_init__(self):
        seen: set[int] = set()
        for cls in self.classes:
            if not cls:
                raise ValueError("empty degeneracy class")
            if seen & set(cls):
                raise ValueError("degeneracy classes must be disjoint")
            seen.update(cls)
        if seen != set(range(len(seen))):
            raise ValueError("degeneracy classes must cover indices 0..D-1")
        lookup = {}
        for cid, cls in enumerate(self.classes):
            for idx in cls:
                lookup[idx] = cid
        object.__setattr__(self, "_class_of", lookup)

    @property
    def dim(self) -> int:
        return sum(len(c) for c in self.classes)

    def class_of(self, m: int) -> int:
        return self._class_of[m]

    def is_internal(self, m: int, n: int) -> bool:
        return self._class_of[m] == self._class_of[n]

    @property
    def has_degeneracy(self) -> bool:
        return any(len(c) > 1 for c in self.classes)

    def internal_pairs(self) -> list[tuple[int, int]]:
        """All internal pairs (m, n) with m < n, in lexicographic order."""
        pairs = []
        for cls in self.classes:
            idx = sorted(cls)
            for i, m in enumerate(idx):
                for n in idx[i + 1:]:
                    pairs.append((m, n))
        return sorted(pairs)


def classify_pairs(spectrum: EnergySpectrum, tol_degen: float | None = None) -> DegeneracyPartition:
    """Group basis indices whose energies agree within `tol_degen`.

    Clustering links sorted neighbours with gap <= tol_degen and then checks
    that the result is pairwise consistent: every in-class pair must be within
    the tolerance and every cross-class pair beyond it.  A tolerance that
    merges two genuinely distinct levels (chain of small gaps with a large
    total spread) is rejected, as is a tolerance within a factor two of the
    smallest true level gap.
    """
    if tol_degen is None:
        tol_degen = default_tol_degen(spectrum)
    if tol_degen < 0:
        raise ValueError("tol_degen must be nonnegative")

    e = spectrum.energies
    order = np.argsort(e, kind="stable")
    classes: list[list[int]] = [[int(order[0])]]
    for k in range(1, e.size):
        idx = int(order[k])
        prev = int(order[k - 1])
        if abs(e[idx] - e[prev]) <= tol_degen:
            classes[-1].append(idx)
        else:
            classes.append([idx])

    for cls in classes:
        vals = e[np.array(cls)]
        if vals.max() - vals.min() > tol_degen:
            raise ValueError(
                "tol_degen too coarse: a chain of near-degenerate levels spans "
                f"{vals.max() - vals.min():.3e} > tol {tol_degen:.3e}; clustering is "
                "not transitive-consistent"
            )

    if len(classes) > 1:
        means = np.array([e[np.array(c)].mean() for c in classes])
        min_gap = float(np.min(np.diff(np.sort(means))))
        if tol_degen >= 0.5 * min_gap:
            raise ValueError(
                f"tol_degen {tol_degen:.3e} is not smaller than half the minimal "
                f"level gap {min_gap:.3e}"
            )

    ordered = tuple(tuple(sorted(c)) for c in classes)
    return DegeneracyPartition(classes=ordered, tol_degen=float(tol_degen))


def _as_operator(op, dim: int) -> np.ndarray:
    arr = np.asarray(op, dtype=complex)
    if arr.shape != (dim, dim):
        raise ValueError(f"operator has shape {arr.shape}, expected {(dim, dim)}")
    return arr


def dissipator(jumps: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """Jump-operator part of the generator: sum_a L_a rho L_a^dag - 1/2 {L_a^dag L_a, rho}."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for L in jumps:
        L = _as_operator(L, rho.shape[0])
        K = L.conj().T @ L
        out += L @ rho @ L.conj().T - 0.5 * (K @ rho + rho @ K)
    return out


def fgkls_generator(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray], rho) -> np.ndarray:
    """Right-hand side of the FGKLS equation evaluated at `rho`.

    The output is Hermitian whenever `rho` is Hermitian and is always
    traceless.  `rho` may be any operator (stationarity is checked on
    candidate states, but no density-matrix validity is required here).
    """
    if isinstance(rho, DensityMatrix):
        rho = rho.matrix
    rho = _as_operator(rho, spectrum.dim)
    e = spectrum.energies
    out = -1j * (e[:, None] - e[None, :]) * rho
    out += dissipator([_as_operator(L, spectrum.dim) for L in jumps], rho)
    return out


def stationarity_residual(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray], rho) -> float:
    """Frobenius norm of the generator at `rho`; zero iff `rho` is a pointer."""
    return float(np.linalg.norm(fgkls_generator(spectrum, jumps, rho)))


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: vec(rho)[m + D*n] = rho[m, n]."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of `vec`."""
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError("vector length is not a perfect square")
    return v.reshape(d, d, order="F")


@dataclass(frozen=True)
class LiouvillianSuperoperator:
    """D^2 x D^2 matrix form of the FGKLS generator under column stacking.

    Acting with `matrix` on vec(rho) reproduces the direct generator
    entrywise; its null space is the exact steady-state set.
    """

    hilbert_dim: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        """Dimension of the vectorized space (D squared)."""
        return self.hilbert_dim ** 2

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho))


def vectorize_liouvillian(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray]) -> LiouvillianSuperoperator:
    """Assemble the superoperator matrix of the FGKLS generator.

    With column stacking, left multiplication by A maps to (I kron A) and
    right multiplication by A maps to (A^T kron I).
    """
    d = spectrum.dim
    ident = np.eye(d)
    h = spectrum.hamiltonian()
    mat = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
    for L in jumps:
        L = _as_operator(L, d)
        K = L.conj().T @ L
        mat += np.kron(L.conj(), L) - 0.5 * np.kron(ident, K) - 0.5 * np.kron(K.T, ident)
    return LiouvillianSuperoperator(hilbert_dim=d, matrix=mat)


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state: Hermitian, unit trace, positive within tolerance."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("density matrix must be square")
        tol = DEFAULT_TOLERANCES
        herm_err = float(np.max(np.abs(arr - arr.conj().T)))
        if herm_err > tol.herm:
            raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm_err:.3e}")
        trace_err = abs(arr.trace() - 1.0)
        if trace_err > tol.trace:
            raise ValueError(f"trace differs from 1 by {trace_err:.3e}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (arr + arr.conj().T)).min())
        if min_eig < -tol.psd:
            raise ValueError(f"not positive semidefinite: min eigenvalue {min_eig:.3e}")
        arr.flags.writeable = False
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Reproducible random state: normalize A A^dag for complex Gaussian A."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w = a @ a.conj().T
    return DensityMatrix(w / w.trace())


_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def matrix_to_bloch(rho) -> tuple[float, float, float]:
    """Components (r1, r2, r3) of rho = 1/2 I + r1 s1 + r2 s2 + r3 s3 (2x2 only).

    Works for any 2x2 matrix; for traceless input the returned triple are the
    Pauli components directly.
    """
    if isinstance(rho, DensityMatrix):
        rho = rho.matrix
    arr = np.asarray(rho, dtype=complex)
    if arr.shape != (2, 2):
        raise ValueError("Bloch decomposition requires a 2x2 matrix")
    r1 = float(arr[0, 1].real)
    r2 = float(-arr[0, 1].imag)
    r3 = float((arr[0, 0] - arr[1, 1]).real) / 2.0
    return (r1, r2, r3)


def bloch_to_matrix(r1: float, r2: float, r3: float) -> np.ndarray:
    """Inverse of `matrix_to_bloch`: 1/2 I + r . sigma."""
    return 0.5 * np.eye(2, dtype=complex) + r1 * _SIGMA1 + r2 * _SIGMA2 + r3 * _SIGMA3


def weak_coupling_ratio(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray]) -> float:
    """Diagnostic ratio max_a ||L_a||^2 / ||H|| in spectral norms.

    The perturbative regime expects this to be small; it is reported, never
    enforced.  Returns inf for a zero Hamiltonian with nonzero jumps.
    """
    h_norm = float(np.max(np.abs(spectrum.energies)))
    l_sq = 0.0
    for L in jumps:
        L = _as_operator(L, spectrum.dim)
        l_sq = max(l_sq, float(np.linalg.norm(L, 2)) ** 2)
    if h_norm == 0.0:
        return float("inf") if l_sq > 0 else 0.0
    return l_sq / h_norm
