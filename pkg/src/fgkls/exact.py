"""Exact references the perturbative pointer construction is validated against.

Three independent routes are provided:

* the null space of the vectorized Liouvillian (every exact steady state, as
  an affine trace-1 slice of the kernel span);
* fixed-step Runge-Kutta integration of the FGKLS equation in the time
  domain, confirming that pointers are attractors;
* the closed-form solution of the dissipative two-level (Bloch vector)
  dynamics, including its exact asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    EnergySpectrum,
    LiouvillianSuperoperator,
    dissipator,
    unvec,
    vec,
)
from .models import build_two_level, pauli_to_offdiag

__all__ = [
    "SteadyStateSet",
    "Trajectory",
    "TwoLevelParams",
    "StepSizeError",
    "steady_state_basis",
    "integrate_trajectory",
    "default_step",
    "two_level_bloch_exact",
    "two_level_system",
    "verify_identity_72",
    "point_to_affine_distance",
    "hermitian_affine_distance",
    "fit_exponential_rate",
]


def _real_embed(mat: np.ndarray) -> np.ndarray:
    """Flatten a complex matrix to a real vector preserving the Frobenius norm."""
    return np.concatenate([mat.real.ravel(), mat.imag.ravel()])


def _embed_to_matrix(row: np.ndarray, dim: int) -> np.ndarray:
    re, im = row[: dim * dim], row[dim * dim:]
    return re.reshape(dim, dim) + 1j * im.reshape(dim, dim)


def _orthonormal_span(mats: Sequence[np.ndarray], rel_tol: float = 1e-12) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of the real span of the given matrices."""
    if not mats:
        return []
    dim = mats[0].shape[0]
    rows = np.array([_real_embed(m) for m in mats])
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    return [_embed_to_matrix(vt[i], dim) for i in range(s.size) if s[i] > rel_tol * s[0]]


@dataclass(frozen=True)
class SteadyStateSet:
    """Hermitian basis of the Liouvillian kernel plus its physical trace-1 slice."""

    basis: tuple[np.ndarray, ...]
    physical_member: np.ndarray
    physical_directions: tuple[np.ndarray, ...]
    singular_values: np.ndarray

    @property
    def kernel_dim(self) -> int:
        return len(self.basis)


def steady_state_basis(superop: LiouvillianSuperoperator,
                       tol_kernel: float | None = None) -> SteadyStateSet:
    """Exact steady states from the singular vectors of the superoperator.

    Kernel vectors are the right singular vectors whose singular value falls
    below tol_kernel times the largest one.  Since the generator preserves
    Hermiticity, the kernel admits a Hermitian basis: the (anti-)Hermitian
    symmetrizations of the raw vectors are re-orthonormalized and near-zero
    members discarded.  The physical slice is the trace-1 affine subset of the
    kernel span, described by one member and traceless directions.
    """
    if tol_kernel is None:
        tol_kernel = DEFAULT_TOLERANCES.kernel
    d = superop.hilbert_dim
    _, s, vh = np.linalg.svd(superop.matrix)
    smax = s[0]
    if smax == 0.0:
        kernel = [np.eye(d * d, dtype=complex)[:, k] for k in range(d * d)]
    else:
        kernel = [vh[i].conj() for i in range(s.size) if s[i] < tol_kernel * smax]
    if not kernel:
        raise RuntimeError("empty Liouvillian kernel: superoperator assembly is inconsistent")

    candidates = []
    for v in kernel:
        k = unvec(v)
        candidates.append(0.5 * (k + k.conj().T))
        candidates.append((k - k.conj().T) / 2j)
    # Symmetrizing an arbitrarily-phased kernel vector can leave a tiny spurious
    # component; keep only unit-norm elements that the superoperator annihilates.
    cutoff = tol_kernel * max(smax, 1.0)
    basis = [b for b in _orthonormal_span(candidates)
             if np.linalg.norm(superop.matrix @ vec(b)) <= cutoff]
    if not basis:
        raise RuntimeError("no Hermitian kernel element below the residual cutoff")

    traces = np.array([float(b.trace().real) for b in basis])
    if np.max(np.abs(traces)) < 1e-12:
        raise RuntimeError("steady-state set has no trace-1 member")
    member = sum((t / float(traces @ traces)) * b for t, b in zip(traces, basis))

    directions: list[np.ndarray] = []
    if len(basis) > 1:
        _, _, vt = np.linalg.svd(traces[None, :], full_matrices=True)
        for row in vt[1:]:
            directions.append(sum(c * b for c, b in zip(row, basis)))
    return SteadyStateSet(basis=tuple(basis), physical_member=member,
                          physical_directions=tuple(directions), singular_values=s)


class StepSizeError(RuntimeError):
    """Integration step too large: trace or positivity drifted beyond tolerance."""

    def __init__(self, message: str, suggested_step: float):
        super().__init__(message)
        self.suggested_step = suggested_step


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step integration record; every stored state is a valid density matrix."""

    times: np.ndarray
    states: tuple[DensityMatrix, ...]
    step_size: float

    @property
    def final_state(self) -> DensityMatrix:
        return self.states[-1]


def default_step(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray]) -> float:
    """Conservative step 0.01 / max(energy scale, dissipative scale)."""
    scale = float(np.max(np.abs(spectrum.energies)))
    if jumps:
        k = sum(np.asarray(L, complex).conj().T @ np.asarray(L, complex) for L in jumps)
        scale = max(scale, float(np.linalg.norm(k, 2)))
    return 0.01 / scale if scale > 0 else math.inf


def integrate_trajectory(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray], rho0,
                         t_end: float, n_steps: int | None = None,
                         record_every: int = 1) -> Trajectory:
    """Classical RK4 integration of the FGKLS equation from `rho0`.

    When `n_steps` is omitted it is derived from `default_step`.  States are
    recorded every `record_every` steps (the final state always included) and
    validated; intermediate steps are checked for trace drift only.  A drift
    beyond tolerance raises `StepSizeError` carrying a suggested step size.
    """
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(np.asarray(rho0, dtype=complex))
    if rho0.dim != spectrum.dim:
        raise ValueError("initial state dimension does not match the spectrum")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    h_default = default_step(spectrum, jumps)
    if n_steps is None:
        n_steps = max(1, int(math.ceil(t_end / h_default)))
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    h = t_end / n_steps

    e = spectrum.energies
    gap = -1j * (e[:, None] - e[None, :])
    jump_list = [np.asarray(L, dtype=complex) for L in jumps]
    k_total = sum((L.conj().T @ L for L in jump_list),
                  np.zeros((spectrum.dim, spectrum.dim), dtype=complex))

    def rhs(r: np.ndarray) -> np.ndarray:
        out = gap * r
        for L in jump_list:
            out += L @ r @ L.conj().T
        out -= 0.5 * (k_total @ r + r @ k_total)
        return out

    def too_large(detail: str) -> StepSizeError:
        return StepSizeError(
            f"step size {h:.3e} too large: {detail}; suggested step {h_default:.3e} "
            f"({max(1, int(math.ceil(t_end / h_default)))} steps for t_end {t_end:g})",
            suggested_step=h_default,
        )

    rho = rho0.matrix.copy()
    times = [0.0]
    states = [rho0]
    for step in range(1, n_steps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(rho.trace() - 1.0)
        if drift > 1e-8 or not np.all(np.isfinite(rho)):
            raise too_large(f"trace drift {drift:.3e} at t = {step * h:.4g}")
        if step % record_every == 0 or step == n_steps:
            try:
                state = DensityMatrix(rho)
            except ValueError as err:
                raise too_large(str(err)) from err
            times.append(step * h)
            states.append(state)
    return Trajectory(times=np.array(times), states=tuple(states), step_size=h)


@dataclass(frozen=True)
class TwoLevelParams:
    """Two-level model data: H = eps0 I + eps3 s3, L = (a1+i b1) s1 + (a2+i b2) s2.

    eps0 multiplies the identity and drops out of the dynamics; it is kept for
    completeness.  eps3 must not vanish (non-degenerate level pair).
    """

    eps0: float
    eps3: float
    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        if self.eps3 == 0.0:
            raise ValueError("eps3 must be nonzero (degenerate two-level system)")

    @property
    def decay_sum(self) -> float:
        """a1^2 + a2^2 + b1^2 + b2^2, the overall dissipative strength."""
        return self.a1 ** 2 + self.a2 ** 2 + self.b1 ** 2 + self.b2 ** 2

    @property
    def asymmetry(self) -> float:
        """a1 b2 - a2 b1, the source term of the population imbalance."""
        return self.a1 * self.b2 - self.a2 * self.b1


def two_level_system(params: TwoLevelParams) -> tuple[EnergySpectrum, list[np.ndarray]]:
    """Energy-basis form of the two-level model described by `params`."""
    l12, l21 = pauli_to_offdiag(params.a1, params.b1, params.a2, params.b2)
    return build_two_level(params.eps0 + params.eps3, params.eps0 - params.eps3, l12, l21)


def two_level_bloch_exact(params: TwoLevelParams, bloch0, t):
    """Closed-form Bloch vector (r1, r2, r3)(t) of the dissipative two-level model.

    r3 relaxes exponentially at rate 2*(a1^2+a2^2+b1^2+b2^2) towards
    (a1 b2 - a2 b1) / (a1^2+a2^2+b1^2+b2^2).  The transverse pair solves a
    second-order equation with characteristic roots

        lam = -S +/- sqrt(S^2 - 4 ((a1 b2 - a2 b1)^2 + eps3^2)),  S = decay_sum,

    handled in complex arithmetic; a vanishing discriminant selects the
    (c1 + c2 t) e^(lam t) branch.  Accepts scalar or 1-D `t`; returns shape
    (3,) or (3, len(t)).
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    tt = np.atleast_1d(t_arr)
    r10, r20, r30 = (float(c) for c in bloch0)
    s_sum = params.decay_sum
    w = params.asymmetry

    if s_sum > 0.0:
        r3inf = w / s_sum
        r3 = r3inf + (r30 - r3inf) * np.exp(-2.0 * s_sum * tt)
    else:
        r3 = np.full_like(tt, r30)

    c = params.a1 * params.a2 + params.b1 * params.b2
    m = 2.0 * np.array([
        [-(params.a2 ** 2 + params.b2 ** 2), -params.eps3 + c],
        [params.eps3 + c, -(params.a1 ** 2 + params.b1 ** 2)],
    ])
    x0 = np.array([r10, r20])
    v0 = m @ x0
    disc = s_sum ** 2 - 4.0 * (w ** 2 + params.eps3 ** 2)
    if abs(disc) < 1e-12 * s_sum ** 2:
        lam = -s_sum
        r12 = (x0[:, None] + np.outer(v0 - lam * x0, tt)) * np.exp(lam * tt)[None, :]
    else:
        root = np.sqrt(complex(disc))
        lam_p = -s_sum + root
        lam_m = -s_sum - root
        c_p = (v0 - lam_m * x0) / (lam_p - lam_m)
        c_m = x0 - c_p
        r12 = (c_p[:, None] * np.exp(lam_p * tt)[None, :]
               + c_m[:, None] * np.exp(lam_m * tt)[None, :]).real

    out = np.vstack([r12, r3[None, :]])
    return out[:, 0] if scalar else out


def verify_identity_72(params: TwoLevelParams) -> float:
    """Consistency residual between the off-diagonal and Pauli parameterizations.

    Both express the spin-up population of the asymptotic state; the residual

        | |l12|^2/(|l12|^2+|l21|^2) - 1/2 - (a1 b2 - a2 b1)/(a1^2+a2^2+b1^2+b2^2) |

    vanishes identically.
    """
    if params.decay_sum == 0.0:
        raise ValueError("zero jump operator: identity undefined")
    l12, l21 = pauli_to_offdiag(params.a1, params.b1, params.a2, params.b2)
    lhs = abs(l12) ** 2 / (abs(l12) ** 2 + abs(l21) ** 2)
    rhs = 0.5 + params.asymmetry / params.decay_sum
    return abs(lhs - rhs)


def point_to_affine_distance(point: np.ndarray, base: np.ndarray,
                             directions: Sequence[np.ndarray]) -> float:
    """Frobenius distance from `point` to the affine set base + span(directions)."""
    r = _real_embed(np.asarray(point, complex) - np.asarray(base, complex))
    ortho = _orthonormal_span(list(directions))
    for b in ortho:
        eb = _real_embed(b)
        r = r - (eb @ r) * eb
    return float(np.linalg.norm(r))


def hermitian_affine_distance(point_a: np.ndarray, dirs_a: Sequence[np.ndarray],
                              point_b: np.ndarray, dirs_b: Sequence[np.ndarray]) -> float:
    """Symmetric distance between two affine families after optimal member matching.

    Each family's representative is matched against the closest member of the
    other family; the larger of the two mismatches is returned, so the value
    is zero iff the representatives lie in each other's families.
    """
    return max(point_to_affine_distance(point_a, point_b, dirs_b),
               point_to_affine_distance(point_b, point_a, dirs_a))


def fit_exponential_rate(times: np.ndarray, values: np.ndarray, asymptote: float,
                         window: tuple[float, float] = (0.0, 0.5),
                         floor: float = 1e-12) -> float:
    """Least-squares decay rate of |values - asymptote| ~ exp(-rate t).

    Only samples inside the relative time `window` and above `floor` enter the
    fit, keeping late-time roundoff out.
    """
    times = np.asarray(times, dtype=float)
    resid = np.abs(np.asarray(values, dtype=float) - asymptote)
    t0 = times[0] + window[0] * (times[-1] - times[0])
    t1 = times[0] + window[1] * (times[-1] - times[0])
    mask = (times >= t0) & (times <= t1) & (resid > floor)
    if np.sum(mask) < 2:
        raise ValueError("not enough usable samples to fit a decay rate")
    slope, _ = np.polyfit(times[mask], np.log(resid[mask]), 1)
    return float(-slope)
