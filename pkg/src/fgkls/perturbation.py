"""Order-by-order construction of pointer states of the FGKLS equation.

Writing the jump operators with a formal bookkeeping scale lam (L -> lam*L),
stationary density matrices admit an expansion in even powers,

    f_mn = f_mn^(0) + lam^2 f_mn^(1) + lam^4 f_mn^(2) + ...,

because the jump terms of the generator are quadratic in lam.  Splitting the
stationarity condition by matrix element gives two kinds of constraints at
each order s:

* entries whose energies differ ("external" pairs) follow in closed form from
  the complete previous order,

      f_mn^(s) = -i [Diss(f^(s-1))]_mn / (eps_m - eps_n),

  where Diss is the dissipator built from the unscaled jumps;
* diagonal entries, together with off-diagonal entries inside a degenerate
  energy class ("internal" pairs), satisfy a linear system of the same order,

      [Diss(f^(s))]_mm = 0  for every m,
      [Diss(f^(s))]_mn = 0  for every internal pair m != n,

  whose right-hand side collects the known external entries of order s.

The linear systems are real: diagonal unknowns are real by Hermiticity and
each internal pair contributes a real and an imaginary part.  Solvability is
decided per order by the Kronecker-Capelli rank comparison; the leftover null
space is the pointer family's freedom, reduced by one parameter per order by
the trace condition (trace 1 at order zero, traceless corrections above).

Coefficients are stored lam-independent; lam enters only when a family member
is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_TOLERANCES,
    DegeneracyPartition,
    EnergySpectrum,
    classify_pairs,
    default_tol_degen,
    dissipator,
)

__all__ = [
    "Unknown",
    "OrderCoefficients",
    "LinearSystem",
    "RankReport",
    "AffineSolution",
    "NoSolution",
    "SchemeFailure",
    "PointerFamily",
    "offdiag_next_nondeg",
    "offdiag_next_deg",
    "assemble_diagonal_system_nondeg",
    "assemble_internal_system_deg",
    "solve_with_rank_check",
    "apply_trace_condition",
    "run_pointer_scheme",
]

# Unknown / row labels: ("diag", m), ("re", m, n) or ("im", m, n) with m < n.
Unknown = tuple


def _basis_matrix(dim: int, label: Unknown) -> np.ndarray:
    """Hermitian basis matrix of one real unknown."""
    out = np.zeros((dim, dim), dtype=complex)
    if label[0] == "diag":
        out[label[1], label[1]] = 1.0
    elif label[0] == "re":
        _, m, n = label
        out[m, n] = 1.0
        out[n, m] = 1.0
    elif label[0] == "im":
        _, m, n = label
        out[m, n] = 1.0j
        out[n, m] = -1.0j
    else:
        raise ValueError(f"unknown label kind {label!r}")
    return out


def _extract(mat: np.ndarray, label: Unknown) -> float:
    if label[0] == "diag":
        return float(mat[label[1], label[1]].real)
    if label[0] == "re":
        return float(mat[label[1], label[2]].real)
    return float(mat[label[1], label[2]].imag)


def _matrix_from_unknowns(dim: int, unknowns: Sequence[Unknown], values: np.ndarray) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    for label, v in zip(unknowns, values):
        if label[0] == "diag":
            out[label[1], label[1]] += v
        elif label[0] == "re":
            _, m, n = label
            out[m, n] += v
            out[n, m] += v
        else:
            _, m, n = label
            out[m, n] += 1j * v
            out[n, m] += -1j * v
    return out


@dataclass(frozen=True)
class OrderCoefficients:
    """Coefficient matrix of lam^(2s): Hermitian, trace 1 at s = 0, traceless above."""

    order: int
    coeff: np.ndarray

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        arr = np.array(self.coeff, dtype=complex)
        tol = DEFAULT_TOLERANCES
        herm_err = float(np.max(np.abs(arr - arr.conj().T)))
        if herm_err > tol.herm:
            raise ValueError(f"order {self.order} coefficients not Hermitian ({herm_err:.3e})")
        target = 1.0 if self.order == 0 else 0.0
        trace_err = abs(arr.trace() - target)
        if trace_err > tol.trace:
            raise ValueError(
                f"order {self.order} trace differs from {target} by {trace_err:.3e}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "coeff", arr)


@dataclass(frozen=True)
class LinearSystem:
    """Real linear system over labelled unknowns, with labelled rows."""

    matrix: np.ndarray
    rhs: np.ndarray
    unknowns: tuple[Unknown, ...]
    row_labels: tuple[Unknown, ...]


@dataclass(frozen=True)
class RankReport:
    rank: int
    rank_augmented: int
    singular_values: np.ndarray


@dataclass(frozen=True)
class AffineSolution:
    """Particular solution of minimum norm plus an orthonormal null-space basis."""

    particular: np.ndarray
    nullspace_basis: tuple[np.ndarray, ...]
    rank_report: RankReport


@dataclass(frozen=True)
class NoSolution:
    """Kronecker-Capelli failure (or unsatisfiable trace condition): the scheme stops."""

    rank_report: RankReport | None
    reason: str


@dataclass(frozen=True)
class SchemeFailure:
    """Reported when the per-order construction stops before max_order."""

    order: int
    reason: str
    rank_report: RankReport | None


def _offdiag_gaps(spectrum: EnergySpectrum) -> np.ndarray:
    e = spectrum.energies
    return e[:, None] - e[None, :]


def _closed_form(jumps, spectrum, prev, mask) -> np.ndarray:
    """-i Diss(prev)_mn / (eps_m - eps_n) on the masked entries, zero elsewhere."""
    prev = np.asarray(prev, dtype=complex)
    diss = dissipator(jumps, prev)
    gaps = _offdiag_gaps(spectrum)
    out = np.zeros_like(diss)
    out[mask] = -1j * diss[mask] / gaps[mask]
    return out


def offdiag_next_nondeg(jumps: Sequence[np.ndarray], spectrum: EnergySpectrum, prev,
                        tol_gap: float | None = None) -> np.ndarray:
    """All off-diagonal entries of order s from the complete order s-1 matrix.

    `prev` is the full coefficient matrix of the previous order (the zero
    matrix for s = 0).  Raises if any off-diagonal energy gap vanishes within
    `tol_gap`; such pairs belong to the degenerate branch.
    """
    if tol_gap is None:
        tol_gap = default_tol_degen(spectrum)
    gaps = _offdiag_gaps(spectrum)
    mask = ~np.eye(spectrum.dim, dtype=bool)
    if np.any(np.abs(gaps[mask]) <= tol_gap):
        raise ValueError(
            "vanishing energy gap: spectrum has internal pairs, use the degenerate branch"
        )
    return _closed_form(jumps, spectrum, prev, mask)


def offdiag_next_deg(jumps: Sequence[np.ndarray], spectrum: EnergySpectrum,
                     partition: DegeneracyPartition, prev) -> np.ndarray:
    """External off-diagonal entries of order s; internal entries are left zero."""
    d = spectrum.dim
    if partition.dim != d:
        raise ValueError("partition does not match spectrum dimension")
    mask = np.zeros((d, d), dtype=bool)
    for m in range(d):
        for n in range(d):
            if m != n and not partition.is_internal(m, n):
                mask[m, n] = True
    gaps = _offdiag_gaps(spectrum)
    if np.any(np.abs(gaps[mask]) <= partition.tol_degen):
        raise ValueError("internal pair routed to the external closed form")
    return _closed_form(jumps, spectrum, prev, mask)


def _assemble(jumps, dim, unknowns, row_labels, known) -> LinearSystem:
    known = np.asarray(known, dtype=complex)
    matrix = np.empty((len(row_labels), len(unknowns)))
    for j, u in enumerate(unknowns):
        image = dissipator(jumps, _basis_matrix(dim, u))
        matrix[:, j] = [_extract(image, r) for r in row_labels]
    image = dissipator(jumps, known)
    rhs = -np.array([_extract(image, r) for r in row_labels])
    return LinearSystem(matrix=matrix, rhs=rhs, unknowns=tuple(unknowns),
                        row_labels=tuple(row_labels))


def assemble_diagonal_system_nondeg(jumps: Sequence[np.ndarray], offdiag: np.ndarray) -> LinearSystem:
    """Linear system for the diagonal entries, given same-order off-diagonals.

    Rows are the diagonal stationarity conditions [Diss(f)]_mm = 0; the
    unknown coefficients form the rate matrix whose columns each sum to zero
    (summing all equations gives the identity 0 = 0), so one singular value is
    structurally zero.
    """
    offdiag = np.asarray(offdiag, dtype=complex)
    dim = offdiag.shape[0]
    known = offdiag.copy()
    np.fill_diagonal(known, 0.0)
    labels = [("diag", m) for m in range(dim)]
    return _assemble(jumps, dim, labels, labels, known)


def assemble_internal_system_deg(jumps: Sequence[np.ndarray], partition: DegeneracyPartition,
                                 external: np.ndarray) -> LinearSystem:
    """Stacked system for diagonal and internal-pair entries of one order.

    Unknowns are ordered diagonal-first (ascending index), then internal pairs
    (m, n) with m < n in lexicographic order, each contributing a real and an
    imaginary part.  Rows stack the diagonal conditions and, per internal
    pair, the real and imaginary parts of [Diss(f)]_mn = 0.  The right-hand
    side is assembled from the known external entries.
    """
    external = np.asarray(external, dtype=complex)
    dim = external.shape[0]
    if partition.dim != dim:
        raise ValueError("partition does not match operator dimension")
    pairs = partition.internal_pairs()
    known = external.copy()
    np.fill_diagonal(known, 0.0)
    for m, n in pairs:
        known[m, n] = 0.0
        known[n, m] = 0.0
    unknowns: list[Unknown] = [("diag", m) for m in range(dim)]
    for m, n in pairs:
        unknowns.append(("re", m, n))
        unknowns.append(("im", m, n))
    rows: list[Unknown] = [("diag", m) for m in range(dim)]
    for m, n in pairs:
        rows.append(("re", m, n))
        rows.append(("im", m, n))
    return _assemble(jumps, dim, unknowns, rows, known)


def solve_with_rank_check(system: LinearSystem, tol_rank: float | None = None):
    """Solve a (possibly singular) real system, reporting ranks.

    Rank is the number of singular values above tol_rank times the largest
    one, for the system matrix and for the augmented matrix.  Unequal ranks
    mean the system is inconsistent and `NoSolution` is returned.  Otherwise
    the minimum-norm particular solution and an orthonormal null-space basis
    are produced.
    """
    if tol_rank is None:
        tol_rank = DEFAULT_TOLERANCES.rank
    a = np.asarray(system.matrix, dtype=float)
    b = np.asarray(system.rhs, dtype=float)
    n = a.shape[1]
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol_rank * smax)) if smax > 0 else 0

    aug = np.concatenate([a, b[:, None]], axis=1)
    s_aug = np.linalg.svd(aug, compute_uv=False)
    smax_aug = s_aug[0] if s_aug.size else 0.0
    rank_aug = int(np.sum(s_aug > tol_rank * smax_aug)) if smax_aug > 0 else 0

    report = RankReport(rank=rank, rank_augmented=rank_aug, singular_values=s)
    if rank_aug > rank:
        return NoSolution(rank_report=report, reason="rank(matrix) < rank(augmented)")

    if rank > 0:
        particular = vt[:rank].T @ ((u[:, :rank].T @ b) / s[:rank])
    else:
        particular = np.zeros(n)
    basis = tuple(vt[i] for i in range(rank, n))
    return AffineSolution(particular=particular, nullspace_basis=basis, rank_report=report)


def apply_trace_condition(sol: AffineSolution, order: int, unknowns: Sequence[Unknown],
                          tol_trace: float | None = None):
    """Impose the per-order trace target, eliminating one free parameter.

    The target is 1 at order zero and 0 above.  The free direction with the
    largest diagonal-sum component absorbs the constraint; the remaining
    directions are re-orthonormalized with zero diagonal sum.  If no direction
    can move the trace and the particular solution misses the target, the
    scheme has failed.
    """
    if tol_trace is None:
        tol_trace = DEFAULT_TOLERANCES.trace
    t = np.array([1.0 if u[0] == "diag" else 0.0 for u in unknowns])
    target = 1.0 if order == 0 else 0.0
    components = np.array([float(t @ v) for v in sol.nullspace_basis])
    current = float(t @ sol.particular)

    dir_tol = 1e-12 * max(1.0, float(np.linalg.norm(t)))
    if components.size == 0 or np.max(np.abs(components)) <= dir_tol:
        if abs(current - target) <= tol_trace:
            return sol
        return NoSolution(
            rank_report=sol.rank_report,
            reason=f"trace condition unsatisfiable at order {order}: "
                   f"trace {current:.3e}, target {target}",
        )

    j = int(np.argmax(np.abs(components)))
    pivot = sol.nullspace_basis[j]
    particular = sol.particular + ((target - current) / components[j]) * pivot
    remaining = [
        v - (components[i] / components[j]) * pivot
        for i, v in enumerate(sol.nullspace_basis)
        if i != j
    ]
    if remaining:
        q, r = np.linalg.qr(np.column_stack(remaining))
        keep = np.abs(np.diag(r)) > 1e-12
        basis = tuple(q[:, k] for k in range(q.shape[1]) if keep[k])
    else:
        basis = ()
    return AffineSolution(particular=particular, nullspace_basis=basis,
                          rank_report=sol.rank_report)


@dataclass(frozen=True)
class PointerFamily:
    """Affine family of stationary states produced by the per-order scheme.

    `orders[s].coeff` is the lam-independent coefficient of lam^(2s) for the
    particular member; `free_directions[s]` are Hermitian traceless matrices
    spanning the residual freedom left at order s after the trace condition.
    """

    spectrum: EnergySpectrum
    partition: DegeneracyPartition
    orders: tuple[OrderCoefficients, ...]
    free_directions: tuple[tuple[np.ndarray, ...], ...]
    rank_reports: tuple[RankReport, ...]
    branch: str
    lambda_scale: float = 1.0

    @property
    def max_order(self) -> int:
        return len(self.orders) - 1

    def free_direction_count(self, order: int) -> int:
        return len(self.free_directions[order])

    def evaluate(self, lam: float | None = None, max_order: int | None = None,
                 direction_coefficients=None) -> np.ndarray:
        """Member sum_s lam^(2s) (f^(s) + sum_i c_si V_si) truncated at max_order.

        `direction_coefficients`, when given, maps order -> sequence of real
        coefficients for that order's free directions; omitted orders use the
        particular member.
        """
        if lam is None:
            lam = self.lambda_scale
        if max_order is None:
            max_order = self.max_order
        if not 0 <= max_order <= self.max_order:
            raise ValueError(f"max_order must be in [0, {self.max_order}]")
        out = np.zeros_like(self.orders[0].coeff)
        for s in range(max_order + 1):
            term = self.orders[s].coeff.copy()
            if direction_coefficients and s in direction_coefficients:
                coeffs = direction_coefficients[s]
                dirs = self.free_directions[s]
                if len(coeffs) != len(dirs):
                    raise ValueError(f"expected {len(dirs)} coefficients at order {s}")
                for c, v in zip(coeffs, dirs):
                    term = term + c * v
            out = out + (lam ** (2 * s)) * term
        return out

    def affine_directions(self, max_order: int | None = None) -> list[np.ndarray]:
        """Orthonormal Hermitian basis of the union of all free directions."""
        if max_order is None:
            max_order = self.max_order
        mats = [v for s in range(max_order + 1) for v in self.free_directions[s]]
        if not mats:
            return []
        rows = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])
        _, s, vt = np.linalg.svd(rows, full_matrices=False)
        keep = s > 1e-12 * s[0]
        d = self.spectrum.dim
        out = []
        for row in vt[keep]:
            re, im = row[: d * d].reshape(d, d), row[d * d:].reshape(d, d)
            out.append(re + 1j * im)
        return out


def run_pointer_scheme(spectrum: EnergySpectrum, jumps: Sequence[np.ndarray],
                       partition: DegeneracyPartition | None = None,
                       max_order: int = 3, tol_rank: float | None = None,
                       branch: str | None = None):
    """Alternate the closed form and the linear solve up to `max_order`.

    The branch is picked from the partition (any non-singleton class selects
    the degenerate variant) unless forced via `branch`.  Each order first
    fills the off-diagonal (external) entries from the previous order, then
    solves the same-order system for the remaining entries, checks
    solvability, and applies the trace condition.  Returns a `PointerFamily`,
    or a `SchemeFailure` naming the order at which the construction stopped.
    """
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    if partition is None:
        partition = classify_pairs(spectrum)
    if partition.dim != spectrum.dim:
        raise ValueError("partition does not match spectrum dimension")
    if branch is None:
        branch = "degenerate" if partition.has_degeneracy else "non-degenerate"
    if branch not in ("degenerate", "non-degenerate"):
        raise ValueError(f"unknown branch {branch!r}")
    if branch == "non-degenerate" and partition.has_degeneracy:
        raise ValueError("non-degenerate branch requested for a degenerate spectrum")

    dim = spectrum.dim
    jumps = [np.asarray(L, dtype=complex) for L in jumps]
    orders: list[OrderCoefficients] = []
    directions: list[tuple[np.ndarray, ...]] = []
    reports: list[RankReport] = []
    prev = np.zeros((dim, dim), dtype=complex)

    for s in range(max_order + 1):
        if branch == "degenerate":
            offdiag = offdiag_next_deg(jumps, spectrum, partition, prev)
            system = assemble_internal_system_deg(jumps, partition, offdiag)
        else:
            offdiag = offdiag_next_nondeg(jumps, spectrum, prev,
                                          tol_gap=partition.tol_degen)
            system = assemble_diagonal_system_nondeg(jumps, offdiag)

        sol = solve_with_rank_check(system, tol_rank=tol_rank)
        if isinstance(sol, NoSolution):
            return SchemeFailure(order=s, reason=sol.reason, rank_report=sol.rank_report)
        sol = apply_trace_condition(sol, s, system.unknowns)
        if isinstance(sol, NoSolution):
            return SchemeFailure(order=s, reason=sol.reason, rank_report=sol.rank_report)

        coeff = offdiag + _matrix_from_unknowns(dim, system.unknowns, sol.particular)
        orders.append(OrderCoefficients(order=s, coeff=coeff))
        mats = []
        for v in sol.nullspace_basis:
            mat = _matrix_from_unknowns(dim, system.unknowns, v)
            mats.append(mat / np.linalg.norm(mat))
        directions.append(tuple(mats))
        reports.append(sol.rank_report)
        prev = coeff

    return PointerFamily(spectrum=spectrum, partition=partition, orders=tuple(orders),
                         free_directions=tuple(directions), rank_reports=tuple(reports),
                         branch=branch)
