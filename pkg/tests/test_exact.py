import numpy as np
import pytest

from fgkls import (
    DensityMatrix,
    EnergySpectrum,
    LiouvillianSuperoperator,
    bloch_to_matrix,
    matrix_to_bloch,
    random_density_matrix,
    run_pointer_scheme,
    stationarity_residual,
    vectorize_liouvillian,
)
from fgkls.exact import (
    StepSizeError,
    TwoLevelParams,
    default_step,
    fit_exponential_rate,
    hermitian_affine_distance,
    integrate_trajectory,
    point_to_affine_distance,
    steady_state_basis,
    two_level_bloch_exact,
    two_level_system,
    verify_identity_72,
)
from fgkls.models import OscillatorSpinConfig, SigmaPlus, SigmaXY, build_oscillator_spin, build_two_level

from helpers import random_nondegenerate_model


# --- null-space oracle -------------------------------------------------------

def test_kernel_two_level_unique_pointer():
    spectrum, jumps = build_two_level(1.0, 2.0, 1.0, 2.0)
    steady = steady_state_basis(vectorize_liouvillian(spectrum, jumps))
    assert steady.kernel_dim == 1
    assert steady.physical_directions == ()
    assert np.max(np.abs(steady.physical_member - np.diag([0.2, 0.8]))) < 1e-12


def test_kernel_sigma_plus_spans_spin_up_diagonal():
    cfg = OscillatorSpinConfig(n_levels=6, omega=1.0, delta=0.3, jump_variant=SigmaPlus(0.3))
    spectrum, jumps = build_oscillator_spin(cfg)
    superop = vectorize_liouvillian(spectrum, jumps)
    steady = steady_state_basis(superop)
    assert steady.kernel_dim == 6
    # projector comparison against the expected span {|m,0><m,0|}
    def embed(mat):
        return np.concatenate([mat.real.ravel(), mat.imag.ravel()])

    basis = np.array([embed(b) for b in steady.basis])
    expected = []
    for m in range(6):
        unit = np.zeros((12, 12), dtype=complex)
        unit[2 * m, 2 * m] = 1.0
        expected.append(embed(unit))
    expected = np.array(expected)
    p_have = basis.T @ basis
    p_want = expected.T @ expected
    assert np.max(np.abs(p_have - p_want)) < 1e-10
    # every basis element is annihilated by the superoperator
    for b in steady.basis:
        assert np.linalg.norm(superop.apply(b)) < 1e-10


def test_kernel_zero_jumps_all_diagonals():
    spectrum = EnergySpectrum(np.array([0.4, 1.1, 2.3]))
    steady = steady_state_basis(vectorize_liouvillian(spectrum, []))
    assert steady.kernel_dim == 3
    for b in steady.basis:
        off = b.copy()
        np.fill_diagonal(off, 0.0)
        assert np.max(np.abs(off)) < 1e-10
    assert abs(steady.physical_member.trace() - 1.0) < 1e-12
    assert len(steady.physical_directions) == 2


def test_kernel_empty_raises_on_invalid_superoperator():
    bogus = LiouvillianSuperoperator(hilbert_dim=2, matrix=np.eye(4, dtype=complex))
    with pytest.raises(RuntimeError, match="kernel"):
        steady_state_basis(bogus)


# --- time-domain oracle ---------------------------------------------------------

def test_trajectory_steady_state_is_fixed_point():
    spectrum, jumps = build_two_level(1.0, 2.0, 1.0, 2.0)
    steady = steady_state_basis(vectorize_liouvillian(spectrum, jumps))
    traj = integrate_trajectory(spectrum, jumps, DensityMatrix(steady.physical_member),
                                t_end=8.0, n_steps=2000)
    drift = max(np.max(np.abs(s.matrix - steady.physical_member)) for s in traj.states)
    assert drift < 1e-10


def test_trajectory_two_level_asymptotics():
    params = TwoLevelParams(eps0=0.7, eps3=1.0, a1=0.4, b1=0.1, a2=-0.2, b2=0.3)
    spectrum, jumps = two_level_system(params)
    rho0 = DensityMatrix(bloch_to_matrix(0.25, -0.15, 0.35))
    t_end = 14.0 / params.decay_sum
    traj = integrate_trajectory(spectrum, jumps, rho0, t_end=t_end,
                                n_steps=int(t_end / 0.01), record_every=10)
    r1, r2, r3 = matrix_to_bloch(traj.final_state)
    assert abs(r3 - params.asymmetry / params.decay_sum) < 1e-6
    assert abs(r1) < 1e-6 and abs(r2) < 1e-6


def test_trajectory_sigma_xy_population_equalization():
    cfg = OscillatorSpinConfig(n_levels=3, omega=1.0, delta=0.5, jump_variant=SigmaXY(0.5, 0.4))
    spectrum, jumps = build_oscillator_spin(cfg)
    rho0 = random_density_matrix(6, np.random.default_rng(8))
    traj = integrate_trajectory(spectrum, jumps, rho0, t_end=45.0, n_steps=6000,
                                record_every=50)
    final = traj.final_state.matrix
    for m in range(3):
        assert abs(final[2 * m, 2 * m] - final[2 * m + 1, 2 * m + 1]) < 1e-6


def _pinch_between_level_coherences(rho):
    """Keep only the per-oscillator-level 2x2 blocks of a flat-basis state.

    Both oscillator-spin jump variants act on the spin alone, so the
    spin-symmetric part of any between-level oscillator coherence is never
    damped: states carrying such coherences precess forever instead of
    relaxing.  Pinching onto the level blocks is a quantum channel, so the
    result is again a density matrix, and it lies in the fully relaxing
    (environment-monitored) component.
    """
    d = rho.shape[0]
    out = np.zeros_like(rho)
    for m in range(0, d, 2):
        out[m:m + 2, m:m + 2] = rho[m:m + 2, m:m + 2]
    return out


def test_trajectory_residual_decreases_late():
    cases = []
    # transverse decay matrix chosen normal (a1^2+b1^2 = a2^2+b2^2, cross term
    # zero) so the residual norm is a sum of pure exponentials
    params = TwoLevelParams(eps0=0.0, eps3=1.0, a1=0.4, b1=0.0, a2=0.0, b2=0.4)
    spectrum, jumps = two_level_system(params)
    rho0 = DensityMatrix(bloch_to_matrix(0.3, -0.2, 0.1))
    cases.append((spectrum, jumps, rho0, 30.0, 4000))

    cfg = OscillatorSpinConfig(n_levels=3, omega=1.0, delta=0.3, jump_variant=SigmaPlus(0.5))
    spectrum, jumps = build_oscillator_spin(cfg)
    raw = random_density_matrix(6, np.random.default_rng(19)).matrix
    rho0 = DensityMatrix(_pinch_between_level_coherences(raw))
    cases.append((spectrum, jumps, rho0, 40.0, 5000))

    for spectrum, jumps, rho0, t_end, n_steps in cases:
        traj = integrate_trajectory(spectrum, jumps, rho0, t_end=t_end, n_steps=n_steps,
                                    record_every=100)
        quarter = [k for k, t in enumerate(traj.times) if t >= 0.75 * traj.times[-1]]
        residuals = [stationarity_residual(spectrum, jumps, traj.states[k].matrix)
                     for k in quarter]
        for earlier, later in zip(residuals, residuals[1:]):
            assert later <= earlier * (1 + 1e-9) + 1e-13


def test_trajectory_trace_preserved_and_default_step():
    spectrum, jumps = build_two_level(1.0, 2.0, 0.5, 0.3)
    step = default_step(spectrum, jumps)
    assert step == pytest.approx(0.01 / 2.0)
    traj = integrate_trajectory(spectrum, jumps, DensityMatrix(0.5 * np.eye(2)), t_end=5.0)
    assert traj.step_size <= step
    drifts = [abs(s.matrix.trace() - 1.0) for s in traj.states]
    assert max(drifts) < 1e-8


def test_trajectory_step_too_large_reports_suggestion():
    spectrum = EnergySpectrum(np.array([0.0, 100.0]))
    jumps = [np.array([[0.0, 0.1], [0.0, 0.0]], dtype=complex)]
    rho0 = DensityMatrix(bloch_to_matrix(0.3, 0.2, 0.1))
    with pytest.raises(StepSizeError) as err:
        integrate_trajectory(spectrum, jumps, rho0, t_end=10.0, n_steps=3)
    assert err.value.suggested_step < 10.0 / 3
    assert "suggested step" in str(err.value)


def test_trajectory_endpoints_land_on_steady_slice():
    # every endpoint must sit near the exact steady-state set; the
    # oscillator-spin initial states are pinched into the relaxing component
    # (the spin-only jumps never damp spin-symmetric oscillator coherences)
    cases = []
    spectrum, jumps = build_two_level(1.0, 2.0, 0.6, 0.4)
    cases.append((spectrum, jumps, 60.0, 6000, False))
    cfg = OscillatorSpinConfig(n_levels=2, omega=1.0, delta=0.3, jump_variant=SigmaPlus(0.6))
    sp, jp = build_oscillator_spin(cfg)
    cases.append((sp, jp, 80.0, 6000, True))
    cfg = OscillatorSpinConfig(n_levels=2, omega=1.0, delta=0.5, jump_variant=SigmaXY(0.5, 0.4))
    sx, jx = build_oscillator_spin(cfg)
    cases.append((sx, jx, 45.0, 5000, True))

    rng = np.random.default_rng(123)
    for spectrum, jumps, t_end, n_steps, pinch in cases:
        steady = steady_state_basis(vectorize_liouvillian(spectrum, jumps))
        for _ in range(20):
            rho0 = random_density_matrix(spectrum.dim, rng)
            if pinch:
                rho0 = DensityMatrix(_pinch_between_level_coherences(rho0.matrix))
            traj = integrate_trajectory(spectrum, jumps, rho0, t_end=t_end,
                                        n_steps=n_steps, record_every=n_steps)
            dist = point_to_affine_distance(traj.final_state.matrix,
                                            steady.physical_member,
                                            list(steady.physical_directions))
            assert dist < 1e-6


# --- closed-form two-level solution ----------------------------------------------

def test_bloch_exact_limit_value():
    params = TwoLevelParams(eps0=0.0, eps3=1.0, a1=0.1, b1=0.0, a2=0.0, b2=0.1)
    out = two_level_bloch_exact(params, (0.2, -0.1, 0.0), 1e6)
    assert np.allclose(out, [0.0, 0.0, 0.5], atol=1e-12)
    # corresponding state is the pure upper level
    assert np.max(np.abs(bloch_to_matrix(*out) - np.diag([1.0, 0.0]))) < 1e-12


def test_bloch_exact_fixed_point_constant():
    params = TwoLevelParams(eps0=0.3, eps3=1.2, a1=0.4, b1=0.2, a2=0.1, b2=-0.3)
    r3inf = params.asymmetry / params.decay_sum
    for t in (0.0, 0.7, 3.0, 25.0):
        out = two_level_bloch_exact(params, (0.0, 0.0, r3inf), t)
        assert np.max(np.abs(out - np.array([0.0, 0.0, r3inf]))) < 1e-12


def test_bloch_exact_repeated_root_branch():
    # S^2 = 4 (w^2 + eps3^2) with w = 0: a1 = b1 = 1, eps3 = 1 gives a double root
    params = TwoLevelParams(eps0=0.0, eps3=1.0, a1=1.0, b1=1.0, a2=0.0, b2=0.0)
    assert params.decay_sum ** 2 == pytest.approx(4 * (params.asymmetry ** 2 + 1.0))
    spectrum, jumps = two_level_system(params)
    b0 = (0.3, -0.2, 0.1)
    traj = integrate_trajectory(spectrum, jumps, DensityMatrix(bloch_to_matrix(*b0)),
                                t_end=2.0, n_steps=4000, record_every=400)
    for t, state in zip(traj.times, traj.states):
        exact = two_level_bloch_exact(params, b0, t)
        assert np.max(np.abs(np.array(matrix_to_bloch(state)) - exact)) < 1e-9


def test_bloch_exact_matches_trajectory_randomized():
    rng = np.random.default_rng(77)
    for _ in range(100):
        coeffs = rng.uniform(-0.8, 0.8, 4)
        if np.sum(coeffs**2) < 0.05:
            coeffs = coeffs + 0.3
        params = TwoLevelParams(eps0=rng.standard_normal(), eps3=rng.uniform(0.5, 1.5),
                                a1=coeffs[0], b1=coeffs[1], a2=coeffs[2], b2=coeffs[3])
        spectrum, jumps = two_level_system(params)
        b0 = tuple(rng.uniform(-0.28, 0.28, 3))  # keep |r| < 1/2 so the state is physical
        traj = integrate_trajectory(spectrum, jumps, DensityMatrix(bloch_to_matrix(*b0)),
                                    t_end=4.0, n_steps=800, record_every=200)
        exact = two_level_bloch_exact(params, b0, traj.times)
        numeric = np.array([matrix_to_bloch(s) for s in traj.states]).T
        assert np.max(np.abs(exact - numeric)) < 1e-6


def test_bloch_exact_liouville_case_rotates():
    params = TwoLevelParams(eps0=0.0, eps3=1.0, a1=0.0, b1=0.0, a2=0.0, b2=0.0)
    out = two_level_bloch_exact(params, (0.3, 0.0, 0.2), np.array([0.0, np.pi / 2.0]))
    assert np.allclose(out[:, 0], [0.3, 0.0, 0.2], atol=1e-12)
    assert out[2, 1] == pytest.approx(0.2)  # population frozen without jumps
    assert np.hypot(out[0, 1], out[1, 1]) == pytest.approx(0.3, abs=1e-12)


def test_decay_rate_fit():
    params = TwoLevelParams(eps0=0.5, eps3=1.0, a1=0.5, b1=-0.2, a2=0.3, b2=0.4)
    spectrum, jumps = two_level_system(params)
    rho0 = DensityMatrix(bloch_to_matrix(0.1, 0.1, -0.3))
    t_end = 10.0 / params.decay_sum
    traj = integrate_trajectory(spectrum, jumps, rho0, t_end=t_end,
                                n_steps=int(t_end / 0.005), record_every=20)
    r3 = np.array([matrix_to_bloch(s)[2] for s in traj.states])
    rate = fit_exponential_rate(traj.times, r3, params.asymmetry / params.decay_sum,
                                window=(0.0, 0.4), floor=1e-9)
    assert abs(rate - 2 * params.decay_sum) / (2 * params.decay_sum) < 0.01


# --- parameterization identity ------------------------------------------------------

def test_identity_symmetric_jump():
    assert verify_identity_72(TwoLevelParams(0.0, 1.0, 1.0, 0.0, 0.0, 0.0)) < 1e-15


def test_identity_hand_evaluated_case():
    # a1 = b2 = 1: l12 = 2, l21 = 0, both sides equal 1
    params = TwoLevelParams(0.0, 1.0, 1.0, 0.0, 0.0, 1.0)
    from fgkls.models import pauli_to_offdiag

    l12, l21 = pauli_to_offdiag(1.0, 0.0, 0.0, 1.0)
    assert l12 == pytest.approx(2.0) and l21 == pytest.approx(0.0)
    assert verify_identity_72(params) < 1e-15


def test_identity_random_draws():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        a1, b1, a2, b2 = rng.standard_normal(4)
        worst = max(worst, verify_identity_72(TwoLevelParams(0.0, 1.0, a1, b1, a2, b2)))
    assert worst < 1e-12


def test_identity_zero_jump_rejected():
    with pytest.raises(ValueError):
        verify_identity_72(TwoLevelParams(0.0, 1.0, 0.0, 0.0, 0.0, 0.0))


def test_two_level_params_require_splitting():
    with pytest.raises(ValueError):
        TwoLevelParams(0.0, 0.0, 0.1, 0.0, 0.0, 0.0)


# --- family vs oracle distances -------------------------------------------------------

def test_affine_distance_member_matching():
    a = np.diag([0.5, 0.5]).astype(complex)
    direction = np.diag([1.0, -1.0]).astype(complex) / np.sqrt(2)
    b = a + 0.2 * direction
    # b lies in the family a + span(direction), so that side matches exactly,
    # but a is not in the singleton family {b}: the symmetric distance sees it
    assert point_to_affine_distance(b, a, [direction]) == pytest.approx(0.0, abs=1e-12)
    assert hermitian_affine_distance(a, [direction], b, []) == pytest.approx(0.2, abs=1e-12)
    assert hermitian_affine_distance(a, [], b, []) == pytest.approx(0.2, abs=1e-12)
    # identical affine sets match to zero
    assert hermitian_affine_distance(b, [direction], a, [direction]) == pytest.approx(0.0, abs=1e-12)


def test_three_way_agreement_random_model():
    rng = np.random.default_rng(55)
    spectrum, jumps = random_nondegenerate_model(rng, dim=3, coupling=0.1)
    family = run_pointer_scheme(spectrum, jumps, max_order=2)
    steady = steady_state_basis(vectorize_liouvillian(spectrum, jumps))
    rho0 = random_density_matrix(3, rng)
    # slow relaxation ~ coupling^2 demands a long horizon
    traj = integrate_trajectory(spectrum, jumps, rho0, t_end=1000.0, n_steps=50000,
                                record_every=50000)
    end = traj.final_state.matrix
    assert point_to_affine_distance(end, steady.physical_member,
                                    list(steady.physical_directions)) < 1e-6
    # perturbative member at full coupling agrees with the exact one to the
    # truncation error, which is small for this weakly coupled draw
    assert np.max(np.abs(family.evaluate(1.0) - steady.physical_member)) < 1e-4
