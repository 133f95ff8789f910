import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backaction_lab import backaction as ba
from backaction_lab import config
from backaction_lab.core import StateVector, pauli, unitary_from_generator
from backaction_lab.errors import AmplitudeVanishesError

from conftest import make_context


def test_amplitude_matches_dense_evolution(ctx3):
    for phi in (-2.0, 0.0, 0.3, 4.1):
        U = unitary_from_generator(ctx3.A, phi)
        direct = np.vdot(ctx3.f.amplitudes, U @ ctx3.psi.amplitudes)
        assert abs(ba.transition_amplitude(ctx3, phi) - direct) < 1e-13
        weighted = np.vdot(ctx3.f.amplitudes, ctx3.A.matrix @ U @ ctx3.psi.amplitudes)
        assert abs(ba.weak_value(ctx3, phi) - weighted / direct) < 1e-11


def test_weak_value_at_zero_for_eigen_post_selection():
    A = pauli("z") / 2
    ctx = ba.BackActionContext(A, StateVector.from_amplitudes([1, 1]), StateVector.basis(2, 0))
    assert ba.weak_value(ctx, 0.0) == pytest.approx(0.5)


def test_action_is_anchored_and_continuous(ctx3):
    grid = np.linspace(-10, 10, 401)
    curve = ba.action_and_probability(ctx3, grid)
    wrapped = np.angle(ctx3.amplitude(grid[0]))
    assert curve.S_values[0] == pytest.approx(ctx3.hbar * wrapped)
    # Same phase modulo 2 pi hbar, and no jumps.
    diff = np.angle(np.exp(1j * curve.S_values / ctx3.hbar)) - np.angle(ctx3.amplitude(grid))
    assert np.max(np.abs(np.angle(np.exp(1j * diff)))) < 1e-10
    assert np.max(np.abs(np.diff(curve.S_values))) < np.pi / 4 * 20
    assert np.allclose(curve.P_values, np.abs(ctx3.amplitude(grid)) ** 2)


def test_coarse_grid_refines_to_same_action(ctx3):
    fine = ba.action_and_probability(ctx3, np.linspace(0, 30, 3001)).S_values
    coarse = ba.action_and_probability(ctx3, np.linspace(0, 30, 7)).S_values
    assert np.max(np.abs(coarse - fine[::500])) < 1e-9


def test_action_slope_is_minus_re_weak_value(ctx3):
    for phi in (-1.3, 0.2, 2.7):
        assert ba.hj_residual(ctx3, phi) < 1e-8
        assert ba.action_slope(ctx3, phi) == pytest.approx(-ba.weak_value(ctx3, phi).real, abs=1e-8)


def test_curvature_matches_weak_value_derivative(ctx3):
    h = 1e-5
    phi = 0.4
    d = (ba.weak_value(ctx3, phi + h).real - ba.weak_value(ctx3, phi - h).real) / (2 * h)
    assert ba.action_curvature(ctx3, phi) == pytest.approx(-d, rel=1e-6, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), phi=st.floats(-3, 3), alpha=st.floats(0, 2 * np.pi))
def test_global_phase_invariance(seed, phi, alpha):
    ctx = make_context(seed)
    shifted = ba.BackActionContext(ctx.A, StateVector(np.exp(1j * alpha) * ctx.psi.amplitudes), ctx.f)
    if ba.probability(ctx, phi) < 1e-6:
        return
    assert ba.probability(shifted, phi) == pytest.approx(ba.probability(ctx, phi), abs=1e-12)
    assert abs(ba.weak_value(shifted, phi) - ba.weak_value(ctx, phi)) < 1e-8 * max(
        1, abs(ba.weak_value(ctx, phi)))


def test_hbar_rescaling():
    ctx1 = make_context(5, hbar=1.0)
    ctx2 = ba.BackActionContext(ctx1.A, ctx1.psi, ctx1.f, hbar=2.0)
    assert ba.transition_amplitude(ctx2, 1.4) == pytest.approx(ba.transition_amplitude(ctx1, 0.7))


def test_vanishing_amplitude_raises():
    A = pauli("z") / 2
    ctx = ba.BackActionContext(A, StateVector.from_amplitudes([1, 1]), StateVector.from_amplitudes([1, -1]))
    with pytest.raises(AmplitudeVanishesError) as info:
        ba.weak_value(ctx, 0.0)
    assert info.value.phi == 0.0
    with pytest.raises(AmplitudeVanishesError):
        ba.action_and_probability(ctx, np.linspace(-1, 1, 5))
    # Away from the node the weak value is defined.
    assert np.isfinite(ba.weak_value(ctx, 0.5))


def test_amp_tol_setting_is_respected():
    A = pauli("z") / 2
    ctx = ba.BackActionContext(A, StateVector.from_amplitudes([1, 1]), StateVector.from_amplitudes([1, -1]))
    with config.using(amp_tol=1e-2):
        with pytest.raises(AmplitudeVanishesError):
            ba.weak_value(ctx, 1e-3)


def test_grid_must_ascend(ctx3):
    with pytest.raises(ValueError):
        ba.action_and_probability(ctx3, np.array([0.0, -1.0]))


def test_vectorized_weak_values(ctx3):
    phis = np.linspace(-1, 1, 5)
    assert np.allclose(ba.weak_values(ctx3, phis), [ba.weak_value(ctx3, p) for p in phis])


def test_eigenstate_action_is_linear():
    A = make_context(17, dim=4).A
    psi = StateVector(A.decomposition.eigenvectors[:, 2])
    f = make_context(18, dim=4).f
    ctx = ba.BackActionContext(A, psi, f)
    for phi in (-2.0, 0.0, 1.1):
        assert ba.hj_residual(ctx, phi) < 1e-10
        assert abs(ba.action_curvature(ctx, phi)) < 1e-8
        assert ba.weak_value(ctx, phi).real == pytest.approx(A.decomposition.eigenvalues[2])


def test_spin_up_post_selection_has_zero_curvature():
    ctx = ba.BackActionContext(pauli("z") / 2, StateVector.from_amplitudes([1, 1]), StateVector.basis(2, 0))
    assert abs(ba.action_curvature(ctx, 0.7)) < 1e-8


def test_random_dim5_residual():
    ctx = make_context(99, dim=5)
    assert ba.hj_residual(ctx, 0.3, 1e-4) < 1e-6


def test_step_halving_quarters_plain_residual(ctx3):
    r1 = ba.hj_residual(ctx3, 0.3, 0.02, richardson=False)
    r2 = ba.hj_residual(ctx3, 0.3, 0.01, richardson=False)
    assert np.log2(r1 / r2) == pytest.approx(2.0, abs=0.1)
