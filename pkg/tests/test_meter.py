import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backaction_lab import meter as mt
from backaction_lab.backaction import BackActionContext
from backaction_lab.core import Observable, StateVector, pauli, random_hermitian, random_state
from backaction_lab.errors import AliasingDetectedError, DimensionOverflowError, GridTooNarrowError

from conftest import make_context

SPIN = Observable(pauli("z") / 2)


def test_meter_grid_conventions():
    meter = mt.MeterModel(4, 0.5, g=2.0)
    assert np.allclose(meter.B_values, [-0.75, -0.25, 0.25, 0.75])
    assert np.allclose(meter.phi_values, 2 * meter.B_values)
    assert meter.delta_A == pytest.approx(2 * np.pi / (4 * 2.0 * 0.5))
    assert meter.nyquist_halfwidth == pytest.approx(np.pi / (2.0 * 0.5))
    basis = mt.fourier_readout_basis(meter)
    # A_m = delta_A (m - (N-1)/2): symmetric, and zero only for odd N.
    assert np.allclose(basis.A_values, -basis.A_values[::-1])
    assert 0.0 not in basis.A_values
    assert 0.0 in mt.fourier_readout_basis(mt.MeterModel(5, 0.5)).A_values


def test_meter_rejects_bad_parameters():
    with pytest.raises(ValueError):
        mt.MeterModel(1, 0.1)
    with pytest.raises(ValueError):
        mt.MeterModel(8, 0.0)
    with pytest.raises(ValueError):
        mt.MeterModel(8, 0.1, g=0.0).delta_A


@pytest.mark.parametrize("N", [2, 7, 16, 33])
def test_fourier_basis_is_unitary(N):
    basis = mt.fourier_readout_basis(mt.MeterModel(N, 0.37, g=1.3))
    assert np.allclose(basis.matrix @ basis.matrix.conj().T, np.eye(N), atol=1e-12)


def test_parseval_for_readout():
    meter = mt.MeterModel(31, 0.2)
    chi = random_state(31, 4).amplitudes
    amps = mt.fourier_readout_basis(meter).amplitudes(chi)
    assert np.sum(np.abs(amps) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_joint_unitary_two_routes(seed):
    rng = np.random.default_rng(seed)
    A = random_hermitian(int(rng.integers(2, 6)), seed)
    meter = mt.MeterModel(int(rng.integers(2, 20)), rng.uniform(0.05, 1.0), g=rng.uniform(-2, 2))
    U1 = mt.interaction_unitary(A, meter)
    U2 = mt.assemble_backaction(mt.backaction_decomposition(A, meter))
    assert np.linalg.norm(U1 - U2, 2) < 1e-10


def test_interaction_unitary_respects_dimension_cap():
    from backaction_lab import config
    with config.using(joint_dim_cap=10):
        with pytest.raises(DimensionOverflowError):
            mt.interaction_unitary(SPIN, mt.MeterModel(6, 0.1))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), N=st.integers(2, 24), m=st.integers(0, 23))
def test_factorized_joint_amplitude_matches_oracle(seed, N, m):
    ctx = make_context(seed, dim=3)
    meter = mt.MeterModel(N, 0.3, g=0.8)
    phi_M = random_state(N, seed + 1)
    m = m % N
    assert abs(mt.joint_amplitude(ctx, meter, phi_M, m)
               - mt.joint_amplitude_oracle(ctx, meter, phi_M, m)) < 1e-10


def test_gaussian_state_edge_check():
    meter = mt.MeterModel(21, 0.1)
    with pytest.raises(GridTooNarrowError):
        mt.gaussian_meter_state(meter, 1.0)
    # A near-flat profile passes once the edge check is relaxed.
    flat = mt.gaussian_meter_state(meter, 1e3, edge_tol=1.0)
    assert np.allclose(np.abs(flat.amplitudes), 1 / np.sqrt(21), rtol=1e-5)
    narrow = mt.gaussian_meter_state(meter, 0.1)
    mean, spread = mt.meter_spread(meter, narrow)
    assert mean == pytest.approx(0.0, abs=1e-14)
    assert spread == pytest.approx(0.1, rel=1e-6)


@pytest.mark.parametrize("sigma_phi", [0.3, 2.0, 10.0])
def test_designed_meter_has_requested_spread(sigma_phi):
    meter, phi_M = mt.design_gaussian_meter(sigma_phi, 0.5, g=2.0)
    _, sigma_B = mt.meter_spread(meter, phi_M)
    assert meter.g * sigma_B == pytest.approx(sigma_phi, rel=1e-8)
    assert meter.N % 2 == 1
    mt.check_aliasing(SPIN.eigenvalues, meter)


def test_aliasing_detected():
    meter = mt.MeterModel(16, 10.0)
    with pytest.raises(AliasingDetectedError):
        mt.check_aliasing(SPIN.eigenvalues, meter)
    # The window is half-open: +W is representable, -W is not.
    W = meter.nyquist_halfwidth
    mt.check_aliasing([W], meter)
    with pytest.raises(AliasingDetectedError):
        mt.check_aliasing([-W], meter)


def test_conditional_state_norm_is_post_selection_probability():
    ctx = make_context(8, dim=4)
    meter, phi_M = mt.design_gaussian_meter(0.7, 3.0)
    chi = mt.conditional_meter_state(ctx, meter, phi_M)
    dist = mt.readout_distribution(ctx, meter, phi_M)
    assert chi.norm**2 == pytest.approx(dist.total_mass, rel=1e-12)
    expected = np.sum(np.abs(phi_M.amplitudes) ** 2 * np.abs(ctx.amplitude(meter.phi_values)) ** 2)
    assert dist.total_mass == pytest.approx(expected, rel=1e-12)


def test_post_selected_distributions_sum_to_unconditional():
    A = random_hermitian(3, 2)
    psi = random_state(3, 3)
    meter, phi_M = mt.design_gaussian_meter(1.0, 4.0)
    uncond = mt.readout_distribution((A, psi), meter, phi_M)
    basis = random_hermitian(3, 4).decomposition.eigenvectors
    total = sum(mt.readout_distribution(BackActionContext(A, psi, basis[:, k]), meter, phi_M).probabilities
                for k in range(3))
    assert np.allclose(total, uncond.probabilities, atol=1e-13)
    rotated = mt.readout_distribution((A, psi), meter, phi_M, f_basis=basis)
    assert np.allclose(rotated.probabilities, uncond.probabilities, atol=1e-13)
    assert uncond.total_mass == pytest.approx(1.0, abs=1e-12)


def test_polar_form_of_conditional_operator():
    ctx = make_context(21, dim=3)
    meter = mt.MeterModel(41, 0.25)
    mags, phase = mt.conditional_meter_polar(ctx, meter)
    entries = mt.conditional_meter_operator(ctx, meter)
    assert np.allclose(mags * np.exp(1j * phase), entries, atol=1e-13)
    # Reversed coupling traverses the same grid backwards.
    flipped = mt.MeterModel(41, 0.25, g=-1.0)
    mags2, _ = mt.conditional_meter_polar(ctx, flipped)
    assert np.allclose(mags2, mags[::-1])


def test_peak_masses_and_concentration():
    dist = mt.ReadoutDistribution(np.array([-1.0, -0.4, 0.1, 0.6]), np.array([0.1, 0.2, 0.3, 0.4]), False)
    assert np.allclose(mt.peak_masses(dist, [-0.5, 0.5]), [0.3, 0.7])
    assert mt.concentration(dist, 0.5, 0.15) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        mt.ReadoutDistribution(np.zeros(2), np.array([0.7, 0.7]), False)


def test_unconditional_peaks_reproduce_born_rule():
    psi = StateVector(np.array([np.sqrt(0.3), np.sqrt(0.7)]))
    rows = mt.born_rule_study(SPIN, psi, [2.0, 20.0])
    assert rows[-1]["tv_error"] < 1e-12
    assert np.allclose(rows[-1]["masses"], [0.7, 0.3], atol=1e-12)  # ascending: down first
    assert rows[0]["tv_error"] > rows[-1]["tv_error"]


def test_readout_operator_approaches_projector():
    meters = [mt.design_gaussian_meter(w, 0.5) for w in (2.0, 10.0)]
    report = mt.projector_emergence_check(SPIN, meters)
    assert report.monotone
    assert report.distances[-1] < 1e-10


def test_is_nonincreasing_floor():
    assert mt.is_nonincreasing([1.0, 0.5, 0.5 + 1e-13])
    assert not mt.is_nonincreasing([1.0, 0.5, 0.6])
