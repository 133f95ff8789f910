import numpy as np
import pytest

from backaction_lab import backaction as ba
from backaction_lab import meter as mt
from backaction_lab import uncertainty as un
from backaction_lab.errors import EmptyDistributionError, NonPositiveUncertaintyError
from backaction_lab.scenarios import SternGerlachScenario

from conftest import make_context


def test_resolution_bound():
    assert un.resolution_bound(0.25) == pytest.approx(2.0)
    assert un.resolution_bound(0.25, hbar=3.0) == pytest.approx(6.0)
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(NonPositiveUncertaintyError):
            un.resolution_bound(bad)


@pytest.mark.parametrize("curv", [-4.0, 0.01, 1.0, 250.0])
def test_minimum_of_quadrature_sum_is_floor(curv):
    floor = un.minimal_fluctuation_from_curvature(curv)
    dphi, minimum = un.minimize_total_fluctuation(curv)
    assert minimum == pytest.approx(floor, rel=1e-10)
    assert dphi == pytest.approx(un.optimal_delta_phi(curv), rel=1e-5)
    assert un.total_fluctuation(curv, un.optimal_delta_phi(curv)) == pytest.approx(floor, rel=1e-12)


def test_zero_curvature_has_no_finite_optimum():
    assert un.optimal_delta_phi(0.0) == float("inf")
    assert un.minimal_fluctuation_from_curvature(0.0) == 0.0


def test_report_is_consistent(ctx3):
    r = un.tradeoff_report(ctx3, 0.3, 0.8)
    assert r.delta_A_total == pytest.approx(np.hypot(r.delta_A_S, r.delta_A_M))
    assert r.delta_A_total >= r.bound_floor * (1 - 1e-12)
    assert r.delta_A_S == pytest.approx(un.intrinsic_uncertainty(ctx3, 0.3, 0.8))
    with pytest.raises(ValueError):
        un.TradeoffReport(1.0, 1.0, 1.0, 5.0, 1.0)


def test_floor_matches_curvature(ctx3):
    curv = ba.action_curvature(ctx3, 0.3)
    assert un.minimal_fluctuation(ctx3, 0.3) == pytest.approx(np.sqrt(abs(curv)))


def test_empirical_fluctuation():
    dist = mt.ReadoutDistribution(np.array([-1.0, 1.0]), np.array([0.1, 0.1]), True)
    assert un.empirical_fluctuation(dist, 0.0) == pytest.approx(1.0)
    with pytest.raises(EmptyDistributionError):
        un.empirical_fluctuation(mt.ReadoutDistribution(np.zeros(2), np.zeros(2), True), 0.0)


def test_weak_meter_reads_weak_value():
    ctx = SternGerlachScenario.from_angle(1.2).context()
    _, _, dist = un.simulate_gaussian_readout(ctx, 0.1, phi_bar=2.9)
    assert dist.mean() == pytest.approx(ba.weak_value(ctx, 2.9).real, abs=0.05)


def test_simulated_fluctuation_tracks_prediction_in_weak_regime():
    ctx = SternGerlachScenario.from_angle(1.2).context()
    reports = un.tradeoff_sweep(ctx, [0.05, 0.1, 0.2], phi_bar=2.9)
    for r in reports:
        assert r.empirical_delta_A == pytest.approx(r.delta_A_total, rel=0.1)


def test_strong_meter_fluctuation_is_bounded_by_spectrum():
    # Once the meter resolves eigenvalues the readout stays within the spectrum.
    ctx = make_context(3, dim=3)
    _, _, dist = un.simulate_gaussian_readout(ctx, 20.0)
    radius = np.max(np.abs(ctx.A.eigenvalues))
    assert np.all(np.abs(dist.A_values[dist.normalized() > 1e-12]) <= radius + 0.5)
