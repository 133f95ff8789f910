"""Resolution versus back-action trade-off of a meter readout.

A meter whose back-action parameter has spread ``delta_phi`` resolves the
target observable no better than ``hbar / (2 delta_phi)``. The post-selected
value itself varies with the back-action, contributing
``|d^2 S / dphi^2| delta_phi``. The two add in quadrature and their sum is
bounded below by ``sqrt(hbar |d^2 S / dphi^2|)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import config
from .backaction import action_curvature, weak_value
from .errors import EmptyDistributionError, NonPositiveUncertaintyError
from .meter import design_gaussian_meter, readout_distribution


@dataclass(frozen=True)
class TradeoffReport:
    delta_phi: float
    delta_A_M: float
    delta_A_S: float
    delta_A_total: float
    bound_floor: float
    empirical_delta_A: float = float("nan")

    def __post_init__(self):
        if abs(self.delta_A_total**2 - self.delta_A_S**2 - self.delta_A_M**2) > 1e-9 * max(
                1.0, self.delta_A_total**2):
            raise ValueError("delta_A_total must combine delta_A_S and delta_A_M in quadrature")


def _hbar(hbar):
    return config.get_hbar() if hbar is None else hbar


def resolution_bound(delta_phi, hbar=None):
    """Smallest meter resolution error compatible with back-action spread ``delta_phi``."""
    if not delta_phi > 0:
        raise NonPositiveUncertaintyError(f"delta_phi must be positive, got {delta_phi}")
    return _hbar(hbar) / (2 * delta_phi)


def intrinsic_uncertainty(ctx, phi, delta_phi):
    """``|d^2 S / dphi^2| * delta_phi``: spread of the weak value over the back-action."""
    if not delta_phi >= 0:
        raise NonPositiveUncertaintyError(f"delta_phi must be non-negative, got {delta_phi}")
    return abs(action_curvature(ctx, phi)) * delta_phi


def minimal_fluctuation_from_curvature(curvature, hbar=None):
    return float(np.sqrt(_hbar(hbar) * abs(curvature)))


def minimal_fluctuation(ctx, phi):
    """Lower bound ``sqrt(hbar |d^2 S / dphi^2|)`` on the readout fluctuation."""
    return minimal_fluctuation_from_curvature(action_curvature(ctx, phi), ctx.hbar)


def total_fluctuation(curvature, delta_phi, hbar=None):
    """Quadrature sum with the resolution error at its bound."""
    return float(np.hypot(abs(curvature) * delta_phi, resolution_bound(delta_phi, hbar)))


def optimal_delta_phi(curvature, hbar=None):
    """Back-action spread at which both contributions are equal."""
    if curvature == 0:
        return float("inf")
    return float(np.sqrt(_hbar(hbar) / (2 * abs(curvature))))


def minimize_total_fluctuation(curvature, hbar=None):
    """Numerical minimum of :func:`total_fluctuation` over ``delta_phi``.

    Minimizes over ``log(delta_phi)`` with Brent's method; returns
    ``(delta_phi, minimum)``.
    """
    result = minimize_scalar(lambda u: total_fluctuation(curvature, np.exp(u), hbar),
                             bracket=(-5.0, 5.0), tol=1e-12)
    return float(np.exp(result.x)), float(result.fun)


def empirical_fluctuation(readout, around):
    """Mass-weighted RMS deviation of the pointer values from ``around``."""
    if not readout.total_mass > 0:
        raise EmptyDistributionError("readout distribution carries no probability")
    p = readout.normalized()
    return float(np.sqrt(p @ (readout.A_values - around) ** 2))


def tradeoff_report(ctx, phi, delta_phi, empirical=float("nan")):
    curv = action_curvature(ctx, phi)
    d_m = resolution_bound(delta_phi, ctx.hbar)
    d_s = abs(curv) * delta_phi
    return TradeoffReport(
        delta_phi=float(delta_phi),
        delta_A_M=d_m,
        delta_A_S=d_s,
        delta_A_total=float(np.hypot(d_s, d_m)),
        bound_floor=minimal_fluctuation_from_curvature(curv, ctx.hbar),
        empirical_delta_A=float(empirical),
    )


def simulate_gaussian_readout(ctx, sigma_phi, phi_bar=0.0, g=1.0):
    """Post-selected Fourier readout of a Gaussian meter centred at ``phi_bar``.

    Returns ``(meter, phi_M, distribution)``. The grid is sized to hold the
    eigenvalues plus the Gaussian tails of the pointer resolution inside the
    pointer window.
    """
    # The pointer amplitude is a sum of copies of the meter's Fourier transform
    # shifted to the eigenvalues, so the spectral radius bounds its support.
    halfwidth = float(np.max(np.abs(ctx.A.eigenvalues)))
    meter, phi_M = design_gaussian_meter(sigma_phi, halfwidth, g=g, hbar=ctx.hbar,
                                         center=phi_bar / g)
    return meter, phi_M, readout_distribution(ctx, meter, phi_M)


def tradeoff_sweep(ctx, sigmas, phi_bar=0.0, g=1.0):
    """One :class:`TradeoffReport` per meter width, with the simulated fluctuation
    measured around ``Re W(phi_bar)``."""
    center = weak_value(ctx, phi_bar).real
    reports = []
    for sigma in sigmas:
        _, _, dist = simulate_gaussian_readout(ctx, sigma, phi_bar, g)
        reports.append(tradeoff_report(ctx, phi_bar, sigma, empirical_fluctuation(dist, center)))
    return reports
