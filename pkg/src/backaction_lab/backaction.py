"""Post-selected amplitudes under the back-action unitary.

For a target observable A, an initial state psi and a post-selected state f,
every quantity here is a function of the back-action parameter ``phi``::

    amplitude(phi) = <f| exp(-i phi A / hbar) |psi> = sqrt(P) exp(i S / hbar)

The action S is the unwrapped phase (times hbar), and ``-dS/dphi`` equals the
real part of the weak value ``<f|A U|psi> / <f|U|psi>``.

Expanding psi and f in the eigenbasis of A turns the amplitude into a finite
sum of exponentials, ``sum_k w_k exp(-i phi a_k / hbar)``, which is what
:class:`BackActionContext` precomputes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import config
from .core import Observable, as_observable, as_state
from .errors import AmplitudeVanishesError, NoConvergenceError

# Phase increment above which an unwrap step is subdivided.
MAX_PHASE_STEP = np.pi / 4
MAX_REFINE_DEPTH = 40


@dataclass(frozen=True)
class BackActionContext:
    """The (A, psi, f) triple; ``hbar`` defaults to the global setting."""

    A: Observable
    psi: object
    f: object
    hbar: float = None
    weights: np.ndarray = field(init=False, repr=False)
    levels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = as_observable(self.A)
        psi = as_state(self.psi)
        f = as_state(self.f)
        if not (A.dim == psi.dim == f.dim):
            raise ValueError(f"dimension mismatch: A {A.dim}, psi {psi.dim}, f {f.dim}")
        hbar = config.get_hbar() if self.hbar is None else float(self.hbar)
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        v = A.decomposition.eigenvectors
        weights = (v.conj().T @ f.amplitudes).conj() * (v.conj().T @ psi.amplitudes)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "hbar", hbar)
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "levels", A.decomposition.eigenvalues)

    @property
    def dim(self):
        return self.A.dim

    def _phases(self, phi):
        phi = np.asarray(phi, dtype=float)
        return np.exp(-1j * np.multiply.outer(phi, self.levels) / self.hbar)

    def amplitude(self, phi):
        """``<f|U_back(phi)|psi>``; vectorized over ``phi``."""
        return self._phases(phi) @ self.weights

    def weighted_amplitude(self, phi, power=1):
        """``<f|A^power U_back(phi)|psi>``; vectorized over ``phi``."""
        return self._phases(phi) @ (self.weights * self.levels**power)


@dataclass(frozen=True)
class ActionCurve:
    """Action S and probability P sampled on an ascending grid of phi."""

    phi_grid: np.ndarray
    S_values: np.ndarray
    P_values: np.ndarray
    amp_floor: float

    def __post_init__(self):
        if np.any(self.P_values < 0) or np.any(self.P_values > 1 + 1e-12):
            raise ValueError("probabilities outside [0, 1]")

    def amplitudes(self, hbar=None):
        if hbar is None:
            hbar = config.get_hbar()
        return np.sqrt(self.P_values) * np.exp(1j * self.S_values / hbar)


def _check_amplitudes(amps, phis, amp_tol):
    mags = np.abs(amps)
    bad = np.flatnonzero(mags < amp_tol)
    if bad.size:
        i = bad[0]
        raise AmplitudeVanishesError(
            f"|amplitude| = {mags[i]:.3e} < {amp_tol:g} at phi = {phis[i]!r}",
            phi=float(phis[i]), magnitude=float(mags[i]))
    return mags


def _phase_increment(ctx, phi0, phi1, a0, a1, amp_tol, depth=0):
    """Continuous change of arg(amplitude) from phi0 to phi1."""
    step = np.angle(a1 / a0)
    if abs(step) <= MAX_PHASE_STEP:
        return step
    if depth >= MAX_REFINE_DEPTH:
        raise NoConvergenceError(f"phase unwrap did not converge near phi = {phi0!r}")
    mid = 0.5 * (phi0 + phi1)
    am = ctx.amplitude(mid)
    _check_amplitudes(np.atleast_1d(am), [mid], amp_tol)
    return (_phase_increment(ctx, phi0, mid, a0, am, amp_tol, depth + 1)
            + _phase_increment(ctx, mid, phi1, am, a1, amp_tol, depth + 1))


def unwrapped_phase(ctx, phi_grid, amps=None, amp_tol=None, refine=True):
    """Continuous branch of ``arg(amplitude)`` along ``phi_grid``.

    The branch is anchored at the principal argument of the first point.
    Steps whose phase increment exceeds pi/4 are bisected (``refine=True``)
    until every sub-step is below that limit.
    """
    if amp_tol is None:
        amp_tol = config.get_settings().amp_tol
    phis = np.asarray(phi_grid, dtype=float)
    if amps is None:
        amps = ctx.amplitude(phis)
    _check_amplitudes(amps, phis, amp_tol)
    steps = np.angle(amps[1:] / amps[:-1])
    if refine:
        for i in np.flatnonzero(np.abs(steps) > MAX_PHASE_STEP):
            steps[i] = _phase_increment(ctx, phis[i], phis[i + 1], amps[i], amps[i + 1], amp_tol)
    return np.angle(amps[0]) + np.concatenate(([0.0], np.cumsum(steps)))


def transition_amplitude(ctx, phi):
    """``<f| exp(-i phi A / hbar) |psi>``."""
    return complex(ctx.amplitude(float(phi)))


def probability(ctx, phi):
    return float(abs(transition_amplitude(ctx, phi)) ** 2)


def action_and_probability(ctx, phi_grid, amp_tol=None, refine=True):
    """Sample S and P along an ascending grid.

    Raises
    ------
    AmplitudeVanishesError
        If ``|amplitude| < amp_tol`` at any grid point (or refinement point);
        S has a phase singularity there.
    """
    if amp_tol is None:
        amp_tol = config.get_settings().amp_tol
    phis = np.asarray(phi_grid, dtype=float)
    if phis.ndim != 1 or phis.size == 0:
        raise ValueError("phi_grid must be a non-empty 1-D array")
    if np.any(np.diff(phis) <= 0):
        raise ValueError("phi_grid must be strictly ascending")
    amps = ctx.amplitude(phis)
    mags = _check_amplitudes(amps, phis, amp_tol)
    S = ctx.hbar * unwrapped_phase(ctx, phis, amps, amp_tol, refine)
    P = np.minimum(mags**2, 1.0)
    return ActionCurve(phis, S, P, float(mags.min()))


def weak_value(ctx, phi, amp_tol=None):
    """Complex weak value ``<f|A U(phi)|psi> / <f|U(phi)|psi>``.

    Only the real part is the meter shift; the imaginary part is returned
    for diagnostics.
    """
    if amp_tol is None:
        amp_tol = config.get_settings().amp_tol
    den = ctx.amplitude(float(phi))
    if abs(den) < amp_tol:
        raise AmplitudeVanishesError(
            f"|amplitude| = {abs(den):.3e} < {amp_tol:g} at phi = {phi!r}",
            phi=float(phi), magnitude=float(abs(den)))
    return complex(ctx.weighted_amplitude(float(phi)) / den)


def weak_values(ctx, phis, amp_tol=None):
    """Vectorized :func:`weak_value`."""
    if amp_tol is None:
        amp_tol = config.get_settings().amp_tol
    phis = np.asarray(phis, dtype=float)
    den = ctx.amplitude(phis)
    _check_amplitudes(np.atleast_1d(den), np.atleast_1d(phis), amp_tol)
    return ctx.weighted_amplitude(phis) / den


def action_slope(ctx, phi, h=None, richardson=True):
    """Finite-difference ``dS/dphi`` from a locally unwrapped phase difference."""
    if h is None:
        h = config.get_settings().fd_step
    amp_tol = config.get_settings().amp_tol

    def central(step):
        pts = np.array([phi - step, phi + step])
        amps = ctx.amplitude(pts)
        _check_amplitudes(amps, pts, amp_tol)
        return ctx.hbar * np.angle(amps[1] / amps[0]) / (2 * step)

    if not richardson:
        return float(central(h))
    return float((4 * central(h / 2) - central(h)) / 3)


def hj_residual(ctx, phi, h=None, richardson=True):
    """``|-dS/dphi - Re W(phi)|`` with the derivative taken by central differences.

    With ``richardson=True`` the steps ``h`` and ``h/2`` are combined, which
    cancels the leading O(h^2) error; with ``richardson=False`` the plain
    central difference is used and the residual shrinks as O(h^2).
    """
    slope = action_slope(ctx, phi, h, richardson)
    return abs(-slope - weak_value(ctx, phi).real)


def action_curvature(ctx, phi, h=None):
    """``d^2 S / dphi^2`` evaluated as ``-d(Re W)/dphi`` (Richardson central difference)."""
    if h is None:
        h = config.get_settings().fd_step

    def central(step):
        w = weak_values(ctx, [phi - step, phi + step]).real
        return (w[1] - w[0]) / (2 * step)

    return float(-(4 * central(h / 2) - central(h)) / 3)
