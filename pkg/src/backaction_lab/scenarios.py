"""Closed-form worked examples used as analytic oracles.

Stern-Gerlach: spin-1/2 with ``A = hbar sigma_z / 2``, initial state
``(|up> + |down>) / sqrt(2)`` and a real post-selection ``c_up |up> + c_down |down>``.

Free particle: a mass ``m`` travelling from ``x1`` (time 0) to ``x2`` (time
``t``) whose position at ``t / 2`` is coupled to a meter; the back-action is
a momentum kick ``p``. Only the closed forms are implemented, there is no
position-grid propagator.
"""

from dataclasses import dataclass

import numpy as np

from . import config
from .backaction import (
    BackActionContext,
    action_and_probability,
    weak_values,
)
from .core import Observable, StateVector, pauli
from .errors import DivergentW0Error
from .uncertainty import minimal_fluctuation_from_curvature


@dataclass(frozen=True)
class SternGerlachScenario:
    c_up: float
    c_down: float
    hbar: float = None

    def __post_init__(self):
        if np.iscomplexobj(self.c_up) or np.iscomplexobj(self.c_down):
            raise ValueError("Stern-Gerlach post-selection amplitudes must be real")
        norm = self.c_up**2 + self.c_down**2
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"c_up^2 + c_down^2 = {norm!r}, expected 1")
        object.__setattr__(self, "c_up", float(self.c_up))
        object.__setattr__(self, "c_down", float(self.c_down))
        hbar = config.get_hbar() if self.hbar is None else float(self.hbar)
        object.__setattr__(self, "hbar", hbar)

    @classmethod
    def from_angle(cls, theta, hbar=None):
        """Post-selection ``cos(theta) |up> + sin(theta) |down>``."""
        return cls(float(np.cos(theta)), float(np.sin(theta)), hbar)

    def observable(self):
        return Observable(self.hbar * pauli("z") / 2)

    def context(self):
        psi = StateVector(np.array([1, 1]) / np.sqrt(2))
        f = StateVector(np.array([self.c_up, self.c_down]))
        return BackActionContext(self.observable(), psi, f, self.hbar)


def sg_amplitude(s, phi):
    phi = np.asarray(phi, dtype=float)
    return (s.c_up * np.exp(-0.5j * phi) + s.c_down * np.exp(0.5j * phi)) / np.sqrt(2)


def sg_probability(s, phi):
    return 0.5 * (1 + 2 * s.c_up * s.c_down * np.cos(phi))


def sg_W0(s):
    """Weak value of sigma_z at zero back-action, in units of hbar / 2."""
    total = s.c_up + s.c_down
    if total == 0:
        raise DivergentW0Error("c_up + c_down = 0: f is orthogonal to psi at phi = 0")
    return (s.c_up - s.c_down) / total


def sg_action(s, phi):
    """``-hbar arctan(W0 tan(phi / 2))``, continued across ``phi = pi (mod 2 pi)``.

    The ratio ``(c_up^2 - c_down^2) / (1 + 2 c_up c_down)`` equals W0. When
    ``c_up + c_down < 0`` this differs from ``hbar Arg(amplitude)`` by the
    constant ``pi hbar``.
    """
    phi = np.asarray(phi, dtype=float)
    ratio = (s.c_up**2 - s.c_down**2) / (1 + 2 * s.c_up * s.c_down)
    branch = np.floor((phi + np.pi) / (2 * np.pi))
    return -s.hbar * (np.arctan(ratio * np.tan(phi / 2)) + np.sign(ratio) * np.pi * branch)


def sg_weak_value(s, phi):
    """Meter shift ``-dS/dphi = (hbar/2) W0 / (cos^2(phi/2) + W0^2 sin^2(phi/2))``."""
    w0 = sg_W0(s)
    phi = np.asarray(phi, dtype=float)
    return 0.5 * s.hbar * w0 / (np.cos(phi / 2) ** 2 + w0**2 * np.sin(phi / 2) ** 2)


@dataclass(frozen=True)
class FreeParticleScenario:
    m: float
    t: float
    x1: float = 0.0
    x2: float = 0.0
    hbar: float = None

    def __post_init__(self):
        if not self.m > 0 or not self.t > 0:
            raise ValueError("free particle needs m > 0 and t > 0")
        hbar = config.get_hbar() if self.hbar is None else float(self.hbar)
        object.__setattr__(self, "hbar", hbar)


def fp_action(s, p):
    p = np.asarray(p, dtype=float)
    drift = 2 * s.m * (s.x1 + s.x2) / s.t
    return (s.m * (s.x1**2 + s.x2**2) / s.t
            - s.t / (8 * s.m) * (p + drift) ** 2
            - np.pi * s.hbar / 4)


def fp_position(s, p):
    """Straight-line position at ``t / 2`` corrected by the kick ``p``."""
    return 0.5 * (s.x1 + s.x2) + s.t / (4 * s.m) * np.asarray(p, dtype=float)


def fp_curvature(s):
    """``d^2 S / dp^2``, independent of p."""
    return -s.t / (4 * s.m)


def fp_min_fluctuation(s):
    return float(np.sqrt(s.hbar * s.t / (4 * s.m)))


def central_difference(func, x, h):
    """Richardson-extrapolated central difference (steps h and h/2)."""
    d1 = (func(x + h) - func(x - h)) / (2 * h)
    d2 = (func(x + h / 2) - func(x - h / 2)) / h
    return (4 * d2 - d1) / 3


@dataclass
class CrosscheckReport:
    residuals: dict
    skipped: list
    offsets: list

    @property
    def max_residual(self):
        return max(self.residuals.values())


def _segments(mask):
    """Runs of consecutive True entries as (start, stop) pairs."""
    runs, start = [], None
    for i, ok in enumerate(mask):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def crosscheck_stern_gerlach(s, phi_grid, amp_tol=None):
    """Generic engine vs the Stern-Gerlach closed forms.

    Grid points with ``P < amp_tol`` are skipped and listed. The action is
    unwrapped separately on each run of retained points and compared up to a
    constant multiple of ``pi hbar`` (reported in ``offsets``). Weak-value
    residuals are relative to ``max(hbar, |W|)``.
    """
    if amp_tol is None:
        amp_tol = config.get_settings().amp_tol
    phis = np.asarray(phi_grid, dtype=float)
    ctx = s.context()
    P_cf = sg_probability(s, phis)
    keep = P_cf >= amp_tol
    skipped = phis[~keep].tolist()
    res = {"amplitude": 0.0, "probability": 0.0, "action": 0.0, "weak_value": 0.0}
    offsets = []
    for lo, hi in _segments(keep):
        seg = phis[lo:hi]
        amp = ctx.amplitude(seg)
        res["amplitude"] = max(res["amplitude"], float(np.max(np.abs(amp - sg_amplitude(s, seg)))))
        curve = action_and_probability(ctx, seg, amp_tol=min(amp_tol, 1e-10))
        res["probability"] = max(res["probability"], float(np.max(np.abs(curve.P_values - P_cf[lo:hi]))))
        diff = curve.S_values - sg_action(s, seg)
        k = int(np.round(diff[0] / (np.pi * s.hbar)))
        offsets.append(k)
        res["action"] = max(res["action"], float(np.max(np.abs(diff - k * np.pi * s.hbar))))
        w_gen = weak_values(ctx, seg).real
        w_cf = sg_weak_value(s, seg)
        scale = np.maximum(s.hbar, np.abs(w_cf))
        res["weak_value"] = max(res["weak_value"], float(np.max(np.abs(w_gen - w_cf) / scale)))
    return CrosscheckReport(res, skipped, offsets)


def crosscheck_free_particle(s, p_grid, h=1e-3):
    """Closed-form identities of the free-particle example.

    ``fp_position`` against ``-dS/dp`` by finite differences, the curvature
    against the constant ``-t / 4m`` and ``fp_min_fluctuation`` against the
    generic minimal-fluctuation formula fed with that curvature.
    """
    p = np.asarray(p_grid, dtype=float)
    slope = central_difference(lambda q: fp_action(s, q), p, h)
    curv = central_difference(lambda q: central_difference(lambda r: fp_action(s, r), q, h), p, h)
    res = {
        "position": float(np.max(np.abs(-slope - fp_position(s, p)))),
        "curvature": float(np.max(np.abs(curv - fp_curvature(s)))),
        "min_fluctuation": abs(fp_min_fluctuation(s)
                               - minimal_fluctuation_from_curvature(fp_curvature(s), s.hbar)),
    }
    return CrosscheckReport(res, [], [])


def crosscheck_closed_forms(scenario, grid, **kwargs):
    if isinstance(scenario, SternGerlachScenario):
        return crosscheck_stern_gerlach(scenario, grid, **kwargs)
    if isinstance(scenario, FreeParticleScenario):
        return crosscheck_free_particle(scenario, grid, **kwargs)
    raise TypeError(f"unknown scenario type {type(scenario).__name__}")
