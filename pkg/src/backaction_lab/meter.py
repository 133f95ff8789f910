"""Discrete von Neumann meters coupled to the system through ``g A (x) B``.

The meter observable B has the evenly spaced, zero-centred spectrum
``B_b = delta_B * (b - (N - 1) / 2)``. Its conjugate readout is the discrete
Fourier basis::

    <m|b> = exp(i g A_m B_b / hbar) / sqrt(N),
    A_m   = delta_A * (m - (N - 1) / 2),   delta_A = 2 pi hbar / (N g delta_B),

so the pointer values ``A_m`` tile one Nyquist window of total width
``2 pi hbar / (g delta_B)``. Eigenvalues of A outside that window would alias
and are rejected.

Joint-space ordering follows :mod:`backaction_lab.core`: system index slow,
meter index fast.
"""

from dataclasses import dataclass, field

import numpy as np

from . import config
from .backaction import BackActionContext, unwrapped_phase
from .core import (
    Observable,
    StateVector,
    as_observable,
    as_state,
    check_joint_dim,
    tensor_product,
)
from .errors import AliasingDetectedError, GridTooNarrowError

EDGE_TOL = 1e-8


@dataclass(frozen=True)
class MeterModel:
    N: int
    delta_B: float
    g: float = 1.0
    hbar: float = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"meter needs N >= 2 grid points, got {self.N}")
        if not self.delta_B > 0:
            raise ValueError(f"delta_B must be positive, got {self.delta_B}")
        object.__setattr__(self, "N", int(self.N))
        hbar = config.get_hbar() if self.hbar is None else float(self.hbar)
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "hbar", hbar)

    @property
    def B_values(self):
        return self.delta_B * (np.arange(self.N) - (self.N - 1) / 2)

    @property
    def phi_values(self):
        """Back-action parameters ``g * B_b``."""
        return self.g * self.B_values

    @property
    def B_matrix(self):
        return np.diag(self.B_values).astype(np.complex128)

    @property
    def delta_A(self):
        if self.g == 0:
            raise ValueError("pointer grid is undefined for g = 0")
        return 2 * np.pi * self.hbar / (self.N * abs(self.g) * self.delta_B)

    @property
    def nyquist_halfwidth(self):
        """Pointer values in ``(-W, W]`` are representable without aliasing."""
        return self.N * self.delta_A / 2


@dataclass(frozen=True)
class ReadoutBasis:
    """Rows of ``matrix`` are the readout bras: ``matrix[m, b] = <m|b>``."""

    matrix: np.ndarray
    A_values: np.ndarray
    delta_A: float

    @property
    def N(self):
        return self.A_values.shape[0]

    def states(self):
        """The readout kets ``|m>`` as :class:`StateVector` objects."""
        return [StateVector(row.conj()) for row in self.matrix]

    def amplitudes(self, chi):
        """``<m|chi>`` for every m."""
        return self.matrix @ np.asarray(chi, dtype=np.complex128)


@dataclass(frozen=True)
class ReadoutDistribution:
    A_values: np.ndarray
    probabilities: np.ndarray
    post_selected: bool
    total_mass: float = field(init=False)

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float)
        if np.any(probs < 0):
            raise ValueError("negative readout probability")
        total = float(probs.sum())
        if total > 1 + 1e-10:
            raise ValueError(f"total readout mass {total} exceeds 1")
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "total_mass", total)

    @property
    def bins(self):
        return list(zip(self.A_values.tolist(), self.probabilities.tolist()))

    def normalized(self):
        return self.probabilities / self.total_mass

    def mean(self):
        return float(self.A_values @ self.normalized())


def _backaction_unitaries(A, phis, hbar):
    """Stack of ``exp(-i phi A / hbar)`` for each phi, shape (len(phis), d, d)."""
    v = A.decomposition.eigenvectors
    phases = np.exp(-1j * np.multiply.outer(phis, A.decomposition.eigenvalues) / hbar)
    return np.einsum("ik,bk,jk->bij", v, phases, v.conj())


def interaction_unitary(A, meter):
    """``exp(-i g A (x) B / hbar)`` on the joint space.

    Computed from the spectral decomposition of the full joint generator, so
    it does not share a code path with :func:`backaction_decomposition`.
    """
    A = as_observable(A)
    check_joint_dim(A.dim * meter.N)
    generator = Observable(meter.g * tensor_product(A.matrix, meter.B_matrix))
    dec = generator.decomposition
    return dec.apply_function(lambda lam: np.exp(-1j * lam / meter.hbar))


def backaction_decomposition(A, meter):
    """Pairs ``(B_b, U_back(g B_b))`` for every meter eigenvalue."""
    A = as_observable(A)
    check_joint_dim(A.dim * meter.N)
    unitaries = _backaction_unitaries(A, meter.phi_values, meter.hbar)
    return list(zip(meter.B_values.tolist(), unitaries))


def assemble_backaction(decomposition):
    """``sum_b U_b (x) |b><b|`` as a dense joint matrix."""
    unitaries = np.array([u for _, u in decomposition])
    n, d, _ = unitaries.shape
    joint = np.zeros((d, n, d, n), dtype=np.complex128)
    idx = np.arange(n)
    joint[:, idx, :, idx] = unitaries
    return joint.reshape(d * n, d * n)


def conditional_meter_operator(ctx, meter):
    """Diagonal of ``<f|U_SM|psi>`` in the B basis: ``<f|U_back(g B_b)|psi>``."""
    _check_hbar(ctx, meter)
    return ctx.amplitude(meter.phi_values)


def conditional_meter_polar(ctx, meter, amp_tol=None):
    """Magnitudes and unwrapped phases (continuous across b) of the conditional operator.

    Raises
    ------
    AmplitudeVanishesError
        If any entry is below ``amp_tol``.
    """
    entries = conditional_meter_operator(ctx, meter)
    phis = meter.phi_values
    if meter.g < 0:
        phase = unwrapped_phase(ctx, phis[::-1], entries[::-1], amp_tol)[::-1]
    elif meter.g == 0:
        phase = np.full(meter.N, np.angle(entries[0]))
        if abs(entries[0]) < (amp_tol or config.get_settings().amp_tol):
            unwrapped_phase(ctx, phis[:1], entries[:1], amp_tol)
    else:
        phase = unwrapped_phase(ctx, phis, entries, amp_tol)
    return np.abs(entries), phase


def gaussian_meter_state(meter, sigma_B, center=0.0, edge_tol=EDGE_TOL):
    """Real Gaussian meter state with amplitudes ``exp(-(B - center)^2 / (4 sigma_B^2))``.

    ``sigma_B`` is the standard deviation of B in this state (in the
    continuum). Raises :class:`GridTooNarrowError` if either edge amplitude
    exceeds ``edge_tol`` times the peak.
    """
    if not sigma_B > 0:
        raise ValueError(f"sigma_B must be positive, got {sigma_B}")
    B = meter.B_values
    amps = np.exp(-((B - center) ** 2) / (4 * sigma_B**2))
    peak = amps.max()
    edge = max(amps[0], amps[-1]) / peak
    if edge >= edge_tol:
        raise GridTooNarrowError(
            f"edge amplitude {edge:.3e} of peak exceeds {edge_tol:g}; widen the B grid")
    return StateVector(amps / np.linalg.norm(amps))


def meter_spread(meter, phi_M):
    """Mean and standard deviation of B in ``phi_M`` on the discrete grid."""
    p = np.abs(np.asarray(phi_M)) ** 2
    p = p / p.sum()
    mean = float(p @ meter.B_values)
    return mean, float(np.sqrt(p @ (meter.B_values - mean) ** 2))


def fourier_readout_basis(meter):
    """Optimal pointer readout conjugate to B."""
    delta_A = meter.delta_A
    A_values = delta_A * (np.arange(meter.N) - (meter.N - 1) / 2)
    matrix = np.exp(1j * meter.g * np.outer(A_values, meter.B_values) / meter.hbar) / np.sqrt(meter.N)
    return ReadoutBasis(matrix, A_values, delta_A)


def _check_hbar(ctx, meter):
    if not np.isclose(ctx.hbar, meter.hbar, rtol=1e-15, atol=0):
        raise ValueError(f"context hbar {ctx.hbar} differs from meter hbar {meter.hbar}")


def _meter_vector(meter, phi_M):
    phi = as_state(phi_M).amplitudes
    if phi.shape[0] != meter.N:
        raise ValueError(f"meter state has dim {phi.shape[0]}, meter has N = {meter.N}")
    return phi


def joint_amplitudes(ctx, meter, phi_M, basis=None):
    """``<f, m|U_SM|psi, phi_M>`` for every readout m (factorized evaluation)."""
    if basis is None:
        basis = fourier_readout_basis(meter)
    chi = conditional_meter_operator(ctx, meter) * _meter_vector(meter, phi_M)
    return basis.amplitudes(chi)


def joint_amplitude(ctx, meter, phi_M, m, basis=None):
    """``sum_b <f|U_back(g B_b)|psi> <m|b> <b|phi_M>``."""
    if basis is None:
        basis = fourier_readout_basis(meter)
    chi = conditional_meter_operator(ctx, meter) * _meter_vector(meter, phi_M)
    return complex(basis.matrix[m] @ chi)


def joint_amplitude_oracle(ctx, meter, phi_M, m, basis=None):
    """The same amplitude by brute-force evolution in the joint space."""
    if basis is None:
        basis = fourier_readout_basis(meter)
    U = interaction_unitary(ctx.A, meter)
    initial = tensor_product(ctx.psi.amplitudes[:, None], _meter_vector(meter, phi_M)[:, None])
    final = tensor_product(ctx.f.amplitudes[:, None], basis.matrix[m].conj()[:, None])
    return complex(np.vdot(final[:, 0], U @ initial[:, 0]))


def conditional_meter_state(ctx, meter, phi_M):
    """Unnormalized meter state ``<f|U_SM|psi, phi_M>`` in the B basis.

    Its squared norm is the post-selection probability of f.
    """
    chi = conditional_meter_operator(ctx, meter) * _meter_vector(meter, phi_M)
    return StateVector(chi, normalized=False)


def _system_meter_matrix(A, psi, meter, phi_M):
    """``X[s, b] = (U_back(g B_b) psi)_s <b|phi_M>``: the joint state after coupling."""
    A = as_observable(A)
    psi = as_state(psi)
    v = A.decomposition.eigenvectors
    coeffs = v.conj().T @ psi.amplitudes
    phases = np.exp(-1j * np.multiply.outer(A.decomposition.eigenvalues, meter.phi_values) / meter.hbar)
    return (v @ (coeffs[:, None] * phases)) * _meter_vector(meter, phi_M)[None, :]


def readout_distribution(source, meter, phi_M, basis=None, f_basis=None):
    """Pointer-value distribution of the Fourier readout.

    Parameters
    ----------
    source : BackActionContext or tuple (A, psi)
        A context gives the distribution post-selected on ``ctx.f`` (its total
        mass is the post-selection probability). An ``(A, psi)`` pair gives the
        unconditional distribution.
    f_basis : array_like, optional
        Columns form the complete system basis summed over in the
        unconditional case; any orthonormal basis gives the same result.
        Defaults to the computational basis.
    """
    if basis is None:
        basis = fourier_readout_basis(meter)
    if isinstance(source, BackActionContext):
        amps = joint_amplitudes(source, meter, phi_M, basis)
        return ReadoutDistribution(basis.A_values, np.abs(amps) ** 2, post_selected=True)
    A, psi = source
    X = _system_meter_matrix(A, psi, meter, phi_M)
    if f_basis is not None:
        F = np.asarray(f_basis, dtype=np.complex128)
        X = F.conj().T @ X
    Y = X @ basis.matrix.T
    probs = np.sum(np.abs(Y) ** 2, axis=0)
    return ReadoutDistribution(basis.A_values, probs, post_selected=False)


def peak_masses(distribution, eigenvalues, normalize=True):
    """Readout mass assigned to each eigenvalue by nearest-eigenvalue partition of the bins."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    nearest = np.argmin(np.abs(distribution.A_values[:, None] - eigenvalues[None, :]), axis=1)
    probs = distribution.normalized() if normalize else distribution.probabilities
    return np.bincount(nearest, weights=probs, minlength=eigenvalues.size)


def concentration(distribution, center, halfwidth):
    """Fraction of the total mass within ``center +/- halfwidth``."""
    inside = np.abs(distribution.A_values - center) <= halfwidth
    return float(distribution.normalized()[inside].sum())


def check_aliasing(eigenvalues, meter):
    W = meter.nyquist_halfwidth
    bad = [float(a) for a in np.atleast_1d(eigenvalues) if not (-W < a <= W)]
    if bad:
        raise AliasingDetectedError(
            f"eigenvalues {bad} lie outside the pointer window (-{W:.6g}, {W:.6g}]")


def design_gaussian_meter(sigma_phi, pointer_halfwidth, g=1.0, hbar=None,
                          tail_A=14.0, tail_B=12.5, oversample=2.0, center=0.0):
    """Grid and Gaussian state for a meter with back-action spread ``sigma_phi``.

    The spacing is chosen so that pointer values up to ``pointer_halfwidth``
    plus ``tail_A`` pointer resolutions fit in the Nyquist window and the
    Gaussian is sampled at least ``oversample`` times per ``sigma_B``; the
    grid extends ``tail_B`` standard deviations either side (edge amplitude
    ``exp(-tail_B**2 / 4)``) around ``center``.
    """
    if hbar is None:
        hbar = config.get_hbar()
    if not sigma_phi > 0:
        raise ValueError("sigma_phi must be positive")
    sigma_B = sigma_phi / abs(g)
    resolution = hbar / (2 * sigma_phi)
    delta_B = min(np.pi * hbar / (abs(g) * (pointer_halfwidth + tail_A * resolution)),
                  sigma_B / oversample)
    half = int(np.ceil((tail_B * sigma_B + abs(center)) / delta_B))
    meter = MeterModel(2 * half + 1, delta_B, g, hbar)
    edge_tol = max(EDGE_TOL, 2 * np.exp(-tail_B**2 / 4))
    return meter, gaussian_meter_state(meter, sigma_B, center=center, edge_tol=edge_tol)


def readout_operator(A, meter, phi_M, m, basis=None):
    """System operator ``<m|U_SM|phi_M> = sum_b <m|b><b|phi_M> U_back(g B_b)``."""
    if basis is None:
        basis = fourier_readout_basis(meter)
    A = as_observable(A)
    weights = basis.matrix[m] * _meter_vector(meter, phi_M)
    unitaries = _backaction_unitaries(A, meter.phi_values, meter.hbar)
    return np.tensordot(weights, unitaries, axes=1)


@dataclass
class EmergenceRow:
    sigma_phi: float
    N: int
    delta_B: float
    distances: dict
    max_distance: float


@dataclass
class EmergenceReport:
    rows: list
    monotone: bool

    @property
    def distances(self):
        return [row.max_distance for row in self.rows]


def is_nonincreasing(values, floor=1e-12):
    """True if no value exceeds its predecessor by more than ``floor``."""
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(values) <= floor))


def projector_emergence_check(A, meters, floor=1e-12):
    """Distance of the normalized readout operator from each eigenprojector.

    Parameters
    ----------
    A : Observable
    meters : sequence of (MeterModel, StateVector)
        Meters ordered by growing back-action spread.

    For every eigenvalue ``a`` the readout bin nearest to ``a`` is selected,
    ``<m|U_SM|phi_M>`` is divided by its component on the eigenspace of
    ``a`` and compared with the projector in operator 2-norm. The report's
    ``monotone`` flag tests non-increase of the worst distance, with changes
    below ``floor`` treated as roundoff.

    Raises
    ------
    AliasingDetectedError
        If an eigenvalue lies outside some meter's pointer window.
    """
    A = as_observable(A)
    rows = []
    for meter, phi_M in meters:
        check_aliasing(A.eigenvalues, meter)
        basis = fourier_readout_basis(meter)
        _, sigma_B = meter_spread(meter, phi_M)
        distances = {}
        for value, projector in A.spectrum:
            m = int(np.argmin(np.abs(basis.A_values - value)))
            op = readout_operator(A, meter, phi_M, m, basis)
            scale = np.trace(projector @ op) / np.trace(projector).real
            distances[value] = float(np.linalg.norm(op / scale - projector, 2))
        rows.append(EmergenceRow(abs(meter.g) * sigma_B, meter.N, meter.delta_B,
                                 distances, max(distances.values())))
    return EmergenceReport(rows, is_nonincreasing([r.max_distance for r in rows], floor))


def born_rule_study(A, psi, widths, f=None, g=1.0, hbar=None):
    """Peak masses of the Fourier readout for a sequence of Gaussian meter widths.

    Returns a list of dicts with the meter width, the peak masses, the
    reference masses (``|<a|psi>|^2``, or ``|<f|a><a|psi>|^2`` normalized when
    ``f`` is given) and their total-variation distance.
    """
    A = as_observable(A)
    psi = as_state(psi)
    eig = A.eigenvalues
    reference = []
    for _, projector in A.spectrum:
        if f is None:
            reference.append(np.vdot(psi.amplitudes, projector @ psi.amplitudes).real)
        else:
            reference.append(abs(np.vdot(as_state(f).amplitudes, projector @ psi.amplitudes)) ** 2)
    reference = np.array(reference) / np.sum(reference)
    halfwidth = float(np.max(np.abs(eig)))
    rows = []
    for width in widths:
        meter, phi_M = design_gaussian_meter(width, halfwidth, g=g, hbar=hbar)
        check_aliasing(eig, meter)
        if f is None:
            dist = readout_distribution((A, psi), meter, phi_M)
        else:
            dist = readout_distribution(BackActionContext(A, psi, f, meter.hbar), meter, phi_M)
        masses = peak_masses(dist, eig)
        rows.append({
            "sigma_phi": float(width),
            "N": meter.N,
            "delta_B": meter.delta_B,
            "masses": masses,
            "reference": reference,
            "tv_error": float(0.5 * np.abs(masses - reference).sum()),
            "total_mass": dist.total_mass,
        })
    return rows
