"""Dense complex linear algebra for small quantum systems.

Matrices are plain 2-D ``numpy`` arrays of dtype ``complex128``. States and
observables are thin immutable wrappers that validate their invariants once,
at construction, so the rest of the package can trust them.

Tensor products use system-major ordering: in ``tensor_product(a, b)`` the
index of ``a`` varies slowest, so joint basis state ``(s, m)`` sits at row
``s * dim(b) + m``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import config
from .errors import DimensionOverflowError, NoConvergenceError, NotHermitianError

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-12


def _frozen(array):
    array.setflags(write=False)
    return array


def as_matrix(matrix):
    """Return ``matrix`` as a square complex128 array, raising on bad shape."""
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def hermiticity_residual(matrix):
    m = as_matrix(matrix)
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(matrix, rtol=HERMITIAN_RTOL):
    m = as_matrix(matrix)
    scale = float(np.max(np.abs(m)))
    residual = hermiticity_residual(m)
    if residual > rtol * scale:
        raise NotHermitianError(
            f"max|M - M^dagger| = {residual:.3e} exceeds {rtol:g} * max|M| = {rtol * scale:.3e}"
        )
    return m


def is_unitary(matrix, atol=1e-12):
    u = as_matrix(matrix)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with the matching eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply_function(self, func):
        """Matrix function ``V f(diag(lambda)) V^dagger``."""
        v = self.eigenvectors
        return (v * func(self.eigenvalues)) @ v.conj().T

    def groups(self, degeneracy_tol=None):
        """Index groups of (numerically) degenerate eigenvalues.

        Consecutive eigenvalues closer than ``degeneracy_tol`` times the
        spectral range are chained into one group.
        """
        if degeneracy_tol is None:
            degeneracy_tol = config.get_settings().degeneracy_tol
        vals = self.eigenvalues
        spread = float(vals[-1] - vals[0])
        threshold = degeneracy_tol * spread
        out = [[0]]
        for i in range(1, len(vals)):
            if vals[i] - vals[i - 1] <= threshold:
                out[-1].append(i)
            else:
                out.append([i])
        return out


def hermitian_eig(matrix):
    """Spectral decomposition of a Hermitian matrix.

    Raises
    ------
    NotHermitianError
        If ``max|M - M^dagger|`` exceeds ``1e-12 * max|M|``.
    NoConvergenceError
        If LAPACK fails to converge.
    """
    m = check_hermitian(matrix)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return SpectralDecomposition(_frozen(vals), _frozen(vecs))


class Observable:
    """Hermitian operator with its spectral decomposition computed once.

    Parameters
    ----------
    matrix : array_like
        Hermitian matrix.
    degeneracy_tol : float, optional
        Relative tolerance for grouping eigenvalues into eigenspaces.

    Attributes
    ----------
    spectrum : list of (float, ndarray)
        Distinct eigenvalues (ascending) with their eigenprojectors.
    """

    def __init__(self, matrix, degeneracy_tol=None):
        if degeneracy_tol is None:
            degeneracy_tol = config.get_settings().degeneracy_tol
        self.decomposition = hermitian_eig(matrix)
        self.matrix = _frozen(as_matrix(matrix).copy())
        self.degeneracy_tol = float(degeneracy_tol)

    @cached_property
    def spectrum(self):
        vals = self.decomposition.eigenvalues
        vecs = self.decomposition.eigenvectors
        spectrum = []
        for group in self.decomposition.groups(self.degeneracy_tol):
            block = vecs[:, group]
            spectrum.append((float(np.mean(vals[group])), _frozen(block @ block.conj().T)))
        return spectrum

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def eigenvalues(self):
        """Distinct eigenvalues, ascending."""
        return np.array([value for value, _ in self.spectrum])

    def eigenprojector(self, value):
        """Projector onto the eigenspace whose eigenvalue is closest to ``value``."""
        idx = int(np.argmin(np.abs(self.eigenvalues - value)))
        return self.spectrum[idx][1]

    def __repr__(self):
        return f"Observable(dim={self.dim}, eigenvalues={np.round(self.eigenvalues, 6).tolist()})"


def as_observable(obs):
    return obs if isinstance(obs, Observable) else Observable(obs)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector, normalized unless ``normalized=False``."""

    amplitudes: np.ndarray
    normalized: bool = True
    norm: float = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).copy()
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError(f"state amplitudes must be a non-empty 1-D array, got shape {amps.shape}")
        norm = float(np.linalg.norm(amps))
        if self.normalized and abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm!r}); pass normalized=False "
                             "for intermediate vectors")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "norm", norm)

    @classmethod
    def from_amplitudes(cls, amplitudes):
        """Normalize ``amplitudes`` and wrap them."""
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim, index):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def bra(self):
        return self.amplitudes.conj()

    def overlap(self, other):
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, as_state(other, normalized=False).amplitudes))

    def normalize(self):
        return StateVector.from_amplitudes(self.amplitudes)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


def as_state(state, normalized=True):
    """Coerce ``state`` to a :class:`StateVector`, validating its norm."""
    if isinstance(state, StateVector):
        if normalized and not state.normalized:
            raise ValueError("expected a normalized state")
        return state
    return StateVector(np.asarray(state, dtype=np.complex128), normalized=normalized)


def unitary_from_generator(generator, theta, hbar=None):
    """``exp(-i theta G / hbar)`` computed from the spectral decomposition of G."""
    if hbar is None:
        hbar = config.get_hbar()
    obs = as_observable(generator)
    return obs.decomposition.apply_function(lambda lam: np.exp(-1j * theta * lam / hbar))


def check_joint_dim(dim, cap=None):
    if cap is None:
        cap = config.get_settings().joint_dim_cap
    if dim > cap:
        raise DimensionOverflowError(f"joint dimension {dim} exceeds cap {cap}")
    return dim


def tensor_product(a, b, cap=None):
    """Kronecker product with the index of ``a`` varying slowest."""
    a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
    b = np.atleast_2d(np.asarray(b, dtype=np.complex128))
    check_joint_dim(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), cap)
    return np.kron(a, b)


def random_state(dim, seed):
    """Haar-random pure state: a normalized complex Gaussian vector."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(z / np.linalg.norm(z))


def random_hermitian(dim, seed):
    """Observable ``(M + M^dagger) / 2`` for a complex Gaussian matrix M."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Observable((m + m.conj().T) / 2)


def pauli(which):
    """Pauli matrix ``'x'``, ``'y'`` or ``'z'``."""
    return {
        "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
        "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
        "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    }[which]
