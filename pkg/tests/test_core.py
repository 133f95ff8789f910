import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backaction_lab import config
from backaction_lab.core import (
    Observable,
    StateVector,
    as_state,
    check_hermitian,
    is_unitary,
    pauli,
    random_hermitian,
    random_state,
    tensor_product,
    unitary_from_generator,
)
from backaction_lab.errors import DimensionOverflowError, NotHermitianError


def test_half_sigma_z_full_turn_is_minus_identity():
    U = unitary_from_generator(pauli("z") / 2, 2 * np.pi)
    assert np.allclose(U, -np.eye(2), atol=1e-14, rtol=0)


def test_diagonal_generator_gives_diagonal_phases():
    U = unitary_from_generator(np.diag([1.0, 2.0, 3.0]), 0.7)
    expected = np.diag(np.exp(-0.7j * np.array([1.0, 2.0, 3.0])))
    assert np.max(np.abs(U - expected)) < 1e-14


def test_hbar_scales_generator():
    G = random_hermitian(4, 3).matrix
    with config.using(hbar=2.0):
        U2 = unitary_from_generator(G, 0.9)
    assert np.allclose(U2, unitary_from_generator(G, 0.45), atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), t1=st.floats(-5, 5), t2=st.floats(-5, 5))
def test_one_parameter_group_law(seed, t1, t2):
    G = random_hermitian(5, seed)
    U = unitary_from_generator
    assert is_unitary(U(G, t1))
    assert np.max(np.abs(U(G, t1) @ U(G, t2) - U(G, t1 + t2))) < 1e-12


def test_reconstruction_and_projectors():
    A = random_hermitian(6, 11)
    assert np.max(np.abs(A.decomposition.reconstruct() - A.matrix)) < 1e-12
    total = sum(P for _, P in A.spectrum)
    assert np.allclose(total, np.eye(6), atol=1e-12)
    weighted = sum(a * P for a, P in A.spectrum)
    assert np.allclose(weighted, A.matrix, atol=1e-12)


def test_degenerate_eigenvalues_are_grouped():
    A = Observable(np.diag([1.0, 1.0 + 1e-13, -2.0]))
    assert len(A.spectrum) == 2
    P = A.eigenprojector(1.0)
    assert np.allclose(P, np.diag([1, 1, 0]))


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError):
        Observable(np.array([[0, 1], [0, 0]]))
    # Relative tolerance: tiny asymmetry on a large matrix is accepted.
    m = 1e6 * pauli("x")
    m[0, 1] += 1e-8
    check_hermitian(m)


def test_tensor_product_ordering():
    # Joint basis index s * dim(meter) + m: system index slowest.
    up, down = np.eye(2)
    b0, b1, b2 = np.eye(3)
    joint = tensor_product(down[:, None], b1[:, None]).ravel()
    assert np.argmax(np.abs(joint)) == 1 * 3 + 1
    assert np.allclose(tensor_product(pauli("z"), np.eye(3)), np.diag([1, 1, 1, -1, -1, -1]))


def test_tensor_product_cap():
    with pytest.raises(DimensionOverflowError):
        tensor_product(np.eye(4), np.eye(4), cap=15)
    with config.using(joint_dim_cap=8):
        with pytest.raises(DimensionOverflowError):
            tensor_product(np.eye(3), np.eye(3))


def test_state_vector_validation():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]))
    s = StateVector(np.array([1.0, 1.0]), normalized=False)
    assert s.norm == pytest.approx(np.sqrt(2))
    assert s.normalize().norm == pytest.approx(1.0)
    with pytest.raises(ValueError):
        as_state(s)
    with pytest.raises(ValueError):
        StateVector.from_amplitudes([0, 0])
    with pytest.raises(ValueError):
        s.amplitudes[0] = 3


def test_random_objects_are_seeded():
    assert np.array_equal(random_state(4, 9).amplitudes, random_state(4, 9).amplitudes)
    assert np.array_equal(random_hermitian(4, 9).matrix, random_hermitian(4, 9).matrix)
    assert not np.array_equal(random_state(4, 9).amplitudes, random_state(4, 10).amplitudes)
    assert random_state(7, 1).norm == pytest.approx(1.0, abs=1e-14)


def test_overlap_is_antilinear_in_bra():
    a, b = random_state(3, 1), random_state(3, 2)
    assert a.overlap(b) == pytest.approx(np.conj(b.overlap(a)))
