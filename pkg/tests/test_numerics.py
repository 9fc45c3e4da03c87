import numpy as np
import pytest
from hypothesis import given, strategies as st

from entfid.numerics import (
    TOL_RECON,
    DimensionError,
    NotPSDError,
    ValidationError,
    complete_to_unitary,
    herm_eig,
    kron,
    partial_trace,
    sqrt_psd,
)
from entfid.states import density_from_pure, epr_state, random_density

from conftest import random_complex, random_hermitian

X = np.array([[0, 1], [1, 0]], dtype=complex)


def loop_partial_trace(m, d_a, d_b, keep):
    """Index-by-index oracle for a two-factor partial trace."""
    if keep == 0:
        out = np.zeros((d_a, d_a), dtype=complex)
        for i in range(d_a):
            for j in range(d_a):
                out[i, j] = sum(m[i * d_b + k, j * d_b + k] for k in range(d_b))
    else:
        out = np.zeros((d_b, d_b), dtype=complex)
        for i in range(d_b):
            for j in range(d_b):
                out[i, j] = sum(m[k * d_b + i, k * d_b + j] for k in range(d_a))
    return out


def test_kron_identity():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_block_structure():
    out = kron(np.diag([1, 0]), X)
    np.testing.assert_array_equal(out[:2, :2], X)
    assert np.all(out[2:, :] == 0) and np.all(out[:, 2:] == 0)


def test_kron_index_formula(rng):
    a, b = random_complex(rng, 2, 3), random_complex(rng, 3, 2)
    k = kron(a, b)
    assert k.shape == (6, 6)
    for i in range(2):
        for j in range(3):
            for p in range(3):
                for q in range(2):
                    assert abs(k[i * 3 + p, j * 2 + q] - a[i, j] * b[p, q]) <= 1e-14


def test_kron_trace_multiplicative(rng):
    a, b = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
    assert np.trace(kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (random_complex(rng, 2, 2) for _ in range(4))
    np.testing.assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)
    np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=0)


def test_partial_trace_product_state(rng):
    rho = random_density(3, 2, rng).matrix
    sigma = random_hermitian(rng, 2)
    out = partial_trace(kron(rho, sigma), [3, 2], keep={0})
    np.testing.assert_allclose(out, rho * np.trace(sigma), atol=1e-12)


def test_partial_trace_epr_is_maximally_mixed():
    joint = density_from_pure(epr_state()).matrix
    np.testing.assert_allclose(partial_trace(joint, [2, 2], keep={0}), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(partial_trace(joint, [2, 2], keep={1}), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_single_factor_is_identity(rng):
    m = random_hermitian(rng, 3)
    np.testing.assert_array_equal(partial_trace(m, [3], keep={0}), m)


@pytest.mark.parametrize("d_a,d_b", [(2, 2), (2, 3), (3, 2), (4, 1)])
def test_partial_trace_matches_loop_oracle(rng, d_a, d_b):
    m = random_complex(rng, d_a * d_b, d_a * d_b)
    for keep in (0, 1):
        np.testing.assert_allclose(
            partial_trace(m, [d_a, d_b], keep=keep), loop_partial_trace(m, d_a, d_b, keep), atol=1e-12
        )


def test_partial_trace_shape_mismatch():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), [2, 3], keep=0)


@given(seed=st.integers(0, 2**32 - 1), dims=st.lists(st.integers(1, 3), min_size=2, max_size=3))
def test_partial_trace_preserves_trace(seed, dims):
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    h = random_hermitian(rng, n)
    for keep in range(len(dims)):
        assert abs(np.trace(partial_trace(h, dims, keep=keep)) - np.trace(h)) <= 1e-12


@given(seed=st.integers(0, 2**32 - 1))
def test_partial_trace_sequential_equals_joint(seed):
    rng = np.random.default_rng(seed)
    dims = [2, 3, 2]
    h = random_hermitian(rng, 12)
    step = partial_trace(partial_trace(h, dims, keep=[0, 1]), [2, 3], keep=[0])
    np.testing.assert_allclose(step, partial_trace(h, dims, keep=[0]), atol=1e-12)


def test_herm_eig_diagonal():
    w, v = herm_eig(np.diag([3.0, 1.0]))
    np.testing.assert_array_equal(w, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(v), np.eye(2))


def test_herm_eig_pauli_x():
    w, _ = herm_eig(X)
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-15)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        herm_eig(np.array([[0, 1], [0, 0]]))


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 16))
def test_herm_eig_reconstruction(seed, n):
    h = random_hermitian(np.random.default_rng(seed), n)
    w, v = herm_eig(h)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=TOL_RECON)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=TOL_RECON)


def test_sqrt_psd_diagonal():
    np.testing.assert_allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-15)


def test_sqrt_psd_identity():
    np.testing.assert_allclose(sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)


def test_sqrt_psd_squares_back(rng):
    rho = random_density(3, 3, rng).matrix
    r = sqrt_psd(rho)
    np.testing.assert_allclose(r, r.conj().T, atol=1e-14)
    np.testing.assert_allclose(r @ r, rho, atol=1e-10)


def test_sqrt_psd_clamps_tiny_negative():
    r = sqrt_psd(np.diag([1.0, -5e-10]))
    np.testing.assert_array_equal(r, np.diag([1.0, 0.0]))


def test_sqrt_psd_rejects_negative():
    with pytest.raises(NotPSDError):
        sqrt_psd(np.diag([1.0, -1e-3]))


def test_complete_to_unitary_keeps_prescribed_columns(rng):
    q, _ = np.linalg.qr(random_complex(rng, 6, 2))
    u = complete_to_unitary(q, [0, 3], 6)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(6), atol=1e-12)
    np.testing.assert_array_equal(u[:, 0], q[:, 0])
    np.testing.assert_array_equal(u[:, 3], q[:, 1])
