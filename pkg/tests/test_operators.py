import numpy as np
import pytest

from localiser_lab import (
    DENSE_LIMIT,
    HermitianMatrix,
    apply_function,
    compress,
    eig,
    operator_norm,
    spectral_projection,
)
from localiser_lab.errors import BoundaryEigenvalue, DimensionMismatch, DimensionTooLarge, IndexOutOfRange

from conftest import random_hermitian


def test_eig_diagonal_input():
    es = eig(HermitianMatrix.from_dense(np.diag([2.0, 1.0])))
    assert np.allclose(es.eigenvalues, [1.0, 2.0])
    # permutation eigenvectors
    assert np.allclose(np.abs(es.eigenvectors), [[0, 1], [1, 0]])


def test_eig_pauli_x():
    es = eig(HermitianMatrix.from_dense(np.array([[0.0, 1.0], [1.0, 0.0]])))
    assert np.allclose(es.eigenvalues, [-1.0, 1.0])


def test_eig_reconstruction_and_orthonormality(rng):
    h = random_hermitian(rng, 50)
    es = eig(HermitianMatrix.from_dense(h))
    scale = operator_norm(h)
    assert operator_norm(es.reconstruct() - h) <= 1e-10 * 50 * scale
    v = es.eigenvectors
    assert operator_norm(v.conj().T @ v - np.eye(50)) <= 1e-12 * 50
    assert np.all(np.diff(es.eigenvalues) >= 0)


def test_eig_rejects_above_dense_limit():
    big = HermitianMatrix.from_diagonal(np.zeros(DENSE_LIMIT + 1))
    with pytest.raises(DimensionTooLarge):
        eig(big)


def test_from_dense_rejects_non_hermitian():
    with pytest.raises(DimensionMismatch):
        HermitianMatrix.from_dense(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_apply_function_identity_and_constant(rng):
    h = HermitianMatrix.from_dense(random_hermitian(rng, 12))
    assert operator_norm(apply_function(h, lambda x: x).to_dense() - h.to_dense()) < 1e-13
    assert operator_norm(apply_function(h, np.ones_like).to_dense() - np.eye(12)) < 1e-13


def test_apply_function_zero_matrix_c_function():
    from localiser_lab.shift_analysis import sym_c

    h = HermitianMatrix.from_dense(np.zeros((5, 5)))
    out = apply_function(h, sym_c)
    # c(0)^2 = 1/2 is forced by c^2 + s^2 = 1 and the symmetry c(0) = s(0)
    assert operator_norm(out.to_dense() - np.sqrt(0.5) * np.eye(5)) < 1e-14


def test_apply_function_diagonal_fast_path():
    h = HermitianMatrix.from_diagonal(np.array([-2.0, 0.5, 3.0]))
    out = apply_function(h, lambda x: x**2)
    assert out.is_diagonal
    assert np.allclose(out.diagonal(), [4.0, 0.25, 9.0])


def test_functional_calculus_is_algebra_morphism(rng):
    h = HermitianMatrix.from_dense(random_hermitian(rng, 50))
    f, g = np.cos, np.sin
    lhs = apply_function(h, lambda x: f(x) * g(x)).to_dense()
    rhs = apply_function(h, f).to_dense() @ apply_function(h, g).to_dense()
    assert operator_norm(lhs - rhs) <= 1e-9 * 1.0 * 1.0 * 50


def test_spectral_projection_basic():
    h = HermitianMatrix.from_dense(np.diag([-2.0, 0.0, 3.0]))
    p = spectral_projection(h, (-1.0, 1.0))
    assert np.allclose(p.to_dense(), np.diag([0.0, 1.0, 0.0]))


def test_spectral_projection_full_interval_is_identity(rng):
    h = HermitianMatrix.from_dense(random_hermitian(rng, 9))
    w = np.linalg.eigvalsh(h.to_dense())
    p = spectral_projection(h, (w[0] - 1.0, w[-1] + 1.0))
    assert operator_norm(p.to_dense() - np.eye(9)) < 1e-12


def test_spectral_projection_circle_rank():
    # D has one eigenvalue per integer in [-N, N]; [-10.5, 10.5] holds 21
    d = HermitianMatrix.from_diagonal(np.arange(-50, 51).astype(float))
    p = spectral_projection(d, (-10.5, 10.5))
    expected_rank = sum(1 for n in range(-50, 51) if -10.5 <= n <= 10.5)
    assert expected_rank == 21
    assert round(float(np.trace(p.to_dense()))) == expected_rank


def test_spectral_projection_boundary_collision():
    d = HermitianMatrix.from_diagonal(np.arange(-50, 51).astype(float))
    with pytest.raises(BoundaryEigenvalue) as info:
        spectral_projection(d, (-20.0, 20.0))
    assert info.value.eigenvalue in (-20.0, 20.0)
    assert info.value.distance < 1e-9


def test_spectral_projection_is_projection_and_intersects(rng):
    h = HermitianMatrix.from_dense(random_hermitian(rng, 40))
    w = np.linalg.eigvalsh(h.to_dense())
    a = (w[5] + w[6]) / 2
    b = (w[20] + w[21]) / 2
    c = (w[30] + w[31]) / 2
    p_ab = spectral_projection(h, (a, c)).to_dense()
    p_bc = spectral_projection(h, (b, c)).to_dense()
    p_cap = spectral_projection(h, (b, c)).to_dense()
    assert operator_norm(p_ab @ p_ab - p_ab) <= 1e-12
    assert operator_norm(p_ab - p_ab.conj().T) <= 1e-12
    assert operator_norm(p_ab @ p_bc - p_cap) <= 1e-10


def test_operator_norm_examples(rng):
    assert operator_norm(np.eye(7)) == pytest.approx(1.0)
    assert operator_norm(np.zeros((4, 6))) == 0.0
    u = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    u *= 2.0 / np.linalg.norm(u)
    outer = np.outer(u, u.conj())
    # the only nonzero singular value of u u* is |u|^2
    assert operator_norm(outer) == pytest.approx(4.0, rel=1e-10)


def test_operator_norm_submultiplicative(rng):
    for _ in range(10):
        a = rng.standard_normal((15, 15))
        b = rng.standard_normal((15, 15))
        assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-10


def test_compress_identity_and_blocks(rng):
    m = rng.standard_normal((6, 6))
    assert np.array_equal(compress(m, np.arange(6), np.arange(6)), m)
    top_left = compress(m, np.arange(3), np.arange(3))
    assert np.array_equal(top_left, m[:3, :3])
    # compress of compress composes as intersection
    once = compress(m, np.arange(4), np.arange(4))
    twice = compress(once, np.arange(2), np.arange(2))
    assert np.array_equal(twice, compress(m, np.arange(2), np.arange(2)))


def test_compress_out_of_range(rng):
    m = rng.standard_normal((4, 4))
    with pytest.raises(IndexOutOfRange):
        compress(m, [0, 4], [0])
