import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_hermitian
from enslen.errors import ArgumentError
from enslen.herm import (
    SystemShape,
    from_traceless_coords,
    gram_matrix,
    hs_inner,
    is_density,
    is_ppt,
    numerical_rank,
    orthonormal_traceless_basis,
    partial_transpose,
    project_traceless,
    pure_density_basis,
    sample_density,
    sample_pure,
    tensor,
    traceless_basis,
    traceless_coords,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


class TestSystemShape:
    def test_derived(self):
        s = SystemShape((2, 3, 4))
        assert (s.p, s.N, s.codomain_dim) == (3, 24, 575)

    @pytest.mark.parametrize("dims", [(), (1, 2), (2, 0)])
    def test_rejects(self, dims):
        with pytest.raises(ArgumentError):
            SystemShape(dims)

    @pytest.mark.parametrize(
        "dims, flag",
        [((2, 2), True), ((2, 3), True), ((3, 2), False), ((2, 2, 2), False), ((2, 2, 4), True), ((2, 3, 5), False)],
    )
    def test_thm1_flag(self, dims, flag):
        assert SystemShape(dims).thm1_applicable is flag

    def test_parse(self):
        assert SystemShape.parse("2, 3") == SystemShape((2, 3))
        with pytest.raises(ArgumentError):
            SystemShape.parse("2,x")


def test_tensor_identities():
    np.testing.assert_allclose(tensor([np.eye(2) / 2, np.eye(2) / 2]), np.eye(4) / 4)
    np.testing.assert_allclose(tensor([np.diag([1, 0]), np.diag([0, 1])]), np.diag([0, 1, 0, 0]))
    with pytest.raises(ArgumentError):
        tensor([])


def test_tensor_trace_multiplicative(rng):
    for _ in range(50):
        A, B = random_hermitian(rng, 2), random_hermitian(rng, 3)
        T = tensor([A, B])
        # direct multiplication oracle: sum of diagonal products
        expected = sum(A[i, i] * B[j, j] for i in range(2) for j in range(3))
        assert abs(np.trace(T) - expected) <= 1e-12 * max(1, abs(expected))
        assert abs(np.trace(T) - np.trace(A) * np.trace(B)) <= 1e-12 * max(1, abs(expected))


def test_tensor_associative(rng):
    A, B, C = (random_hermitian(rng, n) for n in (2, 3, 2))
    left = tensor([tensor([A, B]), C])
    right = tensor([A, tensor([B, C])])
    assert np.max(np.abs(left - right)) <= 1e-14 * np.max(np.abs(left)) * 10
    assert np.max(np.abs(tensor([A, B, C]) - left)) <= 1e-14


def test_project_traceless():
    np.testing.assert_allclose(project_traceless(np.eye(2) / 2), np.zeros((2, 2)))
    np.testing.assert_allclose(project_traceless(np.diag([1.0, 0.0])), np.diag([0.5, -0.5]))


def test_project_traceless_idempotent(rng):
    for _ in range(100):
        A = random_hermitian(rng, int(rng.integers(2, 6)))
        P = project_traceless(A)
        assert np.max(np.abs(project_traceless(P) - P)) <= 1e-14
        assert abs(hs_inner(P, np.eye(len(P)))) <= 1e-12


def test_hs_inner():
    assert hs_inner(np.eye(2), np.eye(2)) == 2
    assert hs_inner(SX, SZ) == 0
    with pytest.raises(ArgumentError):
        hs_inner(np.eye(2), np.eye(3))


def test_hs_inner_positive(rng):
    for _ in range(100):
        A = random_hermitian(rng, 4)
        # eigenvalue oracle: tr(A^2) = sum of squared eigenvalues
        assert hs_inner(A, A) >= 0
        assert hs_inner(A, A) == pytest.approx(np.sum(np.linalg.eigvalsh(A) ** 2), rel=1e-12)


@pytest.mark.parametrize("w", [2, 3, 4, 5])
def test_traceless_basis(w):
    B = traceless_basis(w)
    assert B.shape == (w * w - 1, w, w)
    for E in B:
        assert abs(np.trace(E)) <= 1e-14
        assert np.allclose(E, E.conj().T)
    G = gram_matrix(B)
    np.testing.assert_allclose(G, 2 * np.eye(w * w - 1), atol=1e-14)
    full = np.concatenate([orthonormal_traceless_basis(w), np.eye(w)[None] / np.sqrt(w)])
    np.testing.assert_allclose(gram_matrix(full), np.eye(w * w), atol=1e-14)


def test_traceless_basis_small_cases():
    B = traceless_basis(2)
    assert len(B) == 3
    assert all(hs_inner(B[i], B[j]) == 0 for i in range(3) for j in range(3) if i != j)
    assert numerical_rank(gram_matrix(traceless_basis(3)))[0] == 8
    with pytest.raises(ArgumentError):
        traceless_basis(1)


def test_traceless_basis_order():
    B = traceless_basis(3)
    # symmetric (0,1), (0,2), (1,2); antisymmetric same pairs; diagonal ladder
    assert B[0][0, 1] == 1 and B[2][1, 2] == 1
    assert B[3][0, 1] == -1j and B[3][1, 0] == 1j
    np.testing.assert_allclose(np.diag(B[6]).real, [1, -1, 0])
    np.testing.assert_allclose(np.diag(B[7]).real, np.array([1, 1, -2]) / np.sqrt(3))


@pytest.mark.parametrize("w", [2, 3, 4])
def test_pure_density_basis(w):
    P = pure_density_basis(w)
    assert len(P) == w * w
    for rho in P:
        assert abs(np.trace(rho) - 1) <= 1e-14
        assert numerical_rank(rho)[0] == 1
    assert numerical_rank(gram_matrix(P))[0] == w * w


def test_coords_roundtrip(rng):
    for w in (2, 3, 5):
        X = project_traceless(random_hermitian(rng, w))
        c = traceless_coords(X)
        explicit = np.array([hs_inner(G, X) for G in orthonormal_traceless_basis(w)])
        np.testing.assert_allclose(c, explicit, atol=1e-13)
        np.testing.assert_allclose(from_traceless_coords(c, w), X, atol=1e-13)
        assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(X), rel=1e-12)


def test_sample_density(rng):
    for _ in range(100):
        rho = sample_density(4, rng)
        assert abs(np.trace(rho) - 1) <= 1e-12
        assert np.linalg.eigvalsh(rho)[0] > 0
        assert is_density(rho)
    for _ in range(100):
        assert is_density(sample_density(6, rng), 1e-10)


def test_sample_density_deterministic():
    a = sample_density(3, np.random.default_rng(5))
    b = sample_density(3, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_sample_density_mean():
    rng = np.random.default_rng(11)
    mean = sum(sample_density(2, rng) for _ in range(10_000)) / 10_000
    assert np.max(np.abs(mean - np.eye(2) / 2)) <= 0.02


def test_sample_pure(rng):
    for _ in range(100):
        rho = sample_pure(3, rng)
        ev = np.linalg.eigvalsh(rho)
        assert np.sum(ev > 1e-10) == 1
        assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.array_equal(sample_pure(3, np.random.default_rng(2)), sample_pure(3, np.random.default_rng(2)))


def test_numerical_rank_examples(rng):
    r, s = numerical_rank(np.eye(5), 1e-8)
    assert r == 5 and np.allclose(s, 1)
    r, s = numerical_rank(np.zeros((3, 3)), 1e-8)
    assert r == 0 and np.all(s == 0)
    M = rng.standard_normal((10, 4)) @ rng.standard_normal((4, 10))
    assert numerical_rank(M)[0] == 4
    r, s = numerical_rank(rng.standard_normal((6, 3)))
    assert np.all(np.diff(s) <= 0)
    with pytest.raises(ArgumentError):
        numerical_rank(np.eye(2), 0)


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (6, 5), elements=st.floats(-10, 10)),
    st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3),
)
def test_numerical_rank_scale_invariant(M, scale):
    assert numerical_rank(M)[0] == numerical_rank(scale * M)[0]


def test_is_density():
    assert is_density(np.eye(4) / 4, 1e-10)
    assert not is_density(np.diag([2.0, -1.0]), 1e-10)
    assert not is_density(np.array([[0.5, 1.0], [0.0, 0.5]]))


def test_partial_transpose_bell():
    phi = np.zeros(4)
    phi[[0, 3]] = 1 / np.sqrt(2)
    bell = np.outer(phi, phi)
    pt = partial_transpose(bell, (2, 2), 1)
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5)
    assert not is_ppt(bell, (2, 2))
    assert is_ppt(np.eye(4) / 4, (2, 2))
