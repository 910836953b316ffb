import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_hermitian
from enslen import _backend, _kernels_py
from enslen.herm import orthonormal_traceless_basis, tensor

BACKENDS = _backend.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def kernels(request):
    return BACKENDS[request.param]


def test_compiled_backend_built():
    # the extension ships with the package; a missing build is a packaging bug
    assert "cython" in BACKENDS


@pytest.mark.parametrize("N", [2, 3, 4, 6, 8])
def test_herm_coords_against_basis(kernels, rng, N):
    X = random_hermitian(rng, N)
    expected = np.array([np.real(np.trace(G @ X)) for G in orthonormal_traceless_basis(N)])
    np.testing.assert_allclose(kernels.herm_coords(X), expected, atol=1e-12)


def test_herm_coords_stack(kernels, rng):
    Xs = np.array([random_hermitian(rng, 4) for _ in range(5)])
    out = kernels.herm_coords_stack(Xs)
    assert out.shape == (15, 5)
    for c in range(5):
        np.testing.assert_allclose(out[:, c], kernels.herm_coords(Xs[c]), atol=1e-14)


@pytest.mark.parametrize("a, n, b", [(1, 2, 1), (1, 2, 3), (2, 3, 1), (2, 2, 2), (3, 3, 1)])
def test_sandwich_against_kron(kernels, rng, a, n, b):
    L = random_hermitian(rng, a)
    R = random_hermitian(rng, b)
    D = np.array([random_hermitian(rng, n) for _ in range(4)])
    out = kernels.sandwich_coords(L, D, R, 0.37)
    for m in range(4):
        X = 0.37 * tensor([L, D[m], R])
        np.testing.assert_allclose(out[:, m], _kernels_py.herm_coords(X), atol=1e-12)


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend unavailable")
    L, R = random_hermitian(rng, 2), random_hermitian(rng, 3)
    D = np.array([random_hermitian(rng, 2) for _ in range(3)])
    a = BACKENDS["cython"].sandwich_coords(L, D, R, 1.5)
    b = BACKENDS["python"].sandwich_coords(L, D, R, 1.5)
    assert np.max(np.abs(a - b)) <= 1e-13


def test_env_forces_fallback():
    env = dict(os.environ, ENSLEN_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import enslen; print(enslen.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
