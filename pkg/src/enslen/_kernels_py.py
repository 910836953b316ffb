"""Pure numpy implementations of the coordinate kernels.

Coordinates of a Hermitian ``N x N`` matrix are taken against the
orthonormalised generalized Gell-Mann basis of the traceless subspace, in the
order: symmetric pairs (i<j), antisymmetric pairs (i<j), diagonal ladder.
The compiled module ``_kernels`` exposes the same two functions.
"""
from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def _index_tables(N):
    iu, ju = np.triu_indices(N, k=1)
    # diagonal ladder l = 1..N-1: (sum_{a<l} X_aa - l X_ll) / sqrt(l(l+1))
    ladder = np.zeros((N - 1, N))
    for l in range(1, N):
        ladder[l - 1, :l] = 1.0
        ladder[l - 1, l] = -l
        ladder[l - 1] /= np.sqrt(l * (l + 1))
    return iu, ju, ladder


def herm_coords(X):
    """Traceless coordinates of a single Hermitian matrix, shape ``(N*N-1,)``."""
    X = np.asarray(X, dtype=complex)
    return herm_coords_stack(X[None])[:, 0]


def herm_coords_stack(Xs):
    """Coordinates of a stack ``(m, N, N)``; returns ``(N*N-1, m)``."""
    Xs = np.asarray(Xs, dtype=complex)
    N = Xs.shape[-1]
    iu, ju, ladder = _index_tables(N)
    upper = Xs[:, iu, ju]
    diag = Xs[:, np.arange(N), np.arange(N)].real
    out = np.concatenate(
        [SQRT2 * upper.real, -SQRT2 * upper.imag, diag @ ladder.T], axis=1
    )
    return np.ascontiguousarray(out.T)


def sandwich_coords(L, D, R, weight):
    """Coordinates of ``weight * kron(L, D[m], R)`` for every ``m``.

    Parameters
    ----------
    L : (a, a) complex array
    D : (m, n, n) complex array
    R : (b, b) complex array
    weight : float

    Returns
    -------
    (N*N-1, m) float array with N = a*n*b.
    """
    L = np.asarray(L, dtype=complex)
    D = np.asarray(D, dtype=complex)
    R = np.asarray(R, dtype=complex)
    a, n, b = L.shape[0], D.shape[1], R.shape[0]
    m = D.shape[0]
    full = np.einsum("xu,myv,zw->mxyzuvw", L, D, R).reshape(m, a * n * b, a * n * b)
    return weight * herm_coords_stack(full)
