"""Hermitian-matrix algebra on tensor-product spaces.

Matrices are plain complex ``numpy`` arrays. The helpers here cover Kronecker
products, the trace hyperplanes, the Hilbert-Schmidt inner product, the
generalized Gell-Mann basis, Hilbert-Schmidt and Haar sampling, and the
rank/positivity tests used everywhere else.
"""
from dataclasses import dataclass
from functools import lru_cache, reduce
from math import prod

import numpy as np

from . import _backend
from .errors import ArgumentError

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-10
RANK_RTOL = 1e-8


@dataclass(frozen=True)
class SystemShape:
    """Particle dimensions ``(n_1, ..., n_p)`` of a composite system."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise ArgumentError("shape needs at least one particle")
        if any(d < 2 for d in dims):
            raise ArgumentError(f"every particle dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def parse(cls, text):
        """Parse ``"2,3"`` into ``SystemShape((2, 3))``."""
        try:
            dims = tuple(int(t) for t in str(text).split(",") if t.strip())
        except ValueError as exc:
            raise ArgumentError(f"bad shape {text!r}") from exc
        return cls(dims)

    @property
    def p(self):
        return len(self.dims)

    @property
    def N(self):
        return prod(self.dims)

    @property
    def codomain_dim(self):
        """Dimension of the traceless subspace of Herm(N)."""
        return self.N**2 - 1

    @property
    def is_sorted(self):
        return all(a <= b for a, b in zip(self.dims, self.dims[1:]))

    @property
    def thm1_applicable(self):
        """Ascending dims with the last particle at least as large as the rest combined."""
        return self.is_sorted and prod(self.dims[:-1]) <= self.dims[-1]

    def __str__(self):
        return ",".join(str(d) for d in self.dims)


def is_hermitian(A, tol=TOL_HERM):
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.max(np.abs(A - A.conj().T), initial=0.0) <= tol


def check_hermitian(A, tol=TOL_HERM, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ArgumentError(f"{name} must be square, got shape {A.shape}")
    if not is_hermitian(A, tol):
        raise ArgumentError(f"{name} is not Hermitian within {tol:g}")
    return A


def tensor(factors):
    """Kronecker product of ``factors`` in the listed order."""
    factors = list(factors)
    if not factors:
        raise ArgumentError("tensor of an empty list")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def project_traceless(A):
    """Orthogonal projection onto the traceless hyperplane: ``A - tr(A)/w * I``."""
    A = np.asarray(A, dtype=complex)
    w = A.shape[0]
    return A - (np.trace(A) / w) * np.eye(w)


def hs_inner(A, B):
    """Hilbert-Schmidt inner product ``tr(AB)`` (real part for Hermitian inputs)."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ArgumentError(f"dimension mismatch {A.shape} vs {B.shape}")
    # tr(AB) = sum_ij A_ij B_ji
    return float(np.real(np.sum(A * B.T)))


def hs_norm(A):
    return float(np.linalg.norm(np.asarray(A)))


@lru_cache(maxsize=None)
def _gellmann(w):
    mats = []
    pairs = [(i, j) for i in range(w) for j in range(i + 1, w)]
    for i, j in pairs:
        G = np.zeros((w, w), dtype=complex)
        G[i, j] = G[j, i] = 1.0
        mats.append(G)
    for i, j in pairs:
        G = np.zeros((w, w), dtype=complex)
        G[i, j] = -1j
        G[j, i] = 1j
        mats.append(G)
    for l in range(1, w):
        d = np.zeros(w)
        d[:l] = 1.0
        d[l] = -l
        mats.append(np.diag(np.sqrt(2.0 / (l * (l + 1))) * d).astype(complex))
    out = np.array(mats)
    out.setflags(write=False)
    return out


def traceless_basis(w):
    """Generalized Gell-Mann basis of the traceless ``w x w`` Hermitian matrices.

    Order: symmetric pairs ``(i<j)``, antisymmetric pairs, then the diagonal
    ladder. Every element has Hilbert-Schmidt norm ``sqrt(2)``.

    Returns
    -------
    (w*w-1, w, w) complex array
    """
    if int(w) < 2:
        raise ArgumentError(f"traceless basis needs w >= 2, got {w}")
    return _gellmann(int(w)).copy()


def orthonormal_traceless_basis(w):
    return traceless_basis(w) / np.sqrt(2.0)


def traceless_coords(X):
    """Coordinates of ``X`` in the orthonormal traceless basis (trace part dropped)."""
    return _backend.herm_coords(np.asarray(X, dtype=complex))


def from_traceless_coords(c, w):
    """Inverse of :func:`traceless_coords` on the traceless subspace."""
    return np.tensordot(np.asarray(c, dtype=float), orthonormal_traceless_basis(w), axes=1)


def pure_density_basis(w):
    """``w**2`` rank-one projectors spanning Herm(w).

    Projectors onto ``|i>``, then ``(|i>+|j>)/sqrt2`` and ``(|i>+i|j>)/sqrt2``
    for ``i<j``.
    """
    if int(w) < 2:
        raise ArgumentError(f"pure density basis needs w >= 2, got {w}")
    eye = np.eye(w, dtype=complex)
    vecs = [eye[i] for i in range(w)]
    pairs = [(i, j) for i in range(w) for j in range(i + 1, w)]
    vecs += [(eye[i] + eye[j]) / np.sqrt(2) for i, j in pairs]
    vecs += [(eye[i] + 1j * eye[j]) / np.sqrt(2) for i, j in pairs]
    return np.array([np.outer(v, v.conj()) for v in vecs])


def gram_matrix(mats):
    """Real Gram matrix ``tr(A_i A_j)`` of a stack of Hermitian matrices."""
    mats = np.asarray(mats, dtype=complex)
    flat = mats.reshape(len(mats), -1)
    return np.real(flat.conj() @ flat.T)


def sample_density(w, rng):
    """Hilbert-Schmidt random density matrix ``GG^dag / tr(GG^dag)``."""
    G = rng.standard_normal((w, w)) + 1j * rng.standard_normal((w, w))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def sample_pure_vector(w, rng):
    """Haar-random unit vector in ``C^w``, first nonzero coordinate real positive."""
    v = rng.standard_normal(w) + 1j * rng.standard_normal(w)
    return fix_phase(v / np.linalg.norm(v))


def sample_pure(w, rng):
    v = sample_pure_vector(w, rng)
    return np.outer(v, v.conj())


def fix_phase(v, tol=1e-14):
    v = np.asarray(v, dtype=complex)
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size == 0:
        return v
    z = v[nz[0]]
    return v * (abs(z) / z)


def numerical_rank(M, rel_tol=RANK_RTOL):
    """Count singular values above ``rel_tol * sigma_max``.

    Returns
    -------
    rank : int
    singular_values : ndarray, descending
    """
    if rel_tol <= 0:
        raise ArgumentError("rel_tol must be positive")
    M = np.asarray(M)
    if M.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0, s
    return int(np.sum(s > rel_tol * s[0])), s


def min_eigenvalue(A):
    A = np.asarray(A, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (A + A.conj().T))[0])


def is_density(A, tol=TOL_PSD):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not is_hermitian(A, max(tol, TOL_HERM)):
        return False
    return abs(np.trace(A) - 1) <= tol and min_eigenvalue(A) >= -tol


def check_density(A, tol=TOL_PSD, name="matrix"):
    A = check_hermitian(A, name=name)
    tr = np.trace(A).real
    if abs(tr - 1) > TOL_TRACE:
        raise ArgumentError(f"{name} has trace {tr:.3g}, expected 1")
    lo = min_eigenvalue(A)
    if lo < -tol:
        raise ArgumentError(f"{name} has negative eigenvalue {lo:.3g}")
    return A


def partial_transpose(A, dims, sys=1):
    """Transpose the tensor factor ``sys`` of ``A`` (oracle use only)."""
    dims = list(dims)
    p = len(dims)
    T = np.asarray(A).reshape(dims + dims)
    axes = list(range(2 * p))
    axes[sys], axes[p + sys] = axes[p + sys], axes[sys]
    N = prod(dims)
    return T.transpose(axes).reshape(N, N)


def is_ppt(A, dims, tol=TOL_PSD):
    """True when every single-factor partial transpose is positive semidefinite."""
    return all(min_eigenvalue(partial_transpose(A, dims, s)) >= -tol for s in range(len(dims)))
