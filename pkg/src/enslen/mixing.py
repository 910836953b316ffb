"""The length-k mixing function and its differential.

A point of the domain is a weight vector ``(lambda_1, ..., lambda_{k-1})`` plus a
``k x p`` grid of one-particle states. The last term carries the implicit
weight ``1 - sum(lambda)``. Two parametrisations of the states are supported:

* ``general``: every component is a density matrix and moves in the traceless
  directions of its trace-one hyperplane;
* ``pure``: every component is a unit vector ``v`` (state ``vv^dag``) and moves
  along the ``2n-2`` real directions of projective space.

Jacobian columns are ordered weights first, then components in ``(j, i)``
row-major order, each block in the order of :func:`herm.traceless_basis` (general)
or :func:`pure_tangent_vectors` (pure). Rows are coordinates against the
orthonormal traceless basis of Herm(N).
"""
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ArgumentError
from .herm import (
    RANK_RTOL,
    TOL_PSD,
    SystemShape,
    check_density,
    fix_phase,
    numerical_rank,
    orthonormal_traceless_basis,
    sample_density,
    sample_pure_vector,
    tensor,
    traceless_basis,
)

MODELS = ("general", "pure")


def _check_weights(weights, tol=TOL_PSD):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise ArgumentError("weights must be a flat vector")
    if np.any(w < -tol):
        raise ArgumentError(f"weights must be nonnegative, got min {w.min():.3g}")
    if w.sum() > 1 + tol:
        raise ArgumentError(f"weights must sum to at most 1, got {w.sum():.12g}")
    return w


@dataclass
class GeneralEnsemble:
    """Weights plus a ``k x p`` grid of density matrices."""

    shape: SystemShape
    weights: np.ndarray
    components: list

    model = "general"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.components = [[np.asarray(A, dtype=complex) for A in row] for row in self.components]

    @property
    def k(self):
        return len(self.components)

    @property
    def full_weights(self):
        return np.append(self.weights, 1.0 - self.weights.sum())

    def states(self):
        return self.components

    def validate(self, tol=TOL_PSD):
        if self.k < 1:
            raise ArgumentError("ensemble needs at least one term")
        if len(self.weights) != self.k - 1:
            raise ArgumentError(f"expected {self.k - 1} weights, got {len(self.weights)}")
        _check_weights(self.weights, tol)
        for j, row in enumerate(self.components):
            if len(row) != self.shape.p:
                raise ArgumentError(f"term {j} has {len(row)} factors, shape has {self.shape.p}")
            for i, (A, n) in enumerate(zip(row, self.shape.dims)):
                if A.shape != (n, n):
                    raise ArgumentError(f"component ({j},{i}) has shape {A.shape}, expected {(n, n)}")
                check_density(A, tol, name=f"component ({j},{i})")
        return self


@dataclass
class PureEnsemble:
    """Weights plus a ``k x p`` grid of unit vectors (first nonzero entry real positive)."""

    shape: SystemShape
    weights: np.ndarray
    vectors: list

    model = "pure"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.vectors = [[fix_phase(np.asarray(v, dtype=complex)) for v in row] for row in self.vectors]

    @property
    def k(self):
        return len(self.vectors)

    @property
    def full_weights(self):
        return np.append(self.weights, 1.0 - self.weights.sum())

    def states(self):
        return [[np.outer(v, v.conj()) for v in row] for row in self.vectors]

    def to_general(self):
        return GeneralEnsemble(self.shape, self.weights.copy(), self.states())

    def validate(self, tol=TOL_PSD):
        if self.k < 1:
            raise ArgumentError("ensemble needs at least one term")
        if len(self.weights) != self.k - 1:
            raise ArgumentError(f"expected {self.k - 1} weights, got {len(self.weights)}")
        _check_weights(self.weights, tol)
        for j, row in enumerate(self.vectors):
            if len(row) != self.shape.p:
                raise ArgumentError(f"term {j} has {len(row)} factors, shape has {self.shape.p}")
            for i, (v, n) in enumerate(zip(row, self.shape.dims)):
                if v.shape != (n,):
                    raise ArgumentError(f"vector ({j},{i}) has shape {v.shape}, expected {(n,)}")
                if abs(np.linalg.norm(v) - 1) > 1e-12:
                    raise ArgumentError(f"vector ({j},{i}) is not unit norm")
        return self


def domain_dim(shape, k, model):
    """Real dimension of the weight-and-component domain."""
    if model == "general":
        per_term = sum(n * n - 1 for n in shape.dims)
    elif model == "pure":
        per_term = sum(2 * n - 2 for n in shape.dims)
    else:
        raise ArgumentError(f"unknown model {model!r}")
    return (k - 1) + k * per_term


def random_weights(k, rng):
    """Flat Dirichlet point on the k-simplex with the last coordinate dropped."""
    return rng.dirichlet(np.ones(k))[:-1]


def random_ensemble(shape, k, model, rng):
    weights = random_weights(k, rng)
    if model == "general":
        comps = [[sample_density(n, rng) for n in shape.dims] for _ in range(k)]
        return GeneralEnsemble(shape, weights, comps)
    if model == "pure":
        vecs = [[sample_pure_vector(n, rng) for n in shape.dims] for _ in range(k)]
        return PureEnsemble(shape, weights, vecs)
    raise ArgumentError(f"unknown model {model!r}")


def _mix_states(full_weights, states):
    return sum(w * tensor(row) for w, row in zip(full_weights, states))


def mix(ens):
    """Convex combination of the ensemble's product states."""
    ens.validate()
    return _mix_states(ens.full_weights, ens.states())


def pure_tangent_vectors(v):
    """Tangent vectors ``dv`` at ``v``: ``w_1, i w_1, w_2, i w_2, ...``.

    ``{w_m}`` is an orthonormal completion of ``v`` from a QR factorisation.
    """
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    Q, _ = np.linalg.qr(np.column_stack([v, np.eye(n)]))
    W = Q[:, 1:n]
    # re-orthogonalise against v for safety at round-off level
    W = W - np.outer(v, v.conj() @ W)
    out = np.empty((2 * n - 2, n), dtype=complex)
    out[0::2] = W.T
    out[1::2] = 1j * W.T
    return out


def pure_tangent_directions(v):
    """Hermitian images ``dv v^dag + v dv^dag`` of :func:`pure_tangent_vectors`."""
    v = np.asarray(v, dtype=complex)
    dvs = pure_tangent_vectors(v)
    return np.einsum("mi,j->mij", dvs, v.conj()) + np.einsum("i,mj->mij", v, dvs.conj())


@dataclass
class JacobianReport:
    matrix: np.ndarray
    rank: int
    singular_values: np.ndarray
    rel_tol: float
    model: str
    shape: SystemShape = field(repr=False)
    k: int = 0

    @property
    def domain_dim(self):
        return self.matrix.shape[1]

    @property
    def codomain_dim(self):
        return self.matrix.shape[0]

    @property
    def full_rank(self):
        return self.rank == self.codomain_dim


def _resolve_model(ens, model):
    if model is None:
        model = ens.model
    if model not in MODELS:
        raise ArgumentError(f"unknown model {model!r}")
    if model == "pure" and not isinstance(ens, PureEnsemble):
        raise ArgumentError("pure-model Jacobian needs a PureEnsemble")
    if model == "general" and isinstance(ens, PureEnsemble):
        ens = ens.to_general()
    return ens, model


def _jacobian_matrix(shape, full_weights, states, directions):
    """Assemble the Jacobian from states and per-component direction stacks."""
    k = len(states)
    products = [tensor(row) for row in states]
    cols = []
    if k > 1:
        diffs = np.array([products[j] - products[-1] for j in range(k - 1)])
        cols.append(_backend.herm_coords_stack(diffs))
    one = np.ones((1, 1), dtype=complex)
    for j, row in enumerate(states):
        for i in range(shape.p):
            L = tensor(row[:i]) if i > 0 else one
            R = tensor(row[i + 1:]) if i < shape.p - 1 else one
            cols.append(_backend.sandwich_coords(L, directions[j][i], R, full_weights[j]))
    return np.hstack(cols)


def _directions(ens, model):
    if model == "general":
        return [[traceless_basis(n) for n in ens.shape.dims] for _ in range(ens.k)]
    return [[pure_tangent_directions(v) for v in row] for row in ens.vectors]


def jacobian_matrix(ens, model=None):
    """Real matrix of the differential at ``ens`` (no validation)."""
    ens, model = _resolve_model(ens, model)
    return _jacobian_matrix(ens.shape, ens.full_weights, ens.states(), _directions(ens, model))


def jacobian(ens, model=None, rel_tol=RANK_RTOL):
    """Analytic differential of the mixing function and its numerical rank."""
    ens, model = _resolve_model(ens, model)
    ens.validate()
    J = _jacobian_matrix(ens.shape, ens.full_weights, ens.states(), _directions(ens, model))
    rank, s = numerical_rank(J, rel_tol)
    return JacobianReport(J, rank, s, rel_tol, model, ens.shape, ens.k)


def _explicit_coords(X, basis):
    # independent of the kernel path: tr(G X) against each orthonormal element
    return np.real(np.einsum("mij,ji->m", basis, X))


def jacobian_fd(ens, model=None, step=1e-5):
    """Central finite-difference Jacobian with the same column convention.

    Weight steps shrink to half the distance to the simplex boundary when the
    requested step would leave it.
    """
    if step <= 0:
        raise ArgumentError("step must be positive")
    ens, model = _resolve_model(ens, model)
    shape, k = ens.shape, ens.k
    basis = orthonormal_traceless_basis(shape.N)
    lam = ens.weights.copy()

    def image(weights, states):
        full = np.append(weights, 1.0 - np.sum(weights))
        return _explicit_coords(_mix_states(full, states), basis)

    cols = []
    base_states = ens.states()
    for j in range(k - 1):
        h = step
        slack = min(lam[j], 1.0 - lam.sum())
        if h > slack:
            h = 0.5 * slack
        up, dn = lam.copy(), lam.copy()
        up[j] += h
        dn[j] -= h
        cols.append((image(up, base_states) - image(dn, base_states)) / (2 * h))
    for j in range(k):
        for i, n in enumerate(shape.dims):
            if model == "general":
                A = ens.components[j][i]
                moves = [(A + step * E, A - step * E) for E in traceless_basis(n)]
            else:
                v = ens.vectors[j][i]
                moves = []
                for dv in pure_tangent_vectors(v):
                    vp = (v + step * dv) / np.linalg.norm(v + step * dv)
                    vm = (v - step * dv) / np.linalg.norm(v - step * dv)
                    moves.append((np.outer(vp, vp.conj()), np.outer(vm, vm.conj())))
            for Ap, Am in moves:
                sp = [list(r) for r in base_states]
                sm = [list(r) for r in base_states]
                sp[j][i] = Ap
                sm[j][i] = Am
                cols.append((image(lam, sp) - image(lam, sm)) / (2 * step))
    if not cols:
        return np.zeros((shape.codomain_dim, 0))
    return np.column_stack(cols)


def cokernel_witness(ens, model=None, rel_tol=RANK_RTOL):
    """Unit traceless Hermitian matrix orthogonal to every Jacobian column, or None."""
    ens, model = _resolve_model(ens, model)
    report = jacobian(ens, model, rel_tol)
    if report.full_rank:
        return None
    U, _, _ = np.linalg.svd(report.matrix, full_matrices=True)
    c = U[:, -1]
    W = np.tensordot(c, orthonormal_traceless_basis(ens.shape.N), axes=1)
    return W / np.linalg.norm(W)


def _null_space(M, rel_tol=RANK_RTOL):
    M = np.atleast_2d(M)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    tol = rel_tol * (s[0] if s.size else 0.0)
    r = int(np.sum(s > tol)) if s.size else 0
    return Vh[r:].T


def product_cokernel_witness(ens, rel_tol=RANK_RTOL):
    """Bipartite witness ``B (x) C`` with ``B`` orthogonal to every first factor
    and ``C`` traceless and orthogonal to the traceless parts of every second factor.

    Returns None when either complement is trivial.
    """
    if isinstance(ens, PureEnsemble):
        ens = ens.to_general()
    if ens.shape.p != 2:
        raise ArgumentError("product witness is defined for two particles")
    n1, n2 = ens.shape.dims
    full1 = np.concatenate([orthonormal_traceless_basis(n1), np.eye(n1)[None] / np.sqrt(n1)])
    first = np.array([_explicit_coords(row[0], full1) for row in ens.components])
    second = np.array([_explicit_coords(row[1], orthonormal_traceless_basis(n2)) for row in ens.components])
    nb = _null_space(first, rel_tol)
    nc = _null_space(second, rel_tol)
    if nb.shape[1] == 0 or nc.shape[1] == 0:
        return None
    B = np.tensordot(nb[:, 0], full1, axes=1)
    C = np.tensordot(nc[:, 0], orthonormal_traceless_basis(n2), axes=1)
    W = np.kron(B, C)
    return W / np.linalg.norm(W)
