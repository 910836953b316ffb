"""Closed-form length thresholds, Jacobian rank scans and explicit constructions."""
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

import numpy as np

from .errors import ConstructionError, PreconditionError
from .herm import (
    RANK_RTOL,
    SystemShape,
    gram_matrix,
    min_eigenvalue,
    numerical_rank,
    pure_density_basis,
    traceless_basis,
    traceless_coords,
)
from .mixing import GeneralEnsemble, domain_dim, jacobian, random_ensemble
from .parallel import parallel_map, sample_rng

INT64_MAX = 2**63 - 1


def _checked(q):
    q = Fraction(q)
    if abs(q.numerator) > INT64_MAX or q.denominator > INT64_MAX:
        raise OverflowError(f"rational {q} does not fit in 64 bits")
    return q


@dataclass(frozen=True)
class ThresholdReport:
    shape: SystemShape
    caratheodory: int
    uhlmann_max_rank: int
    thm1_applicable: bool
    thm1_open_at: int | None
    thm2_open_at: int
    thm2_zero_below: Fraction
    thm3_zero_below: Fraction
    general_slope: int
    pure_slope: int

    def general_domain_dim(self, k):
        return self.general_slope * k - 1

    def pure_domain_dim(self, k):
        return self.pure_slope * k - 1

    def as_dict(self):
        return {
            "dims": list(self.shape.dims),
            "N": self.shape.N,
            "caratheodory": self.caratheodory,
            "uhlmann_max_rank": self.uhlmann_max_rank,
            "thm1_applicable": self.thm1_applicable,
            "thm1_open_at": self.thm1_open_at,
            "thm2_open_at": self.thm2_open_at,
            "thm2_zero_below": f"{self.thm2_zero_below.numerator}/{self.thm2_zero_below.denominator}",
            "thm3_zero_below": f"{self.thm3_zero_below.numerator}/{self.thm3_zero_below.denominator}",
            "general_domain_dim": {"slope": self.general_slope, "intercept": -1},
            "pure_domain_dim": {"slope": self.pure_slope, "intercept": -1},
            "codomain_dim": self.shape.codomain_dim,
        }


def thresholds(shape):
    """Exact k-thresholds for the measure-zero and open-set regimes.

    ``thm2_open_at`` is evaluated on the dims sorted ascending, since the
    separable set does not depend on how the particles are labelled.
    """
    dims = shape.dims
    p, N = shape.p, shape.N
    sq = [n * n for n in dims]
    general_slope = 1 - p + sum(sq)
    pure_slope = 1 - 2 * p + sum(2 * n for n in dims)
    asc = sorted(dims)
    open_at = prod(n * n for n in asc[:-1])
    return ThresholdReport(
        shape=shape,
        caratheodory=N * N,
        uhlmann_max_rank=N,
        thm1_applicable=shape.thm1_applicable,
        thm1_open_at=prod(n * n for n in dims[:-1]) if shape.thm1_applicable else None,
        thm2_open_at=open_at,
        thm2_zero_below=_checked(Fraction(N * N, general_slope)),
        thm3_zero_below=_checked(Fraction(N * N, pure_slope)),
        general_slope=general_slope,
        pure_slope=pure_slope,
    )


@dataclass
class ScanReport:
    shape: SystemShape
    k: int
    model: str
    samples: int
    seed: int
    ranks: list
    codomain_dim: int
    domain_dim: int
    rel_tol: float = RANK_RTOL

    @property
    def max_rank(self):
        return max(self.ranks)

    @property
    def full_rank_count(self):
        return sum(r == self.codomain_dim for r in self.ranks)

    @property
    def full_rank_fraction(self):
        return self.full_rank_count / self.samples

    def as_dict(self):
        return {
            "dims": list(self.shape.dims),
            "k": self.k,
            "model": self.model,
            "samples": self.samples,
            "seed": self.seed,
            "rel_tol": self.rel_tol,
            "domain_dim": self.domain_dim,
            "codomain_dim": self.codomain_dim,
            "max_rank": self.max_rank,
            "full_rank_count": self.full_rank_count,
            "full_rank_fraction": self.full_rank_fraction,
            "ranks": list(self.ranks),
        }


def _scan_one(task):
    dims, k, model, seed, index, rel_tol = task
    ens = random_ensemble(SystemShape(dims), k, model, sample_rng(seed, index))
    return jacobian(ens, model, rel_tol).rank


def criticality_scan(shape, k, model, samples, seed, workers=1, rel_tol=RANK_RTOL):
    """Jacobian ranks at ``samples`` random interior ensembles.

    Sample ``i`` draws from its own generator keyed by ``(seed, i)``, so the
    result does not depend on ``workers``.
    """
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    if k < 1:
        raise PreconditionError("k must be >= 1")
    tasks = [(shape.dims, k, model, seed, i, rel_tol) for i in range(samples)]
    ranks = parallel_map(_scan_one, tasks, workers)
    return ScanReport(
        shape, k, model, samples, seed, [int(r) for r in ranks],
        shape.codomain_dim, domain_dim(shape, k, model), rel_tol,
    )


def _interior_basis(n, eps):
    return (1 - eps) * pure_density_basis(n) + (eps / n) * np.eye(n)


def onto_witness(shape, k, eps=0.5, retries=8, max_cond=1e6, rel_tol=RANK_RTOL):
    """Interior ensemble at which the differential is onto.

    The first ``M = prod(n_i**2, i<p)`` terms carry products of interiorised
    pure-state bases of the first ``p-1`` particles; every remaining factor
    is maximally mixed, and all weights equal ``1/k``.

    Returns
    -------
    ensemble : GeneralEnsemble
    report : JacobianReport
    """
    if not shape.is_sorted:
        raise PreconditionError(f"dims must be ascending, got {shape.dims}")
    M = prod(n * n for n in shape.dims[:-1])
    if k < M:
        raise PreconditionError(f"k={k} is below the open-set threshold {M}")
    head = shape.dims[:-1]
    n_last = shape.dims[-1]
    cond = np.inf
    for _ in range(retries):
        bases = [_interior_basis(n, eps) for n in head]
        rows = [list(combo) for combo in itertools.product(*bases)] if head else [[]]
        prods = np.array([_kron_all(r) for r in rows])
        rank, s = numerical_rank(gram_matrix(prods), rel_tol)
        cond = s[0] / s[-1] if s[-1] > 0 else np.inf
        if rank == M and cond < max_cond:
            break
        eps /= 2
    else:
        raise ConstructionError(
            f"spanning products degenerate after {retries} tries (Gram condition {cond:.3g})"
        )
    pad = [np.eye(n, dtype=complex) / n for n in head]
    comps = []
    for j in range(k):
        row = list(rows[j]) if j < len(rows) else list(pad)
        comps.append(row + [np.eye(n_last, dtype=complex) / n_last])
    ens = GeneralEnsemble(shape, np.full(k - 1, 1.0 / k), comps)
    report = jacobian(ens, "general", rel_tol)
    if not report.full_rank:
        raise ConstructionError(
            f"constructed ensemble has rank {report.rank} < {report.codomain_dim} "
            f"(Gram condition {cond:.3g})"
        )
    return ens, report


def _kron_all(mats):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def is_interior(ens, tol=0.0):
    """Strictly positive weights (implicit one included) and positive definite components."""
    full = ens.full_weights
    if np.any(full <= tol):
        return False
    return all(min_eigenvalue(A) > tol for row in ens.states() for A in row)


@dataclass
class DegenerateSpanReport:
    n: int
    k: int
    group_sizes: tuple
    element_count: int
    span_dim: int
    original_span_dim: int
    spans_agree: bool
    jacobian_rank: int
    codomain_dim: int
    closed_form_error: float
    reduced: dict = field(default_factory=dict, repr=False)

    @property
    def expected_count(self):
        return self.n**4 - 2

    @property
    def deficient(self):
        return self.span_dim < self.codomain_dim and self.jacobian_rank < self.codomain_dim

    def as_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "group_sizes": list(self.group_sizes),
            "element_count": self.element_count,
            "expected_count": self.expected_count,
            "span_dim": self.span_dim,
            "original_span_dim": self.original_span_dim,
            "spans_agree": self.spans_agree,
            "jacobian_rank": self.jacobian_rank,
            "codomain_dim": self.codomain_dim,
            "closed_form_error": self.closed_form_error,
        }


def degenerate_span_check(n, rel_tol=RANK_RTOL):
    """Edge case ``n1 = n2 = n``, ``k = n**2 - 1`` of the bipartite rank argument.

    Builds the differential's images of the canonical basis at
    ``A_j1 = E_j + I/n``, ``A_j2 = F_j + I/n``, applies the two rounds of row
    operations that expose a set of ``n**4 - 2`` spanning elements, and checks
    the spans and the Jacobian rank directly.
    """
    if n < 2:
        raise PreconditionError("n must be >= 2")
    k = n * n - 1
    I = np.eye(n, dtype=complex) / n
    # scaled so E + I/n stays positive definite; Gell-Mann norms are <= sqrt(2)
    E = traceless_basis(n) / (2 * n)
    F = E.copy()
    kron = np.kron

    g1 = np.array([[kron(E[s], F[t]) + kron(E[s], I) for t in range(k)] for s in range(k)])
    g2 = np.array([[kron(E[s], F[t]) + kron(I, F[t]) for t in range(k)] for s in range(k)])
    P = [kron(E[j] + I, F[j] + I) for j in range(k)]
    g3 = np.array([P[j] - P[k - 1] for j in range(k - 1)])

    # first round: second group minus first; third minus first at (j, j) plus first at (k, k)
    h1 = g1
    h2 = g2 - g1
    h3 = np.array([g3[j] - g1[j, j] + g1[k - 1, k - 1] for j in range(k - 1)])
    # second round: subtract the third group (zero at t = k) from the second, add to the first
    h3_full = np.concatenate([h3, np.zeros((1, n * n, n * n), dtype=complex)])
    r2_grid = np.array([[h2[s, t] - h3_full[t] for t in range(k)] for s in range(k)])
    collapse_err = float(np.max(np.abs(r2_grid - r2_grid[:, :1])))
    r2 = r2_grid[:, 0]
    r1 = np.array([[h1[s, t] + r2[s] for t in range(k)] for s in range(k)])
    r3 = h3

    # closed forms of the reduced groups
    c1 = np.array([[kron(E[s], F[t]) + kron(I, F[k - 1]) for t in range(k)] for s in range(k)])
    c2 = np.array([kron(I, F[k - 1]) - kron(E[s], I) for s in range(k)])
    c3 = np.array([kron(I, F[t]) - kron(I, F[k - 1]) for t in range(k - 1)])
    closed_err = max(
        float(np.max(np.abs(r1 - c1))),
        float(np.max(np.abs(r2 - c2))),
        float(np.max(np.abs(r3 - c3))),
        collapse_err,
    )

    reduced = np.concatenate([r1.reshape(-1, n * n, n * n), r2, r3])
    original = np.concatenate([g1.reshape(-1, n * n, n * n), g2.reshape(-1, n * n, n * n), g3])

    def coords(stack):
        return np.column_stack([traceless_coords(X) for X in stack])

    span_dim, _ = numerical_rank(coords(reduced), rel_tol)
    orig_dim, _ = numerical_rank(coords(original), rel_tol)
    union_dim, _ = numerical_rank(np.hstack([coords(reduced), coords(original)]), rel_tol)

    shape = SystemShape((n, n))
    ens = GeneralEnsemble(shape, np.full(k - 1, 1.0 / k), [[E[j] + I, F[j] + I] for j in range(k)])
    jrep = jacobian(ens, "general", rel_tol)

    return DegenerateSpanReport(
        n=n,
        k=k,
        group_sizes=(len(r1.reshape(-1, n * n, n * n)), len(r2), len(r3)),
        element_count=len(reduced),
        span_dim=span_dim,
        original_span_dim=orig_dim,
        spans_agree=(span_dim == orig_dim == union_dim),
        jacobian_rank=jrep.rank,
        codomain_dim=shape.codomain_dim,
        closed_form_error=closed_err,
        reduced={"first": r1, "second": r2, "third": r3},
    )
