"""Multi-start projected descent for product-state decompositions.

A successful search is a certificate that the target is a mixture of ``k``
product states. A failed search proves nothing about the target.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError
from .herm import (
    TOL_PSD,
    check_density,
    fix_phase,
    numerical_rank,
    traceless_basis,
)
from .mixing import (
    GeneralEnsemble,
    PureEnsemble,
    _jacobian_matrix,
    _mix_states,
    mix,
    pure_tangent_directions,
    pure_tangent_vectors,
    random_ensemble,
)
from . import _backend
from .parallel import sample_rng

log = logging.getLogger(__name__)

STEP_POLICIES = ("lm", "gradient")


@dataclass(frozen=True)
class DecomposeOptions:
    """Search settings.

    ``step`` selects the descent direction: ``"gradient"`` is the plain
    negative gradient, ``"lm"`` preconditions it with the damped Gauss-Newton
    matrix ``J^T J + damping * |residual| * I``. Both use Armijo backtracking.
    """

    restarts: int = 50
    max_iter: int = 2000
    tol: float = 1e-7
    step: str = "lm"
    initial_step: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    damping: float = 1.0
    max_backtracks: int = 40
    stall_tol: float = 1e-9
    stall_patience: int = 25
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ArgumentError("restarts must be >= 1")
        if self.tol <= 0:
            raise ArgumentError("tol must be positive")
        if self.max_iter < 0:
            raise ArgumentError("max_iter must be >= 0")
        if self.step not in STEP_POLICIES:
            raise ArgumentError(f"step must be one of {STEP_POLICIES}")
        if not 0 < self.backtrack < 1:
            raise ArgumentError("backtrack factor must lie in (0, 1)")


@dataclass
class DecomposeResult:
    status: str
    ensemble: object
    residual: float
    iterations: int
    restart: int
    k: int
    model: str
    residuals: list = field(default_factory=list, repr=False)

    @property
    def success(self):
        return self.status == "success"

    def verify(self, target, tol):
        """Recompute the mixture from the returned ensemble alone."""
        return float(np.linalg.norm(mix(self.ensemble) - target)) <= tol


# --- constraint projections -------------------------------------------------

def project_weights(lam):
    """Euclidean projection onto ``{lam >= 0, sum(lam) <= 1}``."""
    lam = np.asarray(lam, dtype=float)
    clipped = np.clip(lam, 0.0, None)
    if clipped.sum() <= 1.0:
        return clipped
    # projection onto the probability simplex
    u = np.sort(lam)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.clip(lam - theta, 0.0, None)


def project_density(A):
    """Hermitian part, clip negative eigenvalues, renormalise the trace."""
    A = 0.5 * (A + A.conj().T)
    vals, vecs = np.linalg.eigh(A)
    vals = np.clip(vals, 0.0, None)
    tr = vals.sum()
    n = A.shape[0]
    if tr < 1e-12:
        return np.eye(n, dtype=complex) / n
    return (vecs * (vals / tr)) @ vecs.conj().T


# --- one restart -------------------------------------------------------------

class _Problem:
    def __init__(self, target, shape, k, model):
        self.target = target
        self.shape = shape
        self.k = k
        self.model = model
        self.bases = [traceless_basis(n) for n in shape.dims]

    def states(self, ens):
        return ens.states()

    def objective(self, ens):
        diff = _mix_states(ens.full_weights, ens.states()) - self.target
        return float(np.real(np.vdot(diff, diff))), diff

    def jacobian(self, ens):
        if self.model == "general":
            dirs = [self.bases for _ in range(self.k)]
        else:
            dirs = [[pure_tangent_directions(v) for v in row] for row in ens.vectors]
        return _jacobian_matrix(self.shape, ens.full_weights, ens.states(), dirs)

    def displacement(self, ens, cand):
        """Tangent coordinates of ``cand - ens`` (general model); None for pure."""
        if self.model != "general":
            return None
        parts = [cand.weights - ens.weights]
        for row_new, row_old in zip(cand.components, ens.components):
            for A1, A0, B in zip(row_new, row_old, self.bases):
                # Gell-Mann elements have squared norm 2
                parts.append(0.5 * np.real(np.einsum("mab,ba->m", B, A1 - A0)))
        return np.concatenate(parts)

    def retract(self, ens, x):
        k = self.k
        lam = project_weights(ens.weights + x[: k - 1])
        pos = k - 1
        if self.model == "general":
            comps = []
            for row in ens.components:
                new = []
                for A, B in zip(row, self.bases):
                    m = len(B)
                    new.append(project_density(A + np.tensordot(x[pos:pos + m], B, axes=1)))
                    pos += m
                comps.append(new)
            return GeneralEnsemble(self.shape, lam, comps)
        vecs = []
        for row in ens.vectors:
            new = []
            for v in row:
                dvs = pure_tangent_vectors(v)
                m = len(dvs)
                w = v + x[pos:pos + m] @ dvs
                new.append(fix_phase(w / np.linalg.norm(w)))
                pos += m
            vecs.append(new)
        return PureEnsemble(self.shape, lam, vecs)


def _line_search(problem, ens, f, g, d, opts):
    """Armijo backtracking along ``d``, measured on the projected displacement."""
    alpha = opts.initial_step
    for _ in range(opts.max_backtracks):
        cand = problem.retract(ens, alpha * d)
        moved = problem.displacement(ens, cand)
        slope = float(g @ moved) if moved is not None else alpha * float(g @ d)
        if slope < 0:
            fc, dc = problem.objective(cand)
            if fc <= f + opts.armijo * slope:
                return cand, fc, dc
        alpha *= opts.backtrack
    return None


def _descend(problem, ens, opts):
    """Projected descent from ``ens``; returns (ensemble, residual, iterations)."""
    f, diff = problem.objective(ens)
    tol2 = opts.tol**2
    stalls = 0
    it = 0
    for it in range(1, opts.max_iter + 1):
        if f <= tol2:
            it -= 1
            break
        J = problem.jacobian(ens)
        r = _backend.herm_coords(diff)
        g = 2.0 * (J.T @ r)
        directions = [-g]
        if opts.step == "lm":
            nu = opts.damping * np.sqrt(f)
            d = -np.linalg.solve(J.T @ J + nu * np.eye(J.shape[1]), J.T @ r)
            # projected gradient rescues LM steps that clipping has bent uphill
            directions = [d, -g] if problem.model == "general" else [d]
        step = None
        for d in directions:
            step = _line_search(problem, ens, f, g, d, opts)
            if step is not None:
                break
        if step is None:
            break
        cand, fc, dc = step
        if f - fc < opts.stall_tol * f:
            stalls += 1
        else:
            stalls = 0
        ens, f, diff = cand, fc, dc
        if stalls >= opts.stall_patience:
            break
    return ens, float(np.sqrt(max(f, 0.0))), it


def _run_restart(task):
    target, shape, k, model, opts, index, start = task
    if start is None:
        start = random_ensemble(shape, k, model, sample_rng(opts.seed, index))
    problem = _Problem(target, shape, k, model)
    ens, res, its = _descend(problem, start, opts)
    return index, ens, res, its


def _check_target(target, shape):
    target = np.asarray(target, dtype=complex)
    if target.shape != (shape.N, shape.N):
        raise ArgumentError(f"target has shape {target.shape}, expected {(shape.N, shape.N)}")
    return check_density(target, TOL_PSD, name="target")


def decompose(target, shape, k, model="pure", opts=None, warm_start=None, pool=None):
    """Search for a length-``k`` product-state decomposition of ``target``.

    Restarts run in index order (batched across ``opts.workers`` processes).
    The returned result is the lowest-index restart that reaches
    ``opts.tol``, or the lowest residual over all restarts when none does.
    Restart 0 begins at ``warm_start`` when one is given.
    """
    opts = opts or DecomposeOptions()
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if model not in ("general", "pure"):
        raise ArgumentError(f"unknown model {model!r}")
    target = _check_target(target, shape)
    if warm_start is not None and (warm_start.k != k or warm_start.model != model):
        raise ArgumentError("warm start does not match k/model")

    def task(i):
        return (target, shape, k, model, opts, i, warm_start if i == 0 else None)

    batch = max(1, opts.workers)
    outcomes = []
    own_pool = None
    if batch > 1 and pool is None:
        from concurrent.futures import ProcessPoolExecutor

        own_pool = pool = ProcessPoolExecutor(max_workers=batch)
    try:
        for start in range(0, opts.restarts, batch):
            tasks = [task(i) for i in range(start, min(start + batch, opts.restarts))]
            if pool is None:
                done = [_run_restart(t) for t in tasks]
            else:
                done = list(pool.map(_run_restart, tasks))
            outcomes.extend(done)
            if any(res <= opts.tol for _, _, res, _ in done):
                break
    finally:
        if own_pool is not None:
            own_pool.shutdown()

    winners = [o for o in outcomes if o[2] <= opts.tol]
    if winners:
        best = winners[0]
    else:
        best = min(outcomes, key=lambda o: (o[2], o[0]))
    index, ens, res, its = best
    status = "success" if res <= opts.tol else "failure"
    result = DecomposeResult(status, ens, res, its, index, k, model, [o[2] for o in outcomes])
    if result.success and model == "pure":
        rank, _ = numerical_rank(target)
        if k < rank:
            raise RuntimeError(
                f"pure decomposition of length {k} below target rank {rank}: "
                "rank or residual tolerance is inconsistent"
            )
    log.debug("decompose k=%d model=%s: %s residual=%.3g", k, model, status, res)
    return result


def pad_ensemble(ens):
    """Length ``k+1`` ensemble with the same mixture: a zero-weight term is
    inserted just before the implicit last term."""
    shape = ens.shape
    full = ens.full_weights
    lam = np.append(full[:-1], 0.0)
    if isinstance(ens, PureEnsemble):
        extra = [np.eye(n, dtype=complex)[0] for n in shape.dims]
        rows = ens.vectors[:-1] + [extra] + ens.vectors[-1:]
        return PureEnsemble(shape, lam, rows)
    extra = [np.eye(n, dtype=complex) / n for n in shape.dims]
    rows = ens.components[:-1] + [extra] + ens.components[-1:]
    return GeneralEnsemble(shape, lam, rows)


@dataclass
class LengthSearch:
    length: int | None
    result: DecomposeResult | None
    best_residuals: list

    @property
    def found(self):
        return self.length is not None


def search_ensemble_length(target, shape, model="pure", opts=None, k_max=None):
    """Ascending scan ``k = 1, 2, ...`` with warm starts; stops at the first success."""
    opts = opts or DecomposeOptions()
    target = _check_target(target, shape)
    k_max = k_max or shape.N**2
    residuals = []
    warm = None
    last = None
    pool = None
    if opts.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        pool = ProcessPoolExecutor(max_workers=opts.workers)
    try:
        for k in range(1, k_max + 1):
            res = decompose(target, shape, k, model, opts, warm_start=warm, pool=pool)
            residuals.append(res.residual)
            last = res
            if res.success:
                return LengthSearch(k, res, residuals)
            warm = pad_ensemble(res.ensemble)
    finally:
        if pool is not None:
            pool.shutdown()
    return LengthSearch(None, last, residuals)


def ensemble_length_upper(target, shape, model="pure", opts=None):
    """Smallest ``k`` at which a decomposition was found, or None.

    None means the search failed, not that the target is entangled.
    """
    return search_ensemble_length(target, shape, model, opts).length


def uhlmann_bounds_check(target, found_len):
    """True when ``found_len`` is at least the rank of ``target``."""
    rank, _ = numerical_rank(np.asarray(target))
    return rank <= found_len


def uhlmann_report(target, found_len):
    rank, _ = numerical_rank(np.asarray(target))
    return {
        "rank": rank,
        "found_len": int(found_len),
        "lower_bound_ok": rank <= found_len,
        "above_optimum_bound": found_len > rank * rank,
    }


def random_separable(shape, terms, rng):
    """Mixture of ``terms`` random pure product states with flat Dirichlet weights."""
    ens = random_ensemble(shape, terms, "pure", rng)
    return mix(ens), ens


def with_options(opts, **changes):
    return replace(opts or DecomposeOptions(), **changes)
