"""Alternating consensus optimizer over per-view trace problems.

Two coupling schemes share one engine:

* pairwise - every view's embedding is pulled toward every other view's
  linear-kernel Gram matrix;
* centroid - views are pulled toward one shared orthonormal embedding that is
  itself re-fit to the views each sweep (and is the scheme's main output).

Internally everything is a minimization: specs declared with
``sense='maximize'`` enter with their structure matrix negated.  Each sweep
exactly minimizes the objective over one block at a time (view embeddings,
the shared embedding, then the view weights), so the recorded objective never
increases.  Non-convergence within ``max_iter`` is reported, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionTooLargeError,
    NonPositiveDenominatorError,
)
from .linalg import PencilSolver, as_dense, gram, sym_eig, trace_form
from .specs import ManifoldSpec

Scheme = Literal["pairwise", "centroid"]

# The pairwise objective sums the Gram-alignment term over ordered view pairs,
# so each unordered pair contributes twice; the exact per-view block update
# therefore carries twice the consensus weight.  The centroid scheme counts
# each (view, shared) pair once and needs no doubling.
ORDERED_PAIR_COUPLING = 2.0


@dataclass
class Hyperparams:
    """Knobs shared by every scheme.

    consensus_weight   trade-off between per-view structure fit and
                       cross-view Gram alignment (0 decouples the views)
    view_weight_reg    additive regularizer that keeps the closed-form view
                       weights away from one-hot solutions
    view_weight_power  exponent (> 1) applied to the view weights in the
                       objective; large values push the weights toward uniform
    dims               per-view embedding dimension (int broadcasts)
    centroid_dim       shared-embedding dimension (default: max of dims)
    """

    consensus_weight: float = 0.5
    view_weight_reg: float = 1.0
    view_weight_power: float = 2.0
    dims: int | Sequence[int] = 2
    centroid_dim: int | None = None
    max_iter: int = 100
    tol: float = 1e-6

    def validate(self) -> None:
        if self.consensus_weight < 0:
            raise ValueError(f"consensus_weight must be >= 0, got {self.consensus_weight}")
        if self.view_weight_reg < 0:
            raise ValueError(f"view_weight_reg must be >= 0, got {self.view_weight_reg}")
        if self.view_weight_power <= 1:
            raise ValueError(
                f"view_weight_power must be > 1 (the closed-form weight update "
                f"divides by power - 1), got {self.view_weight_power}"
            )
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")

    def dims_list(self, n_views: int, n_samples: int) -> list[int]:
        if isinstance(self.dims, (int, np.integer)):
            out = [int(self.dims)] * n_views
        else:
            out = [int(d) for d in self.dims]
            if len(out) != n_views:
                raise DimensionMismatchError(
                    f"dims lists {len(out)} entries for {n_views} views"
                )
        for d in out:
            if not 1 <= d <= n_samples - 1:
                raise DimensionTooLargeError(
                    f"embedding dimension {d} must lie in [1, {n_samples - 1}]"
                )
        return out

    def centroid_dim_resolved(self, dims: Sequence[int], n_samples: int) -> int:
        d = max(dims) if self.centroid_dim is None else int(self.centroid_dim)
        if not 1 <= d <= n_samples - 1:
            raise DimensionTooLargeError(
                f"centroid dimension {d} must lie in [1, {n_samples - 1}]"
            )
        return d


@dataclass
class ConsensusState:
    """Mutable optimizer state: one embedding and Gram per view, plus weights."""

    embeddings: list[np.ndarray]        # view v: (dims[v], n) rows
    grams: list[np.ndarray]             # cached Y^T Y per view, kept in sync
    centroid: np.ndarray | None         # shared embedding rows (centroid scheme)
    alpha: np.ndarray                   # view weights on the open simplex
    iteration: int
    objective_trace: list[float] = field(default_factory=list)

    @property
    def n_views(self) -> int:
        return len(self.embeddings)


@dataclass
class IterationRecord:
    """Everything the trace file stores about one sweep."""

    iteration: int
    objective: float
    alpha: np.ndarray
    view_residuals: np.ndarray          # ||Y C Y^T - I||_F per view
    centroid_residual: float | None


@dataclass
class EmbeddingResult:
    """Final state plus the per-sweep audit trail."""

    state: ConsensusState
    converged: bool
    iterations_used: int
    objective_trace: list[float]
    records: list[IterationRecord]
    scheme: Scheme
    hyper: Hyperparams
    seed: int | None = None

    @property
    def embeddings(self) -> list[np.ndarray]:
        return self.state.embeddings

    @property
    def centroid(self) -> np.ndarray | None:
        return self.state.centroid

    @property
    def alpha(self) -> np.ndarray:
        return self.state.alpha

    @property
    def view_residuals(self) -> np.ndarray:
        return self.records[-1].view_residuals


def consensus_similarity(gram_v, gram_w) -> float:
    """Alignment tr(K_v K_w) between two same-size symmetric Gram matrices."""
    kv = as_dense(gram_v, "gram_v")
    kw = as_dense(gram_w, "gram_w")
    if kv.shape != kw.shape or kv.shape[0] != kv.shape[1]:
        raise DimensionMismatchError(
            f"gram matrices must be square and same-size, got {kv.shape} and {kw.shape}"
        )
    return float(np.sum(kv * kw.T))


def update_alpha(traces, power: float, reg: float) -> np.ndarray:
    """Closed-form simplex minimizer of sum_v a_v^power * (trace_v + reg).

    Requires every denominator trace_v + reg to be strictly positive; raise
    the regularizer when a maximization-sense view drives its trace negative.
    """
    t = np.asarray(traces, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DimensionMismatchError("traces must be a non-empty vector")
    denom = t + reg
    if np.any(denom <= 0.0):
        bad = int(np.argmin(denom))
        raise NonPositiveDenominatorError(
            f"view {bad} has trace + regularizer = {denom[bad]:.6g} <= 0; "
            f"increase the view-weight regularizer"
        )
    if power <= 1:
        raise ValueError(f"power must be > 1, got {power}")
    w = denom ** (-1.0 / (power - 1.0))
    return w / w.sum()


def single_view_embedding(spec: ManifoldSpec, dim: int) -> np.ndarray:
    """Uncoupled solution of one view's trace problem (rows = coordinates)."""
    solver = PencilSolver(spec.constraint, spec.n_samples)
    res = solver.extreme(spec.minimize_form(), dim, "smallest")
    return res.eigenvectors.T


def _pairwise_lmat(struct_min, grams, view, alpha, hp: Hyperparams) -> np.ndarray:
    lam = ORDERED_PAIR_COUPLING * hp.consensus_weight
    lmat = float(alpha[view] ** hp.view_weight_power) * struct_min
    if lam != 0.0:
        other = _gram_sum_excluding(grams, view)
        if other is not None:
            lmat = lmat - lam * other
    return lmat


def _centroid_lmat(struct_min, centroid_gram, view, alpha, hp: Hyperparams) -> np.ndarray:
    lmat = float(alpha[view] ** hp.view_weight_power) * struct_min
    if hp.consensus_weight != 0.0:
        lmat = lmat - hp.consensus_weight * centroid_gram
    return lmat


def _gram_sum_excluding(grams, view) -> np.ndarray | None:
    total = None
    for w, k in enumerate(grams):
        if w == view:
            continue
        total = k.copy() if total is None else total + k
    return total


def _centroid_rows(gram_total: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal rows spanning the top eigenspace of the summed Grams."""
    if not 1 <= dim <= gram_total.shape[0]:
        raise DimensionTooLargeError(
            f"centroid dimension {dim} must lie in [1, {gram_total.shape[0]}]"
        )
    res = sym_eig(gram_total)
    return res.eigenvectors[:, -dim:].T


def _constraint_residual(y: np.ndarray, constraint: np.ndarray | None) -> float:
    k = y @ y.T if constraint is None else y @ constraint @ y.T
    return float(np.linalg.norm(k - np.eye(y.shape[0])))


class _FreeViewSolver:
    """Per-view eigensolver for free (unparameterized) embeddings."""

    def __init__(self, spec: ManifoldSpec):
        self.pencil = PencilSolver(spec.constraint, spec.n_samples)

    def solve(self, lmat: np.ndarray, dim: int) -> np.ndarray:
        return self.pencil.extreme(lmat, dim, "smallest").eigenvectors.T


def init_embeddings(
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams,
    scheme: Scheme = "pairwise",
    _solvers=None,
) -> ConsensusState:
    """Uniform view weights plus uncoupled per-view solutions.

    For the centroid scheme the shared embedding starts as the top eigenspace
    of the initial summed Grams.
    """
    _check_specs(specs)
    hp.validate()
    m = len(specs)
    n = specs[0].n_samples
    dims = hp.dims_list(m, n)
    solvers = _solvers or [_FreeViewSolver(s) for s in specs]
    embeddings = [solvers[v].solve(specs[v].minimize_form(), dims[v]) for v in range(m)]
    grams = [gram(y) for y in embeddings]
    centroid = None
    if scheme == "centroid":
        dstar = hp.centroid_dim_resolved(dims, n)
        centroid = _centroid_rows(sum(grams), dstar)
    alpha = np.full(m, 1.0 / m)
    return ConsensusState(embeddings, grams, centroid, alpha, 0, [])


def pairwise_update_view(
    state: ConsensusState,
    view: int,
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams,
    _solver=None,
) -> np.ndarray:
    """Exact block update of one view against the other views' Grams.

    Solves for the smallest-eigenvalue rows of the pencil built from the
    weighted structure matrix minus the coupled sum of the other Grams, then
    refreshes the state's embedding and cached Gram in place.
    """
    spec = specs[view]
    lmat = _pairwise_lmat(spec.minimize_form(), state.grams, view, state.alpha, hp)
    solver = _solver or _FreeViewSolver(spec)
    dim = state.embeddings[view].shape[0]
    y = solver.solve(lmat, dim)
    state.embeddings[view] = y
    state.grams[view] = gram(y)
    return y


def centroid_update_view(
    state: ConsensusState,
    view: int,
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams,
    _solver=None,
) -> np.ndarray:
    """Exact block update of one view against the shared embedding's Gram."""
    if state.centroid is None:
        raise ValueError("state has no centroid; initialize with scheme='centroid'")
    spec = specs[view]
    kstar = gram(state.centroid)
    lmat = _centroid_lmat(spec.minimize_form(), kstar, view, state.alpha, hp)
    solver = _solver or _FreeViewSolver(spec)
    dim = state.embeddings[view].shape[0]
    y = solver.solve(lmat, dim)
    state.embeddings[view] = y
    state.grams[view] = gram(y)
    return y


def update_centroid(state: ConsensusState, hp: Hyperparams) -> np.ndarray:
    """Exact block update of the shared embedding: top eigenspace of sum of Grams."""
    if state.centroid is None:
        raise ValueError("state has no centroid; initialize with scheme='centroid'")
    dim = state.centroid.shape[0]
    state.centroid = _centroid_rows(sum(state.grams), dim)
    return state.centroid


def objective_pairwise(state: ConsensusState, specs: Sequence[ManifoldSpec], hp: Hyperparams) -> float:
    """Weighted structure traces minus consensus over ordered view pairs.

    Every ordered pair (v, w), v != w, contributes once, so each unordered
    pair is counted twice.
    """
    total = _weighted_traces_term(state, specs, hp)
    lam = hp.consensus_weight
    if lam != 0.0:
        align = 0.0
        for v in range(state.n_views):
            for w in range(v + 1, state.n_views):
                align += consensus_similarity(state.grams[v], state.grams[w])
        total -= lam * ORDERED_PAIR_COUPLING * align
    return total


def objective_centroid(state: ConsensusState, specs: Sequence[ManifoldSpec], hp: Hyperparams) -> float:
    """Weighted structure traces minus consensus between each view and the centroid."""
    if state.centroid is None:
        raise ValueError("state has no centroid; initialize with scheme='centroid'")
    total = _weighted_traces_term(state, specs, hp)
    lam = hp.consensus_weight
    if lam != 0.0:
        kstar = gram(state.centroid)
        align = sum(consensus_similarity(k, kstar) for k in state.grams)
        total -= lam * align
    return total


def _weighted_traces_term(state, specs, hp) -> float:
    r = hp.view_weight_power
    total = 0.0
    for v, spec in enumerate(specs):
        a = float(state.alpha[v] ** r)
        total += a * trace_form(state.embeddings[v], spec.minimize_form())
    total += hp.view_weight_reg * float(np.sum(state.alpha ** r))
    return total


def run_pairwise(
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams | None = None,
    seed: int | None = None,
) -> EmbeddingResult:
    """Alternate view updates and weight updates until the objective settles."""
    return _run(specs, hp or Hyperparams(), "pairwise", seed, None)


def run_centroid(
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams | None = None,
    seed: int | None = None,
) -> EmbeddingResult:
    """Like run_pairwise but alternating through a shared orthonormal embedding."""
    return _run(specs, hp or Hyperparams(), "centroid", seed, None)


def _run(
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams,
    scheme: Scheme,
    seed: int | None,
    view_solvers,
) -> EmbeddingResult:
    """Shared alternating loop; ``view_solvers`` lets subspace/kernel variants
    swap in their own per-view block solvers (the optimization itself is
    deterministic; ``seed`` is carried through for provenance only)."""
    _check_specs(specs)
    hp.validate()
    if scheme not in ("pairwise", "centroid"):
        raise ValueError(f"scheme must be 'pairwise' or 'centroid', got {scheme!r}")
    m = len(specs)
    n = specs[0].n_samples
    dims = hp.dims_list(m, n)
    solvers = view_solvers or [_FreeViewSolver(s) for s in specs]
    mats = [s.minimize_form() for s in specs]
    objective = objective_pairwise if scheme == "pairwise" else objective_centroid

    state = init_embeddings(specs, hp, scheme, _solvers=solvers)
    obj = objective(state, specs, hp)
    state.objective_trace.append(obj)
    records = [_record(state, specs, 0, obj)]

    converged = False
    sweeps = 0
    for sweeps in range(1, hp.max_iter + 1):
        if scheme == "centroid":
            update_centroid(state, hp)
            kstar = gram(state.centroid)
        for v in range(m):
            if scheme == "centroid":
                lmat = _centroid_lmat(mats[v], kstar, v, state.alpha, hp)
            else:
                lmat = _pairwise_lmat(mats[v], state.grams, v, state.alpha, hp)
            y = solvers[v].solve(lmat, dims[v])
            state.embeddings[v] = y
            state.grams[v] = gram(y)
        traces = [trace_form(state.embeddings[v], mats[v]) for v in range(m)]
        state.alpha = update_alpha(traces, hp.view_weight_power, hp.view_weight_reg)
        prev = state.objective_trace[-1]
        obj = objective(state, specs, hp)
        state.objective_trace.append(obj)
        state.iteration = sweeps
        records.append(_record(state, specs, sweeps, obj))
        if abs(obj - prev) <= hp.tol * (1.0 + abs(prev)):
            converged = True
            break

    return EmbeddingResult(
        state=state,
        converged=converged,
        iterations_used=sweeps,
        objective_trace=state.objective_trace,
        records=records,
        scheme=scheme,
        hyper=hp,
        seed=seed,
    )


def _record(state: ConsensusState, specs, iteration: int, objective: float) -> IterationRecord:
    resid = np.array(
        [
            _constraint_residual(state.embeddings[v], specs[v].constraint)
            for v in range(state.n_views)
        ]
    )
    cres = None
    if state.centroid is not None:
        cres = _constraint_residual(state.centroid, None)
    return IterationRecord(iteration, objective, state.alpha.copy(), resid, cres)


def _check_specs(specs) -> None:
    if len(specs) == 0:
        raise ValueError("need at least one view spec")
    n = specs[0].n_samples
    for i, s in enumerate(specs):
        if not isinstance(s, ManifoldSpec):
            raise TypeError(f"specs[{i}] is not a ManifoldSpec")
        if s.n_samples != n:
            raise DimensionMismatchError(
                f"specs disagree on sample count: {n} vs {s.n_samples} at view {i}"
            )
