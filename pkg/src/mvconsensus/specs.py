"""Per-view structure/constraint matrix builders.

Each builder turns one view's raw feature matrix (features x samples) into a
:class:`ManifoldSpec`: a symmetric structure matrix M, a symmetric constraint
matrix C (``None`` meaning the identity), and the optimization sense.  The
consensus optimizer consumes specs only through this interface, so custom
methods plug in by constructing a ``ManifoldSpec`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyClassError,
    KTooLargeError,
    NonFiniteError,
    SingularLocalGramError,
)
from .linalg import as_dense, check_square_symmetric

DEFAULT_K = 10
DEFAULT_RECONSTRUCTION_RIDGE = 1e-3

Sense = Literal["minimize", "maximize"]


@dataclass
class NeighborGraph:
    """Directed k-nearest-neighbor lists with their Euclidean distances."""

    k: int
    indices: np.ndarray    # (n, k) int, row i lists i's neighbors, nearest first
    distances: np.ndarray  # (n, k) float, matching Euclidean distances

    @property
    def n_samples(self) -> int:
        return self.indices.shape[0]


@dataclass
class ManifoldSpec:
    """One view's trace-optimization problem: optimize tr(Y M Y^T) s.t. Y C Y^T = I."""

    structure: np.ndarray          # M, n x n symmetric
    constraint: np.ndarray | None  # C, n x n symmetric; None stands for identity
    sense: Sense = "minimize"
    method: str = "custom"

    def __post_init__(self):
        self.structure = check_square_symmetric(self.structure, "structure")
        if self.constraint is not None:
            self.constraint = check_square_symmetric(self.constraint, "constraint")
            if self.constraint.shape != self.structure.shape:
                raise DimensionMismatchError(
                    f"structure is {self.structure.shape} but constraint is "
                    f"{self.constraint.shape}"
                )
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"sense must be 'minimize' or 'maximize', got {self.sense!r}")

    @property
    def n_samples(self) -> int:
        return self.structure.shape[0]

    def minimize_form(self) -> np.ndarray:
        """Structure matrix of the equivalent minimization problem."""
        if self.sense == "minimize":
            return self.structure
        return -self.structure

    def constraint_matrix(self) -> np.ndarray:
        """The constraint as an explicit array (identity materialized)."""
        if self.constraint is None:
            return np.eye(self.n_samples)
        return self.constraint


def _pairwise_sqdist(x: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between columns of x, clipped at zero."""
    sq = np.sum(x * x, axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x.T @ x)
    np.clip(d2, 0.0, None, out=d2)
    return d2


def knn_neighbors(x, k: int) -> NeighborGraph:
    """Euclidean k-nearest neighbors of every sample (column) of x.

    Self-matches are excluded; exact distance ties are broken toward the
    smaller sample index.
    """
    arr = as_dense(x, "X")
    n = arr.shape[1]
    if not 1 <= k <= n - 1:
        raise KTooLargeError(f"k={k} must lie in [1, {n - 1}] for {n} samples")
    d2 = _pairwise_sqdist(arr)
    np.fill_diagonal(d2, np.inf)
    # stable sort on distances => equal distances keep index order
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    dist = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return NeighborGraph(k=k, indices=order, distances=dist)


def lle_weights(x, graph: NeighborGraph, ridge: float = DEFAULT_RECONSTRUCTION_RIDGE) -> np.ndarray:
    """Barycentric reconstruction weights of each sample from its neighbors.

    Row i solves min ||x_i - sum_j w_ij x_j||^2 over weights supported on i's
    neighbors and summing to one.  The local Gram gets a relative ridge of
    ``ridge * trace/k`` (absolute ``ridge`` when the trace vanishes); with
    ``ridge=0`` a singular local Gram raises ``SingularLocalGramError``.
    """
    arr = as_dense(x, "X")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    n = arr.shape[1]
    if graph.n_samples != n:
        raise DimensionMismatchError(f"graph has {graph.n_samples} samples, X has {n}")
    k = graph.k
    w = np.zeros((n, n))
    ones = np.ones(k)
    for i in range(n):
        nbrs = graph.indices[i]
        z = arr[:, nbrs] - arr[:, [i]]
        g = z.T @ z
        g = (g + g.T) / 2.0
        tr = np.trace(g)
        eps = ridge * tr / k if tr > 0.0 else ridge
        if eps > 0.0:
            g = g + eps * np.eye(k)
        try:
            sol = np.linalg.solve(g, ones)
        except np.linalg.LinAlgError:
            raise SingularLocalGramError(
                f"local Gram at sample {i} is singular and ridge=0"
            ) from None
        total = sol.sum()
        if total == 0.0 or not np.isfinite(total):
            raise SingularLocalGramError(
                f"local Gram at sample {i} is numerically singular and ridge=0"
            )
        w[i, nbrs] = sol / total
    return w


def lle_spec(x, k: int = DEFAULT_K, ridge: float = DEFAULT_RECONSTRUCTION_RIDGE) -> ManifoldSpec:
    """Locally-linear-reconstruction spec: M = (I-W)^T (I-W), C = identity."""
    arr = as_dense(x, "X")
    graph = knn_neighbors(arr, _clamp_k(k, arr.shape[1]))
    w = lle_weights(arr, graph, ridge)
    a = np.eye(arr.shape[1]) - w
    m = a.T @ a
    return ManifoldSpec((m + m.T) / 2.0, None, "minimize", "lle")


def heat_kernel_affinity(
    x, k: int = DEFAULT_K, bandwidth: float | Literal["adaptive"] = "adaptive"
) -> np.ndarray:
    """Symmetrized kNN affinity with heat-kernel edge weights.

    An (i, j) edge exists when either endpoint lists the other among its k
    nearest neighbors; its weight is exp(-d_ij^2 / bandwidth^2).  The adaptive
    bandwidth is the median distance over connected pairs.
    """
    arr = as_dense(x, "X")
    n = arr.shape[1]
    graph = knn_neighbors(arr, _clamp_k(k, n))
    connected = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), graph.k)
    cols = graph.indices.ravel()
    connected[rows, cols] = True
    connected |= connected.T
    d2 = _pairwise_sqdist(arr)
    if bandwidth == "adaptive":
        edge_d = np.sqrt(d2[np.triu(connected, k=1)])
        sigma = float(np.median(edge_d)) if edge_d.size else 0.0
        if sigma <= 0.0:
            sigma = 1.0
    else:
        sigma = float(bandwidth)
        if sigma <= 0.0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    w = np.where(connected, np.exp(-d2 / (sigma * sigma)), 0.0)
    np.fill_diagonal(w, 0.0)
    return (w + w.T) / 2.0


def graph_laplacian(affinity) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized Laplacian M = D - W and degree matrix C = D of an affinity."""
    w = check_square_symmetric(affinity, "affinity")
    deg = np.diag(w.sum(axis=1))
    return deg - w, deg


def le_spec(
    x, k: int = DEFAULT_K, bandwidth: float | Literal["adaptive"] = "adaptive"
) -> ManifoldSpec:
    """Graph-Laplacian spec: M = D - W, C = D on a heat-kernel kNN affinity."""
    w = heat_kernel_affinity(x, k, bandwidth)
    m, c = graph_laplacian(w)
    return ManifoldSpec(m, c, "minimize", "le")


def pca_spec(x, ridge: float = 1e-8) -> ManifoldSpec:
    """Variance-maximization spec on the sample Gram.

    M is the sample-centering projector; C is the inverse of the ridged Gram
    (X^T X + eps*I)^{-1} with eps = ridge * trace/n, making the constraint
    well defined for any rank of X.
    """
    arr = as_dense(x, "X")
    n = arr.shape[1]
    h = np.eye(n) - np.full((n, n), 1.0 / n)
    m = h.T @ h
    g = arr.T @ arr
    tr = np.trace(g)
    eps = ridge * tr / n if tr > 0.0 else ridge
    cinv = np.linalg.inv(g + eps * np.eye(n))
    return ManifoldSpec((m + m.T) / 2.0, (cinv + cinv.T) / 2.0, "maximize", "pca")


def npe_spec(x, k: int = DEFAULT_K, ridge: float = DEFAULT_RECONSTRUCTION_RIDGE) -> ManifoldSpec:
    """Neighborhood-preserving spec: maximize with M = -(I-W)^T (I-W), C = identity."""
    base = lle_spec(x, k, ridge)
    return ManifoldSpec(-base.structure, None, "maximize", "npe")


def lda_spec(x, labels) -> ManifoldSpec:
    """Supervised class-scatter spec.

    M block-averages within classes (M_ij = 1/n_c for same-class pairs), so it
    is an idempotent projector; C = I - M.  Classes are the integers
    0..max(labels) and every one of them must be populated.
    """
    arr = as_dense(x, "X")
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(
            f"labels must be 1-D with length {arr.shape[1]}, got shape {lab.shape}"
        )
    if not np.issubdtype(lab.dtype, np.integer):
        if not np.all(lab == lab.astype(int)):
            raise NonFiniteError("labels must be integers")
        lab = lab.astype(int)
    if lab.min() < 0:
        raise EmptyClassError("labels must be non-negative integers")
    counts = np.bincount(lab, minlength=int(lab.max()) + 1)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyClassError(f"classes {empty.tolist()} have no samples")
    n = arr.shape[1]
    m = np.zeros((n, n))
    for c, n_c in enumerate(counts):
        idx = np.flatnonzero(lab == c)
        m[np.ix_(idx, idx)] = 1.0 / n_c
    return ManifoldSpec(m, np.eye(n) - m, "maximize", "lda")


METHODS = ("lle", "le", "pca", "npe", "lda")


def build_spec(
    x,
    method: str,
    labels=None,
    k: int = DEFAULT_K,
    ridge: float = DEFAULT_RECONSTRUCTION_RIDGE,
    bandwidth: float | Literal["adaptive"] = "adaptive",
) -> ManifoldSpec:
    """Dispatch a method name to its spec builder."""
    if method == "lle":
        return lle_spec(x, k, ridge)
    if method == "le":
        return le_spec(x, k, bandwidth)
    if method == "pca":
        return pca_spec(x)
    if method == "npe":
        return npe_spec(x, k, ridge)
    if method == "lda":
        if labels is None:
            raise ValueError("method 'lda' needs labels")
        return lda_spec(x, labels)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS} or a custom spec")


def _clamp_k(k: int, n: int) -> int:
    if k < 1:
        raise KTooLargeError(f"k={k} must be >= 1")
    return min(k, n - 1)
