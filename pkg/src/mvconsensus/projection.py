"""Parameterized embeddings: linear projections and kernel expansions.

The free optimizer searches over all row-orthogonal embeddings; the variants
here constrain each view's embedding to ``Y = W^T X`` (a linear map of the
input features) or ``Y = B^T K`` (a kernel expansion over training samples).
Both reuse the alternating engine from :mod:`.consensus` by conjugating every
per-view pencil with the view's feature or kernel matrix, and both support
out-of-sample mapping of new samples, which the free embeddings cannot do.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from .consensus import EmbeddingResult, Hyperparams, Scheme, _run
from .errors import (
    CholeskyError,
    DimensionMismatchError,
    NonPSDKernelError,
    RankDeficientGramError,
)
from .linalg import PencilSolver, as_dense
from .specs import ManifoldSpec

KernelKind = Literal["linear", "rbf", "polynomial", "precomputed"]

# Negative kernel eigenvalues above this (relative to the trace) are treated
# as rounding noise and clipped to zero; anything below is a hard error.
KERNEL_PSD_RTOL = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """A positive semi-definite kernel and its parameters.

    ``bandwidth=None`` on an rbf kernel means "resolve to the median pairwise
    distance of the training samples at fit time"; the resolved value is
    stored on the fitted model so out-of-sample mapping reuses it.
    """

    kind: KernelKind = "linear"
    bandwidth: float | None = None
    degree: int = 3
    offset: float = 1.0

    def resolve(self, x_train: np.ndarray) -> "KernelSpec":
        """Pin data-dependent parameters against the training features."""
        if self.kind == "rbf" and self.bandwidth is None:
            d = _pairwise_dist(x_train)
            off = d[np.triu_indices_from(d, k=1)]
            sigma = float(np.median(off)) if off.size else 1.0
            if sigma <= 0.0:
                sigma = 1.0
            return replace(self, bandwidth=sigma)
        if self.kind == "rbf" and self.bandwidth <= 0.0:
            raise ValueError(f"rbf bandwidth must be positive, got {self.bandwidth}")
        return self

    def cross(self, x_train: np.ndarray, x_new: np.ndarray) -> np.ndarray:
        """Kernel values k(train_i, new_j) as an (n_train, n_new) matrix."""
        if self.kind == "precomputed":
            raise ValueError("precomputed kernels cannot generate new columns")
        xt = as_dense(x_train, "x_train")
        xn = as_dense(x_new, "x_new")
        if xt.shape[0] != xn.shape[0]:
            raise DimensionMismatchError(
                f"train has {xt.shape[0]} features but new data has {xn.shape[0]}"
            )
        if self.kind == "linear":
            return xt.T @ xn
        if self.kind == "rbf":
            if self.bandwidth is None:
                raise ValueError("rbf bandwidth unresolved; call resolve() first")
            sq_t = np.sum(xt * xt, axis=0)[:, None]
            sq_n = np.sum(xn * xn, axis=0)[None, :]
            d2 = np.clip(sq_t + sq_n - 2.0 * (xt.T @ xn), 0.0, None)
            return np.exp(-d2 / (self.bandwidth * self.bandwidth))
        if self.kind == "polynomial":
            return (xt.T @ xn + self.offset) ** self.degree
        raise ValueError(f"unknown kernel kind {self.kind!r}")


def as_kernel_spec(kernel) -> KernelSpec:
    """Accept a KernelSpec or a kernel token string.

    Tokens: ``linear``, ``precomputed``, ``rbf[:bandwidth]``,
    ``polynomial[:degree[:offset]]``.
    """
    if isinstance(kernel, KernelSpec):
        return kernel
    if not isinstance(kernel, str):
        raise TypeError(f"kernel must be a KernelSpec or string, got {type(kernel)}")
    parts = kernel.split(":")
    kind = parts[0]
    if kind in ("linear", "precomputed"):
        if len(parts) > 1:
            raise ValueError(f"{kind} kernels take no ':' fields")
        return KernelSpec(kind=kind)
    if kind == "rbf":
        if len(parts) > 2:
            raise ValueError("rbf takes at most one ':' field (the bandwidth)")
        bw = None
        if len(parts) == 2:
            bw = float(parts[1])
            if bw <= 0:
                raise ValueError(f"bandwidth must be positive, got {bw}")
        return KernelSpec(kind="rbf", bandwidth=bw)
    if kind == "polynomial":
        if len(parts) > 3:
            raise ValueError("polynomial takes at most two ':' fields (degree, offset)")
        degree = int(parts[1]) if len(parts) >= 2 else 3
        if degree < 1:
            raise ValueError(f"degree must be at least 1, got {degree}")
        offset = float(parts[2]) if len(parts) >= 3 else 1.0
        return KernelSpec(kind="polynomial", degree=degree, offset=offset)
    raise ValueError(f"unknown kernel {kernel!r}")


def prepare_kernel_matrix(k) -> np.ndarray:
    """Symmetrize and eigenvalue-clip a kernel matrix.

    Negative eigenvalues within ``KERNEL_PSD_RTOL * trace`` of zero are set to
    zero; more negative spectra raise :class:`NonPSDKernelError`.
    """
    arr = as_dense(k, "kernel")
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"kernel matrix must be square, got {arr.shape}")
    arr = (arr + arr.T) / 2.0
    w, v = np.linalg.eigh(arr)
    scale = max(float(np.trace(arr)), 1e-300)
    if w[0] < -KERNEL_PSD_RTOL * scale:
        raise NonPSDKernelError(
            f"kernel matrix has eigenvalue {w[0]:.6g} below -{KERNEL_PSD_RTOL} * trace"
        )
    if w[0] < 0.0:
        w = np.clip(w, 0.0, None)
        arr = (v * w) @ v.T
        arr = (arr + arr.T) / 2.0
    return arr


class _ConjugatedViewSolver:
    """Per-view block solver for pencils conjugated by a fixed basis matrix.

    ``basis_matrix`` is the view's feature matrix X (projection variant) or
    its kernel matrix K (kernel variant).  Each solve conjugates the incoming
    structure matrix, solves the reduced pencil, and keeps the coefficient
    block so the caller can assemble an out-of-sample model.
    """

    def __init__(self, basis_matrix: np.ndarray, spec: ManifoldSpec, label: str):
        self.basis_matrix = basis_matrix
        f = basis_matrix @ spec.constraint_matrix() @ basis_matrix.T
        f = (f + f.T) / 2.0
        try:
            self.pencil = PencilSolver(f, f.shape[0])
        except CholeskyError as exc:
            raise RankDeficientGramError(
                f"{label}: conjugated constraint matrix is rank deficient "
                f"beyond ridge repair"
            ) from exc
        self.coefficients: np.ndarray | None = None

    def solve(self, lmat: np.ndarray, dim: int) -> np.ndarray:
        e = self.basis_matrix @ lmat @ self.basis_matrix.T
        e = (e + e.T) / 2.0
        res = self.pencil.extreme(e, dim, "smallest")
        self.coefficients = res.eigenvectors
        return self.coefficients.T @ self.basis_matrix


@dataclass
class ProjectionModel:
    """Fitted linear maps W_v plus the run that produced them."""

    projections: list[np.ndarray]  # view v: (n_features_v, dim_v)
    result: EmbeddingResult | None

    @property
    def alpha(self) -> np.ndarray:
        return self.result.alpha

    def transform_views(self, views: Sequence[np.ndarray]) -> list[np.ndarray]:
        return apply_projection(self, views)


@dataclass
class KernelModel:
    """Fitted kernel expansions B_v plus what is needed to embed new samples."""

    coefficients: list[np.ndarray]        # view v: (n_train, dim_v)
    kernels: list[KernelSpec]             # resolved (bandwidths pinned)
    train_features: list[np.ndarray | None]  # None for precomputed kernels
    result: EmbeddingResult | None

    @property
    def alpha(self) -> np.ndarray:
        return self.result.alpha

    def transform_views(self, views: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Embed new samples; views are features, or (n_train, n_new) kernel
        blocks for precomputed-kernel views."""
        blocks = []
        for v, x in enumerate(views):
            if self.kernels[v].kind == "precomputed":
                blocks.append(as_dense(x, f"kernel block {v}"))
            else:
                if self.train_features[v] is None:
                    raise ValueError(f"view {v} has no stored training features")
                blocks.append(self.kernels[v].cross(self.train_features[v], as_dense(x)))
        return apply_kernel(self, blocks)


def subspace_consensus(
    views: Sequence[np.ndarray],
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams | None = None,
    scheme: Scheme = "pairwise",
    seed: int | None = None,
) -> ProjectionModel:
    """Consensus run constrained to linear projections of each view's features."""
    hp = hp or Hyperparams()
    xs = [as_dense(x, f"views[{v}]") for v, x in enumerate(views)]
    if len(xs) != len(specs):
        raise DimensionMismatchError(f"{len(xs)} views but {len(specs)} specs")
    for v, (x, s) in enumerate(zip(xs, specs)):
        if x.shape[1] != s.n_samples:
            raise DimensionMismatchError(
                f"views[{v}] has {x.shape[1]} samples but its spec has {s.n_samples}"
            )
    solvers = [_ConjugatedViewSolver(x, s, f"view {v}") for v, (x, s) in enumerate(zip(xs, specs))]
    result = _run(specs, hp, scheme, seed, solvers)
    return ProjectionModel([s.coefficients for s in solvers], result)


def kernel_consensus(
    views: Sequence[np.ndarray],
    specs: Sequence[ManifoldSpec],
    hp: Hyperparams | None = None,
    kernels="linear",
    scheme: Scheme = "pairwise",
    seed: int | None = None,
) -> KernelModel:
    """Consensus run constrained to kernel expansions over the training samples.

    ``views[v]`` holds raw features (features x samples) unless ``kernels[v]``
    is precomputed, in which case it is the kernel matrix itself.
    """
    hp = hp or Hyperparams()
    if isinstance(kernels, (str, KernelSpec)):
        kspecs = [as_kernel_spec(kernels)] * len(views)
    else:
        kspecs = [as_kernel_spec(k) for k in kernels]
    if len(kspecs) != len(views) or len(views) != len(specs):
        raise DimensionMismatchError(
            f"{len(views)} views, {len(specs)} specs, {len(kspecs)} kernels"
        )
    kmats: list[np.ndarray] = []
    feats: list[np.ndarray | None] = []
    resolved: list[KernelSpec] = []
    for v, (x, ks) in enumerate(zip(views, kspecs)):
        if ks.kind == "precomputed":
            kmat = prepare_kernel_matrix(x)
            feats.append(None)
            resolved.append(ks)
        else:
            xa = as_dense(x, f"views[{v}]")
            rs = ks.resolve(xa)
            kmat = prepare_kernel_matrix(rs.cross(xa, xa))
            feats.append(xa)
            resolved.append(rs)
        if kmat.shape[0] != specs[v].n_samples:
            raise DimensionMismatchError(
                f"views[{v}] yields a {kmat.shape[0]}-sample kernel but its spec "
                f"has {specs[v].n_samples}"
            )
        kmats.append(kmat)
    solvers = [
        _ConjugatedViewSolver(kmat, s, f"view {v}")
        for v, (kmat, s) in enumerate(zip(kmats, specs))
    ]
    result = _run(specs, hp, scheme, seed, solvers)
    return KernelModel([s.coefficients for s in solvers], resolved, feats, result)


def apply_projection(model: ProjectionModel, views: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Map new feature matrices (features x samples) through fitted projections."""
    if len(views) != len(model.projections):
        raise DimensionMismatchError(
            f"model has {len(model.projections)} views, got {len(views)}"
        )
    out = []
    for v, (w, x) in enumerate(zip(model.projections, views)):
        xa = as_dense(x, f"views[{v}]")
        if xa.shape[0] != w.shape[0]:
            raise DimensionMismatchError(
                f"views[{v}] has {xa.shape[0]} features, projection expects {w.shape[0]}"
            )
        out.append(w.T @ xa)
    return out


def apply_kernel(model: KernelModel, kernel_blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Map (n_train, n_new) kernel blocks through fitted kernel expansions."""
    if len(kernel_blocks) != len(model.coefficients):
        raise DimensionMismatchError(
            f"model has {len(model.coefficients)} views, got {len(kernel_blocks)}"
        )
    out = []
    for v, (b, kb) in enumerate(zip(model.coefficients, kernel_blocks)):
        ka = as_dense(kb, f"kernel block {v}")
        if ka.shape[0] != b.shape[0]:
            raise DimensionMismatchError(
                f"kernel block {v} has {ka.shape[0]} training rows, expected {b.shape[0]}"
            )
        out.append(b.T @ ka)
    return out


def _pairwise_dist(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=0)
    d2 = np.clip(sq[:, None] + sq[None, :] - 2.0 * (x.T @ x), 0.0, None)
    return np.sqrt(d2)
