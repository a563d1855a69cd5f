"""Scikit-learn style estimators wrapping the consensus optimizers.

These accept per-view arrays in the sklearn orientation ``(n_samples,
n_features_v)`` and transpose at the boundary; fitted attributes are likewise
sample-major.  All three estimators share hyperparameter names:

* ``consensus_weight``     strength of the cross-view similarity coupling
* ``view_weight_reg``      additive regularizer in the view-weight update
* ``view_weight_power``    exponent on the learned view weights (> 1)
* ``n_components``         embedding dimension (int, or list per view)
* ``centroid_components``  centroid dimension (centroid scheme only)
* ``method``               per-view problem builder: lle | le | pca | npe | lda,
                           a prebuilt spec object, or a list per view
* ``n_neighbors``, ``reconstruction_ridge``, ``bandwidth``  graph-builder knobs
* ``max_iter``, ``tol``    alternating-optimization stopping rule
* ``random_state``         seed for the embedding initializer (runs are fully
                           deterministic given the seed)

``ConsensusEmbedding`` learns free (non-parametric) embeddings and therefore
has no ``transform``; the projection variants learn linear maps or kernel
coefficient maps and extend to unseen samples.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .consensus import Hyperparams, run_centroid, run_pairwise
from .projection import kernel_consensus, subspace_consensus
from .specs import ManifoldSpec, build_spec
from .validation import check_labels, check_views


class _ConsensusBase(BaseEstimator):
    """Shared fit plumbing; subclasses choose the optimizer call."""

    def _hyper(self) -> Hyperparams:
        return Hyperparams(
            consensus_weight=self.consensus_weight,
            view_weight_reg=self.view_weight_reg,
            view_weight_power=self.view_weight_power,
            dims=self.n_components,
            centroid_dim=self.centroid_components,
            max_iter=self.max_iter,
            tol=self.tol,
        )

    def _methods_list(self, n_views: int) -> list:
        m = self.method
        if isinstance(m, (str, ManifoldSpec)):
            return [m] * n_views
        out = list(m)
        if len(out) != n_views:
            raise ValueError(f"{len(out)} methods for {n_views} views")
        return out

    def _build_specs(self, views, y) -> list[ManifoldSpec]:
        methods = self._methods_list(len(views))
        labels = None
        if any(m == "lda" for m in methods if isinstance(m, str)):
            if y is None:
                raise ValueError("method='lda' requires labels y at fit time")
            labels = check_labels(y, views[0].shape[1])
        specs = []
        for v, m in enumerate(methods):
            if isinstance(m, ManifoldSpec):
                specs.append(m)
                continue
            specs.append(
                build_spec(
                    views[v],
                    m,
                    labels=labels if m == "lda" else None,
                    k=self.n_neighbors,
                    ridge=self.reconstruction_ridge,
                    bandwidth=self.bandwidth,
                )
            )
        return specs

    def _store_result(self, result) -> None:
        self.result_ = result
        self.embeddings_ = [emb.T.copy() for emb in result.embeddings]
        self.centroid_embedding_ = (
            None if result.centroid is None else result.centroid.T.copy()
        )
        self.view_weights_ = np.asarray(result.alpha, dtype=float).copy()
        self.objective_trace_ = [float(x) for x in result.objective_trace]
        self.n_iter_ = int(result.iterations_used)
        self.converged_ = bool(result.converged)

    def _readout_array(self) -> np.ndarray:
        result = self.result_
        kind = self.readout
        if kind is None:
            kind = "centroid" if self.scheme == "centroid" else "concat"
        if kind == "centroid":
            if result.centroid is None:
                raise ValueError("readout='centroid' requires scheme='centroid'")
            return result.centroid.T.copy()
        return np.hstack(self.embeddings_)


class ConsensusEmbedding(_ConsensusBase):
    """Joint free embeddings of several views with similarity consensus.

    Transductive: embeddings exist only for the fitted samples, so there is a
    ``fit_transform`` but no ``transform``.
    """

    def __init__(
        self,
        scheme="pairwise",
        method="le",
        n_components=2,
        centroid_components=None,
        consensus_weight=0.5,
        view_weight_reg=1.0,
        view_weight_power=2.0,
        n_neighbors=10,
        reconstruction_ridge=1e-3,
        bandwidth="adaptive",
        max_iter=100,
        tol=1e-6,
        readout=None,
        random_state=0,
    ):
        self.scheme = scheme
        self.method = method
        self.n_components = n_components
        self.centroid_components = centroid_components
        self.consensus_weight = consensus_weight
        self.view_weight_reg = view_weight_reg
        self.view_weight_power = view_weight_power
        self.n_neighbors = n_neighbors
        self.reconstruction_ridge = reconstruction_ridge
        self.bandwidth = bandwidth
        self.max_iter = max_iter
        self.tol = tol
        self.readout = readout
        self.random_state = random_state

    def fit(self, Xs, y=None):
        if self.scheme not in ("pairwise", "centroid"):
            raise ValueError(f"scheme must be 'pairwise' or 'centroid', got {self.scheme!r}")
        views = [x.T for x in check_views(Xs)]
        specs = self._build_specs(views, y)
        runner = run_centroid if self.scheme == "centroid" else run_pairwise
        result = runner(specs, self._hyper(), seed=self.random_state)
        self._store_result(result)
        return self

    def fit_transform(self, Xs, y=None) -> np.ndarray:
        """Fit and return the readout embedding, shape (n_samples, dim)."""
        self.fit(Xs, y)
        return self._readout_array()


class ConsensusProjection(_ConsensusBase, TransformerMixin):
    """Linear per-view projections learned under similarity consensus.

    ``transform`` concatenates the per-view projections column-wise;
    ``transform_views`` returns them separately.
    """

    def __init__(
        self,
        scheme="pairwise",
        method="pca",
        n_components=2,
        centroid_components=None,
        consensus_weight=0.5,
        view_weight_reg=1.0,
        view_weight_power=2.0,
        n_neighbors=10,
        reconstruction_ridge=1e-3,
        bandwidth="adaptive",
        max_iter=100,
        tol=1e-6,
        readout=None,
        random_state=0,
    ):
        self.scheme = scheme
        self.method = method
        self.n_components = n_components
        self.centroid_components = centroid_components
        self.consensus_weight = consensus_weight
        self.view_weight_reg = view_weight_reg
        self.view_weight_power = view_weight_power
        self.n_neighbors = n_neighbors
        self.reconstruction_ridge = reconstruction_ridge
        self.bandwidth = bandwidth
        self.max_iter = max_iter
        self.tol = tol
        self.readout = readout
        self.random_state = random_state

    def fit(self, Xs, y=None):
        views = [x.T for x in check_views(Xs)]
        specs = self._build_specs(views, y)
        model = subspace_consensus(
            views, specs, self._hyper(), scheme=self.scheme, seed=self.random_state
        )
        self.model_ = model
        self.projections_ = [w.copy() for w in model.projections]
        self._store_result(model.result)
        return self

    def transform(self, Xs) -> np.ndarray:
        check_is_fitted(self, "model_")
        views = [x.T for x in check_views(Xs)]
        return np.vstack(self.model_.transform_views(views)).T

    def transform_views(self, Xs) -> list[np.ndarray]:
        check_is_fitted(self, "model_")
        views = [x.T for x in check_views(Xs)]
        return [emb.T for emb in self.model_.transform_views(views)]


class ConsensusKernelProjection(_ConsensusBase, TransformerMixin):
    """Kernelized per-view projections learned under similarity consensus.

    ``kernel`` takes the same tokens as the command line — ``linear``,
    ``rbf[:bandwidth]``, ``polynomial[:degree[:offset]]``, ``precomputed`` — a
    kernel-spec object, or a list per view.  With precomputed kernels, fit
    expects the (n_samples, n_samples) kernel matrix as the view and
    ``transform`` expects the (n_new, n_train) cross-kernel block.
    """

    def __init__(
        self,
        scheme="pairwise",
        method="le",
        kernel="linear",
        n_components=2,
        centroid_components=None,
        consensus_weight=0.5,
        view_weight_reg=1.0,
        view_weight_power=2.0,
        n_neighbors=10,
        reconstruction_ridge=1e-3,
        bandwidth="adaptive",
        max_iter=100,
        tol=1e-6,
        readout=None,
        random_state=0,
    ):
        self.scheme = scheme
        self.method = method
        self.kernel = kernel
        self.n_components = n_components
        self.centroid_components = centroid_components
        self.consensus_weight = consensus_weight
        self.view_weight_reg = view_weight_reg
        self.view_weight_power = view_weight_power
        self.n_neighbors = n_neighbors
        self.reconstruction_ridge = reconstruction_ridge
        self.bandwidth = bandwidth
        self.max_iter = max_iter
        self.tol = tol
        self.readout = readout
        self.random_state = random_state

    def fit(self, Xs, y=None):
        views = [x.T for x in check_views(Xs)]
        specs = self._build_specs(views, y)
        model = kernel_consensus(
            views,
            specs,
            self._hyper(),
            kernels=self.kernel,
            scheme=self.scheme,
            seed=self.random_state,
        )
        self.model_ = model
        self.coefficients_ = [b.copy() for b in model.coefficients]
        self._store_result(model.result)
        return self

    def transform(self, Xs) -> np.ndarray:
        check_is_fitted(self, "model_")
        views = [x.T for x in check_views(Xs)]
        return np.vstack(self.model_.transform_views(views)).T

    def transform_views(self, Xs) -> list[np.ndarray]:
        check_is_fitted(self, "model_")
        views = [x.T for x in check_views(Xs)]
        return [emb.T for emb in self.model_.transform_views(views)]
