"""Benchmark harness: splits, nearest-neighbor scoring, and trial loops.

The default protocol is transductive: embeddings are computed once on all
samples (labels never reach the embedding step), then each trial re-draws a
stratified train/test split and scores a 1-nearest-neighbor classifier on the
embedded coordinates.  Projection and kernel models also support a true
out-of-sample protocol where the model is fit per trial on training samples
only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .consensus import (
    EmbeddingResult,
    Hyperparams,
    run_centroid,
    run_pairwise,
)
from .errors import (
    ClassTooSmallError,
    DimensionMismatchError,
    EmptyTrainSetError,
    InconsistentSampleCountError,
)
from .linalg import as_dense
from .projection import KernelSpec, kernel_consensus, subspace_consensus
from .specs import ManifoldSpec, build_spec


@dataclass
class ViewDataset:
    """Aligned multi-view data: one feature matrix per view plus labels."""

    views: list[np.ndarray]         # view v: (n_features_v, n_samples)
    labels: np.ndarray              # (n_samples,) ints
    name: str = "dataset"
    view_names: list[str] = field(default_factory=list)
    kernels: list[KernelSpec | None] = field(default_factory=list)

    def __post_init__(self):
        self.views = [as_dense(x, f"views[{v}]") for v, x in enumerate(self.views)]
        self.labels = np.asarray(self.labels)
        if not self.views:
            raise ValueError("dataset needs at least one view")
        n = self.views[0].shape[1]
        for v, x in enumerate(self.views):
            if x.shape[1] != n:
                raise InconsistentSampleCountError(
                    f"view 0 has {n} samples but view {v} has {x.shape[1]}"
                )
        if self.labels.ndim != 1 or self.labels.shape[0] != n:
            raise InconsistentSampleCountError(
                f"labels have shape {self.labels.shape}, expected ({n},)"
            )
        if not self.view_names:
            self.view_names = [f"view{v}" for v in range(len(self.views))]
        if not self.kernels:
            self.kernels = [None] * len(self.views)

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[1]

    @property
    def n_views(self) -> int:
        return len(self.views)

    def subset(self, indices) -> "ViewDataset":
        idx = np.asarray(indices)
        return ViewDataset(
            [x[:, idx] for x in self.views],
            self.labels[idx],
            name=self.name,
            view_names=list(self.view_names),
            kernels=list(self.kernels),
        )


@dataclass
class MethodConfig:
    """Everything needed to turn a dataset into embeddings."""

    scheme: Literal["pairwise", "centroid"] = "pairwise"
    methods: str | Sequence[str] = "le"
    hyper: Hyperparams = field(default_factory=Hyperparams)
    mode: Literal["free", "subspace", "kernel"] = "free"
    kernels: object = "linear"          # KernelSpec | str | sequence, kernel mode only
    k: int = 10
    ridge: float = 1e-3
    bandwidth: float | str = "adaptive"
    readout: Literal["concat", "centroid"] | None = None
    eval_mode: Literal["transductive", "out_of_sample"] = "transductive"

    def methods_list(self, n_views: int) -> list:
        """Per-view method names; entries may also be prebuilt ManifoldSpec objects."""
        if isinstance(self.methods, (str, ManifoldSpec)):
            return [self.methods] * n_views
        out = [m if isinstance(m, ManifoldSpec) else str(m) for m in self.methods]
        if len(out) != n_views:
            raise DimensionMismatchError(f"{len(out)} methods for {n_views} views")
        return out

    def kernels_list(self, n_views: int) -> list:
        """Per-view kernel tokens/specs, broadcasting a single value."""
        if isinstance(self.kernels, (str, KernelSpec)):
            return [self.kernels] * n_views
        out = list(self.kernels)
        if len(out) != n_views:
            raise DimensionMismatchError(f"{len(out)} kernels for {n_views} views")
        return out

    def readout_resolved(self) -> str:
        if self.readout is not None:
            return self.readout
        return "centroid" if self.scheme == "centroid" else "concat"


@dataclass
class TrialReport:
    """Per-trial accuracies plus their summary statistics."""

    accuracies: list[float]
    mean_accuracy: float
    max_accuracy: float
    config: dict

    @classmethod
    def from_accuracies(cls, accs: Sequence[float], config: dict) -> "TrialReport":
        accs = [float(a) for a in accs]
        return cls(accs, float(np.mean(accs)), float(np.max(accs)), config)


def stratified_split(labels, train_ratio: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Per-class random split hitting round(train_ratio * n) total train samples.

    Class quotas use largest-remainder rounding (ties toward the smaller class
    label) with every class keeping at least one training sample.  Requires
    every class to have at least two members.
    """
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise DimensionMismatchError(f"labels must be 1-D, got shape {lab.shape}")
    if not 0.0 < train_ratio < 1.0:
        raise ValueError(f"train_ratio must lie strictly between 0 and 1, got {train_ratio}")
    classes = np.unique(lab)
    counts = {c: int(np.sum(lab == c)) for c in classes}
    small = [c for c, n_c in counts.items() if n_c < 2]
    if small:
        raise ClassTooSmallError(f"classes {small} have fewer than 2 samples")
    n = lab.shape[0]
    target = int(round(train_ratio * n))
    # keep >= 1 train sample per class and >= 1 test sample overall
    target = min(max(target, len(classes)), n - 1)
    quota = {c: train_ratio * counts[c] for c in classes}
    take = {c: max(1, int(np.floor(quota[c]))) for c in classes}
    # largest-remainder top-up toward the exact total
    while sum(take.values()) < target:
        rem = sorted(
            ((quota[c] - take[c], -int(c)) for c in classes if take[c] < counts[c]),
            reverse=True,
        )
        if not rem:
            break
        take[-rem[0][1]] += 1
    while sum(take.values()) > target:
        rem = sorted(((quota[c] - take[c], int(c)) for c in classes if take[c] > 1))
        if not rem:
            break
        take[rem[0][1]] -= 1
    rng = np.random.default_rng(seed)
    train: list[int] = []
    test: list[int] = []
    for c in classes:
        idx = np.flatnonzero(lab == c)
        perm = rng.permutation(idx.size)
        n_tr = take[c]
        train.extend(idx[perm[:n_tr]].tolist())
        test.extend(idx[perm[n_tr:]].tolist())
    if not train:
        raise EmptyTrainSetError("split produced no training samples")
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def uniform_split(labels, train_ratio: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Class-blind random split: round(train_ratio * n) training samples."""
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise DimensionMismatchError(f"labels must be 1-D, got shape {lab.shape}")
    if not 0.0 < train_ratio < 1.0:
        raise ValueError(f"train_ratio must lie strictly between 0 and 1, got {train_ratio}")
    n = lab.shape[0]
    n_train = min(max(int(round(train_ratio * n)), 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def knn1_classify(train_embedding, train_labels, test_embedding) -> np.ndarray:
    """Nearest-training-sample labels under Euclidean distance.

    Embeddings are (dim, n) matrices; exact distance ties resolve to the
    smaller training index.
    """
    tr = as_dense(train_embedding, "train_embedding")
    te = as_dense(test_embedding, "test_embedding")
    lab = np.asarray(train_labels)
    if tr.shape[1] == 0:
        raise EmptyTrainSetError("no training samples to classify against")
    if lab.shape[0] != tr.shape[1]:
        raise DimensionMismatchError(
            f"{lab.shape[0]} train labels for {tr.shape[1]} train samples"
        )
    if tr.shape[0] != te.shape[0]:
        raise DimensionMismatchError(
            f"train embedding has dim {tr.shape[0]} but test has {te.shape[0]}"
        )
    sq_tr = np.sum(tr * tr, axis=0)[None, :]
    sq_te = np.sum(te * te, axis=0)[:, None]
    d2 = sq_te + sq_tr - 2.0 * (te.T @ tr)
    nearest = np.argmin(d2, axis=1)  # first minimum = smallest train index
    return lab[nearest]


def make_synthetic_multiview(
    n_per_class: int,
    n_classes: int,
    latent_dim: int,
    view_dims: Sequence[int],
    noise: float,
    seed,
    identity_maps: bool = False,
    center_scale: float = 3.0,
) -> ViewDataset:
    """Shared-latent multi-view clusters.

    Class centers are drawn in a latent space, every sample adds unit latent
    scatter around its center, and each view observes the latents through its
    own full-rank linear map plus view-private Gaussian noise.  With
    ``identity_maps=True`` a view whose dimension equals ``latent_dim`` sees
    the latents unchanged.
    """
    if n_classes < 1 or n_per_class < 1:
        raise ValueError("n_classes and n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    centers = center_scale * rng.normal(size=(n_classes, latent_dim))
    labels = np.repeat(np.arange(n_classes), n_per_class)
    latents = centers[labels] + rng.normal(size=(labels.size, latent_dim))
    views = []
    for d in view_dims:
        if identity_maps and d == latent_dim:
            amap = np.eye(latent_dim)
        else:
            amap = rng.normal(size=(d, latent_dim)) / np.sqrt(latent_dim)
        x = amap @ latents.T
        if noise > 0.0:
            x = x + noise * rng.normal(size=x.shape)
        views.append(x)
    return ViewDataset(views, labels, name="synthetic")


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Per-trial seed derived from (master, trial); adding trials never
    changes earlier ones."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))


def embed_dataset(dataset: ViewDataset, config: MethodConfig, seed=None):
    """Fit one consensus model on the whole dataset.

    Returns (readout embedding (dim x n), fitted object): an
    :class:`EmbeddingResult` in free mode, a projection/kernel model otherwise.
    """
    specs = _dataset_specs(dataset, config)
    if config.mode == "free":
        runner = run_pairwise if config.scheme == "pairwise" else run_centroid
        result = runner(specs, config.hyper, seed=seed)
        fitted = result
    elif config.mode == "subspace":
        fitted = subspace_consensus(
            dataset.views, specs, config.hyper, scheme=config.scheme, seed=seed
        )
        result = fitted.result
    elif config.mode == "kernel":
        kernels = _dataset_kernels(dataset, config)
        fitted = kernel_consensus(
            dataset.views, specs, config.hyper, kernels=kernels,
            scheme=config.scheme, seed=seed,
        )
        result = fitted.result
    else:
        raise ValueError(f"unknown mode {config.mode!r}")
    return _readout(result, config), fitted


def run_trials(
    dataset: ViewDataset,
    config: MethodConfig,
    trials: int,
    seed: int,
    train_ratio: float = 0.7,
    stratify: bool = True,
) -> TrialReport:
    """Repeated split/score trials of one configuration.

    Transductive mode embeds once and re-splits per trial; out-of-sample mode
    refits the (projection or kernel) model on each trial's training samples
    and maps the held-out samples through it.  ``stratify=False`` switches to
    a class-blind uniform split.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if config.eval_mode == "out_of_sample" and config.mode == "free":
        raise ValueError("out-of-sample evaluation needs mode='subspace' or 'kernel'")
    splitter = stratified_split if stratify else uniform_split
    accs: list[float] = []
    emb = None
    if config.eval_mode == "transductive":
        emb, _ = embed_dataset(dataset, config, seed=seed)
    for t in range(trials):
        ts = trial_seed(seed, t)
        train_idx, test_idx = splitter(dataset.labels, train_ratio, ts)
        if config.eval_mode == "transductive":
            pred = knn1_classify(emb[:, train_idx], dataset.labels[train_idx], emb[:, test_idx])
        else:
            train_ds = dataset.subset(train_idx)
            _, fitted = embed_dataset(train_ds, config, seed=seed)
            tr_emb = np.vstack(fitted.transform_views([x[:, train_idx] for x in dataset.views]))
            te_emb = np.vstack(fitted.transform_views([x[:, test_idx] for x in dataset.views]))
            pred = knn1_classify(tr_emb, dataset.labels[train_idx], te_emb)
        accs.append(float(np.mean(pred == dataset.labels[test_idx])))
    cfg = {
        "scheme": config.scheme,
        "mode": config.mode,
        "methods": [
            m if isinstance(m, str) else m.method
            for m in config.methods_list(dataset.n_views)
        ],
        "readout": config.readout_resolved(),
        "eval_mode": config.eval_mode,
        "trials": trials,
        "train_ratio": train_ratio,
        "stratify": bool(stratify),
        "seed": int(seed),
    }
    return TrialReport.from_accuracies(accs, cfg)


def single_view_baselines(
    dataset: ViewDataset,
    config: MethodConfig,
    trials: int,
    seed: int,
    train_ratio: float = 0.7,
) -> list[TrialReport]:
    """Per-view uncoupled baselines under the same split protocol."""
    methods = config.methods_list(dataset.n_views)
    dims = config.hyper.dims_list(dataset.n_views, dataset.n_samples)
    reports = []
    for v in range(dataset.n_views):
        sub = ViewDataset([dataset.views[v]], dataset.labels, name=dataset.name)
        cfg = MethodConfig(
            scheme="pairwise",
            methods=methods[v],
            hyper=Hyperparams(
                consensus_weight=0.0,
                view_weight_reg=config.hyper.view_weight_reg,
                view_weight_power=config.hyper.view_weight_power,
                dims=dims[v],
                max_iter=config.hyper.max_iter,
                tol=config.hyper.tol,
            ),
            mode="free",
            k=config.k,
            ridge=config.ridge,
            bandwidth=config.bandwidth,
            readout="concat",
        )
        report = run_trials(sub, cfg, trials, seed, train_ratio)
        report.config["view"] = v
        reports.append(report)
    return reports


def _dataset_specs(dataset: ViewDataset, config: MethodConfig):
    methods = config.methods_list(dataset.n_views)
    n = dataset.n_samples
    specs = []
    for v, m in enumerate(methods):
        if isinstance(m, ManifoldSpec):
            if m.structure.shape[0] != n:
                raise DimensionMismatchError(
                    f"prebuilt spec for view {v} is {m.structure.shape[0]}x"
                    f"{m.structure.shape[0]} but the dataset has {n} samples"
                )
            specs.append(m)
            continue
        specs.append(
            build_spec(
                dataset.views[v],
                m,
                labels=dataset.labels if m == "lda" else None,
                k=config.k,
                ridge=config.ridge,
                bandwidth=config.bandwidth,
            )
        )
    return specs


def _dataset_kernels(dataset: ViewDataset, config: MethodConfig):
    """Per-view kernels; a kernel declared by the dataset wins over the config's."""
    if any(k is not None for k in dataset.kernels):
        fallback = config.kernels_list(dataset.n_views)
        return [
            k if k is not None else fallback[v] for v, k in enumerate(dataset.kernels)
        ]
    return config.kernels


def _readout(result: EmbeddingResult, config: MethodConfig) -> np.ndarray:
    kind = config.readout_resolved()
    if kind == "centroid":
        if result.centroid is None:
            raise ValueError("centroid readout needs scheme='centroid'")
        return result.centroid
    return np.vstack(result.embeddings)
