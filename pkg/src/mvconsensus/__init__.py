"""Multi-view dimension reduction with cross-view similarity consensus.

The package couples per-view trace-optimization problems (locally linear
reconstruction, heat-kernel neighborhood graphs, variance/scatter criteria)
through a similarity-consensus penalty, solved by alternating generalized
eigendecompositions with learned view weights.  Two coupling schemes are
provided — every pair of views, or every view against a shared centroid —
plus linear-projection and kernelized variants that extend to unseen samples,
a benchmarking harness, and a deterministic command-line interface.
"""

__version__ = "0.1.0"

from .consensus import (
    ConsensusState,
    EmbeddingResult,
    Hyperparams,
    IterationRecord,
    consensus_similarity,
    init_embeddings,
    objective_centroid,
    objective_pairwise,
    run_centroid,
    run_pairwise,
    single_view_embedding,
    update_alpha,
)
from .errors import (
    CholeskyError,
    ClassTooSmallError,
    DimensionMismatchError,
    DimensionTooLargeError,
    EmptyClassError,
    EmptyTrainSetError,
    InconsistentSampleCountError,
    KTooLargeError,
    MissingFileError,
    MvcError,
    NonFiniteError,
    NonPSDKernelError,
    NonPositiveDenominatorError,
    NonSquareError,
    NonSymmetricError,
    ParseError,
    RankDeficientGramError,
    SingularLocalGramError,
)
from .estimators import (
    ConsensusEmbedding,
    ConsensusKernelProjection,
    ConsensusProjection,
)
from .evaluation import (
    MethodConfig,
    TrialReport,
    ViewDataset,
    knn1_classify,
    make_synthetic_multiview,
    run_trials,
    single_view_baselines,
    stratified_split,
    trial_seed,
    uniform_split,
)
from .linalg import gen_eig_extreme, gram, sym_eig, trace_form
from .projection import (
    KernelModel,
    KernelSpec,
    ProjectionModel,
    apply_kernel,
    apply_projection,
    kernel_consensus,
    subspace_consensus,
)
from .specs import (
    ManifoldSpec,
    build_spec,
    lda_spec,
    le_spec,
    lle_spec,
    npe_spec,
    pca_spec,
)

__all__ = [
    "__version__",
    # optimizers
    "Hyperparams",
    "ConsensusState",
    "IterationRecord",
    "EmbeddingResult",
    "run_pairwise",
    "run_centroid",
    "init_embeddings",
    "single_view_embedding",
    "update_alpha",
    "consensus_similarity",
    "objective_pairwise",
    "objective_centroid",
    # problem builders
    "ManifoldSpec",
    "build_spec",
    "lle_spec",
    "le_spec",
    "pca_spec",
    "npe_spec",
    "lda_spec",
    # linear algebra
    "sym_eig",
    "gen_eig_extreme",
    "gram",
    "trace_form",
    # projection / kernel variants
    "ProjectionModel",
    "KernelModel",
    "KernelSpec",
    "subspace_consensus",
    "kernel_consensus",
    "apply_projection",
    "apply_kernel",
    # estimators
    "ConsensusEmbedding",
    "ConsensusProjection",
    "ConsensusKernelProjection",
    # evaluation
    "ViewDataset",
    "MethodConfig",
    "TrialReport",
    "stratified_split",
    "uniform_split",
    "knn1_classify",
    "run_trials",
    "single_view_baselines",
    "make_synthetic_multiview",
    "trial_seed",
    # errors
    "MvcError",
    "NonSquareError",
    "NonSymmetricError",
    "NonFiniteError",
    "CholeskyError",
    "DimensionMismatchError",
    "DimensionTooLargeError",
    "EmptyTrainSetError",
    "KTooLargeError",
    "SingularLocalGramError",
    "EmptyClassError",
    "NonPositiveDenominatorError",
    "RankDeficientGramError",
    "NonPSDKernelError",
    "ClassTooSmallError",
    "InconsistentSampleCountError",
    "MissingFileError",
    "ParseError",
]
