"""Hypergraph spectral clustering with pairwise, kNN and over-clustering hyperedges."""
from .core import (
    ConvergenceWarning,
    Dataset,
    DegenerateGraphError,
    DegenerateScaleError,
    HyperclustError,
    HypergraphIncidence,
    HyperParams,
    InvalidInputError,
    InvalidParameterError,
    NumericalError,
    Partition,
    PartitionCandidate,
    cosine_similarity,
    degree_matrix,
    laplacian,
)
from .evaluation import CorruptionSpec, ContingencyTable, accuracy, corrupt, nmi
from .fusion import ABLATIONS, WEIGHT_GRID, FusionWeights, ablation_config, fuse
from .harness import (
    ExperimentConfig,
    ParseError,
    ResultRecord,
    emit_results,
    hypergraph_similarity,
    load_config,
    load_csv,
    load_results,
    run_method,
    run_pipeline,
    synth_blobs,
    write_csv,
)
from .knn import knn_features, knn_hyperedges, knn_incidence, knn_similarity, nearest_neighbors
from .overclustering import (
    CommunitySet,
    build_communities,
    classic_spectral,
    kmeans,
    multiclass_spectral,
    overclustering_features,
    overclustering_incidence,
    overclustering_similarity,
)
from .pairwise import KernelSpec, default_sigma, gaussian_kernel, mean_distance, pairwise_incidence, pairwise_similarity, sigma_grid
from .partitioning import (
    cluster,
    dhpc_objective,
    discrete_refine,
    generalized_eig,
    newton_lanczos,
    sym_eig,
    trace_ratio,
)

__version__ = "0.1.0"
