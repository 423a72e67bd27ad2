"""Subspace clustering through simplex-constrained sparse representations.

Each point is written as a convex combination of its stretched nearest
neighbors by solving a small weighted quadratic program over the
probability simplex; the coefficients form an affinity graph that is
clustered spectrally and optionally refined by alternating subspace
fitting, with or without known-label constraints and active label
queries.
"""

from .active import (
    ClusterState,
    ConstraintStore,
    QueryUtility,
    RoundResult,
    compute_utilities,
    select_queries,
    state_from_labels,
    update_dissimilarities,
    constrained_round,
)
from .backend import active_backend, available_backends, use
from .bench import (
    TABLES,
    ExperimentConfig,
    ExperimentResult,
    load_result,
    run_experiment,
    save_result,
)
from .datasets import (
    LabelledData,
    generate_k_subspaces,
    generate_two_subspaces,
    load_csv,
    load_idx,
    pca_project,
    sample_per_class,
)
from .errors import (
    BudgetExceedsUnlabelled,
    DataError,
    DegenerateCluster,
    DegenerateNearest,
    EmptyNeighborhood,
    InfeasibleLabels,
    MalformedIdx,
    NotConverged,
    OrthogonalPoint,
    ZeroNormPoint,
)
from .geometry import (
    Neighborhood,
    PointCloud,
    build_all_neighborhoods,
    build_neighborhood,
    dissimilarity,
    normalize,
    stretch,
)
from .metrics import accuracy, confusion_matrix
from .pipeline import Config, PipelineResult, cluster_cloud, solve_all
from .simplex_qp import (
    KktCertificate,
    SimplexProblem,
    SimplexSolution,
    assemble,
    certify_kkt,
    objective_value,
    project_simplex,
    rho_lower_bound,
    solve,
    trivial_solution_condition,
)
from .spectral import (
    ClusterAssignment,
    build_affinity,
    kmeans,
    laplacian_embedding,
    spectral_cluster,
)
from .subspace import (
    KscResult,
    KsccResult,
    SubspaceBasis,
    fit_basis,
    ksc,
    kscc,
    reconstruction_error,
    residual_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceedsUnlabelled",
    "ClusterAssignment",
    "ClusterState",
    "Config",
    "ConstraintStore",
    "DataError",
    "DegenerateCluster",
    "DegenerateNearest",
    "EmptyNeighborhood",
    "ExperimentConfig",
    "ExperimentResult",
    "InfeasibleLabels",
    "KktCertificate",
    "KscResult",
    "KsccResult",
    "LabelledData",
    "MalformedIdx",
    "Neighborhood",
    "NotConverged",
    "OrthogonalPoint",
    "PipelineResult",
    "PointCloud",
    "QueryUtility",
    "RoundResult",
    "SimplexProblem",
    "SimplexSolution",
    "SubspaceBasis",
    "TABLES",
    "ZeroNormPoint",
    "accuracy",
    "active_backend",
    "assemble",
    "available_backends",
    "build_affinity",
    "build_all_neighborhoods",
    "build_neighborhood",
    "certify_kkt",
    "cluster_cloud",
    "compute_utilities",
    "confusion_matrix",
    "dissimilarity",
    "fit_basis",
    "generate_k_subspaces",
    "generate_two_subspaces",
    "kmeans",
    "ksc",
    "kscc",
    "laplacian_embedding",
    "load_csv",
    "load_idx",
    "load_result",
    "normalize",
    "objective_value",
    "pca_project",
    "project_simplex",
    "reconstruction_error",
    "residual_matrix",
    "rho_lower_bound",
    "run_experiment",
    "sample_per_class",
    "save_result",
    "select_queries",
    "solve",
    "solve_all",
    "spectral_cluster",
    "state_from_labels",
    "stretch",
    "trivial_solution_condition",
    "update_dissimilarities",
    "use",
    "constrained_round",
]
