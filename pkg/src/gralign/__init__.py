"""Graphlet-based node embedding and network alignment toolkit."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateInputError,
    GralignError,
    ParameterError,
    ParseError,
)
from .graph import Graph, parse_edge_list, serialize_edge_list
from .generators import NoisePair, derive_seed, generate_geo, generate_sf, rewire
from .graphlets import (
    N_ORBITS,
    brute_force_orbits,
    count_orbits,
    read_gdv_file,
    write_gdv_file,
)
from .embedding import (
    FeatureMatrix,
    SimilarityMatrix,
    cosine_similarity_matrix,
    pca_reduce,
    read_similarity_file,
    write_similarity_file,
)
from .aligners import (
    Alignment,
    SaConfig,
    alignment_objective,
    node_correctness,
    read_alignment_file,
    s3_score,
    sa_align,
    wave_align,
    write_alignment_file,
)
from .harness import (
    CellMean,
    ExperimentConfig,
    ExperimentRecord,
    MethodSpec,
    NetworkSpec,
    RankTable,
    SaSettings,
    aggregate,
    graphlet_similarity,
    measure_runtimes,
    rank_methods,
    run_benchmark,
)

__all__ = [
    "__version__",
    "GralignError",
    "ParameterError",
    "ParseError",
    "ConfigError",
    "DegenerateInputError",
    "Graph",
    "parse_edge_list",
    "serialize_edge_list",
    "NoisePair",
    "derive_seed",
    "generate_geo",
    "generate_sf",
    "rewire",
    "N_ORBITS",
    "count_orbits",
    "brute_force_orbits",
    "write_gdv_file",
    "read_gdv_file",
    "FeatureMatrix",
    "SimilarityMatrix",
    "pca_reduce",
    "cosine_similarity_matrix",
    "read_similarity_file",
    "write_similarity_file",
    "Alignment",
    "SaConfig",
    "wave_align",
    "sa_align",
    "s3_score",
    "node_correctness",
    "alignment_objective",
    "write_alignment_file",
    "read_alignment_file",
    "NetworkSpec",
    "MethodSpec",
    "SaSettings",
    "ExperimentConfig",
    "ExperimentRecord",
    "CellMean",
    "RankTable",
    "run_benchmark",
    "aggregate",
    "rank_methods",
    "measure_runtimes",
    "graphlet_similarity",
]
