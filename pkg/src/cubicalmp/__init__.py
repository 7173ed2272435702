"""Cubical persistent homology of 2D images, multiparameter slicing,
vectorizations with analytic gradients, and diagram distances."""

from .grids import (
    BinaryGrid,
    MultiChannelImage,
    PixelCoord,
    ValueGrid,
    sublevel_set,
    superlevel_set,
)
from .engine import (
    INFINITY,
    PersistenceDiagram,
    PersistencePair,
    SortedEdgeList,
    compute_pd,
    compute_pd_batch,
    enumerate_sorted_edges,
    joint_pairs,
    scatter_gradients,
)
from .oracle import CubicalChainComplex, build_chain_complex, oracle_pd
from .filtrations import (
    BiFiltration,
    ColorMultiFiltration,
    CompactMultiFiltration,
    DEFAULT_EROSION_LEVELS,
    EmptyMaskError,
    ErosionField,
    MonotonicityError,
    channel_bifiltration,
    color_multifiltration,
    erosion_bifiltration,
    erosion_field,
    expand_bifiltration,
    reg_penalty,
    staircase,
)
from .multipers import (
    BettiTensor,
    HilbertGrid,
    SlicedDiagrams,
    betti_numbers,
    color_betti_tensor,
    color_betti_tensors,
    hilbert_function,
    slice_rows,
)
from .vectorize import (
    MPVectorization,
    PerslayGradients,
    VectorizationParams,
    betti_curve,
    finite_bars,
    induced_mp_vectorization,
    landscape,
    landscape_vector,
    perslay_gradients,
    perslay_vector,
    psi_mp,
    silhouette,
    triangle,
)
from .metrics import (
    DIAGONAL,
    MatchingResult,
    StabilityConfig,
    StabilityReport,
    bottleneck_distance,
    lipschitz_bound,
    matching_cost,
    matching_points,
    mp_diagram_distance,
    mp_vectorization_distance,
    stability_report,
    wasserstein,
)
from .io import (
    DiagramDocument,
    IOFormatError,
    VectorizationDocument,
    dumps_canonical,
    load_image,
    parse_diagram_document,
    parse_vectorization_document,
    serialize_diagram_document,
    serialize_vectorization_document,
    write_pgm,
    write_png,
)

__version__ = "0.1.0"

__all__ = [
    "BettiTensor",
    "BiFiltration",
    "BinaryGrid",
    "ColorMultiFiltration",
    "CompactMultiFiltration",
    "CubicalChainComplex",
    "DEFAULT_EROSION_LEVELS",
    "DIAGONAL",
    "DiagramDocument",
    "EmptyMaskError",
    "ErosionField",
    "HilbertGrid",
    "INFINITY",
    "IOFormatError",
    "MPVectorization",
    "MatchingResult",
    "MonotonicityError",
    "MultiChannelImage",
    "PersistenceDiagram",
    "PersistencePair",
    "PerslayGradients",
    "PixelCoord",
    "SlicedDiagrams",
    "SortedEdgeList",
    "StabilityConfig",
    "StabilityReport",
    "ValueGrid",
    "VectorizationDocument",
    "VectorizationParams",
    "betti_curve",
    "betti_numbers",
    "bottleneck_distance",
    "build_chain_complex",
    "channel_bifiltration",
    "color_betti_tensor",
    "color_betti_tensors",
    "color_multifiltration",
    "compute_pd",
    "compute_pd_batch",
    "dumps_canonical",
    "enumerate_sorted_edges",
    "erosion_bifiltration",
    "erosion_field",
    "expand_bifiltration",
    "finite_bars",
    "hilbert_function",
    "induced_mp_vectorization",
    "joint_pairs",
    "landscape",
    "landscape_vector",
    "lipschitz_bound",
    "load_image",
    "matching_cost",
    "matching_points",
    "mp_diagram_distance",
    "mp_vectorization_distance",
    "oracle_pd",
    "parse_diagram_document",
    "parse_vectorization_document",
    "perslay_gradients",
    "perslay_vector",
    "psi_mp",
    "reg_penalty",
    "scatter_gradients",
    "serialize_diagram_document",
    "serialize_vectorization_document",
    "silhouette",
    "slice_rows",
    "stability_report",
    "staircase",
    "sublevel_set",
    "superlevel_set",
    "triangle",
    "wasserstein",
    "write_pgm",
    "write_png",
]
