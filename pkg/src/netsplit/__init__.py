"""Selective inference for community contrasts after splitting a network.

Split a network into train and test parts (Gaussian or Poisson thinning,
Bernoulli fission), estimate communities on the train part, and build
confidence intervals for contrasts of community-pair means on the test part.
"""

__version__ = "0.1.0"

from ._rng import RNG_NAME, Stream, stream_id
from .community import (
    CommunityAssignment,
    DyadIndexSets,
    SpectralCommunities,
    adjusted_rand_index,
    dyad_index_sets,
    spectral_clustering,
)
from .estimands import (
    Contrast,
    cell_means_B,
    conditional_means_T,
    gamma_zero_limit,
    link_f,
    surrogate_phi,
    taylor_gap_leading,
    theta,
    xi,
)
from .exceptions import (
    DataError,
    DegenerateClusteringError,
    EmptyCellError,
    NetsplitError,
    NumericalError,
    ParameterError,
    ParseError,
)
from .inference import (
    InferenceResult,
    SelectiveInference,
    infer_bernoulli,
    infer_gaussian,
    infer_naive,
    infer_poisson,
    infer_split,
    parse_contrast,
    run_pipeline,
)
from .network import (
    DIRECTED,
    UNDIRECTED,
    EdgeDomain,
    Network,
    NetworkKind,
    active_dyads,
    read_edge_list,
    read_network,
    write_network,
)
from .sim import (
    CoverageReport,
    SbmConfig,
    Scenario,
    analyze_real,
    coverage_experiment,
    gap_curves,
    run_preset,
    sample_network,
    sbm_mean_matrix,
    tradeoff_grid,
)
from .split import SplitMode, SplitPair, SplitParams, fission_bernoulli, split_network, thin_gaussian, thin_poisson
