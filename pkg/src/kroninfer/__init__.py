"""Kronecker random graphs: generation, spectral denoising, initiator inference."""

from .validation import NumericalError, ParseError, ValidationError
from .model import (
    apply_permutation,
    build_initiator,
    kronecker_power,
    load_adjacency,
    load_edge_list,
    random_sparse_permutation,
    sample_adjacency,
    save_adjacency,
    save_edge_list,
)
from .linear_map import (
    build_signal,
    build_signal_recursive,
    digit_table,
    linearized_probability,
    rank_bound,
    signal_spectrum,
    theta_adjoint_apply,
    theta_apply,
    theta_gram,
    theta_row,
)
from .denoise import (
    DenoiseResult,
    SpectralModel,
    center_adjacency,
    denoise,
    estimate_p,
    invert_spike,
    ks_statistic,
    quarter_circle_cdf,
    quarter_circle_density,
    randomized_svd,
    shrink_singular,
    shrinkage_risk,
    spike_prediction,
    truncated_svd,
)
from .solver import (
    InferenceResult,
    SolveOutput,
    SolverConfig,
    hard_threshold,
    infer,
    soft_threshold,
    solve_iht,
    solve_ls,
    solve_relax,
)
from .datasets import (
    FeatureTable,
    TUGraph,
    extract_features,
    graph_to_adjacency,
    parse_tu_dataset,
    standardize_features,
)
from .estimators import InitiatorEstimator, KroneckerFeaturizer

__version__ = "0.1.0"
