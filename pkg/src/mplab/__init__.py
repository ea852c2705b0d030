"""mplab: a numerical laboratory for Marchenko-Pastur spectral statistics.

The package bundles exact reference curves for the Marchenko-Pastur law,
a collection of random-vector models with and without the concentration
properties that drive the law, spectral-distribution comparison helpers,
and paired-resolvent experiments that measure how far a given model sits
from its Gaussian twin.
"""

from __future__ import annotations

from .matcore import (
    ConvergenceError,
    DomainError,
    InvalidInputError,
    Spectrum,
    as_frame,
    as_symmetric,
    coordinate_frame,
    eigh,
    haar_frame,
    psd_sqrt,
    rank_one_trace_update,
    resolvent_trace,
    spectral_norm,
)
from .mp_law import MPLaw
from .ensembles import (
    BandToeplitz,
    BlockXi,
    CovSpec,
    GaussianCov,
    IIDGaussian,
    IIDRademacher,
    IIDSparseSpike,
    Identity,
    ParseError,
    Spiked,
    Toeplitz,
    VectorModel,
    WeakDependent,
    covariance_matrix,
    derive_rng,
    model_spec_string,
    parse_cov_spec,
    parse_model_spec,
    population_covariance,
    sample_data_matrix,
    sample_vector,
)
from .spectra import (
    ESD,
    empirical_stieltjes,
    esd,
    ks_distance,
    projected_covariance,
    sample_covariance,
)
from .conditions import (
    ChebyshevCheck,
    MonteCarloEstimate,
    QuadformStat,
    chebyshev_bound_check,
    concentration_probe,
    cov_spread_stat,
    lindeberg_stat,
    mp_property_trial,
    norm_drift_stat,
    quadform_stat,
)
from .equivalence import (
    ConstantColumns,
    HeteroGapResult,
    RandomPSDUnitNorm,
    ScaledIdentity,
    SwapConfig,
    paired_gaussian,
    resolvent_gap,
    resolvent_gap_hetero,
)
from .identities import run_check, run_suite

__version__ = "0.1.0"

__all__ = [
    "BandToeplitz",
    "BlockXi",
    "ChebyshevCheck",
    "ConstantColumns",
    "ConvergenceError",
    "CovSpec",
    "DomainError",
    "ESD",
    "GaussianCov",
    "HeteroGapResult",
    "IIDGaussian",
    "IIDRademacher",
    "IIDSparseSpike",
    "Identity",
    "InvalidInputError",
    "MPLaw",
    "MonteCarloEstimate",
    "ParseError",
    "QuadformStat",
    "RandomPSDUnitNorm",
    "ScaledIdentity",
    "Spectrum",
    "Spiked",
    "SwapConfig",
    "Toeplitz",
    "VectorModel",
    "WeakDependent",
    "as_frame",
    "as_symmetric",
    "chebyshev_bound_check",
    "concentration_probe",
    "coordinate_frame",
    "cov_spread_stat",
    "covariance_matrix",
    "derive_rng",
    "eigh",
    "empirical_stieltjes",
    "esd",
    "haar_frame",
    "ks_distance",
    "lindeberg_stat",
    "model_spec_string",
    "mp_property_trial",
    "norm_drift_stat",
    "paired_gaussian",
    "parse_cov_spec",
    "parse_model_spec",
    "population_covariance",
    "projected_covariance",
    "psd_sqrt",
    "quadform_stat",
    "rank_one_trace_update",
    "resolvent_gap",
    "resolvent_gap_hetero",
    "resolvent_trace",
    "run_check",
    "run_suite",
    "sample_covariance",
    "sample_data_matrix",
    "sample_vector",
    "spectral_norm",
    "__version__",
]
