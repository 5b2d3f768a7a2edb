"""Anisotropic covariance estimation on compact two-point homogeneous spaces."""

from .errors import *  # noqa: F401,F403
from .estimator import (
    CovEstimate,
    Dataset,
    PairDesign,
    assemble_pairs,
    fit,
    gram_matrix,
    hp_norm_sq,
    objective,
    predict,
    predict_grid,
)
from .experiments import (
    ExperimentConfig,
    RateReport,
    harmonic_mean,
    mc_l2_error,
    rate_study,
    theorem_eta,
)
from .kernel import ZonalKernel, kernel_eval, kernel_matrix, product_kernel, truncation_level, zonal_green
from .simulate import CovModel, NoiseSpec, default_model, sample_dataset, sobolev_diagnostics, true_cov
from .spaces import (
    SpaceKind,
    SpaceParams,
    cos_eps_rho,
    cos_eps_rho_matrix,
    distance_cdf,
    geodesic_distance,
    sample_uniform,
    space_params,
)
from .spectral import (
    SpectralTable,
    addition_kernel,
    eigenspace_dim,
    eigenvalue,
    jacobi_eval,
    spectral_table,
)

__version__ = "0.1.0"
