"""Vector-valued kernel ridge regression with exact interpolation-norm errors."""

__version__ = "0.1.0"

from .analysis import (
    RateReport,
    Schedule,
    bias_oracle,
    embed_coefficients,
    fit_rate,
    gamma_error,
    lambda_schedule,
    monte_carlo_l2_error,
    run_rate_experiment,
    theory_exponent,
)
from .estimator import (
    Dataset,
    FittedModel,
    feature_ridge_oracle,
    fit,
    fit_with_output_factor,
    load_model,
    predict,
    save_model,
)
from .kernel import KernelSpec, OutputFactorSpec, cross_matrix, gram_matrix
from .spectral import (
    SpectralModel,
    certify_effective_dimension_bound,
    effective_dimension,
    embedding_constant,
    estimate_decay,
    gamma_norm,
    nystrom_spectrum,
)
from .synth import NoiseSpec, TargetSpec, certify_mom, make_kernel_target, make_target, sample_dataset
