"""combfit: the Comb-Bernoulli model for dependent sparse claim time series.

Mixed marginals (atom at zero plus a lognormal severity) are coupled by a
Gaussian copula.  The package provides the exact log-likelihood, two-stage
estimation with parametric-bootstrap intervals, linear-cost simulation, and
the benchmark tools used to compare against zero-mixed and subset-process
constructions.
"""

from .bootstrap import BootstrapOptions, BootstrapResult, parametric_bootstrap
from .gaussian_copula import (
    GaussianCopula,
    copula_cdf,
    copula_density,
    mixed_partial,
    sample,
    sample_student_t,
    survival_restricted,
)
from .data_io import DatasetSummary, load_claims, summarize, write_claims
from .errors import (
    BootstrapUnstable,
    CombfitError,
    DomainError,
    FactorizationError,
    InsufficientPositives,
    LikelihoodUnderflow,
    ParameterError,
    ParseError,
    SamplerStarved,
    ShapeError,
)
from .estimation import (
    FitOptions,
    FitReport,
    angles_from_correlation,
    correlation_from_angles,
    fit_ifm,
    limit_loglik,
)
from .levy_bridge import (
    ClaytonLevyCopula,
    IntensitySet,
    continuous_time_loglik_2d,
    intensities_from_model,
    simulate_levy,
)
from .marginals import LognormalSeverity, MixedMarginal, fit_marginal, marginal_cdf, mixed_quantile
from .comb_bernoulli import (
    ActiveSet,
    ClaimSeries,
    CombBernoulliModel,
    active_set,
    active_set_probability,
    log_likelihood,
    loglik_closed_form_2d,
    loglik_closed_form_3d,
    simulate,
)
from .mvn_kernels import cholesky, mvn_cdf, mvn_pdf, partition, std_normal
from .spearman import SpearmanBounds, spearman_bounds, spearman_transform
from .zero_mixed import ZeroMixedReport, zero_mixed_fit

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "BootstrapOptions",
    "BootstrapResult",
    "BootstrapUnstable",
    "ClaimSeries",
    "ClaytonLevyCopula",
    "CombBernoulliModel",
    "CombfitError",
    "DatasetSummary",
    "DomainError",
    "FactorizationError",
    "FitOptions",
    "FitReport",
    "GaussianCopula",
    "InsufficientPositives",
    "IntensitySet",
    "LikelihoodUnderflow",
    "LognormalSeverity",
    "MixedMarginal",
    "ParameterError",
    "ParseError",
    "SamplerStarved",
    "ShapeError",
    "SpearmanBounds",
    "ZeroMixedReport",
    "active_set",
    "active_set_probability",
    "angles_from_correlation",
    "cholesky",
    "continuous_time_loglik_2d",
    "copula_cdf",
    "copula_density",
    "correlation_from_angles",
    "fit_ifm",
    "fit_marginal",
    "intensities_from_model",
    "limit_loglik",
    "load_claims",
    "log_likelihood",
    "loglik_closed_form_2d",
    "loglik_closed_form_3d",
    "marginal_cdf",
    "mixed_partial",
    "mixed_quantile",
    "mvn_cdf",
    "mvn_pdf",
    "parametric_bootstrap",
    "partition",
    "sample",
    "sample_student_t",
    "simulate",
    "simulate_levy",
    "spearman_bounds",
    "spearman_transform",
    "std_normal",
    "summarize",
    "survival_restricted",
    "write_claims",
    "zero_mixed_fit",
]
