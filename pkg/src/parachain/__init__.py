"""parachain: long-run covariance and effective-sample-size estimation
for parallel MCMC output.

The central estimand is the p x p matrix Sigma in the central limit
theorem sqrt(m n) (mu_hat - mu) -> N(0, Sigma) for the average of m
independent chains of length n. The replicated batch means estimator
pools batch means across chains and centers them at the global mean, so
chains that have not yet met inflate the estimate instead of silently
deflating it the way per-chain averaging does.
"""

__version__ = "0.1.0"

from .chainio import read_chains, write_chains
from .config import ExperimentConfig, config_from_dict, load_config
from .diagnostics import (
    EssReport,
    RegionTest,
    average_sample_covariance,
    confidence_region_test,
    ess,
    termination_check,
)
from .errors import (
    BadLugsailParams,
    ConfigError,
    DegenerateInput,
    DomainError,
    InputError,
    NotPositiveDefinite,
    NumericError,
    ParachainError,
    ParseError,
    TooFewBatches,
    TooFewChains,
    UnequalChainLengths,
    UsageError,
)
from .estimators import (
    BatchSpec,
    CovarianceEstimate,
    abm,
    autocovariance,
    batch_means,
    bm,
    default_batch_size,
    lugsail_bm,
    lugsail_combine,
    naive,
    rbm,
)
from .experiments import (
    CoverageRow,
    RunningRow,
    run_coverage,
    run_running_stat,
    simulate_replication,
)
from .numerics import (
    ChainSet,
    RngState,
    chisq_quantile,
    cholesky,
    frobenius_norm,
    mix64,
    quad_form_inv,
    sample_covariance,
    sample_mean,
    standard_normal,
)
from .samplers import (
    GibbsParams,
    RwmParams,
    RwmResult,
    gibbs_run,
    gibbs_start_points,
    gibbs_true_gamma,
    gibbs_true_sigma,
    rosenbrock_logpdf,
    rosenbrock_start_points,
    rwm_run,
)
