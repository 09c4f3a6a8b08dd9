"""Low-frequency jump-diffusion estimation toolkit.

Simulates exponential-Levy increments, estimates drift/volatility/jump
intensity and the nonparametric jump density from the empirical
characteristic function, classifies jump times, and fits a two-part price
model with jumps at externally determined times.
"""

from .deconv import DensityEstimate, density_mse, estimate_density, kernel
from .ecf import EcfGrid, EmpiricalLogCf, ecf, log_ecf
from .errors import DataError, LevyFitError, NumericalError
from .ingest import (AlignedPair, RawSeries, ReturnSeries, align, load_csv,
                     log_returns)
from .jumps import (JumpClassification, MixtureDensities, build_mixture,
                    classify, find_thresholds)
from .pricefit import (PriceModelFit, fit_continuous, fit_jump_part,
                       fit_price_model, moment_ci_table, simulate_price)
from .simulate import (CauchyJumps, DoubleExponentialJumps, JumpLaw,
                       LevyParams, NormalJumps, TabulatedJumps,
                       log_cf_increment, replicate_rngs,
                       simulate_brownian_baseline, simulate_increments)
from .spectral import (QuadSums, SpectralConfig, SpectralEstimate, estimate,
                       estimate_mu, estimate_sigma_lambda, quad_sums,
                       select_cutoffs)
from .stats import (TestResult, chi2_independence, correlations, kendall_tau,
                    ks_test, pearson_r, spearman_rho, wilcoxon_ranksum)

__version__ = "0.1.0"

__all__ = [
    "AlignedPair", "CauchyJumps", "DataError", "DensityEstimate",
    "DoubleExponentialJumps", "EcfGrid", "EmpiricalLogCf",
    "JumpClassification", "JumpLaw", "LevyFitError", "LevyParams",
    "MixtureDensities", "NormalJumps", "NumericalError", "PriceModelFit",
    "QuadSums", "RawSeries", "ReturnSeries", "SpectralConfig",
    "SpectralEstimate", "TabulatedJumps", "TestResult", "align",
    "build_mixture", "chi2_independence", "classify", "correlations",
    "density_mse", "ecf", "estimate", "estimate_density", "estimate_mu",
    "estimate_sigma_lambda", "find_thresholds", "fit_continuous",
    "fit_jump_part", "fit_price_model", "kendall_tau", "kernel", "ks_test",
    "load_csv", "log_cf_increment", "log_ecf", "log_returns",
    "moment_ci_table", "pearson_r", "quad_sums", "replicate_rngs",
    "select_cutoffs", "simulate_brownian_baseline", "simulate_increments",
    "simulate_price", "spearman_rho", "wilcoxon_ranksum",
]
