"""Two-part price model: Gaussian increments plus jumps at known times.

The return sample is split by the attention-derived jump classification.
No-jump increments are i.i.d. normal and fitted by maximum likelihood; the
jump-time increments are treated as i.i.d. draws from a jump-diffusion
increment law and fitted with the spectral + deconvolution machinery.
"""

from __future__ import annotations

import math
import warnings

from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from .deconv import DensityEstimate, estimate_density
from .errors import DataError
from .ingest import ReturnSeries
from .simulate import LevyParams, TabulatedJumps, replicate_rngs, simulate_increments
from .spectral import SpectralConfig, SpectralEstimate, estimate
from .stats import wilcoxon_ranksum

STATISTICS = ("m1", "m2", "m3", "sd", "median")


@dataclass(frozen=True)
class PriceModelFit:
    """Continuous-part MLE plus jump-part spectral fit and the split used."""

    mu_tilde: float
    sigma_tilde: float
    jump_est: SpectralEstimate
    jump_density: DensityEstimate
    is_jump: np.ndarray
    delta: float
    continuous_returns: np.ndarray = field(repr=False)
    jump_returns: np.ndarray = field(repr=False)

    def jump_params(self) -> LevyParams:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return LevyParams(mu=self.jump_est.mu,
                              sigma=self.jump_est.sigma_clamped,
                              lam=self.jump_est.lambda_clamped,
                              delta=self.delta)

    def jump_law(self) -> TabulatedJumps:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return TabulatedJumps(self.jump_density.x, self.jump_density.p_hat)


def fit_continuous(no_jump_returns, delta: float) -> tuple[float, float]:
    """Gaussian MLE on the no-jump increments: (drift, volatility) per unit time."""
    v = np.asarray(no_jump_returns, dtype=float)
    if v.size < 2:
        raise DataError("need at least 2 no-jump increments for the MLE")
    mu = float(np.mean(v) / delta)
    sigma2 = float(np.mean((v - np.mean(v)) ** 2) / delta)
    return mu, math.sqrt(sigma2)


def fit_jump_part(jump_returns, delta: float, cfg: SpectralConfig,
                  t_n: float | None = None, x: np.ndarray | None = None,
                  n_nodes: int = 2000, policy: str = "warn"
                  ) -> tuple[SpectralEstimate, DensityEstimate]:
    """Spectral + deconvolution fit on the jump-time increments.

    The subsample is treated as i.i.d. increments with the step delta.
    """
    v = np.asarray(jump_returns, dtype=float)
    if v.size == 0:
        raise DataError("empty jump set: nothing to fit")
    if v.size < 100:
        warnings.warn(f"only {v.size} jump increments; ECF-based estimates "
                      "will be unstable", stacklevel=2)
    series = ReturnSeries(delta=delta, returns=v)
    est = estimate(series, cfg, policy=policy)
    if x is None:
        half = 1.25 * float(np.max(np.abs(v)))
        x = np.linspace(-half, half, 1001)
    dens = estimate_density(series, est, t_n=(t_n or cfg.un),
                            n_nodes=n_nodes, x=x, policy=policy)
    return est, dens


def fit_price_model(price: ReturnSeries, is_jump, cfg: SpectralConfig,
                    t_n: float | None = None, x: np.ndarray | None = None,
                    policy: str = "warn") -> PriceModelFit:
    """Split the price returns by the jump indicator and fit both parts."""
    is_jump = np.asarray(is_jump, dtype=bool)
    d = price.returns
    if is_jump.shape != d.shape:
        raise DataError("jump indicator length does not match the returns")
    mu_t, sigma_t = fit_continuous(d[~is_jump], price.delta)
    est, dens = fit_jump_part(d[is_jump], price.delta, cfg, t_n=t_n, x=x,
                              policy=policy)
    return PriceModelFit(mu_tilde=mu_t, sigma_tilde=sigma_t, jump_est=est,
                         jump_density=dens, is_jump=is_jump, delta=price.delta,
                         continuous_returns=d[~is_jump], jump_returns=d[is_jump])


def simulate_price(fit: PriceModelFit, jump_pattern, seed) -> ReturnSeries:
    """Simulate price increments with jumps at the pattern's True positions.

    Draw order under one seed: continuous Gaussian noise for all intervals,
    then the jump-part increments for the flagged ones.
    """
    pattern = np.asarray(jump_pattern, dtype=bool)
    n = pattern.size
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(np.random.SeedSequence(seed))
    d = fit.mu_tilde * fit.delta \
        + fit.sigma_tilde * math.sqrt(fit.delta) * rng.standard_normal(n)
    m = int(pattern.sum())
    if m:
        eta = simulate_increments(fit.jump_params(), fit.jump_law(), m, rng)
        d[pattern] += eta.returns
    return ReturnSeries(delta=fit.delta, returns=d)


def sample_statistics(values) -> dict[str, float]:
    """First three raw moments, sample SD, and median."""
    v = np.asarray(values, dtype=float)
    return {"m1": float(np.mean(v)),
            "m2": float(np.mean(v**2)),
            "m3": float(np.mean(v**3)),
            "sd": float(np.std(v, ddof=1)) if v.size > 1 else 0.0,
            "median": float(np.median(v))}


def moment_ci_table(sampler, real_values, statistics=STATISTICS,
                    level: float = 0.99, replicates: int = 25,
                    sample_size: int = 1000, seed: int = 0) -> list[dict]:
    """Monte-Carlo percentile intervals for the summary statistics.

    ``sampler(rng, size)`` draws one synthetic sample from the fitted model;
    the interval endpoints are the ((1-level)/2, (1+level)/2) percentiles of
    each statistic over the replicates, and the point value is the real
    sample's statistic.
    """
    if replicates < 2:
        raise DataError("need at least 2 replicates for percentile intervals")
    stats_by_rep = []
    for rng in replicate_rngs(seed, replicates):
        stats_by_rep.append(sample_statistics(sampler(rng, sample_size)))
    real = sample_statistics(real_values)
    lo_q, hi_q = 100.0 * (1.0 - level) / 2.0, 100.0 * (1.0 + level) / 2.0
    rows = []
    for name in statistics:
        draws = np.array([s[name] for s in stats_by_rep])
        rows.append({"statistic": name,
                     "lower": float(np.percentile(draws, lo_q)),
                     "point": real[name],
                     "upper": float(np.percentile(draws, hi_q))})
    return rows


def mean_wilcoxon_pvalue(sampler, real_values, replicates: int = 25,
                         sample_size: int = 1000, seed: int = 0) -> float:
    """Average two-sample Wilcoxon p-value of simulated samples vs the data."""
    ps = [wilcoxon_ranksum(real_values, sampler(rng, sample_size)).p_value
          for rng in replicate_rngs(seed, replicates)]
    return float(np.mean(ps))


def continuous_sampler(mu_tilde: float, sigma_tilde: float, delta: float):
    """Sampler for the continuous part: i.i.d. N(mu*delta, sigma^2*delta)."""
    def draw(rng, size):
        return mu_tilde * delta + sigma_tilde * math.sqrt(delta) \
            * rng.standard_normal(size)
    return draw


def jump_part_sampler(fit: PriceModelFit):
    """Sampler for the jump part's increment law."""
    params = fit.jump_params()
    law = fit.jump_law()

    def draw(rng, size):
        return simulate_increments(params, law, size, rng).returns
    return draw


def fit_normal_baseline(values) -> tuple[float, float]:
    """Normal MLE (mean, sd with 1/n variance)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise DataError("need at least 2 observations")
    return float(np.mean(v)), float(np.std(v))


def fit_cauchy_baseline(values) -> tuple[float, float]:
    """Cauchy MLE (location, scale)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise DataError("need at least 2 observations")
    loc, scale = scipy.stats.cauchy.fit(v)
    return float(loc), float(scale)
