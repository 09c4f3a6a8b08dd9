"""Jump-time classification by density crossing.

Under the fitted model an increment either carries no jump and follows
N(mu*delta, sigma^2*delta) with density f0, or carries one jump and adds an
independent draw from the estimated jump density, giving f1 = f0 convolved
with p_hat. f0 dominates in a central interval [x1, x2]; increments outside
it are classified as jump times.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .deconv import DensityEstimate, _cexp_matvec, trapezoid_weights
from .errors import DataError, NumericalError
from .ingest import ReturnSeries

_BISECT_TOL = 1e-9


@dataclass(frozen=True)
class MixtureDensities:
    """No-jump density f0 and jump density f1 on a shared grid."""

    x: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    mode: float
    sigma_delta: float


@dataclass(frozen=True)
class JumpClassification:
    """Thresholds and the indicator of jump intervals (1-based index set)."""

    x1: float
    x2: float
    is_jump: np.ndarray

    def __post_init__(self):
        if not (self.x1 < self.x2):
            raise DataError("x1 must be below x2")
        object.__setattr__(self, "is_jump",
                           np.asarray(self.is_jump, dtype=bool))

    @property
    def jump_set(self) -> np.ndarray:
        return np.flatnonzero(self.is_jump) + 1

    @property
    def complement(self) -> np.ndarray:
        return np.flatnonzero(~self.is_jump) + 1

    @property
    def count(self) -> int:
        return int(self.is_jump.sum())


def _normal_pdf(x, mean, sd):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def build_mixture(est, p_hat: DensityEstimate, x: np.ndarray,
                  n_freq: int | None = None,
                  freq_cutoff: float | None = None) -> MixtureDensities:
    """Tabulate f0 (exact normal) and f1 (normal convolved with p_hat).

    f1 is computed in the frequency domain: the normal CF times the
    trapezoid Fourier transform of the tabulated p_hat, inverted on x with
    the same midpoint rule as the deconvolution step.
    """
    x = np.asarray(x, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sigma2 = est.sigma2_clamped
    if sigma2 <= 0:
        raise NumericalError("degenerate sigma: no-jump density is a point mass")
    delta = est.delta
    mu_d = est.mu * delta
    sd = math.sqrt(sigma2 * delta)

    f0 = _normal_pdf(x, mu_d, sd)

    dx_p = float(np.min(np.diff(p_hat.x)))
    if freq_cutoff is None:
        # Gaussian CF factor below 1e-9 past this frequency.
        t_gauss = math.sqrt(2.0 * math.log(1e9)) / sd
        freq_cutoff = min(t_gauss, 0.95 * math.pi / dx_p)
        if t_gauss > freq_cutoff:
            warnings.warn("frequency cutoff capped by the p_hat grid resolution",
                          stacklevel=2)
    if n_freq is None:
        du_max = math.pi / (1.1 * max(1.0, float(np.max(np.abs(x)))))
        n_freq = int(min(max(1001, math.ceil(2.0 * freq_cutoff / du_max)), 200_000))

    edges = np.linspace(-freq_cutoff, freq_cutoff, n_freq + 1)
    u = 0.5 * (edges[:-1] + edges[1:])
    du = edges[1] - edges[0]
    wp = trapezoid_weights(p_hat.x) * p_hat.p_hat
    ft_p = _cexp_matvec(u, p_hat.x, wp, sign=+1.0)
    cf_mix = np.exp(1j * mu_d * u - 0.5 * sigma2 * delta * u**2) * ft_p
    f1 = (du / (2.0 * math.pi)) * _cexp_matvec(x, u, cf_mix)
    return MixtureDensities(x=x, f0=f0, f1=f1.real, mode=mu_d, sigma_delta=sd)


def find_thresholds(mix: MixtureDensities) -> tuple[float, float]:
    """Locate the density crossings bracketing the central f0-dominance region.

    x1 is the largest crossing below the f0 mode, x2 the smallest above it,
    each refined by bisection of f0 - f1 (f1 interpolated linearly). Extra
    sign changes beyond the central pair are reported in a warning.
    """
    g = mix.f0 - mix.f1
    x = mix.x
    k0 = int(np.argmin(np.abs(x - mix.mode)))
    if not (g[k0] > 0):
        raise NumericalError("no dominance region: f0 does not exceed f1 "
                             "at its mode")

    sign_changes = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    below = sign_changes[sign_changes < k0]
    above = sign_changes[sign_changes >= k0]
    if below.size == 0 or above.size == 0:
        raise NumericalError("no dominance region: f0 - f1 does not change "
                             "sign on both sides of the mode")
    if below.size + above.size > 2:
        extras = [f"{x[i]:.4g}" for i in np.concatenate([below[:-1], above[1:]])]
        warnings.warn("f0 - f1 has more than two sign changes; using the pair "
                      f"nearest the mode (others near {', '.join(extras)})",
                      stacklevel=2)

    def gfun(val: float) -> float:
        f0v = _normal_pdf(val, mix.mode, mix.sigma_delta)
        return float(f0v - np.interp(val, x, mix.f1))

    def refine(i: int) -> float:
        a, b = float(x[i]), float(x[i + 1])
        ga = gfun(a)
        while b - a > _BISECT_TOL:
            m = 0.5 * (a + b)
            gm = gfun(m)
            if gm == 0.0:
                return m
            if (ga > 0) == (gm > 0):
                a, ga = m, gm
            else:
                b = m
        return 0.5 * (a + b)

    return refine(int(below[-1])), refine(int(above[0]))


def classify(returns: ReturnSeries, x1: float, x2: float) -> JumpClassification:
    """Mark intervals whose increment leaves [x1, x2] as jumps.

    Boundary values count as no-jump.
    """
    if not (x1 < x2):
        raise DataError("x1 must be below x2")
    d = returns.returns
    return JumpClassification(x1=x1, x2=x2, is_jump=(d < x1) | (d > x2))


def classification_scores(predicted: np.ndarray, true_counts: np.ndarray
                          ) -> tuple[float, float]:
    """Precision and recall of a jump indicator against true jump counts."""
    predicted = np.asarray(predicted, dtype=bool)
    actual = np.asarray(true_counts) > 0
    if predicted.shape != actual.shape:
        raise DataError("indicator lengths differ")
    tp = int(np.sum(predicted & actual))
    precision = tp / max(1, int(predicted.sum()))
    recall = tp / max(1, int(actual.sum()))
    return float(precision), float(recall)
