"""Drift / volatility / intensity estimation from the log-ECF.

For large frequencies the scaled log characteristic function of the
increments approaches

    Re ~ -sigma^2 u^2 / 2 - lambda,      Im ~ mu u,

so (sigma^2, lambda) come from a weighted least-squares fit of the real
part against (u^2, 1) over [eps*U_n, U_n], and mu from a no-intercept fit
of the imaginary part against u over [eps*V_n, V_n]. Both fits have closed
forms in the quadrature sums Lambda_d, Psi_d, Upsilon; the closed forms are
cross-checked against a generic normal-equations solve on every call.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.stats

from .deconv import estimate_density
from .ecf import EmpiricalLogCf
from .errors import DataError, NumericalError
from .ingest import ReturnSeries
from .simulate import LevyParams, TabulatedJumps, replicate_rngs, simulate_increments

_XCHECK_RTOL = 1e-8  # closed form vs linear solve agreement


@dataclass(frozen=True)
class SpectralConfig:
    """Cutoffs, node layout, and weight for the least-squares fits.

    The same (eps, n_intervals, weight, node_rule) block serves both the
    real-part fit (scaled by un) and the imaginary-part fit (scaled by vn).
    """

    un: float
    vn: float
    eps: float
    n_intervals: int = 100
    weight: Callable[[np.ndarray], np.ndarray] | None = None
    node_rule: str = "midpoint"

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise DataError("eps must lie in (0,1)")
        if not (self.un > 0 and self.vn > 0):
            raise DataError("cutoffs must be positive")
        if self.n_intervals < 2:
            raise DataError("need at least 2 quadrature intervals")
        if self.node_rule not in ("midpoint", "left", "right"):
            raise DataError(f"unknown node rule {self.node_rule!r}")

    def nodes(self) -> np.ndarray:
        """Nodes in [eps, 1]: one per equidistant subinterval."""
        edges = np.linspace(self.eps, 1.0, self.n_intervals + 1)
        if self.node_rule == "left":
            return edges[:-1]
        if self.node_rule == "right":
            return edges[1:]
        return 0.5 * (edges[:-1] + edges[1:])

    def node_weights(self) -> np.ndarray:
        nodes = self.nodes()
        if self.weight is None:
            w = np.ones_like(nodes)
        else:
            w = np.asarray(self.weight(nodes), dtype=float)
        if np.any(w < 0) or not np.any(w > 0):
            raise DataError("weight must be nonnegative and not identically 0")
        return w


@dataclass(frozen=True)
class QuadSums:
    """Weighted node sums feeding the closed-form estimators."""

    lambda0: float
    lambda1: float
    lambda2: float
    psi0: float
    psi1: float
    upsilon: float


@dataclass(frozen=True)
class SpectralEstimate:
    """Raw estimator output; sigma2 and lam may be negative on noisy data.

    The clamped accessors floor them at 0 (with a warning) for downstream
    consumers that need valid model parameters.
    """

    sigma2: float
    lam: float
    mu: float
    config: SpectralConfig
    sums: QuadSums
    n: int
    delta: float
    unusable_fraction: float = 0.0

    @property
    def sigma2_clamped(self) -> float:
        if self.sigma2 < 0:
            warnings.warn(f"sigma^2 estimate {self.sigma2:.4g} < 0; clamping to 0",
                          stacklevel=2)
            return 0.0
        return self.sigma2

    @property
    def lambda_clamped(self) -> float:
        if self.lam < 0:
            warnings.warn(f"lambda estimate {self.lam:.4g} < 0; clamping to 0",
                          stacklevel=2)
            return 0.0
        return self.lam

    @property
    def sigma_clamped(self) -> float:
        return math.sqrt(self.sigma2_clamped)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "n": self.n,
            "delta": self.delta,
            "mu_hat": self.mu,
            "sigma2_hat": self.sigma2,
            "lambda_hat": self.lam,
            "unusable_fraction": self.unusable_fraction,
            "config": {"un": self.config.un, "vn": self.config.vn,
                       "eps": self.config.eps,
                       "n_intervals": self.config.n_intervals,
                       "node_rule": self.config.node_rule},
            "diagnostics": {"lambda0": self.sums.lambda0,
                            "lambda1": self.sums.lambda1,
                            "lambda2": self.sums.lambda2,
                            "psi0": self.sums.psi0,
                            "psi1": self.sums.psi1,
                            "upsilon": self.sums.upsilon},
        }


def estimate_from_dict(doc: dict) -> SpectralEstimate:
    """Rebuild an estimate from its JSON form."""
    try:
        cfg = SpectralConfig(un=doc["config"]["un"], vn=doc["config"]["vn"],
                             eps=doc["config"]["eps"],
                             n_intervals=doc["config"]["n_intervals"],
                             node_rule=doc["config"].get("node_rule", "midpoint"))
        d = doc["diagnostics"]
        sums = QuadSums(d["lambda0"], d["lambda1"], d["lambda2"],
                        d["psi0"], d["psi1"], d["upsilon"])
        return SpectralEstimate(sigma2=doc["sigma2_hat"], lam=doc["lambda_hat"],
                                mu=doc["mu_hat"], config=cfg, sums=sums,
                                n=doc["n"], delta=doc["delta"],
                                unusable_fraction=doc.get("unusable_fraction", 0.0))
    except KeyError as exc:
        raise DataError(f"estimate document missing key {exc}") from exc


def _eval_phi(phi, u, policy: str) -> tuple[np.ndarray, float]:
    """Evaluate a log-CF provider, honouring the modulus-floor policy.

    Returns the values and the fraction of requested points below the
    floor (0.0 for plain callables, which carry no usability notion).
    """
    if hasattr(phi, "grid"):
        g = phi.grid(u)
        vals = g.phi_hat
        bad = ~g.usable
        frac = float(bad.mean()) if bad.size else 0.0
        if np.any(bad):
            msg = (f"{int(bad.sum())}/{bad.size} frequencies have ECF modulus "
                   f"below the floor {g.modulus_floor:.3g}; log-ECF is "
                   "noise-dominated there (consider shrinking the cutoff)")
            if policy == "error":
                raise NumericalError(msg)
            if policy == "warn":
                warnings.warn(msg, stacklevel=3)
    else:
        vals = np.asarray(phi(u), dtype=complex)
        frac = 0.0
    if np.any(~np.isfinite(vals)):
        raise NumericalError("log-ECF is not finite at some requested frequency")
    return vals, frac


def quad_sums(phi, cfg: SpectralConfig, policy: str = "warn") -> tuple[QuadSums, float]:
    """Weighted node sums over the scaled fit frequencies.

    ``phi`` is a log-CF provider: an EmpiricalLogCf or any callable mapping
    a frequency array to complex values. Returns the sums and the fraction
    of nodes whose ECF modulus fell below the usability floor.
    """
    nodes = cfg.nodes()
    w = cfg.node_weights()
    phi_u, frac_u = _eval_phi(phi, nodes * cfg.un, policy)
    phi_v, frac_v = _eval_phi(phi, nodes * cfg.vn, policy)
    lam0 = float(np.sum(w))
    lam1 = float(np.sum(w * nodes**2))
    lam2 = float(np.sum(w * nodes**4))
    psi0 = float(np.sum(w * phi_u.real))
    psi1 = float(np.sum(w * phi_u.real * (nodes * cfg.un) ** 2))
    ups = float(np.sum(w * phi_v.imag * nodes * cfg.vn))
    return QuadSums(lam0, lam1, lam2, psi0, psi1, ups), 0.5 * (frac_u + frac_v)


def estimate_sigma_lambda(sums: QuadSums, un: float) -> tuple[float, float]:
    """Closed-form weighted-LS fit of the real part: returns (sigma^2, lambda)."""
    det = sums.lambda2 * sums.lambda0 - sums.lambda1**2
    if det <= 0:
        raise NumericalError("degenerate regressors: Lambda2*Lambda0 - Lambda1^2 <= 0")
    u2, u4 = un**2, un**4
    sigma2 = 2.0 * (sums.psi0 * sums.lambda1 * u2 - sums.psi1 * sums.lambda0) / (det * u4)
    lam = (sums.psi1 * sums.lambda1 - sums.psi0 * sums.lambda2 * u2) / (det * u2)

    # Cross-check against a generic normal-equations solve of the same fit.
    a = np.array([[u4 * sums.lambda2 / 4.0, u2 * sums.lambda1 / 2.0],
                  [u2 * sums.lambda1 / 2.0, sums.lambda0]])
    b = np.array([-sums.psi1 / 2.0, -sums.psi0])
    generic = np.linalg.solve(a, b)
    scale = max(1.0, abs(sigma2), abs(lam))
    if max(abs(generic[0] - sigma2), abs(generic[1] - lam)) > _XCHECK_RTOL * scale:
        raise NumericalError("closed-form fit disagrees with normal-equations solve")
    return float(sigma2), float(lam)


def estimate_mu(sums: QuadSums, vn: float) -> float:
    """Closed-form no-intercept slope of the imaginary part against u."""
    if sums.lambda1 <= 0:
        raise NumericalError("degenerate weight: Lambda1 <= 0")
    return float(sums.upsilon / (sums.lambda1 * vn**2))


def estimate(returns: ReturnSeries, cfg: SpectralConfig, policy: str = "warn",
             modulus_floor: float | None = None) -> SpectralEstimate:
    """Run the full spectral fit on a return series."""
    phi = EmpiricalLogCf(returns, modulus_floor=modulus_floor)
    sums, frac = quad_sums(phi, cfg, policy=policy)
    sigma2, lam = estimate_sigma_lambda(sums, cfg.un)
    mu = estimate_mu(sums, cfg.vn)
    return SpectralEstimate(sigma2=sigma2, lam=lam, mu=mu, config=cfg,
                            sums=sums, n=returns.n, delta=returns.delta,
                            unusable_fraction=frac)


def _kde_mse(real: np.ndarray, sim: np.ndarray, grid_points: int = 512) -> float:
    """Mean squared difference of Gaussian KDEs on a shared grid.

    The grid spans the pooled range of both samples, widened by 10%.
    """
    lo = min(real.min(), sim.min())
    hi = max(real.max(), sim.max())
    pad = 0.1 * (hi - lo) if hi > lo else 1.0
    grid = np.linspace(lo - pad, hi + pad, grid_points)
    kde_r = scipy.stats.gaussian_kde(real)
    kde_s = scipy.stats.gaussian_kde(sim)
    return float(np.mean((kde_r(grid) - kde_s(grid)) ** 2))


def select_cutoffs(returns: ReturnSeries, candidates, *, replicates: int = 25,
                   sample_size: int = 1000, t_n: float | None = None,
                   density_nodes: int = 2000, x: np.ndarray | None = None,
                   seed: int = 0, policy: str = "warn"):
    """Score cutoff candidates by how well the fitted model resimulates the data.

    Each candidate (a SpectralConfig or an (un, vn, eps) triple) is fitted,
    the jump density deconvolved (T_n defaults to the candidate's un), and
    ``replicates`` samples of ``sample_size`` are simulated from the fitted
    model; the score is the mean over replicates of the KDE mean squared
    difference against the data. Returns (best config, score table).
    """
    cand_list = []
    for c in candidates:
        if isinstance(c, SpectralConfig):
            cand_list.append(c)
        else:
            un, vn, eps = c
            cand_list.append(SpectralConfig(un=un, vn=vn, eps=eps))
    if not cand_list:
        raise DataError("empty candidate grid")

    d = returns.returns
    if x is None:
        half = 1.25 * float(np.max(np.abs(d)))
        x = np.linspace(-half, half, 801)

    rows = []
    best = None
    for cfg in cand_list:
        row = {"un": cfg.un, "vn": cfg.vn, "eps": cfg.eps,
               "score": math.inf, "status": "ok"}
        try:
            est = estimate(returns, cfg, policy=policy)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                lam = est.lambda_clamped
                sigma = est.sigma_clamped
            if lam <= 0:
                raise NumericalError("lambda estimate <= 0")
            dens = estimate_density(returns, est, t_n=(t_n or cfg.un),
                                    n_nodes=density_nodes, x=x, policy=policy)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                law = TabulatedJumps(dens.x, dens.p_hat)
            params = LevyParams(mu=est.mu, sigma=sigma, lam=lam,
                                delta=returns.delta)
            scores = []
            for rng in replicate_rngs(seed, replicates):
                sim = simulate_increments(params, law, sample_size, rng)
                scores.append(_kde_mse(d, sim.returns))
            row["score"] = float(np.mean(scores))
        except (NumericalError, DataError) as exc:
            row["status"] = str(exc)
        rows.append(row)
        if row["status"] == "ok" and (best is None or row["score"] < best[0]):
            best = (row["score"], cfg)
    if best is None:
        raise NumericalError("all cutoff candidates unusable")
    return best[1], rows
