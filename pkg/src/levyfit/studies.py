"""Replication studies: batteries of runs with the reference parameter sets,
scored against the pinned acceptance tolerances.

``merton_study`` exercises the full simulate -> estimate -> deconvolve loop
on the jump-diffusion with mu=0, sigma=1, lambda=10, delta=0.1 and standard
normal jumps; ``attention_study`` and ``bitcoin_study`` run the real-data
pipelines when the corresponding CSV files are supplied.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import scipy.stats

from . import report
from .deconv import density_mse, estimate_density
from .errors import DataError
from .ingest import align, load_csv, log_returns, write_returns_csv
from .jumps import build_mixture, classify, find_thresholds
from .pricefit import (continuous_sampler, fit_price_model, jump_part_sampler,
                       mean_wilcoxon_pvalue, moment_ci_table)
from .simulate import (LevyParams, NormalJumps, log_cf_increment,
                       simulate_increments)
from .spectral import SpectralConfig, estimate

# Reference setup for the simulation study.
MERTON_PARAMS = LevyParams(mu=0.0, sigma=1.0, lam=10.0, delta=0.1)
MERTON_LAW = NormalJumps(0.0, 1.0)
MERTON_CONFIG = SpectralConfig(un=6.0, vn=6.0, eps=0.5)
MERTON_SIZES = (1000, 5000, 10000)

# Frozen from full 25-replicate runs at seeds {7, 99, 2024}: observed median
# errors at n=10000 were |sigma2-1| <= 0.035, |lambda-10| <= 0.22,
# |mu| <= 0.029, and the exact-CF roundtrip inversion error was 2.7e-3.
# Thresholds sit ~3x above the worst observation.
MERTON_TOLERANCES = {"sigma2": 0.10, "lam": 0.75, "mu": 0.08}
ORACLE_ROUNDTRIP_MAX_ERR = 0.005

# Real-data reference values; comparisons are conditional on feeding the
# equivalent 2017-2021 daily CSVs.
ATTENTION_CONFIG = SpectralConfig(un=17.0, vn=15.0, eps=0.1)
ATTENTION_TARGETS = {"sigma": 0.099, "lam": 0.201, "mu": -0.022,
                     "x1": -0.2175, "x2": 0.1715, "jump_count": 337}
BITCOIN_CONFIG = SpectralConfig(un=15.0, vn=23.0, eps=0.6)
BITCOIN_TARGETS = {"mu_tilde": 0.002, "sigma_tilde": 0.037,
                   "mu_jump": 0.0071, "sigma_jump": 0.0576,
                   "lambda_jump": 0.01362}


def _normal_pdf(x, mean=0.0, sd=1.0):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v
                             for v in row])


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def merton_study(out_dir, replicates: int = 25, sizes=MERTON_SIZES,
                 seed: int = 2024, figures: bool = True,
                 tolerances=None) -> dict:
    """Run the jump-diffusion replication study and score its checks.

    Writes estimates.csv, medians.csv, report.json and (optionally) the
    ECF / boxplot / density figures into ``out_dir``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tol = dict(MERTON_TOLERANCES if tolerances is None else tolerances)
    sizes = tuple(int(n) for n in sizes)
    params, law, cfg = MERTON_PARAMS, MERTON_LAW, MERTON_CONFIG
    x = np.linspace(-5.0, 5.0, 1000)
    truth = _normal_pdf(x)

    rows = []
    density_rows = {}
    ecf_curves = []
    ecf_u = np.linspace(0.0, 8.0, 201)
    size_seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    for seq, n in zip(size_seqs, sizes):
        density_rows[n] = []
        for rep, child in enumerate(seq.spawn(replicates)):
            rng = np.random.default_rng(child)
            sim = simulate_increments(params, law, n, rng)
            est = estimate(sim, cfg, policy="ignore")
            try:
                dens = estimate_density(sim, est, t_n=cfg.un, n_nodes=2000,
                                        x=x, policy="ignore")
                mse = density_mse(dens, truth)
                density_rows[n].append(dens.p_hat)
            except Exception:
                mse = math.nan
            rows.append((n, rep, est.sigma2, est.lam, est.mu,
                         est.unusable_fraction, mse))
            if n == sizes[0] and len(ecf_curves) < replicates:
                from .ecf import EmpiricalLogCf
                ecf_curves.append(EmpiricalLogCf(sim)(ecf_u).real)

    _write_csv(out / "estimates.csv",
               ["n", "replicate", "sigma2_hat", "lambda_hat", "mu_hat",
                "unusable_fraction", "density_mse"], rows)

    arr = {n: [r for r in rows if r[0] == n] for n in sizes}
    medians = {}
    for n in sizes:
        block = np.array([(r[2], r[3], r[4], r[6]) for r in arr[n]])
        medians[n] = {
            "sigma2": float(np.median(block[:, 0])),
            "lam": float(np.median(block[:, 1])),
            "mu": float(np.median(block[:, 2])),
            "mae_sigma2": float(np.median(np.abs(block[:, 0] - 1.0))),
            "mae_lam": float(np.median(np.abs(block[:, 1] - 10.0))),
            "mae_mu": float(np.median(np.abs(block[:, 2]))),
            "mse": float(np.nanmedian(block[:, 3])),
        }
    _write_csv(out / "medians.csv",
               ["n", "sigma2_med", "lambda_med", "mu_med", "mae_sigma2",
                "mae_lambda", "mae_mu", "mse_med"],
               [(n, m["sigma2"], m["lam"], m["mu"], m["mae_sigma2"],
                 m["mae_lam"], m["mae_mu"], m["mse"])
                for n, m in medians.items()])

    n_top = max(sizes)
    checks = {}
    m_top = medians[n_top]
    checks["median_sigma2_close"] = abs(m_top["sigma2"] - 1.0) < tol["sigma2"]
    checks["median_lambda_close"] = abs(m_top["lam"] - 10.0) < tol["lam"]
    checks["median_mu_close"] = abs(m_top["mu"]) < tol["mu"]
    if len(sizes) > 1:
        order = sorted(sizes)
        for key, label in (("mae_sigma2", "sigma2"), ("mae_lam", "lambda"),
                           ("mae_mu", "mu"), ("mse", "density_mse")):
            vals = [medians[n][key] for n in order]
            checks[f"{label}_nonincreasing"] = all(
                b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    else:
        checks["convergence_checks"] = "skipped (single sample size)"

    if figures:
        true_curve = log_cf_increment(params, law, ecf_u).real
        approx = -0.5 * params.sigma**2 * ecf_u**2 - params.lam
        report.fig_ecf_real(out / "fig_ecf.png", ecf_u, np.array(ecf_curves),
                            true_curve=true_curve, approx_curve=approx)
        by_param = {
            name: {n: [r[col] for r in arr[n]] for n in sizes}
            for name, col in (("sigma2", 2), ("lambda", 3), ("mu", 4))}
        report.fig_param_boxplots(out / "fig_boxplots.png", by_param,
                                  true_values={"sigma2": 1.0, "lambda": 10.0,
                                               "mu": 0.0})
        mse_by_n = {n: [r[6] for r in arr[n] if not math.isnan(r[6])]
                    for n in sizes}
        report.fig_density_overlay(out / "fig_density.png", x,
                                   np.array(density_rows[n_top]), truth=truth,
                                   mse_by_n=mse_by_n)

    doc = {"schema_version": 1, "study": "merton-sim",
           "replicates": replicates, "sizes": list(sizes), "seed": seed,
           "tolerances": tol,
           "medians": {str(n): medians[n] for n in sizes},
           "checks": checks,
           "passed": all(v is True or isinstance(v, str)
                         for v in checks.values())}
    _write_json(out / "report.json", doc)
    return doc


def _within(value: float, target: float, rel: float = 0.2,
            absolute: float | None = None) -> bool:
    if absolute is not None:
        return abs(value - target) <= absolute
    return abs(value - target) <= rel * abs(target)


def attention_study(attention_csv, out_dir, cfg: SpectralConfig | None = None,
                    delta: float = 1.0, seed: int = 2024,
                    figures: bool = True) -> dict:
    """Fit the attention model with the reference cutoffs and compare the
    outcome to the published values (informational unless the same data
    snapshot is supplied)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = cfg or ATTENTION_CONFIG
    raw = load_csv(attention_csv)
    series = log_returns(raw, delta)
    write_returns_csv(out / "attention_returns.csv", series)

    est = estimate(series, cfg)
    half = 1.25 * float(np.max(np.abs(series.returns)))
    x = np.linspace(-half, half, 1001)
    dens = estimate_density(series, est, t_n=cfg.un, x=x)
    span = 1.05 * float(np.max(np.abs(series.returns - est.mu * delta)))
    grid = np.linspace(est.mu * delta - span, est.mu * delta + span, 4001)
    mix = build_mixture(est, dens, grid)
    x1, x2 = find_thresholds(mix)
    cls = classify(series, x1, x2)

    sigma_hat = est.sigma_clamped
    comparisons = {
        "sigma": {"value": sigma_hat, "target": ATTENTION_TARGETS["sigma"],
                  "within_20pct": _within(sigma_hat, ATTENTION_TARGETS["sigma"])},
        "lambda": {"value": est.lam, "target": ATTENTION_TARGETS["lam"],
                   "within_20pct": _within(est.lam, ATTENTION_TARGETS["lam"])},
        "mu": {"value": est.mu, "target": ATTENTION_TARGETS["mu"],
               "within_20pct": _within(est.mu, ATTENTION_TARGETS["mu"])},
        "x1": {"value": x1, "target": ATTENTION_TARGETS["x1"],
               "within_0.03": _within(x1, ATTENTION_TARGETS["x1"],
                                      absolute=0.03)},
        "x2": {"value": x2, "target": ATTENTION_TARGETS["x2"],
               "within_0.03": _within(x2, ATTENTION_TARGETS["x2"],
                                      absolute=0.03)},
        "jump_count": {"value": cls.count,
                       "target": ATTENTION_TARGETS["jump_count"],
                       "within_20pct": _within(cls.count,
                                               ATTENTION_TARGETS["jump_count"])},
    }

    _write_csv(out / "density.csv", ["x", "p_hat"],
               list(zip(map(float, dens.x), map(float, dens.p_hat))))
    _write_csv(out / "mixture.csv", ["x", "f0", "f1"],
               list(zip(map(float, mix.x), map(float, mix.f0),
                        map(float, mix.f1))))
    _write_csv(out / "jumps.csv", ["index", "date", "return", "J_k"],
               [(k + 1, series.dates[k].isoformat() if series.dates else "",
                 float(series.returns[k]), int(cls.is_jump[k]))
                for k in range(series.n)])
    if figures:
        report.fig_return_series(out / "fig_returns.png",
                                 np.arange(1, series.n + 1), series.returns,
                                 "attention log-returns",
                                 jump_mask=cls.is_jump)
        report.fig_density_overlay(out / "fig_density.png", dens.x,
                                   dens.p_hat)
        report.fig_mixture(out / "fig_mixture.png", mix.x, mix.f0, mix.f1,
                           x1, x2)

    doc = {"schema_version": 1, "study": "attention-fit", "seed": seed,
           "estimate": est.to_dict(),
           "thresholds": {"x1": x1, "x2": x2},
           "jump_count": cls.count, "n": series.n,
           "comparisons": comparisons,
           "note": "comparisons hold only for data equivalent to the "
                   "published 2017-2021 snapshot"}
    _write_json(out / "report.json", doc)
    return doc


def bitcoin_study(attention_csv, price_csv, out_dir,
                  delta: float = 1.0, seed: int = 2024,
                  replicates: int = 25, sample_size: int = 1000,
                  figures: bool = True) -> dict:
    """Attention fit, jump classification, and the two-part price fit."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    att_doc = attention_study(attention_csv, out / "attention", delta=delta,
                              seed=seed, figures=figures)

    raw_a = load_csv(attention_csv)
    raw_p = load_csv(price_csv)
    pair = align(raw_a, raw_p, delta)
    att = pair.attention
    price = pair.price

    est_doc = att_doc["estimate"]
    x1 = att_doc["thresholds"]["x1"]
    x2 = att_doc["thresholds"]["x2"]
    cls = classify(att, x1, x2)

    fit = fit_price_model(price, cls.is_jump, BITCOIN_CONFIG)
    comparisons = {
        "mu_tilde": {"value": fit.mu_tilde,
                     "target": BITCOIN_TARGETS["mu_tilde"],
                     "within_20pct": _within(fit.mu_tilde,
                                             BITCOIN_TARGETS["mu_tilde"])},
        "sigma_tilde": {"value": fit.sigma_tilde,
                        "target": BITCOIN_TARGETS["sigma_tilde"],
                        "within_20pct": _within(fit.sigma_tilde,
                                                BITCOIN_TARGETS["sigma_tilde"])},
        "mu_jump": {"value": fit.jump_est.mu,
                    "target": BITCOIN_TARGETS["mu_jump"],
                    "within_20pct": _within(fit.jump_est.mu,
                                            BITCOIN_TARGETS["mu_jump"])},
        "sigma_jump": {"value": fit.jump_est.sigma_clamped,
                       "target": BITCOIN_TARGETS["sigma_jump"],
                       "within_20pct": _within(fit.jump_est.sigma_clamped,
                                               BITCOIN_TARGETS["sigma_jump"])},
        "lambda_jump": {"value": fit.jump_est.lam,
                        "target": BITCOIN_TARGETS["lambda_jump"],
                        "within_20pct": _within(fit.jump_est.lam,
                                                BITCOIN_TARGETS["lambda_jump"])},
    }

    cont = continuous_sampler(fit.mu_tilde, fit.sigma_tilde, fit.delta)
    jump = jump_part_sampler(fit)
    tables = {"continuous": moment_ci_table(cont, fit.continuous_returns,
                                            replicates=replicates,
                                            sample_size=sample_size,
                                            seed=seed),
              "jump": moment_ci_table(jump, fit.jump_returns,
                                      replicates=replicates,
                                      sample_size=sample_size, seed=seed + 1)}
    wilcoxon = {"continuous": mean_wilcoxon_pvalue(cont, fit.continuous_returns,
                                                   replicates=replicates,
                                                   sample_size=sample_size,
                                                   seed=seed + 2),
                "jump": mean_wilcoxon_pvalue(jump, fit.jump_returns,
                                             replicates=replicates,
                                             sample_size=sample_size,
                                             seed=seed + 3)}
    _write_csv(out / "tables.csv", ["part", "statistic", "lower", "point", "upper"],
               [(part, r["statistic"], r["lower"], r["point"], r["upper"])
                for part in ("continuous", "jump") for r in tables[part]])

    if figures:
        for part, values, sampler, fig in (
                ("continuous", fit.continuous_returns, cont,
                 "fig_price_continuous.png"),
                ("jump", fit.jump_returns, jump, "fig_price_jump.png")):
            lo, hi = float(values.min()), float(values.max())
            pad = 0.1 * (hi - lo)
            grid = np.linspace(lo - pad, hi + pad, 512)
            sims = [scipy.stats.gaussian_kde(
                sampler(np.random.default_rng(np.random.SeedSequence(seed + 10)
                                              .spawn(replicates)[i]),
                        sample_size))(grid)
                    for i in range(replicates)]
            report.fig_density_overlay(out / fig, grid, np.array(sims),
                                       truth=scipy.stats.gaussian_kde(values)(grid))

    doc = {"schema_version": 1, "study": "bitcoin-fit", "seed": seed,
           "attention_estimate": est_doc,
           "thresholds": {"x1": x1, "x2": x2},
           "jump_count": int(cls.count), "n": price.n,
           "continuous": {"mu_tilde": fit.mu_tilde,
                          "sigma_tilde": fit.sigma_tilde},
           "jump_part": fit.jump_est.to_dict(),
           "wilcoxon_mean_p": wilcoxon,
           "comparisons": comparisons,
           "note": "comparisons hold only for data equivalent to the "
                   "published 2017-2021 snapshot"}
    _write_json(out / "report.json", doc)
    return doc


def run_study(study: str, out_dir, attention_csv=None, price_csv=None,
              **kwargs) -> dict:
    """Dispatch by study name; real-data studies require the CSV paths."""
    if study == "merton-sim":
        allowed = {k: v for k, v in kwargs.items()
                   if k in ("replicates", "sizes", "seed", "figures")}
        return merton_study(out_dir, **allowed)
    if study == "attention-fit":
        if not attention_csv:
            raise DataError("attention-fit requires --attention <csv>")
        allowed = {k: v for k, v in kwargs.items()
                   if k in ("delta", "seed", "figures")}
        return attention_study(attention_csv, out_dir, **allowed)
    if study == "bitcoin-fit":
        if not attention_csv or not price_csv:
            raise DataError("bitcoin-fit requires --attention and --price")
        allowed = {k: v for k, v in kwargs.items()
                   if k in ("delta", "seed", "figures", "replicates",
                            "sample_size")}
        return bitcoin_study(attention_csv, price_csv, out_dir, **allowed)
    raise DataError(f"unknown study {study!r} (expected merton-sim, "
                    "attention-fit, or bitcoin-fit)")
