"""Command-line interface wiring the pipeline together.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
All delimited outputs print floats with repr (shortest round-trip), JSON is
sorted and indented, and every randomized path is seeded, so a rerun with
the same configuration reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, report, studies
from .deconv import DensityEstimate, estimate_density
from .ecf import EmpiricalLogCf, log_ecf
from .errors import DataError, LevyFitError, NumericalError
from .ingest import align, load_csv, log_returns, read_returns_csv, write_returns_csv
from .jumps import build_mixture, classify, find_thresholds
from .pricefit import (continuous_sampler, fit_price_model, jump_part_sampler,
                       mean_wilcoxon_pvalue, moment_ci_table)
from .simulate import LevyParams, parse_law, simulate_increments
from .spectral import (SpectralConfig, estimate, estimate_from_dict,
                       select_cutoffs)
from .stats import chi2_independence, correlations, ks_test


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


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


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def _density_from_doc(doc) -> DensityEstimate:
    try:
        return DensityEstimate(x=np.array(doc["x"], dtype=float),
                               p_hat=np.array(doc["p_hat"], dtype=float),
                               t_n=doc["t_n"], n_nodes=doc["n_nodes"],
                               imag_residual=doc.get("imag_residual", 0.0),
                               mu_used=doc["mu_used"],
                               sigma2_used=doc["sigma2_used"],
                               lambda_used=doc["lambda_used"])
    except KeyError as exc:
        raise DataError(f"density document missing key {exc}") from exc


def _read_density_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "p_hat"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns x,p_hat")
        xs, ps = [], []
        for rec in reader:
            xs.append(float(rec["x"]))
            ps.append(float(rec["p_hat"]))
    if not xs:
        raise DataError(f"{path}: no data rows")
    return np.array(xs), np.array(ps)


def _read_jumps_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "J_k" not in reader.fieldnames:
            raise DataError(f"{path}: expected a J_k column")
        flags = [int(rec["J_k"]) != 0 for rec in reader]
    if not flags:
        raise DataError(f"{path}: no data rows")
    return np.array(flags, dtype=bool)


def _parse_grid(text: str) -> np.ndarray:
    """Parse 'a:b:step' (inclusive of b up to rounding) or 'v1,v2,...'."""
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError("need a <= b and step > 0")
            return np.arange(a, b + step / 2.0, step)
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise _UsageError(f"bad grid {text!r}: {exc}") from exc


# ---------------------------------------------------------------- commands


def cmd_returns(args):
    raw = load_csv(args.inp, args.date_column, args.value_column)
    series = log_returns(raw, args.delta)
    write_returns_csv(args.out, series)
    print(f"wrote {series.n} returns to {args.out}")
    return 0


def cmd_simulate(args):
    params = LevyParams(mu=args.mu, sigma=args.sigma, lam=args.lam,
                        delta=args.delta)
    law = parse_law(args.law) if args.lam > 0 else None
    series = simulate_increments(params, law, args.n, args.seed)
    write_returns_csv(args.out, series)
    print(f"wrote {args.n} simulated returns to {args.out}")
    return 0


def cmd_ecf(args):
    series = read_returns_csv(args.inp)
    u = np.linspace(0.0, args.umax, args.points)
    grid = log_ecf(series, u)
    _write_csv(args.out, ["u", "re", "im", "modulus"],
               [(float(ui), float(v.real), float(v.imag), float(m))
                for ui, v, m in zip(grid.u, grid.phi_hat, grid.ecf_modulus)])
    unusable = int((~grid.usable).sum())
    if unusable:
        print(f"note: {unusable}/{grid.u.size} points below the modulus floor")
    if args.fig:
        report.fig_ecf_real(args.fig, grid.u, grid.phi_hat.real[None, :])
    print(f"wrote log-ECF on [0, {args.umax}] to {args.out}")
    return 0


def cmd_estimate(args):
    series = read_returns_csv(args.inp)
    cfg = SpectralConfig(un=args.un, vn=args.vn, eps=args.eps,
                         n_intervals=args.nodes)
    est = estimate(series, cfg)
    _write_json(args.out, est.to_dict())
    print(f"sigma2={est.sigma2:.6g} lambda={est.lam:.6g} mu={est.mu:.6g}"
          f" -> {args.out}")
    return 0


def cmd_tune(args):
    series = read_returns_csv(args.inp)
    uns = _parse_grid(args.un_grid)
    vns = _parse_grid(args.vn_grid) if args.vn_grid else None
    epss = _parse_grid(args.eps_grid) if args.eps_grid else np.array([args.eps])
    candidates = []
    for un in uns:
        for eps in epss:
            for vn in (vns if vns is not None else [un]):
                candidates.append((float(un), float(vn), float(eps)))
    best, rows = select_cutoffs(series, candidates,
                                replicates=args.replicates,
                                sample_size=args.sample_size,
                                t_n=args.tn, seed=args.seed)
    _write_csv(args.out, ["un", "vn", "eps", "score", "status"],
               [(r["un"], r["vn"], r["eps"], r["score"], r["status"])
                for r in rows])
    print(f"best cutoffs: un={best.un} vn={best.vn} eps={best.eps}"
          f" -> {args.out}")
    if args.fig:
        ok = [r for r in rows if r["status"] == "ok"]
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.scatter([r["un"] for r in ok], [r["score"] for r in ok],
                   c=[r["eps"] for r in ok], cmap="viridis")
        ax.set_xlabel("un")
        ax.set_ylabel("score")
        ax.set_yscale("log")
        fig.colorbar(ax.collections[0], label="eps")
        fig.tight_layout()
        fig.savefig(args.fig, dpi=150, metadata={"Software": None})
        plt.close(fig)
    return 0


def cmd_deconvolve(args):
    series = read_returns_csv(args.inp)
    est = estimate_from_dict(_read_json(args.estimate))
    x = np.linspace(args.xmin, args.xmax, args.points)
    t_n = args.tn if args.tn is not None else est.config.un
    dens = estimate_density(series, est, t_n=t_n, n_nodes=args.nodes, x=x)
    _write_csv(args.out, ["x", "p_hat"],
               list(zip(map(float, dens.x), map(float, dens.p_hat))))
    if args.fig:
        report.fig_density_overlay(args.fig, dens.x, dens.p_hat)
    print(f"wrote density on [{args.xmin}, {args.xmax}] to {args.out}"
          f" (imag residual {dens.imag_residual:.2e},"
          f" mass {dens.trapezoid_mass():.4f})")
    return 0


def cmd_classify(args):
    series = read_returns_csv(args.inp)
    est = estimate_from_dict(_read_json(args.estimate))
    x, p = _read_density_csv(args.density)
    dens = DensityEstimate(x=x, p_hat=p, t_n=est.config.un, n_nodes=0,
                           imag_residual=0.0, mu_used=est.mu,
                           sigma2_used=est.sigma2, lambda_used=est.lam)
    need_mixture = args.x1 is None or args.x2 is None or args.emit_densities \
        or args.fig
    mix = None
    if need_mixture:
        center = est.mu * est.delta
        span = 1.05 * float(np.max(np.abs(series.returns - center)))
        grid = np.linspace(center - span, center + span, 4001)
        mix = build_mixture(est, dens, grid)
    if args.x1 is not None and args.x2 is not None:
        x1, x2 = args.x1, args.x2
    else:
        x1, x2 = find_thresholds(mix)
    cls = classify(series, x1, x2)
    _write_csv(args.out, ["index", "date", "return", "J_k"],
               [(k + 1, series.dates[k].isoformat() if series.dates else "",
                 float(series.returns[k]), int(cls.is_jump[k]))
                for k in range(series.n)])
    if args.emit_densities:
        _write_csv(args.emit_densities, ["x", "f0", "f1"],
                   list(zip(map(float, mix.x), map(float, mix.f0),
                            map(float, mix.f1))))
    if args.fig:
        report.fig_mixture(args.fig, mix.x, mix.f0, mix.f1, x1, x2)
    print(f"thresholds ({x1:.6g}, {x2:.6g}); {cls.count}/{series.n} jumps"
          f" -> {args.out}")
    return 0


def cmd_fit_price(args):
    price = read_returns_csv(args.price_returns)
    is_jump = _read_jumps_csv(args.jumps)
    if is_jump.size != price.n:
        raise DataError("jump file length does not match the price returns")
    cfg = SpectralConfig(un=args.un, vn=args.vn, eps=args.eps,
                         n_intervals=args.nodes)
    fit = fit_price_model(price, is_jump, cfg, t_n=args.tn)
    doc = {"schema_version": 1, "delta": price.delta,
           "mu_tilde": fit.mu_tilde, "sigma_tilde": fit.sigma_tilde,
           "jump_part": fit.jump_est.to_dict(),
           "jump_density": {"x": [float(v) for v in fit.jump_density.x],
                            "p_hat": [float(v) for v in fit.jump_density.p_hat],
                            "t_n": fit.jump_density.t_n,
                            "n_nodes": fit.jump_density.n_nodes,
                            "imag_residual": fit.jump_density.imag_residual,
                            "mu_used": fit.jump_density.mu_used,
                            "sigma2_used": fit.jump_density.sigma2_used,
                            "lambda_used": fit.jump_density.lambda_used},
           "is_jump": [int(v) for v in is_jump],
           "continuous_returns": [float(v) for v in fit.continuous_returns],
           "jump_returns": [float(v) for v in fit.jump_returns]}
    _write_json(args.out, doc)
    print(f"continuous (mu={fit.mu_tilde:.6g}, sigma={fit.sigma_tilde:.6g});"
          f" jump part (mu={fit.jump_est.mu:.6g},"
          f" sigma2={fit.jump_est.sigma2:.6g},"
          f" lambda={fit.jump_est.lam:.6g}) -> {args.out}")
    return 0


def _fit_from_doc(doc):
    from .pricefit import PriceModelFit
    try:
        return PriceModelFit(
            mu_tilde=doc["mu_tilde"], sigma_tilde=doc["sigma_tilde"],
            jump_est=estimate_from_dict(doc["jump_part"]),
            jump_density=_density_from_doc(doc["jump_density"]),
            is_jump=np.array(doc["is_jump"], dtype=bool),
            delta=doc["delta"],
            continuous_returns=np.array(doc["continuous_returns"], dtype=float),
            jump_returns=np.array(doc["jump_returns"], dtype=float))
    except KeyError as exc:
        raise DataError(f"price fit document missing key {exc}") from exc


def cmd_price_report(args):
    fit = _fit_from_doc(_read_json(args.fit))
    cont = continuous_sampler(fit.mu_tilde, fit.sigma_tilde, fit.delta)
    jump = jump_part_sampler(fit)
    rows = []
    for part, sampler, values, seed in (
            ("continuous", cont, fit.continuous_returns, args.seed),
            ("jump", jump, fit.jump_returns, args.seed + 1)):
        table = moment_ci_table(sampler, values, replicates=args.replicates,
                                sample_size=args.sample_size, seed=seed)
        rows += [(part, r["statistic"], r["lower"], r["point"], r["upper"])
                 for r in table]
        p = mean_wilcoxon_pvalue(sampler, values, replicates=args.replicates,
                                 sample_size=args.sample_size, seed=seed + 2)
        print(f"{part}: mean Wilcoxon p over {args.replicates} samples = {p:.5f}")
    _write_csv(args.out, ["part", "statistic", "lower", "point", "upper"], rows)
    print(f"wrote confidence table to {args.out}")
    return 0


def cmd_diagnose(args):
    raw_a = load_csv(args.attention)
    raw_p = load_csv(args.price)
    pair = align(raw_a, raw_p, args.delta)
    att = pair.attention.returns
    price = pair.price.returns

    from .pricefit import fit_cauchy_baseline, fit_normal_baseline
    from scipy.stats import cauchy, norm

    def series_block(values):
        n_loc, n_scale = fit_normal_baseline(values)
        c_loc, c_scale = fit_cauchy_baseline(values)
        return {
            "chi2_independence": chi2_independence(values).to_dict(),
            "normal_fit": {"loc": n_loc, "scale": n_scale},
            "cauchy_fit": {"loc": c_loc, "scale": c_scale},
            "ks_normal": ks_test(values,
                                 lambda s: norm.cdf(s, n_loc, n_scale)).to_dict(),
            "ks_cauchy": ks_test(values,
                                 lambda s: cauchy.cdf(s, c_loc, c_scale)).to_dict(),
        }

    doc = {"schema_version": 1,
           "n": int(att.size),
           "correlations_all": {k: v.to_dict() for k, v in
                                correlations(att, np.abs(price)).items()},
           "attention": series_block(att),
           "price": series_block(price)}
    if args.jumps:
        mask = _read_jumps_csv(args.jumps)
        if mask.size != att.size:
            raise DataError("jump file length does not match the aligned data")
        if mask.sum() >= 3:
            doc["correlations_jumps_only"] = {
                k: v.to_dict() for k, v in
                correlations(att[mask], np.abs(price[mask])).items()}
    _write_json(args.out, doc)
    print(f"wrote diagnostics to {args.out}")
    return 0


# ---------------------------------------------------------------- pipeline


_CONFIG_DEFAULTS = {
    "attention": None, "price": None,
    "date_column": "date", "value_column": "value",
    "delta": 1.0,
    "un": 17.0, "vn": 15.0, "eps": 0.1, "nodes": 100,
    "tn": None, "density_nodes": 2000,
    "x_min": None, "x_max": None, "x_points": 1001,
    "x1": None, "x2": None,
    "price_un": 15.0, "price_vn": 23.0, "price_eps": 0.6, "price_tn": None,
    "replicates": 25, "sample_size": 1000, "seed": 0,
    "figures": True,
}


def _resolve_config(args) -> dict:
    cfg = dict(_CONFIG_DEFAULTS)
    if args.config:
        doc = _read_json(args.config)
        unknown = set(doc) - set(cfg)
        if unknown:
            raise DataError(f"unknown config key(s): {sorted(unknown)}")
        cfg.update(doc)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if args.no_figures:
        cfg["figures"] = False
    if not cfg["attention"]:
        raise DataError("an attention CSV is required (--attention)")
    return cfg


def run_pipeline(cfg: dict, out_dir) -> dict:
    """Execute ingest -> estimate -> deconvolve -> classify -> fit-price ->
    diagnose, writing every artifact under ``out_dir``.

    Returns the manifest; on stage failure the manifest (with the failing
    stage marked) is still written before the error propagates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = {s: "pending" for s in ("ingest", "estimate", "deconvolve",
                                     "classify", "fit-price", "diagnose")}
    outputs: list[str] = []
    manifest = {"schema_version": 1, "stages": stages, "outputs": outputs,
                "complete": False}

    def emit(name, writer):
        writer(out / name)
        outputs.append(name)

    def finish():
        emit("manifest.json", lambda p: _write_json(p, manifest))

    emit("config.json", lambda p: _write_json(p, cfg))
    stage = "ingest"
    try:
        raw_a = load_csv(cfg["attention"], cfg["date_column"], cfg["value_column"])
        if cfg["price"]:
            raw_p = load_csv(cfg["price"], cfg["date_column"], cfg["value_column"])
            pair = align(raw_a, raw_p, cfg["delta"])
            att, price = pair.attention, pair.price
            emit("price_returns.csv", lambda p: write_returns_csv(p, price))
        else:
            att, price = log_returns(raw_a, cfg["delta"]), None
        emit("attention_returns.csv", lambda p: write_returns_csv(p, att))
        stages[stage] = "ok"

        stage = "estimate"
        spec_cfg = SpectralConfig(un=cfg["un"], vn=cfg["vn"], eps=cfg["eps"],
                                  n_intervals=cfg["nodes"])
        est = estimate(att, spec_cfg)
        emit("estimate.json", lambda p: _write_json(p, est.to_dict()))
        umax = 1.2 * max(cfg["un"], cfg["vn"])
        egrid = log_ecf(att, np.linspace(0.0, umax, 241))
        emit("ecf.csv", lambda p: _write_csv(
            p, ["u", "re", "im", "modulus"],
            [(float(u), float(v.real), float(v.imag), float(m))
             for u, v, m in zip(egrid.u, egrid.phi_hat, egrid.ecf_modulus)]))
        stages[stage] = "ok"

        stage = "deconvolve"
        if cfg["x_min"] is None or cfg["x_max"] is None:
            half = 1.25 * float(np.max(np.abs(att.returns)))
            x_lo, x_hi = -half, half
        else:
            x_lo, x_hi = cfg["x_min"], cfg["x_max"]
        x = np.linspace(x_lo, x_hi, cfg["x_points"])
        t_n = cfg["tn"] if cfg["tn"] else cfg["un"]
        dens = estimate_density(att, est, t_n=t_n,
                                n_nodes=cfg["density_nodes"], x=x)
        emit("density.csv", lambda p: _write_csv(
            p, ["x", "p_hat"],
            list(zip(map(float, dens.x), map(float, dens.p_hat)))))
        stages[stage] = "ok"

        stage = "classify"
        center = est.mu * att.delta
        span = 1.05 * float(np.max(np.abs(att.returns - center)))
        mix = build_mixture(est, dens, np.linspace(center - span,
                                                   center + span, 4001))
        if cfg["x1"] is not None and cfg["x2"] is not None:
            x1, x2 = cfg["x1"], cfg["x2"]
        else:
            x1, x2 = find_thresholds(mix)
        cls = classify(att, x1, x2)
        emit("mixture.csv", lambda p: _write_csv(
            p, ["x", "f0", "f1"],
            list(zip(map(float, mix.x), map(float, mix.f0),
                     map(float, mix.f1)))))
        emit("jumps.csv", lambda p: _write_csv(
            p, ["index", "date", "return", "J_k"],
            [(k + 1, att.dates[k].isoformat() if att.dates else "",
              float(att.returns[k]), int(cls.is_jump[k]))
             for k in range(att.n)]))
        manifest["thresholds"] = {"x1": x1, "x2": x2,
                                  "jump_count": int(cls.count)}
        stages[stage] = "ok"

        if price is not None:
            stage = "fit-price"
            price_cfg = SpectralConfig(un=cfg["price_un"], vn=cfg["price_vn"],
                                       eps=cfg["price_eps"],
                                       n_intervals=cfg["nodes"])
            fit = fit_price_model(price, cls.is_jump, price_cfg,
                                  t_n=cfg["price_tn"])
            doc = {"schema_version": 1, "delta": price.delta,
                   "mu_tilde": fit.mu_tilde, "sigma_tilde": fit.sigma_tilde,
                   "jump_part": fit.jump_est.to_dict(),
                   "jump_density": {
                       "x": [float(v) for v in fit.jump_density.x],
                       "p_hat": [float(v) for v in fit.jump_density.p_hat],
                       "t_n": fit.jump_density.t_n,
                       "n_nodes": fit.jump_density.n_nodes,
                       "imag_residual": fit.jump_density.imag_residual,
                       "mu_used": fit.jump_density.mu_used,
                       "sigma2_used": fit.jump_density.sigma2_used,
                       "lambda_used": fit.jump_density.lambda_used},
                   "is_jump": [int(v) for v in cls.is_jump],
                   "continuous_returns": [float(v) for v in
                                          fit.continuous_returns],
                   "jump_returns": [float(v) for v in fit.jump_returns]}
            emit("pricefit.json", lambda p: _write_json(p, doc))
            cont = continuous_sampler(fit.mu_tilde, fit.sigma_tilde, fit.delta)
            jump = jump_part_sampler(fit)
            rows = []
            for part, sampler, values, seed in (
                    ("continuous", cont, fit.continuous_returns, cfg["seed"]),
                    ("jump", jump, fit.jump_returns, cfg["seed"] + 1)):
                table = moment_ci_table(sampler, values,
                                        replicates=cfg["replicates"],
                                        sample_size=cfg["sample_size"],
                                        seed=seed)
                rows += [(part, r["statistic"], r["lower"], r["point"],
                          r["upper"]) for r in table]
            emit("tables.csv", lambda p: _write_csv(
                p, ["part", "statistic", "lower", "point", "upper"], rows))
            stages[stage] = "ok"

            stage = "diagnose"
            doc = {"schema_version": 1,
                   "correlations_all": {k: v.to_dict() for k, v in
                                        correlations(att.returns,
                                                     np.abs(price.returns)).items()},
                   "attention_chi2": chi2_independence(att.returns).to_dict(),
                   "price_chi2": chi2_independence(price.returns).to_dict()}
            if cls.count >= 3:
                doc["correlations_jumps_only"] = {
                    k: v.to_dict() for k, v in
                    correlations(att.returns[cls.is_jump],
                                 np.abs(price.returns[cls.is_jump])).items()}
            emit("diagnostics.json", lambda p: _write_json(p, doc))
            stages[stage] = "ok"
        else:
            stages["fit-price"] = "skipped"
            stages["diagnose"] = "skipped"

        if cfg["figures"]:
            emit("fig_returns.png", lambda p: report.fig_return_series(
                p, np.arange(1, att.n + 1), att.returns, "attention",
                series_b=(price.returns if price is not None else None),
                label_b="price", jump_mask=cls.is_jump))
            emit("fig_ecf.png", lambda p: report.fig_ecf_real(
                p, egrid.u, egrid.phi_hat.real[None, :]))
            emit("fig_density.png", lambda p: report.fig_density_overlay(
                p, dens.x, dens.p_hat))
            emit("fig_mixture.png", lambda p: report.fig_mixture(
                p, mix.x, mix.f0, mix.f1, x1, x2))
    except LevyFitError as exc:
        stages[stage] = "failed"
        manifest["error"] = {"stage": stage, "message": str(exc)}
        finish()
        raise type(exc)(f"stage {stage!r} failed: {exc}") from exc

    manifest["complete"] = True
    finish()
    return manifest


def cmd_pipeline(args):
    cfg = _resolve_config(args)
    manifest = run_pipeline(cfg, args.out_dir)
    done = sum(1 for v in manifest["stages"].values() if v == "ok")
    print(f"pipeline complete: {done} stage(s) ok, outputs in {args.out_dir}")
    return 0


def cmd_replicate(args):
    kwargs = {"seed": args.seed, "figures": not args.no_figures}
    if args.replicates is not None:
        kwargs["replicates"] = args.replicates
    if args.sizes:
        kwargs["sizes"] = tuple(int(v) for v in args.sizes.split(","))
    if args.sample_size is not None:
        kwargs["sample_size"] = args.sample_size
    if args.delta is not None:
        kwargs["delta"] = args.delta
    doc = studies.run_study(args.study, args.out_dir,
                            attention_csv=args.attention,
                            price_csv=args.price, **kwargs)
    if "checks" in doc:
        for name, status in doc["checks"].items():
            label = status if isinstance(status, str) \
                else ("PASS" if status else "FAIL")
            print(f"{name}: {label}")
        print(f"study {args.study}: "
              f"{'PASS' if doc.get('passed') else 'see checks above'}")
    else:
        print(f"study {args.study} written to {args.out_dir}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="levyfit",
                     description="Low-frequency jump-diffusion estimation")
    parser.add_argument("--version", action="version",
                        version=f"levyfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("returns", help="convert a date,value CSV to log-returns")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--date-column", default="date")
    p.add_argument("--value-column", default="value")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("simulate", help="simulate jump-diffusion increments")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--law", default="normal:0,1",
                   help="normal:m,s | dexp:p,etap,etam | cauchy:loc,scale |"
                        " tabulated:density.csv")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ecf", help="tabulate the log-ECF on [0, umax]")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--umax", type=float, required=True)
    p.add_argument("--points", type=int, default=241)
    p.add_argument("--out", required=True)
    p.add_argument("--fig")
    p.set_defaults(func=cmd_ecf)

    p = sub.add_parser("estimate", help="fit (sigma^2, lambda, mu)")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--un", type=float, required=True)
    p.add_argument("--vn", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("tune", help="score cutoff candidates by resimulation")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--un-grid", required=True, help="a:b:step or v1,v2,...")
    p.add_argument("--vn-grid", help="defaults to vn = un per candidate")
    p.add_argument("--eps-grid")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--tn", type=float)
    p.add_argument("--replicates", type=int, default=25)
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--fig")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("deconvolve", help="estimate the jump density")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--tn", type=float)
    p.add_argument("--nodes", type=int, default=2000)
    p.add_argument("--xmin", type=float, default=-5.0)
    p.add_argument("--xmax", type=float, default=5.0)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--fig")
    p.set_defaults(func=cmd_deconvolve)

    p = sub.add_parser("classify", help="classify jump intervals")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--density", required=True)
    p.add_argument("--x1", type=float)
    p.add_argument("--x2", type=float)
    p.add_argument("--emit-densities")
    p.add_argument("--out", required=True)
    p.add_argument("--fig")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fit-price", help="fit the two-part price model")
    p.add_argument("--price-returns", required=True)
    p.add_argument("--jumps", required=True)
    p.add_argument("--un", type=float, required=True)
    p.add_argument("--vn", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--tn", type=float)
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_price)

    p = sub.add_parser("price-report", help="moment confidence tables")
    p.add_argument("--fit", required=True)
    p.add_argument("--replicates", type=int, default=25)
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_price_report)

    p = sub.add_parser("diagnose", help="correlation and test diagnostics")
    p.add_argument("--attention", required=True)
    p.add_argument("--price", required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--jumps")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--config", help="JSON config; flags override its values")
    for key, default in _CONFIG_DEFAULTS.items():
        if key == "figures":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(default, bool):
            continue
        if isinstance(default, int) and not isinstance(default, bool):
            p.add_argument(flag, type=int, default=None)
        elif isinstance(default, float):
            p.add_argument(flag, type=float, default=None)
        else:
            p.add_argument(flag, type=(float if key in
                                       ("tn", "x_min", "x_max", "x1", "x2",
                                        "price_tn") else str), default=None)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("replicate", help="run a named replication study")
    p.add_argument("study", choices=["merton-sim", "attention-fit",
                                     "bitcoin-fit"])
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--sizes", help="comma list, e.g. 1000,5000,10000")
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--attention")
    p.add_argument("--price")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_replicate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
