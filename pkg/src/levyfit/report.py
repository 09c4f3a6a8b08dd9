"""Figure rendering for the report paths.

Every function writes one PNG next to the delimited data it visualises and
returns the path. Rendering is deterministic (fixed backend, no embedded
metadata), so repeated runs with the same inputs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE = {"dpi": 150, "metadata": {"Software": None}}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def fig_return_series(path, index, series_a, label_a, series_b=None,
                      label_b=None, jump_mask=None):
    """Return paths over time, optionally with jump intervals marked."""
    rows = 2 if series_b is not None else 1
    fig, axes = plt.subplots(rows, 1, figsize=(9, 2.8 * rows), sharex=True,
                             squeeze=False)
    for ax, series, label in zip(axes[:, 0], [series_a, series_b],
                                 [label_a, label_b]):
        if series is None:
            continue
        ax.plot(index, series, lw=0.8, color="C0")
        if jump_mask is not None:
            idx = np.asarray(index)
            mask = np.asarray(jump_mask, dtype=bool)
            ax.plot(idx[mask], np.asarray(series)[mask], ".", ms=4, color="C3",
                    label="jump")
            ax.legend(loc="upper right", fontsize=8)
        ax.set_ylabel(label)
        ax.axhline(0.0, color="k", lw=0.5)
    axes[-1, 0].set_xlabel("time")
    return _finish(fig, path)


def fig_ecf_real(path, u, curves, true_curve=None, approx_curve=None):
    """Real part of the log-ECF: replicate estimates with reference curves."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    curves = np.atleast_2d(curves)
    for row in curves:
        ax.plot(u, row, color="0.6", lw=0.6, alpha=0.6)
    if true_curve is not None:
        ax.plot(u, true_curve, color="C0", lw=1.8, label="true")
    if approx_curve is not None:
        ax.plot(u, approx_curve, color="C3", lw=1.4, ls="--",
                label="high-frequency approximation")
    ax.set_xlabel("u")
    ax.set_ylabel("Re log-CF / delta")
    if true_curve is not None or approx_curve is not None:
        ax.legend()
    return _finish(fig, path)


def fig_param_boxplots(path, results_by_n, true_values=None):
    """One panel per parameter; boxes grouped by sample size.

    results_by_n maps parameter name -> {n: list of estimates}.
    """
    names = list(results_by_n)
    fig, axes = plt.subplots(1, len(names), figsize=(3.2 * len(names), 3.6))
    axes = np.atleast_1d(axes)
    for ax, name in zip(axes, names):
        groups = results_by_n[name]
        sizes = sorted(groups)
        ax.boxplot([groups[n] for n in sizes], tick_labels=[str(n) for n in sizes])
        if true_values and name in true_values:
            ax.axhline(true_values[name], color="C3", lw=1.0, ls="--")
        ax.set_title(name)
        ax.set_xlabel("n")
    return _finish(fig, path)


def fig_density_overlay(path, x, estimates, truth=None, mse_by_n=None):
    """Density estimates overlaid on the reference, plus MSE boxplots."""
    ncols = 2 if mse_by_n else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.2 * ncols, 4.0),
                             squeeze=False)
    ax = axes[0, 0]
    for row in np.atleast_2d(estimates):
        ax.plot(x, row, color="0.6", lw=0.6, alpha=0.6)
    if truth is not None:
        ax.plot(x, truth, color="C3", lw=1.8, label="reference")
        ax.legend()
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    if mse_by_n:
        bx = axes[0, 1]
        sizes = sorted(mse_by_n)
        bx.boxplot([mse_by_n[n] for n in sizes],
                   tick_labels=[str(n) for n in sizes])
        bx.set_xlabel("n")
        bx.set_ylabel("MSE")
        bx.set_yscale("log")
    return _finish(fig, path)


def fig_mixture(path, x, f0, f1, x1=None, x2=None):
    """No-jump vs with-jump densities and the classification thresholds."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(x, f0, color="k", lw=1.4, label="no jump")
    ax.plot(x, f1, color="C3", lw=1.4, label="with jump")
    for xv, name in ((x1, "x1"), (x2, "x2")):
        if xv is not None:
            ax.axvline(xv, color="0.4", lw=0.8, ls=":")
            ax.annotate(f"{name}={xv:.4f}", (xv, ax.get_ylim()[1] * 0.9),
                        fontsize=8, rotation=90, va="top")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend()
    return _finish(fig, path)
