"""Empirical characteristic function of the increments and its scaled
logarithm.

The scaled log-ECF at frequency u is (1/delta) * log((1/n) sum_k exp(i u D_k)),
with the complex logarithm taken along the continuous branch: the phase is
unwrapped cumulatively along an ascending frequency path anchored at u = 0
(where the ECF is exactly 1). A principal-branch arctan would wrap once the
accumulated phase leaves (-pi/2, pi/2], which a linear drift term mu*u always
eventually does; unwrapping recovers the intended continuous logarithm.

Negative frequencies are served by Hermitian symmetry, which the ECF obeys
exactly: ecf(-u) = conj(ecf(u)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .ingest import ReturnSeries

# Evaluation points per chunk (bounds the n-by-grid work matrix).
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class EcfGrid:
    """Scaled log-ECF values on a frequency grid, with usability flags.

    ``usable`` marks points whose raw ECF modulus is at or above the noise
    floor; below it log|ecf| is noise-dominated and the point should not
    feed an estimator without shrinking the cutoff.
    """

    u: np.ndarray
    phi_hat: np.ndarray
    n: int
    delta: float
    ecf_modulus: np.ndarray
    usable: np.ndarray
    modulus_floor: float


class EmpiricalLogCf:
    """Evaluator for the ECF and its unwrapped scaled logarithm.

    Parameters
    ----------
    returns : ReturnSeries
    modulus_floor : float, optional
        Usability threshold for the ECF modulus; defaults to 2/sqrt(n),
        twice the ECF's natural noise scale.
    max_phase_step : float, optional
        Largest tolerated wrapped phase difference between consecutive
        evaluation points; a larger jump means the path was too coarse to
        unwrap and raises NumericalError.
    anchor_step : float, optional
        Spacing of auxiliary points inserted between 0 and the largest
        requested frequency. Defaults to (pi/4) / max|D|, which keeps the
        per-term phase advance of each exp(i u D_k) well under pi.
    """

    def __init__(self, returns: ReturnSeries, modulus_floor: float | None = None,
                 max_phase_step: float = math.pi * 0.999,
                 anchor_step: float | None = None):
        if returns.n < 1:
            raise DataError("need at least one increment")
        self._d = np.asarray(returns.returns, dtype=float)
        self.n = returns.n
        self.delta = float(returns.delta)
        self.modulus_floor = (2.0 / math.sqrt(self.n) if modulus_floor is None
                              else float(modulus_floor))
        self.max_phase_step = float(max_phase_step)
        if anchor_step is None:
            scale = float(np.max(np.abs(self._d))) if self.n else 0.0
            anchor_step = (math.pi / 4.0) / scale if scale > 0 else math.inf
        self._anchor_step = float(anchor_step)

    def ecf(self, u) -> np.ndarray:
        """Raw ECF: mean over k of exp(i u D_k), at arbitrary real u."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty(u.shape, dtype=complex)
        step = max(1, _CHUNK_BUDGET // max(1, self.n))
        for lo in range(0, u.size, step):
            block = u[lo:lo + step]
            out[lo:lo + step] = np.exp(1j * np.outer(block, self._d)).mean(axis=1)
        return out

    def grid(self, u) -> EcfGrid:
        """Scaled log-ECF on a frequency grid (any order, any signs)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if not np.all(np.isfinite(u)):
            raise DataError("frequency grid must be finite")
        mags = np.abs(u)
        umax = float(mags.max(initial=0.0))
        if math.isfinite(self._anchor_step) and self._anchor_step > 0:
            count = min(int(umax / self._anchor_step) + 1, 200_000)
            anchors = np.linspace(0.0, umax, count + 1)
        else:
            anchors = np.array([0.0, umax])
        path = np.unique(np.concatenate([anchors, mags]))
        if path[0] != 0.0:
            path = np.concatenate([[0.0], path])

        vals = self.ecf(path)
        modulus = np.abs(vals)
        diffs = np.angle(vals[1:] * np.conj(vals[:-1]))
        worst = float(np.max(np.abs(diffs), initial=0.0))
        if worst >= self.max_phase_step:
            raise NumericalError(
                f"phase difference {worst:.3f} rad >= {self.max_phase_step:.3f} "
                "between adjacent frequencies; grid too coarse to unwrap")
        theta = np.concatenate([[0.0], np.cumsum(diffs)])
        with np.errstate(divide="ignore"):
            logmod = np.log(modulus)
        phi_path = (logmod + 1j * theta) / self.delta

        idx = np.searchsorted(path, mags)
        phi = phi_path[idx]
        phi = np.where(u >= 0, phi, np.conj(phi))
        mod = modulus[idx]
        usable = mod >= self.modulus_floor
        phi = np.where(np.isfinite(mod) & (mod > 0), phi, np.nan + 1j * np.nan)
        return EcfGrid(u=u, phi_hat=phi, n=self.n, delta=self.delta,
                       ecf_modulus=mod, usable=usable,
                       modulus_floor=self.modulus_floor)

    def __call__(self, u) -> np.ndarray:
        return self.grid(u).phi_hat


def ecf(returns: ReturnSeries, u) -> np.ndarray:
    """Empirical characteristic function on a frequency grid."""
    return EmpiricalLogCf(returns).ecf(u)


def log_ecf(returns: ReturnSeries, u, modulus_floor: float | None = None) -> EcfGrid:
    """Scaled log-ECF on a strictly increasing frequency grid."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.size > 1 and np.any(np.diff(u) <= 0):
        raise DataError("frequency grid must be strictly increasing")
    return EmpiricalLogCf(returns, modulus_floor=modulus_floor).grid(u)
