"""Predictive calendar-age density and the cluster-count posterior.

Each stored mixture snapshot induces an exact predictive density for the
age of a future object: a finite normal mixture over its represented
clusters plus one heavy-tailed component for the possibility of a brand-new
cluster.  Averaging realisations over the stored chain gives the pointwise
mean, and pointwise empirical quantiles give the credible band.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from carbcal.calibrate import Hyperparameters
from carbcal.dpmm import ClusterSample, PosteriorSamples, base_marginal
from carbcal.errors import DataError


@dataclass(frozen=True)
class PredictiveDensity:
    """Pointwise predictive summary on a calendar-age grid."""

    theta: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    lower_q: float
    upper_q: float
    realisations: np.ndarray | None = None


def _mixture_weights(sample: ClusterSample) -> tuple[np.ndarray, float]:
    """Cluster weights plus the new-cluster weight; totals one exactly."""
    if sample.w is not None:
        w = np.asarray(sample.w, dtype=float)
        p_new = 1.0 - float(w.sum())
        if p_new < 0.0:
            if p_new < -1e-9:
                raise AssertionError("stick weights exceed one")
            p_new = 0.0
    else:
        n = float(sample.counts.sum())
        w = sample.counts / (n + sample.alpha)
        p_new = sample.alpha / (n + sample.alpha)
    total = float(w.sum()) + p_new
    if abs(total - 1.0) > 1e-9:
        raise AssertionError(f"mixture weights sum to {total!r}, not 1")
    return w, p_new


def predictive_realisation(
    sample: ClusterSample, hyper: Hyperparameters, grid: np.ndarray
) -> np.ndarray:
    """Exact predictive density of one stored snapshot on the grid."""
    grid = np.asarray(grid, dtype=float)
    w, p_new = _mixture_weights(sample)
    out = np.zeros_like(grid)
    for weight, phi_j, tau_j in zip(w, sample.phi, sample.tau):
        if weight == 0.0:
            continue
        sd = tau_j**-0.5
        z = (grid - phi_j) / sd
        out += weight * np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    if p_new > 0.0:
        out += p_new * base_marginal(grid, sample.mu_phi, hyper)
    return out


def predictive_density(
    samples: PosteriorSamples,
    hyper: Hyperparameters,
    grid: np.ndarray,
    lower_q: float = 0.025,
    upper_q: float = 0.975,
    keep_realisations: bool = False,
) -> PredictiveDensity:
    """Average the per-sample predictives and take pointwise quantiles.

    Each realisation is renormalised on the grid, so the result is the
    predictive density conditioned on the age falling inside the grid
    window; the mean curve then integrates to one on the grid.
    """
    if samples.n_stored == 0:
        raise DataError("no stored samples to build a predictive from")
    if samples.n_stored < 100:
        warnings.warn(
            f"predictive built from only {samples.n_stored} stored samples; "
            "at least 100 are recommended",
            stacklevel=2,
        )
    grid = np.asarray(grid, dtype=float)
    spacing = float(grid[1] - grid[0])
    rows = np.empty((samples.n_stored, len(grid)))
    for k, snap in enumerate(samples.clusters):
        row = predictive_realisation(snap, hyper, grid)
        rows[k] = row / (row.sum() * spacing)
    mean = rows.mean(axis=0)
    lo = np.quantile(rows, lower_q, axis=0)
    hi = np.quantile(rows, upper_q, axis=0)
    return PredictiveDensity(
        theta=grid,
        mean=mean,
        lo=lo,
        hi=hi,
        lower_q=lower_q,
        upper_q=upper_q,
        realisations=rows if keep_realisations else None,
    )


def default_predictive_grid(curve, theta_map, resolution: float) -> np.ndarray:
    """Grid covering the preliminary MAP ages padded by four spread units."""
    theta_map = np.asarray(theta_map, dtype=float)
    mad = float(np.median(np.abs(theta_map - np.median(theta_map))))
    pad = 4.0 * mad if mad > 0 else 4.0 * resolution
    lo_s, hi_s = curve.support
    lo = max(theta_map.min() - pad, lo_s)
    hi = min(theta_map.max() + pad, hi_s)
    n_cells = int(math.floor((hi - lo) / resolution + 1e-9))
    return lo + resolution * np.arange(n_cells + 1)


def cluster_count_posterior(samples: PosteriorSamples) -> dict[int, float]:
    """Relative frequency of occupied-cluster counts across stored samples."""
    if samples.n_stored == 0:
        raise DataError("no stored samples")
    counts = [int((snap.counts > 0).sum()) for snap in samples.clusters]
    hist: dict[int, float] = {}
    for k in counts:
        hist[k] = hist.get(k, 0.0) + 1.0
    total = float(len(counts))
    return {k: v / total for k, v in sorted(hist.items())}
