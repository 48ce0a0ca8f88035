"""Univariate slice sampling with stepping-out and shrinkage.

One transition draws an auxiliary level below the current log density,
expands an initial interval in width-sized steps until both ends leave the
slice (or a step/bound limit is hit), then samples uniformly inside,
shrinking on rejections.  Non-finite log densities at proposals are treated
as "outside the slice", never as errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SliceConfig:
    """Tuning constants for one slice-sampled variable.

    width: initial interval width (same units as the variable).
    max_steps: cap on stepping-out expansions per side.
    bounds: optional hard support (lo, hi); the interval is truncated there
    and no point outside is ever returned.
    """

    width: float
    max_steps: int = 20
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("slice width must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.bounds is not None and not self.bounds[0] < self.bounds[1]:
            raise ValueError("bounds must satisfy lo < hi")


def _finite_or_neg_inf(value) -> float:
    value = float(value)
    return value if value == value else -math.inf  # NaN -> outside slice


def _slice_step(log_density, current: float, cfg: SliceConfig, rng) -> tuple[float, float]:
    """One transition; returns (new_point, log_slice_level)."""
    lp0 = float(log_density(current))
    if not math.isfinite(lp0):
        raise ValueError(f"log density not finite at starting point {current!r}")
    z = lp0 - rng.standard_exponential()

    lo, hi = cfg.bounds if cfg.bounds is not None else (-math.inf, math.inf)
    width = cfg.width
    left = current - width * rng.random()
    right = left + width
    left = max(left, lo)
    right = min(right, hi)

    steps = cfg.max_steps
    while steps > 0 and left > lo and _finite_or_neg_inf(log_density(left)) > z:
        left = max(left - width, lo)
        steps -= 1
    steps = cfg.max_steps
    while steps > 0 and right < hi and _finite_or_neg_inf(log_density(right)) > z:
        right = min(right + width, hi)
        steps -= 1

    while True:
        proposal = left + rng.random() * (right - left)
        if _finite_or_neg_inf(log_density(proposal)) > z:
            return proposal, z
        if proposal < current:
            left = proposal
        elif proposal > current:
            right = proposal
        else:
            # Interval shrank onto the current point, which is on the slice
            # by construction; can only happen through fp underflow.
            return current, z


def slice_sample(log_density, current: float, cfg: SliceConfig, rng) -> float:
    """Draw the next state of a slice-sampling Markov chain.

    Parameters
    ----------
    log_density : callable
        Log of the (unnormalised) target density of one real variable.
    current : float
        Current state; must have finite log density and lie within bounds.
    cfg : SliceConfig
    rng : numpy.random.Generator

    Returns the new state, which always satisfies the slice condition
    ``log_density(new) > z`` for the auxiliary level ``z`` drawn internally,
    and always lies within ``cfg.bounds``.
    """
    new, _ = _slice_step(log_density, current, cfg, rng)
    return new
