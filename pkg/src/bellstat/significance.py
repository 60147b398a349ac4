"""Block estimators and distribution-free (Chebyshev) significance.

The per-block values of a statistic give a mean, a Bessel-corrected sample
standard deviation, and the standard error ``s / sqrt(L)``.  The standard
error stands in for the unknown standard deviation of the mean; no finite-L
correction is applied.

Chebyshev's bound ``P(|X - mu| >= k sigma) <= 1/k**2`` holds for any
distribution with finite variance, so an interval of half-width
``k * se`` with ``k = 1/sqrt(1 - level)`` carries confidence ``level``
without assuming normality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import DegenerateError, DomainError, InsufficientDataError, ValidationError


@dataclass(frozen=True)
class BlockStatistics:
    l: int
    mean: float
    sample_std: float
    se: float

    def __post_init__(self):
        if self.l < 1:
            raise ValidationError("block count must be at least 1")
        if self.sample_std < 0 or self.se < 0:
            raise ValidationError("spread estimates must be non-negative")

    @classmethod
    def from_summary(cls, mean: float, se: float, l: int) -> BlockStatistics:
        """Rebuild statistics from a published (mean, standard error, L) triple."""
        return cls(l, float(mean), float(se) * math.sqrt(l), float(se))


@dataclass(frozen=True)
class ChebyshevInterval:
    level: float
    k: float
    c: float
    lo: float
    hi: float


def block_stats(values: Sequence[float]) -> BlockStatistics:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValidationError("block values must be a flat sequence")
    if x.size < 2:
        raise InsufficientDataError(f"need at least 2 block values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("block values must be finite")
    mean = math.fsum(x) / x.size
    if np.all(x == x[0]):
        # exact zero spread; avoids a rounding residue from the mean
        return BlockStatistics(int(x.size), float(x[0]), 0.0, 0.0)
    s = math.sqrt(math.fsum((x - mean) ** 2) / (x.size - 1))
    return BlockStatistics(int(x.size), mean, s, s / math.sqrt(x.size))


def sigma_multiplier(level: float) -> float:
    """``k`` such that ``1 - 1/k**2 == level``."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")
    return 1.0 / math.sqrt(1.0 - level)


def chebyshev_tail(c: float, sigma: float) -> float:
    """Upper bound on ``P(|X - mu| >= c)`` for a variable with std ``sigma``."""
    if not c > 0:
        raise DomainError(f"deviation c must be positive, got {c}")
    if sigma < 0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    return min(1.0, (sigma / c) ** 2)


def chebyshev_interval(stats: BlockStatistics, level: float) -> ChebyshevInterval:
    k = sigma_multiplier(level)
    if not stats.se > 0:
        raise DegenerateError("standard error is zero; the interval is degenerate")
    c = k * stats.se
    return ChebyshevInterval(level, k, c, stats.mean - c, stats.mean + c)


def sigma_violation(stats: BlockStatistics, threshold: float, direction: str) -> float:
    """Distance from ``threshold`` in standard errors, or 0 if not violated.

    ``direction`` names the side on which the mean must fall to count as a
    violation: ``"below"`` for J (bound J >= 0) and ``"above"`` for T
    (bound T <= 1).
    """
    if direction not in ("below", "above"):
        raise DomainError(f"direction must be 'below' or 'above', got {direction!r}")
    if not stats.se > 0:
        raise DegenerateError("standard error is zero; sigma count undefined")
    gap = threshold - stats.mean if direction == "below" else stats.mean - threshold
    return gap / stats.se if gap > 0 else 0.0


def min_confidence_for_violation(
    stats: BlockStatistics, threshold: float, direction: str | None = None
) -> float:
    """Largest Chebyshev confidence at which the interval still excludes ``threshold``.

    With ``direction`` given, a mean on the wrong side of the threshold is
    rejected as a non-violation.
    """
    if not stats.se > 0:
        raise DegenerateError("standard error is zero")
    if stats.mean == threshold:
        raise DomainError("mean equals the threshold; there is no violation")
    if direction is not None and sigma_violation(stats, threshold, direction) == 0.0:
        raise DomainError(f"mean {stats.mean} does not lie {direction} {threshold}")
    k = abs(stats.mean - threshold) / stats.se
    if k <= 1:
        return 0.0
    return 1.0 - 1.0 / k**2


def significance_report(
    stats: BlockStatistics, level: float, threshold: float, direction: str
) -> dict[str, Any]:
    """JSON-ready report; interval and sigma are None when the spread is zero."""
    out: dict[str, Any] = {
        "l": stats.l,
        "mean": stats.mean,
        "sample_std": stats.sample_std,
        "se": stats.se,
        "sigma_violation": None,
        "chebyshev": None,
    }
    if stats.se > 0:
        out["sigma_violation"] = sigma_violation(stats, threshold, direction)
        iv = chebyshev_interval(stats, level)
        out["chebyshev"] = {"level": iv.level, "k": iv.k, "c": iv.c, "lo": iv.lo, "hi": iv.hi}
    return out
