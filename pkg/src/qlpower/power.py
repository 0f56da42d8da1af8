"""Conversions between effect size, sample size, and power."""

from __future__ import annotations

import math

from .distributions import chisq_quantile, ncchisq_cdf, ncp_for_power
from .errors import DomainError, TooSmallEffectError

__all__ = ["power_at", "sample_size", "MAX_SAMPLE_SIZE"]

MAX_SAMPLE_SIZE = 10**9


def power_at(f2: float, n: int, df: int, alpha: float) -> float:
    """Asymptotic power of the chi-squared test at non-centrality n * f2."""
    if f2 < 0:
        raise DomainError(f"f2 must be non-negative, got {f2!r}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n!r}")
    crit = chisq_quantile(df, 1.0 - alpha)
    return 1.0 - ncchisq_cdf(crit, df, n * f2)


def sample_size(f2: float, df: int, alpha: float, target_power: float) -> int:
    """Smallest n with asymptotic power >= target: ceil(ncp / f2)."""
    if f2 <= 0:
        raise DomainError(f"f2 must be positive, got {f2!r}")
    ncp = ncp_for_power(df, alpha, target_power)
    n = math.ceil(ncp / f2)
    if n > MAX_SAMPLE_SIZE:
        raise TooSmallEffectError(
            f"f2={f2!r} needs n={n} which exceeds the {MAX_SAMPLE_SIZE} cap"
        )
    return n
