"""Wald and score tests of the predictor block (H0: beta = 0)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import chisq_quantile
from .errors import DomainError, SingularBlockError
from .estimation import FitResult
from .model import Dataset

__all__ = ["TestReport", "wald_test", "score_test"]


@dataclass(frozen=True)
class TestReport:
    """Outcome of one chi-squared test: statistic, critical value, decision."""

    statistic: float
    df: int
    critical_value: float
    reject: bool
    alpha: float


def _report(statistic: float, df: int, alpha: float) -> TestReport:
    crit = chisq_quantile(df, 1.0 - alpha)
    return TestReport(
        statistic=float(statistic),
        df=df,
        critical_value=crit,
        reject=bool(statistic > crit),
        alpha=alpha,
    )


def wald_test(fit: FitResult, alpha: float = 0.05) -> TestReport:
    """W = beta_hat' * I_{beta|lambda} * beta_hat, referred to chi-squared(p)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if fit.p < 1:
        raise DomainError("Wald test needs at least one predictor coefficient")
    stat = float(fit.beta_hat @ fit.info_beta_given_lambda @ fit.beta_hat)
    return _report(stat, fit.p, alpha)


def score_test(data: Dataset, restricted: FitResult, alpha: float = 0.05) -> TestReport:
    """Quadratic form of the summed quasi-score at the restricted fit.

    S = U' i^{-1} U with U and i both evaluated at (lambda_hat_0, 0) and the
    restricted fit's Pearson dispersion; the inverse is applied by linear
    solve.  The adjustor block of U is numerically zero by construction.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if data.p < 1:
        raise DomainError("score test needs at least one predictor column")
    eta = data.z @ restricted.lambda_hat
    mu = restricted.link.inverse(eta)
    dmu = restricted.link.dmu_deta(eta)
    v = restricted.variance.v(mu)
    resid = (data.y - mu) * dmu / (restricted.sigma2_hat * v)
    u = data.design().T @ resid
    try:
        stat = float(u @ np.linalg.solve(restricted.info, u))
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError("information matrix at the restricted fit is singular") from exc
    return _report(stat, data.p, alpha)
