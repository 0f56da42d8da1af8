"""Synthetic data generation: Gaussian-copula covariates, the five outcome
laws used by the calibration experiments, and the coefficient search that
tunes a predictor coefficient to hit a target sample size.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .distributions import RngStream
from .errors import (
    DomainError,
    InadmissibleMeanError,
    InvalidDispersionError,
    NonConvergenceError,
)
from .model import Dataset, Link, ModelSpec, VarianceFunction

__all__ = [
    "CovariateDesign",
    "OutcomeKind",
    "OutcomeCase",
    "gen_covariates",
    "gen_outcome",
    "gen_dataset",
    "coefficient_search",
]

_TERCILES = (1.0 / 3.0, 2.0 / 3.0)


@dataclass(frozen=True)
class CovariateDesign:
    """One uniform adjustor coupled to a 3-level categorical predictor.

    The two latent normals share correlation ``rho``; the categorical variable
    is cut at the terciles of the uniform scale and dummy-encoded as
    level 0 -> (0,0), level 1 -> (1,0), level 2 -> (0,1).
    """

    rho: float
    n_categories: int = 3

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho!r}")
        if self.n_categories != 3:
            raise DomainError("only the 3-level categorical design is supported")


class OutcomeKind(str, enum.Enum):
    """The five outcome laws: three count cases and two gamma cases."""

    POISSON_VAR_EQ_MEAN = "poisson_var_eq_mean"
    MIXTURE_POISSON_VAR_PROP_MEAN = "mixture_poisson_var_prop_mean"
    MODIFIED_NB_VAR_PROP_MEAN_SQ = "modified_nb_var_prop_mean_sq"
    GAMMA_VAR_PROP_MEAN = "gamma_var_prop_mean"
    GAMMA_VAR_PROP_MEAN_SQ = "gamma_var_prop_mean_sq"


# dispersion implied by the construction itself (law of total variance for the
# 50/50 Poisson mixture: Var = 0.5*mu + 0.5*2*mu = 1.5*mu)
_IMPLIED_SIGMA2 = {
    OutcomeKind.POISSON_VAR_EQ_MEAN: 1.0,
    OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN: 1.5,
}

_VARIANCE_OF_KIND = {
    OutcomeKind.POISSON_VAR_EQ_MEAN: VarianceFunction.MEAN,
    OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN: VarianceFunction.MEAN,
    OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ: VarianceFunction.MEAN_SQUARED,
    OutcomeKind.GAMMA_VAR_PROP_MEAN: VarianceFunction.MEAN,
    OutcomeKind.GAMMA_VAR_PROP_MEAN_SQ: VarianceFunction.MEAN_SQUARED,
}


@dataclass(frozen=True)
class OutcomeCase:
    """An outcome law plus its dispersion.

    ``sigma2`` may be omitted for the two cases whose construction implies it
    (Poisson: 1, mixture Poisson: 1.5); passing a conflicting value raises.
    """

    kind: OutcomeKind
    sigma2: float | None = None

    def __post_init__(self):
        implied = _IMPLIED_SIGMA2.get(self.kind)
        if implied is not None:
            if self.sigma2 is not None and not np.isclose(self.sigma2, implied):
                raise InvalidDispersionError(
                    f"{self.kind.value} implies sigma2={implied}, got {self.sigma2!r}"
                )
            object.__setattr__(self, "sigma2", implied)
        else:
            if self.sigma2 is None or self.sigma2 <= 0:
                raise InvalidDispersionError(
                    f"{self.kind.value} requires a positive sigma2, got {self.sigma2!r}"
                )
            object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def variance(self) -> VarianceFunction:
        return _VARIANCE_OF_KIND[self.kind]

    @property
    def outcome_nature(self) -> str:
        if self.kind in (
            OutcomeKind.GAMMA_VAR_PROP_MEAN,
            OutcomeKind.GAMMA_VAR_PROP_MEAN_SQ,
        ):
            return "positive"
        return "count"

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "sigma2": float(self.sigma2)}

    @classmethod
    def from_dict(cls, d: dict) -> "OutcomeCase":
        return cls(kind=OutcomeKind(d["kind"]), sigma2=d.get("sigma2"))


def gen_covariates(design: CovariateDesign, n: int, rng: RngStream):
    """Draw ``n`` copula-coupled covariate rows.

    Returns ``(z_col, d1, d2)``: the uniform adjustor and the two dummy
    columns of the categorical predictor.
    """
    g = rng.generator
    c1 = g.standard_normal(n)
    c2 = design.rho * c1 + np.sqrt(1.0 - design.rho**2) * g.standard_normal(n)
    z_col = ndtr(c1)
    u2 = ndtr(c2)
    category = np.digitize(u2, _TERCILES)
    d1 = (category == 1).astype(float)
    d2 = (category == 2).astype(float)
    return z_col, d1, d2


def gen_outcome(case: OutcomeCase, mu, rng: RngStream):
    """Draw outcome(s) with mean ``mu`` under the case's variance law.

    ``mu`` may be a scalar or an array; the return matches its shape.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 0):
        raise InadmissibleMeanError("outcome mean must be positive")
    g = rng.generator
    kind = case.kind
    if kind is OutcomeKind.POISSON_VAR_EQ_MEAN:
        y = g.poisson(mu).astype(float)
    elif kind is OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN:
        # Y ~ Poi(mu) with prob 1/2, else Y ~ Poi(L) with L ~ Poi(mu)
        lat = g.poisson(mu).astype(float)
        pick = g.random(mu.shape) < 0.5
        y = g.poisson(np.where(pick, lat, mu)).astype(float)
    elif kind is OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ:
        # gamma-Poisson mixture matching Var = sigma2 * mu^2 = mu + nu*mu^2
        nu = case.sigma2 - 1.0 / mu
        if np.any(nu <= 0):
            raise InvalidDispersionError(
                "modified NB requires sigma2 * mu > 1 for every mean"
            )
        frailty = g.gamma(1.0 / nu, nu)
        y = g.poisson(mu * frailty).astype(float)
    elif kind is OutcomeKind.GAMMA_VAR_PROP_MEAN:
        y = g.gamma(mu / case.sigma2, case.sigma2)
    else:  # GAMMA_VAR_PROP_MEAN_SQ
        y = g.gamma(1.0 / case.sigma2, mu * case.sigma2)
    return y if mu.ndim else float(y)


def gen_dataset(
    spec: ModelSpec,
    design: CovariateDesign,
    case: OutcomeCase,
    n: int,
    rng: RngStream,
) -> Dataset:
    """One i.i.d. sample of size ``n`` from the model: Z = (1, Z_col), X = (D1, D2)."""
    if spec.r != 2 or spec.p != 2:
        raise DomainError("the copula design generates r=2 adjustors and p=2 dummies")
    z_col, d1, d2 = gen_covariates(design, n, rng)
    z = np.column_stack([np.ones(n), z_col])
    x = np.column_stack([d1, d2])
    eta = z @ spec.lam + x @ spec.beta
    mu = spec.link.inverse(eta)
    if not spec.variance.admissible(mu):
        raise InadmissibleMeanError("linear predictor leaves the admissible mean range")
    y = gen_outcome(case, mu, rng)
    return Dataset(y=y, z=z, x=x)


def coefficient_search(
    target_n: int,
    lam,
    beta1: float,
    delta: float,
    link: Link,
    variance: VarianceFunction,
    sigma2: float,
    design: CovariateDesign,
    *,
    beta2_init: float = 0.1,
    tol: float = 1.0,
    step: float = 0.02,
    mc_size: int = 10**6,
    max_iter: int = 200,
    seed: int = 0,
) -> float:
    """Tune the last predictor coefficient so ceil(delta / f2) lands on ``target_n``.

    Fixed-step walk on beta2 until the sign of (n - target_n) flips, then
    bisection on the bracket.  The effect is evaluated on one frozen covariate
    sample so the map beta2 -> n is deterministic and monotone decreasing.
    """
    from .effectsize import CovariateSample, true_f2

    if target_n < 1:
        raise DomainError("target_n must be positive")
    sample = CovariateSample.from_design(design, mc_size, RngStream(seed, 0))
    lam = np.asarray(lam, dtype=float)

    def n_of(beta2: float) -> float:
        spec = ModelSpec(link, variance, sigma2, lam, np.array([beta1, beta2]))
        f2, _ = true_f2(spec, sample)
        if f2 <= 0:
            return np.inf
        return np.ceil(delta / f2)

    beta2 = beta2_init
    n_cur = n_of(beta2)
    if abs(n_cur - target_n) < tol:
        return beta2
    direction = 1.0 if n_cur > target_n else -1.0  # n decreases as beta2 grows
    for _ in range(max_iter):
        nxt = beta2 + direction * step
        n_nxt = n_of(nxt)
        if abs(n_nxt - target_n) < tol:
            return nxt
        if (n_nxt - target_n) * (n_cur - target_n) < 0:
            lo, hi = sorted((beta2, nxt))
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                n_mid = n_of(mid)
                if abs(n_mid - target_n) < tol:
                    return mid
                # n decreases in beta2: too-large n means beta2 too small
                if n_mid > target_n:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-12:
                    break
            return 0.5 * (lo + hi)
        beta2, n_cur = nxt, n_nxt
    raise NonConvergenceError(
        f"coefficient search did not bracket target_n={target_n} "
        f"after {max_iter} steps (last beta2={beta2:.4f}, n={n_cur})"
    )
