"""Effect sizes for quasi-likelihood power analysis.

Computes the exact per-observation non-centrality f2 together with its three
practical approximations:

* the two-standard-deviation linear-predictor contrast (phi) and the induced
  f2_phi = w1 * phi^2 / 4,
* the pseudo-partial R-squared and the induced f2_r = r2 / (1 - r2),
* the score-test effect f2_s built from the population restricted model.

All quantities are Monte Carlo averages over the covariate distribution: either
a synthetic copula design or an empirical pilot sample.  Outcomes never need to
be drawn; conditional moments are integrated analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import CovariateDesign, gen_covariates
from .distributions import RngStream
from .errors import DomainError, NonConvergenceError, SingularMomentError
from .model import Link, ModelSpec, VarianceFunction

__all__ = [
    "CovariateSample",
    "ProjectionA",
    "EffectSizeReport",
    "projection_a",
    "true_f2",
    "two_slip",
    "p2r2",
    "score_f2",
    "effect_size_report",
]

DEFAULT_MC_SIZE = 10**6


@dataclass(frozen=True)
class CovariateSample:
    """Covariate rows the Monte Carlo averages run over.

    ``z`` carries the intercept column; ``y`` is optional and only used to
    anchor the marginal outcome mean in pilot mode.
    """

    z: np.ndarray
    x: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_2d(np.asarray(self.z, dtype=float)))
        object.__setattr__(self, "x", np.atleast_2d(np.asarray(self.x, dtype=float)))
        if self.z.shape[0] != self.x.shape[0]:
            raise DomainError("z and x must have the same number of rows")
        if self.y is not None:
            object.__setattr__(self, "y", np.asarray(self.y, dtype=float))

    @property
    def size(self) -> int:
        return self.z.shape[0]

    @classmethod
    def from_design(cls, design: CovariateDesign, mc_size: int, rng: RngStream) -> "CovariateSample":
        z_col, d1, d2 = gen_covariates(design, mc_size, rng)
        return cls(
            z=np.column_stack([np.ones(mc_size), z_col]),
            x=np.column_stack([d1, d2]),
        )

    @classmethod
    def from_dataset(cls, data) -> "CovariateSample":
        return cls(z=data.z, x=data.x, y=data.y)


@dataclass(frozen=True)
class ProjectionA:
    """Population weighted regression of X on Z: A = E[wXZ'] E[wZZ']^{-1}."""

    a: np.ndarray


@dataclass(frozen=True)
class EffectSizeReport:
    """Every effect size for one model/design pair, plus derived sample sizes
    where the caller attaches them."""

    f2: float
    phi: float
    r2: float
    f2_phi: float
    f2_r: float
    f2_s: float | None
    w_one: float
    mc_size: int
    mc_se_f2: float

    def to_dict(self) -> dict:
        d = {
            "f2": self.f2,
            "phi": self.phi,
            "r2": self.r2,
            "f2_phi": self.f2_phi,
            "f2_r": self.f2_r,
            "w_one": self.w_one,
            "mc_size": self.mc_size,
            "mc_se_f2": self.mc_se_f2,
        }
        d["f2_s"] = self.f2_s
        return d


def _resolve_sample(source, mc_size, rng) -> CovariateSample:
    if isinstance(source, CovariateSample):
        return source
    if isinstance(source, CovariateDesign):
        return CovariateSample.from_design(source, mc_size, rng or RngStream(0, 0))
    raise DomainError(f"expected a CovariateDesign or CovariateSample, got {type(source)!r}")


def _weights(spec: ModelSpec, eta):
    mu = spec.link.inverse(eta)
    dmu = spec.link.dmu_deta(eta)
    v = spec.variance.v(mu)
    return dmu * dmu / (spec.sigma2 * v), mu, v


def projection_a(spec: ModelSpec, source, mc_size: int = DEFAULT_MC_SIZE, rng: RngStream | None = None) -> ProjectionA:
    """Weighted projection coefficients of the predictors onto the adjustors."""
    sample = _resolve_sample(source, mc_size, rng)
    eta = sample.z @ spec.lam + sample.x @ spec.beta
    w, _, _ = _weights(spec, eta)
    wxz = (sample.x * w[:, None]).T @ sample.z
    wzz = (sample.z * w[:, None]).T @ sample.z
    try:
        a = np.linalg.solve(wzz, wxz.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularMomentError("E[wZZ'] is singular") from exc
    return ProjectionA(a=a)


def _eta_decomposition(spec: ModelSpec, sample: CovariateSample):
    """Returns (w, mu, v, eta, eta_xz, lam0) shared by the measures."""
    eta = sample.z @ spec.lam + sample.x @ spec.beta
    w, mu, v = _weights(spec, eta)
    a = projection_a(spec, sample).a
    eta_xz = (sample.x - sample.z @ a.T) @ spec.beta
    lam0 = spec.lam + a.T @ spec.beta  # reduced-model coefficients
    return w, mu, v, eta, eta_xz, lam0


def true_f2(spec: ModelSpec, source, mc_size: int = DEFAULT_MC_SIZE, rng: RngStream | None = None):
    """Exact effect f2 = E[w * eta_{x|z}^2] with its Monte Carlo standard error."""
    sample = _resolve_sample(source, mc_size, rng)
    w, _, _, _, eta_xz, _ = _eta_decomposition(spec, sample)
    contrib = w * eta_xz**2
    f2 = float(np.mean(contrib))
    se = float(np.std(contrib) / np.sqrt(sample.size))
    return f2, se


def two_slip(spec: ModelSpec, source, mc_size: int = DEFAULT_MC_SIZE, rng: RngStream | None = None):
    """2SLiP contrast and the induced effect approximation.

    Returns (phi, f2_phi, w_one) where phi = 2 * sd(eta_{x|z}) and w_one is
    the weight at mu = E[Y]: the covariate-averaged mean in synthetic mode, or
    the observed outcome mean when the sample carries outcomes.
    """
    sample = _resolve_sample(source, mc_size, rng)
    _, mu, _, _, eta_xz, _ = _eta_decomposition(spec, sample)
    phi = float(2.0 * np.sqrt(np.var(eta_xz)))
    mean_y = float(np.mean(sample.y)) if sample.y is not None else float(np.mean(mu))
    eta_one = spec.link.g(mean_y)
    w_one, _, _ = _weights(spec, eta_one)
    f2_phi = float(w_one) * phi**2 / 4.0
    return phi, f2_phi, float(w_one)


def p2r2(spec: ModelSpec, source, mc_size: int = DEFAULT_MC_SIZE, rng: RngStream | None = None):
    """Pseudo-partial R-squared and the induced effect f2_r.

    Uses the population form: the outcome never enters because the conditional
    variance term integrates to one and the cross term vanishes, leaving
    f2_r = E[(mu - mu_z)^2 / (sigma2 v(mu))] and r2 = f2_r / (1 + f2_r).
    """
    sample = _resolve_sample(source, mc_size, rng)
    w, mu, v, _, _, lam0 = _eta_decomposition(spec, sample)
    mu_z = spec.link.inverse(sample.z @ lam0)
    f2_r = float(np.mean((mu - mu_z) ** 2 / (spec.sigma2 * v)))
    r2 = f2_r / (1.0 + f2_r)
    return r2, f2_r


def _restricted_population_fit(spec: ModelSpec, sample: CovariateSample, max_iter=200, tol=1e-12):
    """Solve E[U_lambda(lam, 0)] = 0 over the covariate sample.

    Runs IRLS against the noiseless response mu(true); this solves the same
    population equation as a restricted fit on drawn outcomes, without the
    outcome noise.
    """
    target = spec.link.inverse(sample.z @ spec.lam + sample.x @ spec.beta)
    eta = spec.link.g(target)
    coef, *_ = np.linalg.lstsq(sample.z, eta, rcond=None)
    for _ in range(max_iter):
        eta = sample.z @ coef
        mu = spec.link.inverse(eta)
        dmu = spec.link.dmu_deta(eta)
        v = spec.variance.v(mu)
        wt = dmu * dmu / v
        work = eta + (target - mu) / dmu
        sw = np.sqrt(wt)
        new, *_ = np.linalg.lstsq(sample.z * sw[:, None], work * sw, rcond=None)
        if np.max(np.abs(new - coef)) < tol:
            return new
        coef = new
    raise NonConvergenceError("population restricted fit did not converge")


def score_f2(spec: ModelSpec, source, mc_size: int = DEFAULT_MC_SIZE, rng: RngStream | None = None) -> float:
    """Score-test effect: the population quadratic form of the mean quasi-score.

    Stage one solves the population restricted model; stage two evaluates
    f2_s = E[U]' I^{-1} E[U] with U and the marginal information I taken at
    (lambda_0, 0) and the model's dispersion.
    """
    sample = _resolve_sample(source, mc_size, rng)
    lam0 = _restricted_population_fit(spec, sample)
    mu_true = spec.link.inverse(sample.z @ spec.lam + sample.x @ spec.beta)
    eta0 = sample.z @ lam0
    mu0 = spec.link.inverse(eta0)
    dmu0 = spec.link.dmu_deta(eta0)
    v0 = spec.variance.v(mu0)
    design = np.hstack([sample.z, sample.x])
    resid = (mu_true - mu0) * dmu0 / (spec.sigma2 * v0)
    u = design.T @ resid / sample.size
    w0 = dmu0 * dmu0 / (spec.sigma2 * v0)
    info = (design * w0[:, None]).T @ design / sample.size
    try:
        return float(u @ np.linalg.solve(info, u))
    except np.linalg.LinAlgError as exc:
        raise SingularMomentError("marginal information at the restricted model is singular") from exc


def effect_size_report(
    spec: ModelSpec,
    source,
    mc_size: int = DEFAULT_MC_SIZE,
    rng: RngStream | None = None,
    include_score: bool = False,
) -> EffectSizeReport:
    """All effect sizes over one shared covariate sample.

    Sharing the sample keeps the deterministic identities (identity link:
    f2_r = f2 termwise; constant weights: f2_phi = f2) exact rather than
    merely statistical.
    """
    sample = _resolve_sample(source, mc_size, rng)
    w, mu, v, _, eta_xz, lam0 = _eta_decomposition(spec, sample)
    contrib = w * eta_xz**2
    f2 = float(np.mean(contrib))
    se = float(np.std(contrib) / np.sqrt(sample.size))
    phi = float(2.0 * np.sqrt(np.var(eta_xz)))
    mean_y = float(np.mean(sample.y)) if sample.y is not None else float(np.mean(mu))
    w_one, _, _ = _weights(spec, spec.link.g(mean_y))
    f2_phi = float(w_one) * phi**2 / 4.0
    mu_z = spec.link.inverse(sample.z @ lam0)
    f2_r = float(np.mean((mu - mu_z) ** 2 / (spec.sigma2 * v)))
    r2 = f2_r / (1.0 + f2_r)
    f2_s = score_f2(spec, sample) if include_score else None
    return EffectSizeReport(
        f2=f2,
        phi=phi,
        r2=r2,
        f2_phi=f2_phi,
        f2_r=f2_r,
        f2_s=f2_s,
        w_one=float(w_one),
        mc_size=sample.size,
        mc_se_f2=se,
    )
