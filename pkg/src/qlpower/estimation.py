"""Quasi-likelihood fitting by iteratively reweighted least squares.

Coefficients are updated by weighted least squares on the working variable
z_i = eta_i + (y_i - mu_i) * deta/dmu, with the dispersion factored out of the
weights (it cancels in the normal equations); the dispersion itself is updated
each sweep by the Pearson estimate.  The weighted solve uses an orthogonal
decomposition of the scaled design rather than explicit normal equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InadmissibleMeanError, SingularBlockError, SingularDesignError
from .model import Dataset, Link, ModelSpec, VarianceFunction

__all__ = ["FitOptions", "FitResult", "irls_fit", "restricted_fit", "information", "schur_complement"]


@dataclass(frozen=True)
class FitOptions:
    """Iteration controls for the IRLS loop.

    Convergence requires both the sup-norm coefficient step and the dispersion
    step to fall below ``tol``.  ``init`` names the starting rule; the only
    implemented rule transforms the (adjusted) outcome through the link.
    """

    max_iter: int = 100
    tol: float = 1e-8
    init: str = "outcome_adjusted"

    def __post_init__(self):
        if self.tol <= 0:
            raise DomainError("tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if self.init != "outcome_adjusted":
            raise DomainError(f"unknown initialization rule {self.init!r}")


@dataclass(frozen=True)
class FitResult:
    """Converged (or best-effort) coefficients with their information matrices.

    ``info`` is the observed analogue of the expected information at the
    estimates, including the estimated dispersion; ``info_beta_given_lambda``
    is its Schur complement with respect to the adjustor block.
    ``score_residual`` is the sup-norm of the summed quasi-score at the
    estimates, useful as a convergence diagnostic.
    """

    lambda_hat: np.ndarray
    beta_hat: np.ndarray
    sigma2_hat: float
    info: np.ndarray
    info_beta_given_lambda: np.ndarray
    converged: bool
    iterations: int
    link: Link
    variance: VarianceFunction
    n_obs: int
    score_residual: float

    @property
    def r(self) -> int:
        return self.lambda_hat.size

    @property
    def p(self) -> int:
        return self.beta_hat.size

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.lambda_hat, self.beta_hat])

    def spec(self) -> ModelSpec:
        """The fitted model as a ModelSpec (requires p >= 1)."""
        return ModelSpec(self.link, self.variance, self.sigma2_hat, self.lambda_hat, self.beta_hat)


def _initial_eta(y: np.ndarray, link: Link) -> np.ndarray:
    # counts get +0.5 so the log link is defined at zero
    adjusted = y + 0.5 if np.all(y == np.floor(y)) else y
    return link.g(adjusted)


def _check_mu(mu: np.ndarray, variance: VarianceFunction) -> None:
    if not variance.admissible(mu):
        raise InadmissibleMeanError(
            f"fitted mean left the admissible range of v={variance.value!r}"
        )


def _irls(y, design, link, variance, opts, n_params_for_dispersion):
    """Shared IRLS loop; returns (coef, sigma2, iterations, converged)."""
    n, k = design.shape
    if n <= k:
        raise SingularDesignError(f"need more observations than parameters (n={n}, k={k})")
    eta = _initial_eta(y, link)
    coef, _, rank, _ = np.linalg.lstsq(design, eta, rcond=None)
    if rank < k:
        raise SingularDesignError(f"design has rank {rank} < {k}")
    sigma2 = 1.0
    converged = False
    iterations = 0
    denom = n - n_params_for_dispersion
    for iterations in range(1, opts.max_iter + 1):
        eta = design @ coef
        mu = link.inverse(eta)
        _check_mu(mu, variance)
        dmu = link.dmu_deta(eta)
        v = variance.v(mu)
        wt = dmu * dmu / v  # dispersion factored out; it cancels below
        work = eta + (y - mu) / dmu
        sw = np.sqrt(wt)
        new_coef, _, rank, _ = np.linalg.lstsq(design * sw[:, None], work * sw, rcond=None)
        if rank < k:
            raise SingularDesignError("weighted design became rank deficient")
        new_sigma2 = float(np.sum((y - mu) ** 2 / v) / denom)
        step = float(np.max(np.abs(new_coef - coef)))
        dstep = abs(new_sigma2 - sigma2)
        coef, sigma2 = new_coef, new_sigma2
        if step < opts.tol and dstep < opts.tol:
            converged = True
            break
    return coef, sigma2, iterations, converged


def _weighted_gram(design, w):
    m = (design * w[:, None]).T @ design
    return 0.5 * (m + m.T)  # exact symmetry despite float non-associativity


def _final_matrices(y, design, coef, sigma2, link, variance, r):
    eta = design @ coef
    mu = link.inverse(eta)
    dmu = link.dmu_deta(eta)
    v = variance.v(mu)
    w = dmu * dmu / (sigma2 * v)
    info = _weighted_gram(design, w)
    score = design.T @ ((y - mu) * dmu / (sigma2 * v))
    return info, float(np.max(np.abs(score)))


def irls_fit(data: Dataset, link: Link, variance: VarianceFunction, opts: FitOptions | None = None) -> FitResult:
    """Fit the full model (adjustors and predictors) by IRLS.

    Non-convergence is not an exception: the best iterate is returned with
    ``converged=False`` so replicated experiments can count and exclude it.
    """
    opts = opts or FitOptions()
    design = data.design()
    r, p = data.r, data.p
    coef, sigma2, iterations, converged = _irls(
        data.y, design, link, variance, opts, n_params_for_dispersion=r + p
    )
    info, resid = _final_matrices(data.y, design, coef, sigma2, link, variance, r)
    return FitResult(
        lambda_hat=coef[:r],
        beta_hat=coef[r:],
        sigma2_hat=sigma2,
        info=info,
        info_beta_given_lambda=schur_complement(info, r) if p else np.zeros((0, 0)),
        converged=converged,
        iterations=iterations,
        link=link,
        variance=variance,
        n_obs=data.n,
        score_residual=resid,
    )


def restricted_fit(data: Dataset, link: Link, variance: VarianceFunction, opts: FitOptions | None = None) -> FitResult:
    """Fit the adjustor-only model (predictors pinned at zero).

    The reported information matrix is the full (r+p) matrix evaluated at the
    restricted estimates so score tests can consume it directly.
    """
    opts = opts or FitOptions()
    r, p = data.r, data.p
    coef, sigma2, iterations, converged = _irls(
        data.y, data.z, link, variance, opts, n_params_for_dispersion=r
    )
    design = data.design()
    full_coef = np.concatenate([coef, np.zeros(p)])
    info, resid_full = _final_matrices(data.y, design, full_coef, sigma2, link, variance, r)
    # convergence diagnostic concerns the solved block only
    eta = data.z @ coef
    mu = link.inverse(eta)
    dmu = link.dmu_deta(eta)
    v = variance.v(mu)
    score_lam = data.z.T @ ((data.y - mu) * dmu / (sigma2 * v))
    return FitResult(
        lambda_hat=coef,
        beta_hat=np.zeros(p),
        sigma2_hat=sigma2,
        info=info,
        info_beta_given_lambda=schur_complement(info, r) if p else np.zeros((0, 0)),
        converged=converged,
        iterations=iterations,
        link=link,
        variance=variance,
        n_obs=data.n,
        score_residual=float(np.max(np.abs(score_lam))),
    )


def information(data: Dataset, spec: ModelSpec) -> np.ndarray:
    """Expected information sum_i w_i [Z_i;X_i][Z_i;X_i]' at the spec's coefficients."""
    design = data.design()
    eta = data.z @ spec.lam + (data.x @ spec.beta if data.p else 0.0)
    mu = spec.link.inverse(eta)
    _check_mu(mu, spec.variance)
    dmu = spec.link.dmu_deta(eta)
    w = dmu * dmu / (spec.sigma2 * spec.variance.v(mu))
    return _weighted_gram(design, w)


def schur_complement(info: np.ndarray, r: int) -> np.ndarray:
    """I_XX - I_XZ I_ZZ^{-1} I_ZX for the leading r x r adjustor block.

    Equals the inverse of the lower-right block of info^{-1}.
    """
    info = np.asarray(info, dtype=float)
    if info.ndim != 2 or info.shape[0] != info.shape[1]:
        raise DomainError("info must be a square matrix")
    if not 0 < r <= info.shape[0]:
        raise DomainError(f"r must lie in [1, {info.shape[0]}], got {r}")
    izz = info[:r, :r]
    ixz = info[r:, :r]
    ixx = info[r:, r:]
    try:
        solved = np.linalg.solve(izz, ixz.T)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError("adjustor block of the information matrix is singular") from exc
    return ixx - ixz @ solved
