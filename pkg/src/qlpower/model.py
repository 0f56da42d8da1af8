"""Declarative quasi-likelihood model description.

A model is a link function, a variance function, a dispersion, and the two
coefficient blocks: adjustors (intercept first) and predictors.  Everything
here is an immutable value object; the fitting machinery lives elsewhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, InadmissibleMeanError

__all__ = ["Link", "VarianceFunction", "ModelSpec", "Dataset", "weight", "linear_predictor"]


class Link(str, enum.Enum):
    """Closed enumeration of link functions.

    Extending requires g, its inverse, and dmu/deta; only the two links the
    supported designs use are implemented.
    """

    LOG = "log"
    IDENTITY = "identity"

    def g(self, mu):
        if self is Link.LOG:
            return np.log(mu)
        return np.asarray(mu, dtype=float) if np.ndim(mu) else float(mu)

    def inverse(self, eta):
        if self is Link.LOG:
            return np.exp(eta)
        return np.asarray(eta, dtype=float) if np.ndim(eta) else float(eta)

    def dmu_deta(self, eta):
        if self is Link.LOG:
            return np.exp(eta)
        return np.ones_like(np.asarray(eta, dtype=float)) if np.ndim(eta) else 1.0


class VarianceFunction(str, enum.Enum):
    """Known variance function v(mu) with Var(Y | X, Z) = sigma2 * v(mu)."""

    UNIT = "unit"
    MEAN = "mean"
    MEAN_SQUARED = "mean_squared"

    def v(self, mu):
        if self is VarianceFunction.UNIT:
            return np.ones_like(np.asarray(mu, dtype=float)) if np.ndim(mu) else 1.0
        if self is VarianceFunction.MEAN:
            return np.asarray(mu, dtype=float) if np.ndim(mu) else float(mu)
        m = np.asarray(mu, dtype=float) if np.ndim(mu) else float(mu)
        return m * m

    def admissible(self, mu) -> bool:
        """Whether every mean lies where v(mu) is positive and meaningful."""
        if self is VarianceFunction.UNIT:
            return bool(np.all(np.isfinite(mu)))
        return bool(np.all(np.isfinite(mu)) and np.all(np.asarray(mu) > 0.0))


@dataclass(frozen=True)
class ModelSpec:
    """Link, variance, dispersion and coefficients of one QL model.

    ``lam`` holds the adjustor coefficients (intercept first, length r >= 1);
    ``beta`` holds the predictor coefficients (length p >= 1).
    """

    link: Link
    variance: VarianceFunction
    sigma2: float
    lam: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.atleast_1d(np.asarray(self.lam, dtype=float)))
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        if self.sigma2 <= 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2!r}")
        if self.lam.size < 1:
            raise DimensionError("lam must contain at least the intercept")
        if self.beta.size < 1:
            raise DimensionError("beta must contain at least one predictor coefficient")

    @property
    def r(self) -> int:
        return self.lam.size

    @property
    def p(self) -> int:
        return self.beta.size

    def to_dict(self) -> dict:
        return {
            "link": self.link.value,
            "variance": self.variance.value,
            "sigma2": float(self.sigma2),
            "lambda": [float(v) for v in self.lam],
            "beta": [float(v) for v in self.beta],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        try:
            return cls(
                link=Link(d["link"]),
                variance=VarianceFunction(d["variance"]),
                sigma2=float(d["sigma2"]),
                lam=np.asarray(d["lambda"], dtype=float),
                beta=np.asarray(d["beta"], dtype=float),
            )
        except KeyError as exc:
            raise DomainError(f"model document missing key: {exc}") from exc


@dataclass(frozen=True)
class Dataset:
    """Outcome vector with the adjustor (Z) and predictor (X) design blocks."""

    y: np.ndarray
    z: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "z", np.atleast_2d(np.asarray(self.z, dtype=float)))
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(len(x), -1) if x.size else x.reshape(0, 0)
        object.__setattr__(self, "x", x)
        n = self.y.shape[0]
        if self.z.shape[0] != n or self.x.shape[0] != n:
            raise DimensionError(
                f"row counts disagree: y={n}, z={self.z.shape[0]}, x={self.x.shape[0]}"
            )
        if n <= self.r + self.p:
            raise DimensionError(f"need n > r + p, got n={n}, r={self.r}, p={self.p}")
        if not np.allclose(self.z[:, 0], 1.0):
            raise DimensionError("first column of z must be the intercept (all ones)")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def r(self) -> int:
        return self.z.shape[1]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def design(self) -> np.ndarray:
        """Concatenated [Z X] design matrix."""
        return np.hstack([self.z, self.x]) if self.p else self.z

    def validate_outcome(self, kind: str) -> None:
        """Check the outcome matches its declared nature at ingestion time.

        ``kind`` is "count" (non-negative integers) or "positive" (strictly
        positive reals).
        """
        if kind == "count":
            if np.any(self.y < 0) or np.any(self.y != np.floor(self.y)):
                raise DomainError("count outcome must contain non-negative integers")
        elif kind == "positive":
            if np.any(self.y <= 0):
                raise DomainError("positive-continuous outcome must be strictly positive")
        else:
            raise DomainError(f"unknown outcome kind {kind!r}")


def weight(spec: ModelSpec, eta):
    """Quasi-likelihood working weight (dmu/deta)^2 / (sigma2 * v(mu)) at ``eta``.

    Accepts a scalar or an array of linear predictors.
    """
    mu = spec.link.inverse(eta)
    if not spec.variance.admissible(mu):
        raise InadmissibleMeanError(
            f"mean out of range for variance function {spec.variance.value!r}"
        )
    dmu = spec.link.dmu_deta(eta)
    v = spec.variance.v(mu)
    w = dmu * dmu / (spec.sigma2 * v)
    return w if np.ndim(eta) else float(w)


def linear_predictor(spec: ModelSpec, z_row, x_row) -> float:
    """eta = lam' z + beta' x for a single observation."""
    z_row = np.asarray(z_row, dtype=float)
    x_row = np.asarray(x_row, dtype=float)
    if z_row.shape != (spec.r,) or x_row.shape != (spec.p,):
        raise DimensionError(
            f"expected z of length {spec.r} and x of length {spec.p}, "
            f"got {z_row.shape} and {x_row.shape}"
        )
    return float(spec.lam @ z_row + spec.beta @ x_row)
