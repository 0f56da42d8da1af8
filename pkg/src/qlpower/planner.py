"""Pilot-study planning: fit a QL model to user data, report effect sizes,
and sweep the delta-scaled coefficient curve of required sample sizes.

The pilot's own covariate rows serve as the covariate law (all rows, no
resampling), so the delta curve is deterministic given the data.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .distributions import ncp_for_power
from .effectsize import CovariateSample, EffectSizeReport, effect_size_report
from .errors import DomainError, EmptyGridError
from .estimation import FitOptions, FitResult, irls_fit
from .model import Dataset, Link, ModelSpec, VarianceFunction
from .power import MAX_SAMPLE_SIZE

__all__ = ["ColumnSpec", "PilotMapping", "DeltaPoint", "PilotReport", "load_pilot_csv", "pilot_analyze"]

DEFAULT_DELTA_GRID = tuple(np.round(np.linspace(0.5, 1.5, 21), 10))


@dataclass(frozen=True)
class ColumnSpec:
    """One covariate column: continuous, or categorical with a declared
    reference level that is dropped in the dummy encoding."""

    column: str
    kind: str = "continuous"  # "continuous" | "categorical"
    reference: str | None = None
    levels: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("continuous", "categorical"):
            raise DomainError(f"unknown column kind {self.kind!r}")
        if self.kind == "categorical" and self.reference is None:
            raise DomainError(f"categorical column {self.column!r} needs a reference level")

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnSpec":
        return cls(
            column=d["column"],
            kind=d.get("kind", "continuous"),
            reference=d.get("reference"),
            levels=tuple(d["levels"]) if d.get("levels") else None,
        )


@dataclass(frozen=True)
class PilotMapping:
    """Sidecar declaration of how a pilot CSV maps onto the model."""

    outcome: str
    adjustors: tuple
    predictors: tuple
    link: Link
    variance: VarianceFunction
    outcome_kind: str | None = None  # "count" | "positive" | None (inferred)

    @classmethod
    def from_dict(cls, d: dict) -> "PilotMapping":
        try:
            return cls(
                outcome=d["outcome"],
                adjustors=tuple(ColumnSpec.from_dict(c) for c in d.get("adjustors", [])),
                predictors=tuple(ColumnSpec.from_dict(c) for c in d["predictors"]),
                link=Link(d["link"]),
                variance=VarianceFunction(d["variance"]),
                outcome_kind=d.get("outcome_kind"),
            )
        except KeyError as exc:
            raise DomainError(f"pilot mapping missing key: {exc}") from exc


def _encode_block(rows: list[dict], specs, what: str):
    """Dummy-encode a block of columns; returns (matrix, names)."""
    columns = []
    names = []
    for spec in specs:
        raw = [row[spec.column] for row in rows]
        if spec.kind == "continuous":
            try:
                columns.append(np.array([float(v) for v in raw]))
            except ValueError as exc:
                raise DomainError(
                    f"{what} column {spec.column!r} is not numeric: {exc}"
                ) from exc
            names.append(spec.column)
        else:
            levels = list(spec.levels) if spec.levels else sorted(set(raw))
            if spec.reference not in levels:
                raise DomainError(
                    f"reference level {spec.reference!r} not found in column {spec.column!r}"
                )
            unseen = set(raw) - set(levels)
            if unseen:
                raise DomainError(
                    f"column {spec.column!r} contains undeclared levels {sorted(unseen)}"
                )
            for level in levels:
                if level == spec.reference:
                    continue
                columns.append(np.array([1.0 if v == level else 0.0 for v in raw]))
                names.append(f"{spec.column}[{level}]")
    if not columns:
        return np.zeros((len(rows), 0)), names
    return np.column_stack(columns), names


_MISSING = {"", "na", "n/a", "nan", "null", "none"}


def load_pilot_csv(csv_text: str, mapping: PilotMapping):
    """Parse a pilot CSV against its mapping.

    Rows with missing values in any mapped column are dropped (and counted);
    categorical columns are dummy-encoded with the declared reference level.
    Returns (Dataset, info dict with column names and drop count).
    """
    reader = csv.DictReader(io.StringIO(csv_text))
    if reader.fieldnames is None:
        raise DomainError("pilot CSV is empty")
    needed = [mapping.outcome]
    for spec in (*mapping.adjustors, *mapping.predictors):
        needed.append(spec.column)
    missing_cols = [c for c in needed if c not in reader.fieldnames]
    if missing_cols:
        raise DomainError(f"pilot CSV lacks mapped columns: {missing_cols}")

    rows = []
    dropped = 0
    for row in reader:
        vals = [row.get(c) for c in needed]
        if any(v is None or str(v).strip().lower() in _MISSING for v in vals):
            dropped += 1
            continue
        rows.append(row)
    if not rows:
        raise DomainError("no complete rows remain after dropping missing values")

    try:
        y = np.array([float(row[mapping.outcome]) for row in rows])
    except ValueError as exc:
        raise DomainError(f"outcome column {mapping.outcome!r} is not numeric: {exc}") from exc
    z_block, z_names = _encode_block(rows, mapping.adjustors, "adjustor")
    x_block, x_names = _encode_block(rows, mapping.predictors, "predictor")
    if x_block.shape[1] == 0:
        raise DomainError("mapping declares no predictor columns")
    n = len(rows)
    z = np.column_stack([np.ones(n), z_block]) if z_block.shape[1] else np.ones((n, 1))
    data = Dataset(y=y, z=z, x=x_block)

    kind = mapping.outcome_kind
    if kind is None:
        kind = "count" if np.all(y == np.floor(y)) and np.all(y >= 0) else "positive"
    data.validate_outcome(kind)
    info = {
        "n_rows": n,
        "n_dropped": dropped,
        "adjustor_names": ["(intercept)"] + z_names,
        "predictor_names": x_names,
        "outcome_kind": kind,
    }
    return data, info


@dataclass(frozen=True)
class DeltaPoint:
    """Effect sizes and sample sizes with the fitted predictor coefficients
    scaled by ``delta``."""

    delta: float
    f2: float
    f2_phi: float
    f2_r: float
    phi: float
    r2: float
    n: int
    n_phi: int
    n_r: int

    @property
    def ratio_phi(self) -> float:
        return self.n_phi / self.n

    @property
    def ratio_r(self) -> float:
        return self.n_r / self.n


@dataclass(frozen=True)
class PilotReport:
    fit: FitResult
    effects: EffectSizeReport
    delta_curve: tuple
    alpha: float
    target_power: float
    ncp: float

    def curve_csv(self) -> str:
        buf = io.StringIO()
        buf.write("delta,f2,f2_phi,f2_r,phi,r2,n,n_phi,n_r,ratio_phi,ratio_r\n")
        for pt in self.delta_curve:
            buf.write(
                f"{pt.delta!r},{pt.f2!r},{pt.f2_phi!r},{pt.f2_r!r},{pt.phi!r},{pt.r2!r},"
                f"{pt.n},{pt.n_phi},{pt.n_r},{pt.ratio_phi!r},{pt.ratio_r!r}\n"
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "fit": {
                "lambda_hat": [float(v) for v in self.fit.lambda_hat],
                "beta_hat": [float(v) for v in self.fit.beta_hat],
                "sigma2_hat": self.fit.sigma2_hat,
                "converged": self.fit.converged,
                "iterations": self.fit.iterations,
                "n_obs": self.fit.n_obs,
            },
            "effects": self.effects.to_dict(),
            "alpha": self.alpha,
            "target_power": self.target_power,
            "ncp": self.ncp,
            "delta_curve": [
                {
                    "delta": pt.delta,
                    "f2": pt.f2,
                    "f2_phi": pt.f2_phi,
                    "f2_r": pt.f2_r,
                    "phi": pt.phi,
                    "r2": pt.r2,
                    "n": pt.n,
                    "n_phi": pt.n_phi,
                    "n_r": pt.n_r,
                    "ratio_phi": pt.ratio_phi,
                    "ratio_r": pt.ratio_r,
                }
                for pt in self.delta_curve
            ],
        }


def pilot_analyze(
    data: Dataset,
    link: Link,
    variance: VarianceFunction,
    alpha: float = 0.05,
    target_power: float = 0.8,
    delta_grid=DEFAULT_DELTA_GRID,
    opts: FitOptions | None = None,
) -> PilotReport:
    """Fit the pilot model and sweep the delta-scaled sample size curve.

    Each delta treats (lambda_hat, delta * beta_hat) as the truth and the
    empirical covariate rows as the covariate law.  The delta = 1 effect
    report anchors w1 at the observed outcome mean; along the curve the
    hypothetical model's own implied mean is used instead, since the observed
    outcomes correspond only to delta = 1.
    """
    delta_grid = tuple(float(d) for d in delta_grid)
    if not delta_grid:
        raise EmptyGridError("delta grid must be non-empty")
    if any(b <= a for a, b in zip(delta_grid, delta_grid[1:])):
        raise DomainError("delta grid must be strictly increasing")

    fit = irls_fit(data, link, variance, opts)
    sample_with_y = CovariateSample.from_dataset(data)
    sample_cov = CovariateSample(z=data.z, x=data.x)
    effects = effect_size_report(fit.spec(), sample_with_y)
    ncp = ncp_for_power(data.p, alpha, target_power)

    curve = []
    for delta in delta_grid:
        spec = ModelSpec(link, variance, fit.sigma2_hat, fit.lambda_hat, delta * fit.beta_hat)
        rep = effect_size_report(spec, sample_cov)
        sizes = {}
        for name, f2 in (("n", rep.f2), ("n_phi", rep.f2_phi), ("n_r", rep.f2_r)):
            if f2 <= 0:
                n = MAX_SAMPLE_SIZE
            else:
                n = int(np.ceil(ncp / f2))
                n = min(n, MAX_SAMPLE_SIZE)
            sizes[name] = n
        curve.append(
            DeltaPoint(
                delta=delta,
                f2=rep.f2,
                f2_phi=rep.f2_phi,
                f2_r=rep.f2_r,
                phi=rep.phi,
                r2=rep.r2,
                n=sizes["n"],
                n_phi=sizes["n_phi"],
                n_r=sizes["n_r"],
            )
        )
    return PilotReport(
        fit=fit,
        effects=effects,
        delta_curve=tuple(curve),
        alpha=alpha,
        target_power=target_power,
        ncp=ncp,
    )
