"""Declarative scenario runner for the calibration experiments.

A scenario sweeps either the copula correlation or one predictor coefficient,
computes every effect size and its implied sample size at each grid point, and
then measures empirical type I error and power by replicated testing.  Streams
are keyed by (grid point, variant, hypothesis, replicate), and per-cell tallies
are integers, so results are bit-identical regardless of worker count.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .datagen import CovariateDesign, OutcomeCase, OutcomeKind, gen_dataset
from .distributions import RngStream, ncp_for_power
from .effectsize import CovariateSample, effect_size_report
from .errors import DomainError, EmptyGridError, QLPowerError
from .estimation import irls_fit, restricted_fit
from .inference import score_test, wald_test
from .model import Link, ModelSpec
from .power import MAX_SAMPLE_SIZE

__all__ = [
    "SimScenario",
    "CellResult",
    "GridPointResult",
    "SimResult",
    "run_scenario",
    "scenario_presets",
    "preset_by_name",
    "smoke_variant",
]

_REP_BITS = 32
_MAX_VARIANTS = 4
_ES_STREAM_BASE = 1 << 62
_FAILURE_ABORT_FRACTION = 0.01


@dataclass(frozen=True)
class SimScenario:
    """One sweep: model, outcome law, test, grid, and replication controls."""

    name: str
    label: str
    outcome: OutcomeCase
    link: Link
    lam: tuple
    beta: tuple
    grid: tuple
    sweep: str = "rho"  # "rho" or "beta2" (beta2 varies the last predictor coefficient)
    rho: float = 0.3  # fixed correlation for beta2 sweeps
    test: str = "wald"  # "wald" or "score"
    replicates: int = 10_000
    alpha: float = 0.05
    target_power: float = 0.8
    mc_size: int = 10**6
    seed: int = 0
    family: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if not self.grid:
            raise EmptyGridError("scenario grid must be non-empty")
        if self.sweep not in ("rho", "beta2"):
            raise DomainError(f"unknown sweep kind {self.sweep!r}")
        if self.test not in ("wald", "score"):
            raise DomainError(f"unknown test {self.test!r}")
        if self.replicates < 1:
            raise DomainError("replicates must be at least 1")

    def spec_at(self, grid_value: float) -> tuple[ModelSpec, CovariateDesign]:
        """Model spec and covariate design at one grid point."""
        lam = np.asarray(self.lam)
        beta = np.asarray(self.beta)
        if self.sweep == "rho":
            rho = grid_value
        else:
            rho = self.rho
            beta = beta.copy()
            beta[-1] = grid_value
        spec = ModelSpec(self.link, self.outcome.variance, self.outcome.sigma2, lam, beta)
        return spec, CovariateDesign(rho=rho)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "label": self.label,
            "outcome": self.outcome.to_dict(),
            "link": self.link.value,
            "lambda": list(self.lam),
            "beta": list(self.beta),
            "grid": list(self.grid),
            "sweep": self.sweep,
            "rho": self.rho,
            "test": self.test,
            "replicates": self.replicates,
            "alpha": self.alpha,
            "target_power": self.target_power,
            "mc_size": self.mc_size,
            "seed": self.seed,
            "family": self.family,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimScenario":
        try:
            return cls(
                name=d["name"],
                label=d.get("label", d["name"]),
                outcome=OutcomeCase.from_dict(d["outcome"]),
                link=Link(d["link"]),
                lam=tuple(d["lambda"]),
                beta=tuple(d["beta"]),
                grid=tuple(d["grid"]),
                sweep=d.get("sweep", "rho"),
                rho=float(d.get("rho", 0.3)),
                test=d.get("test", "wald"),
                replicates=int(d.get("replicates", 10_000)),
                alpha=float(d.get("alpha", 0.05)),
                target_power=float(d.get("target_power", 0.8)),
                mc_size=int(d.get("mc_size", 10**6)),
                seed=int(d.get("seed", 0)),
                family=d.get("family", ""),
            )
        except KeyError as exc:
            raise DomainError(f"scenario document missing key: {exc}") from exc


@dataclass(frozen=True)
class CellResult:
    """Rejection tally for one (grid point, sample-size variant, hypothesis)."""

    variant: str
    hypothesis: str
    n: int
    rejections: int
    replicates: int
    nonconverged: int
    failed: int

    @property
    def rate(self) -> float:
        return self.rejections / self.replicates

    @property
    def ci(self) -> tuple[float, float]:
        q = self.rate
        half = 1.96 * np.sqrt(q * (1.0 - q) / self.replicates)
        return q - half, q + half


@dataclass(frozen=True)
class GridPointResult:
    grid_value: float
    f2: float
    phi: float
    r2: float
    f2_phi: float
    f2_r: float
    f2_s: float | None
    sizes: dict
    cells: tuple


@dataclass(frozen=True)
class SimResult:
    scenario: SimScenario
    points: tuple
    max_score_residual_per_n: float  # max over converged fits of ||sum U||_inf / n

    CSV_HEADER = (
        "scenario,label,grid_value,n_variant,hypothesis,n,"
        "rejections,replicates,rate,ci_lo,ci_hi,nonconverged,failed"
    )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.CSV_HEADER + "\n")
        for pt in self.points:
            for cell in pt.cells:
                lo, hi = cell.ci
                buf.write(
                    f"{self.scenario.name},{self.scenario.label},{pt.grid_value!r},"
                    f"{cell.variant},{cell.hypothesis},{cell.n},"
                    f"{cell.rejections},{cell.replicates},{cell.rate!r},{lo!r},{hi!r},"
                    f"{cell.nonconverged},{cell.failed}\n"
                )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "max_score_residual_per_n": self.max_score_residual_per_n,
            "points": [
                {
                    "grid_value": pt.grid_value,
                    "f2": pt.f2,
                    "phi": pt.phi,
                    "r2": pt.r2,
                    "f2_phi": pt.f2_phi,
                    "f2_r": pt.f2_r,
                    "f2_s": pt.f2_s,
                    "sizes": pt.sizes,
                    "cells": [
                        {
                            "variant": c.variant,
                            "hypothesis": c.hypothesis,
                            "n": c.n,
                            "rejections": c.rejections,
                            "replicates": c.replicates,
                            "rate": c.rate,
                            "ci_lo": c.ci[0],
                            "ci_hi": c.ci[1],
                            "nonconverged": c.nonconverged,
                            "failed": c.failed,
                        }
                        for c in pt.cells
                    ],
                }
                for pt in self.points
            ],
        }


def _cell_stream_base(grid_idx: int, variant_idx: int, hyp_idx: int) -> int:
    return ((grid_idx * _MAX_VARIANTS + variant_idx) * 2 + hyp_idx) << _REP_BITS


def _run_replicate(scenario, spec, design, n, stream):
    """One generate-fit-test replicate; returns (reject, converged, resid_per_n)."""
    data = gen_dataset(spec, design, scenario.outcome, n, stream)
    if scenario.test == "wald":
        fit = irls_fit(data, scenario.link, scenario.outcome.variance)
        if not fit.converged:
            return False, False, None
        report = wald_test(fit, scenario.alpha)
    else:
        fit = restricted_fit(data, scenario.link, scenario.outcome.variance)
        if not fit.converged:
            return False, False, None
        report = score_test(data, fit, scenario.alpha)
    return report.reject, True, fit.score_residual / n


def _run_chunk(scenario, spec, design, n, base, rep_range):
    rej = nonconv = failed = 0
    max_resid = 0.0
    for rep in rep_range:
        stream = RngStream(scenario.seed, base + rep)
        try:
            reject, converged, resid = _run_replicate(scenario, spec, design, n, stream)
        except QLPowerError:
            failed += 1
            continue
        if not converged:
            nonconv += 1
            continue
        rej += int(reject)
        if resid > max_resid:
            max_resid = resid
    return rej, nonconv, failed, max_resid


def _run_cell(scenario, spec, design, n, grid_idx, variant_idx, hyp_idx, threads):
    base = _cell_stream_base(grid_idx, variant_idx, hyp_idx)
    reps = scenario.replicates
    if threads <= 1:
        parts = [_run_chunk(scenario, spec, design, n, base, range(reps))]
    else:
        chunk = max(16, reps // (threads * 8))
        ranges = [range(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda r: _run_chunk(scenario, spec, design, n, base, r), ranges)
            )
    rej = sum(p[0] for p in parts)
    nonconv = sum(p[1] for p in parts)
    failed = sum(p[2] for p in parts)
    max_resid = max(p[3] for p in parts)
    if failed > _FAILURE_ABORT_FRACTION * reps:
        raise QLPowerError(
            f"{failed} of {reps} replicates failed in cell "
            f"(grid={grid_idx}, variant={variant_idx}, hyp={hyp_idx})"
        )
    return rej, nonconv, failed, max_resid


def run_scenario(scenario: SimScenario, threads: int = 1, progress=None) -> SimResult:
    """Execute a scenario; ``progress(done, total)`` is called per grid point."""
    points = []
    max_resid = 0.0
    total = len(scenario.grid)
    for grid_idx, grid_value in enumerate(scenario.grid):
        spec, design = scenario.spec_at(grid_value)
        es_rng = RngStream(scenario.seed, _ES_STREAM_BASE + grid_idx)
        sample = CovariateSample.from_design(design, scenario.mc_size, es_rng)
        report = effect_size_report(spec, sample, include_score=(scenario.test == "score"))
        delta = ncp_for_power(spec.p, scenario.alpha, scenario.target_power)
        if scenario.test == "wald":
            variants = [("n", report.f2), ("n_phi", report.f2_phi), ("n_r", report.f2_r)]
        else:
            variants = [("n_s", report.f2_s), ("n_phi", report.f2_phi), ("n_r", report.f2_r)]
        sizes = {}
        for name, f2 in variants:
            if f2 is None or f2 <= 0:
                raise DomainError(f"effect {name} non-positive at grid value {grid_value}")
            n = int(np.ceil(delta / f2))
            if n > MAX_SAMPLE_SIZE:
                raise DomainError(f"required n for {name} exceeds cap at grid {grid_value}")
            sizes[name] = n
        cells = []
        beta_null = np.zeros(len(scenario.beta))
        spec_null = ModelSpec(spec.link, spec.variance, spec.sigma2, np.asarray(scenario.lam), beta_null)
        for variant_idx, (variant, _) in enumerate(variants):
            n = sizes[variant]
            for hyp_idx, (hyp, cell_spec) in enumerate((("null", spec_null), ("alt", spec))):
                rej, nonconv, failed, resid = _run_cell(
                    scenario, cell_spec, design, n, grid_idx, variant_idx, hyp_idx, threads
                )
                max_resid = max(max_resid, resid)
                cells.append(
                    CellResult(
                        variant=variant,
                        hypothesis=hyp,
                        n=n,
                        rejections=rej,
                        replicates=scenario.replicates,
                        nonconverged=nonconv,
                        failed=failed,
                    )
                )
        points.append(
            GridPointResult(
                grid_value=grid_value,
                f2=report.f2,
                phi=report.phi,
                r2=report.r2,
                f2_phi=report.f2_phi,
                f2_r=report.f2_r,
                f2_s=report.f2_s,
                sizes=sizes,
                cells=tuple(cells),
            )
        )
        if progress is not None:
            progress(grid_idx + 1, total)
    return SimResult(scenario=scenario, points=tuple(points), max_score_residual_per_n=max_resid)


_RHO_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)


def scenario_presets() -> list[SimScenario]:
    """The full calibration grid: Wald and score correlation sweeps plus
    the coefficient sweeps at rho = 0.3."""
    count_cases = [
        ("var_eq_mean", OutcomeCase(OutcomeKind.POISSON_VAR_EQ_MEAN)),
        ("var_prop_mean", OutcomeCase(OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN)),
        ("var_prop_mean_sq", OutcomeCase(OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ, sigma2=2.0)),
    ]
    gamma_cases = [
        ("var_prop_mean", OutcomeCase(OutcomeKind.GAMMA_VAR_PROP_MEAN, sigma2=0.5)),
        ("var_prop_mean_sq", OutcomeCase(OutcomeKind.GAMMA_VAR_PROP_MEAN_SQ, sigma2=0.16)),
    ]
    log_lam, log_beta = (1.0, 0.15), (0.1, 0.25)
    id_lam, id_beta = (4.0, 0.4), (0.4, 0.81)
    gamma_beta = (0.1, 0.15)
    score_beta = (0.1, 0.21)

    presets: list[SimScenario] = []

    def add(name, label, family, case, link, lam, beta, **kw):
        presets.append(
            SimScenario(
                name=name, label=label, family=family, outcome=case,
                link=link, lam=lam, beta=beta, **kw,
            )
        )

    for tag, case in count_cases:
        add(
            f"wald_count_log_{tag}", f"Wald, count, log link, {tag}", "wald_count_log",
            case, Link.LOG, log_lam, log_beta, grid=_RHO_GRID,
        )
    for tag, case in count_cases:
        add(
            f"wald_count_identity_{tag}", f"Wald, count, identity link, {tag}", "wald_count_identity",
            case, Link.IDENTITY, id_lam, id_beta, grid=_RHO_GRID,
        )
    for tag, case in gamma_cases:
        add(
            f"wald_gamma_log_{tag}", f"Wald, gamma, log link, {tag}", "wald_gamma_log",
            case, Link.LOG, log_lam, gamma_beta, grid=_RHO_GRID,
        )
    for tag, case in count_cases:
        add(
            f"score_count_log_{tag}", f"Score, count, log link, {tag}", "score_count_log",
            case, Link.LOG, log_lam, score_beta, grid=_RHO_GRID, test="score",
        )
    beta2_log = (0.15, 0.17, 0.19, 0.21, 0.23, 0.25)
    beta2_id = (0.6, 0.72, 0.84, 0.96, 1.08, 1.2)
    beta2_gamma = (0.05, 0.08, 0.11, 0.14, 0.17, 0.2)
    for tag, case in count_cases:
        add(
            f"beta2_count_log_{tag}", f"Wald, count, log link, {tag}, beta2 sweep", "beta2_count_log",
            case, Link.LOG, log_lam, log_beta, grid=beta2_log, sweep="beta2", rho=0.3,
        )
    for tag, case in count_cases:
        add(
            f"beta2_count_identity_{tag}", f"Wald, count, identity link, {tag}, beta2 sweep", "beta2_count_identity",
            case, Link.IDENTITY, id_lam, id_beta, grid=beta2_id, sweep="beta2", rho=0.3,
        )
    for tag, case in gamma_cases:
        add(
            f"beta2_gamma_log_{tag}", f"Wald, gamma, log link, {tag}, beta2 sweep", "beta2_gamma_log",
            case, Link.LOG, log_lam, gamma_beta, grid=beta2_gamma, sweep="beta2", rho=0.3,
        )
    return presets


def preset_by_name(name: str) -> SimScenario:
    for scenario in scenario_presets():
        if scenario.name == name:
            return scenario
    raise DomainError(f"unknown preset {name!r}")


def smoke_variant(scenario: SimScenario, replicates: int = 2000, grid=None) -> SimScenario:
    """Reduced copy of a scenario for CI-scale runs."""
    return replace(
        scenario,
        replicates=replicates,
        grid=tuple(grid) if grid is not None else scenario.grid,
    )
