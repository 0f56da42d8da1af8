"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion lines.

Replicated-calibration criteria run at a reduced CI scale by default (one
count case, 2000 replicates, rho in {0, 0.3}); set QLPOWER_ACCEPTANCE_FULL=1
to run the complete calibration grids at 10,000 replicates (hours).  The stated
rate tolerances correspond to 10,000 replicates; reduced runs scale the
half-widths by sqrt(10000 / replicates) to keep the coverage probability.
"""

import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from qlpower import (
    CovariateDesign,
    Dataset,
    Link,
    ModelSpec,
    OutcomeCase,
    OutcomeKind,
    RngStream,
    VarianceFunction,
    irls_fit,
    ncp_for_power,
    run_scenario,
)
from qlpower.effectsize import CovariateSample, effect_size_report
from qlpower.simharness import preset_by_name

from conftest import case_study_pilot, mixture_spec

FULL = os.environ.get("QLPOWER_ACCEPTANCE_FULL", "") == "1"
SMOKE_REPLICATES = 2000
SMOKE_GRID = (0.0, 0.3)
SEED = 20250810


def report(criterion, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE #{criterion} [{description}] {status} {detail}")
    assert ok, f"criterion {criterion} failed: {detail}"


def band(target, half_width_at_10k, replicates):
    half = half_width_at_10k * math.sqrt(10_000 / replicates)
    return target - half, target + half


def _cells(result, variant, hypothesis):
    for pt in result.points:
        for cell in pt.cells:
            if cell.variant == variant and cell.hypothesis == hypothesis:
                yield pt, cell


def test_criterion_1_noncentrality_solver():
    t0 = time.perf_counter()
    d2 = ncp_for_power(2, 0.05, 0.8)
    d4 = ncp_for_power(4, 0.05, 0.8)
    times = []
    for _ in range(10):
        t = time.perf_counter()
        ncp_for_power(2, 0.05, 0.8)
        times.append(time.perf_counter() - t)
    ok = abs(d2 - 9.63) <= 0.01 and abs(d4 - 11.94) <= 0.01 and min(times) < 1e-3
    report(
        1, "non-centrality solver", ok,
        f"delta2={d2:.5f} delta4={d4:.5f} best={min(times) * 1e3:.3f}ms",
    )


def test_criterion_2_target_design_sample_size():
    t0 = time.perf_counter()
    spec, design, _ = mixture_spec(rho=0.0)
    sample = CovariateSample.from_design(design, 10**6, RngStream(SEED, 1))
    rep = effect_size_report(spec, sample)
    delta = ncp_for_power(2, 0.05, 0.8)
    n = int(np.ceil(delta / rep.f2))
    elapsed = time.perf_counter() - t0
    ok = abs(n - 400) <= 0.05 * 400 and elapsed < 5.0
    report(2, "log-link count target design", ok, f"n={n} f2={rep.f2:.5f} ({elapsed:.1f}s)")


@pytest.fixture(scope="module")
def wald_runs():
    if FULL:
        names = [
            "wald_count_log_var_eq_mean",
            "wald_count_log_var_prop_mean",
            "wald_count_log_var_prop_mean_sq",
            "wald_count_identity_var_eq_mean",
            "wald_count_identity_var_prop_mean",
            "wald_count_identity_var_prop_mean_sq",
            "wald_gamma_log_var_prop_mean",
            "wald_gamma_log_var_prop_mean_sq",
        ]
        scenarios = [replace(preset_by_name(n), seed=SEED) for n in names]
    else:
        scenarios = [
            replace(
                preset_by_name("wald_count_log_var_prop_mean"),
                replicates=SMOKE_REPLICATES,
                grid=SMOKE_GRID,
                seed=SEED,
            )
        ]
    return [run_scenario(s, threads=4) for s in scenarios]


def test_criterion_3_wald_calibration(wald_runs):
    failures = []
    for result in wald_runs:
        reps = result.scenario.replicates
        t1_lo, t1_hi = band(0.05, 0.006, reps)
        pw_lo, pw_hi = band(0.8, 0.015, reps)
        for pt in result.points:
            for cell in pt.cells:
                if cell.hypothesis == "null" and not t1_lo <= cell.rate <= t1_hi:
                    failures.append(
                        f"{result.scenario.name}@{pt.grid_value}:{cell.variant} typeI={cell.rate:.4f}"
                    )
            power_cell = next(
                c for c in pt.cells if c.variant in ("n",) and c.hypothesis == "alt"
            )
            if not pw_lo <= power_cell.rate <= pw_hi:
                failures.append(
                    f"{result.scenario.name}@{pt.grid_value}: power={power_cell.rate:.4f}"
                )
            n = pt.sizes["n"]
            for variant in ("n_phi", "n_r"):
                ratio = pt.sizes[variant] / n
                if not 0.97 <= ratio <= 1.03:
                    failures.append(
                        f"{result.scenario.name}@{pt.grid_value}: {variant}/n={ratio:.4f}"
                    )
    scale = "full grid" if FULL else f"smoke ({SMOKE_REPLICATES} reps, rho {SMOKE_GRID})"
    report(3, f"Wald calibration, {scale}", not failures, "; ".join(failures[:6]))


def test_criterion_4_exactness_properties():
    t0 = time.perf_counter()
    problems = []
    # identity link: the P2R2 effect equals f2 termwise
    for var, s2 in ((VarianceFunction.MEAN, 1.5), (VarianceFunction.MEAN_SQUARED, 2.0)):
        spec = ModelSpec(Link.IDENTITY, var, s2, [4.0, 0.4], [0.4, 0.81])
        sample = CovariateSample.from_design(CovariateDesign(rho=0.3), 10**6, RngStream(SEED, 2))
        rep = effect_size_report(spec, sample)
        if abs(rep.f2_r - rep.f2) > 1e-10 * rep.f2:
            problems.append(f"identity/{var.value}: f2_r {rep.f2_r} != f2 {rep.f2}")
    # constant weights: the 2SLiP effect matches f2 within Monte Carlo error
    for link, var, s2, lam in (
        (Link.LOG, VarianceFunction.MEAN_SQUARED, 2.0, [1.0, 0.15]),
        (Link.IDENTITY, VarianceFunction.UNIT, 1.0, [4.0, 0.4]),
    ):
        spec = ModelSpec(link, var, s2, lam, [0.1, 0.25])
        sample = CovariateSample.from_design(CovariateDesign(rho=0.3), 10**6, RngStream(SEED, 3))
        rep = effect_size_report(spec, sample)
        if abs(rep.f2_phi - rep.f2) > 4 * rep.mc_se_f2:
            problems.append(f"{link.value}/{var.value}: |f2_phi-f2| > 4 SE")
    elapsed = time.perf_counter() - t0
    report(4, "exactness identities", not problems and elapsed < 10, "; ".join(problems) or f"{elapsed:.1f}s")


@pytest.fixture(scope="module")
def score_runs():
    if FULL:
        names = [
            "score_count_log_var_eq_mean",
            "score_count_log_var_prop_mean",
            "score_count_log_var_prop_mean_sq",
        ]
        scenarios = [replace(preset_by_name(n), seed=SEED) for n in names]
    else:
        scenarios = [
            replace(
                preset_by_name("score_count_log_var_eq_mean"),
                replicates=SMOKE_REPLICATES,
                grid=SMOKE_GRID,
                seed=SEED,
            )
        ]
    return [run_scenario(s, threads=4) for s in scenarios]


def test_criterion_5_score_suite(score_runs):
    failures = []
    # ratio bands across all three count cases, both smoke correlations
    delta = ncp_for_power(2, 0.05, 0.8)
    cases = [
        OutcomeCase(OutcomeKind.POISSON_VAR_EQ_MEAN),
        OutcomeCase(OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN),
        OutcomeCase(OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ, sigma2=2.0),
    ]
    for rho_idx, rho in enumerate(SMOKE_GRID):
        sample = CovariateSample.from_design(CovariateDesign(rho=rho), 10**6, RngStream(SEED, 4 + rho_idx))
        for case in cases:
            spec = ModelSpec(Link.LOG, case.variance, case.sigma2, [1.0, 0.15], [0.1, 0.21])
            rep = effect_size_report(spec, sample, include_score=True)
            n_s = math.ceil(delta / rep.f2_s)
            for name, f2 in (("n_phi", rep.f2_phi), ("n_r", rep.f2_r)):
                ratio = math.ceil(delta / f2) / n_s
                if not 0.97 <= ratio <= 1.01:
                    failures.append(f"{case.kind.value}@rho={rho}: {name}/n_s={ratio:.4f}")
    # replicated type I error
    for result in score_runs:
        t1_lo, t1_hi = band(0.05, 0.006, result.scenario.replicates)
        for pt, cell in _cells(result, "n_s", "null"):
            if not t1_lo <= cell.rate <= t1_hi:
                failures.append(f"{result.scenario.name}@{pt.grid_value}: typeI={cell.rate:.4f}")
    report(5, "score-test suite", not failures, "; ".join(failures[:6]))


def test_criterion_6_case_study_regeneration():
    t0 = time.perf_counter()
    from qlpower import pilot_analyze

    data = case_study_pilot(1000)
    rep = pilot_analyze(data, Link.LOG, VarianceFunction.MEAN)
    pt1 = [p for p in rep.delta_curve if p.delta == 1.0][0]
    elapsed = time.perf_counter() - t0
    checks = {
        "phi": abs(rep.effects.phi - 0.096) <= 0.02,
        "r2": abs(rep.effects.r2 - 0.020) <= 0.006,
        "ordering": pt1.n_phi >= pt1.n and pt1.n_r >= pt1.n,
        "ratio_cap": pt1.ratio_phi < 1.12 and pt1.ratio_r < 1.12,
        "runtime": elapsed < 60,
    }
    report(
        6, "case-study regeneration", all(checks.values()),
        f"phi={rep.effects.phi:.4f} r2={rep.effects.r2:.4f} "
        f"ratios=({pt1.ratio_phi:.3f},{pt1.ratio_r:.3f}) n={pt1.n} ({elapsed:.1f}s) "
        + "; ".join(k for k, v in checks.items() if not v),
    )


def test_criterion_7_estimator_correctness(wald_runs, score_runs):
    problems = []
    # IRLS with identity link and unit variance reproduces OLS
    g = RngStream(SEED, 5).generator
    n = 400
    z = np.column_stack([np.ones(n), g.uniform(size=n)])
    x = g.normal(size=(n, 2))
    y = z @ [1.0, 0.5] + x @ [0.2, -0.4] + g.normal(size=n)
    data = Dataset(y=y, z=z, x=x)
    fit = irls_fit(data, Link.IDENTITY, VarianceFunction.UNIT)
    ols, *_ = np.linalg.lstsq(data.design(), y, rcond=None)
    if not np.allclose(fit.coefficients(), ols, atol=1e-8):
        problems.append("identity/unit fit differs from OLS beyond 1e-8")
    # quasi-score residual bound over every converged replicate of the runs
    worst = max(r.max_score_residual_per_n for r in (*wald_runs, *score_runs))
    if worst >= 1e-6:
        problems.append(f"max ||sum U||_inf / n = {worst:.2e} >= 1e-6")
    report(7, "estimator correctness", not problems, "; ".join(problems) or f"max resid/n={worst:.2e}")


def test_criterion_8_reproducibility_across_threads():
    scenario = replace(
        preset_by_name("wald_count_log_var_prop_mean"),
        replicates=200,
        grid=(0.0, 0.3),
        mc_size=2 * 10**5,
        seed=SEED,
    )
    csv_single = run_scenario(scenario, threads=1).to_csv()
    csv_threaded = run_scenario(scenario, threads=4).to_csv()
    csv_again = run_scenario(scenario, threads=4).to_csv()
    ok = csv_single == csv_threaded == csv_again
    report(8, "seeded runs byte-identical across thread counts", ok)


def test_criterion_9_beta2_sweep():
    if FULL:
        names = [p.name for p in __import__("qlpower").scenario_presets() if p.family.startswith("beta2")]
        scenarios = [replace(preset_by_name(n), seed=SEED) for n in names]
    else:
        scenarios = [
            replace(
                preset_by_name("beta2_count_log_var_prop_mean"),
                replicates=SMOKE_REPLICATES,
                grid=(0.15, 0.19, 0.25),
                seed=SEED,
            )
        ]
    failures = []
    for scenario in scenarios:
        result = run_scenario(scenario, threads=4)
        f2s = [pt.f2 for pt in result.points]
        if not all(a < b for a, b in zip(f2s, f2s[1:])):
            failures.append(f"{scenario.name}: f2 not increasing in beta2: {f2s}")
        t1_lo, t1_hi = band(0.05, 0.006, scenario.replicates)
        pw_lo, pw_hi = band(0.8, 0.015, scenario.replicates)
        for pt in result.points:
            for cell in pt.cells:
                if cell.hypothesis == "null" and not t1_lo <= cell.rate <= t1_hi:
                    failures.append(f"{scenario.name}@{pt.grid_value}:{cell.variant} typeI={cell.rate:.4f}")
                if cell.variant == "n" and cell.hypothesis == "alt" and not pw_lo <= cell.rate <= pw_hi:
                    failures.append(f"{scenario.name}@{pt.grid_value}: power={cell.rate:.4f}")
    report(9, "coefficient sweep at rho=0.3", not failures, "; ".join(failures[:6]))
