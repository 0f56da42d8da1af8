"""Pilot workflow: CSV ingestion with dummy encoding, the delta-scaled
sample-size curve, and recovery of the case-study target quantities from a
regenerated pilot."""

import numpy as np
import pytest

from qlpower import Link, VarianceFunction, pilot_analyze
from qlpower.errors import DomainError, EmptyGridError
from qlpower.planner import ColumnSpec, PilotMapping, load_pilot_csv

from conftest import case_study_pilot

CSV_TEXT = """outcome,age,role,exposure
2.3,34,nurse,confident
1.9,41,doctor,confident
4.1,29,nurse,doubtful
3.3,,nurse,doubtful
2.8,52,tech,confident
3.0,47,doctor,uncertain
2.2,38,tech,uncertain
1.7,45,nurse,confident
2.9,31,doctor,doubtful
3.4,36,tech,uncertain
2.1,44,nurse,confident
2.6,39,doctor,uncertain
"""

MAPPING = {
    "outcome": "outcome",
    "link": "log",
    "variance": "mean",
    "adjustors": [
        {"column": "age", "kind": "continuous"},
        {"column": "role", "kind": "categorical", "reference": "nurse"},
    ],
    "predictors": [
        {"column": "exposure", "kind": "categorical", "reference": "confident"},
    ],
}


class TestIngestion:
    def test_parses_and_encodes(self):
        mapping = PilotMapping.from_dict(MAPPING)
        data, info = load_pilot_csv(CSV_TEXT, mapping)
        assert info["n_dropped"] == 1  # the row with missing age
        assert data.n == 11
        # intercept + age + 2 role dummies
        assert data.r == 4
        assert info["adjustor_names"] == ["(intercept)", "age", "role[doctor]", "role[tech]"]
        # exposure has 3 levels, reference dropped
        assert data.p == 2
        assert info["predictor_names"] == ["exposure[doubtful]", "exposure[uncertain]"]
        assert info["outcome_kind"] == "positive"
        assert np.all(data.z[:, 0] == 1.0)
        assert set(np.unique(data.x)) <= {0.0, 1.0}

    def test_reference_must_exist(self):
        bad = dict(MAPPING, predictors=[{"column": "exposure", "kind": "categorical", "reference": "zzz"}])
        with pytest.raises(DomainError):
            load_pilot_csv(CSV_TEXT, PilotMapping.from_dict(bad))

    def test_undeclared_level_rejected(self):
        levels = {"column": "exposure", "kind": "categorical", "reference": "confident", "levels": ["confident", "doubtful"]}
        bad = dict(MAPPING, predictors=[levels])
        with pytest.raises(DomainError):
            load_pilot_csv(CSV_TEXT, PilotMapping.from_dict(bad))

    def test_missing_column(self):
        bad = dict(MAPPING, outcome="missing_col")
        with pytest.raises(DomainError):
            load_pilot_csv(CSV_TEXT, PilotMapping.from_dict(bad))

    def test_non_numeric_outcome(self):
        text = CSV_TEXT.replace("2.3,", "abc,", 1)
        with pytest.raises(DomainError):
            load_pilot_csv(text, PilotMapping.from_dict(MAPPING))

    def test_categorical_needs_reference(self):
        with pytest.raises(DomainError):
            ColumnSpec(column="x", kind="categorical")

    def test_count_outcome_validation(self):
        text = CSV_TEXT.replace("2.3", "-1.0", 1)
        mapping = PilotMapping.from_dict(dict(MAPPING, outcome_kind="positive"))
        with pytest.raises(DomainError):
            load_pilot_csv(text, mapping)


class TestPilotAnalyze:
    @pytest.fixture(scope="class")
    @staticmethod
    def report():
        data = case_study_pilot(1000)
        return pilot_analyze(data, Link.LOG, VarianceFunction.MEAN)

    def test_recovers_target_effect_scale(self, report):
        assert report.fit.converged
        assert report.effects.phi == pytest.approx(0.096, abs=0.02)
        assert report.effects.r2 == pytest.approx(0.020, abs=0.006)
        assert report.fit.sigma2_hat == pytest.approx(0.217, rel=0.15)

    def test_delta_one_ratios(self, report):
        mid = [pt for pt in report.delta_curve if pt.delta == 1.0]
        assert len(mid) == 1
        pt = mid[0]
        assert pt.n_phi >= pt.n and pt.n_r >= pt.n
        assert pt.ratio_phi < 1.12 and pt.ratio_r < 1.12

    def test_delta_monotonicity(self, report):
        f2s = [pt.f2 for pt in report.delta_curve]
        assert all(a < b for a, b in zip(f2s, f2s[1:]))
        ns = [pt.n for pt in report.delta_curve]
        assert all(a >= b for a, b in zip(ns, ns[1:]))

    def test_ratio_bounds_across_curve(self, report):
        for pt in report.delta_curve:
            assert 0.9 <= pt.ratio_phi <= 1.12
            assert 0.9 <= pt.ratio_r <= 1.12

    def test_sample_sizes_on_expected_order(self, report):
        pt = [p for p in report.delta_curve if p.delta == 1.0][0]
        assert 450 <= pt.n <= 700  # documented 500-600 order

    def test_vanishing_delta_hits_cap(self):
        data = case_study_pilot(400, seed=7)
        report = pilot_analyze(
            data, Link.LOG, VarianceFunction.MEAN, delta_grid=(1e-9, 1.0)
        )
        from qlpower.power import MAX_SAMPLE_SIZE

        assert report.delta_curve[0].n == MAX_SAMPLE_SIZE

    def test_grid_validation(self):
        data = case_study_pilot(400, seed=8)
        with pytest.raises(EmptyGridError):
            pilot_analyze(data, Link.LOG, VarianceFunction.MEAN, delta_grid=())
        with pytest.raises(DomainError):
            pilot_analyze(data, Link.LOG, VarianceFunction.MEAN, delta_grid=(1.0, 0.5))

    def test_curve_csv_shape(self, report):
        lines = report.curve_csv().splitlines()
        assert lines[0].startswith("delta,f2,f2_phi,f2_r")
        assert len(lines) == 1 + len(report.delta_curve)

    def test_report_dict_round_trips_to_json(self, report):
        import json

        doc = json.loads(json.dumps(report.to_dict()))
        assert doc["fit"]["converged"] is True
        assert len(doc["delta_curve"]) == len(report.delta_curve)
