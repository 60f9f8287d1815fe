"""Tests for the two-step procedure: schedule table, confidence set,
decision logic, batched driver, and level calibration."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from rcatest.bonferroni import (
    DEFAULT_ALPHA1_TABLE,
    DEFAULT_ABAR_GRID,
    DEFAULT_CANDIDATES,
    Alpha1Row,
    Alpha1Table,
    GridSpec,
    _batch_bonferroni,
    bonferroni_test,
    calibrate_alpha1,
    confidence_set,
    lookup_alpha1,
)
from rcatest.bonferroni import TestReport as Report
from rcatest.errors import CalibrationError, ParameterError, TableError
from rcatest.simulate import InnovationSpec, RcaParams, gen_innovations, simulate_rca
from rcatest.teststats import StatKind, pivotal_critical_value


def ar1_path(rho, T, seed, y0=0.0):
    eps, v = gen_innovations(InnovationSpec("normal"), T, seed=seed)
    return simulate_rca(RcaParams(T=T, rho=rho, omega2=0.0, y0=y0), eps, v).values


class TestAlpha1Row:
    def test_contains_respects_openness(self):
        assert Alpha1Row(0.2, 0.4, "[)", 0.1).contains(0.2)
        assert not Alpha1Row(0.2, 0.4, "[)", 0.1).contains(0.4)
        assert not Alpha1Row(0.2, 0.4, "(]", 0.1).contains(0.2)
        assert Alpha1Row(0.2, 0.4, "(]", 0.1).contains(0.4)
        assert Alpha1Row(0.2, 0.4, "[]", 0.1).contains(0.4)
        assert not Alpha1Row(0.2, 0.4, "()", 0.1).contains(0.2)

    @pytest.mark.parametrize(
        "args",
        [
            (0.2, 0.4, "[>", 0.1),
            (0.4, 0.2, "[)", 0.1),
            (0.2, 0.2, "[)", 0.1),
            (-0.1, 0.4, "[)", 0.1),
            (0.2, 1.1, "[)", 0.1),
            (0.2, 0.4, "[)", 0.0),
            (0.2, 0.4, "[)", 1.0),
        ],
    )
    def test_invalid_rows(self, args):
        with pytest.raises(TableError):
            Alpha1Row(*args)


class TestAlpha1Table:
    def test_shipped_schedule_is_a_partition(self):
        table = DEFAULT_ALPHA1_TABLE
        assert len(table.rows) == 19
        table.validate()
        assert table.provenance["source"] == "shipped-default"

    @pytest.mark.parametrize(
        "psi_abs,expected",
        [
            (0.0, 0.09),
            (0.049, 0.09),
            (0.05, 0.17),
            (0.30, 0.50),
            (0.40, 0.50),
            (0.45, 0.48),
            (0.95, 0.11),
            (0.951, 0.05),
            (1.0 - 1e-12, 0.05),
        ],
    )
    def test_shipped_lookup(self, psi_abs, expected):
        assert DEFAULT_ALPHA1_TABLE.lookup(psi_abs) == expected
        assert lookup_alpha1(DEFAULT_ALPHA1_TABLE, psi_abs) == expected

    def test_lookup_outside_domain(self):
        with pytest.raises(ParameterError):
            DEFAULT_ALPHA1_TABLE.lookup(1.0)  # partition covers [0, 1) only
        with pytest.raises(ParameterError):
            DEFAULT_ALPHA1_TABLE.lookup(-0.2)

    def test_rows_are_sorted_on_construction(self):
        table = Alpha1Table(
            rows=(
                Alpha1Row(0.5, 1.0, "[)", 0.2),
                Alpha1Row(0.0, 0.5, "[)", 0.1),
            )
        )
        assert table.rows[0].psi_lo == 0.0

    @pytest.mark.parametrize(
        "rows",
        [
            # gap between 0.4 and 0.5
            (Alpha1Row(0.0, 0.4, "[)", 0.1), Alpha1Row(0.5, 1.0, "[)", 0.2)),
            # boundary 0.5 closed on both sides
            (Alpha1Row(0.0, 0.5, "[]", 0.1), Alpha1Row(0.5, 1.0, "[)", 0.2)),
            # boundary 0.5 open on both sides
            (Alpha1Row(0.0, 0.5, "[)", 0.1), Alpha1Row(0.5, 1.0, "()", 0.2)),
            # does not start closed at zero
            (Alpha1Row(0.0, 0.5, "()", 0.1), Alpha1Row(0.5, 1.0, "[)", 0.2)),
            # ends closed at one
            (Alpha1Row(0.0, 0.5, "[)", 0.1), Alpha1Row(0.5, 1.0, "[]", 0.2)),
            # overlap
            (Alpha1Row(0.0, 0.6, "[)", 0.1), Alpha1Row(0.5, 1.0, "[)", 0.2)),
        ],
    )
    def test_partition_violations(self, rows):
        with pytest.raises(TableError):
            Alpha1Table(rows=rows)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "schedule.csv"
        DEFAULT_ALPHA1_TABLE.to_csv(path)
        back = Alpha1Table.from_csv(path)
        assert back.rows == DEFAULT_ALPHA1_TABLE.rows
        assert back.provenance == DEFAULT_ALPHA1_TABLE.provenance

    def test_missing_sidecar_warns(self, tmp_path):
        path = tmp_path / "schedule.csv"
        DEFAULT_ALPHA1_TABLE.to_csv(path)
        (tmp_path / "schedule.json").unlink()
        with pytest.warns(RuntimeWarning, match="sidecar"):
            back = Alpha1Table.from_csv(path)
        assert back.provenance == {}

    def test_from_csv_rejects_bad_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("lo,hi\n0,1\n")
        with pytest.raises(TableError, match="columns"):
            Alpha1Table.from_csv(path)


class TestGridSpec:
    def test_default_grid(self):
        vals = DEFAULT_ABAR_GRID.values()
        assert vals[0] == -300.0 and vals[-1] == 20.0
        assert vals.size == 321
        assert_allclose(np.diff(vals), 1.0)

    def test_widened_doubles_span(self):
        wide = GridSpec(-300.0, 20.0, 1.0).widened()
        assert wide.lo == -460.0 and wide.hi == 180.0 and wide.step == 1.0

    @pytest.mark.parametrize("kwargs", [
        {"lo": 5.0, "hi": 5.0},
        {"lo": 5.0, "hi": 1.0},
        {"step": 0.0},
        {"step": -1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            GridSpec(**kwargs)


class TestConfidenceSet:
    def test_matches_manual_retention(self, cv_table):
        from rcatest.estimate import rho_ols

        y = ar1_path(1.0, 200, seed=101)
        cs = confidence_set(y, 0.10, cv_table)
        est = rho_ols(y)
        abar = DEFAULT_ABAR_GRID.values()
        tvals = est.t_ratio(1.0 + abar / 200)
        lo = cv_table.quantile(abar, 0.05)
        hi = cv_table.quantile(abar, 0.95)
        expected = abar[(tvals >= lo) & (tvals <= hi)]
        assert_array_equal(cs.abar_values, expected)
        assert not cs.extended and not cs.cv_clamped
        assert cs.rho_hat == est.rho_hat

    def test_nested_in_level(self, cv_table):
        y = ar1_path(1.0, 300, seed=7)
        wide = confidence_set(y, 0.02, cv_table).abar_values
        mid = confidence_set(y, 0.10, cv_table).abar_values
        narrow = confidence_set(y, 0.30, cv_table).abar_values
        assert np.all(np.isin(mid, wide))
        assert np.all(np.isin(narrow, mid))
        assert narrow.size <= mid.size <= wide.size

    def test_widens_for_strongly_stationary_series(self, cv_table):
        # rho = 0.22 puts the drift near -390, far left of the default
        # grid, so the first pass comes back empty and the retry on the
        # doubled span (with endpoint-pinned critical values) succeeds.
        y = ar1_path(0.22, 500, seed=42)
        cs = confidence_set(y, 0.10, cv_table)
        assert cs.extended and cs.cv_clamped
        assert not cs.empty
        assert cs.grid.lo == -460.0
        assert np.all(cs.abar_values < -300.0)

    def test_alpha1_range(self, cv_table):
        y = ar1_path(1.0, 50, seed=1)
        with pytest.raises(ParameterError):
            confidence_set(y, 0.0, cv_table)

    def test_small_alpha1_covers_true_drift(self, cv_table):
        # A 99% first-stage interval around the drift should contain the
        # true value (zero here) in at least 95% of replications.
        from rcatest import _kernels

        reps, T = 1000, 1000
        rng = np.random.default_rng(909)
        Y = _kernels.batch_paths(
            1.0, 0.0, 0.0, rng.standard_normal((reps, T)), None
        )
        rho_hat, den, s2 = _kernels.batch_rho_ols(Y)
        t0 = (rho_hat - 1.0) * np.sqrt(den / s2)
        lo = cv_table.quantile(0.0, 0.005)
        hi = cv_table.quantile(0.0, 0.995)
        coverage = np.mean((t0 >= lo) & (t0 <= hi))
        assert coverage >= 0.95


class TestBonferroniTest:
    def test_report_coherence(self, cv_table):
        y = ar1_path(1.0, 200, seed=11)
        report = bonferroni_test(y, cv_table, include_per_point=True)
        assert report.kind == "WaldStar"
        assert report.cv_alpha2 == pytest.approx(5.991464547107979, rel=1e-12)
        assert report.alpha1 == DEFAULT_ALPHA1_TABLE.lookup(abs(report.psi_hat))
        assert report.T == 200
        assert report.ci["count"] == len(report.per_point)
        stats = [p["stat"] for p in report.per_point]
        assert report.statistic_min == pytest.approx(min(stats), rel=1e-12)
        expected = "Reject" if report.statistic_min > report.cv_alpha2 else (
            "FailToReject"
        )
        assert report.decision == expected
        lo = cv_table.quantile(
            np.array([p["abar"] for p in report.per_point]), report.alpha1 / 2
        )
        hi = cv_table.quantile(
            np.array([p["abar"] for p in report.per_point]),
            1.0 - report.alpha1 / 2,
        )
        t = np.array([p["t_rho"] for p in report.per_point])
        assert np.all((t >= lo) & (t <= hi))

    def test_json_round_trip(self, cv_table):
        y = ar1_path(0.95, 150, seed=12)
        report = bonferroni_test(y, cv_table, include_per_point=True)
        assert Report.from_json(report.to_json()) == report
        plain = bonferroni_test(y, cv_table)
        assert plain.per_point is None
        assert Report.from_json(plain.to_json()) == plain

    def test_json_to_file(self, cv_table, tmp_path):
        y = ar1_path(1.0, 100, seed=13)
        report = bonferroni_test(y, cv_table)
        out = tmp_path / "report.json"
        report.to_json(out)
        assert Report.from_json(out.read_text()) == report

    def test_empty_confidence_set_fails_to_reject(self, cv_table):
        # A clearly explosive path whose coefficient sits between grid
        # points: the t-ratio curve is so steep there that no grid point
        # survives, even after widening. The procedure must refuse to
        # reject and say why.
        y = ar1_path(1.1537, 200, seed=14, y0=1.0)
        report = bonferroni_test(y, cv_table)
        assert report.decision == "FailToReject"
        assert report.statistic_min is None
        assert "empty_confidence_set" in report.flags
        assert report.ci["count"] == 0

    def test_alpha2_mismatch_flagged(self, cv_table):
        y = ar1_path(1.0, 120, seed=15)
        report = bonferroni_test(y, cv_table, alpha2=0.10)
        assert "alpha2_differs_from_schedule_calibration" in report.flags
        assert report.cv_alpha2 == pytest.approx(
            pivotal_critical_value(StatKind.WALD_STAR, 0.10), rel=1e-12
        )

    def test_plain_kind_rejected(self, cv_table):
        y = ar1_path(1.0, 120, seed=16)
        with pytest.raises(ParameterError, match="pivotal"):
            bonferroni_test(y, cv_table, kind=StatKind.WALD)
        with pytest.raises(ParameterError):
            bonferroni_test(y, cv_table, alpha2=1.5)

    def test_other_modified_kinds_run(self, cv_table):
        y = ar1_path(1.0, 150, seed=17)
        for kind in (StatKind.LN_STAR, StatKind.AUG_T_STAR):
            report = bonferroni_test(y, cv_table, kind=kind)
            assert report.kind == kind.value
            assert report.decision in ("Reject", "FailToReject")


class TestBatchAgreement:
    def test_batch_matches_scalar(self, cv_table):
        rng = np.random.default_rng(404)
        from rcatest import _kernels

        eps = rng.standard_normal((50, 150))
        Y = _kernels.batch_paths(1.0, 0.0, 0.0, eps, None)
        reject, smin, alpha1 = _batch_bonferroni(
            Y, cv_table, DEFAULT_ALPHA1_TABLE, DEFAULT_ABAR_GRID, 0.05,
            StatKind.WALD_STAR,
        )
        for p in range(Y.shape[0]):
            report = bonferroni_test(Y[p], cv_table)
            assert reject[p] == (report.decision == "Reject")
            assert alpha1[p] == report.alpha1
            if not np.isnan(smin[p]):
                assert smin[p] == pytest.approx(
                    report.statistic_min, rel=1e-12
                )
            else:
                assert "empty_confidence_set" in report.flags or (
                    "grid_extended" in report.flags
                )


class TestCalibrateAlpha1:
    def test_tiny_calibration(self, small_cv_table):
        grid = GridSpec(-60.0, 10.0, 5.0)
        kwargs = dict(
            psi_grid=(0.0, 0.5),
            a_grid=(-20.0, 0.0),
            T=300,
            reps=400,
            grid=grid,
            seed=2,
            target=0.06,
            candidates=(0.01, 0.02, 0.05, 0.10, 0.20, 0.40),
        )
        table = calibrate_alpha1(small_cv_table, **kwargs)
        assert len(table.rows) == 2
        assert table.rows[0].psi_lo == 0.0 and table.rows[0].psi_hi == 0.25
        assert table.rows[1].psi_lo == 0.25 and table.rows[1].psi_hi == 1.0
        assert all(r.openness == "[)" for r in table.rows)

        prov = table.provenance
        assert prov["source"] == "calibrated"
        assert prov["T"] == 300 and prov["reps"] == 400
        assert prov["candidates"] == [0.01, 0.02, 0.05, 0.10, 0.20, 0.40]
        worst = np.asarray(prov["worst_rates"])
        assert worst.shape == (2, 6)
        # Chosen level is the largest candidate whose worst-case rate meets
        # the target.
        for i, row in enumerate(table.rows):
            feasible = [
                c for c, w in zip(prov["candidates"], worst[i])
                if w <= prov["target"] + 1e-12
            ]
            assert row.alpha1 == max(feasible)

        again = calibrate_alpha1(small_cv_table, **kwargs)
        assert again.rows == table.rows
        assert again.provenance["worst_rates"] == prov["worst_rates"]

    def test_infeasible_target_raises_with_diagnostics(self, small_cv_table):
        with pytest.raises(CalibrationError) as err:
            calibrate_alpha1(
                small_cv_table,
                psi_grid=(0.0,),
                a_grid=(0.0,),
                T=300,
                reps=200,
                grid=GridSpec(-60.0, 10.0, 5.0),
                seed=3,
                candidates=(0.05, 0.20),
                target=0.0,
            )
        diag = err.value.diagnostics
        assert diag["psi"] == 0.0
        assert len(diag["worst_rates"]) == len(diag["candidates"]) == 2

    def test_parameter_validation(self, small_cv_table):
        with pytest.raises(ParameterError):
            calibrate_alpha1(small_cv_table, psi_grid=(1.0,))
        with pytest.raises(ParameterError):
            calibrate_alpha1(small_cv_table, candidates=(0.0, 0.5))

    def test_default_candidates(self):
        assert DEFAULT_CANDIDATES[0] == 0.01
        assert DEFAULT_CANDIDATES[-1] == 0.60
        assert DEFAULT_CANDIDATES.size == 60
