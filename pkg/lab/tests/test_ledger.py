"""Tests for the ledger sweep, trend checks and the inflation demonstration."""

import math

import pytest

from lab.src import ledger
from lab.src.errors import CapacityError
from lab.src.ledger import (
    analytic_columns,
    check_trends,
    config_hash,
    family_columns,
    ledger_point,
    run_inflation_demo,
    run_ledger,
    time_grid,
)
from lab.src.schemas import ExperimentConfig, InflationReport, LedgerRow
from lab.src.second_iterate import component_prefactor


def _config(**overrides):
    base = dict(sweep=[4], delta=0.0, time_factors=[2.0])
    base.update(overrides)
    return ExperimentConfig(**base)


def _row(N, **values):
    values.setdefault("t", 2.0 / 128)
    values.setdefault("t_factor", 2.0)
    values.setdefault("k_N", 128)
    values.setdefault("margin_b", 0.5)
    return LedgerRow(N=N, **values)


class TestColumns:
    """Tests for the analytic ledger columns."""

    def test_i1_increases_and_i6_decreases(self):
        """With delta = 1 the block sums follow their trends over N = 4 ... 32."""
        cfg = ExperimentConfig()
        assert cfg.sweep == [4, 8, 16, 32]
        columns = [analytic_columns(cfg, N) for N in cfg.sweep]
        i1 = [c["I1"] for c in columns]
        i6 = [c["I6"] for c in columns]
        assert all(a < b for a, b in zip(i1, i1[1:]))
        assert all(a > b for a, b in zip(i6, i6[1:]))

    def test_single_index_values(self):
        """delta = 0 leaves one term in each block sum."""
        columns = analytic_columns(_config(), 4)
        assert columns["I1"] == pytest.approx(4 ** -(1.1 * 3 / 4))
        assert columns["I6"] == pytest.approx(4**-1.1)

    def test_family_columns(self, small_family):
        """I_4 and I_5 are empty sums for ell = 1."""
        t = 2 / 128
        columns = family_columns(small_family, t)
        scale = 1 / (t ** (1 / 3 + 2) * 128)
        assert columns["I2"] == pytest.approx(scale * 4 ** -(1.1 * 3 / 4))
        assert columns["I4"] == 0.0
        assert columns["I5"] == 0.0
        assert columns["margin_b"] > 0

    def test_time_grid(self):
        """Explicit times win over factors of 1/k_N."""
        assert time_grid(_config(time_factors=[2.0, 4.0]), 128) == [
            (2 / 128, 2.0),
            (4 / 128, 4.0),
        ]
        assert time_grid(_config(times=[0.05]), 128) == [(0.05, 0.05 * 128)]

    def test_config_hash(self):
        """The hash ignores the output directory only."""
        a = config_hash(_config(output_dir="a"))
        assert a == config_hash(_config(output_dir="b"))
        assert a != config_hash(_config(M=7))
        assert len(a) == 16


class TestTrends:
    """Tests for check_trends on hand-built rows."""

    def test_single_N_note(self):
        """A single N skips the monotonicity checks."""
        failures, notes = check_trends(_config(), [_row(4, I1=1.0, I6=1.0)])
        assert not failures
        assert any("single N" in note for note in notes)

    def test_monotonicity_failures(self):
        """Decreasing I_1 and increasing I_6 are both reported."""
        rows = [_row(4, I1=2.0, I6=1.0), _row(8, I1=1.0, I6=2.0)]
        failures, _ = check_trends(_config(sweep=[4, 8]), rows)
        assert any(f.startswith("I1") for f in failures)
        assert any(f.startswith("I6") for f in failures)

    def test_margin_failure(self):
        """A non-positive condition (b) margin fails."""
        failures, _ = check_trends(_config(), [_row(4, margin_b=-0.1)])
        assert any("margin" in f for f in failures)

    def test_capacity_rows_skip_margin(self):
        """Rows without a family carry no margin."""
        row = LedgerRow(N=40, t=math.nan, t_factor=math.nan, k_N=0, status="CAPACITY")
        assert check_trends(_config(), [row])[0] == []

    def test_J_ratio_spread(self):
        """J ratios more than a factor 4 apart at one t k_N fail."""
        rows = [
            _row(4, I1=1.0, I6=2.0, J_ratio=1.0),
            _row(8, I1=2.0, I6=1.0, J_ratio=5.0),
        ]
        failures, _ = check_trends(_config(sweep=[4, 8]), rows)
        assert len(failures) == 1
        assert "J ratio" in failures[0]

    def test_lower_order_trends_at_fixed_time(self):
        """For ell > 1 with explicit times, I_4 must decrease."""
        cfg = ExperimentConfig(ell=2, q=6.0, M=7, sweep=[4, 8], times=[0.01])
        rows = [
            _row(4, t=0.01, I1=1.0, I6=2.0, I4=1.0, I5=2.0),
            _row(8, t=0.01, I1=2.0, I6=1.0, I4=3.0, I5=1.0),
        ]
        failures, _ = check_trends(cfg, rows)
        assert failures == ["I4 not strictly decreasing at t=0.01"]

    def test_lower_order_trends_skipped_on_factor_grid(self):
        """On the t k_N grid a growing I_4 is only noted for ell > 1."""
        cfg = ExperimentConfig(ell=2, q=6.0, M=7, sweep=[4, 8], time_factors=[2.0])
        rows = [
            _row(4, I1=1.0, I6=2.0, I4=1.0, I5=1.0),
            _row(8, I1=2.0, I6=1.0, I4=3.0, I5=3.0),
        ]
        failures, notes = check_trends(cfg, rows)
        assert failures == []
        skipped = "I4 and I5 trends need explicit times"
        assert any(note.startswith(skipped) for note in notes)


class TestLedgerRun:
    """End-to-end ledger runs on single-index families."""

    def test_single_point(self):
        """One OK row with the measured columns filled in."""
        report = run_ledger(_config(), threads=1)
        assert report.status == "OK"
        assert report.ell == 1
        (row,) = report.rows
        assert (row.N, row.k_N, row.t_factor) == (4, 128, 2.0)
        assert row.t == pytest.approx(2 / 128)
        weight = abs(component_prefactor(1))
        assert row.I1_measured == pytest.approx(weight * row.norm_EJ[0])
        assert row.I2_measured == pytest.approx(weight * row.norm_HF1)
        assert row.I4_measured == 0.0
        assert 0 < row.norm_phi_t < row.norm_phi
        assert row.I6_measured == row.norm_phi_t
        assert row.J_ratio > 0
        assert row.phi_ratio > 0
        assert list(report.timings) == ["N=4"]
        assert any("single N" in note for note in report.notes)

    def test_pool_matches_serial(self):
        """Worker processes give the same rows as the serial run."""
        cfg = _config(sweep=[4, 5])
        serial = run_ledger(cfg, threads=1)
        pooled = run_ledger(cfg, threads=2)
        assert [r.model_dump_json() for r in pooled.rows] == [
            r.model_dump_json() for r in serial.rows
        ]
        # one index per family: I_1 falls with N
        assert serial.status == "FAILED"
        assert any(f.startswith("I1") for f in serial.failures)

    def test_family_capacity_row(self):
        """A family beyond 2^60 becomes one CAPACITY row with analytic columns."""
        rows, seconds = ledger_point(ExperimentConfig(sweep=[40]), 40)
        (row,) = rows
        assert row.status == "CAPACITY"
        assert row.k_N == 0
        assert math.isfinite(row.I1)
        assert math.isnan(row.norm_phi)
        assert seconds >= 0

    def test_tuple_capacity_row(self):
        """A tuple budget overrun keeps the analytic and family columns."""
        rows, _ = ledger_point(_config(max_tuples=10), 4)
        (row,) = rows
        assert row.status == "CAPACITY"
        assert row.k_N == 128
        assert row.family_hash
        assert math.isfinite(row.I2)
        assert math.isnan(row.norm_phi)
        assert not row.components

    def test_all_capacity_raises(self):
        """A sweep with no measurable point raises CapacityError."""
        with pytest.raises(CapacityError):
            run_ledger(ExperimentConfig(sweep=[40]), threads=1)


class TestInflationDemo:
    """Tests for the inflation demonstration on synthetic ledgers."""

    @pytest.fixture
    def fake_ledger(self, monkeypatch):
        """Replace run_ledger by rows whose ratio is a power of I_1."""

        def install(cfg, power):
            rows = []
            for N in cfg.sweep:
                i1 = analytic_columns(cfg, N)["I1"]
                ratio = 1e-3 * i1**power
                rows.append(_row(N, I1=i1, f_lower=ratio, norm_phi=1.0, J_ratio=1.0))
            report = InflationReport(version="0", ell=1, config_hash="x", rows=rows)
            monkeypatch.setattr(ledger, "run_ledger", lambda *args: report)

        return install

    def test_achieved(self, fake_ledger):
        """A row above R^2 is the witness."""
        cfg = ExperimentConfig(sweep=[4, 8, 16])
        fake_ledger(cfg, 2.0)
        demo = run_inflation_demo(cfg, 0.01).demo
        assert demo.label == "ACHIEVED"
        assert demo.witness_N == 16

    def test_extrapolated(self, fake_ledger):
        """A positive log-log slope is solved for N."""
        cfg = ExperimentConfig(sweep=[4, 8, 16])
        fake_ledger(cfg, 2.0)
        demo = run_inflation_demo(cfg, 10.0).demo
        assert demo.label == "EXTRAPOLATED"
        assert demo.slope == pytest.approx(2.0)
        assert demo.r_squared == pytest.approx(1.0)
        i1_needed = math.sqrt(100 / 1e-3)
        assert demo.extrapolated_N > 16
        estimate = ledger._approximate_block_sum(
            demo.extrapolated_N, cfg.delta, ledger.i1_exponent(cfg)
        )
        assert estimate == pytest.approx(i1_needed, rel=1e-3)

    def test_not_extrapolable(self, fake_ledger):
        """A falling ratio cannot be extrapolated."""
        cfg = ExperimentConfig(sweep=[4, 8, 16])
        fake_ledger(cfg, -1.0)
        report = run_inflation_demo(cfg, 10.0)
        assert report.demo.label == "NOT_EXTRAPOLABLE"
        assert report.demo.extrapolated_N is None
        assert any("does not support" in note for note in report.notes)
