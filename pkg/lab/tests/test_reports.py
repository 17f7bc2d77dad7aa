"""Tests for CSV and JSON report output."""

import json
import math

import pytest

from lab.src.errors import ArgumentError
from lab.src.reports import (
    TIMINGS_FILE,
    csv_columns,
    emit,
    to_jsonable,
    write_csv,
    write_json,
)
from lab.src.schemas import InflationReport, LedgerRow


def _report(rows=()):
    return InflationReport(
        version="0.1.0",
        ell=1,
        config_hash="abc",
        rows=list(rows),
        timings={"N=4": 1.25},
    )


def _row():
    return LedgerRow(
        N=4,
        t=0.015625,
        t_factor=2.0,
        k_N=128,
        norm_phi=0.1,
        norm_EJ=[0.5],
        I1=0.3193,
        margin_b=0.38,
        family_hash="0123456789abcdef",
    )


class TestColumns:
    """Tests for the fixed CSV column order."""

    def test_order(self):
        """Lead columns, per-k norms, then the I columns."""
        columns = csv_columns(2)
        assert columns[:7] == [
            "N",
            "t",
            "t_factor",
            "k_N",
            "status",
            "norm_phi",
            "norm_phi_t",
        ]
        assert columns[7:11] == ["norm_EJ_1", "norm_EJ_2", "norm_HF_1", "norm_HF_2"]
        assert columns[-1] == "family_hash"
        assert "I6_measured" in columns

    def test_width_grows_with_ell(self):
        """Two extra columns per order."""
        assert len(csv_columns(2)) == len(csv_columns(1)) + 2


class TestCsv:
    """Tests for write_csv."""

    def test_header_only(self, tmp_path):
        """An empty ledger still gets its header."""
        path = write_csv([], 1, tmp_path / "empty.csv")
        assert path.read_text() == ",".join(csv_columns(1)) + "\n"

    def test_one_row(self, tmp_path):
        """Floats use repr, NaN is empty, missing per-k norms are empty."""
        path = write_csv([_row()], 1, tmp_path / "one.csv")
        header, line = path.read_text().splitlines()
        cells = dict(zip(header.split(","), line.split(",")))
        assert cells["t"] == "0.015625"
        assert cells["I1"] == "0.3193"
        assert cells["norm_EJ_1"] == "0.5"
        assert cells["norm_HF_1"] == ""
        assert cells["norm_phi_t"] == ""
        assert cells["status"] == "OK"


class TestJson:
    """Tests for write_json and emit."""

    def test_non_finite_values_become_null(self, tmp_path):
        """NaN and infinities serialize as null."""
        payload = {"a": math.nan, "b": [1.0, math.inf], "c": {"d": 2}}
        assert to_jsonable(payload) == {"a": None, "b": [1.0, None], "c": {"d": 2}}
        path = write_json(payload, tmp_path / "nested" / "x.json")
        assert json.loads(path.read_text())["a"] is None
        assert path.read_text().endswith("}\n")

    def test_emit_json_is_byte_stable(self, tmp_path):
        """Emitting the same report twice gives identical bytes."""
        report = _report([_row()])
        first = emit(report, "json", tmp_path / "a")[0].read_bytes()
        second = emit(report, "json", tmp_path / "b")[0].read_bytes()
        assert first == second
        data = json.loads(first)
        assert "timings" not in data
        assert data["rows"][0]["norm_phi_t"] is None

    def test_emit_writes_timings_sidecar(self, tmp_path):
        """Timings go to their own file."""
        written = emit(_report(), "csv", tmp_path)
        assert [p.name for p in written] == ["inflation_report.csv", TIMINGS_FILE]
        assert json.loads(written[1].read_text()) == {"N=4": 1.25}

    def test_unknown_format(self, tmp_path):
        """Only csv and json are supported."""
        with pytest.raises(ArgumentError):
            emit(_report(), "xml", tmp_path)
