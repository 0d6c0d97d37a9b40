import json
from pathlib import Path

import pandas as pd
import pytest

from config.settings import SCHEDULES_DIR
from core.errors import SuiteError
from models.reports import CheckReport, CheckResult, CheckStatus, OutputFormat, RunConfig
from reporting.report_writer import ReportWriter, atomic_write
from services.suite_service import run_suite


def _config(out_dir, fmt=OutputFormat.BOTH, name="fixture"):
    return RunConfig(schedule_path=SCHEDULES_DIR / f"{name}.json", seed=5,
                     out_dir=out_dir, output_format=fmt)


def _bundle(folder: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(folder.iterdir())}


def test_nonadjoint_suite_writes_bundle(tmp_path):
    result = run_suite("nonadjoint", _config(tmp_path))
    assert result.status == 0
    folder = tmp_path / "nonadjoint"
    assert sorted(p.name for p in folder.iterdir()) == ["nonadjoint.csv", "nonadjoint.jsonl", "summary.jsonl"]
    table = pd.read_csv(folder / "nonadjoint.csv")
    assert list(table.columns) == ["s", "n", "log2_delta", "analytic_log2", "gap"]
    assert len(table) == 2
    records = [json.loads(line) for line in (folder / "summary.jsonl").read_text().splitlines()]
    assert records[0]["record"] == "header"
    assert records[0]["seed"] == 5
    assert len(records[0]["schedule_sha256"]) == 64
    assert records[-1] == {"record": "suite", "name": "nonadjoint", "status": 0}


def test_bundles_are_reproducible(tmp_path):
    run_suite("rows", _config(tmp_path / "first"))
    run_suite("rows", _config(tmp_path / "second"))
    assert _bundle(tmp_path / "first" / "rows") == _bundle(tmp_path / "second" / "rows")


def test_failed_checks_set_the_status(tmp_path):
    result = run_suite("norms", _config(tmp_path, name="naive"))
    assert result.status == 1
    assert result.failures
    summary = (tmp_path / "norms" / "summary.jsonl").read_text().splitlines()
    assert json.loads(summary[-1])["status"] == 1


def test_records_only_format(tmp_path):
    result = run_suite("nonadjoint", _config(tmp_path, fmt=OutputFormat.RECORDS))
    assert not any(f.endswith(".csv") for f in result.files)


def test_unknown_suite(tmp_path):
    with pytest.raises(SuiteError):
        run_suite("everything", _config(tmp_path))


def test_writer_renders_each_record_kind(tmp_path):
    report = CheckReport(
        name="demo", schedule="fixture", seed=1,
        results=[CheckResult(id="X-001", name="ok", status=CheckStatus.PASS)],
        rows=[{"i": 1, "value": "2"}], csv_columns=["i", "value"], notes=["n"],
    )
    lines = ReportWriter(_config(tmp_path)).records(report).splitlines()
    kinds = [json.loads(line)["record"] for line in lines]
    assert kinds == ["check", "row", "note"]
    assert ReportWriter(_config(tmp_path)).table(report) == "i,value\n1,2\n"


def test_failed_write_leaves_no_temp_file(tmp_path):
    target = tmp_path / "bundle" / "broken.jsonl"
    with pytest.raises(UnicodeEncodeError):
        atomic_write(target, "\ud800")
    assert list(target.parent.iterdir()) == []


def test_failed_replace_leaves_no_temp_file(tmp_path):
    (tmp_path / "taken").mkdir()
    with pytest.raises(OSError):
        atomic_write(tmp_path / "taken", "x\n")
    assert [p.name for p in tmp_path.iterdir()] == ["taken"]


@pytest.mark.slow
def test_full_suite_passes_on_fixture(tmp_path):
    result = run_suite("all", _config(tmp_path))
    assert result.status == 0, [f"{f.id} {f.name}: {f.detail}" for f in result.failures]
    names = {r.name for r in result.reports}
    assert {"conjugation", "column_norms", "rows_0", "constant_c", "prop22_strict",
            "prop22_toy", "lemma_split_1_strict", "separation", "nonadjoint"} <= names


@pytest.mark.slow
def test_full_suite_bundle_is_reproducible(tmp_path):
    run_suite("all", _config(tmp_path / "first"))
    run_suite("all", _config(tmp_path / "second"))
    first = _bundle(tmp_path / "first" / "all")
    assert first == _bundle(tmp_path / "second" / "all")
    assert "summary.jsonl" in first
