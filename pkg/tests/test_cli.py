import pytest
from click.testing import CliRunner

from cli.commands import cli


@pytest.fixture
def runner():
    return CliRunner()


def test_classify_prints_region(runner):
    result = runner.invoke(cli, ["classify", "1229", "--schedule", "fixture"])
    assert result.exit_code == 0, result.output
    assert "B(n=2, r=1, h=1350)" in result.output


def test_classify_with_layout(runner):
    result = runner.invoke(cli, ["classify", "1229", "--schedule", "fixture", "--layout"])
    assert result.exit_code == 0, result.output
    assert "Bfirst" in result.output


def test_classify_accepts_power_notation(runner):
    result = runner.invoke(cli, ["classify", "2^30", "--schedule", "fixture"])
    assert result.exit_code == 0, result.output
    assert "A(n=3, r=1)" in result.output


def test_classify_without_index_is_a_usage_error(runner):
    result = runner.invoke(cli, ["classify"])
    assert result.exit_code == 2


def test_index_beyond_a_finite_schedule(runner):
    result = runner.invoke(cli, ["classify", "100000", "--schedule", "naive"])
    assert result.exit_code == 2
    assert "ScheduleError" in result.output


def test_missing_schedule_file(runner, tmp_path):
    result = runner.invoke(cli, ["validate-schedule", "--schedule", str(tmp_path / "none.json")])
    assert result.exit_code == 2


def test_validate_schedule(runner):
    assert runner.invoke(cli, ["validate-schedule", "--schedule", "fixture"]).exit_code == 0


def test_validate_reports_failures(runner, write_schedule):
    path = write_schedule("slow", head=[(4, 16), (16, 64)])
    assert runner.invoke(cli, ["validate-schedule", "--schedule", str(path)]).exit_code == 1


def test_status(runner):
    result = runner.invoke(cli, ["status", "--schedule", "fixture"])
    assert result.exit_code == 0, result.output
    assert "sha256" in result.output


@pytest.mark.parametrize("method", ["formula", "direct"])
def test_s_column(runner, method):
    result = runner.invoke(cli, ["matrix", "s-column", "1800", "--method", method, "--schedule", "fixture"])
    assert result.exit_code == 0, result.output
    assert "1801" in result.output


def test_basis_expand(runner):
    result = runner.invoke(cli, ["basis", "expand", "--system", "ehat", "--index", "328", "--schedule", "fixture"])
    assert result.exit_code == 0, result.output
    assert "649" in result.output


def test_basis_expand_rejects_unknown_system(runner):
    result = runner.invoke(cli, ["basis", "expand", "--system", "g", "--index", "3"])
    assert result.exit_code == 2


def test_nonadjoint_report_writes_csv(runner, tmp_path):
    result = runner.invoke(cli, ["report", "nonadjoint", "--s-max", "1", "--n-max", "3",
                                 "--schedule", "fixture", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "report" / "nonadjoint.csv").exists()


def test_nonadjoint_bad_range(runner):
    result = runner.invoke(cli, ["report", "nonadjoint", "--s-max", "3", "--n-max", "2"])
    assert result.exit_code == 2


def test_norm_failure_exits_one(runner):
    result = runner.invoke(cli, ["report", "column-norms", "--schedule", "naive"])
    assert result.exit_code == 1


def test_witness_build_toy(runner):
    result = runner.invoke(cli, ["witness", "build", "--mode", "toy", "--depth", "2", "--schedule", "fixture"])
    assert result.exit_code == 0, result.output
    assert "tail bound" in result.output


def test_witness_strict_depth_two_is_rejected(runner):
    result = runner.invoke(cli, ["witness", "build", "--mode", "strict", "--depth", "2"])
    assert result.exit_code == 2
    assert "WitnessError" in result.output


def test_unknown_suite(runner, tmp_path):
    result = runner.invoke(cli, ["suite", "run", "everything", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_suite_run(runner, tmp_path):
    result = runner.invoke(cli, ["suite", "run", "nonadjoint", "--schedule", "fixture", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "nonadjoint" / "summary.jsonl").exists()
