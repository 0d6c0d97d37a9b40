from fractions import Fraction

import mpmath as mp
import pytest

from analyzers.nonadjoint_analyzer import EQUIVALENT_NORMS_NOTE, TOPOLOGY_NOTE, NonAdjointAnalyzer
from core.errors import BudgetError, ScheduleError
from core.scalar import Dyadic


@pytest.fixture(scope="module")
def analyzer(fixture_schedule, columns):
    return NonAdjointAnalyzer(fixture_schedule, columns)


def test_closed_form_value(analyzer):
    assert analyzer.analytic(1, 2) == Dyadic(4, Fraction(-121, 30))


def test_first_residual_row(analyzer):
    row, delta = analyzer.row(1, 2)
    assert row.identity_exact
    assert row.agrees
    assert row.limit_norm == 4
    assert row.gap
    with mp.workprec(200):
        assert abs(delta.approx() - 4 * mp.power(2, mp.mpf(-121) / 30)) < mp.mpf(2) ** -150
    assert row.delta.startswith("0.2442")


def test_report_table(analyzer):
    report = analyzer.nonadjoint_report(1, 3)
    assert report.passed, report.failures
    assert [(r["s"], r["n"]) for r in report.rows] == [(1, 2), (1, 3)]
    assert all(r["gap"] for r in report.rows)
    assert report.csv_columns == ["s", "n", "log2_delta", "analytic_log2", "gap"]
    assert report.notes == [TOPOLOGY_NOTE, EQUIVALENT_NORMS_NOTE]
    second = mp.mpf(report.rows[1]["log2_delta"])
    assert second < -16000


def test_preconditions(analyzer, naive_schedule):
    with pytest.raises(ScheduleError):
        analyzer.nonadjoint_report(2, 2)
    with pytest.raises(ScheduleError):
        NonAdjointAnalyzer(naive_schedule).nonadjoint_report(1, 3)


def test_step_budget(analyzer):
    with pytest.raises(BudgetError):
        analyzer.row(1, 2, max_steps=100)
