from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from analyzers.operator_analyzer import OperatorAnalyzer
from core.basis import BasisSystem, SparseVec
from core.errors import BudgetError
from core.operator import OperatorColumns, OperatorTag, apply_power, int_power
from core.scalar import Dyadic, ScalarSum
from models.reports import CheckStatus

F = BasisSystem.F
EPS = ScalarSum.of(1, Fraction(-3199, 100))


def _boundaries(s):
    out = {0, s.v(2)}
    for n in (1, 2):
        a, b = s.a(n), s.b(n)
        out.update({s.v(n - 1) + 1, a - 1, a})
        for r in range(1, n + 1):
            out.update({r * a, r * a + s.v(n - r), r * a + s.v(n - r) + 1, (r + 1) * a - 1})
        for r in range(n + 1):
            out.update({r * (a + b), n * a + r * b, n * a + r * b + 1, (r + 1) * (a + b) - 1})
    return sorted(i for i in out if 0 <= i <= s.v(2))


def test_closed_form_matches_conjugation_at_boundaries(fixture_schedule, columns):
    for i in _boundaries(fixture_schedule):
        assert columns.s_column_formula(i) == columns.s_column_direct(i), i


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.integers(min_value=0, max_value=21800))
def test_closed_form_matches_conjugation(columns, i):
    assert columns.s_column_formula(i) == columns.s_column_direct(i)


@pytest.mark.parametrize("i", [21801, 21802, (1 << 30) - 2, (1 << 30) - 1, 1 << 30])
def test_closed_form_in_third_generation(columns, i):
    assert columns.s_column_formula(i) == columns.s_column_direct(i)


def test_first_column(columns):
    assert columns.s_column_formula(0) == SparseVec.unit(F, 1, Dyadic(1, Fraction(-1, 2)))


def test_a_boundary_column_with_r_equal_n(columns):
    col = columns.s_column_direct(1800)
    assert col.coefficient(1801) == EPS * Fraction(1, 2)


def test_epsilon_coincidence(columns):
    eps1, eps2 = columns.epsilons(11800)
    assert eps1 == eps2 == EPS
    assert columns.epsilons(11799) is None
    assert columns.epsilons(2800) is None


def test_orbit_relations(columns):
    t_map = columns.column_map(OperatorTag.T)
    s_map = columns.column_map(OperatorTag.S_FORMULA)
    basis = columns.basis
    for i in (0, 3, 4, 327, 328, 899, 1228, 1229, 10899, 11800):
        assert t_map.apply(basis.e_in_f(i)) == basis.e_in_f(i + 1)
        assert s_map.apply(basis.ehat_in_f(i)) == basis.ehat_in_f(i + 1)


def test_diagonal_identity(columns):
    d, dinv = columns.column_map(OperatorTag.D), columns.column_map(OperatorTag.DINV)
    assert d(1800) == SparseVec.unit(F, 1800, Fraction(1, 2))
    for i in (0, 900, 1800, 1229):
        assert d.apply(dinv(i)) == SparseVec.unit(F, i)


def test_apply_power_budget(columns):
    t_map = columns.column_map(OperatorTag.T)
    start = SparseVec.unit(F, 0)
    assert apply_power(t_map, start, 3) == columns.basis.e_in_f(3)
    with pytest.raises(BudgetError):
        apply_power(t_map, start, 5, max_steps=4)
    with pytest.raises(ValueError):
        apply_power(t_map, start, -1)


def test_int_power_of_power_of_two_stays_symbolic():
    d = int_power(1 << 60, 1 << 40)
    assert d == Dyadic(1, 60 << 40)
    assert int_power(10000, 2) == Dyadic(10 ** 8)


@pytest.mark.slow
def test_conjugation_report_over_two_generations(fixture_schedule, columns):
    report = OperatorAnalyzer(fixture_schedule, columns, seed=7).verify_conjugation(0, fixture_schedule.v(2))
    assert report.passed, report.failures
    assert len(report.rows) == 21801
    coincidences = [r for r in report.results if r.name.startswith("epsilon coincidence at")]
    assert [r.name for r in coincidences] == ["epsilon coincidence at i=11800"]


@pytest.mark.slow
def test_norm_bound_on_fixture(fixture_schedule, columns):
    report = OperatorAnalyzer(fixture_schedule, columns).column_norms(0, fixture_schedule.v(2))
    assert report.passed
    (bound,) = [r for r in report.results if r.name == "max column l1 norm <= 2"]
    assert bound.values["argmax"] == "1"
    assert abs(float(bound.values["log2_max"]) - 0.5) < 1e-12


def test_norm_bound_fails_on_naive_schedule(naive_schedule):
    report = OperatorAnalyzer(naive_schedule).column_norms(0, naive_schedule.v(1))
    assert not report.passed
    assert any(row["exceeds_bound"] for row in report.rows)


def test_row_decay(fixture_schedule, columns):
    report = OperatorAnalyzer(fixture_schedule, columns).row_entries(0, 0, fixture_schedule.v(2))
    assert report.passed
    (decay,) = [r for r in report.results if r.name == "row decay across generations"]
    assert decay.status == CheckStatus.PASS
    assert {row["generation"] for row in report.rows} == {1, 2}


def test_row_decay_skips_single_generation(fixture_schedule, columns):
    report = OperatorAnalyzer(fixture_schedule, columns).row_entries(0, 0, 328)
    (decay,) = [r for r in report.results if r.name == "row decay across generations"]
    assert decay.status == CheckStatus.SKIP


def test_standalone_column_helpers(fixture_schedule):
    fresh = OperatorColumns(fixture_schedule)
    assert fresh.t_column(0) == SparseVec.unit(F, 1, Dyadic(1, Fraction(-1, 2)))
