from fractions import Fraction

import mpmath as mp
import pytest

from analyzers.witness_analyzer import TOY_MARKER, WitnessAnalyzer
from core.basis import BasisSystem, SparseVec, norm_l1
from core.errors import WitnessError
from models.reports import CheckStatus
from models.witness import WitnessMode

F = BasisSystem.F


@pytest.fixture(scope="module")
def strict(builder):
    return builder.choose_params(2, WitnessMode.STRICT, 1)


@pytest.fixture(scope="module")
def toy(builder):
    return builder.choose_params(2, WitnessMode.TOY, 3)


@pytest.fixture(scope="module")
def analyzer(builder):
    return WitnessAnalyzer(builder, seed=11)


def test_strict_parameters(fixture_schedule, strict):
    s = fixture_schedule
    assert strict.m == [2, 2598]
    assert strict.r == [1, 2596]
    assert strict.j[0] == 900
    assert strict.j[1] == 900 + 10000 + 2596 * s.a(2598)
    assert strict.p == [Fraction(1, 10000)]
    assert strict.max_norm_index == 328
    assert strict.inequality_holds


def test_selection_interval_contains_r(builder, strict):
    lower, upper = builder.r_interval(2)
    assert lower == 2596
    assert upper == 2597


def test_toy_parameters(toy):
    assert toy.m == [2, 4, 6, 8]
    assert toy.r == [1, 2, 2, 2]
    assert toy.j[1] == 900 + 10000 + 2 * (1 << 50)
    assert not toy.inequality_holds


def test_parameter_preconditions(builder):
    with pytest.raises(WitnessError):
        builder.choose_params(1, WitnessMode.TOY, 1)
    with pytest.raises(WitnessError):
        builder.choose_params(2, WitnessMode.STRICT, 2)
    with pytest.raises(WitnessError):
        builder.choose_params(2, WitnessMode.TOY, 1, j0=1229)
    assert builder.choose_params(2, WitnessMode.TOY, 1, j0=1228).j[0] == 1228


def test_x0_is_the_first_hat_vector(builder, toy):
    assert builder.x(0, toy) == SparseVec(F, {0: 1, 900: Fraction(1, 4)})


def test_partial_series_agrees_with_direct_form(builder, toy):
    for i in range(toy.depth + 1):
        assert builder.x_direct(i, toy) == builder.x_series(i, toy)


def test_z_norm_closed_form(builder, toy):
    z0 = builder.z(0, toy)
    assert z0 == SparseVec(F, {10900: 1, toy.j[1]: Fraction(2, 900)})
    assert norm_l1(z0).exact == builder.z_norm_closed_form(0, toy) == 1 + Fraction(2, 900)
    assert builder.z_norm_closed_form(1, toy) <= builder.z_norm_estimate(1, toy)


def test_level_out_of_range(builder, toy):
    with pytest.raises(WitnessError):
        builder.z(3, toy)
    with pytest.raises(WitnessError):
        builder.x_infinity_truncation(4, toy)


def test_strict_tail_bound_is_incomplete(builder, strict):
    x, bound = builder.x_infinity_truncation(1, strict)
    assert x == builder.x_direct(1, strict)
    assert not bound.complete
    assert bound.bound.log2 < 0


def test_toy_tail_bound_is_geometric(builder, toy):
    _, bound = builder.x_infinity_truncation(3, toy)
    assert bound.complete
    assert bound.bound.log2 < -50


def test_prop22_toy(analyzer, toy):
    report = analyzer.check_prop22(toy)
    assert report.name == "prop22_toy"
    assert report.passed, report.failures
    markers = [r for r in report.results if r.detail == TOY_MARKER]
    assert len(markers) == toy.depth


@pytest.mark.slow
def test_prop22_strict(analyzer, strict):
    report = analyzer.check_prop22(strict)
    assert report.passed, report.failures
    (interval,) = [r for r in report.results if r.name == "r_1 in the selection interval"]
    assert interval.status == CheckStatus.PASS


@pytest.mark.slow
def test_constant_c(analyzer, strict):
    solution, report = analyzer.constant_c(strict)
    assert report.passed, report.failures
    with mp.workprec(232):
        assert 0 < solution.approx <= mp.mpf("0.25") + mp.mpf(2) ** -100
        assert abs(solution.certificate.gap) <= mp.mpf(2) ** -100


@pytest.mark.slow
def test_separation(analyzer, strict):
    report = analyzer.separation_check(strict, 30, num_samples=5)
    assert report.passed, report.failures
    assert len(report.rows) == 5
    (tail,) = [r for r in report.results if r.name == "tail beyond constructed depth"]
    assert tail.status == CheckStatus.INFO


def test_separation_needs_a_wide_enough_window(fixture_schedule, analyzer, strict):
    with pytest.raises(WitnessError, match="build level 2 or deeper") as err:
        analyzer.separation_check(strict, 3 * fixture_schedule.a(2598), num_samples=1)
    assert "bits" in str(err.value)


@pytest.mark.slow
def test_lemma_split_strict(analyzer, strict):
    report = analyzer.check_lemma_split(strict, 1)
    assert report.name == "lemma_split_1_strict"
    assert report.passed, report.failures
    assert not report.skipped


@pytest.mark.slow
def test_lemma_split_toy_marks_the_unsatisfied_inequality(analyzer, toy):
    report = analyzer.check_lemma_split(toy, 1)
    assert report.passed, report.failures
    assert {r.detail for r in report.skipped} == {TOY_MARKER}


def test_lemma_split_levels(analyzer, strict, toy):
    base = analyzer.check_lemma_split(strict, 0)
    assert base.results[0].status == CheckStatus.INFO
    with pytest.raises(WitnessError):
        analyzer.check_lemma_split(toy, 2)
