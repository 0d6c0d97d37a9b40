from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core.errors import ScheduleError
from core.schedule import Schedule
from models.schedule import RegionCase, ScheduleSpec, parse_entry


def _label(region):
    if region.case == RegionCase.BFIRST:
        return "Bfirst"
    return f"{region.case.value}(r={region.r})"


def test_parse_entry_accepts_powers_of_two():
    assert parse_entry("2^30") == 1 << 30
    assert parse_entry(" 2 ^ 4 ") == 16
    assert parse_entry("900") == 900
    with pytest.raises(ValueError):
        parse_entry("2**30")


def test_fixture_entries(fixture_schedule):
    s = fixture_schedule
    assert [s.a(n) for n in range(1, 4)] == [4, 900, 1 << 30]
    assert [s.b(n) for n in range(1, 4)] == [324, 10000, 1 << 36]
    assert s.a(4) == 1 << 50
    assert s.b(4) == 1 << 60
    assert s.v(1) == 328
    assert s.v(2) == 21800
    assert s.sqrt_a(2) == 30
    assert s.sqrt_b(4) == 1 << 30


def test_fixture_validates(fixture_schedule):
    result = fixture_schedule.validate()
    assert result.passed, result.failures


@pytest.mark.parametrize("i, case, n, r, h", [
    (0, RegionCase.ZERO, 0, None, None),
    (1, RegionCase.BFIRST, 1, None, Fraction(2)),
    (4, RegionCase.A, 1, 1, None),
    (5, RegionCase.D, 1, 0, Fraction(162)),
    (328, RegionCase.C, 1, 1, None),
    (1228, RegionCase.A, 2, 1, None),
    (1229, RegionCase.B, 2, 1, Fraction(1350)),
    (1800, RegionCase.A, 2, 2, None),
    (2800, RegionCase.D, 2, 0, Fraction(5000)),
    (11800, RegionCase.C, 2, 1, None),
    (21800, RegionCase.C, 2, 2, None),
])
def test_classify_examples(fixture_schedule, i, case, n, r, h):
    region = fixture_schedule.classify(i)
    assert region.case == case
    assert region.n == n
    assert region.r == r
    assert region.h == h


def test_region_rendering(fixture_schedule):
    assert str(fixture_schedule.classify(1229)) == "B(n=2, r=1, h=1350)"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_layout_tiles_the_generation(fixture_schedule, n):
    s = fixture_schedule
    layout = s.describe(n)
    assert layout[0][1] == s.v(n - 1) + 1
    assert layout[-1][2] == s.v(n)
    for (_, _, last), (_, first, _) in zip(layout, layout[1:]):
        assert first == last + 1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_layout_agrees_with_classify_at_interval_ends(fixture_schedule, n):
    s = fixture_schedule
    for label, first, last in s.describe(n):
        assert _label(s.classify(first)) == label
        assert _label(s.classify(last)) == label


@settings(max_examples=300, deadline=None, derandomize=True)
@given(st.integers(min_value=1, max_value=21800))
def test_classify_is_a_partition(fixture_schedule, i):
    s = fixture_schedule
    region = s.classify(i)
    assert region.n == s.generation(i)
    hits = [label for label, first, last in s.describe(region.n) if first <= i <= last]
    assert hits == [_label(region)]


@settings(max_examples=40, deadline=None, derandomize=True)
@given(st.integers(min_value=3, max_value=6), st.integers(min_value=0, max_value=1 << 20))
def test_huge_indices_classify_through_the_tail(fixture_schedule, n, offset):
    s = fixture_schedule
    i = s.v(n - 1) + 1 + offset
    region = s.classify(i)
    assert region.n == n
    assert region.case == RegionCase.BFIRST


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(st.integers(min_value=3, max_value=8), st.data())
def test_sampled_tail_indices_land_in_their_layout_interval(fixture_schedule, n, data):
    s = fixture_schedule
    label, first, last = data.draw(st.sampled_from(s.describe(n)))
    i = data.draw(st.integers(min_value=first, max_value=last))
    region = s.classify(i)
    assert region.n == n
    assert s.generation(i) == n
    assert _label(region) == label


def test_a_region_at_huge_generation(fixture_schedule):
    s = fixture_schedule
    region = s.classify(3 * s.a(4) + 5)
    assert region.case == RegionCase.A
    assert (region.n, region.r) == (4, 3)


def test_d_weights(fixture_schedule):
    s = fixture_schedule
    assert s.d_weight(1800) == Fraction(1, 2)
    assert s.d_weight(900) == 1
    assert s.d_weight(1229) == 1
    assert s.d_weight(0) == 1


def test_naive_schedule_is_finite(naive_schedule):
    s = naive_schedule
    assert s.v(2) == 2 * (64 + 256)
    with pytest.raises(ScheduleError):
        s.a(3)
    with pytest.raises(ScheduleError):
        s.classify(s.v(2) + 1)


def test_negative_index_rejected(fixture_schedule):
    with pytest.raises(ScheduleError):
        fixture_schedule.classify(-1)
    with pytest.raises(ScheduleError):
        fixture_schedule.generation(0)


def test_non_square_entry(write_schedule):
    s = Schedule.from_file(write_schedule("odd", head=[(5, 324), (900, 10000)]))
    with pytest.raises(ScheduleError):
        s.sqrt_a(1)
    result = s.validate()
    assert not result.passed
    assert result.failures[0].name == "perfect squares"


def test_slow_growth_is_reported(write_schedule):
    s = Schedule.from_file(write_schedule("slow", head=[(4, 16), (16, 64)]))
    result = s.validate()
    assert not result.passed
    assert result.failures[0].witness_n == 2


def test_missing_and_malformed_descriptors(tmp_path):
    with pytest.raises(ScheduleError):
        Schedule.from_file(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"head": [[4]]}')
    with pytest.raises(ScheduleError):
        Schedule.from_file(bad)


def test_spec_reads_power_notation():
    spec = ScheduleSpec.model_validate({"head": [["2^2", 324]]})
    assert spec.head == [(4, 324)]
