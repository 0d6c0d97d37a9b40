from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core.basis import (
    BasisExpander, BasisSystem, SparseVec, format_vector, norm_l1, parse_vector, summarize_vector,
)
from core.errors import BasisError
from core.scalar import Dyadic, ScalarSum

F, E, EHAT = BasisSystem.F, BasisSystem.E, BasisSystem.EHAT


def _back_to(system, expander, x):
    """Rewrite an f-vector over e or ê using f_in_e / f_in_ehat."""
    convert = expander.f_in_ehat if system == EHAT else expander.f_in_e
    return SparseVec.combine(
        system, ((j, d * c) for i, c in x.items() for j, d in convert(i).entries.items())
    )


@pytest.mark.parametrize("i", [0, 1, 3, 4, 5, 327, 328, 329, 899, 900, 1228, 1229, 1800, 10900, 11800, 21800])
def test_round_trip_at_region_edges(expander, i):
    for system in (E, EHAT):
        assert expander.to_f(_back_to(system, expander, SparseVec.unit(F, i))) == SparseVec.unit(F, i)
        expanded = expander.ehat_in_f(i) if system == EHAT else expander.e_in_f(i)
        assert _back_to(system, expander, expanded) == SparseVec.unit(system, i)


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.integers(min_value=0, max_value=21800))
def test_round_trip_is_identity(expander, i):
    assert _back_to(EHAT, expander, expander.ehat_in_f(i)) == SparseVec.unit(EHAT, i)
    assert _back_to(E, expander, expander.e_in_f(i)) == SparseVec.unit(E, i)


def test_ehat_at_first_a_index_of_generation_two(expander):
    expected = SparseVec(F, {0: ScalarSum.one(), 900: ScalarSum.of(Fraction(1, 4))})
    assert expander.ehat_in_f(900) == expected


def test_c_region_expansion_is_exact(expander):
    x = expander.ehat_in_f(328)
    assert x == SparseVec(F, {328: 1, 4: 324, 0: 324})
    assert norm_l1(x).exact == 649


def test_max_ehat_norm_on_first_generation(expander):
    index, norm = expander.max_ehat_norm(328)
    assert index == 328
    assert norm.exact == 649


def test_b_region_coefficient(expander):
    # f_i = 2^((h - i)/sqrt a_n) ê_i on B regions
    assert expander.f_in_ehat(1229) == SparseVec.unit(EHAT, 1229, Dyadic(1, Fraction(121, 30)))
    assert expander.ehat_in_f(1229) == SparseVec.unit(F, 1229, Dyadic(1, Fraction(-121, 30)))


def test_huge_index_expansion_stays_short(fixture_schedule, expander):
    s = fixture_schedule
    i = 3 * s.a(4) + 5
    x = expander.ehat_in_f(i)
    assert x.max_support == i
    assert len(x) == 2
    assert x.coefficient(i) == ScalarSum.of(Fraction(3, 4))
    assert summarize_vector(x).startswith("f[(5, ~")


def test_summary_abbreviates_astronomical_indices():
    x = SparseVec.unit(F, (1 << 5000) + 3, Fraction(1, 3))
    assert summarize_vector(x).startswith("f[(~2^5000")


def test_vector_text_round_trip(expander):
    for i in (1, 328, 1229, 11801):
        x = expander.ehat_in_f(i)
        assert parse_vector(format_vector(x)) == x


def test_norm_requires_f_basis():
    with pytest.raises(BasisError):
        norm_l1(SparseVec.unit(E, 3))


def test_mixing_bases_is_rejected():
    with pytest.raises(BasisError):
        SparseVec.unit(E, 1) + SparseVec.unit(F, 1)


def test_negative_index_is_rejected():
    with pytest.raises(BasisError):
        SparseVec.unit(F, -1)


def test_zero_coefficients_are_dropped():
    x = SparseVec.combine(F, [(2, 1), (2, -1), (3, 5)])
    assert x.support == [3]
    assert x.min_support == x.max_support == 3


def test_expander_cache_is_bounded(fixture_schedule):
    small = BasisExpander(fixture_schedule, cache_size=8)
    for i in range(50):
        small.ehat_in_f(i)
    assert small.ehat_in_f.cache_info().currsize <= 8
