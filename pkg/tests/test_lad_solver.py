from fractions import Fraction
from itertools import combinations

import mpmath as mp
import pytest
from hypothesis import assume, given, settings, strategies as st

from core.basis import BasisSystem, SparseVec
from core.errors import BasisError
from core.lad_solver import LadProblem, lower_bound_distance, solve_lad

F = BasisSystem.F
COORDS = 4

small = st.integers(min_value=-3, max_value=3)
dense = st.lists(small, min_size=COORDS, max_size=COORDS)


def _vec(values):
    return SparseVec(F, {c: v for c, v in enumerate(values) if v})


def _objective(family, target, gamma):
    return sum(abs(Fraction(target[c]) - sum(g * v[c] for g, v in zip(gamma, family)))
               for c in range(COORDS))


def _vertex_oracle(family, target):
    """Minimum over the vertices of the arrangement of residual hyperplanes."""
    k = len(family)
    candidates = [tuple([Fraction(0)] * k)]
    for j in range(k):
        for c in range(COORDS):
            if family[j][c]:
                g = [Fraction(0)] * k
                g[j] = Fraction(target[c], family[j][c])
                candidates.append(tuple(g))
    if k == 2:
        for c1, c2 in combinations(range(COORDS), 2):
            a, b = family[0][c1], family[1][c1]
            c, d = family[0][c2], family[1][c2]
            det = a * d - b * c
            if det:
                g0 = Fraction(target[c1] * d - b * target[c2], det)
                g1 = Fraction(a * target[c2] - c * target[c1], det)
                candidates.append((g0, g1))
    return min(_objective(family, target, g) for g in candidates)


@settings(max_examples=80, deadline=None, derandomize=True)
@given(st.lists(dense, min_size=1, max_size=2), dense)
def test_matches_vertex_enumeration(family, target):
    assume(all(any(v) for v in family))
    solution = solve_lad(LadProblem([_vec(v) for v in family], _vec(target)), 128)
    expected = _vertex_oracle(family, target)
    with mp.workprec(160):
        assert abs(solution.approx - mp.mpf(expected.numerator) / expected.denominator) < mp.mpf(2) ** -60


def test_single_vector_fit():
    family = [SparseVec(F, {0: 2, 1: 1})]
    solution = solve_lad(LadProblem(family, SparseVec.unit(F, 0)))
    with mp.workprec(232):
        assert abs(solution.approx - mp.mpf("0.5")) < mp.mpf(2) ** -100
        assert abs(solution.coefficients[0] - mp.mpf("0.5")) < mp.mpf(2) ** -100
        assert abs(solution.certificate.gap) < mp.mpf(2) ** -100


def test_private_members_are_presolved_away():
    family = [SparseVec.unit(F, 5), SparseVec(F, {0: 1, 1: 1})]
    solution = solve_lad(LadProblem(family, SparseVec.unit(F, 0)))
    assert solution.coefficients[0] == 0
    with mp.workprec(232):
        assert abs(solution.approx - 1) < mp.mpf(2) ** -100


def test_residuals_cover_every_coordinate():
    family = [SparseVec(F, {0: 1, 2: 1}), SparseVec.unit(F, 7)]
    solution = solve_lad(LadProblem(family, SparseVec.unit(F, 0)))
    assert [c for c, _ in solution.residuals] == [0, 2, 7]


def test_rejects_non_f_vectors_and_zero_members():
    with pytest.raises(BasisError):
        LadProblem([SparseVec.unit(BasisSystem.E, 1)], SparseVec.unit(F, 0))
    with pytest.raises(BasisError):
        LadProblem([SparseVec.zero(F)], SparseVec.unit(F, 0))


def test_lower_bound_reads_only_the_target_support():
    x = SparseVec(F, {0: Fraction(1, 4), 9: 100})
    bound = lower_bound_distance(x, SparseVec.unit(F, 0))
    assert bound.exact == Fraction(3, 4)
    with pytest.raises(BasisError):
        lower_bound_distance(SparseVec.unit(BasisSystem.EHAT, 0), SparseVec.unit(F, 0))
