"""Columns of T, D, D^-1 and S = D^-1 T D over the f-basis."""
from enum import Enum
from fractions import Fraction
from typing import Callable

from config.settings import settings
from core.basis import BasisExpander, BasisSystem, SparseVec
from core.errors import BudgetError, ScheduleError
from core.scalar import Dyadic, ScalarSum, format_int
from core.schedule import Schedule
from models.schedule import RegionCase

F = BasisSystem.F


class OperatorTag(str, Enum):
    T = "T"
    D = "D"
    DINV = "Dinv"
    S_DIRECT = "S_direct"
    S_FORMULA = "S_formula"


def pow2(t: Fraction) -> Dyadic:
    return Dyadic(1, t)


def int_power(base: int, k: int) -> Dyadic:
    """base**k as a monomial without materializing huge powers of two."""
    if base > 0 and base & (base - 1) == 0:
        return Dyadic(1, k * (base.bit_length() - 1))
    return Dyadic(base ** k)


class ColumnMap:
    """An operator given column by column: i -> image of f_i over the f-basis."""

    def __init__(self, tag: OperatorTag, schedule: Schedule, column: Callable[[int], SparseVec]):
        self.tag = tag
        self.schedule = schedule
        self.column = column

    def __call__(self, i: int) -> SparseVec:
        return self.column(i)

    def apply(self, x: SparseVec) -> SparseVec:
        if x.basis != F:
            raise ScheduleError(f"{self.tag.value} acts on f-basis vectors")
        return SparseVec.combine(
            F, ((j, d * c) for i, c in x.items() for j, d in self.column(i).entries.items())
        )

    def __repr__(self) -> str:
        return f"ColumnMap({self.tag.value}, schedule={self.schedule.name})"


def apply_power(op: ColumnMap, x: SparseVec, k: int, max_steps: int | None = None) -> SparseVec:
    if k < 0:
        raise ValueError("power must be nonnegative")
    budget = settings.MAX_POWER_STEPS if max_steps is None else max_steps
    if k > budget:
        raise BudgetError(f"{format_int(k)} applications of {op.tag.value} exceed the budget of {budget}")
    for _ in range(k):
        x = op.apply(x)
    return x


class OperatorColumns:
    def __init__(self, schedule: Schedule, expander: BasisExpander | None = None):
        self.schedule = schedule
        self.basis = expander or BasisExpander(schedule)

    def column_map(self, tag: OperatorTag | str) -> ColumnMap:
        tag = OperatorTag(tag)
        column = {
            OperatorTag.T: self.t_column,
            OperatorTag.D: self.d_column,
            OperatorTag.DINV: self.dinv_column,
            OperatorTag.S_DIRECT: self.s_column_direct,
            OperatorTag.S_FORMULA: self.s_column_formula,
        }[tag]
        return ColumnMap(tag, self.schedule, column)

    # ------------------------------------------------------------------
    # Oracles through the orbit bases
    # ------------------------------------------------------------------

    def t_column(self, i: int) -> SparseVec:
        shifted = self.basis.f_in_e(i).shift(1)
        return self.basis.to_f(shifted)

    def s_column_direct(self, i: int) -> SparseVec:
        shifted = self.basis.f_in_ehat(i).shift(1)
        return self.basis.to_f(shifted)

    def d_column(self, i: int) -> SparseVec:
        return SparseVec.unit(F, i, self.schedule.d_weight(i))

    def dinv_column(self, i: int) -> SparseVec:
        return SparseVec.unit(F, i, 1 / self.schedule.d_weight(i))

    # ------------------------------------------------------------------
    # Closed-form matrix of S
    # ------------------------------------------------------------------

    def _first_of_generation(self, m: int) -> Dyadic:
        """Coefficient of f_(v_(m-1)+1) in ê_(v_(m-1)+1), the first Bfirst index."""
        s = self.schedule
        a, root = s.a(m), s.sqrt_a(m)
        return pow2(Fraction(2 * (s.v(m - 1) + 1) - a, 2 * root))

    def s_column_formula(self, i: int) -> SparseVec:
        s = self.schedule
        region = s.classify(i)
        case = region.case
        if case == RegionCase.ZERO:
            return SparseVec.unit(F, 1, self._first_of_generation(1))

        n, r = region.n, region.r
        a, b = s.a(n), s.b(n)

        if case in (RegionCase.BFIRST, RegionCase.B):
            r = 0 if case == RegionCase.BFIRST else r
            root = s.sqrt_a(n)
            if i < (r + 1) * a - 1:
                return SparseVec.unit(F, i + 1, pow2(Fraction(1, root)))
            lead = pow2(Fraction(2 - a, 2 * root))
            return SparseVec.combine(F, [
                (0, lead),
                ((r + 1) * a, lead * Fraction(r + 1, s.a(n - r - 1))),
            ])

        if case == RegionCase.A:
            back = s.v(n - r)
            if i < r * a + back:
                return SparseVec.unit(F, i + 1)
            if r < n:
                eps1 = pow2(Fraction(2 * (1 + back) - a, 2 * s.sqrt_a(n)))
            else:
                eps1 = pow2(Fraction(2 * (1 + n * a) - b, 2 * s.sqrt_b(n)))
            eps2 = self._first_of_generation(n - r + 1)
            c = Fraction(s.a(n - r), r)
            return SparseVec.combine(F, [(i + 1, eps1 * c), (back + 1, -(eps2 * c))])

        if case == RegionCase.C:
            if i < n * a + r * b:
                return SparseVec.unit(F, i + 1)
            eps2 = pow2(Fraction(2 * (1 + n * a) - b, 2 * s.sqrt_b(n)))
            eps1 = eps2 if r < n else self._first_of_generation(n + 1)
            return SparseVec.combine(F, [(i + 1, eps1), (i + 1 - b, -(eps2 * b))])

        root = s.sqrt_b(n)
        if i < (r + 1) * (a + b) - 1:
            return SparseVec.unit(F, i + 1, pow2(Fraction(1, root)))
        lead = pow2(Fraction(2 - 2 * (r + 1) * a - b, 2 * root))
        pairs = [(i + 1 - j * b, lead * int_power(b, j)) for j in range(r + 1)]
        far = lead * int_power(b, r + 1)
        pairs.append((0, far))
        pairs.append(((r + 1) * a, far * Fraction(r + 1, s.a(n - r - 1))))
        return SparseVec.combine(F, pairs)

    def epsilons(self, i: int) -> tuple[ScalarSum, ScalarSum] | None:
        """(eps1, eps2) of a C-boundary column i = n a_n + r b_n, read off the ê expansions.

        eps1 is the coefficient of f_(i+1) in ê_(i+1), eps2 that of f_(i+1-b_n)
        in ê_(i+1-b_n).
        """
        s = self.schedule
        region = s.classify(i)
        if region.case != RegionCase.C:
            return None
        n, r = region.n, region.r
        a, b = s.a(n), s.b(n)
        if i != n * a + r * b:
            return None
        eps1 = self.basis.ehat_in_f(i + 1).coefficient(i + 1)
        eps2 = self.basis.ehat_in_f(i + 1 - b).coefficient(i + 1 - b)
        return eps1, eps2


def t_column(i: int, s: Schedule) -> SparseVec:
    return OperatorColumns(s).t_column(i)


def s_column_direct(i: int, s: Schedule) -> SparseVec:
    return OperatorColumns(s).s_column_direct(i)


def s_column_formula(i: int, s: Schedule) -> SparseVec:
    return OperatorColumns(s).s_column_formula(i)
