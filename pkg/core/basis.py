"""Finitely supported vectors over the f-, e- and ê-systems and the exact
conversions among them."""
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import mpmath as mp
from loguru import logger

from config.settings import settings
from core.errors import BasisError
from core.scalar import (
    DEFAULT_PRECISION, Dyadic, Magnitude, ScalarSum, evaluate, format_int, parse_scalar,
)
from core.schedule import Schedule
from models.schedule import Region, RegionCase


class BasisSystem(str, Enum):
    F = "f"
    E = "e"
    EHAT = "ehat"


def _scalar(value) -> ScalarSum:
    if isinstance(value, ScalarSum):
        return value
    if isinstance(value, Dyadic):
        return ScalarSum((value,))
    return ScalarSum.of(value)


class SparseVec:
    __slots__ = ("basis", "entries")

    def __init__(self, basis: BasisSystem, entries: dict[int, ScalarSum] | None = None):
        self.basis = BasisSystem(basis)
        clean = {}
        for i, c in (entries or {}).items():
            if i < 0:
                raise BasisError(f"negative index {i}")
            c = _scalar(c)
            if not c.is_zero:
                clean[i] = c
        self.entries: dict[int, ScalarSum] = clean

    @classmethod
    def unit(cls, basis: BasisSystem, i: int, coeff=1) -> "SparseVec":
        return cls(basis, {i: _scalar(coeff)})

    @classmethod
    def zero(cls, basis: BasisSystem) -> "SparseVec":
        return cls(basis)

    @classmethod
    def combine(cls, basis: BasisSystem, pairs: Iterable[tuple[int, object]]) -> "SparseVec":
        acc: dict[int, ScalarSum] = {}
        for i, c in pairs:
            acc[i] = acc.get(i, ScalarSum.zero()) + _scalar(c)
        return cls(basis, acc)

    @property
    def support(self) -> list[int]:
        return sorted(self.entries)

    @property
    def is_zero(self) -> bool:
        return not self.entries

    @property
    def min_support(self) -> int | None:
        return min(self.entries) if self.entries else None

    @property
    def max_support(self) -> int | None:
        return max(self.entries) if self.entries else None

    def coefficient(self, i: int) -> ScalarSum:
        return self.entries.get(i, ScalarSum.zero())

    def items(self) -> list[tuple[int, ScalarSum]]:
        return sorted(self.entries.items())

    def _check_same(self, other: "SparseVec"):
        if self.basis != other.basis:
            raise BasisError(f"cannot mix {self.basis.value} and {other.basis.value} vectors")

    def __add__(self, other: "SparseVec") -> "SparseVec":
        self._check_same(other)
        acc = dict(self.entries)
        for i, c in other.entries.items():
            acc[i] = acc.get(i, ScalarSum.zero()) + c
        return SparseVec(self.basis, acc)

    def __neg__(self) -> "SparseVec":
        return SparseVec(self.basis, {i: -c for i, c in self.entries.items()})

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + (-other)

    def scale(self, factor) -> "SparseVec":
        factor = _scalar(factor)
        return SparseVec(self.basis, {i: c * factor for i, c in self.entries.items()})

    def shift(self, k: int) -> "SparseVec":
        return SparseVec(self.basis, {i + k: c for i, c in self.entries.items()})

    def restrict(self, keep: Callable[[int], bool]) -> "SparseVec":
        return SparseVec(self.basis, {i: c for i, c in self.entries.items() if keep(i)})

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return self.basis == other.basis and self.entries == other.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        body = "; ".join(f"({i}, {c})" for i, c in self.items())
        return f"{self.basis.value}[{body}]"

    def __repr__(self) -> str:
        return f"SparseVec({self})"


def format_vector(x: SparseVec) -> str:
    return str(x)


def parse_vector(text: str) -> SparseVec:
    text = text.strip()
    tag, _, rest = text.partition("[")
    if not rest.endswith("]"):
        raise ValueError(f"Not a vector rendering: {text!r}")
    body = rest[:-1].strip()
    entries = {}
    if body:
        for chunk in body.split("; "):
            chunk = chunk.strip()
            if not (chunk.startswith("(") and chunk.endswith(")")):
                raise ValueError(f"Bad vector entry: {chunk!r}")
            index, _, coeff = chunk[1:-1].partition(", ")
            entries[int(index)] = parse_scalar(coeff)
    return SparseVec(BasisSystem(tag), entries)


class BasisExpander:
    """Exact f <-> e and f <-> ê conversions for one schedule."""

    def __init__(self, schedule: Schedule, cache_size: int | None = None):
        self.schedule = schedule
        size = cache_size or settings.BASIS_CACHE_SIZE
        self.e_in_f = lru_cache(maxsize=size)(self._e_in_f)
        self.ehat_in_f = lru_cache(maxsize=size)(self._ehat_in_f)

    # ------------------------------------------------------------------
    # Coefficients
    # ------------------------------------------------------------------

    def _center_exponent(self, region: Region, i: int) -> Fraction:
        """(h - i)/sqrt(a_n) on B regions, (h - i)/sqrt(b_n) on D regions."""
        s = self.schedule
        root = s.sqrt_b(region.n) if region.case == RegionCase.D else s.sqrt_a(region.n)
        twice_h = 2 * region.h
        return Fraction(int(twice_h) - 2 * i, 2 * root)

    def _a_coefficient(self, region: Region, hatted: bool) -> Fraction:
        lower = self.schedule.a(region.n - region.r)
        return Fraction(lower, region.r) if hatted else Fraction(lower)

    # ------------------------------------------------------------------
    # f in terms of e / ê
    # ------------------------------------------------------------------

    def _f_in(self, i: int, hatted: bool) -> SparseVec:
        basis = BasisSystem.EHAT if hatted else BasisSystem.E
        region = self.schedule.classify(i)
        case = region.case
        if case == RegionCase.ZERO:
            return SparseVec.unit(basis, 0)
        if case == RegionCase.A:
            c = self._a_coefficient(region, hatted)
            back = i - region.r * self.schedule.a(region.n)
            return SparseVec(basis, {i: ScalarSum.of(c), back: ScalarSum.of(-c)})
        if case == RegionCase.C:
            b = self.schedule.b(region.n)
            return SparseVec(basis, {i: ScalarSum.one(), i - b: ScalarSum.of(-b)})
        return SparseVec.unit(basis, i, Dyadic(1, self._center_exponent(region, i)))

    def f_in_e(self, i: int) -> SparseVec:
        return self._f_in(i, hatted=False)

    def f_in_ehat(self, i: int) -> SparseVec:
        return self._f_in(i, hatted=True)

    # ------------------------------------------------------------------
    # e / ê in terms of f
    # ------------------------------------------------------------------

    def _expand(self, i: int, hatted: bool) -> SparseVec:
        s = self.schedule
        acc: dict[int, ScalarSum] = {}
        factor = ScalarSum.one()
        j = i
        while True:
            region = s.classify(j)
            case = region.case
            if case == RegionCase.ZERO:
                acc[0] = acc.get(0, ScalarSum.zero()) + factor
                break
            if case == RegionCase.A:
                lower = s.a(region.n - region.r)
                c = Fraction(region.r, lower) if hatted else Fraction(1, lower)
                acc[j] = acc.get(j, ScalarSum.zero()) + factor * c
                j -= region.r * s.a(region.n)
                continue
            if case == RegionCase.C:
                acc[j] = acc.get(j, ScalarSum.zero()) + factor
                b = s.b(region.n)
                factor = factor * b
                j -= b
                continue
            coeff = Dyadic(1, -self._center_exponent(region, j))
            acc[j] = acc.get(j, ScalarSum.zero()) + factor * coeff
            break
        return SparseVec(BasisSystem.F, acc)

    def _e_in_f(self, i: int) -> SparseVec:
        return self._expand(i, hatted=False)

    def _ehat_in_f(self, i: int) -> SparseVec:
        return self._expand(i, hatted=True)

    def to_f(self, x: SparseVec) -> SparseVec:
        """Rewrite any vector over the f-basis."""
        if x.basis == BasisSystem.F:
            return x
        expand = self.ehat_in_f if x.basis == BasisSystem.EHAT else self.e_in_f
        return SparseVec.combine(
            BasisSystem.F,
            ((j, d * c) for i, c in x.items() for j, d in expand(i).entries.items()),
        )

    def max_ehat_norm(self, upto: int, precision_bits: int = DEFAULT_PRECISION) -> tuple[int, Magnitude]:
        """Exhaustive scan of max over l <= upto of ||ê_l||, with the attaining index."""
        best_index, best = 0, Magnitude.zero(precision_bits)
        for ell in range(upto + 1):
            value = norm_l1(self.ehat_in_f(ell), precision_bits)
            if value > best:
                best_index, best = ell, value
        logger.debug(f"max ||ê_l|| for l <= {upto}: {best} at l={best_index}")
        return best_index, best


def norm_l1(x: SparseVec, precision_bits: int = DEFAULT_PRECISION) -> Magnitude:
    if x.basis != BasisSystem.F:
        raise BasisError(f"l1 norm is taken over the f-basis, got a {x.basis.value}-vector")
    return Magnitude.total((c.magnitude(precision_bits) for c in x.entries.values()), precision_bits)


def summarize_vector(x: SparseVec, precision_bits: int = DEFAULT_PRECISION) -> str:
    """Readable rendering for vectors whose indices or exponents are too large to print."""
    body = "; ".join(
        f"({format_int(i)}, ~{mp.nstr(evaluate(c, precision_bits), 8)})" for i, c in x.items()
    )
    return f"{x.basis.value}[{body}]"
