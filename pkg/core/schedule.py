from fractions import Fraction
from functools import lru_cache
from math import isqrt
from pathlib import Path

from loguru import logger

from core.errors import ScheduleError
from core.scalar import format_int
from models.schedule import (
    Region, RegionCase, ScheduleCheck, ScheduleSpec, ScheduleValidation,
)

_ZERO = Region(case=RegionCase.ZERO)


class Schedule:
    """The interleaved sequence (a_1, b_1, a_2, b_2, ...) and its index regions.

    Generation n owns the indices (v_{n-1}, v_n] with v_n = n(a_n + b_n),
    v_0 = 0 and a_0 = 1.
    """

    def __init__(self, spec: ScheduleSpec, source: bytes | None = None):
        self.spec = spec
        self.source = source
        self.head_len = len(spec.head)
        self.v = lru_cache(maxsize=8192)(self._v)

    @classmethod
    def from_file(cls, path: str | Path) -> "Schedule":
        path = Path(path)
        if not path.exists():
            raise ScheduleError(f"Schedule descriptor not found: {path}")
        raw = path.read_bytes()
        try:
            spec = ScheduleSpec.model_validate_json(raw)
        except ValueError as e:
            raise ScheduleError(f"Malformed schedule descriptor {path}: {e}") from e
        logger.debug(f"Loaded schedule '{spec.name}' from {path} ({len(spec.head)} head pairs)")
        return cls(spec, raw)

    @property
    def name(self) -> str:
        return self.spec.name

    # ------------------------------------------------------------------
    # Entries
    # ------------------------------------------------------------------

    def defined(self, n: int) -> bool:
        return n >= 0 and (n <= self.head_len or self.spec.tail is not None)

    def _require(self, n: int):
        if n < 0:
            raise ScheduleError(f"negative generation index {format_int(n)}")
        if not self.defined(n):
            raise ScheduleError(
                f"schedule '{self.name}' is undefined at n={format_int(n)} (head has {self.head_len} pairs, no tail)"
            )

    def a(self, n: int) -> int:
        if n == 0:
            return 1
        self._require(n)
        if n <= self.head_len:
            return self.spec.head[n - 1][0]
        return 1 << self.spec.tail.a_exponent(n)

    def b(self, n: int) -> int:
        if n < 1:
            raise ScheduleError("b_n is defined for n >= 1 only")
        self._require(n)
        if n <= self.head_len:
            return self.spec.head[n - 1][1]
        return 1 << self.spec.tail.b_exponent(n)

    def _v(self, n: int) -> int:
        if n == 0:
            return 0
        return n * (self.a(n) + self.b(n))

    def sqrt_a(self, n: int) -> int:
        if n == 0:
            return 1
        if n > self.head_len:
            self._require(n)
            return 1 << (self.spec.tail.a_exponent(n) // 2)
        return _exact_sqrt(self.a(n), f"a_{n}")

    def sqrt_b(self, n: int) -> int:
        if n > self.head_len:
            self._require(n)
            return 1 << (self.spec.tail.b_exponent(n) // 2)
        return _exact_sqrt(self.b(n), f"b_{n}")

    def is_square(self, n: int) -> tuple[bool, bool]:
        if n > self.head_len:
            tail = self.spec.tail
            return tail.a_exponent(n) % 2 == 0, tail.b_exponent(n) % 2 == 0
        a, b = self.a(n), self.b(n)
        return isqrt(a) ** 2 == a, isqrt(b) ** 2 == b

    # ------------------------------------------------------------------
    # Regions
    # ------------------------------------------------------------------

    def generation(self, i: int) -> int:
        """The n with v_{n-1} < i <= v_n, for i >= 1."""
        if i < 1:
            raise ScheduleError(f"index {format_int(i)} has no generation")
        hi = 1
        while True:
            if not self.defined(hi):
                last = self.head_len
                if last == 0 or self.v(last) < i:
                    raise ScheduleError(
                        f"index {format_int(i)} is beyond the definable range of schedule '{self.name}'"
                    )
                hi = last
                break
            if self.v(hi) >= i:
                break
            hi *= 2
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.v(mid) >= i:
                hi = mid
            else:
                lo = mid
        return hi

    def classify(self, i: int) -> Region:
        if i < 0:
            raise ScheduleError(f"negative index {format_int(i)}")
        if i == 0:
            return _ZERO
        n = self.generation(i)
        a, b = self.a(n), self.b(n)
        if i < a:
            return Region(case=RegionCase.BFIRST, n=n, h=Fraction(a, 2))
        if i <= n * a:
            q = i // a
            if i - q * a <= self.v(n - q):
                return Region(case=RegionCase.A, n=n, r=q)
            return Region(case=RegionCase.B, n=n, r=q, h=Fraction(2 * q + 1, 2) * a)
        q = i // (a + b)
        if q >= 1 and i <= n * a + q * b:
            return Region(case=RegionCase.C, n=n, r=q)
        return Region(case=RegionCase.D, n=n, r=q, h=Fraction(2 * q + 1, 2) * b)

    def d_weight(self, i: int) -> Fraction:
        region = self.classify(i)
        if region.case == RegionCase.A:
            return Fraction(1, region.r)
        return Fraction(1)

    def describe(self, n: int) -> list[tuple[str, int, int]]:
        """Closed index intervals of generation n, in order, as (label, first, last)."""
        if n < 1:
            return [("Zero", 0, 0)]
        a, b, prev = self.a(n), self.b(n), self.v(n - 1)
        layout = []
        if prev + 1 <= a - 1:
            layout.append(("Bfirst", prev + 1, a - 1))
        for r in range(1, n + 1):
            layout.append((f"A(r={r})", r * a, r * a + self.v(n - r)))
            if r < n and r * a + self.v(n - r) + 1 <= (r + 1) * a - 1:
                layout.append((f"B(r={r})", r * a + self.v(n - r) + 1, (r + 1) * a - 1))
        for r in range(0, n + 1):
            if r >= 1:
                layout.append((f"C(r={r})", r * (a + b), n * a + r * b))
            if r < n and n * a + r * b + 1 <= (r + 1) * (a + b) - 1:
                layout.append((f"D(r={r})", n * a + r * b + 1, (r + 1) * (a + b) - 1))
        return layout

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def default_horizon(self) -> int:
        return self.head_len + (2 if self.spec.tail is not None else 0)

    def validate(self, horizon: int | None = None) -> ScheduleValidation:
        horizon = self.default_horizon() if horizon is None else horizon
        report = ScheduleValidation(schedule=self.name, horizon=horizon)
        logger.info(f"Validating schedule '{self.name}' up to n={horizon}")
        for n in range(1, horizon + 1):
            if not self.defined(n):
                report.checks.append(ScheduleCheck(
                    name="defined", passed=False, witness_n=n,
                    detail=f"no entry for n={n}",
                ))
                break
            a, b = self.a(n), self.b(n)
            previous_b = self.b(n - 1) if n > 1 else 0
            checks = [
                ScheduleCheck(
                    name="strictly increasing", passed=previous_b < a < b, witness_n=n,
                    detail=f"b_{n - 1} < a_{n} < b_{n}" if n > 1 else f"0 < a_1 < b_1",
                ),
                ScheduleCheck(
                    name="a_n > v_(n-1)", passed=a > self.v(n - 1), witness_n=n,
                    detail=f"v_{n - 1} = {format_int(self.v(n - 1))}",
                ),
                ScheduleCheck(
                    name="b_n > (n-1) a_n", passed=b > (n - 1) * a, witness_n=n,
                ),
            ]
            if self.spec.square_flag:
                sq_a, sq_b = self.is_square(n)
                checks.append(ScheduleCheck(
                    name="perfect squares", passed=sq_a and sq_b, witness_n=n,
                    detail="" if sq_a and sq_b else f"a_{n} square: {sq_a}, b_{n} square: {sq_b}",
                ))
            report.checks.extend(checks)
            failed = [c for c in checks if not c.passed]
            if failed:
                logger.warning(f"Schedule '{self.name}' fails '{failed[0].name}' at n={n}")
                break
        return report


def _exact_sqrt(value: int, label: str) -> int:
    root = isqrt(value)
    if root * root != value:
        raise ScheduleError(f"{label} = {format_int(value)} is not a perfect square; exponents would be irrational")
    return root


def v(n: int, s: Schedule) -> int:
    return s.v(n)


def classify(i: int, s: Schedule) -> Region:
    return s.classify(i)


def d_weight(i: int, s: Schedule) -> Fraction:
    return s.d_weight(i)
