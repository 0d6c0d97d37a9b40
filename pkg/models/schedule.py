import re
from enum import Enum
from fractions import Fraction
from typing import Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator

_POWER_RE = re.compile(r"^\s*2\s*\^\s*(\d+)\s*$")


def parse_entry(value) -> int:
    """Schedule entries are written either in decimal or as ``2^k``."""
    if isinstance(value, bool):
        raise ValueError("schedule entries must be integers")
    if isinstance(value, int):
        return value
    text = str(value).strip()
    match = _POWER_RE.match(text)
    if match:
        return 1 << int(match.group(1))
    if text.isdigit():
        return int(text)
    raise ValueError(f"unreadable schedule entry: {value!r}")


class TailFormula(BaseModel):
    """a_n = 2^(2(n+c)^2 alpha), b_n = 2^(2(n+c)^2 alpha + 2(n+c) beta) beyond the head."""
    model_config = ConfigDict(frozen=True)

    alpha: int = Field(1, ge=1)
    beta: int = Field(1, ge=1)
    offset: int = Field(0, ge=0)

    def a_exponent(self, n: int) -> int:
        return 2 * (n + self.offset) ** 2 * self.alpha

    def b_exponent(self, n: int) -> int:
        return self.a_exponent(n) + 2 * (n + self.offset) * self.beta


class ScheduleSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    head: list[tuple[int, int]] = Field(default_factory=list)
    tail: Optional[TailFormula] = None
    square_flag: bool = True

    @field_validator("head", mode="before")
    @classmethod
    def _parse_head(cls, value):
        pairs = []
        for pair in value or []:
            if len(pair) != 2:
                raise ValueError(f"head entries are [a, b] pairs, got {pair!r}")
            pairs.append((parse_entry(pair[0]), parse_entry(pair[1])))
        return pairs

    @field_validator("head")
    @classmethod
    def _positive(cls, value):
        for a, b in value:
            if a <= 0 or b <= 0:
                raise ValueError("schedule entries must be positive")
        return value


class RegionCase(str, Enum):
    ZERO = "Zero"
    BFIRST = "Bfirst"
    A = "A"
    B = "B"
    C = "C"
    D = "D"


class Region(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    case: RegionCase
    n: int = 0
    r: Optional[int] = None
    h: Optional[Fraction] = None

    def __str__(self) -> str:
        if self.case == RegionCase.ZERO:
            return "Zero"
        parts = [f"n={self.n}"]
        if self.r is not None:
            parts.append(f"r={self.r}")
        if self.h is not None:
            parts.append(f"h={self.h}")
        return f"{self.case.value}({', '.join(parts)})"


class ScheduleCheck(BaseModel):
    name: str
    passed: bool
    witness_n: Optional[int] = None
    detail: str = ""


class ScheduleValidation(BaseModel):
    schedule: str
    horizon: int
    checks: list[ScheduleCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]
