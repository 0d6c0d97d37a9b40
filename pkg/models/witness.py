from enum import Enum
from fractions import Fraction
from typing import Optional
from pydantic import BaseModel, ConfigDict, Field


class WitnessMode(str, Enum):
    STRICT = "strict"
    TOY = "toy"


class WitnessParams(BaseModel):
    """Level data of the witness construction.

    m, r and j carry levels 0..depth; p carries levels 0..depth-1 with the
    empty product p_(-1) = 1 available through ``p_before``.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    m0: int = Field(ge=2)
    mode: WitnessMode
    depth: int = Field(ge=0)
    schedule: str
    m: list[int] = Field(default_factory=list)
    r: list[int] = Field(default_factory=list)
    j: list[int] = Field(default_factory=list)
    p: list[Fraction] = Field(default_factory=list)
    toy_r: Optional[int] = None
    max_norm_index: Optional[int] = None
    max_norm: Optional[str] = None

    @property
    def inequality_holds(self) -> bool:
        """Whether the r-selection rule of the strict construction is in force."""
        return self.mode == WitnessMode.STRICT

    def p_before(self, i: int) -> Fraction:
        return Fraction(1) if i == 0 else self.p[i - 1]

    def window(self, i: int, a_of_m: int) -> int:
        """m_i a(m_i) - j_i, the room left for S-powers at level i."""
        return self.m[i] * a_of_m - self.j[i]
