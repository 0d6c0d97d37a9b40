import hashlib
from enum import Enum
from pathlib import Path
from typing import Optional
from pydantic import BaseModel, Field


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"
    INFO = "info"


class OutputFormat(str, Enum):
    RECORDS = "records"
    CSV = "csv"
    BOTH = "both"


class CheckResult(BaseModel):
    id: str
    name: str
    status: CheckStatus
    detail: str = ""
    values: dict[str, str] = Field(default_factory=dict)


class CheckReport(BaseModel):
    name: str
    schedule: str
    seed: Optional[int] = None
    results: list[CheckResult] = Field(default_factory=list)
    rows: list[dict] = Field(default_factory=list)
    csv_columns: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.status != CheckStatus.FAIL for r in self.results)

    @property
    def failures(self):
        return [r for r in self.results if r.status == CheckStatus.FAIL]

    @property
    def skipped(self):
        return [r for r in self.results if r.status == CheckStatus.SKIP]


class ColumnNorm(BaseModel):
    i: int
    region: str
    log2_norm: str
    approx: str
    exceeds_bound: bool


class RowEntry(BaseModel):
    i: int
    generation: int
    coefficient: str
    log2_abs: str


class NonAdjointRow(BaseModel):
    s: int
    n: int
    delta: str
    log2_delta: str
    analytic: str
    analytic_log2: str
    f_norm: int = 1
    limit_norm: int
    identity_exact: bool
    agrees: bool

    @property
    def gap(self) -> bool:
        return self.limit_norm > self.f_norm


class RunConfig(BaseModel):
    schedule_path: Path
    precision_bits: int = Field(200, ge=64)
    seed: int = 0
    out_dir: Path = Path("out")
    output_format: OutputFormat = OutputFormat.BOTH

    def fingerprint(self) -> str:
        return hashlib.sha256(self.schedule_path.read_bytes()).hexdigest()

    def header(self) -> dict:
        return {
            "record": "header",
            "schedule_path": self.schedule_path.as_posix(),
            "schedule_sha256": self.fingerprint(),
            "precision_bits": self.precision_bits,
            "seed": self.seed,
            "output_format": self.output_format.value,
        }


class SuiteResult(BaseModel):
    name: str
    status: int
    reports: list[CheckReport] = Field(default_factory=list)
    files: list[str] = Field(default_factory=list)

    @property
    def failures(self):
        return [f for r in self.reports for f in r.failures]
