from loguru import logger

from analyzers.nonadjoint_analyzer import NonAdjointAnalyzer
from analyzers.operator_analyzer import OperatorAnalyzer
from analyzers.witness_analyzer import WitnessAnalyzer
from core.basis import BasisExpander
from core.errors import ScheduleError, SuiteError
from core.operator import OperatorColumns
from core.schedule import Schedule
from core.witness import WitnessBuilder
from models.reports import CheckReport, RunConfig, SuiteResult
from models.witness import WitnessMode
from reporting.report_writer import ReportWriter

SUITES = ("conjugation", "norms", "rows", "witness", "separation", "nonadjoint")

WITNESS_M0 = 2
TOY_DEPTH = 3
SEPARATION_N = 100
SEPARATION_SAMPLES = 20
NONADJOINT_S_MAX = 1
NONADJOINT_N_MAX = 3


def default_upto(schedule: Schedule) -> int:
    """v_n for the largest n <= 2 whose successor generation is defined.

    Boundary columns of generation n read coefficients of generation n + 1.
    """
    for n in (2, 1):
        if schedule.defined(n + 1):
            return schedule.v(n)
    raise ScheduleError(f"schedule '{schedule.name}' needs at least two generations")


class SuiteService:
    """Runs named groups of checks against one schedule and writes the bundle."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.schedule = Schedule.from_file(config.schedule_path)
        self.basis = BasisExpander(self.schedule)
        self.columns = OperatorColumns(self.schedule, self.basis)
        self.builder = WitnessBuilder(self.schedule, self.basis, config.precision_bits)
        self.witness = WitnessAnalyzer(self.builder, config.precision_bits, config.seed)

    @property
    def upto(self) -> int:
        return default_upto(self.schedule)

    def _operators(self) -> OperatorAnalyzer:
        return OperatorAnalyzer(self.schedule, self.columns, self.config.precision_bits,
                                self.config.seed)

    def _conjugation(self) -> list[CheckReport]:
        return [self._operators().verify_conjugation(0, self.upto)]

    def _norms(self) -> list[CheckReport]:
        return [self._operators().column_norms(0, self.upto)]

    def _rows(self) -> list[CheckReport]:
        return [self._operators().row_entries(0, 0, self.upto)]

    def _witness(self) -> list[CheckReport]:
        strict = self.builder.choose_params(WITNESS_M0, WitnessMode.STRICT, 1)
        toy = self.builder.choose_params(WITNESS_M0, WitnessMode.TOY, TOY_DEPTH)
        _, constant = self.witness.constant_c(strict)
        return [
            constant,
            self.witness.check_prop22(strict),
            self.witness.check_lemma_split(strict, 0),
            self.witness.check_lemma_split(strict, 1),
            self.witness.check_prop22(toy),
            self.witness.check_lemma_split(toy, 1),
        ]

    def _separation(self) -> list[CheckReport]:
        strict = self.builder.choose_params(WITNESS_M0, WitnessMode.STRICT, 1)
        return [self.witness.separation_check(strict, SEPARATION_N, SEPARATION_SAMPLES)]

    def _nonadjoint(self) -> list[CheckReport]:
        analyzer = NonAdjointAnalyzer(self.schedule, self.columns, self.config.precision_bits)
        return [analyzer.nonadjoint_report(NONADJOINT_S_MAX, NONADJOINT_N_MAX)]

    def run(self, name: str) -> SuiteResult:
        if name != "all" and name not in SUITES:
            raise SuiteError(f"unknown suite '{name}'; choose from {', '.join(SUITES + ('all',))}")
        logger.info(f"Suite '{name}' started on schedule '{self.schedule.name}'")
        reports = []
        for part in (SUITES if name == "all" else (name,)):
            reports.extend(getattr(self, f"_{part}")())
        status = 1 if any(not r.passed for r in reports) else 0
        files = ReportWriter(self.config).write(name, status, reports)
        result = SuiteResult(name=name, status=status, reports=reports, files=files)
        logger.info(f"Suite '{name}' finished with status {status}: "
                    f"{len(result.failures)} failed checks")
        return result


def run_suite(name: str, config: RunConfig) -> SuiteResult:
    return SuiteService(config).run(name)
