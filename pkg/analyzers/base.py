from loguru import logger

from models.reports import CheckReport, CheckResult, CheckStatus


class CheckCollector:
    """Accumulates numbered check results for one report at a time."""

    prefix = "CHK"

    def __init__(self, schedule_name: str, seed: int | None = None):
        self.schedule_name = schedule_name
        self.seed = seed
        self.results: list[CheckResult] = []
        self._counter = 0

    def _start(self):
        self.results = []
        self._counter = 0

    def _add(self, name: str, status: CheckStatus, detail: str = "", **values):
        self._counter += 1
        result = CheckResult(
            id=f"{self.prefix}-{self._counter:03d}",
            name=name,
            status=status,
            detail=detail,
            values={k: str(v) for k, v in values.items()},
        )
        if status == CheckStatus.FAIL:
            logger.warning(f"{result.id} {name}: {detail}")
        self.results.append(result)
        return result

    def _check(self, name: str, ok: bool, detail: str = "", **values):
        return self._add(name, CheckStatus.PASS if ok else CheckStatus.FAIL, detail, **values)

    def _report(self, name: str, rows=None, csv_columns=None, notes=None) -> CheckReport:
        report = CheckReport(
            name=name,
            schedule=self.schedule_name,
            seed=self.seed,
            results=self.results,
            rows=rows or [],
            csv_columns=csv_columns or [],
            notes=notes or [],
        )
        logger.info(
            f"{name}: {len(report.results)} checks, {len(report.failures)} failed, "
            f"{len(report.skipped)} skipped"
        )
        return report
