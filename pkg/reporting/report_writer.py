import io
import json
import os
import tempfile
from pathlib import Path

import pandas as pd
from loguru import logger

from models.reports import CheckReport, OutputFormat, RunConfig


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, default=str)


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp",
        delete=False, encoding="utf-8", newline="",
    ) as handle:
        tmp = Path(handle.name)
        try:
            handle.write(text)
        except BaseException:
            handle.close()
            tmp.unlink(missing_ok=True)
            raise
    try:
        os.replace(tmp, path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise


class ReportWriter:
    """Writes one suite bundle: <out>/<suite>/<report>.jsonl|.csv and summary.jsonl."""

    def __init__(self, config: RunConfig):
        self.config = config

    def records(self, report: CheckReport) -> str:
        lines = [_dumps({"record": "check", "report": report.name,
                         **r.model_dump(mode="json")}) for r in report.results]
        lines += [_dumps({"record": "row", "report": report.name, **row}) for row in report.rows]
        lines += [_dumps({"record": "note", "report": report.name, "text": n}) for n in report.notes]
        return "\n".join(lines) + "\n"

    def table(self, report: CheckReport) -> str:
        frame = pd.DataFrame(report.rows, columns=report.csv_columns or None)
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()

    def summary(self, suite: str, status: int, reports: list[CheckReport]) -> str:
        lines = [_dumps(self.config.header())]
        for r in reports:
            lines.append(_dumps({
                "record": "report",
                "name": r.name,
                "schedule": r.schedule,
                "seed": r.seed,
                "checks": len(r.results),
                "failed": len(r.failures),
                "skipped": len(r.skipped),
                "passed": r.passed,
            }))
        lines.append(_dumps({"record": "suite", "name": suite, "status": status}))
        return "\n".join(lines) + "\n"

    def write(self, suite: str, status: int, reports: list[CheckReport]) -> list[str]:
        folder = Path(self.config.out_dir) / suite
        fmt = self.config.output_format
        files = []
        for report in reports:
            if fmt in (OutputFormat.RECORDS, OutputFormat.BOTH):
                path = folder / f"{report.name}.jsonl"
                atomic_write(path, self.records(report))
                files.append(str(path))
            if fmt in (OutputFormat.CSV, OutputFormat.BOTH) and report.rows:
                path = folder / f"{report.name}.csv"
                atomic_write(path, self.table(report))
                files.append(str(path))
        path = folder / "summary.jsonl"
        atomic_write(path, self.summary(suite, status, reports))
        files.append(str(path))
        logger.info(f"Report bundle written: {len(files)} files in {folder}")
        return files
