from fractions import Fraction

import mpmath as mp
from loguru import logger

from analyzers.base import CheckCollector
from core.basis import BasisSystem, SparseVec, norm_l1
from core.errors import ScheduleError
from core.operator import OperatorColumns, OperatorTag, apply_power
from core.scalar import DEFAULT_PRECISION, Dyadic, Magnitude, ScalarSum
from core.schedule import Schedule
from models.reports import CheckReport, CheckStatus, NonAdjointRow

F = BasisSystem.F

EQUIVALENT_NORMS_NOTE = (
    "Passing to an equivalent norm does not rescue T: for any constant K the "
    "same family of vectors f_((n-s) a_n), with s chosen so that a_s exceeds K, "
    "keeps the gap between the limit norm and the norms along the sequence. "
    "Nothing beyond the table below is computed for this."
)

TOPOLOGY_NOTE = (
    "Computed here: the exact residual T^(v_s+1) f_((n-s) a_n) + a_s e_(v_s+1) and its "
    "l1 norm, and the norm gap 1 versus a_s. Not computed: the weak-star limit "
    "itself, compactness and semicontinuity of the predual topology."
)


class NonAdjointAnalyzer(CheckCollector):
    """Residual norms behind the argument that T has no predual."""

    prefix = "ADJ"

    def __init__(self, schedule: Schedule, columns: OperatorColumns | None = None,
                 precision_bits: int = DEFAULT_PRECISION):
        super().__init__(schedule.name)
        self.schedule = schedule
        self.columns = columns or OperatorColumns(schedule)
        self.precision_bits = max(64, precision_bits)

    def analytic(self, s_: int, n: int) -> Dyadic:
        """a_s 2^((1 + v_s - a_n/2)/sqrt(a_n))."""
        s = self.schedule
        return Dyadic(s.a(s_), Fraction(2 * (1 + s.v(s_)) - s.a(n), 2 * s.sqrt_a(n)))

    def row(self, s_: int, n: int, max_steps: int | None = None) -> tuple[NonAdjointRow, Magnitude]:
        s = self.schedule
        prec = self.precision_bits
        t_map = self.columns.column_map(OperatorTag.T)
        start = (n - s_) * s.a(n)
        steps = s.v(s_) + 1
        image = apply_power(t_map, SparseVec.unit(F, start), steps, max_steps)
        residual = image + self.columns.basis.e_in_f(steps).scale(s.a(s_))
        expected = self.columns.basis.e_in_f(start + steps).scale(s.a(s_))
        analytic = self.analytic(s_, n)
        delta = norm_l1(residual, prec)
        analytic_mag = ScalarSum([analytic]).magnitude(prec)
        row = NonAdjointRow(
            s=s_, n=n,
            delta=delta.approx_str(20),
            log2_delta=delta.log2_str(),
            analytic=str(analytic),
            analytic_log2=analytic_mag.log2_str(),
            limit_norm=s.a(s_),
            identity_exact=residual == expected,
            agrees=residual == SparseVec.unit(F, start + steps, analytic),
        )
        logger.debug(f"residual row s={s_}, n={n}: log2 delta {row.log2_delta}")
        return row, delta

    def nonadjoint_report(self, s_max: int, n_max: int, max_steps: int | None = None) -> CheckReport:
        self._start()
        if not 1 <= s_max < n_max:
            raise ScheduleError(f"need 1 <= s_max < n_max, got s_max={s_max}, n_max={n_max}")
        if not self.schedule.defined(n_max):
            raise ScheduleError(f"schedule '{self.schedule.name}' does not define n={n_max}")
        logger.info(f"Residual table for s <= {s_max}, n <= {n_max}")
        rows = []
        for s_ in range(1, s_max + 1):
            deltas: list[tuple[int, Magnitude]] = []
            for n in range(s_ + 1, n_max + 1):
                row, delta = self.row(s_, n, max_steps)
                deltas.append((n, delta))
                record = row.model_dump()
                record["gap"] = row.gap
                rows.append(record)
                self._check(
                    f"residual identity s={s_}, n={n}", row.identity_exact,
                    "T^(v_s+1) f + a_s e_(v_s+1) = a_s e_((n-s) a_n + v_s + 1)",
                )
                self._check(
                    f"closed form s={s_}, n={n}", row.agrees,
                    f"delta = {row.analytic}", log2_delta=row.log2_delta,
                )
            if len(deltas) > 1:
                self._check(
                    f"delta decreasing in n for s={s_}",
                    all(later < earlier for (_, earlier), (_, later) in zip(deltas, deltas[1:])),
                    values=", ".join(f"n={n}: 2^({d.log2_str(12)})" for n, d in deltas),
                )
            else:
                self._add(f"delta decreasing in n for s={s_}", CheckStatus.SKIP, "single row")
            a_s = self.schedule.a(s_)
            self._check(f"norm gap for s={s_}", a_s > 1,
                        f"||f_((n-s) a_n)|| = 1 while ||a_s e_0|| = {a_s}", limit_norm=a_s)
        return self._report(
            "nonadjoint", rows=rows,
            csv_columns=["s", "n", "log2_delta", "analytic_log2", "gap"],
            notes=[TOPOLOGY_NOTE, EQUIVALENT_NORMS_NOTE],
        )
