import random
from fractions import Fraction

import mpmath as mp
from loguru import logger

from analyzers.base import CheckCollector
from core.basis import BasisSystem, SparseVec, norm_l1
from core.operator import OperatorColumns, OperatorTag, pow2
from core.scalar import DEFAULT_PRECISION, Magnitude, ScalarSum, format_scalar
from core.schedule import Schedule
from models.reports import CheckReport, CheckStatus, ColumnNorm, RowEntry

NORM_BOUND = Fraction(2)


class OperatorAnalyzer(CheckCollector):
    """Checks on the matrix of S over finite index ranges."""

    prefix = "OPS"

    def __init__(self, schedule: Schedule, columns: OperatorColumns | None = None,
                 precision_bits: int = DEFAULT_PRECISION, seed: int = 0):
        super().__init__(schedule.name, seed)
        self.schedule = schedule
        self.columns = columns or OperatorColumns(schedule)
        self.precision_bits = max(64, precision_bits)

    def _generation(self, i: int) -> int:
        return 0 if i == 0 else self.schedule.generation(i)

    # ------------------------------------------------------------------
    # Conjugation
    # ------------------------------------------------------------------

    def verify_conjugation(self, lo: int, hi: int, orbit_samples: int = 64) -> CheckReport:
        self._start()
        logger.info(f"Comparing closed-form and conjugated columns of S on [{lo}, {hi}]")
        cols = self.columns
        rows, mismatches = [], []
        for i in range(lo, hi + 1):
            region = self.schedule.classify(i)
            same = cols.s_column_direct(i) == cols.s_column_formula(i)
            if not same:
                mismatches.append(i)
            rows.append({"i": i, "region": str(region), "match": same})
        self._check(
            "closed form equals D^-1 T D",
            not mismatches,
            f"{len(mismatches)} mismatching columns out of {hi - lo + 1}",
            columns=hi - lo + 1,
            mismatches=len(mismatches),
            first_mismatch=mismatches[0] if mismatches else "",
        )

        d, dinv = cols.column_map(OperatorTag.D), cols.column_map(OperatorTag.DINV)
        broken = []
        for i in range(lo, hi + 1):
            unit = SparseVec.unit(BasisSystem.F, i)
            if d.apply(dinv(i)) != unit or dinv.apply(d(i)) != unit:
                broken.append(i)
        self._check(
            "D Dinv = Dinv D = identity",
            not broken,
            f"{len(broken)} columns fail the diagonal identity",
            first_failure=broken[0] if broken else "",
        )

        self._check_epsilons(lo, hi)
        self._check_orbit(lo, hi, orbit_samples)
        return self._report(
            "conjugation", rows=rows, csv_columns=["i", "region", "match"],
            notes=["S columns compared with exact equality of dyadic sums; no tolerance."],
        )

    def _boundary_columns(self, lo: int, hi: int):
        """C-boundary indices n a_n + r b_n inside [lo, hi], as (i, n, r)."""
        s = self.schedule
        if hi < 1:
            return
        for n in range(self._generation(max(lo, 1)), self._generation(hi) + 1):
            a, b = s.a(n), s.b(n)
            for r in range(1, n + 1):
                i = n * a + r * b
                if lo <= i <= hi:
                    yield i, n, r

    def _check_epsilons(self, lo: int, hi: int):
        s = self.schedule
        seen = 0
        for i, n, r in self._boundary_columns(lo, hi):
            eps1, eps2 = self.columns.epsilons(i)
            if r < n:
                seen += 1
                expected = ScalarSum([pow2(Fraction(2 * (1 + n * s.a(n)) - s.b(n), 2 * s.sqrt_b(n)))])
                self._check(
                    f"epsilon coincidence at i={i}",
                    eps1 == eps2 == expected,
                    f"n={n}, r={r}",
                    eps1=format_scalar(eps1), eps2=format_scalar(eps2),
                )
            else:
                self._add(
                    f"epsilon pair at i={i}", CheckStatus.INFO,
                    f"r = n = {n}: eps1 comes from generation {n + 1}",
                    eps1=format_scalar(eps1), eps2=format_scalar(eps2),
                )
        if not seen:
            self._add("epsilon coincidence", CheckStatus.SKIP,
                      "no boundary column n a_n + r b_n with r < n in range")

    def _check_orbit(self, lo: int, hi: int, samples: int):
        if hi <= lo or samples <= 0:
            self._add("S ê_i = ê_(i+1)", CheckStatus.SKIP, "range too small")
            return
        rng = random.Random(self.seed)
        picks = sorted({lo, hi - 1} | {rng.randrange(lo, hi) for _ in range(samples)})
        s_map = self.columns.column_map(OperatorTag.S_FORMULA)
        basis = self.columns.basis
        bad = [i for i in picks if s_map.apply(basis.ehat_in_f(i)) != basis.ehat_in_f(i + 1)]
        self._check(
            "S ê_i = ê_(i+1)", not bad,
            f"{len(picks)} sampled indices, {len(bad)} failures",
            first_failure=bad[0] if bad else "",
        )

    # ------------------------------------------------------------------
    # Norms and rows
    # ------------------------------------------------------------------

    def column_norms(self, lo: int, hi: int) -> CheckReport:
        self._start()
        prec = self.precision_bits
        bound = Magnitude.from_fraction(NORM_BOUND, prec)
        rows = []
        best_i, best = None, Magnitude.zero(prec)
        for i in range(lo, hi + 1):
            norm = norm_l1(self.columns.s_column_formula(i), prec)
            rows.append(ColumnNorm(
                i=i,
                region=str(self.schedule.classify(i)),
                log2_norm=norm.log2_str(),
                approx=norm.approx_str(),
                exceeds_bound=norm > bound,
            ).model_dump())
            if best_i is None or norm > best:
                best_i, best = i, norm
        if best_i is None:
            self._add("max column l1 norm <= 2", CheckStatus.SKIP, "empty range")
        else:
            self._check(
                "max column l1 norm <= 2",
                not best > bound,
                f"max {best.approx_str()} at i={best_i}",
                argmax=best_i, log2_max=best.log2_str(), max=best.approx_str(),
            )
        return self._report(
            "column_norms", rows=rows,
            csv_columns=["i", "log2_norm", "approx", "exceeds_bound"],
            notes=["On l1 the norm of a finite section equals its largest column l1 norm."],
        )

    def row_entries(self, j: int, lo: int, hi: int) -> CheckReport:
        self._start()
        prec = self.precision_bits
        rows = []
        per_generation: dict[int, Magnitude] = {}
        for i in range(lo, hi + 1):
            c = self.columns.s_column_formula(i).coefficient(j)
            if c.is_zero:
                continue
            mag = c.magnitude(prec)
            n = self._generation(i)
            rows.append(RowEntry(
                i=i, generation=n, coefficient=format_scalar(c), log2_abs=mag.log2_str(),
            ).model_dump())
            if n not in per_generation or mag > per_generation[n]:
                per_generation[n] = mag

        generations = sorted(per_generation)
        for n in generations:
            self._add(f"row {j} max in generation {n}", CheckStatus.INFO,
                      log2_max=per_generation[n].log2_str(), max=per_generation[n].approx_str())
        if len(generations) < 2:
            self._add("row decay across generations", CheckStatus.SKIP,
                      f"entries found in {len(generations)} generation(s)")
        else:
            with mp.workprec(prec):
                margins = [per_generation[p].log2 - per_generation[q].log2
                           for p, q in zip(generations, generations[1:])]
                self._check(
                    "row decay across generations",
                    all(m > 0 for m in margins),
                    "largest entry per generation strictly decreases",
                    log2_margins=", ".join(mp.nstr(m, 10) for m in margins),
                )
        return self._report(
            f"rows_{j}", rows=rows,
            csv_columns=["i", "coefficient", "log2_abs", "generation"],
            notes=["Per-generation maxima stand in for the limit of the row entries."],
        )
