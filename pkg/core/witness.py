"""Level sequences m_i, r_i, j_i, p_i and the vectors z_i, x_i approaching the
witness x_inf = ê_(j_0) + sum_i p_i z_i."""
import math
from fractions import Fraction

import mpmath as mp
from loguru import logger

from core.basis import BasisExpander, BasisSystem, SparseVec
from core.errors import ScheduleError, WitnessError
from core.operator import int_power
from core.scalar import DEFAULT_PRECISION, Magnitude
from core.schedule import Schedule
from models.witness import WitnessMode, WitnessParams

F = BasisSystem.F

# Levels of the toy recursion evaluated explicitly before the geometric remainder.
_TOY_TAIL_LEVELS = 6


def _log2_int(x: int) -> mp.mpf:
    if x & (x - 1) == 0:
        return mp.mpf(x.bit_length() - 1)
    return mp.log(mp.mpf(x), 2)


class TailBound:
    __slots__ = ("bound", "levels", "complete", "note")

    def __init__(self, bound: Magnitude, levels: list[int], complete: bool, note: str = ""):
        self.bound = bound
        self.levels = levels
        self.complete = complete
        self.note = note

    def __repr__(self) -> str:
        return f"TailBound({self.bound}, levels={self.levels}, complete={self.complete})"


class WitnessBuilder:
    def __init__(self, schedule: Schedule, expander: BasisExpander | None = None,
                 precision_bits: int = DEFAULT_PRECISION):
        self.schedule = schedule
        self.basis = expander or BasisExpander(schedule)
        self.precision_bits = max(64, precision_bits)

    # ------------------------------------------------------------------
    # Parameters
    # ------------------------------------------------------------------

    def _strict_r(self, m: int) -> tuple[int, int, Magnitude, Fraction | None]:
        """Smallest admissible r_(i+1) for m_i = m, with the scan that fixes it."""
        s = self.schedule
        index, top = self.basis.max_ehat_norm(s.v(m - 1), self.precision_bits)
        scale = s.a(m - 1)
        if top.exact is not None:
            lower = scale * top.exact
            return math.ceil(lower), index, top, lower
        with mp.workprec(self.precision_bits + 32):
            lower = top.approx() * scale
            slack = lower * mp.power(2, -(self.precision_bits // 2))
            return int(mp.ceil(lower - slack)), index, top, None

    def choose_params(self, m0: int, mode: WitnessMode | str, depth: int,
                      toy_r: int = 2, j0: int | None = None) -> WitnessParams:
        mode = WitnessMode(mode)
        s = self.schedule
        if m0 < 2:
            raise WitnessError(f"m0 must be at least 2, got {m0}")
        if depth < 0:
            raise WitnessError("depth must be nonnegative")
        if mode == WitnessMode.STRICT and depth > 1:
            raise WitnessError(
                "strict mode stops at depth 1: r_2 would have as many digits as a(m_1 - 1)"
            )
        if mode == WitnessMode.TOY and toy_r < 1:
            raise WitnessError("toy r must be positive")

        r0 = 1
        lo = r0 * s.a(m0)
        hi = lo + s.v(m0 - r0)
        if j0 is None:
            j0 = lo
        elif not lo <= j0 <= hi:
            raise WitnessError(f"j0={j0} outside the admissible interval [{lo}, {hi}]")

        m, r, j, p = [m0], [r0], [j0], []
        max_index, max_norm = None, None
        for i in range(depth):
            if mode == WitnessMode.STRICT:
                nxt, max_index, top, _ = self._strict_r(m[i])
                max_norm = str(top)
            else:
                nxt = toy_r
            m_next = m[i] + nxt
            if not s.defined(m_next):
                raise WitnessError(f"schedule '{s.name}' does not reach m={m_next}")
            try:
                j_next = j[i] + r[i] * s.b(m[i]) + nxt * s.a(m_next)
            except ScheduleError as e:
                raise WitnessError(str(e)) from e
            p_prev = p[i - 1] if i else Fraction(1)
            p.append(p_prev / s.b(m[i]) ** r[i])
            m.append(m_next)
            r.append(nxt)
            j.append(j_next)
            logger.debug(f"level {i + 1}: m={m_next}, r={nxt}, j has {j_next.bit_length()} bits")

        params = WitnessParams(
            m0=m0, mode=mode, depth=depth, schedule=s.name,
            m=m, r=r, j=j, p=p,
            toy_r=toy_r if mode == WitnessMode.TOY else None,
            max_norm_index=max_index, max_norm=max_norm,
        )
        logger.info(f"Witness parameters built: mode={mode.value}, depth={depth}, m={m}, r={r}")
        return params

    def r_interval(self, m: int) -> tuple[Fraction | mp.mpf, Fraction | mp.mpf]:
        """[a(m-1) K, 1 + a(m-1) K] with K = max over l <= v(m-1) of ||ê_l||."""
        _, _, top, lower = self._strict_r(m)
        if lower is None:
            with mp.workprec(self.precision_bits + 32):
                lower = top.approx() * self.schedule.a(m - 1)
        return lower, lower + 1

    # ------------------------------------------------------------------
    # Vectors
    # ------------------------------------------------------------------

    @staticmethod
    def _level(i: int, w: WitnessParams, upper: int):
        if not 0 <= i < upper:
            raise WitnessError(f"level {i} is outside the constructed range [0, {upper})")

    def z(self, i: int, w: WitnessParams) -> SparseVec:
        self._level(i, w, w.depth)
        s = self.schedule
        b = s.b(w.m[i])
        pairs = [(w.j[i] + (w.r[i] - k) * b, int_power(b, k)) for k in range(w.r[i])]
        pairs.append((w.j[i + 1], Fraction(w.r[i + 1], s.a(w.m[i]))))
        return SparseVec.combine(F, pairs)

    def z_norm_closed_form(self, i: int, w: WitnessParams) -> Fraction:
        """1 + b + ... + b^(r_i - 1) + r_(i+1)/a(m_i), b = b(m_i)."""
        self._level(i, w, w.depth)
        s = self.schedule
        b = s.b(w.m[i])
        return sum((Fraction(b) ** k for k in range(w.r[i])), Fraction(0)) + Fraction(
            w.r[i + 1], s.a(w.m[i])
        )

    def z_norm_estimate(self, i: int, w: WitnessParams) -> Fraction:
        """m_i b^(r_i - 1) + r_(i+1)/a(m_i)."""
        self._level(i, w, w.depth)
        s = self.schedule
        b = s.b(w.m[i])
        return w.m[i] * Fraction(b) ** (w.r[i] - 1) + Fraction(w.r[i + 1], s.a(w.m[i]))

    def pz_bound(self, i: int, w: WitnessParams) -> Fraction:
        """m_i/b(m_i) + r_(i+1)/(a(m_i) b(m_i)^r_i), dominating ||p_i z_i||."""
        self._level(i, w, w.depth)
        s = self.schedule
        b = s.b(w.m[i])
        return Fraction(w.m[i], b) + Fraction(w.r[i + 1], s.a(w.m[i]) * b ** w.r[i])

    def x_direct(self, i: int, w: WitnessParams) -> SparseVec:
        self._level(i, w, w.depth + 1)
        return self.basis.ehat_in_f(w.j[i]).scale(w.p_before(i))

    def x_series(self, i: int, w: WitnessParams) -> SparseVec:
        self._level(i, w, w.depth + 1)
        x = self.basis.ehat_in_f(w.j[0])
        for k in range(i):
            x = x + self.z(k, w).scale(w.p[k])
        return x

    def x(self, i: int, w: WitnessParams) -> SparseVec:
        direct = self.x_direct(i, w)
        if direct != self.x_series(i, w):
            raise WitnessError(f"x_{i} differs between p_(i-1) ê_(j_i) and the partial series")
        return direct

    # ------------------------------------------------------------------
    # Truncation of x_inf
    # ------------------------------------------------------------------

    def _term_log2(self, m: int, r: int, r_next: int) -> Magnitude:
        s = self.schedule
        prec = self.precision_bits
        with mp.workprec(prec + 32):
            lb, la = _log2_int(s.b(m)), _log2_int(s.a(m))
            first = Magnitude.from_log2(mp.log(m, 2) - lb, prec)
            second = Magnitude.from_log2(mp.log(r_next, 2) - la - r * lb, prec)
        return first + second

    def x_infinity_truncation(self, depth: int, w: WitnessParams) -> tuple[SparseVec, TailBound]:
        if not 0 <= depth <= w.depth:
            raise WitnessError(f"truncation depth {depth} exceeds constructed depth {w.depth}")
        x = self.x_direct(depth, w)
        prec = self.precision_bits
        terms: list[Magnitude] = []
        levels: list[int] = []
        for i in range(depth, w.depth):
            terms.append(self._term_log2(w.m[i], w.r[i], w.r[i + 1]))
            levels.append(i)

        if w.mode == WitnessMode.STRICT:
            m_last = w.m[w.depth]
            with mp.workprec(prec + 32):
                first = Magnitude.from_log2(
                    mp.log(m_last, 2) - _log2_int(self.schedule.b(m_last)), prec
                )
            bound = Magnitude.total(terms + [first], prec)
            note = (f"level {w.depth} onward needs r_{w.depth + 1}, which the strict "
                    f"selection rule makes too large to construct; only m/b(m) of level "
                    f"{w.depth} is included")
            return x, TailBound(bound, levels, complete=False, note=note)

        # toy levels continue with r = toy_r forever; sum a few, then dominate geometrically
        m, r = w.m[w.depth], w.r[w.depth]
        extra: list[Magnitude] = []
        for k in range(_TOY_TAIL_LEVELS):
            if not self.schedule.defined(m + w.toy_r):
                break
            extra.append(self._term_log2(m, r, w.toy_r))
            levels.append(w.depth + k)
            m, r = m + w.toy_r, w.toy_r
        complete = False
        note = "schedule ends before the geometric remainder could be bounded"
        if len(extra) >= 2:
            with mp.workprec(prec + 32):
                ratio_log2 = extra[-1].log2 - extra[-2].log2
                if ratio_log2 < -1:
                    ratio = mp.power(2, ratio_log2)
                    remainder = Magnitude.from_log2(
                        extra[-1].log2 + mp.log(ratio / (1 - ratio), 2), prec
                    )
                    extra.append(remainder)
                    complete = True
                    note = (f"remainder dominated geometrically with ratio 2^({mp.nstr(ratio_log2, 8)})")
        return x, TailBound(Magnitude.total(terms + extra, prec), levels, complete, note)
