"""Least-absolute-deviations fits min_g ||target - sum g_j v_j||_1 by a bounded
tableau simplex at mpmath precision, certified through the duality gap."""
from typing import Optional

import mpmath as mp
from loguru import logger

from core.basis import BasisSystem, SparseVec
from core.errors import BasisError, PrecisionError, UnboundedError
from core.scalar import DEFAULT_PRECISION, Magnitude, evaluate


class LadProblem:
    def __init__(self, family: list[SparseVec], target: SparseVec):
        for v in list(family) + [target]:
            if v.basis != BasisSystem.F:
                raise BasisError("LAD problems are posed over the f-basis")
        for k, v in enumerate(family):
            if v.is_zero:
                raise BasisError(f"family member {k} is the zero vector")
        self.family = list(family)
        self.target = target

    @property
    def coordinates(self) -> list[int]:
        coords = set(self.target.entries)
        for v in self.family:
            coords.update(v.entries)
        return sorted(coords)


class LadCertificate:
    __slots__ = ("dual", "primal_value", "dual_value", "gap", "dual_infeasibility")

    def __init__(self, dual, primal_value, dual_value, gap, dual_infeasibility):
        self.dual = dual
        self.primal_value = primal_value
        self.dual_value = dual_value
        self.gap = gap
        self.dual_infeasibility = dual_infeasibility


class LadSolution:
    __slots__ = ("coefficients", "value", "residuals", "certificate", "pivots", "prec")

    def __init__(self, coefficients, value, residuals, certificate, pivots, prec):
        self.coefficients: list[mp.mpf] = coefficients
        self.value: Magnitude = value
        self.residuals: list[tuple[int, mp.mpf]] = residuals
        self.certificate: Optional[LadCertificate] = certificate
        self.pivots: int = pivots
        self.prec: int = prec

    @property
    def approx(self) -> mp.mpf:
        return self.value.approx()


class _Tableau:
    """Equality form  sum_j A[c][j](g+_j - g-_j) + s+_c - s-_c = t_c, all variables >= 0.

    Rows with t_c < 0 are negated so the starting basis is the slack with a +1
    coefficient in every row.
    """

    def __init__(self, matrix: list[list[mp.mpf]], rhs: list[mp.mpf], eps: mp.mpf):
        self.m = len(rhs)
        self.k = len(matrix[0]) if matrix else 0
        self.eps = eps
        self.sign = [1 if t >= 0 else -1 for t in rhs]
        width = 2 * self.k + 2 * self.m
        self.rows: list[list[mp.mpf]] = []
        self.rhs: list[mp.mpf] = []
        self.basis: list[int] = []
        self.start_col: list[int] = []
        zero = mp.mpf(0)
        for c in range(self.m):
            s = self.sign[c]
            row = [zero] * width
            for j in range(self.k):
                row[2 * j] = s * matrix[c][j]
                row[2 * j + 1] = -s * matrix[c][j]
            plus, minus = 2 * self.k + 2 * c, 2 * self.k + 2 * c + 1
            row[plus] = mp.mpf(s)
            row[minus] = mp.mpf(-s)
            start = plus if s > 0 else minus
            self.rows.append(row)
            self.rhs.append(s * rhs[c])
            self.basis.append(start)
            self.start_col.append(start)
        cost = [zero] * (2 * self.k) + [mp.mpf(1)] * (2 * self.m)
        self.cost = cost
        # reduced costs of the starting basis
        self.z = list(cost)
        for c in range(self.m):
            for col in range(width):
                if self.rows[c][col]:
                    self.z[col] -= self.rows[c][col]
        self.objective = mp.fsum(self.rhs)

    def _pivot_col(self) -> int | None:
        for col, value in enumerate(self.z):
            if value < -self.eps:
                return col
        return None

    def _pivot_row(self, col: int) -> int | None:
        best, best_ratio = None, None
        for r in range(self.m):
            a = self.rows[r][col]
            if a <= self.eps:
                continue
            ratio = self.rhs[r] / a
            if (best is None or ratio < best_ratio - self.eps
                    or (abs(ratio - best_ratio) <= self.eps and self.basis[r] < self.basis[best])):
                best, best_ratio = r, ratio
        return best

    def _pivot(self, row: int, col: int):
        pivot = self.rows[row][col]
        prow = [x / pivot for x in self.rows[row]]
        prhs = self.rhs[row] / pivot
        self.rows[row], self.rhs[row] = prow, prhs
        nz = [k for k, x in enumerate(prow) if x]
        for r in range(self.m):
            if r == row:
                continue
            factor = self.rows[r][col]
            if not factor:
                continue
            target = self.rows[r]
            for k in nz:
                target[k] -= factor * prow[k]
            self.rhs[r] -= factor * prhs
        factor = self.z[col]
        for k in nz:
            self.z[k] -= factor * prow[k]
        self.objective += factor * prhs
        self.basis[row] = col

    def solve(self, max_pivots: int) -> int:
        pivots = 0
        while pivots < max_pivots:
            col = self._pivot_col()
            if col is None:
                return pivots
            row = self._pivot_row(col)
            if row is None:
                raise UnboundedError("LAD objective decreases without bound (cannot happen for a norm)")
            self._pivot(row, col)
            pivots += 1
        raise PrecisionError(f"simplex did not terminate within {max_pivots} pivots")

    def primal(self) -> list[mp.mpf]:
        values = [mp.mpf(0)] * len(self.z)
        for r, col in enumerate(self.basis):
            values[col] = self.rhs[r]
        return [values[2 * j] - values[2 * j + 1] for j in range(self.k)]

    def dual(self) -> list[mp.mpf]:
        """Row duals for the original (unnegated) rows."""
        return [self.sign[c] * (self.cost[self.start_col[c]] - self.z[self.start_col[c]])
                for c in range(self.m)]


def _presolve(family: list[SparseVec], target: SparseVec) -> list[int]:
    """Indices of family members that can carry a nonzero coefficient.

    A member whose every coordinate is touched by no other member and by no
    target mass only adds |g_j| * (its own norm) to the objective, so g_j = 0.
    """
    touch: dict[int, int] = {}
    for v in family:
        for i in v.entries:
            touch[i] = touch.get(i, 0) + 1
    keep = []
    for idx, v in enumerate(family):
        private = all(touch[i] == 1 and i not in target.entries for i in v.entries)
        if not private:
            keep.append(idx)
    return keep


def solve_lad(problem: LadProblem, precision_bits: int = DEFAULT_PRECISION,
              max_pivots: int = 100000) -> LadSolution:
    precision_bits = max(64, precision_bits)
    family, target = problem.family, problem.target
    with mp.workprec(precision_bits + 32):
        tolerance = mp.power(2, -(precision_bits // 2))
        eps = mp.power(2, -(precision_bits * 3 // 4))
        keep = _presolve(family, target)
        logger.debug(f"LAD presolve keeps {len(keep)} of {len(family)} family vectors")
        coords = set(target.entries)
        for idx in keep:
            coords.update(family[idx].entries)
        coords = sorted(coords)
        rhs = [evaluate(target.coefficient(c), precision_bits) for c in coords]
        matrix = [[evaluate(family[idx].coefficient(c), precision_bits) for idx in keep]
                  for c in coords]

        if keep and coords:
            tableau = _Tableau(matrix, rhs, eps)
            pivots = tableau.solve(max_pivots)
            reduced = tableau.primal()
            row_dual = tableau.dual()
        else:
            pivots, reduced = 0, []
            row_dual = [mp.sign(t) for t in rhs]

        gamma = [mp.mpf(0)] * len(family)
        for idx, g in zip(keep, reduced):
            gamma[idx] = g

        # independent recomputation over every coordinate, dropped ones included
        all_coords = problem.coordinates
        residuals = []
        for c in all_coords:
            value = evaluate(target.coefficient(c), precision_bits)
            for idx, g in enumerate(gamma):
                if g:
                    value -= g * evaluate(family[idx].coefficient(c), precision_bits)
            residuals.append((c, value))
        primal_value = mp.fsum(abs(r) for _, r in residuals)

        dual_by_coord = dict(zip(coords, row_dual))
        dual_value = mp.fsum(dual_by_coord[c] * t for c, t in zip(coords, rhs))
        infeasibility = mp.mpf(0)
        for u in row_dual:
            infeasibility = max(infeasibility, abs(u) - 1)
        for idx in keep:
            dot = mp.fsum(dual_by_coord.get(c, 0) * evaluate(x, precision_bits)
                          for c, x in family[idx].entries.items())
            infeasibility = max(infeasibility, abs(dot))
        gap = primal_value - dual_value

        if abs(gap) > tolerance * max(1, primal_value) or infeasibility > tolerance:
            raise PrecisionError(
                f"duality gap {mp.nstr(gap, 5)} / dual infeasibility {mp.nstr(infeasibility, 5)} "
                f"not closed at {precision_bits} bits"
            )
        certificate = LadCertificate(
            dual=[(c, dual_by_coord[c]) for c in coords],
            primal_value=primal_value,
            dual_value=dual_value,
            gap=gap,
            dual_infeasibility=infeasibility,
        )
        logger.debug(f"LAD solved in {pivots} pivots, value {mp.nstr(primal_value, 12)}")
        return LadSolution(
            coefficients=gamma,
            value=Magnitude.from_mpf(primal_value, precision_bits),
            residuals=residuals,
            certificate=certificate,
            pivots=pivots,
            prec=precision_bits,
        )


def lower_bound_distance(x: SparseVec, target: SparseVec,
                         precision_bits: int = DEFAULT_PRECISION,
                         coordinates: Optional[set[int]] = None) -> Magnitude:
    """Residual mass of target - x on a coordinate subset; never exceeds the true distance.

    The default subset is the target's support, which for target e_0 is the
    coordinate-0 residual |1 - x_0|.
    """
    if x.basis != BasisSystem.F or target.basis != BasisSystem.F:
        raise BasisError("distances are taken over the f-basis")
    coords = set(target.entries) if coordinates is None else coordinates
    diff = target - x
    return Magnitude.total(
        (diff.coefficient(c).magnitude(precision_bits) for c in coords), precision_bits
    )
