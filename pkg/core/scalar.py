"""Exact dyadic monomials q * 2^t, their finite sums, and log-domain magnitudes."""
import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable

import mpmath as mp

DEFAULT_PRECISION = 200

# Width in bits of the digit blocks that split one exponent class into terms.
# A class value whose numerator fits in one block is a single monomial.
_MERGE_BLOCK = 1 << 26

# Exact rational evaluation is used when every exponent is an integer of at
# most this size.
_EXACT_EXPONENT_LIMIT = 4096

_RATIONAL = r"-?\d+(?:/\d+)?"
_MONOMIAL_RE = re.compile(
    rf"^\s*(?P<q>{_RATIONAL})\s*(?:\*\s*2\^\(\s*(?P<t>{_RATIONAL})\s*\))?\s*$"
)


def _trailing_zeros(n: int) -> int:
    n = abs(n)
    return (n & -n).bit_length() - 1


def _as_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _log2_of_int(n: int) -> mp.mpf:
    return mp.log(mp.mpf(n), 2)


class Dyadic:
    """A monomial q * 2^t with q, t rational, kept in canonical form.

    Canonical means q has odd numerator and odd denominator (all powers of
    two live in t), and q == 0 forces t == 0.
    """

    __slots__ = ("q", "t")

    def __init__(self, q=1, t=0):
        q = _as_fraction(q)
        t = _as_fraction(t)
        if q == 0:
            self.q, self.t = Fraction(0), Fraction(0)
            return
        up = _trailing_zeros(q.numerator)
        down = _trailing_zeros(q.denominator)
        if up or down:
            q = Fraction(q.numerator >> up, q.denominator >> down)
            t = t + (up - down)
        self.q, self.t = q, t

    @classmethod
    def power_of_two(cls, t) -> "Dyadic":
        return cls(1, t)

    @property
    def is_zero(self) -> bool:
        return self.q == 0

    @property
    def sign(self) -> int:
        return (self.q > 0) - (self.q < 0)

    @property
    def exponent_class(self) -> tuple[int, int]:
        """Residue of t modulo 1, as (numerator mod denominator, denominator)."""
        return self.t.numerator % self.t.denominator, self.t.denominator

    def log2_abs(self) -> mp.mpf:
        """log2|q * 2^t| at the current mpmath precision."""
        q = abs(self.q)
        return (_log2_of_int(q.numerator) - _log2_of_int(q.denominator)
                + mp.mpf(self.t.numerator) / self.t.denominator)

    def exact_value(self) -> Fraction | None:
        if self.t.denominator != 1 or abs(self.t) > _EXACT_EXPONENT_LIMIT:
            return None
        k = self.t.numerator
        return self.q * (2 ** k) if k >= 0 else self.q / (2 ** -k)

    def __mul__(self, other):
        if isinstance(other, Dyadic):
            return Dyadic(self.q * other.q, self.t + other.t)
        if isinstance(other, (int, Fraction)):
            return Dyadic(self.q * other, self.t)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.q, self.t)

    def inverse(self) -> "Dyadic":
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero monomial")
        return Dyadic(1 / self.q, -self.t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.q == other.q and self.t == other.t

    def __hash__(self) -> int:
        return hash((self.q, self.t))

    def __str__(self) -> str:
        q = format_int(self.q.numerator)
        if self.q.denominator != 1:
            q = f"{q}/{format_int(self.q.denominator)}"
        if self.t == 0:
            return q
        return f"{q} * 2^({self.t})"

    def __repr__(self) -> str:
        return f"Dyadic({self})"


def _balanced_runs(n: int, e: int) -> list[tuple[int, int]]:
    """Split n * 2^e along its balanced base-2^_MERGE_BLOCK digits.

    Digits sit at absolute block positions and lie in [-2^(B-1), 2^(B-1)),
    so the split is unique for the value. Consecutive nonzero digits form
    one run; each run comes back as (integer, exponent).
    """
    width = _MERGE_BLOCK
    base = (e // width) * width
    w = n << (e - base)
    half = 1 << (width - 1)
    mask = (1 << width) - 1
    runs: list[list[int]] = []
    block = 0
    while w:
        digit = ((w + half) & mask) - half
        w = (w - digit) >> width
        if digit:
            if runs and runs[-1][2] == block - 1:
                runs[-1][0] += digit << ((block - runs[-1][1]) * width)
                runs[-1][2] = block
            else:
                runs.append([digit, block, block])
        block += 1
    return [(value, base + low * width) for value, low, _ in runs]


def _merge_class(monomials: list[Dyadic]) -> list[Dyadic]:
    """Canonical terms for monomials sharing one exponent class.

    The class value is X / D * 2^f with D odd. Its terms are the runs of
    balanced digits of X, so equal values give equal term lists whatever
    the order of addition. Terms far apart are summed cluster by cluster,
    never through one integer spanning the gap.
    """
    first = monomials[0]
    if len(monomials) == 1 and first.q.numerator.bit_length() <= _MERGE_BLOCK:
        return [first]
    frac = first.t - first.t // 1
    denominator = math.lcm(*(m.q.denominator for m in monomials))
    terms = sorted(
        (int(m.t - frac), m.q.numerator * (denominator // m.q.denominator)) for m in monomials
    )

    # clusters whose digit blocks cannot touch: an empty block always separates them
    clusters: list[list] = []
    for k, m in terms:
        if clusters:
            top, members = clusters[-1][1], clusters[-1][2]
            reach = top + len(members).bit_length()
            if k // _MERGE_BLOCK <= reach // _MERGE_BLOCK + 2:
                members.append((k, m))
                clusters[-1][1] = max(top, k + m.bit_length())
                continue
        clusters.append([k, k + m.bit_length(), [(k, m)]])
    sums = [(lo, sum(m << (k - lo) for k, m in members)) for lo, _, members in clusters]
    sums = [(lo, x) for lo, x in sums if x]
    if not sums:
        return []

    if denominator > 1:
        residue = sum(x * pow(2, lo, denominator) for lo, x in sums) % denominator
        g = math.gcd(residue, denominator)
        # a common factor that divides no single cluster leaves a dense
        # quotient across the gap; such classes keep the common denominator
        if g > 1 and all(x % g == 0 for _, x in sums):
            sums = [(lo, x // g) for lo, x in sums]
            denominator //= g

    out: list[Dyadic] = []
    for lo, x in sums:
        shift = _trailing_zeros(x)
        n, e = x >> shift, lo + shift
        if n.bit_length() <= _MERGE_BLOCK:
            out.append(Dyadic(Fraction(n, denominator), e + frac))
        else:
            out.extend(Dyadic(Fraction(v, denominator), p + frac) for v, p in _balanced_runs(n, e))
    return out


class ScalarSum:
    """Finite sum of pairwise non-combinable dyadic monomials. Empty means zero."""

    __slots__ = ("terms",)

    def __init__(self, monomials: Iterable[Dyadic] = ()):
        classes: dict[tuple[int, int], list[Dyadic]] = {}
        for m in monomials:
            if not m.is_zero:
                classes.setdefault(m.exponent_class, []).append(m)
        terms: list[Dyadic] = []
        for group in classes.values():
            terms.extend(_merge_class(group))
        terms.sort(key=lambda m: (m.t, m.q))
        self.terms: tuple[Dyadic, ...] = tuple(terms)

    @classmethod
    def of(cls, q=1, t=0) -> "ScalarSum":
        return cls((Dyadic(q, t),))

    @classmethod
    def zero(cls) -> "ScalarSum":
        return cls()

    @classmethod
    def one(cls) -> "ScalarSum":
        return cls.of(1)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        return ScalarSum(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "ScalarSum":
        return ScalarSum(-m for m in self.terms)

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return ScalarSum(a * b for a in self.terms for b in other.terms)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def exact_value(self) -> Fraction | None:
        total = Fraction(0)
        for m in self.terms:
            value = m.exact_value()
            if value is None:
                return None
            total += value
        return total

    def magnitude(self, precision_bits: int = DEFAULT_PRECISION) -> "Magnitude":
        return magnitude(self, precision_bits)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(m) for m in self.terms)

    def __repr__(self) -> str:
        return f"ScalarSum({self})"


def _coerce(value) -> ScalarSum | None:
    if isinstance(value, ScalarSum):
        return value
    if isinstance(value, Dyadic):
        return ScalarSum((value,))
    if isinstance(value, (int, Fraction)):
        return ScalarSum.of(value)
    return None


def mul(x: Dyadic, y: Dyadic) -> Dyadic:
    return x * y


def add(x: ScalarSum, y: ScalarSum) -> ScalarSum:
    return x + y


@total_ordering
class Magnitude:
    """A nonnegative real stored through its base-2 logarithm.

    ``exact`` carries the rational value when one is known, so small integer
    norms compare without rounding.
    """

    __slots__ = ("log2", "exact", "prec")

    def __init__(self, log2: mp.mpf | None, exact: Fraction | None = None,
                 prec: int = DEFAULT_PRECISION):
        self.log2 = log2
        self.exact = exact
        self.prec = prec

    @classmethod
    def zero(cls, prec: int = DEFAULT_PRECISION) -> "Magnitude":
        return cls(None, Fraction(0), prec)

    @classmethod
    def from_fraction(cls, value, prec: int = DEFAULT_PRECISION) -> "Magnitude":
        value = abs(_as_fraction(value))
        if value == 0:
            return cls.zero(prec)
        with mp.workprec(prec + 32):
            log2 = _log2_of_int(value.numerator) - _log2_of_int(value.denominator)
        return cls(log2, value, prec)

    @classmethod
    def from_mpf(cls, value, prec: int = DEFAULT_PRECISION) -> "Magnitude":
        with mp.workprec(prec + 32):
            value = abs(mp.mpf(value))
            if value == 0:
                return cls.zero(prec)
            return cls(mp.log(value, 2), None, prec)

    @classmethod
    def from_log2(cls, log2, prec: int = DEFAULT_PRECISION) -> "Magnitude":
        with mp.workprec(prec + 32):
            return cls(mp.mpf(log2), None, prec)

    @classmethod
    def total(cls, items: Iterable["Magnitude"], prec: int = DEFAULT_PRECISION) -> "Magnitude":
        items = [m for m in items if not m.is_zero]
        if not items:
            return cls.zero(prec)
        if all(m.exact is not None for m in items):
            return cls.from_fraction(sum((m.exact for m in items), Fraction(0)), prec)
        with mp.workprec(prec + 32):
            top = max(m.log2 for m in items)
            cutoff = -(prec + 64)
            acc = mp.fsum(mp.power(2, m.log2 - top) for m in items if m.log2 - top > cutoff)
            return cls(top + mp.log(acc, 2), None, prec)

    @property
    def is_zero(self) -> bool:
        return self.log2 is None

    def approx(self) -> mp.mpf:
        """Linear value; uses ldexp on the integer part so huge exponents stay cheap."""
        if self.is_zero:
            return mp.mpf(0)
        if self.exact is not None:
            with mp.workprec(self.prec + 32):
                return mp.mpf(self.exact.numerator) / self.exact.denominator
        with mp.workprec(self.prec + 32):
            whole = int(mp.floor(self.log2))
            return mp.ldexp(mp.power(2, self.log2 - whole), whole)

    def scale_pow2(self, k: int) -> "Magnitude":
        if self.is_zero:
            return self
        exact = None
        if self.exact is not None and abs(k) <= _EXACT_EXPONENT_LIMIT:
            exact = self.exact * 2 ** k if k >= 0 else self.exact / 2 ** -k
        with mp.workprec(self.prec + 32):
            return Magnitude(self.log2 + k, exact, self.prec)

    def __mul__(self, other: "Magnitude") -> "Magnitude":
        prec = max(self.prec, other.prec)
        if self.is_zero or other.is_zero:
            return Magnitude.zero(prec)
        if self.exact is not None and other.exact is not None:
            return Magnitude.from_fraction(self.exact * other.exact, prec)
        with mp.workprec(prec + 32):
            return Magnitude(self.log2 + other.log2, None, prec)

    def __add__(self, other: "Magnitude") -> "Magnitude":
        return Magnitude.total((self, other), max(self.prec, other.prec))

    def close_to(self, other: "Magnitude", rel_bits: int) -> bool:
        """True when the two values agree to a relative error of 2^-rel_bits."""
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        with mp.workprec(max(self.prec, other.prec) + 32):
            return abs(self.log2 - other.log2) <= mp.power(2, -rel_bits) * 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, Magnitude):
            return NotImplemented
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return self.log2 == other.log2

    def __lt__(self, other: "Magnitude") -> bool:
        if other.is_zero:
            return False
        if self.is_zero:
            return True
        if self.exact is not None and other.exact is not None:
            return self.exact < other.exact
        return self.log2 < other.log2

    # equality mixes exact and rounded comparisons, so no hash is consistent with it
    __hash__ = None

    def log2_str(self, digits: int = 30) -> str:
        if self.is_zero:
            return "-inf"
        return mp.nstr(self.log2, digits)

    def approx_str(self, digits: int = 12) -> str:
        return mp.nstr(self.approx(), digits)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        if self.exact is not None:
            return str(self.exact)
        return f"2^({self.log2_str(20)})"

    def __repr__(self) -> str:
        return f"Magnitude({self})"


def magnitude(x: ScalarSum, precision_bits: int = DEFAULT_PRECISION) -> Magnitude:
    """|x| with relative error at most 2^(-precision_bits + ceil(log2 #terms) + 2)."""
    precision_bits = max(64, precision_bits)
    if x.is_zero:
        return Magnitude.zero(precision_bits)
    exact = x.exact_value()
    if exact is not None:
        return Magnitude.from_fraction(exact, precision_bits)
    guard = precision_bits + 32 + len(x.terms).bit_length()
    # cancellation between monomials eats bits, retry wider before giving up
    for work in (guard, 2 * guard, 4 * guard):
        with mp.workprec(work):
            logs = [(m.sign, m.log2_abs()) for m in x.terms]
            top = max(l for _, l in logs)
            cutoff = -(work + 64)
            acc = mp.fsum(s * mp.power(2, l - top) for s, l in logs if l - top > cutoff)
            if acc != 0 and mp.log(abs(acc), 2) > -(work - precision_bits - 16):
                return Magnitude(top + mp.log(abs(acc), 2), None, precision_bits)
    with mp.workprec(4 * guard):
        return Magnitude(top + mp.log(abs(acc), 2) if acc != 0 else None, None, precision_bits)


def evaluate(x: ScalarSum, precision_bits: int = DEFAULT_PRECISION) -> mp.mpf:
    """Signed linear value of x as an mpf (for the LP layer)."""
    if x.is_zero:
        return mp.mpf(0)
    exact = x.exact_value()
    with mp.workprec(precision_bits + 32):
        if exact is not None:
            return mp.mpf(exact.numerator) / exact.denominator
        total = mp.mpf(0)
        for m in x.terms:
            log2 = m.log2_abs()
            whole = int(mp.floor(log2))
            total += m.sign * mp.ldexp(mp.power(2, log2 - whole), whole)
        return total


def parse_scalar(text: str) -> ScalarSum:
    """Inverse of ``str(ScalarSum)``: monomials ``q * 2^(t)`` joined by `` + ``."""
    text = text.strip()
    if text == "0":
        return ScalarSum.zero()
    monomials = []
    for part in text.split(" + "):
        match = _MONOMIAL_RE.match(part)
        if not match:
            raise ValueError(f"Not a dyadic monomial: {part!r}")
        monomials.append(Dyadic(Fraction(match["q"]), Fraction(match["t"] or 0)))
    return ScalarSum(monomials)


def format_scalar(x: ScalarSum) -> str:
    return str(x)


# Integers above this many bits are shown by size; CPython refuses to render
# very long decimals and they are unreadable anyway.
_PRINTABLE_BITS = 4096


def format_int(n: int) -> str:
    if n < 0:
        return "-" + format_int(-n)
    if n.bit_length() <= _PRINTABLE_BITS:
        return str(n)
    top = n.bit_length() - 1
    if n == 1 << top:
        return f"2^{top}"
    return f"~2^{top} ({n.bit_length()} bits)"
