"""Precision policy, certified interval scalars and exact rationals.

Every computed scalar in pickreg is an :class:`Enclosure`: a closed interval
``[lo, hi]`` with MPFR endpoints obtained by directed (outward) rounding.
When a value is known to be an exact rational the enclosure also carries it
in ``exact``; arithmetic between exact enclosures stays exact, so the same
code path serves as the rational oracle and as the interval backend.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Optional, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .errors import EscalationExhausted, InvalidParameter

BITS_ENV = "PICKREG_BITS"

ExactRational = Fraction
RationalLike = Union[int, Fraction]


@dataclass(frozen=True)
class PrecisionContext:
    bits: int = 128
    max_bits: int = 4096
    escalation_factor: int = 2

    def __post_init__(self):
        if self.bits < 8 or self.max_bits < 8:
            raise InvalidParameter("precision must be at least 8 bits")
        if self.bits > self.max_bits:
            raise InvalidParameter(f"bits={self.bits} exceeds max_bits={self.max_bits}")
        if self.escalation_factor < 2:
            raise InvalidParameter("escalation_factor must be >= 2")

    @property
    def exhausted(self) -> bool:
        return self.bits >= self.max_bits


def widen(ctx: PrecisionContext) -> PrecisionContext:
    """Return ``ctx`` with the working precision multiplied by its escalation factor."""
    if ctx.bits >= ctx.max_bits:
        raise EscalationExhausted(f"precision already at max_bits={ctx.max_bits}", bits=ctx.bits)
    return replace(ctx, bits=min(ctx.bits * ctx.escalation_factor, ctx.max_bits))


def default_context() -> PrecisionContext:
    """Default precision policy; ``PICKREG_BITS`` overrides the starting bits."""
    env = os.environ.get(BITS_ENV)
    if env:
        bits = int(env)
        return PrecisionContext(bits=bits, max_bits=max(4096, bits))
    return PrecisionContext()


@lru_cache(maxsize=None)
def rounders(bits: int):
    """MPFR contexts rounding toward -inf and +inf at ``bits`` of mantissa."""
    return (
        gmpy2.context(precision=bits, round=gmpy2.RoundDown),
        gmpy2.context(precision=bits, round=gmpy2.RoundUp),
    )


_MPFR = type(mpfr(0))


def as_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, mpq or finite mpfr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, _MPFR):
        if not gmpy2.is_finite(x):
            raise ValueError("infinite value has no rational form")
        n, d = x.as_integer_ratio()
        return Fraction(int(n), int(d))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


@lru_cache(maxsize=None)
def _nearest(bits: int):
    return gmpy2.context(precision=bits)


def round_rational(q: Fraction, bits: int):
    """Outward-rounded MPFR bounds ``(lo, hi)`` of the rational ``q``."""
    down, up = rounders(bits)
    if q == 0:
        return mpfr(0), mpfr(0)
    n, d = mpz(q.numerator), mpz(q.denominator)
    return down.div(n, d), up.div(n, d)


def neg(x):
    """Exact negation of an MPFR value (unary minus would round to the global context)."""
    if not isinstance(x, _MPFR):
        x = mpfr(x)
    return rounders(max(x.precision, 8))[0].minus(x)


def mag(x):
    """Exact absolute value of an MPFR value."""
    return neg(x) if x < 0 else x


# Raw interval kernels on MPFR endpoint pairs.  ``D`` rounds down, ``U`` up.

def iv_add(D, U, alo, ahi, blo, bhi):
    return D.add(alo, blo), U.add(ahi, bhi)


def iv_sub(D, U, alo, ahi, blo, bhi):
    return D.sub(alo, bhi), U.sub(ahi, blo)


def iv_mul(D, U, alo, ahi, blo, bhi):
    if alo >= 0:
        if blo >= 0:
            return D.mul(alo, blo), U.mul(ahi, bhi)
        if bhi <= 0:
            return D.mul(ahi, blo), U.mul(alo, bhi)
        return D.mul(ahi, blo), U.mul(ahi, bhi)
    if ahi <= 0:
        if blo >= 0:
            return D.mul(alo, bhi), U.mul(ahi, blo)
        if bhi <= 0:
            return D.mul(ahi, bhi), U.mul(alo, blo)
        return D.mul(alo, bhi), U.mul(alo, blo)
    if blo >= 0:
        return D.mul(alo, bhi), U.mul(ahi, bhi)
    if bhi <= 0:
        return D.mul(ahi, blo), U.mul(alo, blo)
    return (min(D.mul(alo, bhi), D.mul(ahi, blo)),
            max(U.mul(alo, blo), U.mul(ahi, bhi)))


def iv_div(D, U, alo, ahi, blo, bhi):
    if blo > 0:
        if alo >= 0:
            return D.div(alo, bhi), U.div(ahi, blo)
        if ahi <= 0:
            return D.div(alo, blo), U.div(ahi, bhi)
        return D.div(alo, blo), U.div(ahi, blo)
    if bhi < 0:
        lo, hi = iv_div(D, U, neg(ahi), neg(alo), neg(bhi), neg(blo))
        return lo, hi
    raise ZeroDivisionError("interval divisor contains zero")


def iv_sqr(D, U, alo, ahi):
    if alo >= 0:
        return D.mul(alo, alo), U.mul(ahi, ahi)
    if ahi <= 0:
        return D.mul(ahi, ahi), U.mul(alo, alo)
    m = max(neg(alo), ahi)
    return mpfr(0), U.mul(m, m)


def _iroot_exact(q: Fraction, k: int) -> Optional[Fraction]:
    if q < 0:
        return None
    rn, en = gmpy2.iroot(mpz(q.numerator), k)
    rd, ed = gmpy2.iroot(mpz(q.denominator), k)
    if en and ed:
        return Fraction(int(rn), int(rd))
    return None


def _digits_for(bits: int) -> int:
    return math.ceil(bits * math.log10(2)) + 2


def _directed_decimal(x, digits: int, rounding) -> str:
    if x == 0:
        return "0"
    q = as_fraction(x)
    with localcontext() as dctx:
        dctx.prec = digits
        dctx.rounding = rounding
        value = Decimal(q.numerator) / Decimal(q.denominator)
    return format(value, "E") if abs(value.adjusted()) > 6 else format(value, "f")


@dataclass(frozen=True)
class Enclosure:
    """Certified real interval ``[lo, hi]``; ``exact`` is set for known rationals."""

    lo: mpfr
    hi: mpfr
    bits_used: int
    exact: Optional[Fraction] = None

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"inverted enclosure [{self.lo}, {self.hi}]")

    # construction

    @classmethod
    def of(cls, q: RationalLike, bits: int = 128) -> "Enclosure":
        q = as_fraction(q)
        lo, hi = round_rational(q, bits)
        return cls(lo, hi, bits, q)

    @classmethod
    def hull(cls, lo: RationalLike, hi: RationalLike, bits: int = 128) -> "Enclosure":
        """Smallest representable enclosure of the real interval ``[lo, hi]``."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo > hi:
            raise ValueError("lo > hi")
        if lo == hi:
            return cls.of(lo, bits)
        return cls(round_rational(lo, bits)[0], round_rational(hi, bits)[1], bits)

    @classmethod
    def from_decimal_strings(cls, lo: str, hi: str, bits: int) -> "Enclosure":
        # inward rounding restores the endpoints written by to_decimal_strings
        down, up = rounders(bits)
        qlo, qhi = Fraction(lo), Fraction(hi)
        if qlo == qhi:
            return cls.of(qlo, bits)
        rlo = up.div(mpz(qlo.numerator), mpz(qlo.denominator)) if qlo else mpfr(0)
        rhi = down.div(mpz(qhi.numerator), mpz(qhi.denominator)) if qhi else mpfr(0)
        return cls(rlo, rhi, bits)

    def at(self, bits: int) -> "Enclosure":
        """Re-enclose at ``bits``; only exact values can gain precision."""
        if self.exact is not None and bits != self.bits_used:
            return Enclosure.of(self.exact, bits)
        return self

    # inspection

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def mid(self):
        if self.lo == self.hi:
            return self.lo
        near = _nearest(self.bits_used + 2)
        return near.div(near.add(self.lo, self.hi), 2)

    @property
    def width(self):
        return rounders(self.bits_used)[1].sub(self.hi, self.lo)

    def rel_width(self):
        """Width divided by the smaller endpoint magnitude; ``inf`` if the interval touches 0."""
        if self.lo == self.hi:
            return mpfr(0)
        if self.lo <= 0 <= self.hi:
            return mpfr("inf")
        up = rounders(self.bits_used)[1]
        return up.div(self.width, min(mag(self.lo), mag(self.hi)))

    def __float__(self):
        return float(self.exact) if self.exact is not None else float(self.mid)

    def __repr__(self):
        if self.exact is not None:
            return f"Enclosure(exact={self.exact})"
        return f"Enclosure([{self.lo:.17g}, {self.hi:.17g}], bits={self.bits_used})"

    def __str__(self):
        if self.exact is not None:
            return str(self.exact)
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"

    def to_decimal_strings(self, digits: Optional[int] = None):
        """``(lo, hi)`` decimal strings rounded outward; they round-trip at ``bits_used``."""
        digits = digits or _digits_for(self.bits_used)
        return (_directed_decimal(self.lo, digits, ROUND_FLOOR),
                _directed_decimal(self.hi, digits, ROUND_CEILING))

    # set relations and certified comparisons

    def contains(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        q = mpq(as_fraction(x))
        return self.lo <= q <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Enclosure") -> "Enclosure":
        if not self.overlaps(other):
            raise ValueError("enclosures are disjoint")
        if self.exact is not None:
            return self
        if other.exact is not None:
            return other
        return Enclosure(max(self.lo, other.lo), min(self.hi, other.hi),
                         max(self.bits_used, other.bits_used))

    def sign(self) -> Optional[int]:
        """Certified sign, or ``None`` when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def compare(self, other) -> Optional[int]:
        """Certified three-way comparison with another enclosure or rational."""
        other = _coerce(other, self.bits_used)
        if self.exact is not None and other.exact is not None:
            return (self.exact > other.exact) - (self.exact < other.exact)
        if self.hi < other.lo:
            return -1
        if self.lo > other.hi:
            return 1
        return None

    def certainly_lt(self, other) -> bool:
        return self.compare(other) == -1

    def certainly_le(self, other) -> bool:
        other = _coerce(other, self.bits_used)
        return self.hi <= other.lo or self.compare(other) in (-1, 0)

    # arithmetic

    def _binary(self, other, exact_op, iv_op):
        other = _coerce(other, self.bits_used)
        bits = max(self.bits_used, other.bits_used)
        if self.exact is not None and other.exact is not None:
            return Enclosure.of(exact_op(self.exact, other.exact), bits)
        a, b = self.at(bits), other.at(bits)
        D, U = rounders(bits)
        lo, hi = iv_op(D, U, a.lo, a.hi, b.lo, b.hi)
        return Enclosure(lo, hi, bits)

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y, iv_add)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y, iv_sub)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y, iv_mul)

    def __truediv__(self, other):
        other = _coerce(other, self.bits_used)
        if other.exact == 0 or other.sign() is None:
            raise ZeroDivisionError("division by an enclosure containing zero")
        return self._binary(other, lambda x, y: x / y, iv_div)

    def __radd__(self, other):
        return _coerce(other, self.bits_used) + self

    def __rsub__(self, other):
        return _coerce(other, self.bits_used) - self

    def __rmul__(self, other):
        return _coerce(other, self.bits_used) * self

    def __rtruediv__(self, other):
        return _coerce(other, self.bits_used) / self

    def __neg__(self):
        if self.exact is not None:
            return Enclosure(neg(self.hi), neg(self.lo), self.bits_used, -self.exact)
        return Enclosure(neg(self.hi), neg(self.lo), self.bits_used)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(mpfr(0), max(neg(self.lo), self.hi), self.bits_used)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return 1 / (self ** -n)
        if self.exact is not None:
            return Enclosure.of(self.exact ** n, self.bits_used)
        result = Enclosure.of(1, self.bits_used)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.square()
        return result

    def square(self) -> "Enclosure":
        if self.exact is not None:
            return Enclosure.of(self.exact * self.exact, self.bits_used)
        D, U = rounders(self.bits_used)
        lo, hi = iv_sqr(D, U, self.lo, self.hi)
        return Enclosure(lo, hi, self.bits_used)

    def sqrt(self) -> "Enclosure":
        if self.hi < 0:
            raise ValueError("square root of a negative enclosure")
        if self.exact is not None:
            r = _iroot_exact(self.exact, 2)
            if r is not None:
                return Enclosure.of(r, self.bits_used)
        D, U = rounders(self.bits_used)
        lo = D.sqrt(self.lo) if self.lo > 0 else mpfr(0)
        return Enclosure(lo, U.sqrt(self.hi), self.bits_used)

    def rootn(self, k: int) -> "Enclosure":
        """Real ``k``-th root of a nonnegative enclosure."""
        if self.hi < 0:
            raise ValueError("root of a negative enclosure")
        if self.exact is not None:
            r = _iroot_exact(self.exact, k)
            if r is not None:
                return Enclosure.of(r, self.bits_used)
        D, U = rounders(self.bits_used)
        lo = D.rootn(self.lo, k) if self.lo > 0 else mpfr(0)
        return Enclosure(lo, U.rootn(self.hi, k), self.bits_used)

    def exp(self) -> "Enclosure":
        if self.exact == 0:
            return Enclosure.of(1, self.bits_used)
        D, U = rounders(self.bits_used)
        return Enclosure(D.exp(self.lo), U.exp(self.hi), self.bits_used)

    def rpow(self, p: Fraction) -> "Enclosure":
        """``self ** p`` for a rational exponent and positive base."""
        p = as_fraction(p)
        base = self ** p.numerator
        return base if p.denominator == 1 else base.rootn(p.denominator)


def _coerce(x, bits: int) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return Enclosure.of(x, bits)


def enclose_rational(q: RationalLike, ctx: Optional[PrecisionContext] = None) -> Enclosure:
    """Certified enclosure of the exact rational ``q`` at ``ctx.bits``."""
    ctx = ctx or default_context()
    return Enclosure.of(q, ctx.bits)


def enclose(x, bits: int) -> Enclosure:
    """Coerce an int, Fraction or Enclosure to an Enclosure at ``bits``."""
    return _coerce(x, bits).at(bits)


def pi_enclosure(bits: int) -> Enclosure:
    D, U = rounders(bits)
    return Enclosure(D.const_pi(), U.const_pi(), bits)


@dataclass(frozen=True)
class ComplexEnclosure:
    """Rectangular complex enclosure; exact when both parts are exact."""

    re: Enclosure
    im: Enclosure

    @classmethod
    def of(cls, re: RationalLike, im: RationalLike = 0, bits: int = 128) -> "ComplexEnclosure":
        return cls(Enclosure.of(re, bits), Enclosure.of(im, bits))

    @property
    def bits_used(self) -> int:
        return max(self.re.bits_used, self.im.bits_used)

    @property
    def is_exact(self) -> bool:
        return self.re.is_exact and self.im.is_exact

    @property
    def is_real(self) -> bool:
        return self.im.exact == 0

    def at(self, bits: int) -> "ComplexEnclosure":
        return ComplexEnclosure(self.re.at(bits), self.im.at(bits))

    def __repr__(self):
        return f"ComplexEnclosure({self.re!r}, {self.im!r})"

    def __add__(self, other):
        other = _coerce_complex(other, self.bits_used)
        return ComplexEnclosure(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        other = _coerce_complex(other, self.bits_used)
        return ComplexEnclosure(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        other = _coerce_complex(other, self.bits_used)
        if self.is_real and other.is_real:
            return ComplexEnclosure(self.re * other.re, self.im)
        return ComplexEnclosure(self.re * other.re - self.im * other.im,
                                self.re * other.im + self.im * other.re)

    def __truediv__(self, other):
        other = _coerce_complex(other, self.bits_used)
        if other.is_real:
            return ComplexEnclosure(self.re / other.re, self.im / other.re)
        num = self * other.conj()
        den = other.abs2()
        return ComplexEnclosure(num.re / den, num.im / den)

    def __radd__(self, other):
        return _coerce_complex(other, self.bits_used) + self

    def __rsub__(self, other):
        return _coerce_complex(other, self.bits_used) - self

    def __rmul__(self, other):
        return _coerce_complex(other, self.bits_used) * self

    def __rtruediv__(self, other):
        return _coerce_complex(other, self.bits_used) / self

    def __neg__(self):
        return ComplexEnclosure(-self.re, -self.im)

    def conj(self) -> "ComplexEnclosure":
        return ComplexEnclosure(self.re, -self.im)

    def abs2(self) -> Enclosure:
        return self.re.square() + self.im.square()

    def __abs__(self) -> Enclosure:
        if self.is_real:
            return abs(self.re)
        return self.abs2().sqrt()

    def contains(self, z) -> bool:
        z = _coerce_complex(z, self.bits_used)
        return self.re.contains(z.re) and self.im.contains(z.im)

    def overlaps(self, other: "ComplexEnclosure") -> bool:
        return self.re.overlaps(other.re) and self.im.overlaps(other.im)


def _coerce_complex(x, bits: int) -> ComplexEnclosure:
    if isinstance(x, ComplexEnclosure):
        return x
    if isinstance(x, Enclosure):
        return ComplexEnclosure(x, Enclosure.of(0, x.bits_used))
    return ComplexEnclosure(Enclosure.of(x, bits), Enclosure.of(0, bits))


def to_complex(x, bits: int) -> ComplexEnclosure:
    return _coerce_complex(x, bits).at(bits)
