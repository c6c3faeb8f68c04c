import math
from fractions import Fraction

import pytest

from pickreg.errors import EscalationExhausted, InvalidParameter
from pickreg.numerics import (
    ComplexEnclosure,
    Enclosure,
    PrecisionContext,
    as_fraction,
    default_context,
    enclose_rational,
    neg,
    pi_enclosure,
    widen,
)


def test_widen_doubles():
    assert widen(PrecisionContext(64, 1024)).bits == 128


def test_widen_clamps_to_cap():
    assert widen(PrecisionContext(512, 1024)).bits == 1024


def test_widen_exhausted():
    with pytest.raises(EscalationExhausted):
        widen(PrecisionContext(1024, 1024))


def test_context_rejects_bad_settings():
    with pytest.raises(InvalidParameter):
        PrecisionContext(256, 128)


def test_default_context_env(monkeypatch):
    monkeypatch.setenv("PICKREG_BITS", "300")
    assert default_context().bits == 300
    monkeypatch.delenv("PICKREG_BITS")
    assert default_context() == PrecisionContext(128, 4096, 2)


def test_enclose_third():
    e = enclose_rational(Fraction(1, 3), PrecisionContext(64))
    assert e.contains(Fraction(1, 3))
    assert as_fraction(e.hi) - as_fraction(e.lo) <= Fraction(1, 3) * Fraction(1, 2 ** 63)


def test_enclose_zero_and_dyadic():
    z = enclose_rational(0)
    assert z.lo == 0 and z.hi == 0
    e = enclose_rational(Fraction(225, 64))
    assert float(e.lo) == 3.515625 == float(e.hi)


def test_exact_arithmetic_stays_exact():
    a, b = Enclosure.of(Fraction(1, 3)), Enclosure.of(Fraction(2, 7))
    assert (a + b).exact == Fraction(13, 21)
    assert (a * b / (a - b)).exact == Fraction(2, 21) / Fraction(1, 21)


def test_inexact_containment():
    x = Enclosure.of(2).sqrt()
    assert Fraction(14142135623730950488, 10 ** 19) < x.lo < x.hi < Fraction(14142135623730950489, 10 ** 19)
    assert (x * x).contains(2)
    e = Enclosure.of(Fraction(1, 2)).exp()
    assert (e * e).overlaps(Enclosure.of(1).exp())
    assert abs(float(e.mid) - math.exp(0.5)) < 1e-15


def test_negation_keeps_full_precision():
    # unary minus must not round to double precision
    x = Enclosure.of(Fraction(1, 3), 256)
    y = -x
    assert (y + x).contains(0)
    assert (x + y).width < Fraction(1, 2 ** 200)
    assert as_fraction(neg(x.lo)) == -as_fraction(x.lo)


def test_pi_enclosure():
    p = pi_enclosure(200)
    assert Fraction(314159265358979323846264338327950288, 10 ** 35) < p.lo
    assert p.hi < Fraction(314159265358979323846264338327950289, 10 ** 35)
    assert p.width < Fraction(1, 2 ** 190)


def test_compare_and_sign():
    a = Enclosure.of(Fraction(1, 3), 64)
    assert a.sign() == 1
    assert a.certainly_lt(Fraction(1, 2))
    assert Enclosure.hull(-1, 1).sign() is None


def test_decimal_round_trip():
    e = Enclosure.of(Fraction(1, 7), 128)
    lo, hi = e.to_decimal_strings()
    back = Enclosure.from_decimal_strings(lo, hi, 128)
    assert back.contains(e)
    assert back.lo == e.lo and back.hi == e.hi


def test_complex_basics():
    z = ComplexEnclosure.of(Fraction(1, 2), Fraction(1, 4))
    assert (z * z.conj()).re.exact == Fraction(5, 16)
    assert z.abs2().exact == Fraction(5, 16)
    assert (z / z).contains(1)


def test_rootn_and_rpow():
    assert Enclosure.of(Fraction(27, 8)).rootn(3).exact == Fraction(3, 2)
    r = Enclosure.of(2, 128).rpow(Fraction(3, 2))
    assert (r * r).contains(8)
    assert r.width < Fraction(1, 2 ** 120)
