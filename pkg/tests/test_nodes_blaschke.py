from fractions import Fraction

import numpy as np
import pytest

import oracles
from pickreg import blaschke, nodes
from pickreg.errors import InvalidParameter
from pickreg.numerics import PrecisionContext


def reals(seq):
    return [p.re.exact for p in seq]


# nodes

def test_radial_starts_at_two():
    assert reals(nodes.gen_radial_power(2, 3)) == [Fraction(3, 4), Fraction(8, 9), Fraction(15, 16)]


def test_radial_with_origin_index():
    seq = nodes.gen_radial_power(2, 3, include_origin=True)
    assert seq.provenance.first_index == 1
    assert reals(seq) == [Fraction(0), Fraction(3, 4), Fraction(8, 9)]


def test_radial_irrational_exponent():
    seq = nodes.gen_radial_power(Fraction(3, 2), 2)
    a, b = seq[0].re, seq[1].re
    assert a.lo < Fraction(64644, 10 ** 5) + Fraction(1, 10 ** 5) and a.hi > Fraction(64644, 10 ** 5)
    assert b.lo < Fraction(80755, 10 ** 5) and b.hi > Fraction(80754, 10 ** 5)
    assert abs(float(a.mid) - (1 - 2 ** -1.5)) < 1e-15


def test_radial_rejects_p_le_one():
    with pytest.raises(InvalidParameter):
        nodes.gen_radial_power(1, 3)


def test_geometric():
    assert reals(nodes.gen_geometric(Fraction(1, 2), 3)) == [Fraction(1, 2), Fraction(3, 4), Fraction(7, 8)]
    assert reals(nodes.gen_geometric(Fraction(1, 2), 1)) == [Fraction(1, 2)]
    assert reals(nodes.gen_geometric(Fraction(9, 10), 2)) == [Fraction(1, 10), Fraction(19, 100)]


def test_blaschke_sum():
    assert nodes.blaschke_sum(nodes.explicit([Fraction(1, 2), Fraction(3, 4)])).exact == Fraction(3, 4)
    assert nodes.blaschke_sum(nodes.gen_radial_power(2, 3)).exact == Fraction(1, 4) + Fraction(1, 9) + Fraction(1, 16)
    assert nodes.blaschke_sum(nodes.gen_geometric(Fraction(1, 2), 10)).exact == Fraction(1023, 1024)


def test_validate():
    assert nodes.validate(nodes.explicit([Fraction(1, 2), Fraction(3, 4)])) == []
    assert [str(v) for v in nodes.validate(nodes.explicit([Fraction(1, 2), Fraction(1, 2)]))] == ["duplicate(0,1)"]
    assert [str(v) for v in nodes.validate(nodes.explicit([Fraction(3, 2)]))] == ["outside-disk(0)"]


def test_polar_points():
    p = nodes.NodePoint.from_polar(Fraction(1, 2), Fraction(1, 4))
    assert p.re.contains(0) and p.im.exact == Fraction(1, 2)
    q = nodes.NodePoint.from_polar(Fraction(1, 2), Fraction(1, 8))
    assert q.abs2().contains(Fraction(1, 4))


# blaschke products

def test_eval():
    B1 = blaschke.BlaschkeProduct(nodes.explicit([Fraction(1, 2)]))
    assert blaschke.eval(B1, 0).re.exact == Fraction(1, 2)
    assert blaschke.eval(B1, Fraction(1, 2)).contains(0)
    B2 = blaschke.BlaschkeProduct(nodes.explicit([Fraction(1, 2), Fraction(3, 4)]))
    assert blaschke.eval(B2, 0).re.exact == Fraction(3, 8)


def test_derivative_modulus():
    B1 = blaschke.BlaschkeProduct(nodes.explicit([Fraction(1, 2)]))
    assert blaschke.derivative_modulus_at_node(B1, 0).exact == Fraction(4, 3)
    B2 = blaschke.BlaschkeProduct(nodes.explicit([Fraction(1, 2), Fraction(3, 4)]))
    assert blaschke.derivative_modulus_at_node(B2, 0).exact == Fraction(8, 15)
    assert blaschke.derivative_modulus_at_node(B2, 1).exact == Fraction(32, 35)


def test_derivative_matches_float_oracle():
    z = [0.5 + 0.25j, -0.3 + 0.1j, 0.6j]
    seq = nodes.explicit([(Fraction(1, 2), Fraction(1, 4)), (Fraction(-3, 10), Fraction(1, 10)),
                          (0, Fraction(3, 5))])
    B = blaschke.BlaschkeProduct(seq)
    for n in range(3):
        got = float(blaschke.derivative_modulus_at_node(B, n).mid)
        assert got == pytest.approx(oracles.blaschke_derivative_modulus(z, n), rel=1e-12)


def test_nu_measure():
    mu = blaschke.nu_measure(nodes.explicit([Fraction(1, 2)]))
    assert [a.mass.exact for a in mu] == [Fraction(9, 16)]
    mu = blaschke.nu_measure(nodes.explicit([Fraction(1, 2), Fraction(3, 4)]))
    assert [a.mass.exact for a in mu] == [Fraction(225, 64), Fraction(1225, 1024)]


def test_nu_measure_radial_regression():
    mu = blaschke.nu_measure(nodes.gen_radial_power(2, 3))
    vals = [a.mass.exact for a in mu]
    assert vals == [Fraction(17689, 6400), Fraction(295936, 99225), Fraction(346921, 802816)]
    z = [0.75, 8 / 9, 15 / 16]
    for n, v in enumerate(vals):
        assert float(v) == pytest.approx(oracles.blaschke_derivative_modulus(z, n) ** -2, rel=1e-12)


def test_ambient_weights_differ():
    seq = nodes.gen_geometric(Fraction(1, 2), 5)
    self_w = blaschke.nu_measure(seq.head(2))
    ambient = blaschke.nu_measure(seq, count=2)
    assert len(ambient) == 2
    assert ambient.atoms[0].mass.exact > self_w.atoms[0].mass.exact


def test_separation_constant():
    assert blaschke.separation_constant(nodes.explicit([Fraction(1, 2)])).exact == 1
    assert blaschke.separation_constant(nodes.explicit([Fraction(1, 2), Fraction(3, 4)])).exact == Fraction(2, 5)


def test_separation_geometric_regression():
    seq = nodes.gen_geometric(Fraction(1, 2), 21)
    d128 = blaschke.separation_constant(seq, PrecisionContext(128))
    d256 = blaschke.separation_constant(seq, PrecisionContext(256))
    assert d128.overlaps(d256)
    assert d128.lo > 0
    assert abs(float(d128.mid) - 0.01478253001501195) < 1e-15  # frozen


def test_mass_lower_bound_closed_form():
    e = blaschke.example_mass_lower_bound(2, 3)
    assert abs(float(e.mid) - np.exp(2) / 81) < 1e-15
    e = blaschke.example_mass_lower_bound(2, 1, 2)
    assert abs(float(e.mid) - np.exp(0.5)) < 1e-15
    with pytest.raises(InvalidParameter):
        blaschke.example_mass_lower_bound(2, 2, 2)


def test_mass_table_against_float_oracle():
    rows = blaschke.example_mass_table(2, 12)
    assert [r.n for r in rows] == list(range(1, 12))
    assert all(r.holds for r in rows)
    for r in rows:
        assert float(r.bound.mid) == pytest.approx(oracles.mass_lower_bound(r.n, 12, 2.0), rel=1e-12)
