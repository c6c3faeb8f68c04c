"""Finite Blaschke products, derivative weights at the nodes and separation.

Moduli are computed from squared pseudo-hyperbolic distances, which are
exact rationals whenever the nodes have rational coordinates; the
unimodular factors ``|z_k|/z_k`` only enter :func:`eval` and
:func:`derivative_at_node`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import IndeterminateComparison, InvalidParameter
from .nodes import NodePoint, NodeSequence
from .numerics import (
    ComplexEnclosure,
    Enclosure,
    PrecisionContext,
    as_fraction,
    default_context,
    widen,
)

# running products wider than this (relative) trigger a precision escalation
PRODUCT_REL_WIDTH = Fraction(1, 2 ** 32)


@dataclass(frozen=True)
class BlaschkeProduct:
    nodes: NodeSequence


@dataclass(frozen=True)
class Atom:
    point: NodePoint
    mass: Enclosure


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: Tuple[Atom, ...]

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @classmethod
    def from_pairs(cls, pairs, bits: int = 128) -> "DiscreteMeasure":
        """Build from ``(point, mass)`` pairs; points may be NodePoints or rationals."""
        atoms = []
        for pt, m in pairs:
            if not isinstance(pt, NodePoint):
                pt = NodePoint.of(*pt, bits=bits) if isinstance(pt, tuple) else NodePoint.of(pt, 0, bits)
            m = m if isinstance(m, Enclosure) else Enclosure.of(m, bits)
            if m.sign() != 1:
                raise InvalidParameter("atom masses must be certifiably positive")
            atoms.append(Atom(pt, m))
        return cls(tuple(atoms))

    def scaled(self, c) -> "DiscreteMeasure":
        return DiscreteMeasure(tuple(Atom(a.point, a.mass * c) for a in self.atoms))

    def total_mass(self) -> Enclosure:
        total = Enclosure.of(0)
        for a in self.atoms:
            total = total + a.mass
        return total


def rho2(zn: NodePoint, zk: NodePoint) -> Enclosure:
    """Squared pseudo-hyperbolic distance ``|zn - zk|^2 / |1 - conj(zk) zn|^2``."""
    if zn.is_real and zk.is_real:
        return ((zn.re - zk.re) / (1 - zn.re * zk.re)).square()
    num = (zn.z - zk.z).abs2()
    den = (1 - zk.z.conj() * zn.z).abs2()
    return num / den


def _too_wide(e: Enclosure) -> bool:
    return not e.is_exact and e.rel_width() > PRODUCT_REL_WIDTH


def _escalating(compute: Callable[[int], Enclosure], seq: NodeSequence,
                ctx: Optional[PrecisionContext]) -> Enclosure:
    ctx = ctx or default_context()
    while True:
        result = compute(ctx.bits)
        if not _too_wide(result) or ctx.exhausted or seq.is_exact:
            return result
        ctx = widen(ctx)


def _rho2_product(pts: Sequence[NodePoint], n: int, upto: int) -> Enclosure:
    prod = Enclosure.of(1, pts[n].bits_used)
    for k in range(upto):
        if k != n:
            prod = prod * rho2(pts[n], pts[k])
    return prod


def _sign_factor(pt: NodePoint) -> ComplexEnclosure:
    """The unimodular normalization ``|z|/z``."""
    if pt.is_real:
        return ComplexEnclosure(Enclosure.of(1 if pt.re.lo > 0 else -1, pt.bits_used),
                                Enclosure.of(0, pt.bits_used))
    return pt.z.conj() / pt.modulus()


def eval(B: BlaschkeProduct, z, ctx: Optional[PrecisionContext] = None) -> ComplexEnclosure:
    """Certified value of the finite Blaschke product at an interior point."""
    ctx = ctx or default_context()
    if not isinstance(z, NodePoint):
        z = NodePoint.of(*z, bits=ctx.bits) if isinstance(z, tuple) else NodePoint.of(z, 0, ctx.bits)
    z = z.at(ctx.bits)
    inside = z.abs2().compare(1)
    if inside is None:
        raise IndeterminateComparison("cannot separate the evaluation point from the unit circle")
    if inside >= 0:
        raise InvalidParameter("evaluation point must lie in the open unit disk")
    w = z.z
    value = ComplexEnclosure.of(1, 0, ctx.bits)
    for zk in B.nodes.at(ctx.bits):
        value = value * (zk.z - w) / (1 - w * zk.z.conj()) * _sign_factor(zk)
    return value


def derivative_modulus_at_node(B, n: int, ctx: Optional[PrecisionContext] = None) -> Enclosure:
    """``|B'(z_n)|`` for the finite product over all nodes of ``B``."""
    seq = B.nodes if isinstance(B, BlaschkeProduct) else B
    if not 0 <= n < len(seq):
        raise InvalidParameter(f"node index {n} out of range")

    def compute(bits):
        pts = seq.at(bits).points
        return _rho2_product(pts, n, len(pts)).sqrt() / (1 - pts[n].abs2())

    return _escalating(compute, seq, ctx)


def derivative_at_node(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None) -> ComplexEnclosure:
    """Complex ``B'(z_n)`` including the unimodular factors of every node."""
    ctx = ctx or default_context()
    pts = seq.at(ctx.bits).points
    zn = pts[n]
    value = -_sign_factor(zn) / (1 - zn.abs2())
    for k, zk in enumerate(pts):
        if k != n:
            value = value * (zk.z - zn.z) / (1 - zn.z * zk.z.conj()) * _sign_factor(zk)
    return value


def node_masses(seq: NodeSequence, count: Optional[int] = None,
                ctx: Optional[PrecisionContext] = None) -> List[Enclosure]:
    """Masses ``|B'(z_n)|^-2`` of the first ``count`` nodes, products over all of ``seq``."""
    count = len(seq) if count is None else count
    if not 1 <= count <= len(seq):
        raise InvalidParameter("count must lie in 1..len(seq)")
    ctx = ctx or default_context()
    out = []
    for n in range(count):
        def compute(bits, n=n):
            pts = seq.at(bits).points
            return (1 - pts[n].abs2()).square() / _rho2_product(pts, n, len(pts))
        out.append(_escalating(compute, seq, ctx))
    return out


def nu_measure(seq: NodeSequence, count: Optional[int] = None,
               ctx: Optional[PrecisionContext] = None) -> DiscreteMeasure:
    """The measure with atoms ``|B'(z_k)|^-2`` at the nodes.

    With ``count`` unset the weights are self-consistent: ``B`` runs over
    exactly the atoms.  Passing ``count < len(seq)`` keeps only the first
    ``count`` atoms while ``B`` runs over the whole (ambient) sequence.
    """
    masses = node_masses(seq, count, ctx)
    return DiscreteMeasure(tuple(Atom(seq[i], m) for i, m in enumerate(masses)))


def separation_constant(seq: NodeSequence, ctx: Optional[PrecisionContext] = None) -> Enclosure:
    """Uniform separation ``min_n prod_{k != n} rho(z_n, z_k)``; 1 for a single node."""
    if len(seq) == 0:
        raise InvalidParameter("separation constant needs at least one node")

    def compute(bits):
        pts = seq.at(bits).points
        prods = [_rho2_product(pts, n, len(pts)) for n in range(len(pts))]
        if all(p.is_exact for p in prods):
            return Enclosure.of(min(p.exact for p in prods), bits).sqrt()
        lo = min(p.lo for p in prods)
        hi = min(p.hi for p in prods)
        return Enclosure(lo, hi, bits).sqrt()

    return _escalating(compute, seq, ctx)


def example_mass_lower_bound(p, n: int, N: Optional[int] = None,
                             ctx: Optional[PrecisionContext] = None) -> Enclosure:
    """Lower bound for the mass at ``z_n = 1 - n**(-p)`` in the radial example.

    Finite ``N`` gives ``n**(-2p) * exp(2 * sum_{k=n+1}^N (n/k)**p)``, valid for
    the product truncated at ``N``; ``N=None`` gives the closed form
    ``n**(-2p) * exp((n+1) / (2**(p-1) * (p-1)))`` for the infinite product.
    """
    p = as_fraction(p)
    if p <= 1:
        raise InvalidParameter("p must exceed 1")
    if n < 1 or (N is not None and n >= N):
        raise InvalidParameter(f"need 1 <= n < N, got n={n}, N={N}")
    bits = (ctx or default_context()).bits
    prefactor = 1 / Enclosure.of(n, bits).rpow(2 * p)
    if N is None:
        exponent = (n + 1) / (Enclosure.of(2, bits).rpow(p - 1) * (p - 1))
    else:
        total = Enclosure.of(0, bits)
        for k in range(n + 1, N + 1):
            total = total + Enclosure.of(Fraction(n, k), bits).rpow(p)
        exponent = 2 * total
    return prefactor * exponent.exp()


@dataclass(frozen=True)
class MassBoundRow:
    n: int
    N: int
    mass: Enclosure
    bound: Enclosure

    @property
    def holds(self) -> bool:
        """Certified ``mass >= bound`` (the whole mass enclosure lies above the bound)."""
        return self.mass.lo >= self.bound.hi


def example_mass_table(p, N: int, ctx: Optional[PrecisionContext] = None) -> List[MassBoundRow]:
    """Masses of the truncated product over ``z_k = 1 - k**(-p)``, ``k = 1..N``, against the bound.

    Indices follow the example, so ``z_1 = 0`` is included; rows cover ``n = 1..N-1``.
    """
    from .nodes import gen_radial_power

    ctx = ctx or default_context()
    seq = gen_radial_power(p, N, ctx, include_origin=True)
    masses = node_masses(seq, N - 1, ctx)
    return [MassBoundRow(n, N, masses[n - 1], example_mass_lower_bound(p, n, N, ctx))
            for n in range(1, N)]
