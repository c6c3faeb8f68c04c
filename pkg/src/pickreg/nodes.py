"""Interpolation node sequences in the open unit disk."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from .errors import IndeterminateComparison, InvalidParameter
from .numerics import (
    ComplexEnclosure,
    Enclosure,
    PrecisionContext,
    as_fraction,
    default_context,
    rounders,
    widen,
)


@dataclass(frozen=True)
class NodePoint:
    """A point of the disk given by certified real and imaginary parts.

    ``refine`` recomputes an inexact point at a higher precision; ``polar``
    holds an exact ``(radius, turn)`` pair for points built from polar data,
    where ``turn`` is the argument divided by 2*pi.
    """

    re: Enclosure
    im: Enclosure
    polar: Optional[Tuple[Fraction, Fraction]] = None
    refine: Optional[Callable[[int], "NodePoint"]] = field(default=None, compare=False, repr=False)

    @classmethod
    def of(cls, re, im=0, bits: int = 128) -> "NodePoint":
        return cls(Enclosure.of(re, bits), Enclosure.of(im, bits))

    @classmethod
    def from_polar(cls, radius, turn, bits: int = 128) -> "NodePoint":
        radius, turn = as_fraction(radius), as_fraction(turn) % 1
        if radius < 0:
            raise InvalidParameter("radius must be nonnegative")

        def build(b):
            c, s = _cos_sin_turn(turn, b)
            r = Enclosure.of(radius, b)
            return cls(r * c, r * s, (radius, turn), build)

        return build(bits)

    @property
    def is_exact(self) -> bool:
        return self.re.is_exact and self.im.is_exact

    @property
    def is_real(self) -> bool:
        return self.im.exact == 0

    @property
    def z(self) -> ComplexEnclosure:
        return ComplexEnclosure(self.re, self.im)

    @property
    def bits_used(self) -> int:
        return max(self.re.bits_used, self.im.bits_used)

    def at(self, bits: int) -> "NodePoint":
        if self.is_exact:
            return NodePoint(self.re.at(bits), self.im.at(bits), self.polar, self.refine)
        if self.refine is not None and bits > self.bits_used:
            return self.refine(bits)
        return self

    def abs2(self) -> Enclosure:
        if self.polar is not None and not self.is_exact:
            return Enclosure.of(self.polar[0] ** 2, self.bits_used)
        if self.is_real:
            return self.re.square()
        return self.re.square() + self.im.square()

    def modulus(self) -> Enclosure:
        if self.polar is not None:
            return Enclosure.of(self.polar[0], self.bits_used)
        if self.is_real:
            return abs(self.re)
        return self.abs2().sqrt()

    def __str__(self):
        if self.is_real:
            return str(self.re)
        return f"{self.re}{'+' if self.im.lo >= 0 else ''}{self.im}i"


def _cos_sin_turn(turn: Fraction, bits: int):
    """Enclosures of cos(2*pi*turn) and sin(2*pi*turn) for an exact rational turn."""
    quarter = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1),
               Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1)}
    if turn in quarter:
        c, s = quarter[turn]
        return Enclosure.of(c, bits), Enclosure.of(s, bits)
    work = bits + 32
    down, up = rounders(work)
    tlo, thi = Enclosure.of(turn, work).lo, Enclosure.of(turn, work).hi
    two_pi_lo = down.mul(2, down.const_pi())
    two_pi_hi = up.mul(2, up.const_pi())
    theta_lo, theta_hi = down.mul(two_pi_lo, tlo), up.mul(two_pi_hi, thi)
    # cos and sin are 1-Lipschitz: widen the correctly rounded midpoint values
    mid = Enclosure(theta_lo, theta_hi, work).mid
    slack = up.sub(theta_hi, theta_lo)
    out = []
    for fn in ("cos", "sin"):
        lo = down.sub(getattr(down, fn)(mid), slack)
        hi = up.add(getattr(up, fn)(mid), slack)
        out.append(Enclosure(max(lo, -1), min(hi, 1), work))
    dlo, dhi = rounders(bits)
    return tuple(Enclosure(dlo.plus(e.lo), dhi.plus(e.hi), bits) for e in out)


@dataclass(frozen=True)
class Provenance:
    kind: str  # explicit | radial_power | geometric
    parameter: Optional[Fraction] = None
    first_index: int = 1

    def as_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.parameter is not None:
            d["p" if self.kind == "radial_power" else "r"] = str(self.parameter)
        if self.kind != "explicit":
            d["first_index"] = self.first_index
        return d


@dataclass(frozen=True)
class NodeSequence:
    points: Tuple[NodePoint, ...]
    provenance: Provenance = Provenance("explicit")

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i) -> NodePoint:
        return self.points[i]

    def __iter__(self) -> Iterator[NodePoint]:
        return iter(self.points)

    @property
    def is_exact(self) -> bool:
        return all(p.is_exact for p in self.points)

    @property
    def is_real(self) -> bool:
        return all(p.is_real for p in self.points)

    def head(self, count: int) -> "NodeSequence":
        """The first ``count`` nodes, keeping provenance."""
        return NodeSequence(self.points[:count], self.provenance)

    def at(self, bits: int) -> "NodeSequence":
        return NodeSequence(tuple(p.at(bits) for p in self.points), self.provenance)


def explicit(values: Sequence, bits: int = 128) -> NodeSequence:
    """Sequence from rationals or ``(re, im)`` pairs, without validation."""
    pts = []
    for v in values:
        if isinstance(v, NodePoint):
            pts.append(v)
        elif isinstance(v, tuple):
            pts.append(NodePoint.of(v[0], v[1], bits))
        else:
            pts.append(NodePoint.of(v, 0, bits))
    return NodeSequence(tuple(pts), Provenance("explicit"))


def gen_radial_power(p, count: int, ctx: Optional[PrecisionContext] = None,
                     include_origin: bool = False) -> NodeSequence:
    """Nodes ``z_k = 1 - k**(-p)``, by default skipping the zero node at ``k = 1``.

    Integer ``p`` gives exact rational nodes; otherwise nodes are enclosures
    that can be recomputed at higher precision.  ``include_origin`` starts
    at ``k = 1``; such a sequence fails :func:`validate` but is what the
    finite-truncation mass bounds are stated for.
    """
    p = as_fraction(p)
    if p <= 1:
        raise InvalidParameter(f"radial power needs p > 1, got {p}")
    if count < 1:
        raise InvalidParameter("count must be >= 1")
    ctx = ctx or default_context()
    first = 1 if include_origin else 2  # 1 - 1**(-p) = 0 is the origin
    pts = []
    for k in range(first, first + count):
        if p.denominator == 1:
            pts.append(NodePoint.of(1 - Fraction(1, k ** p.numerator), 0, ctx.bits))
        else:
            pts.append(_radial_point(k, p, ctx.bits))
    return NodeSequence(tuple(pts), Provenance("radial_power", p, first))


def _radial_point(k: int, p: Fraction, bits: int) -> NodePoint:
    def build(b):
        re = 1 - 1 / Enclosure.of(k, b).rpow(p)
        return NodePoint(re, Enclosure.of(0, b), None, build)

    return build(bits)


def gen_geometric(r, count: int, ctx: Optional[PrecisionContext] = None) -> NodeSequence:
    """Nodes ``z_k = 1 - r**k`` for ``k = 1..count``; a uniformly separated family."""
    r = as_fraction(r)
    if not 0 < r < 1:
        raise InvalidParameter(f"geometric ratio must lie in (0, 1), got {r}")
    if count < 1:
        raise InvalidParameter("count must be >= 1")
    bits = (ctx or default_context()).bits
    pts = tuple(NodePoint.of(1 - r ** k, 0, bits) for k in range(1, count + 1))
    return NodeSequence(pts, Provenance("geometric", r, 1))


def blaschke_sum(seq: NodeSequence) -> Enclosure:
    """Certified partial Blaschke sum of ``1 - |z_k|`` over the sequence."""
    total = Enclosure.of(0, max((p.bits_used for p in seq), default=128))
    for pt in seq:
        total = total + (1 - pt.modulus())
    return total


@dataclass(frozen=True)
class Violation:
    kind: str  # outside-disk | origin | duplicate
    indices: Tuple[int, ...]

    def __str__(self):
        return f"{self.kind}({','.join(map(str, self.indices))})"


def _certify(test: Callable[[int], Optional[bool]], ctx: PrecisionContext, what: str) -> bool:
    while True:
        verdict = test(ctx.bits)
        if verdict is not None:
            return verdict
        if ctx.exhausted:
            raise IndeterminateComparison(f"cannot certify {what} at {ctx.bits} bits")
        ctx = widen(ctx)


def validate(seq: NodeSequence, ctx: Optional[PrecisionContext] = None) -> List[Violation]:
    """Check nonemptiness, ``0 < |z| < 1`` and pairwise distinctness with certified comparisons."""
    ctx = ctx or default_context()
    out: List[Violation] = []
    if len(seq) == 0:
        return [Violation("empty", ())]

    def inside(i):
        def test(bits):
            c = seq[i].at(bits).abs2().compare(1)
            return None if c is None else c < 0
        return test

    def nonzero(i):
        def test(bits):
            s = seq[i].at(bits).abs2().sign()
            return None if s is None else s > 0
        return test

    def distinct(i, j):
        def test(bits):
            s = (seq[i].at(bits).z - seq[j].at(bits).z).abs2().sign()
            return None if s is None else s > 0
        return test

    for i in range(len(seq)):
        if not _certify(inside(i), ctx, f"|z_{i}| < 1"):
            out.append(Violation("outside-disk", (i,)))
        if not _certify(nonzero(i), ctx, f"z_{i} != 0"):
            out.append(Violation("origin", (i,)))
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if not _certify(distinct(i, j), ctx, f"z_{i} != z_{j}"):
                out.append(Violation("duplicate", (i, j)))
    return out
