"""Discrete Carleson box constants and their comparison with lambda_0.

Angles are measured in turns (argument / 2*pi) so that rational data stays
rational: the closed box ``Q`` with center turn ``c`` and size ``eps``
holds the points with ``|z| >= 1 - eps`` whose turn lies within ``eps/2``
of ``c`` (mod 1).  In radians this is ``|arg z - phi| <= pi*eps``.

Exact quantities are handled as ``Fraction`` and everything else as
:class:`Enclosure`; mixed comparisons that cannot be certified raise
:class:`IndeterminateComparison` after precision escalation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from . import blaschke, kernels, spectra
from .blaschke import DiscreteMeasure
from .errors import IndeterminateComparison, InvalidParameter, InvariantViolation
from .nodes import NodePoint, NodeSequence
from .numerics import (
    Enclosure,
    PrecisionContext,
    default_context,
    iv_div,
    neg,
    pi_enclosure,
    rounders,
    widen,
)

Real = Union[Fraction, Enclosure]


def _enc(x: Real, bits: int) -> Enclosure:
    return x if isinstance(x, Enclosure) else Enclosure.of(x, bits)


def _cmp(a: Real, b: Real, bits: int) -> int:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return (a > b) - (a < b)
    c = _enc(a, bits).compare(_enc(b, bits))
    if c is None:
        raise IndeterminateComparison(f"cannot order {a} and {b}")
    return c


def _float(x: Real) -> float:
    return float(x)


def turn_of(pt: NodePoint, bits: int = 128) -> Real:
    """Argument of ``pt`` in turns, in ``[0, 1)``; exact on the axes and for polar points."""
    if pt.polar is not None:
        return pt.polar[1]
    if pt.is_real:
        return Fraction(0) if pt.re.lo >= 0 else Fraction(1, 2)
    if pt.re.exact == 0:
        return Fraction(1, 4) if pt.im.lo > 0 else Fraction(3, 4)
    pt = pt.at(bits)
    D, U = rounders(bits)
    xlo, xhi, ylo, yhi = pt.re.lo, pt.re.hi, pt.im.lo, pt.im.hi
    if xlo <= 0 <= xhi and ylo <= 0 <= yhi:
        raise IndeterminateComparison("point enclosure contains the origin")
    flip = xhi < 0 and ylo <= 0 <= yhi  # rectangle crosses the branch cut
    if flip:
        xlo, xhi, ylo, yhi = neg(xhi), neg(xlo), neg(yhi), neg(ylo)
    corners = [(x, y) for x in (xlo, xhi) for y in (ylo, yhi)]
    alo = min(D.atan2(y, x) for x, y in corners)
    ahi = max(U.atan2(y, x) for x, y in corners)
    two_pi = 2 * pi_enclosure(bits)
    tlo, thi = iv_div(D, U, alo, ahi, two_pi.lo, two_pi.hi)
    turn = Enclosure(tlo, thi, bits)
    if flip:
        turn = turn + Fraction(1, 2)
    shift = -int(float(turn.mid) // 1)
    return turn + shift if shift else turn


def _radius(pt: NodePoint) -> Real:
    if pt.polar is not None:
        return pt.polar[0]
    if pt.is_real and pt.re.is_exact:
        return abs(pt.re.exact)
    m = pt.modulus()
    return m.exact if m.is_exact else m


def _abs2(pt: NodePoint) -> Real:
    if pt.polar is not None:
        return pt.polar[0] ** 2
    a = pt.abs2()
    return a.exact if a.is_exact else a


def _value(e: Enclosure) -> Real:
    return e.exact if e.is_exact else e


@dataclass(frozen=True)
class CarlesonBox:
    """Closed box of size ``eps`` centered at turn ``turn``."""

    turn: Real
    eps: Real

    def __post_init__(self):
        if _float(self.eps) <= 0 or (isinstance(self.eps, Fraction) and self.eps > 1):
            raise InvalidParameter("box size eps must lie in (0, 1]")

    @classmethod
    def at_angle(cls, phi_over_pi, eps) -> "CarlesonBox":
        """Box at ``phi = pi * phi_over_pi`` radians."""
        return cls(Fraction(phi_over_pi) / 2 % 1, Fraction(eps))

    def phi(self, bits: int = 128) -> Enclosure:
        """Center angle in radians, normalized to ``(-pi, pi]``."""
        t = self.turn
        if isinstance(t, Fraction):
            t = t % 1
            if t > Fraction(1, 2):
                t -= 1
            if t == 0:
                return Enclosure.of(0, bits)
        elif float(t.mid) > 0.5:
            t = t - 1
        return 2 * pi_enclosure(bits) * t

    def __str__(self):
        return f"box(turn={self.turn}, eps={self.eps})"


@dataclass(frozen=True)
class BoxConstantReport:
    constant: Enclosure
    witness: CarlesonBox
    atom_count_in_witness: int
    witness_mass: Enclosure


@dataclass(frozen=True)
class _AtomData:
    point: NodePoint
    turn: Real
    radius: Real
    abs2: Real
    mass: Real


def _atoms(mu: DiscreteMeasure, bits: int) -> List[_AtomData]:
    out = []
    for a in mu:
        pt = a.point.at(bits)
        out.append(_AtomData(pt, turn_of(pt, bits), _radius(pt), _abs2(pt), _value(a.mass)))
    return out


def _circular_distance_le(t: Real, c: Real, half: Real, bits: int) -> bool:
    if isinstance(t, Fraction) and isinstance(c, Fraction) and isinstance(half, Fraction):
        u = (t - c) % 1
        return min(u, 1 - u) <= half
    d = _enc(t, bits) - _enc(c, bits)
    d = d - round(float(d.mid))
    return _cmp(abs(d), half, bits) <= 0


def _in_box(a: _AtomData, box: CarlesonBox, bits: int) -> bool:
    eps = box.eps
    if _cmp(eps, 1, bits) < 0:
        floor = 1 - eps
        if isinstance(a.abs2, Fraction) and isinstance(floor, Fraction):
            if a.abs2 < floor * floor:
                return False
        elif _cmp(a.radius, floor, bits) < 0:
            return False
        return _circular_distance_le(a.turn, box.turn, eps / 2, bits)
    return True


def _sum(values, bits: int) -> Enclosure:
    total: Real = Fraction(0)
    for v in values:
        if isinstance(total, Fraction) and isinstance(v, Fraction):
            total += v
        else:
            total = _enc(total, bits) + v
    return _enc(total, bits)


def box_mass(mu: DiscreteMeasure, box: CarlesonBox, ctx: Optional[PrecisionContext] = None) -> Enclosure:
    """Mass of the closed box ``Q``; boundary atoms count."""
    ctx = ctx or default_context()
    while True:
        atoms = _atoms(mu, ctx.bits)
        inside, undecided = [], []
        for a in atoms:
            try:
                if _in_box(a, box, ctx.bits):
                    inside.append(a.mass)
            except IndeterminateComparison:
                undecided.append(a.mass)
        if not undecided:
            return _sum(inside, ctx.bits)
        if ctx.exhausted:
            raise IndeterminateComparison(
                f"{len(undecided)} atoms on the boundary of {box} at {ctx.bits} bits",
                inclusive=_sum(inside + undecided, ctx.bits), exclusive=_sum(inside, ctx.bits))
        ctx = widen(ctx)


def _gap(a: Real, b: Real, bits: int) -> Real:
    """``(b - a) mod 1`` for turns."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return (b - a) % 1
    d = _enc(b, bits) - _enc(a, bits)
    return d + 1 if float(d.mid) < 0 else d


def _same_direction(p: NodePoint, q: NodePoint) -> bool:
    """Exact test that two rational points have the same argument."""
    if not (p.is_exact and q.is_exact):
        return False
    x1, y1, x2, y2 = p.re.exact, p.im.exact, q.re.exact, q.im.exact
    return x1 * y2 == x2 * y1 and x1 * x2 + y1 * y2 > 0


def _same_turn(a: "_AtomData", b: "_AtomData") -> bool:
    """Certified equality of two atoms' turns (identical, equal rationals, or collinear)."""
    if a is b:
        return True
    if isinstance(a.turn, Fraction) and isinstance(b.turn, Fraction):
        return a.turn == b.turn
    return _same_direction(a.point, b.point)


def _candidates(atoms: List[_AtomData], bits: int):
    """Critical sizes: radial thresholds ``1 - |z_k|``, angular spans and 1.

    Each candidate is ``(eps, radial_abs2, owner)``: ``radial_abs2`` is the
    squared radius defining a radial candidate and ``owner`` the atom index
    (radial) or index pair (angular) whose own comparison is known to hold.
    """
    seen = set()
    out = []

    def add(eps, key, r2=None, owner=None):
        if key in seen:
            return
        seen.add(key)
        out.append((eps, r2, owner))

    add(Fraction(1), ("one",))
    for k, a in enumerate(atoms):
        r = a.radius
        if _float(r) > 0:
            key = ("r", a.abs2) if isinstance(a.abs2, Fraction) else ("r", k)
            add(1 - r, key, a.abs2, k)
    for i, a in enumerate(atoms):
        for j, b in enumerate(atoms):
            if i == j:
                continue
            g = _gap(a.turn, b.turn, bits)
            if isinstance(g, Fraction):
                if 0 < g < 1:
                    add(g, ("a", g))
            elif not _same_direction(a.point, b.point):
                if g.lo <= 0 or g.hi >= 1:
                    raise IndeterminateComparison(f"angular gap between atoms {i} and {j} not certified")
                add(g, ("a", i, j), None, (i, j))
    return out


def _eligible(k: int, a: _AtomData, eps: Real, r2: Optional[Real], owner, bits: int) -> bool:
    if r2 is not None:
        if owner == k:
            return True
        if isinstance(a.abs2, Fraction) and isinstance(r2, Fraction):
            return a.abs2 >= r2
        return _cmp(a.abs2, r2, bits) >= 0
    if _cmp(eps, 1, bits) >= 0:
        return True
    floor = 1 - eps
    if isinstance(a.abs2, Fraction) and isinstance(floor, Fraction):
        return a.abs2 >= floor * floor
    return _cmp(a.radius, floor, bits) >= 0


def _best_window(elig: List[Tuple[int, _AtomData]], eps: Real, owner, bits: int):
    """Heaviest arc of ``eps`` turns over atoms sorted by turn (two-pointer sweep).

    Returns ``(mass, first, last, count)`` with ``first``/``last`` the extreme
    turns covered (``last`` may exceed 1 after wrapping).
    """
    m = len(elig)
    elig = sorted(elig, key=lambda ka: _float(ka[1].turn))
    data = [a for _, a in elig]
    turns = [a.turn for _, a in elig]
    masses = [a.mass for _, a in elig]
    whole = _cmp(eps, 1, bits) >= 0
    if whole or all(isinstance(t, Fraction) and t == turns[0] for t in turns):
        return _sum(masses, bits), turns[0], turns[-1], m
    ext = turns + [t + 1 for t in turns]
    prefix = [_sum([], bits)]
    for k in range(2 * m):
        prefix.append(prefix[-1] + masses[k % m])

    def fits(i, j):
        # the owning pair spans exactly eps; so does any pair sharing its turns
        if owner is not None and _same_turn(data[i % m], owner[0]) and _same_turn(data[j % m], owner[1]):
            return True
        return _cmp(_arc(ext[i], ext[j], bits), eps, bits) <= 0

    best = None
    j = 0
    for i in range(m):
        j = max(j, i + 1)
        while j < i + m and fits(i, j):
            j += 1
        mass = prefix[j] - prefix[i]
        if best is None or _better(mass, best[0]):
            best = (mass, ext[i], ext[j - 1], j - i)
    return best


def _arc(a: Real, b: Real, bits: int) -> Real:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return b - a
    return _enc(b, bits) - a


def _better(a: Enclosure, b: Enclosure) -> bool:
    if a.is_exact and b.is_exact:
        return a.exact > b.exact
    return a.lo > b.lo


def _box_constant_at(mu: DiscreteMeasure, bits: int) -> BoxConstantReport:
    atoms = _atoms(mu, bits)
    ratios = []
    for eps, r2, owner in _candidates(atoms, bits):
        elig = [(k, a) for k, a in enumerate(atoms) if _eligible(k, a, eps, r2, owner, bits)]
        if not elig:
            continue
        pair = (atoms[owner[0]], atoms[owner[1]]) if r2 is None and owner is not None else None
        mass, first, last, count = _best_window(elig, eps, pair, bits)
        if isinstance(first, Fraction) and isinstance(last, Fraction):
            center = ((first + last) / 2) % 1
        else:
            center = (_enc(first, bits) + _enc(last, bits)) * Fraction(1, 2)
        ratio = mass / _enc(eps, bits)
        ratios.append((ratio, CarlesonBox(center, eps), count, mass))
    best = ratios[0]
    for r in ratios[1:]:
        if _better(r[0], best[0]):
            best = r
    if all(r[0].is_exact for r in ratios):
        constant = best[0]
    else:
        # supremum of enclosures: [max lo, max hi]
        constant = Enclosure(max(r[0].lo for r in ratios), max(r[0].hi for r in ratios), bits)
    return BoxConstantReport(constant, best[1], best[2], best[3])


def box_constant(mu: DiscreteMeasure, ctx: Optional[PrecisionContext] = None) -> BoxConstantReport:
    """``sup nu(Q)/eps`` over all boxes by critical-candidate enumeration.

    For a fixed set of captured atoms the ratio grows as the box shrinks, so
    the supremum is attained at a box that cannot shrink further: its size
    is either a radial threshold ``1 - |z_k|`` or the angular span of the
    captured atoms (or 1, the whole disk).
    """
    if len(mu) == 0:
        raise InvalidParameter("box_constant needs at least one atom")
    ctx = ctx or default_context()
    while True:
        try:
            return _box_constant_at(mu, ctx.bits)
        except IndeterminateComparison:
            if ctx.exhausted:
                raise
            ctx = widen(ctx)


def box_constant_trajectory(seq: NodeSequence, n_max: int, weights: Union[str, int] = "self",
                            ctx: Optional[PrecisionContext] = None, n_min: int = 0,
                            strict: bool = False) -> spectra.Trajectory:
    """Box constants of ``nu`` over the first ``n+1`` nodes, ``n = n_min..n_max``.

    ``weights="self"`` uses the finite product over exactly those nodes; an
    integer ``M`` uses the product over the first ``M`` nodes (ambient
    truncation).  ``strict`` certifies a strictly increasing trajectory.
    """
    ctx = ctx or default_context()
    if n_max + 1 > len(seq):
        raise InvalidParameter(f"n_max={n_max} needs {n_max + 1} nodes, have {len(seq)}")
    if weights != "self":
        weights = int(weights)
        if weights < n_max + 1 or weights > len(seq):
            raise InvalidParameter("ambient weight count must lie in n_max+1..len(seq)")
    records = []
    for n in range(n_min, n_max + 1):
        if weights == "self":
            mu = blaschke.nu_measure(seq.head(n + 1), ctx=ctx)
        else:
            mu = blaschke.nu_measure(seq.head(weights), n + 1, ctx=ctx)
        rep = box_constant(mu, ctx)
        aux = {"box_constant": rep.constant, "witness_phi": rep.witness.phi(ctx.bits),
               "witness_eps": _enc(rep.witness.eps, ctx.bits)}
        if strict and records:
            prev = records[-1].aux["box_constant"]
            if rep.constant.compare(prev) != 1:
                raise InvariantViolation("box-constant-increasing",
                                         f"box constant at n={n} does not exceed n={n - 1}")
        records.append(spectra.TrajectoryRecord(n, None, aux, rep.constant.bits_used))
    return spectra.Trajectory(records, f"box-{weights}")


def carleson_constant_factor(bits: int = 128) -> Enclosure:
    """``(2 + pi)^2``, the test-function constant between box and embedding constants.

    With ``a = (1 - eps) e^{i phi}`` the normalized kernel
    ``f_a(z) = (1 - |a|^2)^{1/2} / (1 - conj(a) z)`` has unit norm, and on
    ``Q`` one has ``|1 - conj(a) z| <= (2 + pi) eps`` and ``1 - |a|^2 >= eps``.
    Hence ``nu(Q) / eps <= (2 + pi)^2 * embed``.
    """
    return (2 + pi_enclosure(bits)).square()


@dataclass(frozen=True)
class TheoremComparison:
    n: int
    lambda0: Enclosure
    embed: Enclosure
    box: Enclosure
    product: Enclosure
    identity_holds: bool
    box_below_embed: bool  # box <= (2+pi)^2 * embed, the derived direction
    embed_below_box: bool  # embed <= (2+pi)^2 * box

    def failures(self) -> List[str]:
        out = []
        if not self.identity_holds:
            out.append("embed-lambda0-identity")
        if not self.box_below_embed:
            out.append("box-le-c-embed")
        if not self.embed_below_box:
            out.append("embed-le-c-box")
        return out


def theorem_comparison(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None,
                       rel_tol=Fraction(1, 10 ** 24), strict: bool = True,
                       box: Optional[Enclosure] = None,
                       pick: Optional[kernels.HermitianKernelMatrix] = None) -> TheoremComparison:
    """lambda_0(K_n), the embedding constant and the box constant of self-consistent ``nu``.

    ``embed = lambda_max(D^{1/2} K_n D^{1/2})`` must satisfy ``embed * lambda_0 = 1``.
    With ``strict`` a failed check raises :class:`InvariantViolation`;
    ``pick`` replaces the Pick matrix (used for fault injection).
    """
    ctx = ctx or default_context()
    if n + 1 > len(seq):
        raise InvalidParameter(f"section n={n} needs {n + 1} nodes")
    K = pick if pick is not None else kernels.pick_matrix(seq, n, ctx)
    # the identity needs a relative enclosure, so raise the requested precision
    # until lambda_0 is certified positive
    bits = ctx.bits
    while True:
        lam = spectra.eigenvalue(K, 0, rel_tol, PrecisionContext(bits, max(ctx.max_bits, bits))).value
        if lam.lo > 0 or bits >= ctx.max_bits:
            break
        bits = min(2 * bits, ctx.max_bits)
    E = kernels.embedding_matrix(seq, n, ctx)
    embed = spectra.eigenvalue(E, n, rel_tol, ctx).value
    if box is None:
        box = box_constant(blaschke.nu_measure(seq.head(n + 1), ctx=ctx), ctx).constant
    c = carleson_constant_factor(max(ctx.bits, 128))
    product = embed * lam
    rec = TheoremComparison(
        n, lam, embed, box, product,
        identity_holds=product.contains(1),
        box_below_embed=box.hi <= (c * embed).lo,
        embed_below_box=embed.hi <= (c * box).lo,
    )
    if strict and rec.failures():
        raise InvariantViolation(rec.failures()[0], f"theorem comparison at n={n}: {rec}")
    return rec
