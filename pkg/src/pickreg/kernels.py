"""Pick, general Pick, normalized Gram and Hankel matrices.

Sections follow the ``(n+1) x (n+1)`` convention: section index ``n`` uses
the first ``n+1`` nodes or moments ``s_0..s_{2n}``.  Real matrices hold
:class:`Enclosure` entries, complex Hermitian ones :class:`ComplexEnclosure`
entries.  Entries stay exact whenever the inputs are rational; inexact
matrices carry a builder so the spectral solver can rebuild them at a
higher precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

from . import blaschke
from .errors import DimensionError, EscalationExhausted, InvalidParameter
from .nodes import NodePoint, NodeSequence
from .numerics import (
    ComplexEnclosure,
    Enclosure,
    PrecisionContext,
    default_context,
    widen,
)

RECIPES = ("pick", "pick_general", "normalized_gram", "hankel", "embedding", "explicit")
# recipes whose matrices are positive semidefinite by construction
PSD_RECIPES = ("pick", "normalized_gram", "embedding")

Entry = Union[Enclosure, ComplexEnclosure]


@dataclass(frozen=True)
class HermitianKernelMatrix:
    dim: int
    entries: Tuple[Tuple[Entry, ...], ...]
    recipe: str
    source: object = None
    psd: bool = False
    builder: Optional[Callable[[int], "HermitianKernelMatrix"]] = field(
        default=None, compare=False, repr=False)

    @property
    def is_complex(self) -> bool:
        return isinstance(self.entries[0][0], ComplexEnclosure)

    @property
    def is_exact(self) -> bool:
        return all(e.is_exact for row in self.entries for e in row)

    @property
    def bits_used(self) -> int:
        return min(e.bits_used for row in self.entries for e in row)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rebuild(self, bits: int) -> "HermitianKernelMatrix":
        """Same matrix with entries recomputed (or re-enclosed) at ``bits``."""
        if self.builder is not None and not self.is_exact:
            return self.builder(bits)
        return self

    def exact_rows(self) -> List[List[Fraction]]:
        if self.is_complex or not self.is_exact:
            raise ValueError("matrix has no exact real form")
        return [[e.exact for e in row] for row in self.entries]

    def principal(self, m: int) -> "HermitianKernelMatrix":
        """Leading ``m x m`` principal section."""
        if not 1 <= m <= self.dim:
            raise DimensionError(f"section size {m} outside 1..{self.dim}")
        builder = None
        if self.builder is not None:
            builder = lambda bits: self.builder(bits).principal(m)  # noqa: E731
        rows = tuple(row[:m] for row in self.entries[:m])
        return HermitianKernelMatrix(m, rows, self.recipe, self.source, self.psd, builder)

    def with_entry(self, i: int, j: int, value) -> "HermitianKernelMatrix":
        """Copy with entry ``(i, j)`` and its mirror replaced (fault injection)."""
        rows = [list(r) for r in self.entries]
        bits = self.bits_used
        if self.is_complex:
            v = value if isinstance(value, ComplexEnclosure) else ComplexEnclosure.of(value, 0, bits)
            rows[i][j], rows[j][i] = v, v.conj()
        else:
            v = value if isinstance(value, Enclosure) else Enclosure.of(value, bits)
            rows[i][j] = rows[j][i] = v
        return HermitianKernelMatrix(self.dim, tuple(tuple(r) for r in rows), "explicit",
                                     self.source, False, None)


def from_rows(rows: Sequence[Sequence], bits: int = 128, recipe: str = "explicit") -> HermitianKernelMatrix:
    """Real symmetric matrix from rational rows; symmetry is the caller's promise."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimensionError("matrix must be square")
    entries = tuple(tuple(e if isinstance(e, Enclosure) else Enclosure.of(e, bits) for e in r)
                    for r in rows)
    return HermitianKernelMatrix(n, entries, recipe)


def _hermitian(n: int, entry: Callable[[int, int], Entry], real: bool):
    rows: List[List[Optional[Entry]]] = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            e = entry(i, j)
            if real and isinstance(e, ComplexEnclosure):
                e = e.re
            if not real and isinstance(e, Enclosure):
                e = ComplexEnclosure(e, Enclosure.of(0, e.bits_used))
            rows[i][j] = e
            rows[j][i] = e if real else e.conj()
    return tuple(tuple(r) for r in rows)


def _section(seq: NodeSequence, n: int, bits: int) -> Tuple[NodePoint, ...]:
    if n < 0 or n + 1 > len(seq):
        raise DimensionError(f"section n={n} needs {n + 1} nodes, have {len(seq)}")
    return seq.at(bits).points[: n + 1]


def _szego(zi: NodePoint, zj: NodePoint):
    if zi.is_real and zj.is_real:
        return 1 / (1 - zi.re * zj.re)
    return 1 / (1 - zi.z * zj.z.conj())


def pick_matrix(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None) -> HermitianKernelMatrix:
    """``K_n`` with entries ``1 / (1 - z_i conj(z_j))`` over the first ``n+1`` nodes."""
    bits = (ctx or default_context()).bits
    pts = _section(seq, n, bits)
    real = all(p.is_real for p in pts)
    entries = _hermitian(n + 1, lambda i, j: _szego(pts[i], pts[j]), real)
    return HermitianKernelMatrix(n + 1, entries, "pick", seq, True,
                                 lambda b: pick_matrix(seq, n, PrecisionContext(b, max(b, 4096))))


@dataclass(frozen=True)
class TargetValues:
    w: Tuple[ComplexEnclosure, ...]

    @classmethod
    def of(cls, values: Sequence, bits: int = 128) -> "TargetValues":
        out = []
        for v in values:
            if isinstance(v, ComplexEnclosure):
                out.append(v)
            elif isinstance(v, tuple):
                out.append(ComplexEnclosure.of(v[0], v[1], bits))
            else:
                out.append(ComplexEnclosure.of(v, 0, bits))
        for k, v in enumerate(out):
            if v.abs2().compare(1) == 1:
                raise InvalidParameter(f"target w_{k} has modulus > 1")
        return cls(tuple(out))

    def __len__(self):
        return len(self.w)

    @property
    def is_real(self) -> bool:
        return all(v.is_real for v in self.w)

    @property
    def all_zero(self) -> bool:
        return all(v.re.exact == 0 and v.im.exact == 0 for v in self.w)


def pick_general(seq: NodeSequence, targets: TargetValues, n: int,
                 ctx: Optional[PrecisionContext] = None) -> HermitianKernelMatrix:
    """``P_n`` with entries ``(1 - w_i conj(w_j)) / (1 - z_i conj(z_j))``."""
    if n + 1 > len(targets):
        raise DimensionError(f"section n={n} needs {n + 1} targets, have {len(targets)}")
    bits = (ctx or default_context()).bits
    pts = _section(seq, n, bits)
    w = [t.at(bits) for t in targets.w[: n + 1]]
    real = all(p.is_real for p in pts) and all(t.is_real for t in w)

    def entry(i, j):
        return (1 - w[i] * w[j].conj()) * _szego(pts[i], pts[j])

    return HermitianKernelMatrix(n + 1, _hermitian(n + 1, entry, real), "pick_general",
                                 (seq, targets), False,
                                 lambda b: pick_general(seq, targets, n, PrecisionContext(b, max(b, 4096))))


def normalized_gram(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None) -> HermitianKernelMatrix:
    """Gram matrix of the normalized kernels; unit diagonal."""
    bits = (ctx or default_context()).bits
    pts = _section(seq, n, bits)
    real = all(p.is_real for p in pts)
    scale = [(1 - p.abs2()).sqrt() for p in pts]

    def entry(i, j):
        if i == j:
            return Enclosure.of(1, bits)
        return _szego(pts[i], pts[j]) * scale[i] * scale[j]

    return HermitianKernelMatrix(n + 1, _hermitian(n + 1, entry, real), "normalized_gram", seq, True,
                                 lambda b: normalized_gram(seq, n, PrecisionContext(b, max(b, 4096))))


def embedding_matrix(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None) -> HermitianKernelMatrix:
    """``D^{1/2} K_n D^{1/2}`` with ``D`` the self-consistent masses of the first ``n+1`` nodes.

    Its largest eigenvalue is the embedding constant of the measure into H^2.
    """
    bits = (ctx or default_context()).bits
    pts = _section(seq, n, bits)
    head = NodeSequence(pts, seq.provenance)
    roots = [m.sqrt() for m in blaschke.node_masses(head, ctx=PrecisionContext(bits, max(bits, 4096)))]
    real = all(p.is_real for p in pts)
    entries = _hermitian(n + 1, lambda i, j: _szego(pts[i], pts[j]) * roots[i] * roots[j], real)
    return HermitianKernelMatrix(n + 1, entries, "embedding", seq, True,
                                 lambda b: embedding_matrix(seq, n, PrecisionContext(b, max(b, 4096))))


@dataclass(frozen=True)
class MomentSequence:
    values: Tuple[Enclosure, ...]
    provenance: str = "explicit"  # explicit | factorial | lognormal | gaussian
    regenerate: Optional[Callable[[int], "MomentSequence"]] = field(default=None, compare=False, repr=False)

    def __len__(self):
        return len(self.values)

    @classmethod
    def of(cls, values: Sequence, bits: int = 128) -> "MomentSequence":
        if len(values) < 1:
            raise InvalidParameter("moment sequence must be nonempty")
        return cls(tuple(v if isinstance(v, Enclosure) else Enclosure.of(v, bits) for v in values))

    @property
    def is_exact(self) -> bool:
        return all(v.is_exact for v in self.values)

    def at(self, bits: int) -> "MomentSequence":
        if self.is_exact:
            return MomentSequence(tuple(v.at(bits) for v in self.values), self.provenance, self.regenerate)
        if self.regenerate is not None and bits > min(v.bits_used for v in self.values):
            return self.regenerate(bits)
        return self


def moment_generator(kind: str, count: int, ctx: Optional[PrecisionContext] = None) -> MomentSequence:
    """Stock moment sequences: ``factorial`` (s_j = j!), ``lognormal`` (exp(j^2/2)),
    ``gaussian`` (standard normal moments)."""
    if count < 1:
        raise InvalidParameter("count must be >= 1")
    bits = (ctx or default_context()).bits
    if kind == "factorial":
        vals = [Enclosure.of(math.factorial(j), bits) for j in range(count)]
    elif kind == "gaussian":
        vals = [Enclosure.of(0 if j % 2 else _double_factorial(j - 1), bits) for j in range(count)]
    elif kind == "lognormal":
        vals = [Enclosure.of(Fraction(j * j, 2), bits).exp() for j in range(count)]
    else:
        raise InvalidParameter(f"unknown moment kind {kind!r}")
    regen = None
    if kind == "lognormal":
        regen = lambda b: moment_generator(kind, count, PrecisionContext(b, max(b, 4096)))  # noqa: E731
    return MomentSequence(tuple(vals), kind, regen)


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def hankel_matrix(moments: MomentSequence, n: int, ctx: Optional[PrecisionContext] = None) -> HermitianKernelMatrix:
    """``H_n`` with entries ``s_{i+j}``, ``0 <= i, j <= n``."""
    if n < 0 or 2 * n > len(moments) - 1:
        raise DimensionError(f"insufficient-moments: H_{n} needs s_0..s_{2 * n}, have {len(moments)}")
    bits = (ctx or default_context()).bits
    s = moments.at(bits).values
    entries = tuple(tuple(s[i + j] for j in range(n + 1)) for i in range(n + 1))
    psd = moments.provenance in ("factorial", "lognormal", "gaussian")
    return HermitianKernelMatrix(n + 1, entries, "hankel", moments, psd,
                                 lambda b: hankel_matrix(moments, n, PrecisionContext(b, max(b, 4096))))


def derivative_diagonal(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None) -> List[ComplexEnclosure]:
    """Diagonal of ``W = diag(B'(z_0), ..., B'(z_n))`` for the product over these nodes."""
    bits = (ctx or default_context()).bits
    head = NodeSequence(_section(seq, n, bits), seq.provenance)
    return [blaschke.derivative_at_node(head, j, PrecisionContext(bits, max(bits, 4096)))
            for j in range(n + 1)]


@dataclass(frozen=True)
class MatrixFamily:
    """Nested principal sections ``n -> M_n``; ``max_n`` is the largest valid index."""

    name: str
    build: Callable[[int, PrecisionContext], HermitianKernelMatrix]
    max_n: int

    def __call__(self, n: int, ctx: Optional[PrecisionContext] = None) -> HermitianKernelMatrix:
        if n > self.max_n:
            raise DimensionError(f"{self.name} family has sections up to n={self.max_n}")
        return self.build(n, ctx or default_context())


def pick_family(seq: NodeSequence) -> MatrixFamily:
    return MatrixFamily("pick", lambda n, ctx: pick_matrix(seq, n, ctx), len(seq) - 1)


def hankel_family(moments: MomentSequence) -> MatrixFamily:
    return MatrixFamily(f"hankel-{moments.provenance}",
                        lambda n, ctx: hankel_matrix(moments, n, ctx), (len(moments) - 1) // 2)


def gram_family(seq: NodeSequence) -> MatrixFamily:
    return MatrixFamily("normalized_gram", lambda n, ctx: normalized_gram(seq, n, ctx), len(seq) - 1)


def pick_general_family(seq: NodeSequence, targets: TargetValues) -> MatrixFamily:
    return MatrixFamily("pick_general", lambda n, ctx: pick_general(seq, targets, n, ctx),
                        min(len(seq), len(targets)) - 1)


@dataclass(frozen=True)
class DominationReport:
    gap: Enclosure
    lambda0_pick: Enclosure
    lambda0_general: Enclosure
    difference_psd: bool


def domination_gap(seq: NodeSequence, targets: TargetValues, n: int,
                   ctx: Optional[PrecisionContext] = None, rel_tol=Fraction(1, 10 ** 12)) -> DominationReport:
    """``lambda_0(K_n) - lambda_0(P_n)`` together with a PSD certificate for ``K_n - P_n``.

    ``K_n - P_n = D K_n D*`` with ``D = diag(w)``, a congruence of a positive
    definite matrix, so it has no eigenvalue below zero.
    """
    from . import spectra

    ctx = ctx or default_context()
    K = pick_matrix(seq, n, ctx)
    lam_k = spectra.eigenvalue(K, 0, rel_tol, ctx).value
    if targets.all_zero or all(v.re.exact == 0 and v.im.exact == 0 for v in targets.w[: n + 1]):
        return DominationReport(Enclosure.of(0, ctx.bits), lam_k, lam_k, True)
    P = pick_general(seq, targets, n, ctx)
    lam_p = spectra.eigenvalue(P, 0, rel_tol, ctx).value
    diff = _difference(K, P)
    psd = spectra.inertia_below(diff, _psd_shift(diff, ctx), ctx) == 0
    return DominationReport(lam_k - lam_p, lam_k, lam_p, psd)


def _psd_shift(M: HermitianKernelMatrix, ctx: PrecisionContext) -> Fraction:
    # exact matrices are tested at 0; enclosures only down to a tiny negative shift
    return Fraction(0) if M.is_exact and not M.is_complex else -Fraction(1, 2 ** (ctx.bits // 2))


def _difference(A: HermitianKernelMatrix, B: HermitianKernelMatrix) -> HermitianKernelMatrix:
    complex_ = A.is_complex or B.is_complex

    def entry(i, j):
        a, b = A[i, j], B[i, j]
        if complex_:
            return (a if isinstance(a, ComplexEnclosure) else ComplexEnclosure(a, Enclosure.of(0, a.bits_used))) - b
        return a - b

    builder = None
    if A.builder is not None and B.builder is not None:
        builder = lambda bits: _difference(A.rebuild(bits), B.rebuild(bits))  # noqa: E731
    return HermitianKernelMatrix(A.dim, _hermitian(A.dim, entry, not complex_), "explicit",
                                 (A, B), True, builder)


def _invert_exact(rows: List[List[Fraction]]) -> List[List[Fraction]]:
    n = len(rows)
    A = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for k in range(n):
        piv = next(i for i in range(k, n) if A[i][k] != 0)
        A[k], A[piv] = A[piv], A[k]
        inv = 1 / A[k][k]
        A[k] = [x * inv for x in A[k]]
        for i in range(n):
            if i != k and A[i][k] != 0:
                f = A[i][k]
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return [r[n:] for r in A]


def _invert_enclosed(M: HermitianKernelMatrix) -> List[List[ComplexEnclosure]]:
    """Gauss-Jordan without pivoting (valid for positive definite ``M``)."""
    n = M.dim
    bits = M.bits_used
    one, zero = ComplexEnclosure.of(1, 0, bits), ComplexEnclosure.of(0, 0, bits)
    A = [[e if isinstance(e, ComplexEnclosure) else ComplexEnclosure(e, Enclosure.of(0, bits))
          for e in r] + [one if i == j else zero for j in range(n)] for i, r in enumerate(M.entries)]
    for k in range(n):
        if A[k][k].re.sign() != 1:
            raise ZeroDivisionError("pivot not certified positive")
        inv = 1 / A[k][k]
        A[k] = [x * inv for x in A[k]]
        for i in range(n):
            if i != k:
                f = A[i][k]
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return [r[n:] for r in A]


@dataclass(frozen=True)
class IdentityReport:
    n: int
    holds: bool
    exact: bool
    bits_used: int
    worst_entry: Optional[Tuple[int, int]] = None


def proof_identity(seq: NodeSequence, n: int, ctx: Optional[PrecisionContext] = None,
                   backend: str = "auto", K: Optional[HermitianKernelMatrix] = None,
                   rel_width=Fraction(1, 2 ** 32)) -> IdentityReport:
    """Check ``W^* K_n^{-1} W = K_n`` with ``W = diag(B'(z_j))``.

    For complex nodes the identity holds against the transpose
    ``K_n^T = conj(K_n)`` (entry ``(i, j)`` is compared with ``K[j][i]``);
    for real nodes both readings coincide.

    The exact backend compares rational entries; the interval backend
    escalates until every entry of the left side has relative width below
    ``rel_width`` and reports whether all of them contain the matching
    entry of ``K_n``.  ``K`` overrides the Pick matrix (fault injection).
    """
    ctx = ctx or default_context()
    K = K if K is not None else pick_matrix(seq, n, ctx)
    use_exact = backend == "exact" or (backend == "auto" and K.is_exact and not K.is_complex
                                       and K.dim <= 8 and seq.is_exact)
    if use_exact:
        W = [w.re.exact for w in derivative_diagonal(seq, n, ctx)]
        if any(w is None for w in W):
            raise InvalidParameter("exact backend needs real rational nodes")
        Kr = K.exact_rows()
        Ki = _invert_exact(Kr)
        for i in range(K.dim):
            for j in range(K.dim):
                if W[i] * Ki[i][j] * W[j] != Kr[j][i]:
                    return IdentityReport(n, False, True, ctx.bits, (i, j))
        return IdentityReport(n, True, True, ctx.bits)
    while True:
        Kb = _reenclose(K.rebuild(ctx.bits), ctx.bits, strip=True)
        W = [ComplexEnclosure(_strip(w.re), _strip(w.im)) for w in derivative_diagonal(seq, n, ctx)]
        try:
            Ki = _invert_enclosed(Kb)
        except ZeroDivisionError:
            Ki = None
        if Ki is not None:
            lhs = [[W[i].conj() * Ki[i][j] * W[j] for j in range(K.dim)] for i in range(K.dim)]
            wide = any(_rel(e) > rel_width for r in lhs for e in r)
            if not wide:
                for i in range(K.dim):
                    for j in range(K.dim):
                        target = Kb[j, i]
                        if not isinstance(target, ComplexEnclosure):
                            target = ComplexEnclosure(target, Enclosure.of(0, ctx.bits))
                        if not lhs[i][j].overlaps(target):
                            return IdentityReport(n, False, False, ctx.bits, (i, j))
                return IdentityReport(n, True, False, ctx.bits)
        if ctx.exhausted:
            raise EscalationExhausted("identity check did not reach the requested width",
                                      bits=ctx.bits)
        ctx = widen(ctx)


def _rel(z: ComplexEnclosure):
    return max(z.re.rel_width() if z.re.sign() else z.re.width,
               z.im.rel_width() if z.im.sign() else z.im.width)


def _strip(e: Enclosure) -> Enclosure:
    return Enclosure(e.lo, e.hi, e.bits_used)


def _reenclose(M: HermitianKernelMatrix, bits: int, strip: bool = False) -> HermitianKernelMatrix:
    """Entries re-enclosed at ``bits``; ``strip`` drops exact values so arithmetic runs on intervals."""
    def conv(e):
        e = e.at(bits)
        if not strip:
            return e
        if isinstance(e, ComplexEnclosure):
            return ComplexEnclosure(_strip(e.re), _strip(e.im))
        return _strip(e)

    rows = tuple(tuple(conv(e) for e in r) for r in M.entries)
    return HermitianKernelMatrix(M.dim, rows, M.recipe, M.source, M.psd, M.builder)
