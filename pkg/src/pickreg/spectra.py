"""Certified eigenvalues of Hermitian kernel matrices by inertia bisection.

The number of eigenvalues of ``M`` below a shift ``s`` equals the number of
negative pivots of an LDL^T (LDL^* for complex data) factorization of
``M - s*I``.  The interval backend factors without pivoting and gives up
(returns ``None``) as soon as a pivot sign straddles zero; the solver then
raises the working precision.  The exact backend works on rationals with a
symmetric diagonal pivot search and 2x2 blocks, so it always answers.

Approximate eigenvalues from python-flint are used only to pick good
bisection shifts; every reported bound comes from a certified count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import flint

from .errors import EscalationExhausted, InvalidParameter, InvariantViolation
from .kernels import HermitianKernelMatrix, MatrixFamily
from .numerics import (
    Enclosure,
    PrecisionContext,
    as_fraction,
    default_context,
    iv_div,
    iv_mul,
    iv_sqr,
    neg,
    rounders,
    round_rational,
    widen,
)

# exact rational elimination is used up to this dimension
EXACT_DIM_LIMIT = 12
BACKENDS = ("auto", "exact", "interval")


# ---------------------------------------------------------------------------
# counting kernels

def _negatives_exact(rows: Sequence[Sequence[Fraction]], shift: Fraction) -> int:
    """Negative inertia of ``rows - shift*I`` by exact symmetric elimination."""
    return _inertia_exact(rows, shift)[0]


def _inertia_exact(rows: Sequence[Sequence[Fraction]], shift: Fraction) -> Tuple[int, int]:
    """``(negatives, zeros)`` of the inertia of ``rows - shift*I``."""
    n = len(rows)
    A = [[Fraction(x) for x in r] for r in rows]
    for i in range(n):
        A[i][i] -= shift
    idx = list(range(n))
    negatives = 0
    while idx:
        piv = next((i for i in idx if A[i][i] != 0), None)
        if piv is not None:
            d = A[piv][piv]
            if d < 0:
                negatives += 1
            idx.remove(piv)
            col = {i: A[i][piv] for i in idx if A[i][piv] != 0}
            for i, a in col.items():
                t = a / d
                for j in idx:
                    if A[piv][j] != 0:
                        A[i][j] -= t * A[piv][j]
            continue
        # zero diagonal: a nonzero off-diagonal b gives the block [[0, b], [b, 0]]
        pair = next(((i, j) for i in idx for j in idx if i < j and A[i][j] != 0), None)
        if pair is None:
            return negatives, len(idx)  # remaining block is zero
        p, q = pair
        b = A[p][q]
        negatives += 1
        idx.remove(p)
        idx.remove(q)
        cp = {i: A[i][p] for i in idx}
        cq = {i: A[i][q] for i in idx}
        for i in idx:
            for j in idx:
                A[i][j] -= (cp[i] * cq[j] + cq[i] * cp[j]) / b
    return negatives, 0


def _negatives_real(lo, hi, shift: Fraction, bits: int) -> Optional[int]:
    """Interval LDL^T count on endpoint matrices ``lo``/``hi`` (upper triangle used)."""
    D, U = rounders(bits)
    n = len(lo)
    slo, shi = round_rational(shift, bits)
    A = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A[i][j] = (lo[i][j], hi[i][j])
        A[i][i] = (D.sub(lo[i][i], shi), U.sub(hi[i][i], slo))
    negatives = 0
    for k in range(n):
        dlo, dhi = A[k][k]
        if dlo > 0:
            pass
        elif dhi < 0:
            negatives += 1
        else:
            return None
        row = A[k]
        for i in range(k + 1, n):
            alo, ahi = row[i]
            tlo, thi = iv_div(D, U, alo, ahi, dlo, dhi)
            Ai = A[i]
            for j in range(i, n):
                blo, bhi = row[j]
                plo, phi = iv_mul(D, U, tlo, thi, blo, bhi)
                clo, chi = Ai[j]
                Ai[j] = (D.sub(clo, phi), U.sub(chi, plo))
    return negatives


def _negatives_complex(re_lo, re_hi, im_lo, im_hi, shift: Fraction, bits: int) -> Optional[int]:
    """Interval LDL^* count for a Hermitian matrix given by real/imaginary endpoints."""
    D, U = rounders(bits)
    n = len(re_lo)
    slo, shi = round_rational(shift, bits)
    R = [[None] * n for _ in range(n)]
    I = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            R[i][j] = (re_lo[i][j], re_hi[i][j])
            I[i][j] = (im_lo[i][j], im_hi[i][j])
        R[i][i] = (D.sub(re_lo[i][i], shi), U.sub(re_hi[i][i], slo))
    negatives = 0
    for k in range(n):
        dlo, dhi = R[k][k]
        if dlo > 0:
            pass
        elif dhi < 0:
            negatives += 1
        else:
            return None
        for i in range(k + 1, n):
            # t = conj(A[k][i]) / d
            ar, ai = R[k][i], I[k][i]
            tr = iv_div(D, U, ar[0], ar[1], dlo, dhi)
            ti = iv_div(D, U, neg(ai[1]), neg(ai[0]), dlo, dhi)
            # diagonal update uses |A[k][i]|^2 / d for a tight real result
            s1 = iv_sqr(D, U, *ar)
            s2 = iv_sqr(D, U, *ai)
            mod2 = (D.add(s1[0], s2[0]), U.add(s1[1], s2[1]))
            q = iv_div(D, U, mod2[0], mod2[1], dlo, dhi)
            c = R[i][i]
            R[i][i] = (D.sub(c[0], q[1]), U.sub(c[1], q[0]))
            for j in range(i + 1, n):
                br, bi = R[k][j], I[k][j]
                # t * b = (tr + i ti)(br + i bi)
                p1 = iv_mul(D, U, tr[0], tr[1], br[0], br[1])
                p2 = iv_mul(D, U, ti[0], ti[1], bi[0], bi[1])
                p3 = iv_mul(D, U, tr[0], tr[1], bi[0], bi[1])
                p4 = iv_mul(D, U, ti[0], ti[1], br[0], br[1])
                pr = (D.sub(p1[0], p2[1]), U.sub(p1[1], p2[0]))
                pi = (D.add(p3[0], p4[0]), U.add(p3[1], p4[1]))
                cr, ci = R[i][j], I[i][j]
                R[i][j] = (D.sub(cr[0], pr[1]), U.sub(cr[1], pr[0]))
                I[i][j] = (D.sub(ci[0], pi[1]), U.sub(ci[1], pi[0]))
    return negatives


def _entries_at(M: HermitianKernelMatrix, bits: int) -> HermitianKernelMatrix:
    """``M`` with every entry enclosed at ``bits`` (rebuilt when inexact)."""
    M = M.rebuild(bits)
    rows = tuple(tuple(e.at(bits) for e in r) for r in M.entries)
    return HermitianKernelMatrix(M.dim, rows, M.recipe, M.source, M.psd, M.builder)


def _endpoints(M: HermitianKernelMatrix):
    if M.is_complex:
        return ([[e.re.lo for e in r] for r in M.entries], [[e.re.hi for e in r] for r in M.entries],
                [[e.im.lo for e in r] for r in M.entries], [[e.im.hi for e in r] for r in M.entries])
    return ([[e.lo for e in r] for r in M.entries], [[e.hi for e in r] for r in M.entries])


def _use_exact(M: HermitianKernelMatrix, backend: str) -> bool:
    if backend not in BACKENDS:
        raise InvalidParameter(f"unknown backend {backend!r}")
    exact_ok = M.is_exact and not M.is_complex
    if backend == "exact":
        if not exact_ok:
            raise InvalidParameter("exact backend needs an exact real matrix")
        return True
    return backend == "auto" and exact_ok and M.dim <= EXACT_DIM_LIMIT


def inertia_below(M: HermitianKernelMatrix, shift, ctx: Optional[PrecisionContext] = None,
                  backend: str = "auto", escalate: bool = True) -> Optional[int]:
    """Number of eigenvalues of ``M`` strictly below ``shift``.

    Returns ``None`` when the interval count is indeterminate and
    ``escalate`` is off; otherwise raises :class:`EscalationExhausted`.
    """
    ctx = ctx or default_context()
    if isinstance(shift, Enclosure):
        if not shift.is_exact:
            raise InvalidParameter("shift must be an exact rational")
        shift = shift.exact
    shift = as_fraction(shift)
    if _use_exact(M, backend):
        return _negatives_exact(M.exact_rows(), shift)
    while True:
        Mb = _entries_at(M, ctx.bits)
        ends = _endpoints(Mb)
        if Mb.is_complex:
            count = _negatives_complex(*ends, shift, ctx.bits)
        else:
            count = _negatives_real(*ends, shift, ctx.bits)
        if count is not None or not escalate:
            return count
        if ctx.exhausted:
            raise EscalationExhausted(f"inertia at shift {shift} indeterminate at {ctx.bits} bits",
                                      bits=ctx.bits, detail={"shift": str(shift)})
        ctx = widen(ctx)


# ---------------------------------------------------------------------------
# bisection solver

def _frac_of(x) -> Fraction:
    return as_fraction(x)


def _log2(q: Fraction) -> int:
    return q.numerator.bit_length() - q.denominator.bit_length()


def _dyadic(q: Fraction, digits: int) -> Fraction:
    """``q`` rounded to a dyadic rational with about ``digits`` significant bits."""
    if q == 0:
        return q
    e = digits - _log2(abs(q))
    if e >= 0:
        return Fraction(round(q * (1 << e)), 1 << e)
    return Fraction(round(q / (1 << -e)) * (1 << -e))


def _flint_hints(M: HermitianKernelMatrix, bits: int) -> Optional[List[Fraction]]:
    """Approximate sorted eigenvalues (not certified); ``None`` if flint fails."""
    def q(e):
        f = _frac_of(e.mid)
        return flint.fmpq(f.numerator, f.denominator)

    old = flint.ctx.prec
    try:
        flint.ctx.prec = bits + 16
        if M.is_complex:
            rows = [[flint.acb(q(e.re), q(e.im)) for e in r] for r in M.entries]
        else:
            rows = [[flint.acb(q(e)) for e in r] for r in M.entries]
        vals = flint.acb_mat(rows).eig(algorithm="approx")
        out = []
        for v in vals:
            man, exp = v.real.mid().man_exp()
            man, exp = int(man), int(exp)
            out.append(Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp))
        return sorted(out)
    except Exception:  # hints are optional
        return None
    finally:
        flint.ctx.prec = old


@dataclass(frozen=True)
class EigenEnclosure:
    """Certified ``lambda_k`` with the counts backing both endpoints.

    ``count_lo`` is the number of eigenvalues below ``value.lo`` (``<= k``);
    ``count_hi`` the number below ``value.hi`` (``>= k+1``).  ``None`` marks
    an endpoint taken from an analytic bound (Gershgorin or positive
    semidefiniteness by construction) rather than from a count.
    """

    k: int
    value: Enclosure
    dim: int
    count_lo: Optional[int] = None
    count_hi: Optional[int] = None
    near_zero: bool = False

    @property
    def lo(self):
        return self.value.lo

    @property
    def hi(self):
        return self.value.hi

    def __str__(self):
        return f"lambda_{self.k} in {self.value}"


class _Solver:
    """Bisection state for one matrix: precision, count cache and hints."""

    def __init__(self, M: HermitianKernelMatrix, ctx: PrecisionContext, backend: str = "auto"):
        self.M = M
        self.ctx = ctx
        self.requested_bits = ctx.bits
        self.exact = _use_exact(M, backend)
        self.counts: Dict[Fraction, int] = {}
        self.zeros: Dict[Fraction, int] = {}  # exact backend: nullity at a probed shift
        self._hints: Optional[List[Fraction]] = None
        self._hint_bits = 0
        self._ends = None
        self._ends_bits = 0
        self._rows = M.exact_rows() if self.exact else None
        self.bracket = self._gershgorin()

    # precision

    def _escalate(self, shift):
        if self.ctx.exhausted:
            raise EscalationExhausted(
                f"inertia at shift {float(shift):.6g} indeterminate at {self.ctx.bits} bits",
                bits=self.ctx.bits, detail={"shift": str(shift)})
        self.ctx = widen(self.ctx)

    def count(self, shift: Fraction) -> int:
        c = self.counts.get(shift)
        if c is not None:
            return c
        if self.exact:
            c, self.zeros[shift] = _inertia_exact(self._rows, shift)
        else:
            while True:
                if self._ends_bits != self.ctx.bits:
                    Mb = _entries_at(self.M, self.ctx.bits)
                    self._ends, self._ends_bits = _endpoints(Mb), self.ctx.bits
                if self.M.is_complex:
                    c = _negatives_complex(*self._ends, shift, self.ctx.bits)
                else:
                    c = _negatives_real(*self._ends, shift, self.ctx.bits)
                if c is not None:
                    break
                self._escalate(shift)
        self.counts[shift] = c
        return c

    def hints(self) -> Optional[List[Fraction]]:
        if self._hints is None or self._hint_bits < self.ctx.bits:
            Mb = _entries_at(self.M, self.ctx.bits)
            self._hints, self._hint_bits = _flint_hints(Mb, self.ctx.bits), self.ctx.bits
        return self._hints

    # bounds

    def _gershgorin(self) -> Tuple[Fraction, Fraction]:
        M = _entries_at(self.M, self.ctx.bits)
        lows, highs = [], []
        for i, row in enumerate(M.entries):
            radius = Fraction(0)
            for j, e in enumerate(row):
                if j == i:
                    continue
                mag = abs(e) if not M.is_complex else e.abs2().sqrt()
                radius += _frac_of(mag.hi)
            d = row[i].re if M.is_complex else row[i]
            if d.is_exact:
                lows.append(d.exact - radius)
                highs.append(d.exact + radius)
            else:
                lows.append(_frac_of(d.lo) - radius)
                highs.append(_frac_of(d.hi) + radius)
        lo, hi = min(lows), max(highs)
        if self.M.psd:
            lo = max(lo, Fraction(0))
            hi = max(hi, lo)
        return lo, hi

    # tolerance

    def _done(self, lo: Fraction, hi: Fraction, rel_tol: Fraction) -> Tuple[bool, bool]:
        """(finished, near_zero) for the bracket ``[lo, hi]``."""
        if hi - lo <= 0:
            return True, False
        thresh = Fraction(1, 2 ** (self.requested_bits // 4))
        if -thresh < lo and hi < thresh:
            # certified below the threshold; once the sign is certified the
            # relative tolerance still applies, otherwise an absolute width does
            if lo > 0:
                return hi - lo <= rel_tol * lo, True
            return hi - lo <= Fraction(1, 2 ** (self.requested_bits // 2)), True
        if lo > 0:
            return hi - lo <= rel_tol * lo, False
        if hi < 0:
            return hi - lo <= rel_tol * -hi, False
        return False, False

    @staticmethod
    def _split(lo: Fraction, hi: Fraction, zoom: int, digits: int) -> Fraction:
        if lo < 0 < hi:
            return Fraction(0)
        if lo == 0:
            return _dyadic(hi / 2 ** zoom, digits)
        if hi == 0:
            return _dyadic(lo / 2 ** zoom, digits)
        neg = hi < 0
        a, b = (-hi, -lo) if neg else (lo, hi)
        gap = _log2(b / a)
        mid = a * 2 ** (gap // 2) if gap >= 2 else (a + b) / 2
        if not a < mid < b:
            mid = (a + b) / 2
        d = _dyadic(mid, max(digits, 8 - _log2((b - a) / b)))
        if not a < d < b:
            d = mid
        return -d if neg else d

    def solve(self, k: int, rel_tol: Fraction, bracket=None) -> EigenEnclosure:
        lo, hi = bracket or self.bracket
        count_lo = count_hi = None
        # an exact probe that hit the eigenvalue itself settles it
        for s, z in self.zeros.items():
            c = self.counts[s]
            if z and c <= k < c + z:
                return EigenEnclosure(k, Enclosure.of(s, self.requested_bits), self.M.dim, c, c + z, False)
        # tighten from cached counts
        for s, c in self.counts.items():
            if c <= k and s > lo:
                lo, count_lo = s, c
            if c >= k + 1 and s < hi:
                hi, count_hi = s, c
        done, near = self._done(lo, hi, rel_tol)
        digits = max(64, 4 - _log2(rel_tol))

        def probe(s):
            # returns True when an exact probe lands on the eigenvalue itself
            nonlocal lo, hi, count_lo, count_hi
            c = self.count(s)
            if self.zeros.get(s) and c <= k < c + self.zeros[s]:
                lo, hi, count_lo, count_hi = s, s, c, c + self.zeros[s]
                return True
            if c <= k:
                lo, count_lo = s, c
            else:
                hi, count_hi = s, c
            return False

        # a positive semidefinite exact matrix may be singular
        if not done and self.exact and lo == 0 and probe(Fraction(0)):
            done = True
        # guided shifts around the approximate eigenvalue
        if not done:
            hints = self.hints()
            if hints and k < len(hints):
                h = hints[k]
                delta = rel_tol / 4
                for _ in range(6):
                    if h == 0 or done:
                        break
                    a, b = h - abs(h) * delta, h + abs(h) * delta
                    a, b = _dyadic(a, digits + 8), _dyadic(b, digits + 8)
                    if lo < a < hi and probe(a) or lo < b < hi and probe(b):
                        done = True
                        break
                    done, near = self._done(lo, hi, rel_tol)
                    if not lo <= h <= hi:
                        break
                    delta *= 64
        zoom = 1
        while not done:
            s = self._split(lo, hi, zoom, digits)
            before = (lo, hi)
            if probe(s):
                break
            if (lo == 0 and hi == s) or (hi == 0 and lo == s):
                zoom *= 2
            elif before[0] == 0 and lo != 0 or before[1] == 0 and hi != 0:
                zoom = 1
            done, near = self._done(lo, hi, rel_tol)
        bits = max(self.ctx.bits, self.requested_bits)
        value = Enclosure.of(lo, bits) if lo == hi else Enclosure.hull(lo, hi, bits)
        return EigenEnclosure(k, value, self.M.dim, count_lo, count_hi, near)


def eigenvalue(M: HermitianKernelMatrix, k: int = 0, rel_tol=Fraction(1, 10 ** 12),
               ctx: Optional[PrecisionContext] = None, backend: str = "auto") -> EigenEnclosure:
    """Certified enclosure of the ``k``-th smallest eigenvalue of ``M``."""
    rel_tol = as_fraction(rel_tol)
    if rel_tol <= 0:
        raise InvalidParameter("rel_tol must be positive")
    if not 0 <= k < M.dim:
        raise InvalidParameter(f"eigenvalue index {k} outside 0..{M.dim - 1}")
    return _Solver(M, ctx or default_context(), backend).solve(k, rel_tol)


def eigenvalues(M: HermitianKernelMatrix, rel_tol=Fraction(1, 10 ** 6),
                ctx: Optional[PrecisionContext] = None, backend: str = "auto",
                solver: Optional[_Solver] = None) -> List[EigenEnclosure]:
    """All eigenvalues, smallest first, sharing one count cache."""
    rel_tol = as_fraction(rel_tol)
    solver = solver or _Solver(M, ctx or default_context(), backend)
    return [solver.solve(k, rel_tol) for k in range(M.dim)]


# ---------------------------------------------------------------------------
# interlacing

@dataclass(frozen=True)
class InterlacingReport:
    family: str
    n_max: int
    passed: bool
    checked: int
    overlaps: Tuple[Tuple[int, int, int], ...] = ()
    violations: Tuple[Tuple[int, int, int], ...] = ()

    def __str__(self):
        state = "pass" if self.passed else "FAIL"
        return (f"interlacing {self.family} n<={self.n_max}: {state} "
                f"({self.checked} inequalities, {len(self.overlaps)} unresolved overlaps)")


def interlacing_check(family: MatrixFamily, n_max: int, ctx: Optional[PrecisionContext] = None,
                      rel_tol=Fraction(1, 10 ** 6), refine_tol=Fraction(1, 10 ** 30),
                      backend: str = "auto") -> InterlacingReport:
    """Certify ``lambda_{n+1,k} <= lambda_{n,k} <= lambda_{n+1,k+1}`` for all ``n < n_max``.

    Overlapping enclosures are refined to ``refine_tol``; pairs that still
    overlap are reported as unresolved (equal eigenvalues of nested sections
    are allowed).  Only a certified reversed order counts as a violation.
    """
    ctx = ctx or default_context()
    if n_max > family.max_n:
        raise InvalidParameter(f"n_max={n_max} exceeds the family size {family.max_n}")
    solvers = [_Solver(family(n, ctx), ctx, backend) for n in range(n_max + 1)]
    eigs = [eigenvalues(s.M, rel_tol, solver=s) for s in solvers]
    checked = 0
    overlaps, violations = [], []

    def ordered(a_n, a_k, b_n, b_k):
        # certify lambda_{a_n, a_k} <= lambda_{b_n, b_k}
        a, b = eigs[a_n][a_k], eigs[b_n][b_k]
        if a.hi <= b.lo:
            return True
        if a.lo > b.hi:
            return False
        a = eigs[a_n][a_k] = solvers[a_n].solve(a_k, refine_tol)
        b = eigs[b_n][b_k] = solvers[b_n].solve(b_k, refine_tol)
        if a.hi <= b.lo:
            return True
        if a.lo > b.hi:
            return False
        return None

    for n in range(n_max):
        for k in range(n + 1):
            for pair in ((n + 1, k, n, k), (n, k, n + 1, k + 1)):
                checked += 1
                verdict = ordered(*pair)
                if verdict is None:
                    overlaps.append((n, k, pair[0] == n))
                elif not verdict:
                    violations.append((n, k, pair[0] == n))
    return InterlacingReport(family.name, n_max, not violations, checked,
                             tuple(overlaps), tuple(violations))


# ---------------------------------------------------------------------------
# trajectories and classification

@dataclass(frozen=True)
class TrajectoryRecord:
    n: int
    lambda0: Optional[EigenEnclosure]
    aux: Dict[str, Enclosure] = field(default_factory=dict)
    bits_used: int = 0

    def series(self, name: str = "lambda0") -> Enclosure:
        if name == "lambda0":
            return self.lambda0.value
        return self.aux[name]


@dataclass
class Trajectory:
    records: List[TrajectoryRecord]
    label: str = ""

    def __post_init__(self):
        dims = [r.n for r in self.records]
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise InvalidParameter("trajectory indices must be strictly increasing")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i) -> TrajectoryRecord:
        return self.records[i]

    def values(self, name: str = "lambda0") -> List[Enclosure]:
        return [r.series(name) for r in self.records]


class TrajectoryInterrupted(EscalationExhausted):
    """Escalation ran out part way; ``partial`` holds the records computed so far."""

    def __init__(self, message, partial: Trajectory, bits=None, detail=None):
        super().__init__(message, bits=bits, detail=detail)
        self.partial = partial


def lambda0_trajectory(family: MatrixFamily, n_max: int, rel_tol=Fraction(1, 10 ** 12),
                       ctx: Optional[PrecisionContext] = None, backend: str = "auto",
                       n_min: int = 0) -> Trajectory:
    """``lambda_{n,0}`` for ``n = n_min..n_max``; certifies it is nonincreasing."""
    ctx = ctx or default_context()
    if n_max < n_min:
        raise InvalidParameter("n_max must be >= n_min")
    if n_max > family.max_n:
        raise InvalidParameter(f"n_max={n_max} exceeds the family size {family.max_n}")
    records: List[TrajectoryRecord] = []
    for n in range(n_min, n_max + 1):
        try:
            eig = eigenvalue(family(n, ctx), 0, rel_tol, ctx, backend)
        except EscalationExhausted as exc:
            raise TrajectoryInterrupted(f"n={n}: {exc}", Trajectory(records, family.name),
                                        bits=exc.bits, detail=exc.detail) from exc
        if records and eig.value.lo > records[-1].lambda0.value.hi:
            raise InvariantViolation("monotone-lambda0",
                                     f"lambda_{{{n},0}} exceeds lambda_{{{n - 1},0}}")
        records.append(TrajectoryRecord(n, eig, {}, eig.value.bits_used))
    return Trajectory(records, family.name)


@dataclass(frozen=True)
class RegularityVerdict:
    tag: str  # regular-evidence | singular-evidence | inconclusive
    floor_or_decay: Optional[Enclosure]
    rationale: str
    params: Dict[str, str] = field(default_factory=dict)


def classify(traj: Trajectory, window: int = 5, plateau_eps=Fraction(1, 20),
             decay_threshold=Fraction(9, 10), series: str = "lambda0") -> RegularityVerdict:
    """Evidence verdict from the tail of a trajectory; never a statement about the limit."""
    plateau_eps, decay_threshold = as_fraction(plateau_eps), as_fraction(decay_threshold)
    params = {"window": str(window), "plateau_eps": str(plateau_eps),
              "decay_threshold": str(decay_threshold)}
    if window < 1:
        raise InvalidParameter("window must be >= 1")
    vals = traj.values(series)
    if len(vals) < window + 1:
        return RegularityVerdict("inconclusive", None,
                                 f"{len(vals)} records, need at least {window + 1}", params)
    tail = vals[-(window + 1):]
    ref, last = tail[0], tail[-1]
    plateau = all(_frac_of(v.lo) >= (1 - plateau_eps) * _frac_of(ref.hi) for v in tail[1:])
    if plateau and last.lo > 0:
        return RegularityVerdict(
            "regular-evidence", last,
            f"last {window} values stay within {plateau_eps} of {ref} and the floor is positive",
            params)
    decaying = all(prev.lo > 0 and _frac_of(cur.hi) <= decay_threshold * _frac_of(prev.lo)
                   for prev, cur in zip(tail, tail[1:]))
    if decaying:
        bits = max(last.bits_used, ref.bits_used)
        if last.is_exact and ref.is_exact:
            ratio = Enclosure.of(last.exact / ref.exact, bits)
        else:
            D, U = rounders(bits)
            ratio = Enclosure(D.div(last.lo, ref.hi), U.div(last.hi, ref.lo), bits)
        rate = ratio.rootn(window)
        return RegularityVerdict(
            "singular-evidence", rate,
            f"each of the last {window} steps shrinks by at least {decay_threshold}; "
            f"geometric rate {rate}", params)
    return RegularityVerdict("inconclusive", None,
                             "neither a plateau nor a persistent geometric decay", params)
