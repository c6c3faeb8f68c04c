"""Independent reference computations used by the tests.

None of these share code with the package beyond the public data types:
the characteristic polynomial comes from Faddeev-LeVerrier in exact
rationals, roots are located with Sturm sequences, box constants are found
by brute force over every critical box, and a float grid gives a lower
estimate of the supremum.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

Poly = List[Fraction]  # coefficients, highest degree first


# ---------------------------------------------------------------------------
# exact polynomials

def _trim(p: Poly) -> Poly:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def charpoly(A: Sequence[Sequence[Fraction]]) -> Poly:
    """``det(xI - A)`` by Faddeev-LeVerrier, exact over the rationals."""
    n = len(A)
    A = [[Fraction(x) for x in row] for row in A]
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M <- A M + c_{k-1} I ; c_k = -tr(A M) / k
        AM = [[sum(A[i][t] * M[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        M = [[AM[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        AM = [[sum(A[i][t] * M[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(AM[i][i] for i in range(n)) / k)
    return coeffs


def peval(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in p:
        acc = acc * x + c
    return acc


def deriv(p: Poly) -> Poly:
    d = len(p) - 1
    return _trim([c * (d - i) for i, c in enumerate(p[:-1])]) or [Fraction(0)]


def pdivmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    a, b = _trim(list(a)), _trim(list(b))
    if len(a) < len(b):
        return [Fraction(0)], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    r = list(a)
    for i in range(len(q)):
        c = r[i] / b[0]
        q[i] = c
        for j, bj in enumerate(b):
            r[i + j] -= c * bj
    rem = _trim(r[len(q):]) if len(r) > len(q) else [Fraction(0)]
    return q, rem


def _is_zero(p: Poly) -> bool:
    return all(c == 0 for c in p)


def pgcd(a: Poly, b: Poly) -> Poly:
    while not _is_zero(b):
        a, b = b, pdivmod(a, b)[1]
    a = _trim(a)
    return [c / a[0] for c in a]


def squarefree_factors(p: Poly) -> List[Tuple[Poly, int]]:
    """Yun's algorithm: ``p = prod f_i^i`` with squarefree, coprime ``f_i``."""
    out = []
    a = pgcd(p, deriv(p))
    b = pdivmod(p, a)[0]
    c = pdivmod(deriv(p), a)[0]
    d = [x - y for x, y in zip(_pad(c, len(b)), _pad(deriv(b), len(b)))]
    i = 1
    while len(_trim(b)) > 1:
        a = pgcd(b, _trim(d))
        b = pdivmod(b, a)[0]
        c = pdivmod(_trim(d), a)[0]
        d = [x - y for x, y in zip(_pad(c, len(b)), _pad(deriv(b), len(b)))]
        if len(a) > 1:
            out.append((a, i))
        i += 1
    return out


def _pad(p: Poly, n: int) -> Poly:
    p = _trim(p)
    return [Fraction(0)] * (n - len(p)) + p


def sturm_chain(p: Poly) -> List[Poly]:
    chain = [p, deriv(p)]
    while not _is_zero(chain[-1]) and len(chain[-1]) > 1:
        r = pdivmod(chain[-2], chain[-1])[1]
        if _is_zero(r):
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(chain: List[Poly], x: Fraction) -> int:
    signs = [v for v in (peval(q, x) for q in chain) if v != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def roots_at_most(p: Poly, x: Fraction) -> int:
    """Real roots of ``p`` that are ``<= x``, counted with multiplicity."""
    total = 0
    for f, mult in squarefree_factors(p):
        bound = 1 + max(abs(c / f[0]) for c in f[1:])
        chain = sturm_chain(f)
        total += mult * (_sign_changes(chain, -bound) - _sign_changes(chain, x))
    return total


def roots_below(p: Poly, x: Fraction) -> int:
    """Real roots strictly less than ``x``, with multiplicity."""
    n = roots_at_most(p, x)
    if peval(p, x) == 0:
        n -= sum(m for f, m in squarefree_factors(p) if peval(f, x) == 0)
    return n


def kth_root_in(p: Poly, k: int, lo: Fraction, hi: Fraction) -> bool:
    """Whether the ``k``-th smallest root (0-based, with multiplicity) lies in ``[lo, hi]``."""
    return roots_below(p, lo) <= k < roots_at_most(p, hi)


# ---------------------------------------------------------------------------
# random rational inputs

def random_symmetric(rng: random.Random, dim: int, den: int = 16, span: int = 40) -> List[List[Fraction]]:
    A = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i, dim):
            A[i][j] = A[j][i] = Fraction(rng.randint(-span, span), rng.randint(1, den))
    return A


def random_real_nodes(rng: random.Random, dim: int, den: int = 64) -> List[Fraction]:
    seen = set()
    while len(seen) < dim:
        q = Fraction(rng.randint(-den + 1, den - 1), den)
        if q:
            seen.add(q)
    vals = list(seen)
    rng.shuffle(vals)
    return vals


def random_polar_measure(rng: random.Random, atoms: int, turn_den: int = 16, radius_den: int = 12):
    """``[(radius, turn, mass)]`` with coarse rational turns and radii in ``(0, 1)``."""
    out = []
    for _ in range(atoms):
        r = Fraction(rng.randint(1, radius_den - 1), radius_den)
        t = Fraction(rng.randrange(turn_den), turn_den)
        m = Fraction(rng.randint(1, 20), rng.randint(1, 8))
        out.append((r, t, m))
    return out


# ---------------------------------------------------------------------------
# box constants

def _circ(u: Fraction) -> Fraction:
    u %= 1
    return min(u, 1 - u)


def brute_box_constant(atoms: Sequence[Tuple[Fraction, Fraction, Fraction]]) -> Fraction:
    """Exact sup of ``mu(Q)/eps`` over closed boxes, by enumerating every critical box.

    A box is the set of atoms with turn within ``eps/2`` of the center and
    radius at least ``1 - eps``, for ``0 < eps <= 1``.  For a fixed contained
    set the ratio is largest at the smallest admissible ``eps``, which is a
    radial depth ``1 - r``, an arc span ``(t_j - t_i) mod 1`` or 1.  For a
    fixed ``eps`` a contained set can be slid until one of its atoms sits on
    an edge, so centers ``t_i +- eps/2`` are enough.
    """
    turns = [t for _, t, _ in atoms]
    best = Fraction(0)
    for eps in _eps_candidates(atoms):
        centers = {t + s * eps / 2 for t in turns for s in (-1, 1)}
        for c in centers:
            mass = sum((m for r, t, m in atoms if r >= 1 - eps and (eps == 1 or _circ(t - c) <= eps / 2)),
                       Fraction(0))
            best = max(best, mass / eps)
    return best


def _eps_candidates(atoms) -> List[Fraction]:
    turns = [t for _, t, _ in atoms]
    eps = {Fraction(1)} | {1 - r for r, _, _ in atoms} | {(tj - ti) % 1 for ti in turns for tj in turns}
    return sorted(e for e in eps if 0 < e <= 1)


def grid_box_estimate(atoms, n_center: int = 4000) -> float:
    """Float lower estimate of the box constant.

    Centers run over a uniform grid of ``n_center`` turns; widths over the
    critical values and the midpoints between consecutive ones.
    """
    r = np.array([float(a[0]) for a in atoms])
    t = np.array([float(a[1]) for a in atoms])
    m = np.array([float(a[2]) for a in atoms])
    cand = _eps_candidates(atoms)
    widths = [float(e) for e in cand] + [float(a + b) / 2 for a, b in zip(cand, cand[1:])]
    centers = np.linspace(0.0, 1.0, n_center, endpoint=False)
    u = np.mod(t[None, :] - centers[:, None], 1.0)
    dist = np.minimum(u, 1.0 - u)
    best = 0.0
    for eps in widths:
        inside = (r >= 1.0 - eps)[None, :] & (dist <= eps / 2)
        best = max(best, float((inside * m[None, :]).sum(axis=1).max()) / eps)
    return best


# ---------------------------------------------------------------------------
# float cross-checks

def pick_matrix_np(z: Sequence[complex]) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return 1.0 / (1.0 - np.outer(z, z.conj()))


def blaschke_derivative_modulus(z: Sequence[complex], n: int) -> float:
    """``|B'(z_n)| = (1 - |z_n|^2)^-1 prod_{k != n} rho(z_n, z_k)`` in floats."""
    zn = z[n]
    prod = 1.0
    for k, zk in enumerate(z):
        if k != n:
            prod *= abs(zn - zk) / abs(1 - np.conj(zk) * zn)
    return prod / (1 - abs(zn) ** 2)


def mass_lower_bound(n: int, N: int, p: float) -> float:
    return n ** (-2 * p) * math.exp(2 * sum((n / k) ** p for k in range(n + 1, N + 1)))
