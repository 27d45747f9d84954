"""Successive minima, Minkowski's second theorem, Mahler transference, the
inhomogeneous corollary and the Khintchine-Dyson transfer step.

Minima are found greedily: the i-th minimum is the smallest gauge value over
lattice points outside the span V of the first i-1 witnesses.  Such points are
enumerated through their orthogonal projection onto V-perp (a lattice of rank
n-i+1), and for each projected point the best lift along the fibre Lambda cap V
is found exactly.  This keeps the work proportional to the number of
*independent* candidates, so bodies that are very thin relative to the lattice
(ratios lambda_n / lambda_1 of e^100 and more) stay tractable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mpf

from . import numeric as nm
from .bodies import (CrossImage, Gauge, outer_inner_radii, polar_body, volume)
from .errors import DimensionMismatch, EnumerationBudget, InvariantViolation, UnboundedBody
from .lattice import (DEFAULT_BUDGET, Enumerator, Lattice, canonical_sign, dual_lattice,
                      tie_key, unimodular_completion)


@dataclass
class MinimaResult:
    lambdas: list
    witnesses: list[tuple]
    coefficients: list[list[int]]
    certified_radius: float
    radii: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.lambdas)

    def to_rows(self) -> list[dict]:
        return [{"i": i + 1, "lambda": lam, "witness": w}
                for i, (lam, w) in enumerate(zip(self.lambdas, self.witnesses))]


def _combine(z, rows):
    out = None
    for c, r in zip(z, rows):
        if c:
            out = [c * v for v in r] if out is None else [a + c * v for a, v in zip(out, r)]
    return out if out is not None else [rows[0][0] * 0] * len(rows[0])


def _base_key(base: str):
    """Order-preserving key for the base gauge; l2 compares squared norms exactly."""
    if base == "max":
        return lambda y: max(nm.absval(v) for v in y)
    if base == "sum":
        return lambda y: sum((nm.absval(v) for v in y), y[0] * 0)
    return lambda y: nm.dot(y, y)


def _base_radius(base: str, n: int):
    if base == "max":
        return mpmath.sqrt(n)
    return mpf(1)


class _Search:
    """State shared by the steps of one successive-minima computation."""

    def __init__(self, L: Lattice, F: Gauge, budget: int):
        if L.dim != F.dim:
            raise DimensionMismatch(f"lattice dimension {L.dim} != gauge dimension {F.dim}")
        if not F.bounded:
            raise UnboundedBody(f"{F.variant} is unbounded; use TruncatedNormForm")
        self.n = L.dim
        self.B = [list(r) for r in L.basis]
        self.budget = budget
        lin = F.linear_part()
        if lin is not None:
            T, base = lin
            self.Y = [list(r) for r in L.transformed(T).basis]
            self.key = _base_key(base)
            self.convex = True
            self.R = _base_radius(base, self.n)
            self.squared = base == "l2"
        else:
            self.Y = self.B
            self.key = F._eval
            self.convex = F.convex
            self.R = outer_inner_radii(F)[1]
            self.squared = False
        self.exact = isinstance(self.Y[0][0], Fraction) and lin is not None
        self.Rf = float(self.R)

    def value(self, y):
        v = self.key(y)
        return v if self.exact else nm.to_mpf(v)

    def lam(self, v):
        return nm.sqrt(v) if self.squared else v

    def lam_float(self, v) -> float:
        return float(self.lam(v))

    def original(self, z) -> tuple:
        return tuple(_combine(z, self.B))

    def step(self, prev: list[list[int]]):
        n, k = self.n, len(prev)
        E = unimodular_completion(prev, n) if k else [[int(i == j) for j in range(n)] for i in range(n)]
        S = [_combine(E[l], self.Y) for l in range(k)]
        C = [_combine(E[k + j], self.Y) for j in range(n - k)]
        # Gram-Schmidt of the fibre directions, then project the complement
        star, norms = [], []
        for s in S:
            v = list(s)
            for w, nw in zip(star, norms):
                f = nm.dot(s, w) / nw
                v = [a - f * b for a, b in zip(v, w)]
            star.append(v)
            norms.append(nm.dot(v, v))
        P = []
        for c in C:
            v = list(c)
            for w, nw in zip(star, norms):
                f = nm.dot(c, w) / nw
                v = [a - f * b for a, b in zip(v, w)]
            P.append(v)
        en = Enumerator(P)
        fibre = _Fibre(self, S, E[:k])
        best = None
        rho = en.shortest_row_norm() * (1 + 1e-9)
        while True:
            for a in en.coefficients(rho, self.budget):
                cz = en.input_coefficients(a)
                zt = _combine(cz, E[k:])
                yt = _combine(cz, C)
                for val, z in fibre.minimizers(yt, zt, rho):
                    x = self.original(z)
                    cx = canonical_sign(x)
                    if cx != x:
                        z = [-c for c in z]
                    cand = (val, nm.dot(cx, cx), tie_key(cx), cx, z)
                    if best is None or cand[:3] < best[:3]:
                        best = cand
            if best is not None:
                lr = self.lam_float(best[0]) * self.Rf
                if lr * (1 + 1e-12) <= rho:
                    return best, rho
                rho = min(2 * rho, lr * (1 + 1e-6))
            else:
                rho *= 2


class _Fibre:
    """Best lifts y~ + t, t in the fibre lattice spanned by S."""

    def __init__(self, search: _Search, S, E_S):
        self.s = search
        self.S = S
        self.E_S = E_S
        self.k = len(S)
        self._en = Enumerator(S) if self.k > 1 or (self.k == 1 and not search.convex) else None

    def _pt(self, yt, zt, coeffs):
        y = list(yt)
        z = list(zt)
        for c, srow, erow in zip(coeffs, self.S, self.E_S):
            if c:
                y = [a + c * b for a, b in zip(y, srow)]
                z = [a + c * b for a, b in zip(z, erow)]
        return y, z

    def minimizers(self, yt, zt, rho):
        if self.k == 0:
            return [(self.s.value(yt), list(zt))]
        if self._en is None:
            return self._line(yt, zt, rho)
        center = [-v for v in yt]
        out = []
        for a in self._en.coefficients(rho, self.s.budget, center=center):
            coeffs = self._en.input_coefficients(a)
            y, z = self._pt(yt, zt, coeffs)
            out.append((self.s.value(y), z))
        if not out:
            return []
        m = min(v for v, _ in out)
        return [(v, z) for v, z in out if v == m]

    def _line(self, yt, zt, rho):
        """Convex gauge along y~ + s*b: ternary search over the integers s."""
        b = self.S[0]
        a2 = nm.to_mpf(nm.dot(b, b))
        bb = nm.to_mpf(nm.dot(yt, b))
        cc = nm.to_mpf(nm.dot(yt, yt))
        disc = bb * bb - a2 * (cc - mpf(rho) ** 2)
        if disc < 0:
            return []
        root = mpmath.sqrt(disc)
        lo_r, hi_r = (-bb - root) / a2, (-bb + root) / a2
        slack = (abs(lo_r) + abs(hi_r)) * mpf(2) ** (-nm.mp.prec + 16) + 2
        lo, hi = int(mpmath.floor(lo_r - slack)), int(mpmath.ceil(hi_r + slack))
        cache = {}

        def f(s):
            if s not in cache:
                y, z = self._pt(yt, zt, [s])
                cache[s] = (self.s.value(y), z)
            return cache[s][0]

        L0, H0 = lo, hi
        while hi - lo > 2:
            m1 = lo + (hi - lo) // 3
            m2 = hi - (hi - lo) // 3
            if f(m1) <= f(m2):
                hi = m2
            else:
                lo = m1
        vals = [(f(s), s) for s in range(lo, hi + 1)]
        m = min(v for v, _ in vals)
        s0 = next(s for v, s in vals if v == m)
        # the minimizers form an interval; find its ends, then keep the points
        # nearest the Euclidean minimizer of the original vector along the line
        left, right = self._edge(f, m, L0, s0), self._edge(f, m, H0, s0)
        x0 = self.s.original(zt)
        d = self.s.original(self.E_S[0])
        t = -nm.to_mpf(nm.dot(x0, d)) / nm.to_mpf(nm.dot(d, d))
        picks = {min(max(int(mpmath.floor(t)), left), right),
                 min(max(int(mpmath.ceil(t)), left), right)}
        out = []
        for s in sorted(picks):
            f(s)
            if cache[s][0] == m:
                out.append(cache[s])
        return out

    @staticmethod
    def _edge(f, m, outer, inner):
        """Farthest s from ``inner`` towards ``outer`` with f(s) == m."""
        if f(outer) == m:
            return outer
        a, b = outer, inner
        while abs(b - a) > 1:
            mid = (a + b) // 2
            if f(mid) == m:
                b = mid
            else:
                a = mid
        return b


def successive_minima(L: Lattice, F: Gauge, budget: int = DEFAULT_BUDGET,
                      count: int | None = None) -> MinimaResult:
    """Exact successive minima of the closed body {F <= 1} w.r.t. L.

    ``count`` limits the computation to the first few minima.
    """
    s = _Search(L, F, budget)
    count = s.n if count is None else count
    prev: list[list[int]] = []
    lambdas, wits, radii = [], [], []
    rho = 0.0
    for _ in range(count):
        (val, _, _, x, z), rho = s.step(prev)
        prev.append(z)
        lambdas.append(s.lam(val))
        wits.append(x)
        radii.append(rho)
    for i in range(1, len(lambdas)):
        a, b = nm.promote(lambdas[i - 1], lambdas[i])
        # equal minima reached along different paths may differ in the last bits
        slack = 0 if nm.is_exact(a) else abs(a) * mpf(2) ** (-nm.mp.prec + 16)
        if b < a - slack:
            raise InvariantViolation("minima out of order")
    return MinimaResult(lambdas, wits, prev, rho, radii)


def first_minimum(L: Lattice, F: Gauge, budget: int = DEFAULT_BUDGET):
    """(lambda_1, witness)."""
    r = successive_minima(L, F, budget, count=1)
    return r.lambdas[0], r.witnesses[0]


def _prod(values):
    p = Fraction(1)
    for v in values:
        a, b = nm.promote(p, v)
        p = a * b
    return p


def _within(x, lo, hi, rel) -> bool:
    x, lo, hi = nm.to_mpf(x), nm.to_mpf(lo), nm.to_mpf(hi)
    return lo * (1 - rel) <= x <= hi * (1 + rel)


@dataclass
class MinkowskiReport:
    t: object
    lower: Fraction
    upper: Fraction
    lambdas: list
    holds: bool


def minkowski_check(L: Lattice, F: Gauge, rel_tol: float = 1e-9, strict: bool = True,
                    minima: MinimaResult | None = None) -> MinkowskiReport:
    """t = (prod lambda_i) V(C) / d(L) against 2^n/n! <= t <= 2^n."""
    if not F.convex:
        raise InvariantViolation("Minkowski's second theorem needs a convex body")
    res = minima or successive_minima(L, F)
    n = L.dim
    V = volume(F)
    d = L.determinant()
    t = _prod(res.lambdas)
    a, b = nm.promote(t, V)
    t = a * b
    a, b = nm.promote(t, d)
    t = a / b
    lo, hi = Fraction(2 ** n, math.factorial(n)), Fraction(2 ** n)
    tol = 0 if nm.is_exact(t) else rel_tol
    ok = _within(t, lo, hi, tol) if tol else lo <= t <= hi
    if strict and not ok:
        raise InvariantViolation(f"Minkowski bound violated: t={t}")
    return MinkowskiReport(t, lo, hi, res.lambdas, ok)


@dataclass
class TransferReport:
    products: list
    lower: Fraction
    upper: Fraction
    lambdas: list
    dual_lambdas: list
    lower_ok: list[bool]
    upper_ok: list[bool]

    @property
    def holds(self) -> bool:
        return all(self.lower_ok) and all(self.upper_ok)

    def csv_rows(self) -> list[list]:
        return [[i + 1, lam, dl, p, lo, up] for i, (lam, dl, p, lo, up) in enumerate(
            zip(self.lambdas, reversed(self.dual_lambdas), self.products,
                self.lower_ok, self.upper_ok))]


def c3(n: int) -> int:
    return math.factorial(n) ** 2


def c4(n: int) -> int:
    """Constant of the inhomogeneous corollary obtained by chaining its proof."""
    return n * c3(n)


def mahler_transference_check(L: Lattice, F: Gauge, rel_tol: float = 1e-9,
                              strict: bool = True) -> TransferReport:
    """Products lambda_i(C, L) lambda_{n+1-i}(C*, L*) against [1, (n!)^2]."""
    n = L.dim
    lam = successive_minima(L, F).lambdas
    dlam = successive_minima(dual_lattice(L), polar_body(F)).lambdas
    prods = []
    for i in range(n):
        a, b = nm.promote(lam[i], dlam[n - 1 - i])
        prods.append(a * b)
    up = Fraction(c3(n))
    lo_ok = [nm.to_mpf(p) >= 1 - rel_tol for p in prods]
    up_ok = [nm.to_mpf(p) <= up * (1 + rel_tol) for p in prods]
    rep = TransferReport(prods, Fraction(1), up, lam, dlam, lo_ok, up_ok)
    if strict and not rep.holds:
        raise InvariantViolation(f"transference bounds violated: {prods}")
    return rep


def inhomogeneous_shift(L: Lattice, F: Gauge, a: Sequence, minima: MinimaResult | None = None):
    """z in L with F(a + z) <= n lambda_n, by rounding a in the witness basis."""
    n = L.dim
    if len(a) != n:
        raise DimensionMismatch("shift vector has the wrong dimension")
    a = nm.unify(a)
    if isinstance(a[0], mpf) or not L.exact:
        a = [nm.to_mpf(v) for v in a]
    inv = nm.inverse(nm.transpose([list(r) for r in L.basis]))
    coords = [nm.dot(r, a) for r in inv] if not isinstance(a[0], mpf) else \
        [nm.dot([nm.to_mpf(v) for v in r], a) for r in inv]
    if all(nm.is_exact(c) and Fraction(c).denominator == 1 for c in coords):
        return tuple(-v for v in a)
    res = minima or successive_minima(L, F)
    W = [list(w) for w in res.witnesses]
    if isinstance(a[0], mpf):
        W = [[nm.to_mpf(v) for v in w] for w in W]
    Winv = nm.inverse(nm.transpose(W))
    theta = [nm.dot(r, a) for r in Winv]
    k = [nm.nint(t) for t in theta]
    z = _combine([-c for c in k], res.witnesses)
    return tuple(z)


# ---------------------------------------------------------------- Dyson step

@dataclass
class DysonResult:
    u: tuple
    v: tuple
    Qprime: int
    etastar: object
    residual: object
    lambda1: object = None
    rational_degeneracy: bool = False

    def contract_holds(self) -> bool:
        """||A^T u - v|| <= Q'^{-(n-m)(1+eta*)/m} re-checked from the stored data."""
        if self.rational_degeneracy:
            return self.residual == 0
        if self.etastar is None:
            return False
        k, m = len(self.u), len(self.v)
        bound = mpf(self.Qprime) ** (-mpf(k) * (1 + self.etastar) / m)
        return nm.to_mpf(self.residual) <= bound * (1 + mpf(10) ** -20)


def _At(A, u):
    m = len(A[0])
    return [sum((A[i][j] * u[i] for i in range(len(A))), A[0][0] * 0) for j in range(m)]


def _residual(A, u, v):
    return max(nm.absval(a - b) for a, b in zip(_At(A, u), v))


def _is_integral(x) -> bool:
    if nm.is_exact(x):
        return Fraction(x).denominator == 1
    return abs(x - mpmath.nint(x)) <= mpf(2) ** (-nm.mp.prec + 24) * max(1, abs(x))


def find_degeneracy(A, bound: int = 10):
    """Smallest u (max-norm <= bound) with A^T u integral, or None."""
    k = len(A)
    cands = []
    for u in itertools.product(range(-bound, bound + 1), repeat=k):
        if any(u) and canonical_sign(u) == u:
            cands.append(u)
    cands.sort(key=lambda u: (max(map(abs, u)), sum(map(abs, u)), tuple(-abs(c) for c in u)))
    for u in cands:
        if all(_is_integral(x) for x in _At(A, u)):
            return u
    return None


def dyson_transfer_step(A, x, y, Q, eta, budget: int = DEFAULT_BUDGET,
                        degeneracy_bound: int = 10) -> DysonResult:
    """Dual solution from the first minimum of the polar of C_Q.

    C_Q = {(x, y) : ||x|| <= Q, ||Ax - y|| <= Q^{-m(1+eta)/(n-m)}} has polar gauge
    Q ||A^T u - v||_1 + Q^{-m(1+eta)/(n-m)} ||u||_1; its first minimum over Z^n
    gives the dual pair (u, v).
    """
    A = nm.unify_matrix(A)
    k, m = len(A), len(A[0])
    n = k + m
    if len(x) != m or len(y) != k:
        raise DimensionMismatch("x must have m entries and y n-m entries")
    x = [int(v) for v in x]
    y = [int(v) for v in y]
    if not any(x):
        raise ValueError("x must be nonzero")
    Q = nm.to_number(Q)
    eta = nm.to_number(eta)
    if max(abs(v) for v in x) > Q:
        raise ValueError("||x|| exceeds Q")
    s = nm.to_mpf(Q) ** (-nm.to_mpf(m) * (1 + nm.to_mpf(eta)) / k)
    Ax = [nm.dot(row, x) for row in A]
    prim = max(nm.absval(nm.to_mpf(a) - b) for a, b in zip(Ax, y))
    if prim > s * (1 + mpf(10) ** -12):
        raise ValueError("(x, y) does not satisfy the primal inequality")

    deg = find_degeneracy(A, degeneracy_bound)
    if deg is not None:
        v = tuple(int(nm.nint(t)) for t in _At(A, deg))
        return DysonResult(tuple(deg), v, max(map(abs, deg)), mpf("inf"), 0 * A[0][0],
                           rational_degeneracy=True)

    Qm = nm.to_mpf(Q)
    M = []
    for j in range(m):
        M.append([Qm * nm.to_mpf(A[i][j]) for i in range(k)] +
                 [-Qm if jj == j else mpf(0) for jj in range(m)])
    for i in range(k):
        M.append([s if ii == i else mpf(0) for ii in range(k)] + [mpf(0)] * m)
    G = CrossImage(M)
    lam, w = first_minimum(Lattice.identity(n), G, budget)
    w = [int(c) for c in w]
    u, v = tuple(w[:k]), tuple(w[k:])
    res = _residual(A, u, v)
    Qp = max(abs(c) for c in u) if any(u) else 0
    if res == 0:
        return DysonResult(u, v, Qp, mpf("inf"), res, lam, rational_degeneracy=True)
    if Qp < 2:
        etastar = None
    else:
        etastar = -(mpf(m) / k) * mpmath.log(nm.to_mpf(res)) / mpmath.log(Qp) - 1
    return DysonResult(u, v, Qp, etastar, res, lam)


# ------------------------------------------------------- exponent estimates

@dataclass
class ExponentEstimate:
    estimate: object
    side: str
    Qmax: int
    witnesses: list[tuple] = field(default_factory=list)
    rational_degeneracy: bool = False
    note: str = ("finite-Q lower estimate: largest eta achieved by >= 3 solutions whose "
                 "heights at least double along the chain, heights >= sqrt(Qmax)")


def _solutions(B, Qmax: int, budget: int):
    """Heights, residuals and points x for all x in [-Qmax, Qmax]^k (one per +- pair)."""
    k = len(B[0])
    total = ((2 * Qmax + 1) ** k - 1) // 2
    if total > budget:
        raise EnumerationBudget(f"{total} candidate points exceed budget {budget}")
    Bf = np.array([[nm.to_float(v) for v in r] for r in B])
    if k == 1:
        X = np.arange(1, Qmax + 1, dtype=np.int64)[:, None]
    else:
        axes = np.arange(-Qmax, Qmax + 1, dtype=np.int64)
        X = np.stack(np.meshgrid(*([axes] * k), indexing="ij"), -1).reshape(-1, k)
        first = np.argmax(X != 0, axis=1)
        lead = X[np.arange(len(X)), first]
        X = X[lead > 0]
    BX = X.astype(float) @ Bf.T
    R = np.max(np.abs(BX - np.rint(BX)), axis=1)
    H = np.max(np.abs(X), axis=1)
    return X, H, R


def _exact_residual(B, x):
    bx = [nm.dot(r, [int(c) for c in x]) for r in B]
    y = [nm.nint(v) for v in bx]
    return max(nm.absval(a - b) for a, b in zip(bx, y)), y


def exponent_estimate(A, side: str = "primal", Qmax: int = 10 ** 4,
                      budget: int = DEFAULT_BUDGET, chain: int = 3,
                      ratio: float = 2.0) -> ExponentEstimate:
    """Empirical exponent of approximation (side='primal') or of the transpose system
    (side='dual') from all solutions up to height Qmax."""
    if Qmax < 10:
        raise ValueError("Qmax must be at least 10")
    A = nm.unify_matrix(A)
    if side == "primal":
        B = A
    elif side == "dual":
        B = nm.transpose(A)
    else:
        raise ValueError("side must be 'primal' or 'dual'")
    l, k = len(B), len(B[0])
    X, H, R = _solutions(B, Qmax, budget)

    tiny = np.nonzero(R < 1e-9 * np.maximum(H, 1))[0]
    for idx in tiny[:64]:
        res, y = _exact_residual(B, X[idx])
        if res == 0:
            return ExponentEstimate(mpf("inf"), side, Qmax,
                                    [(int(H[idx]), mpf("inf"), tuple(map(int, X[idx])), tuple(y))],
                                    rational_degeneracy=True)

    hmin = max(2, math.isqrt(Qmax))
    keep = (H >= hmin) & (R > 0)
    Xk, Hk, Rk = X[keep], H[keep], R[keep]
    with np.errstate(divide="ignore"):
        eta = -(l / k) * np.log(Rk) / np.log(Hk) - 1
    order = np.argsort(-eta, kind="stable")

    def chain_of(count):
        sel = order[:count]
        hs = sorted(zip(Hk[sel].tolist(), sel.tolist()))
        picked, last = [], None
        for h, idx in hs:
            if last is None or h >= ratio * last:
                picked.append(idx)
                last = h
        return picked

    lo, hi = chain, len(order)
    if hi < chain or len(chain_of(hi)) < chain:
        return ExponentEstimate(None, side, Qmax)
    while lo < hi:
        mid = (lo + hi) // 2
        if len(chain_of(mid)) >= chain:
            hi = mid
        else:
            lo = mid + 1
    picked = chain_of(lo)
    wits = []
    for idx in picked:
        res, y = _exact_residual(B, Xk[idx])
        h = int(Hk[idx])
        e = -(mpf(l) / k) * mpmath.log(nm.to_mpf(res)) / mpmath.log(h) - 1
        wits.append((h, e, tuple(map(int, Xk[idx])), tuple(y)))
    est = min(w[1] for w in wits)
    return ExponentEstimate(est, side, Qmax, wits)
