"""Full-rank lattices: determinants, duals, Hermite canonical form, LLL and
Fincke-Pohst enumeration of short vectors."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import mpf

from . import numeric as nm
from .errors import EnumerationBudget, InvalidLattice, UnsupportedExactOp

DEFAULT_BUDGET = 10 ** 7
DEFAULT_DELTA = Fraction(99, 100)


class Lattice:
    """Lattice spanned by the rows of a nonsingular square matrix.

    Entries are all ``Fraction`` (exact) or all ``mpf`` (inexact); mixed input
    is promoted to ``mpf``.
    """

    __slots__ = ("basis", "dim", "exact", "_det")

    def __init__(self, basis: Sequence[Sequence], *, check: bool = True):
        rows = [list(r) for r in basis]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InvalidLattice("basis must be a non-empty square matrix")
        rows = nm.unify_matrix(rows)
        self.basis = tuple(tuple(r) for r in rows)
        self.dim = n
        self.exact = isinstance(rows[0][0], Fraction)
        self._det = None
        if check and self.determinant() == 0:
            hint = "" if self.exact else " at the working precision; raise it with numeric.precision"
            raise InvalidLattice("singular basis" + hint)

    @classmethod
    def from_generators(cls, generators: Sequence[Sequence]) -> "Lattice":
        """Lattice generated by an arbitrary (possibly redundant) rational stack."""
        rows = nm.unify_matrix([list(g) for g in generators])
        if not rows or not isinstance(rows[0][0], Fraction):
            raise UnsupportedExactOp("generator stacks must be rational")
        n = len(rows[0])
        den = 1
        for r in rows:
            for v in r:
                den = den * v.denominator // math.gcd(den, v.denominator)
        H = hermite_rows([[int(v * den) for v in r] for r in rows])
        if len(H) != n:
            raise InvalidLattice(f"generators span rank {len(H)} < {n}")
        return cls([[Fraction(v, den) for v in r] for r in H])

    @classmethod
    def identity(cls, n: int) -> "Lattice":
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    def __repr__(self):
        kind = "exact" if self.exact else "inexact"
        return f"Lattice(dim={self.dim}, {kind}, basis={[list(map(str, r)) for r in self.basis]})"

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def determinant(self):
        if self._det is None:
            d = nm.absval(nm.det(self.basis))
            if not self.exact:
                scale = max(nm.absval(v) for r in self.basis for v in r) or mpf(1)
                if d <= scale ** self.dim * mpf(2) ** (-nm.mp.prec + 8):
                    d = d * 0
            self._det = d
        return self._det

    def scaled(self, t) -> "Lattice":
        t = nm.to_number(t)
        rows = [[v * t for v in r] for r in self.basis]
        if isinstance(t, mpf):
            rows = [[nm.to_mpf(v) for v in r] for r in rows]
        return Lattice(rows)

    def transformed(self, T) -> "Lattice":
        """Image lattice under x -> T x."""
        T = nm.unify_matrix(T)
        rows = [[nm.dot(r, trow) for trow in T] for r in self._promoted(T)]
        return Lattice(rows)

    def _promoted(self, other_rows):
        if self.exact and other_rows and isinstance(other_rows[0][0], mpf):
            return [[nm.to_mpf(v) for v in r] for r in self.basis]
        return self.basis

    def to_float(self) -> np.ndarray:
        return np.array([[nm.to_float(v) for v in r] for r in self.basis], dtype=float)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "basis": [[nm.full_precision_str(v) for v in r] for r in self.basis],
            "exact": self.exact,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Lattice":
        basis = d["basis"]
        if "dim" in d and len(basis) != int(d["dim"]):
            raise InvalidLattice("dim does not match basis")
        if d.get("exact", True) is False:
            basis = [[nm.to_mpf(nm.to_number(v)) for v in r] for r in basis]
        return cls(basis)

    @classmethod
    def from_json(cls, s: str) -> "Lattice":
        return cls.from_dict(json.loads(s))


def determinant(L: Lattice):
    """|det(a_1, ..., a_n)|, exact for rational bases."""
    return L.determinant()


def dual_lattice(L: Lattice) -> Lattice:
    """Reciprocal lattice {x : x.y in Z for all y in L}: inverse-transpose basis."""
    try:
        inv = nm.inverse(L.basis)
    except ZeroDivisionError:
        raise InvalidLattice("singular basis") from None
    return Lattice(nm.transpose(inv))


def hermite_rows(A: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix (zero rows dropped)."""
    A = [list(map(int, r)) for r in A]
    m = len(A)
    n = len(A[0]) if A else 0
    r = 0
    for c in range(n):
        if r >= m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[i0] = A[i0], A[r]
            clean = True
            pr = A[r]
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // pr[c]
                    if q:
                        A[i] = [a - q * b for a, b in zip(A[i], pr)]
                    if A[i][c]:
                        clean = False
            if clean:
                break
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-a for a in A[r]]
        piv = A[r][c]
        for i in range(r):
            q = A[i][c] // piv
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[r])]
        r += 1
    return A[:r]


def canonical_form(L: Lattice) -> Lattice:
    """Hermite canonical basis; two rational lattices are equal iff these agree."""
    if not L.exact:
        raise UnsupportedExactOp("canonical form needs rational entries")
    return Lattice.from_generators(L.basis)


def same_lattice(L1: Lattice, L2: Lattice) -> bool:
    return L1.dim == L2.dim and canonical_form(L1) == canonical_form(L2)


def _lll(rows: list[list], delta) -> tuple[list[list], list[list[int]]]:
    """LLL on Fraction or mpf rows; returns (reduced rows, unimodular U)."""
    b = [list(r) for r in rows]
    n = len(b)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    if isinstance(b[0][0], mpf):
        delta = nm.to_mpf(delta)
        half = mpf(1) / 2
    else:
        delta = Fraction(delta) if not isinstance(delta, Fraction) else delta
        half = Fraction(1, 2)
    mu = [[b[0][0] * 0 for _ in range(n)] for _ in range(n)]
    B = [None] * n
    bstar = []
    for i in range(n):
        v = list(b[i])
        for j in range(i):
            mu[i][j] = nm.dot(b[i], bstar[j]) / B[j]
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        bstar.append(v)
        B[i] = nm.dot(v, v)

    def red(k, l):
        if nm.absval(mu[k][l]) > half:
            q = nm.nint(mu[k][l])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            U[k] = [x - q * y for x, y in zip(U[k], U[l])]
            mu[k][l] -= q
            for i in range(l):
                mu[k][i] -= q * mu[l][i]

    k = 1
    while k < n:
        red(k, k - 1)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            b[k], b[k - 1] = b[k - 1], b[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            for j in range(k - 1):
                mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
            m = mu[k][k - 1]
            Bn = B[k] + m * m * B[k - 1]
            mu[k][k - 1] = m * B[k - 1] / Bn
            B[k] = B[k - 1] * B[k] / Bn
            B[k - 1] = Bn
            for i in range(k + 1, n):
                t = mu[i][k]
                mu[i][k] = mu[i][k - 1] - m * t
                mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b, U


def lll_reduce(L: Lattice, delta=DEFAULT_DELTA) -> Lattice:
    """LLL-reduced basis of the same lattice."""
    if not (Fraction(1, 4) < nm.mpf_to_fraction(nm.to_number(delta)) < 1):
        raise ValueError("delta must lie in (1/4, 1)")
    red, _ = _lll([list(r) for r in L.basis], delta)
    out = Lattice(red, check=False)
    out._det = L.determinant()
    return out


def lll_with_transform(L: Lattice, delta=DEFAULT_DELTA):
    red, U = _lll([list(r) for r in L.basis], delta)
    out = Lattice(red, check=False)
    out._det = L.determinant()
    return out, U


class Enumerator:
    """Fincke-Pohst enumeration over the LLL reduction of linearly independent rows.

    Pruning runs in float64 on the Gram-Schmidt data of the reduced rows with a
    relative radius margin, so every point inside the radius is returned;
    callers filter the candidates exactly.
    """

    MARGIN = 1e-9

    def __init__(self, rows, delta=DEFAULT_DELTA, reduce: bool = True):
        rows = nm.unify_matrix([list(r) for r in rows])
        m = len(rows)
        if reduce and m > 1:
            self.rows, self.U = _lll(rows, delta)
        else:
            self.rows, self.U = rows, [[int(i == j) for j in range(m)] for i in range(m)]
        self.m = m
        fb = np.array([[nm.to_float(v) for v in r] for r in self.rows], dtype=float)
        scale = float(np.max(np.abs(fb))) or 1.0
        self._scale = scale
        fb = fb / scale
        self._fb = fb
        mu = np.zeros((m, m))
        bstar = np.zeros_like(fb)
        Bn = np.zeros(m)
        for i in range(m):
            v = fb[i].copy()
            for j in range(i):
                mu[i, j] = fb[i] @ bstar[j] / Bn[j]
                v -= mu[i, j] * bstar[j]
            bstar[i] = v
            Bn[i] = v @ v
        if np.any(Bn <= 0):
            raise InvalidLattice("reduced basis is numerically degenerate")
        self.mu, self.B, self.bstar = mu, Bn, bstar

    @classmethod
    def for_lattice(cls, L: Lattice, delta=DEFAULT_DELTA) -> "Enumerator":
        return cls(L.basis, delta)

    def shortest_row_norm(self) -> float:
        return float(np.min(np.linalg.norm(self._fb, axis=1))) * self._scale

    def coefficients(self, rho, budget: int = DEFAULT_BUDGET, center=None) -> np.ndarray:
        """Integer coefficient rows (w.r.t. the reduced rows) of lattice points x
        with ||x - center|| <= rho.  Without a center the origin is skipped and
        only one of each +- pair is returned."""
        m = self.m
        r2 = (float(rho) / self._scale) ** 2 * (1 + self.MARGIN) + 1e-300
        mu, B = self.mu, self.B
        if center is None:
            eta = np.zeros(m)
            symmetric = True
        else:
            y = np.asarray([nm.to_float(v) for v in center], dtype=float) / self._scale
            eta = self.bstar @ y / B
            perp = y - eta @ self.bstar
            r2 -= float(perp @ perp) * (1 - self.MARGIN)
            symmetric = False
        z = [0] * m
        chunks: list[np.ndarray] = []
        count = 0

        def rec(i, partial, zero_above):
            nonlocal count
            c = eta[i]
            for j in range(i + 1, m):
                if z[j]:
                    c -= mu[j, i] * z[j]
            rem = r2 - partial
            if rem < 0:
                return
            w = math.sqrt(rem / B[i])
            lo = math.ceil(c - w)
            hi = math.floor(c + w)
            if zero_above:
                lo = max(lo, 0)
            if lo > hi:
                return
            if i == 0:
                start = max(lo, 1) if zero_above else lo
                zs = np.arange(start, hi + 1, dtype=np.int64)
                if zs.size == 0:
                    return
                count += zs.size
                if count > budget:
                    raise EnumerationBudget(f"more than {budget} lattice points within radius {rho}")
                block = np.empty((zs.size, m), dtype=np.int64)
                block[:, 0] = zs
                for j in range(1, m):
                    block[:, j] = z[j]
                chunks.append(block)
                return
            for zi in range(lo, hi + 1):
                z[i] = zi
                d = zi - c
                rec(i - 1, partial + B[i] * d * d, zero_above and zi == 0)
            z[i] = 0

        if r2 >= 0:
            rec(m - 1, 0.0, symmetric)
        if not chunks:
            return np.zeros((0, m), dtype=np.int64)
        return np.concatenate(chunks)

    def combine(self, coeffs) -> tuple:
        """Point sum_i c_i r_i for reduced rows r_i (exact or mpf)."""
        pt = None
        for c, r in zip(coeffs, self.rows):
            c = int(c)
            if c:
                pt = [c * v for v in r] if pt is None else [a + c * v for a, v in zip(pt, r)]
        if pt is None:
            pt = [v * 0 for v in self.rows[0]]
        return tuple(pt)

    def points(self, Z) -> list[tuple]:
        return [self.combine(row) for row in Z]

    def float_points(self, Z) -> np.ndarray:
        return (np.asarray(Z, dtype=float) @ self._fb) * self._scale

    def input_coefficients(self, coeffs) -> list[int]:
        """Coefficients w.r.t. the rows passed to the constructor."""
        out = [0] * self.m
        for c, urow in zip(coeffs, self.U):
            c = int(c)
            if c:
                out = [a + c * u for a, u in zip(out, urow)]
        return out


def unimodular_completion(Z: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Unimodular E whose first k rows span (Q-span of rows of Z) intersected with Z^n."""
    k = len(Z)
    A = [list(map(int, r)) for r in Z]
    W = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j, r, q):
        for row in A:
            row[j] -= q * row[r]
        for row in W:
            row[j] -= q * row[r]

    def col_swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in W:
            row[i], row[j] = row[j], row[i]

    for r in range(k):
        while True:
            nz = [j for j in range(r, n) if A[r][j] != 0]
            if not nz:
                raise ValueError("rows of Z are linearly dependent")
            j0 = min(nz, key=lambda j: abs(A[r][j]))
            if j0 != r:
                col_swap(r, j0)
            clean = True
            for j in range(r + 1, n):
                if A[r][j]:
                    col_op(j, r, A[r][j] // A[r][r])
                    if A[r][j]:
                        clean = False
            if clean:
                break
    inv = nm.inverse([[Fraction(v) for v in row] for row in W])
    return [[int(v) for v in row] for row in inv]


def canonical_sign(x: Sequence) -> tuple:
    """Representative of {x, -x} whose first nonzero coordinate is positive."""
    for v in x:
        if v != 0:
            return tuple(x) if v > 0 else tuple(-w for w in x)
    return tuple(x)


def tie_key(x: Sequence) -> tuple:
    """Order among equal-norm candidates: lexicographically largest first, so
    e_1 precedes e_2."""
    return tuple(-v for v in canonical_sign(x))


def norm2(x):
    return nm.dot(x, x)


def enumerate_euclidean(L: Lattice, rho, budget: int = DEFAULT_BUDGET) -> list[tuple]:
    """All nonzero x in L with ||x|| <= rho, one per +- pair, sorted by (||x||, coords)."""
    rho = nm.to_number(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    en = Enumerator.for_lattice(L)
    pts = [canonical_sign(p) for p in en.points(en.coefficients(nm.to_float(rho), budget))]
    r2 = rho * rho
    inexact_bound = isinstance(r2, mpf)
    keyed = []
    for p in pts:
        q = norm2(p)
        if (nm.to_mpf(q) if inexact_bound else q) <= r2:
            keyed.append((q, p))
    keyed.sort()
    return [p for _, p in keyed]
