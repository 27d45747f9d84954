"""Dual-numeric scalar layer.

Exact values are ``fractions.Fraction``; inexact values are ``mpmath.mpf``
at a working precision of at least 128 bits.  Helpers here never mix the two
silently: anything touching an ``mpf`` is promoted to ``mpf``.
"""

from __future__ import annotations

import contextlib
import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
from mpmath import mp, mpf

MIN_PREC = 128
EPS = 1e-9

if mp.prec < MIN_PREC:
    mp.prec = MIN_PREC

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


@contextlib.contextmanager
def precision(bits: int):
    """Raise the mpmath working precision to at least ``bits`` inside the block."""
    old = mp.prec
    mp.prec = max(old, int(bits))
    try:
        yield
    finally:
        mp.prec = old


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def to_number(x):
    """Parse a scalar: ints, Fractions and "p/q" strings are exact, the rest mpf."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if _RATIONAL_RE.match(x):
            return Fraction(x.replace(" ", ""))
        return mpf(x)
    if isinstance(x, mpf):
        return x
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, float):
        return Fraction(int(x.numerator), int(x.denominator))
    return mpf(x)


def to_mpf(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, mpf):
        return x
    return mpf(x)


def to_float(x) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


def mpf_to_fraction(x) -> Fraction:
    """Exact binary value of an mpf (or float) as a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    x = to_mpf(x)
    if not mpmath.isfinite(x):
        raise ValueError(f"cannot convert {x} to a Fraction")
    man, exp = x.man_exp
    man = int(man) if x >= 0 else -abs(int(man))
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


def unify(values: Iterable) -> list:
    """Convert a flat sequence to one numeric kind (all Fraction or all mpf)."""
    vals = [to_number(v) for v in values]
    if all(isinstance(v, Fraction) for v in vals):
        return vals
    return [to_mpf(v) for v in vals]


def unify_matrix(rows: Sequence[Sequence]) -> list[list]:
    flat = unify(v for r in rows for v in r)
    out, k = [], 0
    for r in rows:
        out.append(flat[k:k + len(r)])
        k += len(r)
    return out


def promote(a, b):
    """Bring two scalars to a common kind."""
    if isinstance(a, mpf) or isinstance(b, mpf):
        return to_mpf(a), to_mpf(b)
    return a, b


def nint(x) -> int:
    """Nearest integer, halves rounded up (deterministic for both kinds)."""
    if isinstance(x, Fraction):
        return math.floor(x + Fraction(1, 2))
    return int(mpmath.floor(x + mpf(0.5)))


def absval(x):
    return -x if x < 0 else x


def sqrt(x):
    return mpmath.sqrt(to_mpf(x))


def dot(u, v):
    s = 0
    for a, b in zip(u, v):
        s += a * b
    return s


def mat_mul(A, B):
    cols = list(zip(*B))
    return [[dot(r, c) for c in cols] for r in A]


def transpose(A):
    return [list(c) for c in zip(*A)]


def _pivot_row(M, col, start):
    exact = all(is_exact(M[r][col]) for r in range(start, len(M)))
    best, best_val = None, None
    for r in range(start, len(M)):
        v = M[r][col]
        if v == 0:
            continue
        if exact:
            return r
        av = absval(v)
        if best is None or av > best_val:
            best, best_val = r, av
    return best


def det(M) -> object:
    """Determinant by Gaussian elimination (exact on Fractions)."""
    A = [list(r) for r in M]
    n = len(A)
    sign = 1
    d = 1
    for c in range(n):
        p = _pivot_row(A, c, c)
        if p is None:
            return A[0][0] * 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        piv = A[c][c]
        d = d * piv
        for r in range(c + 1, n):
            if A[r][c] != 0:
                f = A[r][c] / piv
                Ar, Ac = A[r], A[c]
                for k in range(c, n):
                    Ar[k] = Ar[k] - f * Ac[k]
    return d * sign


def inverse(M):
    """Gauss-Jordan inverse; raises ZeroDivisionError when singular."""
    n = len(M)
    A = [list(r) + [Fraction(int(i == j)) if is_exact(M[0][0]) else mpf(int(i == j))
                    for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = _pivot_row(A, c, c)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [v / piv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [r[n:] for r in A]


class IndependenceTracker:
    """Incremental exact rank test for integer (or rational) vectors."""

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: list[tuple[int, list[Fraction]]] = []

    def __len__(self):
        return len(self._rows)

    def _reduce(self, vec):
        v = [Fraction(x) for x in vec]
        for piv, row in self._rows:
            if v[piv] != 0:
                f = v[piv]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def is_independent(self, vec) -> bool:
        return any(x != 0 for x in self._reduce(vec))

    def add(self, vec) -> bool:
        v = self._reduce(vec)
        piv = next((i for i, x in enumerate(v) if x != 0), None)
        if piv is None:
            return False
        pv = v[piv]
        v = [x / pv for x in v]
        new_rows = []
        for p, row in self._rows:
            if row[piv] != 0:
                f = row[piv]
                row = [a - f * b for a, b in zip(row, v)]
            new_rows.append((p, row))
        new_rows.append((piv, v))
        self._rows = new_rows
        return True


def format_scalar(x, digits: int = 17) -> str:
    """Serialize a scalar: "p/q" for rationals, ``digits`` significant digits otherwise."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, f".{digits}g")
    return _mp_str(to_mpf(x), digits)


def _mp_str(x: mpf, digits: int) -> str:
    if x == 0:
        return "0"
    return mpmath.nstr(x, digits, strip_zeros=True)


def full_precision_str(x) -> str:
    """Round-trippable string at the current working precision."""
    if is_exact(x):
        return str(Fraction(x))
    digits = int(mp.prec * 0.30103) + 3
    return _mp_str(to_mpf(x), digits)


def kappa(n: int) -> mpf:
    """Volume of the n-dimensional Euclidean unit ball."""
    return mpmath.pi ** (mpf(n) / 2) / mpmath.gamma(mpf(n) / 2 + 1)


def less_equal(a, b) -> bool:
    a, b = promote(a, b)
    return a <= b


_FUNCS = {"sqrt": mpmath.sqrt, "exp": mpmath.exp, "log": mpmath.log, "cos": mpmath.cos,
          "sin": mpmath.sin, "cbrt": mpmath.cbrt}
_CONSTS = {"pi": lambda: +mpmath.pi, "e": lambda: +mpmath.e}


def parse_real(text):
    """Evaluate a real expression such as "(1+sqrt(5))/2" at the working precision.

    Plain rationals stay exact; anything with a function or constant becomes mpf.
    Only arithmetic, numeric literals and the names in _FUNCS/_CONSTS are allowed.
    """
    import ast
    import operator

    if not isinstance(text, str):
        return to_number(text)
    if _RATIONAL_RE.match(text):
        return Fraction(text.replace(" ", ""))
    ops = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            if isinstance(node.value, int):
                return Fraction(node.value)
            # decimal literals are read from the source text, never via float
            return mpf(ast.get_source_segment(src, node))
        if isinstance(node, ast.BinOp) and type(node.op) in ops:
            a, b = promote(ev(node.left), ev(node.right))
            if isinstance(node.op, ast.Pow) and isinstance(b, Fraction) and b.denominator != 1:
                a, b = to_mpf(a), to_mpf(b)
            return ops[type(node.op)](a, b)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]()
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](to_mpf(ev(node.args[0])))
        raise ValueError(f"unsupported expression: {text!r}")

    src = text.strip()
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc
    return ev(tree)
