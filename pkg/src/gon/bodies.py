"""Distance functions (gauges) of symmetric convex and star bodies.

Every gauge F describes the body {x : F(x) <= 1}.  Convex variants expose
closed-form polars and volumes; the Mahler product V(C) V(C*) is assembled
from those closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

import mpmath
import numpy as np
from mpmath import mpf

from . import numeric as nm
from .errors import DimensionMismatch, NotConvex, UnboundedBody
from .rng import stream

VERTEX_LIMIT = 12


def _vec(values) -> tuple:
    return tuple(nm.unify(values))


def _mat(rows) -> tuple:
    return tuple(tuple(r) for r in nm.unify_matrix([list(r) for r in rows]))


def _common(x, data_exact: bool):
    """Bring the point to the kind of the gauge data."""
    xs = [nm.to_number(v) for v in x]
    if data_exact and all(isinstance(v, Fraction) for v in xs):
        return xs, True
    return [nm.to_mpf(v) for v in xs], False


def _exact(data) -> bool:
    return all(isinstance(v, Fraction) for v in data)


def _flat(rows):
    return [v for r in rows for v in r]


def _diag(values):
    n = len(values)
    zero = values[0] * 0
    return tuple(tuple(values[i] if i == j else zero for j in range(n)) for i in range(n))


def _linf(v):
    return max(nm.absval(t) for t in v)


def _l1(v):
    s = 0
    for t in v:
        s += nm.absval(t)
    return s


def _apply(M, x):
    return [nm.dot(r, x) for r in M]


def _fact(n):
    return math.factorial(n)


class Gauge:
    """Base class; subclasses are frozen dataclasses."""

    variant: ClassVar[str] = "Gauge"
    convex: ClassVar[bool] = True
    bounded: ClassVar[bool] = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def __call__(self, x):
        return gauge_eval(self, x)

    def _eval(self, x):
        raise NotImplementedError

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Vectorized float64 evaluation for sampling and screening."""
        raise NotImplementedError

    def linear_part(self):
        """(T, base) with F(x) = base(T x), base in {'max', 'sum', 'l2'}; None if nonlinear."""
        return None

    def polar(self) -> "Gauge":
        raise NotConvex(f"{self.variant} is not convex")

    def volume(self):
        raise NotImplementedError

    def radii(self):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MaxNorm(Gauge):
    """Box |x_i| <= s_i."""

    scales: tuple
    variant: ClassVar[str] = "MaxNorm"

    def __post_init__(self):
        object.__setattr__(self, "scales", _vec(self.scales))
        if any(s <= 0 for s in self.scales):
            raise ValueError("box scales must be positive")

    @classmethod
    def unit(cls, n: int) -> "MaxNorm":
        return cls((1,) * n)

    @property
    def dim(self):
        return len(self.scales)

    def _eval(self, x):
        xs, _ = _common(x, _exact(self.scales))
        return max(nm.absval(a) / s for a, s in zip(xs, self.scales))

    def eval_many(self, X):
        s = np.array([nm.to_float(v) for v in self.scales])
        return np.max(np.abs(X) / s, axis=1)

    def linear_part(self):
        return _diag([1 / s for s in self.scales]), "max"

    def polar(self):
        if all(s == 1 for s in self.scales):
            return SumNorm(self.dim)
        return CrossImage(_diag(list(self.scales)))

    def volume(self):
        v = 2 ** self.dim
        for s in self.scales:
            v = v * s
        return v if _exact(self.scales) else nm.to_mpf(v)

    def radii(self):
        n = self.dim
        return nm.to_mpf(min(self.scales)), mpmath.sqrt(n) * nm.to_mpf(max(self.scales))

    def to_dict(self):
        return {"variant": self.variant, "scales": [nm.full_precision_str(s) for s in self.scales]}


@dataclass(frozen=True)
class SumNorm(Gauge):
    n: int
    variant: ClassVar[str] = "SumNorm"

    @property
    def dim(self):
        return self.n

    def _eval(self, x):
        xs, _ = _common(x, True)
        return _l1(xs)

    def eval_many(self, X):
        return np.sum(np.abs(X), axis=1)

    def linear_part(self):
        return _diag([Fraction(1)] * self.n), "sum"

    def polar(self):
        return MaxNorm.unit(self.n)

    def volume(self):
        return Fraction(2 ** self.n, _fact(self.n))

    def radii(self):
        return 1 / mpmath.sqrt(self.n), mpf(1)

    def to_dict(self):
        return {"variant": self.variant, "dim": self.n}


@dataclass(frozen=True)
class EuclideanNorm(Gauge):
    n: int
    variant: ClassVar[str] = "EuclideanNorm"

    @property
    def dim(self):
        return self.n

    def _eval(self, x):
        xs, _ = _common(x, True)
        return nm.sqrt(nm.dot(xs, xs))

    def eval_many(self, X):
        return np.sqrt(np.sum(X * X, axis=1))

    def linear_part(self):
        return _diag([Fraction(1)] * self.n), "l2"

    def polar(self):
        return self

    def volume(self):
        return nm.kappa(self.n)

    def radii(self):
        return mpf(1), mpf(1)

    def to_dict(self):
        return {"variant": self.variant, "dim": self.n}


@dataclass(frozen=True)
class Ellipsoid(Gauge):
    """F(x) = sqrt(x^T A x) for positive-definite A."""

    A: tuple
    variant: ClassVar[str] = "Ellipsoid"

    def __post_init__(self):
        object.__setattr__(self, "A", _mat(self.A))
        n = len(self.A)
        if any(len(r) != n for r in self.A):
            raise DimensionMismatch("A must be square")
        if any(self.A[i][j] != self.A[j][i] for i in range(n) for j in range(n)):
            raise ValueError("A must be symmetric")
        try:
            mpmath.cholesky(mpmath.matrix([[nm.to_mpf(v) for v in r] for r in self.A]))
        except ValueError:
            raise ValueError("A must be positive definite") from None

    @property
    def dim(self):
        return len(self.A)

    def quadratic(self, x):
        xs, _ = _common(x, _exact(_flat(self.A)))
        return nm.dot(xs, _apply(self.A, xs))

    def _eval(self, x):
        return nm.sqrt(nm.absval(self.quadratic(x)))

    def eval_many(self, X):
        A = np.array([[nm.to_float(v) for v in r] for r in self.A])
        return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, A, X), 0.0))

    def linear_part(self):
        Lc = mpmath.cholesky(mpmath.matrix([[nm.to_mpf(v) for v in r] for r in self.A]))
        n = self.dim
        return tuple(tuple(Lc[j, i] for j in range(n)) for i in range(n)), "l2"

    def polar(self):
        return Ellipsoid(nm.inverse(self.A))

    def volume(self):
        return nm.kappa(self.dim) / nm.sqrt(nm.det(self.A))

    def radii(self):
        ev, _ = mpmath.eigsy(mpmath.matrix([[nm.to_mpf(v) for v in r] for r in self.A]))
        ev = [ev[i] for i in range(self.dim)]
        guard = 1 + mpf(2) ** (-100)
        return 1 / mpmath.sqrt(max(ev)) / guard, guard / mpmath.sqrt(min(ev))

    def to_dict(self):
        return {"variant": self.variant, "A": [[nm.full_precision_str(v) for v in r] for r in self.A]}


@dataclass(frozen=True)
class Parallelepiped(Gauge):
    """F(x) = max_i |a_i . x| / A_i."""

    rows: tuple
    bounds: tuple
    variant: ClassVar[str] = "Parallelepiped"

    def __post_init__(self):
        rows = [list(r) for r in self.rows]
        flat = nm.unify(_flat(rows) + list(self.bounds))
        n = len(rows)
        if any(len(r) != n for r in rows) or len(self.bounds) != n:
            raise DimensionMismatch("parallelepiped needs n rows of length n and n bounds")
        object.__setattr__(self, "rows", tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)))
        object.__setattr__(self, "bounds", tuple(flat[n * n:]))
        if any(b <= 0 for b in self.bounds):
            raise ValueError("bounds must be positive")
        if nm.det(self.rows) == 0:
            raise ValueError("parallelepiped rows must be linearly independent")

    @classmethod
    def from_matrix(cls, M) -> "Parallelepiped":
        M = _mat(M)
        one = Fraction(1) if _exact(_flat(M)) else mpf(1)
        return cls(M, (one,) * len(M))

    @property
    def dim(self):
        return len(self.rows)

    @property
    def matrix(self):
        """Normalized rows a_i / A_i."""
        return tuple(tuple(v / b for v in r) for r, b in zip(self.rows, self.bounds))

    @property
    def is_exact(self):
        return _exact(_flat(self.rows))

    def _eval(self, x):
        xs, _ = _common(x, self.is_exact)
        return max(nm.absval(nm.dot(r, xs)) / b for r, b in zip(self.rows, self.bounds))

    def eval_many(self, X):
        M = np.array([[nm.to_float(v) for v in r] for r in self.matrix])
        return np.max(np.abs(X @ M.T), axis=1)

    def linear_part(self):
        return self.matrix, "max"

    def polar(self):
        return CrossImage(nm.transpose(nm.inverse(self.matrix)))

    def volume(self):
        v = Fraction(2 ** self.dim) if self.is_exact else mpf(2 ** self.dim)
        for b in self.bounds:
            v = v * b
        return v / nm.absval(nm.det(self.rows))

    def radii(self):
        M = self.matrix
        r = 1 / nm.sqrt(max(nm.dot(row, row) for row in M))
        Minv = nm.inverse(M)
        n = self.dim
        if n <= VERTEX_LIMIT:
            best = 0
            for signs in itertools.product((1, -1), repeat=n - 1):
                w = (1,) + signs
                y = [nm.dot(row, w) for row in Minv]
                best = max(best, nm.dot(y, y), key=nm.to_mpf)
            R = nm.sqrt(best)
        else:
            R = mpmath.sqrt(n) * nm.sqrt(sum(v * v for v in _flat(Minv)))
        return r, R

    def to_dict(self):
        return {"variant": self.variant,
                "rows": [[nm.full_precision_str(v) for v in r] for r in self.rows],
                "bounds": [nm.full_precision_str(v) for v in self.bounds]}


@dataclass(frozen=True)
class CrossImage(Gauge):
    """F(x) = ||M x||_1; the body is the convex hull of the +- columns of M^{-1}."""

    M: tuple
    variant: ClassVar[str] = "CrossImage"

    def __post_init__(self):
        object.__setattr__(self, "M", _mat(self.M))
        if any(len(r) != len(self.M) for r in self.M):
            raise DimensionMismatch("M must be square")
        if nm.det(self.M) == 0:
            raise ValueError("M must be nonsingular")

    @property
    def dim(self):
        return len(self.M)

    @property
    def is_exact(self):
        return _exact(_flat(self.M))

    def _eval(self, x):
        xs, _ = _common(x, self.is_exact)
        return _l1(_apply(self.M, xs))

    def eval_many(self, X):
        M = np.array([[nm.to_float(v) for v in r] for r in self.M])
        return np.sum(np.abs(X @ M.T), axis=1)

    def linear_part(self):
        return self.M, "sum"

    def polar(self):
        return Parallelepiped.from_matrix(nm.transpose(nm.inverse(self.M)))

    def volume(self):
        n = self.dim
        v = Fraction(2 ** n, _fact(n)) if self.is_exact else mpf(2 ** n) / _fact(n)
        return v / nm.absval(nm.det(self.M))

    def vertices(self):
        """Columns of M^{-1} (one of each +- pair)."""
        return [tuple(c) for c in nm.transpose(nm.inverse(self.M))]

    def radii(self):
        R = nm.sqrt(max((nm.dot(c, c) for c in self.vertices()), key=nm.to_mpf))
        n = self.dim
        if n <= VERTEX_LIMIT:
            MT = nm.transpose(self.M)
            best = 0
            for signs in itertools.product((1, -1), repeat=n - 1):
                s = (1,) + signs
                y = [nm.dot(row, s) for row in MT]
                best = max(best, nm.dot(y, y), key=nm.to_mpf)
            r = 1 / nm.sqrt(best)
        else:
            r = 1 / (mpmath.sqrt(n) * nm.sqrt(sum(v * v for v in _flat(self.M))))
        return r, R

    def to_dict(self):
        return {"variant": self.variant, "M": [[nm.full_precision_str(v) for v in r] for r in self.M]}


@dataclass(frozen=True)
class WeightedBox(Gauge):
    """Box |x_i| <= exp(mu_i q), stored as (mu, q) so parameter sweeps reuse it."""

    mu: tuple
    q: object
    variant: ClassVar[str] = "WeightedBox"

    def __post_init__(self):
        object.__setattr__(self, "mu", _vec(self.mu))
        object.__setattr__(self, "q", nm.to_number(self.q))

    @property
    def dim(self):
        return len(self.mu)

    @property
    def _trivial(self):
        return self.q == 0 or all(m == 0 for m in self.mu)

    def half_sides(self):
        if self._trivial:
            return tuple(Fraction(1) for _ in self.mu)
        q = nm.to_mpf(self.q)
        return tuple(mpmath.exp(nm.to_mpf(m) * q) for m in self.mu)

    def _eval(self, x):
        sides = self.half_sides()
        xs, _ = _common(x, _exact(sides))
        return max(nm.absval(a) / s for a, s in zip(xs, sides))

    def eval_many(self, X):
        s = np.array([nm.to_float(v) for v in self.half_sides()])
        return np.max(np.abs(X) / s, axis=1)

    def linear_part(self):
        return _diag([1 / s for s in self.half_sides()]), "max"

    def as_parallelepiped(self) -> Parallelepiped:
        n = self.dim
        one = Fraction(1)
        return Parallelepiped(_diag([one] * n), self.half_sides())

    def polar(self):
        return CrossImage(_diag(list(self.half_sides())))

    def volume(self):
        v = 2 ** self.dim
        for s in self.half_sides():
            v = v * s
        return v

    def radii(self):
        sides = [nm.to_mpf(s) for s in self.half_sides()]
        return min(sides), mpmath.sqrt(self.dim) * max(sides)

    def to_dict(self):
        return {"variant": self.variant, "mu": [nm.full_precision_str(v) for v in self.mu],
                "q": nm.full_precision_str(self.q)}


@dataclass(frozen=True)
class NormForm(Gauge):
    """F(x) = |x_1 ... x_n|^{1/n}: the unbounded star body |x_1 ... x_n| <= 1."""

    n: int
    variant: ClassVar[str] = "NormForm"
    convex: ClassVar[bool] = False
    bounded: ClassVar[bool] = False

    @property
    def dim(self):
        return self.n

    def product(self, x):
        xs, _ = _common(x, True)
        p = 1
        for v in xs:
            p = p * v
        return nm.absval(p)

    def _eval(self, x):
        p = self.product(x)
        if p == 0:
            return p
        return nm.to_mpf(p) ** (mpf(1) / self.n)

    def eval_many(self, X):
        return np.abs(np.prod(X, axis=1)) ** (1.0 / self.n)

    def volume(self):
        raise UnboundedBody("the norm-form body has infinite volume")

    def radii(self):
        raise UnboundedBody("the norm-form body is unbounded")

    def to_dict(self):
        return {"variant": self.variant, "dim": self.n}


@dataclass(frozen=True)
class TruncatedNormForm(Gauge):
    """F(x) = max(|x_1 ... x_n|^{1/n}, max_i |x_i| / r)."""

    n: int
    r: object
    variant: ClassVar[str] = "TruncatedNormForm"
    convex: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "r", nm.to_number(self.r))
        if self.r <= 0:
            raise ValueError("cap must be positive")

    @property
    def dim(self):
        return self.n

    def _eval(self, x):
        nf = NormForm(self.n)._eval(x)
        xs, _ = _common(x, isinstance(self.r, Fraction))
        box = _linf(xs) / self.r
        a, b = nm.promote(nf, box)
        return max(a, b)

    def eval_many(self, X):
        r = nm.to_float(self.r)
        return np.maximum(NormForm(self.n).eval_many(X), np.max(np.abs(X), axis=1) / r)

    def volume(self):
        est, _ = monte_carlo_volume(self)
        return est

    def radii(self):
        r = nm.to_mpf(self.r)
        return min(mpf(1), r), r * mpmath.sqrt(self.n)

    def to_dict(self):
        return {"variant": self.variant, "dim": self.n, "r": nm.full_precision_str(self.r)}


VARIANTS = {cls.variant: cls for cls in
            (MaxNorm, SumNorm, EuclideanNorm, Ellipsoid, Parallelepiped, CrossImage,
             WeightedBox, NormForm, TruncatedNormForm)}


def gauge_from_dict(d: dict) -> Gauge:
    kind = d.get("variant")
    if kind not in VARIANTS:
        raise ValueError(f"unknown gauge variant {kind!r}")
    if kind == "MaxNorm":
        if "scales" in d:
            return MaxNorm(tuple(nm.to_number(v) for v in d["scales"]))
        return MaxNorm.unit(int(d["dim"]))
    if kind in ("SumNorm", "EuclideanNorm", "NormForm"):
        return VARIANTS[kind](int(d["dim"]))
    if kind == "Ellipsoid":
        return Ellipsoid(d["A"])
    if kind == "Parallelepiped":
        return Parallelepiped(d["rows"], d["bounds"])
    if kind == "CrossImage":
        return CrossImage(d["M"])
    if kind == "WeightedBox":
        return WeightedBox(tuple(nm.to_number(v) for v in d["mu"]), nm.to_number(d["q"]))
    return TruncatedNormForm(int(d["dim"]), nm.to_number(d["r"]))


def gauge_eval(F: Gauge, x):
    """F(x); exact for rational points on rational variants."""
    if len(x) != F.dim:
        raise DimensionMismatch(f"point has dimension {len(x)}, gauge has {F.dim}")
    return F._eval(x)


def polar_body(F: Gauge) -> Gauge:
    """Gauge of C* = {y : x.y <= 1 for all x in C}, in closed form."""
    if not F.convex:
        raise NotConvex(f"{F.variant} has no convex polar")
    return F.polar()


def volume(F: Gauge):
    """Exact volume for the named convex families; Monte Carlo otherwise."""
    if not F.bounded:
        raise UnboundedBody(f"{F.variant} is unbounded")
    return F.volume()


def outer_inner_radii(F: Gauge):
    """Sound (r, R) with r B_n inside {F <= 1} inside R B_n."""
    if not F.bounded:
        raise UnboundedBody(f"{F.variant} is unbounded")
    return F.radii()


def axis_extents(F: Gauge) -> list:
    """Half-widths of a box containing the body (support function on e_i for convex F)."""
    n = F.dim
    if F.convex:
        P = F.polar()
        return [nm.to_mpf(P(tuple(Fraction(int(i == j)) for j in range(n)))) for i in range(n)]
    if isinstance(F, TruncatedNormForm):
        return [nm.to_mpf(F.r)] * n
    _, R = outer_inner_radii(F)
    return [R] * n


def monte_carlo_volume(F: Gauge, samples: int = 10 ** 6, seed: int = 0,
                       chunk: int = 1 << 16) -> tuple[float, float]:
    """Rejection-sampling volume estimate and its 1-sigma standard error.

    Samples are drawn in fixed-size chunks, chunk k from the counter-based stream
    keyed by (seed, "volume", k), so the estimate is independent of scheduling.
    """
    if not F.bounded:
        raise UnboundedBody(f"{F.variant} is unbounded")
    ext = np.array([float(e) for e in axis_extents(F)])
    box = float(np.prod(2 * ext))
    hits = 0
    done = 0
    k = 0
    while done < samples:
        m = min(chunk, samples - done)
        g = stream(seed, "volume", k)
        X = (g.random((m, F.dim)) * 2 - 1) * ext
        hits += int(np.count_nonzero(F.eval_many(X) <= 1.0))
        done += m
        k += 1
    p = hits / samples
    return box * p, box * math.sqrt(p * (1 - p) / samples)


@dataclass(frozen=True)
class MahlerReport:
    volume: object
    polar_volume: object
    product: object
    c1: Fraction
    c2: Fraction
    santalo: mpf
    conjectured_min: Fraction

    @property
    def within_mahler_bounds(self) -> bool:
        return nm.less_equal(self.c1, self.product) and nm.less_equal(self.product, self.c2)

    @property
    def within_santalo(self) -> bool:
        return nm.to_mpf(self.product) <= self.santalo * (1 + mpf(10) ** -20)


def mahler_volume(F: Gauge) -> MahlerReport:
    """V(C) V(C*) with Mahler's bounds 4^n/(n!)^2 and 4^n, Santalo's kappa_n^2 and
    the conjectured minimum 4^n/n!."""
    P = polar_body(F)
    v, w = volume(F), volume(P)
    a, b = nm.promote(v, w)
    n = F.dim
    return MahlerReport(
        volume=v, polar_volume=w, product=a * b,
        c1=Fraction(4 ** n, _fact(n) ** 2), c2=Fraction(4 ** n),
        santalo=nm.kappa(n) ** 2, conjectured_min=Fraction(4 ** n, _fact(n)),
    )
