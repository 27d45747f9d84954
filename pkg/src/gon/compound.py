"""Exterior powers: wedge products, compound lattices and pseudocompound
parallelepipeds, with the volume, minima and duality checks built on them."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mpf

from . import numeric as nm
from .bodies import MaxNorm, Parallelepiped, WeightedBox, volume
from .errors import DimensionMismatch, InvalidRho, InvariantViolation, SearchSpaceTooLarge
from .lattice import Lattice, canonical_form, dual_lattice
from .minima import MinimaResult, successive_minima

MAX_PERMUTATION_N = 8


@dataclass(frozen=True)
class WedgeIndexSet:
    """Increasing p-tuples of 1..n in lexicographic order (1-based, as in print)."""

    n: int
    p: int

    def __post_init__(self):
        if not 1 <= self.p <= self.n - 1:
            raise ValueError(f"p must lie in [1, n-1], got p={self.p}, n={self.n}")

    @property
    def tuples(self) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(1, self.n + 1), self.p))

    @property
    def N(self) -> int:
        return math.comb(self.n, self.p)

    @property
    def P(self) -> int:
        return math.comb(self.n - 1, self.p - 1)


def _check_p(n, p):
    if not 1 <= p <= n - 1:
        raise ValueError(f"p must lie in [1, n-1], got p={p}, n={n}")


def wedge(*vectors) -> tuple:
    """x_1 ^ ... ^ x_p: the p x p minors on the lexicographically ordered column tuples."""
    if not vectors:
        raise DimensionMismatch("need at least one vector")
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise DimensionMismatch("all vectors must share one dimension")
    p = len(vectors)
    if p > n:
        raise DimensionMismatch(f"cannot wedge {p} vectors in dimension {n}")
    rows = nm.unify_matrix([list(v) for v in vectors])
    return tuple(nm.det([[r[c] for c in cols] for r in rows])
                 for cols in itertools.combinations(range(n), p))


def compound_lattice(L: Lattice, p: int) -> Lattice:
    """Lattice generated by the p-fold wedges of lattice vectors, in dimension C(n, p)."""
    _check_p(L.dim, p)
    rows = [wedge(*(L.basis[i] for i in idx)) for idx in itertools.combinations(range(L.dim), p)]
    return Lattice(rows)


@dataclass(frozen=True)
class Pseudocompound:
    rows: tuple
    bounds: tuple
    n: int
    p: int

    @property
    def gauge(self) -> Parallelepiped:
        return Parallelepiped(self.rows, self.bounds)

    @property
    def N(self) -> int:
        return len(self.rows)


def as_parallelepiped(Pi) -> Parallelepiped:
    if isinstance(Pi, Parallelepiped):
        return Pi
    if isinstance(Pi, WeightedBox):
        return Pi.as_parallelepiped()
    if isinstance(Pi, MaxNorm):
        n = Pi.dim
        return Parallelepiped([[int(i == j) for j in range(n)] for i in range(n)], Pi.scales)
    raise TypeError(f"{Pi.variant} is not a parallelepiped")


def pseudocompound(Pi, p: int) -> Pseudocompound:
    """Rows a_{i1} ^ ... ^ a_{ip} with bounds A_{i1} ... A_{ip}."""
    Pi = as_parallelepiped(Pi)
    n = Pi.dim
    _check_p(n, p)
    rows, bounds = [], []
    for idx in itertools.combinations(range(n), p):
        rows.append(wedge(*(Pi.rows[i] for i in idx)))
        b = 1
        for i in idx:
            b = b * Pi.bounds[i]
        bounds.append(b)
    return Pseudocompound(tuple(rows), tuple(bounds), n, p)


def weighted_box_compound(box: WeightedBox, p: int) -> WeightedBox:
    """Pseudocompound of a weighted box, kept in (exponent, q) form."""
    _check_p(box.dim, p)
    mus = [sum((box.mu[i] for i in idx), box.mu[0] * 0)
           for idx in itertools.combinations(range(box.dim), p)]
    return WeightedBox(tuple(mus), box.q)


@dataclass
class CompoundMinimaReport:
    lambdas: list
    mu: list
    ratios: list
    upper: int
    lower_product: object
    product: object
    upper_ok: bool
    lower_ok: bool

    @property
    def spread(self) -> tuple:
        fl = [nm.to_mpf(r) for r in self.ratios]
        return min(fl), max(fl)


def compound_minima_check(Pi: Parallelepiped, L: Lattice, p: int, strict: bool = True,
                          rel_tol: float = 1e-9, base: MinimaResult | None = None
                          ) -> CompoundMinimaReport:
    """lambda_i(compound body, compound lattice) against the sorted p-fold products mu_i."""
    n = L.dim
    _check_p(n, p)
    base = base or successive_minima(L, Pi)
    mus = []
    for idx in itertools.combinations(range(n), p):
        m = Fraction(1)
        for i in idx:
            a, b = nm.promote(m, base.lambdas[i])
            m = a * b
        mus.append(m)
    mus.sort(key=nm.to_mpf)
    Lp = compound_lattice(L, p)
    Ph = pseudocompound(Pi, p).gauge
    lam = successive_minima(Lp, Ph).lambdas
    ratios = []
    for a, b in zip(lam, mus):
        a, b = nm.promote(a, b)
        ratios.append(a / b)
    upper = math.factorial(p)
    up_ok = all(nm.to_mpf(r) <= upper * (1 + rel_tol) for r in ratios)
    N = len(lam)
    prod = Fraction(1)
    for v in lam:
        a, b = nm.promote(prod, v)
        prod = a * b
    V, d = volume(Ph), Lp.determinant()
    a, b = nm.promote(Fraction(2 ** N, math.factorial(N)) * 1, d)
    lower = a * b
    a, b = nm.promote(lower, V)
    lower = a / b
    lo_ok = nm.to_mpf(prod) >= nm.to_mpf(lower) * (1 - rel_tol)
    rep = CompoundMinimaReport(lam, mus, ratios, upper, lower, prod, up_ok, lo_ok)
    if strict and not (up_ok and lo_ok):
        raise InvariantViolation(f"compound minima bounds violated: ratios={ratios}")
    return rep


@dataclass
class CompoundVolumeReport:
    ratio: object
    compound_volume: object
    volume: object
    P: int
    expected: Fraction


def compound_volume_check(Pi: Parallelepiped, p: int, strict: bool = True,
                          rel_tol: float = 1e-9) -> CompoundVolumeReport:
    """V(pseudocompound) V(Pi)^{-P}.

    For parallelepipeds the ratio is 2^{N - nP} whatever the rows and bounds
    (volumes scale by |det|^P and prod(A)^P on both sides), which is the
    substitution invariance being checked.
    """
    Pi = as_parallelepiped(Pi)
    n = Pi.dim
    _check_p(n, p)
    P = math.comb(n - 1, p - 1)
    N = math.comb(n, p)
    Vp = volume(pseudocompound(Pi, p).gauge)
    V = volume(Pi)
    a, b = nm.promote(Vp, V ** P)
    ratio = a / b
    expected = Fraction(2) ** (N - n * P)
    ok = ratio == expected if nm.is_exact(ratio) else \
        abs(nm.to_mpf(ratio) / nm.to_mpf(expected) - 1) <= rel_tol
    if strict and not ok:
        raise InvariantViolation(f"compound volume ratio {ratio} != {expected}")
    return CompoundVolumeReport(ratio, Vp, V, P, expected)


def phi(x: Sequence) -> tuple:
    """(x_1, ..., x_n) -> (x_n, -x_{n-1}, ..., (-1)^{n-1} x_1)."""
    n = len(x)
    return tuple(x[n - 1 - k] if k % 2 == 0 else -x[n - 1 - k] for k in range(n))


@dataclass
class DualCompoundReport:
    dual: Lattice
    via_compound: Lattice
    equal: bool


def dual_via_compound(L: Lattice, strict: bool = True) -> DualCompoundReport:
    """Compare d(L)^{-1} phi(L_{n-1}) with the dual lattice by canonical form."""
    n = L.dim
    d = L.determinant()
    if n == 1:
        rows = [[1 / d]]
    else:
        Lc = compound_lattice(L, n - 1)
        rows = [[v / d for v in phi(r)] for r in Lc.basis]
    V = Lattice(rows)
    D = dual_lattice(L)
    eq = canonical_form(V) == canonical_form(D)
    if strict and not eq:
        raise InvariantViolation("dual lattice differs from the rescaled compound")
    return DualCompoundReport(canonical_form(D), canonical_form(V), eq)


@dataclass
class DavenportResult:
    sigma: tuple
    parallelepiped: Parallelepiped
    lambdas: list
    new_lambdas: list
    max_log_ratio: object
    all_scores: dict = field(default_factory=dict)


def _validate_rho(rho, lam, rel_tol=1e-12):
    N = len(rho)
    if any(nm.to_mpf(r) <= 0 for r in rho):
        raise InvalidRho("rho entries must be positive")
    for i in range(N - 1):
        if nm.to_mpf(rho[i]) < nm.to_mpf(rho[i + 1]) * (1 - rel_tol):
            raise InvalidRho(f"rho must be nonincreasing (rho_{i + 1} < rho_{i + 2})")
    scaled = [nm.to_mpf(r) * nm.to_mpf(l) for r, l in zip(rho, lam)]
    for i in range(N - 1):
        if scaled[i] > scaled[i + 1] * (1 + rel_tol):
            raise InvalidRho(f"rho_i lambda_i must be nondecreasing (fails at i={i + 1})")
    prod = mpf(1)
    for r in rho:
        prod *= nm.to_mpf(r)
    if abs(prod - 1) > rel_tol * N:
        raise InvalidRho(f"product of rho is {prod}, not 1")


def davenport_rescale_search(Phat, Lp: Lattice, rho: Sequence,
                             minima: MinimaResult | None = None) -> DavenportResult:
    """Permutation sigma making lambda_i(B-hat, L_p) closest to rho_i lambda_i(A-hat, L_p),
    with B-hat_i = A-hat_i / rho_{sigma(i)}; exhaustive over all sigma."""
    gauge = Phat.gauge if isinstance(Phat, Pseudocompound) else as_parallelepiped(Phat)
    N = gauge.dim
    if N > MAX_PERMUTATION_N:
        raise SearchSpaceTooLarge(f"N={N} exceeds the exhaustive limit {MAX_PERMUTATION_N}")
    if len(rho) != N:
        raise DimensionMismatch("rho must have N entries")
    rho = nm.unify(rho)
    lam = (minima or successive_minima(Lp, gauge)).lambdas
    _validate_rho(rho, lam)
    targets = [nm.to_mpf(r) * nm.to_mpf(l) for r, l in zip(rho, lam)]
    best = None
    scores = {}
    for sigma in itertools.permutations(range(N)):
        bounds = [nm.promote(b, rho[s])[0] / nm.promote(b, rho[s])[1]
                  for b, s in zip(gauge.bounds, sigma)]
        P = Parallelepiped(gauge.rows, bounds)
        new = successive_minima(Lp, P).lambdas
        score = max(abs(mpmath.log(nm.to_mpf(a) / t)) for a, t in zip(new, targets))
        key = tuple(s + 1 for s in sigma)
        scores[key] = score
        if best is None or score < best[0]:
            best = (score, key, P, new)
    score, key, P, new = best
    return DavenportResult(key, P, lam, new, score, scores)


def davenport_standard_rho(lam: Sequence) -> list:
    """rho_i = c / lambda_i (i < N), rho_N = c / lambda_{N-1} with prod rho = 1."""
    N = len(lam)
    lam = [nm.to_mpf(v) for v in lam]
    prod = mpf(1)
    for v in lam:
        prod *= v
    c = (prod * lam[N - 2] / lam[N - 1]) ** (mpf(1) / N)
    return [c / lam[i] for i in range(N - 1)] + [c / lam[N - 2]], c
