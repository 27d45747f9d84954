"""Parametric geometry of numbers: successive minima of the weighted boxes
C(q) = {|x_i| <= e^{mu_i q}} as functions of q, the compound-based
functions P_i(q), and diagnostics comparing the two."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mpf

from . import numeric as nm
from .bodies import WeightedBox
from .compound import compound_lattice, weighted_box_compound
from .errors import ConfigError, EnumerationBudget
from .lattice import DEFAULT_BUDGET, Lattice
from .minima import first_minimum, successive_minima

MU_TOL = 1e-12


def weighted_box(mu: Sequence, q) -> WeightedBox:
    """C(q); the weights must sum to zero so that V(C(q)) = 2^n."""
    mu = tuple(nm.parse_real(m) if isinstance(m, str) else nm.to_number(m) for m in mu)
    if abs(sum(nm.to_mpf(m) for m in mu)) > MU_TOL:
        raise ConfigError("weights mu must sum to zero")
    q = nm.to_number(q)
    if q <= 0:
        raise ValueError("q must be positive")
    return WeightedBox(mu, q)


def ss_lattice(xi: Sequence) -> Lattice:
    """{(x, xi_1 x - y_1, ..., xi_{n-1} x - y_{n-1})}, basis x = 1 and y = e_i."""
    xi = [nm.parse_real(v) if isinstance(v, str) else nm.to_number(v) for v in xi]
    n = len(xi) + 1
    first = [Fraction(1)] + list(xi)
    rows = [first] + [[Fraction(0)] * (i + 1) + [Fraction(-1)] + [Fraction(0)] * (n - i - 2)
                      for i in range(n - 1)]
    return Lattice(rows)


@dataclass
class PGNConfig:
    """Profile recipe.  ``xi`` (reals as strings/expressions) or ``basis`` defines
    the lattice; entries are re-evaluated at each grid point's precision."""

    mu: tuple
    start: Fraction
    stop: Fraction
    step: Fraction
    xi: tuple | None = None
    basis: tuple | None = None
    budget: int = DEFAULT_BUDGET
    crossing_tol: Fraction = Fraction(1, 10)

    def __post_init__(self):
        self.mu = tuple(nm.to_number(m) for m in self.mu)
        self.start, self.stop, self.step = (nm.to_number(v) for v in (self.start, self.stop, self.step))
        if (self.xi is None) == (self.basis is None):
            raise ConfigError("give exactly one of xi or basis")
        if self.step <= 0:
            raise ConfigError("grid step must be positive")
        if self.stop < self.start or self.start <= 0:
            raise ConfigError("grid must satisfy 0 < start <= stop")
        n = len(self.xi) + 1 if self.xi is not None else len(self.basis)
        if len(self.mu) != n:
            raise ConfigError(f"mu has {len(self.mu)} entries, lattice dimension is {n}")
        s = sum((nm.to_mpf(m) for m in self.mu), mpf(0))
        if abs(s) > MU_TOL:
            raise ConfigError("weights mu must sum to zero")

    @property
    def n(self) -> int:
        return len(self.mu)

    def grid(self) -> list:
        out, k = [], 0
        while True:
            q = self.start + k * self.step
            if q > self.stop:
                return out
            out.append(q)
            k += 1

    def precision_for(self, q) -> int:
        m = max(abs(nm.to_float(v)) for v in self.mu)
        return nm.MIN_PREC + 32 + int(math.ceil(2 * m * nm.to_float(q) * math.log2(math.e)))

    def lattice(self) -> Lattice:
        """Lattice at the current working precision."""
        if self.xi is not None:
            return ss_lattice(self.xi)
        return Lattice([[nm.parse_real(v) if isinstance(v, str) else v for v in r]
                        for r in self.basis])

    def to_dict(self) -> dict:
        d = {"mu": [str(m) for m in self.mu],
             "grid": {"start": str(self.start), "stop": str(self.stop), "step": str(self.step)},
             "budget": self.budget, "crossing_tol": str(self.crossing_tol)}
        if self.xi is not None:
            d["xi"] = [str(v) for v in self.xi]
        else:
            d["basis"] = [[str(v) for v in r] for r in self.basis]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PGNConfig":
        try:
            g = d["grid"]
            return cls(mu=tuple(d["mu"]), start=g["start"], stop=g["stop"], step=g["step"],
                       xi=tuple(d["xi"]) if "xi" in d else None,
                       basis=tuple(tuple(r) for r in d["basis"]) if "basis" in d else None,
                       budget=int(d.get("budget", DEFAULT_BUDGET)),
                       crossing_tol=nm.to_number(d.get("crossing_tol", "1/10")))
        except KeyError as exc:
            raise ConfigError(f"pgn config is missing field {exc.args[0]!r}") from None


@dataclass
class GridPoint:
    q: Fraction
    L: list
    M: list
    witnesses: list


def _log(v):
    return mpmath.log(nm.to_mpf(v))


def profile_point(cfg: PGNConfig, q) -> GridPoint:
    """L_i(q) and M_p(q) at one grid point, at the precision the point needs."""
    with nm.precision(cfg.precision_for(q)):
        L = cfg.lattice()
        box = WeightedBox(cfg.mu, q)
        res = successive_minima(L, box, cfg.budget)
        Ls = [_log(v) for v in res.lambdas]
        M = [Fraction(0)]
        for p in range(1, cfg.n):
            if p == 1:
                m = Ls[0]
            else:
                lam, _ = first_minimum(compound_lattice(L, p), weighted_box_compound(box, p),
                                       cfg.budget)
                m = _log(lam)
            M.append(nm.mpf_to_fraction(m))
        M.append(Fraction(0))
        Ls = [+v for v in Ls]
    return GridPoint(q, Ls, M, [list(c) for c in res.coefficients])


def _point_worker(args):
    cfg_dict, q = args
    return profile_point(PGNConfig.from_dict(cfg_dict), q)


@dataclass
class PGNProfile:
    n: int
    mu: tuple
    q: list = field(default_factory=list)
    L: list = field(default_factory=list)
    M: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    truncated: bool = False
    truncated_at: object = None

    @property
    def P(self) -> list:
        """P_i = M_i - M_{i-1}, exact differences of the stored M values."""
        return [[M[i] - M[i - 1] for i in range(1, self.n + 1)] for M in self.M]

    def _half(self):
        return len(self.q) // 2

    def exponents(self) -> tuple[list, list]:
        """(lower, upper) estimates: min and max of L_i(q)/q over the trailing half."""
        if not self.q:
            return [None] * self.n, [None] * self.n
        h = self._half()
        lo, hi = [], []
        for i in range(self.n):
            vals = [self.L[k][i] / nm.to_mpf(self.q[k]) for k in range(h, len(self.q))]
            lo.append(min(vals))
            hi.append(max(vals))
        return lo, hi


def pgn_profile(cfg: PGNConfig, workers: int = 1) -> PGNProfile:
    """Profile over the configured grid; stops at the first grid point whose
    enumeration exceeds the budget and flags the profile as truncated."""
    prof = PGNProfile(cfg.n, cfg.mu)
    grid = cfg.grid()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            points = ex.map(_point_worker, [(cfg.to_dict(), q) for q in grid])
            results = []
            try:
                for pt in points:
                    results.append(pt)
            except EnumerationBudget:
                prof.truncated = True
                prof.truncated_at = grid[len(results)]
    else:
        results = []
        for q in grid:
            try:
                results.append(profile_point(cfg, q))
            except EnumerationBudget:
                prof.truncated = True
                prof.truncated_at = q
                break
    for pt in results:
        prof.q.append(pt.q)
        prof.L.append(pt.L)
        prof.M.append(pt.M)
        prof.witnesses.append(pt.witnesses)
    return prof


@dataclass
class Diagnostics:
    crossings: list
    crossing_count: list
    gap: object
    gap_first_half: object
    gap_second_half: object
    gap_bounded: bool
    lipschitz_ok: bool
    minkowski_ok: bool
    p_sum_zero: bool
    inequalities: dict
    exponents: tuple


def ss_diagnostics(prof: PGNProfile, tol=Fraction(1, 10)) -> Diagnostics:
    """Near-crossings of consecutive L_i, the L-P gap statistic and finite-q
    checks of the exponent inequalities (flags only, never fatal)."""
    n = prof.n
    tol = nm.to_mpf(nm.to_number(tol))
    crossings, counts = [], []
    for i in range(n - 1):
        cnt, run = 0, None
        for k, q in enumerate(prof.q):
            near = abs(prof.L[k][i + 1] - prof.L[k][i]) <= tol
            if near and run is None:
                run = q
            if not near and run is not None:
                crossings.append((i + 1, run, prof.q[k - 1]))
                cnt += 1
                run = None
        if run is not None:
            crossings.append((i + 1, run, prof.q[-1]))
            cnt += 1
        counts.append(cnt)

    P = prof.P
    gaps = [max(abs(prof.L[k][i] - nm.to_mpf(P[k][i])) for i in range(n))
            for k in range(len(prof.q))]
    h = len(gaps) // 2
    gap = max(gaps) if gaps else None
    g1 = max(gaps[:h]) if h else None
    g2 = max(gaps[h:]) if gaps[h:] else None
    bounded = g1 is not None and g2 is not None and g2 <= 2 * g1

    m = max(abs(nm.to_mpf(v)) for v in prof.mu)
    lip = True
    for k in range(1, len(prof.q)):
        dq = nm.to_mpf(prof.q[k] - prof.q[k - 1])
        if abs(prof.L[k][0] - prof.L[k - 1][0]) > 2 * m * dq * (1 + mpf(10) ** -20):
            lip = False
    logfact = mpmath.log(math.factorial(n))
    mink = all(-logfact - mpf(10) ** -20 <= sum(row) <= mpf(10) ** -20 for row in prof.L)
    psum = all(sum(row) == 0 for row in P)

    lo, hi = prof.exponents()
    ineq = {}
    if prof.q:
        l1, hn, h1, ln = lo[0], hi[n - 1], hi[0], lo[n - 1]
        ineq["minkowski_lower"] = bool((n - 1) * l1 + hn <= 0)
        ineq["minkowski_upper"] = bool((n - 1) * hn + l1 >= 0)
        ineq["refined_lower"] = bool((n - 1) * l1 + hn <= h1 * (n - l1 + hn))
        ineq["refined_upper"] = bool((n - 1) * hn + l1 >= ln * (n - hn + l1))
    return Diagnostics(crossings, counts, gap, g1, g2, bounded, lip, mink, psum, ineq, (lo, hi))
