"""Star bodies: admissibility certificates, number-field lattices, a 2-D
critical-determinant search, boundary witnesses and the three-variable
product-approximation solver."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mpf
from scipy.optimize import minimize

from . import numeric as nm
from .bodies import EuclideanNorm, Gauge, outer_inner_radii, volume
from .errors import DimensionMismatch
from .lattice import DEFAULT_BUDGET, Enumerator, Lattice, canonical_sign, tie_key
from .rng import stream

SCREEN_SLACK = 1e-6


@dataclass
class AdmissibilityCertificate:
    lattice: Lattice
    gauge: Gauge
    R: object
    admissible: bool
    margin: object
    witness: tuple | None
    complete: bool
    points_checked: int
    eps: float

    @property
    def verdict(self) -> str:
        if not self.admissible:
            return "violated"
        return "admissible" if self.complete else "admissible-in-region"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "R": nm.format_scalar(self.R),
                "margin": nm.format_scalar(self.margin),
                "witness": None if self.witness is None else [nm.format_scalar(v) for v in self.witness],
                "complete": self.complete, "points_checked": self.points_checked,
                "gauge": self.gauge.to_dict(), "lattice": self.lattice.to_dict()}


def _screen(L: Lattice, F: Gauge, R, budget: int):
    """Nonzero points with ||x|| <= R (one per +- pair): float gauge values,
    then an exact/mpf recheck of everything near the float minimum."""
    en = Enumerator.for_lattice(L)
    Z = en.coefficients(nm.to_float(R), budget)
    if len(Z) == 0:
        return en, Z, np.zeros(0), []
    X = en.float_points(Z)
    keep = np.einsum("ij,ij->i", X, X) <= nm.to_float(R) ** 2 * (1 + 1e-9)
    Z, X = Z[keep], X[keep]
    vals = F.eval_many(X)
    return en, Z, vals, X


def admissibility_check(L: Lattice, F: Gauge, R, eps: float = 1e-9,
                        budget: int = DEFAULT_BUDGET) -> AdmissibilityCertificate:
    """Is any nonzero lattice point with ||x|| <= R inside {F < 1 - eps}?

    The margin is the least gauge value over those points.  For bounded bodies
    with R at least the outer radius the certificate covers the whole body;
    otherwise it is explicitly region-restricted.
    """
    if L.dim != F.dim:
        raise DimensionMismatch("lattice and gauge dimensions differ")
    R = nm.to_number(R)
    if R <= 0:
        raise ValueError("R must be positive")
    en, Z, vals, _ = _screen(L, F, R, budget)
    if len(Z) == 0:
        return AdmissibilityCertificate(L, F, R, True, mpf("inf"), None,
                                        F.bounded and R >= outer_inner_radii(F)[1], 0, eps)
    fmin = float(np.min(vals))
    near = np.nonzero(vals <= fmin + SCREEN_SLACK * max(1.0, fmin))[0]
    best = None
    for idx in near:
        x = canonical_sign(en.combine(Z[idx]))
        v = nm.to_mpf(F(x))
        key = (v, nm.to_mpf(nm.dot(x, x)), tie_key(x))
        if best is None or key < best[0]:
            best = (key, x)
    (margin, _, _), wit = best
    complete = bool(F.bounded and nm.to_mpf(R) >= outer_inner_radii(F)[1])
    ok = margin >= 1 - eps
    return AdmissibilityCertificate(L, F, R, ok, margin, None if ok else wit, complete, len(Z), eps)


def numberfield_lattice(conjugates: Sequence[Sequence]) -> Lattice:
    """Lattice {(alpha^(1), ..., alpha^(n)) : alpha in O_K}.

    Row k of ``conjugates`` holds the k-th real embedding of the integral basis,
    so each basis element contributes the corresponding column.
    """
    rows = [[nm.parse_real(v) if isinstance(v, str) else v for v in r] for r in conjugates]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimensionMismatch("conjugate matrix must be square")
    return Lattice(nm.transpose(rows))


def load_numberfield(path) -> tuple[Lattice, dict]:
    data = json.loads(Path(path).read_text())
    with nm.precision(int(data.get("precision_bits", nm.MIN_PREC))):
        L = numberfield_lattice(data["conjugates"])
    return L, data


# ------------------------------------------------------------ 2-D search

def _gauss_reduce(b1, b2):
    while True:
        if b2 @ b2 < b1 @ b1:
            b1, b2 = b2, b1
        mu = round(float(b1 @ b2) / float(b1 @ b1))
        if mu == 0:
            return b1, b2
        b2 = b2 - mu * b1


def _basis(params, rotate: bool):
    u, v = params[0], params[1]
    th = params[2] if rotate else 0.0
    c, s = math.cos(th), math.sin(th)
    return np.array([[c, s], [u * c - v * s, u * s + v * c]])


def fast_lambda1(F: Gauge, B: np.ndarray, R_out: float) -> float:
    """min F over nonzero points of the 2-D lattice with basis rows B (float)."""
    b1, b2 = _gauss_reduce(B[0].astype(float), B[1].astype(float))
    cand = np.array([b1, b2, b1 + b2, b1 - b2])
    t = float(np.min(F.eval_many(cand)))
    rho = t * R_out * (1 + 1e-9)
    det = abs(b1[0] * b2[1] - b1[1] * b2[0])
    h2 = det / math.sqrt(b1 @ b1)
    k2 = int(rho / h2) + 1
    k1 = int((rho + k2 * math.sqrt(b2 @ b2)) / math.sqrt(b1 @ b1)) + 1
    if (2 * k1 + 1) * (k2 + 1) > 200000:
        return t
    a1 = np.arange(-k1, k1 + 1)
    a2 = np.arange(0, k2 + 1)
    A1, A2 = np.meshgrid(a1, a2, indexing="ij")
    A1, A2 = A1.ravel(), A2.ravel()
    mask = (A2 > 0) | (A1 > 0)
    X = np.outer(A1[mask], b1) + np.outer(A2[mask], b2)
    return float(min(t, np.min(F.eval_many(X))))


@dataclass
class SearchResult:
    lattice: Lattice
    delta: object
    params: tuple
    certificate: AdmissibilityCertificate
    witnesses: list
    trace: list = field(default_factory=list)
    converged: bool = True

    def to_dict(self) -> dict:
        return {"delta": nm.format_scalar(self.delta), "params": [repr(float(p)) for p in self.params],
                "lattice": self.lattice.to_dict(), "certificate": self.certificate.to_dict(),
                "witnesses": [[nm.format_scalar(v) for v in w] for w in self.witnesses],
                "converged": self.converged,
                "trace": [[r, repr(float(f))] for r, f in self.trace]}


def _objective(F, R_out, rotate):
    def f(p):
        u, v = p[0], p[1]
        if v <= 1e-9 or abs(u) > 0.5 + 1e-12:
            return math.inf
        lam = fast_lambda1(F, _basis(p, rotate), R_out)
        if lam <= 0:
            return math.inf
        return v / (lam * lam)
    return f


def delta_search_2d(F: Gauge, restarts: int = 32, steps: int = 10 ** 4, cooling: float = 0.995,
                    seed: int = 0, tol: float = 1e-6, budget: int = DEFAULT_BUDGET,
                    rotate: bool | None = None) -> SearchResult:
    """Smallest determinant of an F-admissible 2-D lattice, by annealing.

    Lattices are normalized to basis (1, 0), (u, v) (rotated by theta unless the
    body is rotation invariant) and scored by v / lambda_1^2, the determinant
    after scaling so that the first minimum equals 1.  The best annealed point is
    polished with Nelder-Mead and then certified exactly.
    """
    if F.dim != 2:
        raise DimensionMismatch("delta_search_2d works in dimension 2")
    if not F.bounded:
        raise ValueError("the body must be bounded")
    if rotate is None:
        rotate = not isinstance(F, EuclideanNorm)
    R_out = float(outer_inner_radii(F)[1])
    f = _objective(F, R_out, rotate)
    trace = []
    best_p, best_f = None, math.inf
    for r in range(restarts):
        g = stream(seed, "anneal", r)
        p = np.array([g.uniform(0, 0.5), g.uniform(0.3, 2.0)] + ([g.uniform(0, math.pi)] if rotate else []))
        fp = f(p)
        T = 0.1 * fp
        bp, bf = p.copy(), fp
        scale = np.array([0.1, 0.1] + ([0.1] if rotate else []))
        for _ in range(steps):
            temp_ratio = T / (0.1 * bf) if bf > 0 else 1.0
            q = p + g.normal(size=p.size) * scale * max(temp_ratio, 1e-4) ** 0.5
            q[0] = q[0] - round(q[0])
            if rotate:
                q[2] = q[2] % math.pi
            fq = f(q)
            if fq < fp or (math.isfinite(fq) and g.random() < math.exp(-(fq - fp) / max(T, 1e-300))):
                p, fp = q, fq
                if fp < bf:
                    bp, bf = p.copy(), fp
            T *= cooling
        trace.append((r, bf))
        if bf < best_f:
            best_p, best_f = bp, bf
    res = minimize(f, best_p, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000, "maxfev": 40000})
    converged = bool(res.success)
    p = res.x if res.fun <= best_f else best_p
    with nm.precision(nm.MIN_PREC):
        B = [[nm.to_mpf(float(v)) for v in row] for row in _basis(p, rotate)]
        L0 = Lattice(B)
        cert0 = admissibility_check(L0, F, mpf(R_out) * 4, budget=budget)
        lam = cert0.margin
        L = L0.scaled(1 / lam)
        cert = admissibility_check(L, F, mpf(R_out) * (1 + mpf(10) ** -9), budget=budget)
        wits = boundary_witnesses(L, F, tol, budget=budget)
    if not cert.admissible:
        converged = False
    return SearchResult(L, L.determinant(), tuple(float(v) for v in p), cert, wits, trace, converged)


def boundary_witnesses(L: Lattice, F: Gauge, tol=1e-6, budget: int = DEFAULT_BUDGET) -> list[tuple]:
    """A maximal independent set of lattice points with |F(x) - 1| <= tol."""
    if not F.bounded:
        raise ValueError("boundary witnesses need a bounded body")
    R = outer_inner_radii(F)[1] * (1 + nm.to_mpf(tol))
    en, Z, vals, _ = _screen(L, F, R, budget)
    if len(Z) == 0:
        return []
    tolf = float(tol)
    near = np.nonzero(np.abs(vals - 1) <= tolf + SCREEN_SLACK)[0]
    shell = []
    for idx in near:
        x = canonical_sign(en.combine(Z[idx]))
        dist = abs(nm.to_mpf(F(x)) - 1)
        if dist <= tolf:
            shell.append((dist, nm.to_mpf(nm.dot(x, x)), x, en.input_coefficients(Z[idx])))
    shell.sort(key=lambda t: (t[0], t[1], tie_key(t[2])))
    tracker = nm.IndependenceTracker(L.dim)
    return [x for _, _, x, z in shell if tracker.add(z)]


# ---------------------------------------------------- product approximation

@dataclass
class ProductApproxResult:
    v: tuple
    residual: object
    product: object
    gamma: object
    success: bool


def product_approx_solver(beta1, beta2, Q) -> ProductApproxResult:
    """Nonzero (v1, v2, v3) with |v1|, |v2| <= Q, |v1 v2 r| <= 1/7 and the
    residual r = |beta1 v1 + beta2 v2 + v3| as small as possible.

    v3 is the integer nearest to -(beta1 v1 + beta2 v2).  Ties on r prefer
    v1 v2 != 0, then smaller max(|v1|, |v2|), then nonnegative entries.  The
    achieved gamma is r Q^2.
    """
    Q = nm.to_number(Q)
    if Q <= 1:
        raise ValueError("Q must exceed 1")
    b1, b2 = (nm.parse_real(b) if isinstance(b, str) else nm.to_number(b) for b in (beta1, beta2))
    K = int(math.floor(nm.to_float(Q)))
    a = np.arange(-K, K + 1)
    V1, V2 = np.meshgrid(a, a, indexing="ij")
    V1, V2 = V1.ravel(), V2.ravel()
    s = nm.to_float(b1) * V1 + nm.to_float(b2) * V2
    r = np.abs(s - np.rint(s))
    prod = np.abs(V1 * V2) * r
    ok = (prod <= 1 / 7 + 1e-9) & ((V1 != 0) | (V2 != 0))
    order = np.argsort(np.where(ok, r, np.inf), kind="stable")
    rmin = r[order[0]]
    cands = [i for i in order[:4096] if ok[i] and r[i] <= rmin + 1e-9]
    seventh = Fraction(1, 7)
    best = None
    for i in cands:
        v1, v2 = int(V1[i]), int(V2[i])
        t = b1 * v1 + b2 * v2
        v3 = -nm.nint(t)
        res = nm.absval(t + v3)
        pr = abs(v1 * v2) * res
        if not nm.less_equal(pr, seventh):
            continue
        key = (nm.to_mpf(res), v1 * v2 == 0, max(abs(v1), abs(v2)), v1 < 0, v2 < 0, v3 < 0)
        if best is None or key < best[0]:
            best = (key, (v1, v2, v3), res, pr)
    if best is None:
        return ProductApproxResult((0, 0, 0), None, None, None, False)
    _, v, res, pr = best
    a_, b_ = nm.promote(res, Q * Q)
    return ProductApproxResult(v, res, pr, a_ * b_, True)


# name used by the published interface
theorem13_solver = product_approx_solver


def proof_lattice(beta1, beta2, Q, r) -> Lattice:
    """Lattice of (r v1 / Q, r v2 / Q, 7 Q^2 (beta1 v1 + beta2 v2 + v3) / r^2); determinant 7."""
    b1, b2, Q, r = (nm.to_number(x) for x in (beta1, beta2, Q, r))
    c = 7 * Q * Q / (r * r)
    rows = [[r / Q, 0, c * b1], [0, r / Q, c * b2], [0, 0, c]]
    return Lattice(rows)


@dataclass
class HlawkaReport:
    volume: object
    reference: object
    delta_estimate: object
    convex_lower: object
    delta_below_reference: bool


def minkowski_hlawka_report(F: Gauge, delta_estimate) -> HlawkaReport:
    """(2 zeta(n))^{-1} V(S) beside the estimate and V / 2^n for convex bodies;
    only the observed direction is reported."""
    n = F.dim
    V = nm.to_mpf(volume(F))
    ref = V / (2 * mpmath.zeta(n))
    low = V / 2 ** n if F.convex else None
    d = nm.to_mpf(delta_estimate)
    return HlawkaReport(V, ref, d, low, bool(d < ref))
