"""Experiment recipes driven by JSON configurations.

Each runner takes a validated config dict and returns an ``Outcome``: a CSV
table, a JSON report, named boolean checks and, for profiles, the profile to
plot.  Random instances come from counter-based streams keyed by
(seed, kind, index), so results do not depend on worker scheduling.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
from mpmath import mpf

from . import numeric as nm
from .bodies import (EuclideanNorm, MaxNorm, NormForm, Parallelepiped, SumNorm, gauge_from_dict,
                     mahler_volume, monte_carlo_volume, polar_body, volume)
from .compound import compound_lattice, compound_minima_check, dual_via_compound, wedge
from .errors import ConfigError
from .lattice import DEFAULT_BUDGET, Lattice, dual_lattice, same_lattice
from .minima import dyson_transfer_step, mahler_transference_check, minkowski_check, successive_minima
from .parametric import PGNConfig, pgn_profile, ss_diagnostics
from .rng import stream
from .star import admissibility_check, delta_search_2d, load_numberfield, product_approx_solver

STOCHASTIC = {"minima", "transference", "dual", "compound", "volume", "pgn_gap", "dyson",
              "product_approx"}

REQUIRED = {
    "minima": ("dims", "count"),
    "transference": ("dims", "count"),
    "dual": ("dims", "count"),
    "compound": ("mode", "dims", "count"),
    "volume": ("dims", "count"),
    "pgn": ("mu", "grid"),
    "pgn_gap": ("count", "grids"),
    "starbody": ("mode",),
    "dyson": ("count",),
    "product_approx": ("count", "Q"),
}


@dataclass
class Outcome:
    summary: str
    header: list
    rows: list
    report: dict
    checks: dict = field(default_factory=dict)
    profile: object = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


# ------------------------------------------------------------ validation

def _missing(name: str, where: str = "config"):
    return ConfigError(f"{where} is missing required field {name!r}")


def validate(cfg: dict) -> dict:
    """Check kind-specific required fields; returns the config unchanged."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "kind" not in cfg:
        raise _missing("kind")
    kind = cfg["kind"]
    if kind not in REQUIRED:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {sorted(REQUIRED)}")
    for name in REQUIRED[kind]:
        if name not in cfg:
            raise _missing(name)
    stochastic = kind in STOCHASTIC or (kind == "starbody" and cfg.get("mode") == "search")
    if stochastic and "seed" not in cfg:
        raise _missing("seed")
    if "seed" in cfg and (not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool)):
        raise ConfigError("seed must be an integer")
    if kind == "pgn":
        PGNConfig.from_dict(cfg)
    if kind == "compound" and cfg["mode"] not in ("determinant", "minima"):
        raise ConfigError("compound mode must be 'determinant' or 'minima'")
    if kind == "starbody":
        mode = cfg["mode"]
        need = {"search": ("gauge",), "numberfield": ("field", "R")}.get(mode)
        if need is None:
            raise ConfigError("starbody mode must be 'search' or 'numberfield'")
        for name in need:
            if name not in cfg:
                raise _missing(name)
    if kind == "pgn_gap":
        for d, g in cfg["grids"].items():
            for name in ("start", "stop", "step"):
                if name not in g:
                    raise _missing(name, f"grids[{d}]")
    if "outputs" in cfg and not isinstance(cfg["outputs"], dict):
        raise ConfigError("outputs must map csv/json/svg to paths")
    return cfg


# ------------------------------------------------------------ helpers

def threads(cfg: dict) -> int:
    env = os.environ.get("GON_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"GON_THREADS must be an integer, got {env!r}") from None
    return max(1, int(cfg.get("threads", 1)))


def _pmap(fn, items: list, workers: int) -> list:
    """Order-preserving map, in worker processes when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _instances(cfg: dict) -> list[tuple[int, int]]:
    return [(int(n), i) for n in cfg["dims"] for i in range(int(cfg["count"]))]


def random_integer_lattice(g: np.random.Generator, n: int, bound: int = 4) -> Lattice:
    """Nonsingular integer basis with entries in [-bound, bound]."""
    while True:
        M = g.integers(-bound, bound + 1, size=(n, n))
        rows = [[Fraction(int(v)) for v in r] for r in M]
        if nm.det(rows) != 0:
            return Lattice(rows)


def random_parallelepiped(g: np.random.Generator, n: int, bound: int = 2) -> Parallelepiped:
    """Integer rows in [-bound, bound], rational bounds in [1/2, 4]."""
    while True:
        M = g.integers(-bound, bound + 1, size=(n, n))
        rows = [[Fraction(int(v)) for v in r] for r in M]
        if nm.det(rows) != 0:
            break
    bounds = [Fraction(int(g.integers(1, 9)), 2) for _ in range(n)]
    return Parallelepiped(rows, bounds)


def random_pair(seed: int, n: int, index: int) -> tuple[Lattice, Parallelepiped]:
    """Shared instance set for the minima and transference recipes."""
    g = stream(seed, f"pair-{n}", index)
    return random_integer_lattice(g, n, 3), random_parallelepiped(g, n)


def _budget(cfg: dict) -> int:
    return int(cfg.get("budget", DEFAULT_BUDGET))


# ------------------------------------------------------------ minima

def _minima_worker(args):
    seed, n, i, budget = args
    L, P = random_pair(seed, n, i)
    res = successive_minima(L, P, budget)
    rep = minkowski_check(L, P, strict=False, minima=res)
    return n, i, rep


def run_minima(cfg: dict) -> Outcome:
    seed, budget = cfg["seed"], _budget(cfg)
    items = [(seed, n, i, budget) for n, i in _instances(cfg)]
    results = _pmap(_minima_worker, items, threads(cfg))
    rows = [[n, i, "random", rep.t, rep.lower, rep.upper, rep.holds] for n, i, rep in results]
    equality = {}
    if cfg.get("equality_cases", True):
        for n in cfg["dims"]:
            n = int(n)
            Z = Lattice.identity(n)
            for name, F, want in (("cube", MaxNorm.unit(n), Fraction(2 ** n)),
                                  ("cross", SumNorm(n), Fraction(2 ** n, math.factorial(n)))):
                rep = minkowski_check(Z, F, strict=False)
                hit = rep.t == want
                equality[f"{name}-{n}"] = hit
                rows.append([n, -1, name, rep.t, rep.lower, rep.upper, rep.holds and hit])
    checks = {"minkowski_bounds": all(r[-1] for r in rows if r[2] == "random"),
              "equality_cases": all(equality.values())}
    report = {"kind": "minima", "instances": len(results), "equality": equality,
              "violations": [[r[0], r[1]] for r in rows if not r[-1]]}
    return Outcome(f"minima: {len(results)} random pairs, {len(equality)} equality cases",
                   ["n", "instance", "case", "t", "lower", "upper", "holds"], rows, report, checks)


def _transfer_worker(args):
    seed, n, i = args
    L, P = random_pair(seed, n, i)
    return n, i, mahler_transference_check(L, P, strict=False)


def run_transference(cfg: dict) -> Outcome:
    seed = cfg["seed"]
    results = _pmap(_transfer_worker, [(seed, n, i) for n, i in _instances(cfg)], threads(cfg))
    rows, worst = [], {}
    for n, i, rep in results:
        for k, (lam, dl, p, lo, up) in enumerate(zip(rep.lambdas, reversed(rep.dual_lambdas),
                                                      rep.products, rep.lower_ok, rep.upper_ok)):
            rows.append([n, i, k + 1, lam, dl, p, lo and up])
        top = max(nm.to_mpf(p) for p in rep.products)
        worst[str(n)] = max(worst.get(str(n), mpf(0)), top)
    checks = {"transference_bounds": all(r[-1] for r in rows)}
    report = {"kind": "transference", "instances": len(results), "max_product": worst,
              "upper": {str(n): math.factorial(int(n)) ** 2 for n in cfg["dims"]}}
    return Outcome(f"transference: {len(results)} pairs, {len(rows)} products",
                   ["n", "instance", "i", "lambda_i", "dual_lambda_n+1-i", "product", "holds"],
                   rows, report, checks)


# ------------------------------------------------------------ duality

def _dual_worker(args):
    seed, n, i, via = args
    L = random_integer_lattice(stream(seed, f"dual-{n}", i), n)
    D = dual_lattice(L)
    prod = L.determinant() * D.determinant()
    back = same_lattice(dual_lattice(D), L)
    comp = dual_via_compound(L, strict=False).equal if via else None
    return [n, i, L.determinant(), D.determinant(), prod == 1, back, comp]


def run_dual(cfg: dict) -> Outcome:
    seed, via = cfg["seed"], bool(cfg.get("via_compound", False))
    rows = _pmap(_dual_worker, [(seed, n, i, via) for n, i in _instances(cfg)], threads(cfg))
    checks = {"det_product_one": all(r[4] for r in rows), "double_dual": all(r[5] for r in rows)}
    if via:
        checks["dual_via_compound"] = all(r[6] for r in rows)
    report = {"kind": "dual", "instances": len(rows), "via_compound": via}
    return Outcome(f"dual: {len(rows)} lattices",
                   ["n", "instance", "det", "dual_det", "product_is_one", "double_dual",
                    "via_compound"], rows, report, checks)


# ------------------------------------------------------------ compound

def _stack_equivalent(L: Lattice, p: int, g: np.random.Generator) -> bool:
    """Wedges over a redundant generating set span the same lattice as the basis wedges."""
    n = L.dim
    gens = [list(r) for r in L.basis]
    for _ in range(2):
        c = [int(v) for v in g.integers(-2, 3, size=n)]
        gens.append([sum((c[k] * L.basis[k][j] for k in range(n)), Fraction(0)) for j in range(n)])
    stack = [wedge(*(gens[i] for i in idx)) for idx in itertools.combinations(range(len(gens)), p)]
    stack = [s for s in stack if any(s)]
    return same_lattice(Lattice.from_generators(stack), compound_lattice(L, p))


def _compound_det_worker(args):
    seed, n, i, stack = args
    g = stream(seed, f"compound-{n}", i)
    L = random_integer_lattice(g, n, 3)
    d = L.determinant()
    out = []
    for p in range(1, n):
        P = math.comb(n - 1, p - 1)
        dp = compound_lattice(L, p).determinant()
        eq = _stack_equivalent(L, p, g) if stack else None
        out.append([n, i, p, dp, d ** P, dp == d ** P, eq])
    return out


def _compound_minima_worker(args):
    seed, n, i = args
    g = stream(seed, f"cminima-{n}", i)
    L = random_integer_lattice(g, n, 3)
    P = random_parallelepiped(g, n)
    p = int(g.integers(1, n))
    rep = compound_minima_check(P, L, p, strict=False)
    return n, i, p, rep


def run_compound(cfg: dict) -> Outcome:
    seed = cfg["seed"]
    if cfg["mode"] == "determinant":
        stack_count = int(cfg.get("stack_count", 20))
        items = [(seed, n, i, k < stack_count)
                 for k, (n, i) in enumerate(_instances(cfg))]
        rows = [r for block in _pmap(_compound_det_worker, items, threads(cfg)) for r in block]
        stacked = {(r[0], r[1]) for r in rows if r[6] is not None}
        checks = {"determinant_power": all(r[5] for r in rows),
                  "generator_stack": all(r[6] for r in rows if r[6] is not None)}
        report = {"kind": "compound", "mode": "determinant", "cases": len(rows),
                  "stack_instances": len(stacked)}
        return Outcome(f"compound determinant: {len(rows)} (lattice, p) cases",
                       ["n", "instance", "p", "det_compound", "det_power", "equal", "stack_equal"],
                       rows, report, checks)

    results = _pmap(_compound_minima_worker, [(seed, n, i) for n, i in _instances(cfg)],
                    threads(cfg))
    rows, spread = [], []
    for n, i, p, rep in results:
        for k, (lam, mu, r) in enumerate(zip(rep.lambdas, rep.mu, rep.ratios)):
            rows.append([n, i, p, k + 1, lam, mu, r, rep.upper_ok, rep.lower_ok])
        spread.extend(nm.to_mpf(r) for r in rep.ratios)
    checks = {"upper_p_factorial": all(rep.upper_ok for *_, rep in results),
              "minkowski_lower": all(rep.lower_ok for *_, rep in results)}
    report = {"kind": "compound", "mode": "minima", "instances": len(results),
              "ratio_min": min(spread), "ratio_max": max(spread)}
    return Outcome(f"compound minima: {len(results)} instances, ratio spread "
                   f"[{nm.format_scalar(min(spread), 6)}, {nm.format_scalar(max(spread), 6)}]",
                   ["n", "instance", "p", "i", "lambda_i", "mu_i", "ratio", "upper_ok", "lower_ok"],
                   rows, report, checks)


# ------------------------------------------------------------ volume

def run_volume(cfg: dict) -> Outcome:
    seed = cfg["seed"]
    samples = int(cfg.get("mc_samples", 10 ** 6))
    mc_tol = float(cfg.get("mc_tol", 0.05))
    ball_tol = mpf(cfg.get("ball_tol", "1e-9"))
    rows, checks = [], {}
    par_ok, ball_ok, mc_ok = True, True, True
    for n, i in _instances(cfg):
        P = random_parallelepiped(stream(seed, f"volume-{n}", i), n)
        rep = mahler_volume(P)
        want = Fraction(4 ** n, math.factorial(n))
        ok = rep.product == want
        par_ok &= ok
        rows.append([n, i, "parallelepiped", rep.product, want, ok])
    for n in sorted({int(d) for d in cfg["dims"]}):
        rep = mahler_volume(EuclideanNorm(n))
        want = nm.kappa(n) ** 2
        ok = abs(nm.to_mpf(rep.product) / want - 1) <= ball_tol
        ball_ok &= ok
        rows.append([n, -1, "ball", rep.product, want, ok])
    for k, spec in enumerate(cfg.get("monte_carlo", [])):
        F = gauge_from_dict(spec)
        est, _ = monte_carlo_volume(F, samples, seed=seed * 1000 + 2 * k)
        est_p, _ = monte_carlo_volume(polar_body(F), samples, seed=seed * 1000 + 2 * k + 1)
        exact = nm.to_mpf(volume(F)) * nm.to_mpf(volume(polar_body(F)))
        ok = abs(est * est_p / float(exact) - 1) <= mc_tol
        mc_ok &= ok
        rows.append([F.dim, k, f"monte-carlo:{F.variant}", est * est_p, exact, ok])
    checks = {"parallelepiped_exact": par_ok, "ball_closed_form": ball_ok, "monte_carlo": mc_ok}
    report = {"kind": "volume", "cases": len(rows), "mc_samples": samples, "mc_tol": mc_tol}
    return Outcome(f"volume: {len(rows)} Mahler volume products",
                   ["n", "instance", "body", "product", "expected", "ok"], rows, report, checks)


# ------------------------------------------------------------ parametric

def _in_range(v, bounds) -> bool:
    lo, hi = (nm.to_mpf(nm.to_number(b)) for b in bounds)
    return lo <= nm.to_mpf(v) <= hi


def profile_rows(prof, diag) -> tuple[list, list]:
    n = prof.n
    header = (["q"] + [f"L_{i + 1}" for i in range(n)] + [f"P_{i + 1}" for i in range(n)]
              + [f"cross_{i + 1}" for i in range(n - 1)])
    P = prof.P
    rows = []
    for k, q in enumerate(prof.q):
        flags = [any(c[0] == i + 1 and c[1] <= q <= c[2] for c in diag.crossings)
                 for i in range(n - 1)]
        rows.append([q] + list(prof.L[k]) + [nm.to_mpf(v) for v in P[k]] + flags)
    return header, rows


def run_pgn(cfg: dict) -> Outcome:
    pc = PGNConfig.from_dict(cfg)
    prof = pgn_profile(pc, threads(cfg))
    diag = ss_diagnostics(prof, pc.crossing_tol)
    lo, hi = diag.exponents
    checks = {"sum_L_in_range": diag.minkowski_ok, "sum_P_zero": diag.p_sum_zero,
              "not_truncated": not prof.truncated}
    exp = cfg.get("expect", {})
    if "exponent_abs_max" in exp:
        cap = nm.to_mpf(nm.to_number(exp["exponent_abs_max"]))
        checks["exponents_small"] = all(abs(v) <= cap for v in lo + hi)
    if "min_crossings" in exp:
        checks["crossings"] = sum(diag.crossing_count) >= int(exp["min_crossings"])
    if "lower_exponent_1" in exp:
        checks["lower_exponent_1"] = _in_range(lo[0], exp["lower_exponent_1"])
    header, rows = profile_rows(prof, diag)
    report = {"kind": "pgn", "config": pc.to_dict(), "grid_points": len(prof.q),
              "truncated": prof.truncated, "truncated_at": prof.truncated_at,
              "lower_exponents": lo, "upper_exponents": hi,
              "crossing_count": diag.crossing_count,
              "crossings": [[i, a, b] for i, a, b in diag.crossings],
              "gap": diag.gap, "gap_first_half": diag.gap_first_half,
              "gap_second_half": diag.gap_second_half, "gap_bounded": diag.gap_bounded,
              "lipschitz_ok": diag.lipschitz_ok, "inequalities": diag.inequalities}
    summary = (f"pgn: n={prof.n}, {len(prof.q)} grid points, lower exponents "
               + ", ".join(nm.format_scalar(v, 5) for v in lo))
    return Outcome(summary, header, rows, report, checks, profile=prof)


SQUAREFREE = [k for k in range(2, 200) if all(k % (p * p) for p in range(2, 15))]


def random_xi(seed: int, n: int, index: int) -> tuple[str, ...]:
    """n - 1 irrationals sqrt(a) or cbrt(b) with squarefree radicands."""
    g = stream(seed, f"xi-{n}", index)
    out = []
    for _ in range(n - 1):
        a = SQUAREFREE[int(g.integers(0, len(SQUAREFREE)))]
        out.append(f"sqrt({a})" if g.random() < 0.5 else f"cbrt({a})")
    return tuple(out)


def _gap_worker(args):
    cfg_dict, xi = args
    prof = pgn_profile(PGNConfig.from_dict({**cfg_dict, "xi": list(xi)}))
    diag = ss_diagnostics(prof)
    return prof.truncated, diag


def run_pgn_gap(cfg: dict) -> Outcome:
    seed, count = cfg["seed"], int(cfg["count"])
    dims = sorted(int(d) for d in cfg["grids"])
    items, meta = [], []
    for k in range(count):
        n = dims[k % len(dims)]
        mu = [Fraction(n - 1)] + [Fraction(-1)] * (n - 1)
        grid = cfg["grids"][str(n)]
        xi = random_xi(seed, n, k)
        items.append(({"mu": [str(m) for m in mu], "grid": grid,
                       "budget": _budget(cfg)}, xi))
        meta.append((k, n, xi))
    results = _pmap(_gap_worker, items, threads(cfg))
    rows = []
    for (k, n, xi), (trunc, d) in zip(meta, results):
        finite = d.gap is not None and bool(mpmath.isfinite(d.gap))
        rows.append([k, n, " ".join(xi), d.gap, d.gap_first_half, d.gap_second_half,
                     finite, d.gap_bounded, not trunc])
    checks = {"gap_finite": all(r[6] for r in rows), "gap_bounded": all(r[7] for r in rows),
              "not_truncated": all(r[8] for r in rows)}
    report = {"kind": "pgn_gap", "instances": len(rows),
              "max_gap": max(nm.to_mpf(r[3]) for r in rows)}
    return Outcome(f"pgn_gap: {len(rows)} random xi", ["instance", "n", "xi", "gap",
                   "gap_first_half", "gap_second_half", "finite", "bounded", "complete"],
                   rows, report, checks)


# ------------------------------------------------------------ star bodies

def run_starbody(cfg: dict, base: Path) -> Outcome:
    exp = cfg.get("expect", {})
    if cfg["mode"] == "search":
        F = gauge_from_dict(cfg["gauge"])
        res = delta_search_2d(F, restarts=int(cfg.get("restarts", 32)),
                              steps=int(cfg.get("steps", 10 ** 4)),
                              cooling=float(cfg.get("cooling", 0.995)), seed=cfg["seed"],
                              tol=float(cfg.get("tol", 1e-6)), budget=_budget(cfg))
        checks = {"admissible": res.certificate.admissible}
        if "delta" in exp:
            checks["delta_in_range"] = _in_range(res.delta, exp["delta"])
        if "min_witnesses" in exp:
            checks["witnesses"] = len(res.witnesses) >= int(exp["min_witnesses"])
        rows = [[r, f] for r, f in res.trace]
        return Outcome(f"starbody search: delta={nm.format_scalar(res.delta, 10)}, "
                       f"{len(res.witnesses)} boundary witnesses", ["restart", "objective"],
                       rows, {"kind": "starbody", "mode": "search", **res.to_dict()}, checks)

    path = Path(cfg["field"])
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"number field file {str(path)!r} not found")
    L, data = load_numberfield(path)
    bits = int(data.get("precision_bits", nm.MIN_PREC))
    with nm.precision(bits):
        F = NormForm(L.dim)
        cert = admissibility_check(L, F, nm.to_number(cfg["R"]), eps=float(cfg.get("eps", 1e-9)),
                                   budget=_budget(cfg))
        det = L.determinant()
        checks = {"admissible": cert.admissible}
        if "determinant" in exp:
            want = nm.parse_real(str(exp["determinant"]))
            tol = nm.to_mpf(nm.to_number(exp.get("tol", "1e-9")))
            checks["determinant"] = abs(nm.to_mpf(det) - nm.to_mpf(want)) <= tol
        rows = [[data.get("name", path.stem), det, cert.margin, cert.points_checked, cert.verdict]]
        report = {"kind": "starbody", "mode": "numberfield", "field": data.get("name", path.stem),
                  "determinant": det, **cert.to_dict()}
    return Outcome(f"starbody {rows[0][0]}: det={nm.format_scalar(det, 12)}, {cert.verdict}, "
                   f"margin={nm.format_scalar(cert.margin, 12)}",
                   ["field", "determinant", "margin", "points_checked", "verdict"],
                   rows, report, checks)


# ------------------------------------------------------------ Diophantine

def _random_real(g: np.random.Generator, digits: int = 40) -> mpf:
    """Uniform real in (0, 1) carried to ``digits`` decimal places."""
    words = g.integers(0, 10 ** 9, size=digits // 9 + 1)
    s = "".join(f"{int(w):09d}" for w in words)[:digits]
    return mpf("0." + s)


def _dyson_worker(args):
    seed, i, m, n, xr, slack = args
    g = stream(seed, "dyson", i)
    k = n - m
    if m != 1:
        raise ConfigError("the Dyson recipe supports m = 1 primal witnesses")
    A = [[_random_real(g)] for _ in range(k)]
    xs = np.arange(xr[0], xr[1] + 1, dtype=np.int64)
    a = np.array([float(r[0]) for r in A])
    X = np.outer(xs, a)
    R = np.max(np.abs(X - np.rint(X)), axis=1)
    eta = -(k / m) * np.log(R) / np.log(xs) - 1
    x = int(xs[int(np.argmax(eta))])
    y = [int(mpmath.nint(r[0] * x)) for r in A]
    res = max(abs(r[0] * x - yy) for r, yy in zip(A, y))
    e = -(mpf(k) / m) * mpmath.log(res) / mpmath.log(x) - 1
    out = dyson_transfer_step(A, [x], y, x, e)
    target = e / ((m - 1) * e + n - 1) - slack
    ok = out.rational_degeneracy or (out.etastar is not None and out.etastar >= target
                                      and out.contract_holds())
    return [i, x, e, out.Qprime, out.etastar, target, out.rational_degeneracy, ok]


def run_dyson(cfg: dict) -> Outcome:
    m, n = int(cfg.get("m", 1)), int(cfg.get("n", 3))
    xr = [int(v) for v in cfg.get("x_range", [1000, 100000])]
    slack = mpf(str(cfg.get("slack", "0.1")))
    items = [(cfg["seed"], i, m, n, xr, slack) for i in range(int(cfg["count"]))]
    rows = _pmap(_dyson_worker, items, threads(cfg))
    margins = [r[4] - r[5] for r in rows if r[4] is not None and not r[6]]
    checks = {"dual_inequality": all(r[-1] for r in rows)}
    report = {"kind": "dyson", "instances": len(rows), "m": m, "n": n,
              "min_margin": min(margins) if margins else None}
    return Outcome(f"dyson: {len(rows)} systems, {sum(r[-1] for r in rows)} satisfy the dual bound",
                   ["instance", "x", "eta", "Qprime", "eta_star", "target", "degenerate", "ok"],
                   rows, report, checks)


def run_product_approx(cfg: dict) -> Outcome:
    Qs = cfg["Q"] if isinstance(cfg["Q"], list) else [cfg["Q"]]
    rows = []
    for i in range(int(cfg["count"])):
        g = stream(cfg["seed"], "product-approx", i)
        b1, b2 = _random_real(g), _random_real(g)
        for Q in Qs:
            r = product_approx_solver(b1, b2, Q)
            ok = r.success and any(r.v) and nm.to_mpf(r.product) <= mpf(1) / 7
            rows.append([i, Q, b1, b2, *r.v, r.residual, r.product, r.gamma, ok])
    gam = [nm.to_mpf(r[9]) for r in rows if r[9] is not None]
    checks = {"all_solved": all(r[-1] for r in rows)}
    report = {"kind": "product_approx", "cases": len(rows),
              "success_rate": Fraction(sum(r[-1] for r in rows), len(rows)),
              "max_gamma": max(gam) if gam else None}
    return Outcome(f"product_approx: {sum(r[-1] for r in rows)}/{len(rows)} solved, max gamma "
                   f"{nm.format_scalar(report['max_gamma'], 6)}",
                   ["instance", "Q", "beta1", "beta2", "v1", "v2", "v3", "residual", "product",
                    "gamma", "ok"], rows, report, checks)


RUNNERS = {
    "minima": run_minima,
    "transference": run_transference,
    "dual": run_dual,
    "compound": run_compound,
    "volume": run_volume,
    "pgn": run_pgn,
    "pgn_gap": run_pgn_gap,
    "dyson": run_dyson,
    "product_approx": run_product_approx,
}


def execute(cfg: dict, base: Path) -> Outcome:
    validate(cfg)
    if cfg["kind"] == "starbody":
        return run_starbody(cfg, base)
    return RUNNERS[cfg["kind"]](cfg)
