import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mpf

import oracle
from gon import numeric as nm
from gon.bodies import (CrossImage, EuclideanNorm, MaxNorm, NormForm, Parallelepiped, SumNorm,
                        TruncatedNormForm, WeightedBox, outer_inner_radii)
from gon.errors import EnumerationBudget, InvariantViolation, UnboundedBody
from gon.lattice import Lattice
from gon.minima import (c3, c4, dyson_transfer_step, exponent_estimate, first_minimum,
                        inhomogeneous_shift, mahler_transference_check, minkowski_check,
                        successive_minima)
from gon.rng import stream

HEX = Lattice([[1, 0], [mpf(1) / 2, mpmath.sqrt(3) / 2]])
GOLDEN = (1 + mpmath.sqrt(5)) / 2


def F(*v):
    return tuple(Fraction(x) for x in v)


def test_integer_lattice_cube():
    r = successive_minima(Lattice.identity(2), MaxNorm.unit(2))
    assert r.lambdas == [1, 1]
    assert r.witnesses == [F(1, 0), F(0, 1)]


def test_axis_aligned():
    assert successive_minima(Lattice([[1, 0], [0, 4]]), MaxNorm.unit(2)).lambdas == [1, 4]


def test_hexagonal_against_coefficient_box():
    r = successive_minima(HEX, EuclideanNorm(2))
    assert all(abs(v - 1) < mpf(10) ** -35 for v in r.lambdas)
    # brute force over coefficients in [-5, 5]^2
    B = np.array([[float(v) for v in row] for row in HEX.basis])
    norms = sorted(np.linalg.norm(np.array([a, b]) @ B) for a in range(-5, 6)
                   for b in range(-5, 6) if (a, b) != (0, 0))
    assert abs(norms[0] - 1) < 1e-12 and abs(norms[5] - 1) < 1e-12


def _random_gauge(g, n, kind):
    if kind == 0:
        return MaxNorm(tuple(Fraction(int(g.integers(1, 6)), int(g.integers(1, 4))) for _ in range(n)))
    if kind == 1:
        return SumNorm(n)
    if kind == 2:
        while True:
            M = [[Fraction(int(g.integers(-4, 5)), int(g.integers(1, 4))) for _ in range(n)] for _ in range(n)]
            if oracle.det(M) != 0:
                return CrossImage(M)
    if kind == 3:
        while True:
            M = [[int(g.integers(-3, 4)) for _ in range(n)] for _ in range(n)]
            if oracle.det(M) != 0:
                return Parallelepiped(M, [Fraction(int(g.integers(1, 7)), 2) for _ in range(n)])
    return TruncatedNormForm(n, int(g.integers(2, 7)))


@pytest.mark.parametrize("seed", range(40))
def test_minima_match_brute_force(seed):
    g = stream(seed, "test-minima")
    n = 2 + seed % 2
    while True:
        B = [[int(g.integers(-3, 4)) for _ in range(n)] for _ in range(n)]
        if oracle.det(B) != 0:
            break
    Fg = _random_gauge(g, n, seed % 5)
    res = successive_minima(Lattice(B), Fg)
    # every point of gauge <= lambda_n lies within lambda_n * R in max-norm
    K = int(float(max(res.lambdas, key=float)) * float(outer_inner_radii(Fg)[1])) + 1
    want = oracle.brute_minima(B, Fg, K, cap=max(res.lambdas, key=float))
    assert [float(v) for v in res.lambdas] == [float(v) for v in want]
    assert oracle.rank([list(w) for w in res.witnesses]) == n
    for lam, w in zip(res.lambdas, res.witnesses):
        assert abs(nm.to_mpf(Fg(w)) - nm.to_mpf(lam)) < mpf(10) ** -30


def test_scaling_invariance():
    L = Lattice([[2, 1, 0], [0, 3, 1], [1, 0, 2]])
    P = Parallelepiped([[1, 1, 0], [0, 1, 1], [1, 0, 1]], [1, 2, 3])
    a = successive_minima(L, P)
    b = successive_minima(L.scaled(Fraction(7, 3)), P)
    assert b.lambdas == [Fraction(7, 3) * v for v in a.lambdas]
    assert b.witnesses == [tuple(Fraction(7, 3) * c for c in w) for w in a.witnesses]


def test_large_eccentricity():
    # e^{+-60} scalings need more than the default 128 bits
    with nm.precision(400):
        L = Lattice([[1, Fraction(3, 7)], [0, -1]])
        lam, w = first_minimum(L, WeightedBox((1, -1), 60))
        assert w == F(7, 0)
        assert abs(lam - 7 * mpmath.exp(-60)) < mpf(10) ** -60


def test_unbounded_gauge_rejected():
    with pytest.raises(UnboundedBody):
        successive_minima(Lattice.identity(2), NormForm(2))


def test_budget():
    with pytest.raises(EnumerationBudget):
        successive_minima(Lattice.identity(3), MaxNorm.unit(3), budget=2)


def test_minkowski_equality_cases():
    for n in (2, 3, 4):
        Z = Lattice.identity(n)
        assert minkowski_check(Z, MaxNorm.unit(n)).t == 2 ** n
        assert minkowski_check(Z, SumNorm(n)).t == Fraction(2 ** n, math.factorial(n))


def test_minkowski_rejects_star_bodies():
    with pytest.raises(InvariantViolation):
        minkowski_check(Lattice.identity(2), TruncatedNormForm(2, 3))


def test_transference_examples():
    rep = mahler_transference_check(Lattice.identity(3), MaxNorm.unit(3))
    assert rep.products == [1, 1, 1]
    t = Fraction(5)
    rep = mahler_transference_check(Lattice([[t, 0], [0, 1 / t]]), MaxNorm.unit(2))
    assert rep.lambdas == [Fraction(1, 5), 5]
    assert rep.dual_lambdas == [Fraction(1, 5), 5]
    assert rep.products == [1, 1]


def test_transference_constants():
    assert c3(3) == 36
    assert c4(3) == 108


def test_inhomogeneous_examples():
    z = inhomogeneous_shift(Lattice.identity(2), MaxNorm.unit(2), (Fraction(2, 5), Fraction(-7, 10)))
    assert z == F(0, 1)
    assert MaxNorm.unit(2)((Fraction(2, 5), Fraction(3, 10))) == Fraction(2, 5)
    z = inhomogeneous_shift(Lattice.identity(2), MaxNorm.unit(2), (3, -4))
    assert z == F(-3, 4)


@pytest.mark.parametrize("seed", range(0, 100, 5))
def test_inhomogeneous_bound_against_brute_force(seed):
    g = stream(seed, "test-shift")
    while True:
        B = [[int(g.integers(-2, 3)) for _ in range(3)] for _ in range(3)]
        if oracle.det(B) != 0:
            break
    Pg = Parallelepiped([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [Fraction(int(g.integers(1, 4))) for _ in range(3)])
    a = [Fraction(int(g.integers(-20, 21)), 7) for _ in range(3)]
    L = Lattice(B)
    res = successive_minima(L, Pg)
    z = inhomogeneous_shift(L, Pg, a, res)
    # z is a lattice vector, and the bound n lambda_n holds
    assert any(all(Fraction(x) == v for x, v in zip(p, z)) for p in oracle.lattice_points(B, 8)) or not any(z)
    val = Pg([x + y for x, y in zip(a, z)])
    assert val <= 3 * res.lambdas[-1]
    assert val >= oracle.brute_closest_gauge(B, Pg, a, 6)


def test_dyson_golden_convergent():
    A = [[GOLDEN]]
    x, y = 89, 144
    res = abs(GOLDEN * x - y)
    eta = -mpmath.log(res) / mpmath.log(x) - 1
    out = dyson_transfer_step(A, [x], [y], x, eta)
    fib = {1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233}
    assert abs(out.u[0]) in fib
    assert out.contract_holds()
    assert out.etastar >= eta - mpf("0.1")


def test_dyson_integer_matrix_is_degenerate():
    out = dyson_transfer_step([[Fraction(2)], [Fraction(3)]], [1], [2, 3], 1, 0)
    assert out.rational_degeneracy
    assert out.u == (1, 0)


def test_dyson_rejects_non_solutions():
    with pytest.raises(ValueError):
        dyson_transfer_step([[GOLDEN]], [89], [140], 89, 0)


@pytest.mark.parametrize("seed", range(10))
def test_dyson_contract_random(seed):
    g = stream(seed, "test-dyson")
    A = [[mpf(repr(g.random()))], [mpf(repr(g.random()))]]
    a = np.array([float(r[0]) for r in A])
    xs = np.arange(100, 5001)
    R = np.max(np.abs(np.outer(xs, a) - np.rint(np.outer(xs, a))), axis=1)
    x = int(xs[int(np.argmax(-2 * np.log(R) / np.log(xs)))])
    y = [int(mpmath.nint(r[0] * x)) for r in A]
    res = max(abs(r[0] * x - v) for r, v in zip(A, y))
    eta = -2 * mpmath.log(res) / mpmath.log(x) - 1
    out = dyson_transfer_step(A, [x], y, x, eta)
    assert out.contract_holds()
    assert out.etastar >= eta / 2 - mpf("0.1")


def test_exponent_golden_is_small():
    est = exponent_estimate([[GOLDEN]], "primal", 10 ** 5)
    assert not est.rational_degeneracy
    assert 0 <= est.estimate < 0.15
    assert len(est.witnesses) >= 3


def test_exponent_rational_is_flagged():
    est = exponent_estimate([[Fraction(3, 7)]], "primal", 100)
    assert est.rational_degeneracy and est.estimate == mpf("inf")


def test_exponent_planted_partial_quotient():
    cf = [1] * 11 + [10 ** 6] + [1] * 30
    x = mpf(0)
    for a in reversed(cf):
        x = 1 / (a + x)
    est = exponent_estimate([[x]], "primal", 10 ** 4)
    assert est.estimate >= 1


def test_exponent_requires_qmax():
    with pytest.raises(ValueError):
        exponent_estimate([[GOLDEN]], "primal", 5)
