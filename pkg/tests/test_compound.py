import math
from fractions import Fraction

import pytest

import oracle
from gon.bodies import MaxNorm, Parallelepiped, WeightedBox, volume
from gon.compound import (WedgeIndexSet, compound_lattice, compound_minima_check,
                          compound_volume_check, davenport_standard_rho, davenport_rescale_search,
                          dual_via_compound, pseudocompound, wedge, weighted_box_compound)
from gon.errors import DimensionMismatch, InvalidRho, SearchSpaceTooLarge
from gon.lattice import Lattice, canonical_form
from gon.minima import successive_minima
from gon.rng import stream


def rand_matrix(g, n, lo=-3, hi=3):
    while True:
        M = [[int(g.integers(lo, hi + 1)) for _ in range(n)] for _ in range(n)]
        if oracle.det(M) != 0:
            return M


def test_index_set():
    I = WedgeIndexSet(4, 2)
    assert I.tuples == sorted(I.tuples) and len(I.tuples) == I.N == 6
    assert I.P == 3
    with pytest.raises(ValueError):
        WedgeIndexSet(3, 3)


def test_wedge_examples():
    e1, e2 = (1, 0, 0), (0, 1, 0)
    assert wedge(e1, e2) == (1, 0, 0)
    assert wedge(e2, e1) == (-1, 0, 0)
    assert wedge((1, 2, 3), (4, 5, 6)) == (-3, -6, -3)
    with pytest.raises(DimensionMismatch):
        wedge((1, 2), (1, 2, 3))


def _rvec(g, n):
    return [Fraction(int(g.integers(-9, 10)), int(g.integers(1, 5))) for _ in range(n)]


@pytest.mark.parametrize("seed", range(10))
def test_wedge_multilinear_alternating_and_gram(seed):
    g = stream(seed, "test-wedge")
    n, p = 4 + seed % 2, 2 + seed % 2
    xs = [_rvec(g, n) for _ in range(p)]
    y, a, b = _rvec(g, n), Fraction(int(g.integers(-5, 6)), 3), Fraction(int(g.integers(-5, 6)), 7)
    mixed = [a * u + b * v for u, v in zip(xs[0], y)]
    lhs = wedge(mixed, *xs[1:])
    rhs = [a * u + b * v for u, v in zip(wedge(*xs), wedge(y, *xs[1:]))]
    assert list(lhs) == rhs
    swapped = [xs[1], xs[0]] + xs[2:]
    assert wedge(*swapped) == tuple(-v for v in wedge(*xs))
    assert not any(wedge(xs[0], xs[0], *xs[2:]))
    ys = [_rvec(g, n) for _ in range(p)]
    gram = [[sum(u * v for u, v in zip(x_, y_)) for y_ in ys] for x_ in xs]
    assert sum(u * v for u, v in zip(wedge(*xs), wedge(*ys))) == oracle.det(gram)


def test_compound_of_identity():
    assert compound_lattice(Lattice.identity(3), 2) == Lattice.identity(3)


@pytest.mark.parametrize("seed", range(6))
def test_compound_determinant(seed):
    g = stream(seed, "test-compound-det")
    n = 2 + seed % 4
    M = rand_matrix(g, n)
    d = abs(oracle.det(M))
    for p in range(1, n):
        assert abs(compound_lattice(Lattice(M), p).determinant()) == d ** math.comb(n - 1, p - 1)


@pytest.mark.parametrize("seed", range(3))
def test_compound_equals_generator_stack(seed):
    g = stream(seed, "test-compound-stack")
    n, p = 4, 2
    M = rand_matrix(g, n)
    coeffs = g.integers(-3, 4, size=(50, n))
    vecs = [[sum(int(c[i]) * M[i][j] for i in range(n)) for j in range(n)] for c in coeffs]
    gens = [wedge(vecs[i], vecs[j]) for i in range(50) for j in range(i + 1, 50)]
    gens += list(compound_lattice(Lattice(M), p).basis)  # vecs alone may not span
    stacked = Lattice.from_generators(gens)
    assert canonical_form(stacked) == canonical_form(compound_lattice(Lattice(M), p))


def test_pseudocompound_examples():
    pc = pseudocompound(MaxNorm((2, 2, 2, 2)), 3)
    assert pc.bounds == (8,) * 4 and pc.N == 4
    pc = pseudocompound(Parallelepiped([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 2, 3]), 2)
    assert pc.bounds == (2, 3, 6)
    wb = weighted_box_compound(WeightedBox((Fraction(2), Fraction(-1), Fraction(-1)), 3), 2)
    assert wb.mu == (1, 1, -2) and wb.q == 3


def test_compound_minima_examples():
    rep = compound_minima_check(MaxNorm.unit(3), Lattice.identity(3), 2)
    assert rep.ratios == [1, 1, 1]
    rep = compound_minima_check(MaxNorm.unit(3), Lattice([[1, 0, 0], [0, 2, 0], [0, 0, 4]]), 2)
    assert rep.mu == [2, 4, 8]
    assert all(Fraction(1, 2) <= r <= 2 for r in rep.ratios)
    # the compound of diag(1,2,4) is diag(2,4,8) against the unit cube
    assert rep.lambdas == oracle.brute_minima([[2, 0, 0], [0, 4, 0], [0, 0, 8]], MaxNorm.unit(3), 9)


@pytest.mark.parametrize("seed", range(8))
def test_compound_minima_random(seed):
    g = stream(seed, "test-compound-minima")
    n = 3 + seed % 2
    M = rand_matrix(g, n)
    Pi = Parallelepiped(rand_matrix(g, n, -2, 2), [Fraction(int(g.integers(1, 5)), 2) for _ in range(n)])
    for p in range(1, n):
        rep = compound_minima_check(Pi, Lattice(M), p)
        assert rep.upper_ok and rep.lower_ok


def test_compound_volume_examples():
    rep = compound_volume_check(MaxNorm.unit(3), 2)
    assert rep.ratio == Fraction(1, 8)
    assert compound_volume_check(MaxNorm((Fraction(7, 3),) * 3), 2).ratio == Fraction(1, 8)
    assert volume(pseudocompound(MaxNorm.unit(3), 2).gauge) == 8


@pytest.mark.parametrize("p", [1, 2, 3])
def test_compound_volume_ratio_depends_only_on_n_p(p):
    g = stream(p, "test-compound-volume")
    ratios = {compound_volume_check(Parallelepiped(rand_matrix(g, 4), [Fraction(int(g.integers(1, 9)), 2)
                                                                         for _ in range(4)]), p).ratio
              for _ in range(10)}
    assert len(ratios) == 1


def test_dual_via_compound_examples():
    for n in (2, 3, 4):
        assert dual_via_compound(Lattice.identity(n)).equal
    rep = dual_via_compound(Lattice([[2, 0], [0, 3]]))
    assert rep.dual == canonical_form(Lattice([[Fraction(1, 2), 0], [0, Fraction(1, 3)]]))


@pytest.mark.parametrize("seed", range(12))
def test_dual_via_compound_random(seed):
    g = stream(seed, "test-dual-compound")
    assert dual_via_compound(Lattice(rand_matrix(g, 2 + seed % 4))).equal


def test_davenport_all_ones_is_identity():
    Lp = compound_lattice(Lattice([[1, 0, 0], [1, 2, 0], [0, 1, 3]]), 2)
    Ph = pseudocompound(MaxNorm.unit(3), 2)
    res = davenport_rescale_search(Ph, Lp, [1, 1, 1])
    assert res.sigma == (1, 2, 3)
    assert res.new_lambdas == res.lambdas


def test_davenport_cube_with_feasible_rho():
    # rho = (2, 1, 1/2) breaks the rho_i lambda_i ordering on Z^3 (lambda all 1),
    # so it is rejected; a diagonal lattice with lambda = (1, 2, 4) accepts it
    Z = Lattice.identity(3)
    with pytest.raises(InvalidRho):
        davenport_rescale_search(MaxNorm.unit(3), Z, [2, 1, Fraction(1, 2)])
    L = Lattice([[1, 0, 0], [0, 2, 0], [0, 0, 4]])
    res = davenport_rescale_search(MaxNorm.unit(3), L, [2, 1, Fraction(1, 2)])
    assert len(res.all_scores) == 6
    assert res.max_log_ratio <= math.log(2)


def test_davenport_errors():
    with pytest.raises(InvalidRho):
        davenport_rescale_search(MaxNorm.unit(2), Lattice.identity(2), [2, 2])
    with pytest.raises(InvalidRho):
        davenport_rescale_search(MaxNorm.unit(2), Lattice.identity(2), [1, -1])
    with pytest.raises(SearchSpaceTooLarge):
        davenport_rescale_search(MaxNorm.unit(9), Lattice.identity(9), [1] * 9)


@pytest.mark.parametrize("seed", range(20))
def test_davenport_standard_rho(seed):
    g = stream(seed, "test-davenport")
    L = Lattice(rand_matrix(g, 3))
    Lp = compound_lattice(L, 2)
    Ph = pseudocompound(MaxNorm.unit(3), 2)
    lam = successive_minima(Lp, Ph.gauge).lambdas
    rho, c = davenport_standard_rho(lam)
    res = davenport_rescale_search(Ph, Lp, rho)
    assert len(res.all_scores) == 6
    assert res.max_log_ratio == min(res.all_scores.values())
    # the bounded quantity lambda'_{N-1} / c is recorded, finite and positive
    assert 0 < res.new_lambdas[-2] / c < 100
