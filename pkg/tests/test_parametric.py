import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mpf

import oracle
from gon import numeric as nm
from gon.bodies import volume
from gon.errors import ConfigError
from gon.lattice import Lattice, same_lattice
from gon.minima import successive_minima
from gon.parametric import PGNConfig, pgn_profile, profile_point, ss_diagnostics, ss_lattice, weighted_box

GOLDEN = "(1+sqrt(5))/2"


def test_weighted_box_examples():
    B = weighted_box((0, 0, 0), 5)
    assert B((1, Fraction(1, 2), -1)) == 1
    B = weighted_box((1, -1), mpmath.log(2))
    assert abs(B((2, 0)) - 1) < mpf(10) ** -35
    assert abs(B((0, Fraction(1, 2))) - 1) < mpf(10) ** -35
    assert abs(volume(B) - 4) < mpf(10) ** -35
    with pytest.raises(ConfigError):
        weighted_box((1, 1), 1)
    with pytest.raises(ValueError):
        weighted_box((1, -1), 0)


def test_weighted_box_for_the_approximation_system():
    B = weighted_box((2, -1, -1), Fraction(1, 2))
    e = mpmath.e
    assert abs(B((e, 0, 0)) - 1) < mpf(10) ** -35
    assert abs(B((0, 1 / mpmath.sqrt(e), 0)) - 1) < mpf(10) ** -35


def test_ss_lattice_examples():
    assert same_lattice(ss_lattice([0]), Lattice.identity(2))
    L = ss_lattice([GOLDEN])
    phi = (1 + mpmath.sqrt(5)) / 2
    # (1, phi - 1) and (1, phi - 2) are x = 1, y = 1 and y = 2
    assert abs(L.basis[0][1] + L.basis[1][1] - (phi - 1)) < mpf(10) ** -35
    assert abs(L.basis[0][1] + 2 * L.basis[1][1] - (phi - 2)) < mpf(10) ** -35
    for xi in ([GOLDEN], ["sqrt(2)", "cbrt(3)"], [Fraction(3, 7)]):
        assert abs(nm.to_mpf(ss_lattice(xi).determinant()) - 1) < mpf(10) ** -35


def test_config_validation():
    with pytest.raises(ConfigError):
        PGNConfig(mu=(1, -1), start=1, stop=2, step=0, xi=(GOLDEN,))
    with pytest.raises(ConfigError):
        PGNConfig(mu=(1, -1, 0), start=1, stop=2, step=1, xi=(GOLDEN,))
    with pytest.raises(ConfigError):
        PGNConfig(mu=(1, -1), start=1, stop=2, step=1)
    with pytest.raises(ConfigError):
        PGNConfig.from_dict({"mu": ["1", "-1"], "xi": [GOLDEN]})
    cfg = PGNConfig(mu=(1, -1), start=Fraction(1, 2), stop=2, step=Fraction(1, 2), xi=(GOLDEN,))
    assert cfg.grid() == [Fraction(1, 2), 1, Fraction(3, 2), 2]
    assert PGNConfig.from_dict(cfg.to_dict()).grid() == cfg.grid()


def test_point_matches_direct_minima():
    cfg = PGNConfig(mu=(1, -1), start=1, stop=1, step=1, xi=(Fraction(3, 7),))
    pt = profile_point(cfg, 3)
    # the profile point is the log of the direct minima
    res = successive_minima(Lattice([[1, Fraction(3, 7)], [0, -1]]), weighted_box((1, -1), 3))
    assert [abs(a - mpmath.log(nm.to_mpf(b))) < mpf(10) ** -30 for a, b in zip(pt.L, res.lambdas)] == [True, True]
    assert pt.M[0] == 0 and pt.M[-1] == 0


def test_integer_box_minima_against_brute_force():
    # at q = log 2 the box is [-2, 2] x [-1/2, 1/2], whose gauge has an exact form
    L = [[1, 0], [0, 2]]
    with nm.precision(200):
        res = successive_minima(Lattice(L), weighted_box((1, -1), mpmath.log(2)))
    want = oracle.brute_minima([[1, 0], [0, 2]], _Box(), 10)
    assert [float(v) for v in res.lambdas] == pytest.approx([float(v) for v in want], rel=1e-12)


class _Box:
    """max(|x| / 2, 2 |y|), the box of the test above, for the oracle."""

    def __call__(self, x):
        return max(abs(Fraction(x[0])) / 2, 2 * abs(Fraction(x[1])))

    def eval_many(self, X):
        return np.maximum(np.abs(X[:, 0]) / 2, 2 * np.abs(X[:, 1]))


@pytest.fixture(scope="module")
def golden():
    cfg = PGNConfig(mu=(1, -1), start=Fraction(1, 2), stop=30, step=Fraction(1, 4), xi=(GOLDEN,))
    return pgn_profile(cfg)


def test_golden_profile_invariants(golden):
    logfact = math.log(2)
    for L, P in zip(golden.L, golden.P):
        assert L[0] <= L[1]
        assert -logfact - 1e-20 <= sum(L) <= 1e-20
        assert sum(P) == 0
    lo, hi = golden.exponents()
    assert abs(lo[0]) <= 0.05 and abs(hi[1]) <= 0.05
    assert not golden.truncated


def test_golden_diagnostics(golden):
    d = ss_diagnostics(golden)
    assert d.crossing_count[0] >= 5
    assert d.lipschitz_ok and d.minkowski_ok and d.p_sum_zero
    assert d.gap is not None and d.gap_second_half <= 2 * d.gap_first_half


def test_rational_exponent():
    cfg = PGNConfig(mu=(1, -1), start=Fraction(1, 2), stop=40, step=Fraction(1, 2), xi=(Fraction(3, 7),))
    prof = pgn_profile(cfg)
    lo, _ = prof.exponents()
    assert -1.05 <= lo[0] <= -0.95
    # the axis point (7, 0) bounds L_1 by log 7 - q
    for q, L in zip(prof.q, prof.L):
        assert L[0] <= math.log(7) - float(q) + 1e-12
    assert math.isfinite(float(ss_diagnostics(prof).gap))


def test_three_dimensional_profile_and_unimodular_invariance():
    cfg = PGNConfig(mu=(2, -1, -1), start=Fraction(1, 2), stop=4, step=Fraction(1, 2),
                    xi=("sqrt(2)", "cbrt(3)"))
    prof = pgn_profile(cfg)
    for L, P in zip(prof.L, prof.P):
        assert L[0] <= L[1] <= L[2]
        assert -math.log(6) - 1e-20 <= sum(L) <= 1e-20
        assert sum(P) == 0
    # y-block change (y1, y2) -> (y1 + y2, y2) leaves the lattice, hence the profile, alone
    basis = [list(r) for r in ss_lattice(["sqrt(2)", "cbrt(3)"]).basis]
    basis[1] = [a + b for a, b in zip(basis[1], basis[2])]
    cfg2 = PGNConfig(mu=(2, -1, -1), start=Fraction(1, 2), stop=4, step=Fraction(1, 2),
                     basis=tuple(tuple(r) for r in basis))
    prof2 = pgn_profile(cfg2)
    for a, b in zip(prof.L, prof2.L):
        assert all(abs(x - y) < mpf(10) ** -25 for x, y in zip(a, b))


def test_parallel_profile_is_identical():
    cfg = PGNConfig(mu=(1, -1), start=Fraction(1, 2), stop=6, step=Fraction(1, 2), xi=(GOLDEN,))
    a, b = pgn_profile(cfg), pgn_profile(cfg, workers=2)
    assert a.L == b.L and a.M == b.M and a.witnesses == b.witnesses


def test_budget_truncates_profile():
    # one candidate per enumeration round suffices at small q but not later on
    cfg = PGNConfig(mu=(1, -1), start=Fraction(1, 2), stop=10, step=Fraction(1, 2),
                    xi=(GOLDEN,), budget=1)
    prof = pgn_profile(cfg)
    assert prof.truncated and prof.truncated_at == cfg.grid()[len(prof.q)]
    assert 0 < len(prof.q) < len(cfg.grid())
