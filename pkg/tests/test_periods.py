import math

import mpmath
import pytest

from prym61 import modsym as ms
from prym61 import periods as pr
from prym61 import qexp as qx
from prym61.apfloat import ComplexMatrix, ctx_for

D = 30


@pytest.fixture(scope="module")
def f0():
    A = qx.SeedSource(qx.F0).coefficients(900)
    return qx.QExpansion(qx.F0.label, "Q", A, qx.LEVEL, "trivial")


@pytest.fixture(scope="module")
def lam0(f0):
    return pr.fricke_lambdas(f0, D)


def test_terms_needed():
    assert pr.terms_needed(7, 300) == 6011
    base = 7 * math.sqrt(61) * math.log(10) / (2 * math.pi)
    for m, d in [(1, 100), (3, 300), (7, 1000)]:
        assert pr.terms_needed(m, d) == math.ceil(m / 7 * base * d)


def test_fricke_eigenvalue_of_rank_one_curve(f0, lam0):
    # 61a has analytic rank 1, so its root number is -1 and f0 | W_61 = +f0
    assert abs(lam0[0].value - 1) < mpmath.mpf(10) ** (-D + 10)


def test_trivial_winding_integral_vanishes(f0, lam0):
    w = pr.winding_integral(f0, ms.Character(1, 0), D, lam0)
    assert abs(w[0].value) < mpmath.mpf(10) ** (-D + 5)


@pytest.mark.parametrize("chi", ms.primitive_characters(3) + ms.primitive_characters(4) + ms.primitive_characters(5))
def test_fast_and_naive_sums_agree(f0, lam0, chi):
    n = pr.terms_needed(chi.m, D, margin=1.2)
    fast = pr.winding_integral(f0, chi, D, lam0)
    slow = pr.winding_integral_naive(f0, chi, D, lam0, n)
    assert abs(fast[0].value - slow[0].value) < mpmath.mpf(10) ** (-D + 5)


def test_insufficient_terms(f0, lam0):
    with pytest.raises(pr.InsufficientTermsError):
        pr.winding_integral(f0, ms.Character(7, 1), 300, [pr.BigComplex(ctx_for(300).mpc(1), 300)])


def test_elliptic_lattice_j_invariant():
    c = ctx_for(D)
    for a in ([1, 0, 0, -2, 1], [0, 0, 0, -1, 0], [0, 0, 1, -1, 0]):
        w1, w2 = pr.elliptic_lattice(a, D)
        tau = w2 / w1
        assert tau.imag > 0
        j = pr.elliptic_invariants(a, c)["j"]
        with mpmath.workdps(D + 20):
            jt = 1728 * mpmath.kleinj(tau)
        assert abs(jt - j) < abs(j) * mpmath.mpf(10) ** (-D + 10) + mpmath.mpf(10) ** (-D + 10)


def test_real_rank():
    c = ctx_for(D)
    P = ComplexMatrix([[1, c.mpc(0, 1)]], D)
    assert pr.real_rank(P) == 2
    Q = ComplexMatrix([[1, 2]], D)
    assert pr.real_rank(Q) == 1


def test_gauss_sum_modulus():
    for chi in ms.primitive_characters(5) + ms.primitive_characters(7):
        g = pr.CharacterData(chi, D).gauss()
        assert abs(abs(g) ** 2 - chi.m) < mpmath.mpf(10) ** (-D + 5)
