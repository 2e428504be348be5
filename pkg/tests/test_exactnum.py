import random
from fractions import Fraction

import flint
import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from prym61 import exactnum as en


def test_nu_relation():
    nu = en.nu()
    assert nu * nu == nu + 15


def test_alpha_relation():
    a = en.alpha()
    assert a**4 + 8 * a**2 + 13 == en.KF.zero


def test_fundamental_unit_norm():
    nu = en.nu()
    u = 17 + 5 * nu
    assert u.norm() == -1
    # (39 + 5 sqrt61)/2 = 17 + 5 nu since nu = (1 + sqrt61)/2
    assert u.inverse() * u == en.QSQRT61.one


def test_norm_matches_sympy():
    # N(a + b nu) = a^2 + ab - 15 b^2, checked against a resultant computed by sympy
    x = sympy.Symbol("x")
    for a, b in [(3, 1), (-7, 4), (22, -5), (0, 1)]:
        el = a + b * en.nu()
        res = sympy.resultant(x**2 - x - 15, a + b * x, x)
        assert el.norm() == Fraction(int(res))


coords = st.lists(st.integers(-50, 50), min_size=4, max_size=4)


@given(coords, coords)
@settings(max_examples=60, deadline=None)
def test_norm_multiplicative(c1, c2):
    a, b = en.KF(c1), en.KF(c2)
    assert (a * b).norm() == a.norm() * b.norm()


@given(coords)
@settings(max_examples=40, deadline=None)
def test_inverse(c):
    a = en.KF(c)
    if a == en.KF.zero:
        with pytest.raises(ZeroDivisionError):
            a.inverse()
    else:
        assert a * a.inverse() == en.KF.one


def test_trace_of_alpha_squared():
    # roots of x^2 + 8x + 13 in alpha^2, each twice
    assert (en.alpha() ** 2).trace() == -16


def test_embeddings_are_roots():
    for F in (en.QSQRT61, en.KF, en.QSQRT3):
        with mpmath.workdps(40):
            for r in F.embeddings(40):
                v = sum(mpmath.mpf(c) * r**i for i, c in enumerate(F.min_poly))
                assert abs(v) < mpmath.mpf(10) ** -30


def test_split_prime_kinds():
    assert en.split_prime(3, en.QSQRT61).kind == "split"  # 61 = 1 mod 3
    assert en.split_prime(2, en.QSQRT61).kind == "inert"
    assert en.split_prime(61, en.QSQRT61).kind == "ramified"
    for p in en.primes_up_to(60):
        assert en.split_prime(p, en.KF).check(4)


def test_split_prime_rejects_composite():
    with pytest.raises(ValueError):
        en.split_prime(15, en.QSQRT61)


def test_embedding_bound_C_bounds_coordinates():
    rng = random.Random(5)
    basis = en.power_basis(en.KF)
    C = en.embedding_bound_C(basis)
    for _ in range(20):
        x = en.random_element(en.KF, rng)
        m = float(max(abs(e) for e in x.embed_all(30)))
        assert float(max(abs(c) for c in x.coords)) <= C * m + 1e-9


def test_factor_mod_p_against_flint():
    f = [13, 0, 8, 0, 1]
    for p in (3, 5, 7, 11, 61, 97):
        ours = sorted((tuple(g), m) for g, m in en.factor_mod_p(f, p))
        _, facs = flint.nmod_poly(f, p).factor()
        theirs = sorted((tuple(int(c) for c in g.coeffs()), m) for g, m in facs)
        assert ours == theirs


def test_roots_mod_p_brute_force():
    f = [-15, -1, 1]
    for p in en.primes_up_to(100):
        brute = sorted(r for r in range(p) if (r * r - r - 15) % p == 0)
        assert sorted(en.roots_mod_p(f, p)) == brute


def test_primes_up_to():
    assert en.primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@pytest.mark.parametrize("p,k", [(2, 3), (3, 2), (5, 3), (7, 1)])
def test_finite_field_axioms(p, k):
    F = en.FiniteField(p, k)
    els = list(F.elements())
    assert len(els) == p**k
    nonzero = [e for e in els if e]
    for e in nonzero:
        assert e * e.inverse() == 1
        assert e ** (F.order - 1) == 1
    squares = {e * e for e in nonzero}
    expected = len(nonzero) if p == 2 else len(nonzero) // 2
    assert len(squares) == expected
    assert all(e.is_square() == (e in squares) for e in nonzero)


def test_irreducible_poly_is_irreducible():
    for p, k in [(2, 3), (3, 3), (199, 3)]:
        assert en.is_irreducible_mod_p(list(en.irreducible_poly(p, k)), p)
