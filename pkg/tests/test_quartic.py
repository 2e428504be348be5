import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from prym61 import exactnum as en
from prym61 import qexp as qx
from prym61 import quartic as qt

K = qt.K
NU = qt.NU


def split_prime_above(p):
    S = en.split_prime(p, K)
    assert S.kind == "split"
    return S.primes[0]


def inert_prime(p):
    S = en.split_prime(p, K)
    assert S.kind == "inert"
    return S.primes[0]


def _reduce(c, P):
    a, b = c.coords
    p = P.p
    return (a.numerator * pow(a.denominator, -1, p) + b.numerator * pow(b.denominator, -1, p) * P.root) % p


def count_oracle(F, P, k):
    """Projective points over F_{p^k} by plain evaluation with exactnum.FiniteField."""
    FF = en.FiniteField(P.p, k)
    terms = [(m, FF(_reduce(c, P))) for m, c in F.as_dict().items()]
    els = list(FF.elements())
    pw = {e: [FF(1), e, e * e, e * e * e, e * e * e * e] for e in els}
    zero, one = FF(0), FF(1)

    def ev(x, y, z):
        s = zero
        for (i, j, l), c in terms:
            s = s + c * pw[x][i] * pw[y][j] * pw[z][l]
        return not s

    n = sum(ev(x, y, one) for x in els for y in els)
    n += sum(ev(x, one, zero) for x in els)
    n += ev(one, zero, zero)
    return n


FERMAT = qt.TernaryQuartic.from_dict({(4, 0, 0): K.one, (0, 4, 0): K.one, (0, 0, 4): K.one})


def test_fermat_quartic_has_no_points_over_f5():
    # x^4 is 0 or 1 on F_5, so a sum of three fourth powers vanishes only at the origin
    P = split_prime_above(5)
    assert count_oracle(FERMAT, P, 1) == 0
    assert qt.count_points(FERMAT, P, 1) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_fermat_counts_agree(k):
    P = split_prime_above(5)
    want = count_oracle(FERMAT, P, k)
    assert qt.count_points_even_fast(FERMAT, P, k) == want
    assert qt.count_points_even(FERMAT, P, k) == want
    assert qt.count_points_slices(FERMAT, P, k) == want
    assert qt.count_points_brute(FERMAT, P, k) == want
    assert qt.weil_ok(want, 5**k)


@pytest.mark.parametrize("p,k", [(3, 1), (3, 2), (5, 2), (13, 1)])
def test_published_counts_agree(p, k):
    P = split_prime_above(p)
    F = qt.PUBLISHED_F
    want = count_oracle(F, P, k)
    assert qt.count_points(F, P, k) == want
    assert qt.count_points_slices(F, P, k) == want


def test_inert_prime_counts_agree():
    P = inert_prime(7)
    F = qt.PUBLISHED_F
    for k in (1, 2):
        assert qt.count_points_even_fast(F, P, k) == qt.count_points_brute(F, P, k)
        assert qt.count_points_slices(F, P, k) == qt.count_points_brute(F, P, k)


def test_characteristic_two_rejected():
    P = en.split_prime(2, K).primes[0]
    with pytest.raises(qt.BadPrimeError):
        qt.count_points(qt.PUBLISHED_F, P, 1)


@pytest.fixture(scope="module")
def qe_small():
    A = qx.SeedSource(qx.F_NEB).coefficients(220)
    return qx.QExpansion(qx.F_NEB.label, "Kf", A, qx.LEVEL, "legendre61")


def test_lpoly_curve_is_weil(qe_small):
    for P in qt.good_primes(30):
        L = qt.lpoly_curve(qt.PUBLISHED_F, P)
        assert L.functional_equation_ok()
        assert L.root_moduli_ok()


def test_root_moduli_rejects_fake():
    assert not qt.LPolynomial(5, 5, (1, 5, 5)).root_moduli_ok()  # |a| = 5 > 2 sqrt 5
    assert qt.LPolynomial(5, 5, (1, 2, 5)).root_moduli_ok()  # roots of modulus sqrt 5
    # repeated roots (L even in T) are handled
    assert qt.LPolynomial(5, 5, (1, 0, 10, 0, 25)).root_moduli_ok()


def test_literal_modular_factor_fails_functional_equation(qe_small):
    P = split_prime_above(3)
    assert qt.lpoly_modular(qe_small, P).functional_equation_ok()
    assert not qt.lpoly_modular(qe_small, P, literal=True).functional_equation_ok()


def test_decomposition_small_primes(qe_small):
    for P in qt.good_primes(50):
        rep = qt.prime_report(qt.PUBLISHED_F, qe_small, P)
        assert rep.decomposes and rep.fe_ok and rep.roots_ok
        assert rep.signs == [1] or len(rep.signs) == 2


def _singular_point_primes(F, primes):
    """Primes p for which F mod p has a singular point over F_p (rational coefficients)."""
    parts = [qt.form_diff(F.as_dict(), v) for v in range(3)]
    polys = [F.as_dict()] + parts
    out = []
    for p in primes:
        red = [{m: int(c.coords[0]) % p for m, c in G.items()} for G in polys]

        def ev(G, v):
            return sum(c * pow(v[0], m[0], p) * pow(v[1], m[1], p) * pow(v[2], m[2], p) for m, c in G.items()) % p

        pts = [(x, y, 1) for x in range(p) for y in range(p)] + [(x, 1, 0) for x in range(p)] + [(1, 0, 0)]
        if any(all(ev(G, v) == 0 for G in red) for v in pts):
            out.append(p)
    return out


def test_discriminant_support_matches_singular_points():
    G = qt.TernaryQuartic.from_dict({
        (4, 0, 0): K.one, (0, 4, 0): K.one, (0, 0, 4): K([2]), (2, 1, 1): K([1]),
        (1, 2, 1): K([3]), (1, 1, 2): K([-2]), (0, 3, 1): K([5]),
    })
    ds = qt.discriminant_support(G)
    primes = [p for p in en.primes_up_to(31) if p >= 5]
    assert [p for p in ds.primes if 5 <= p <= 31] == _singular_point_primes(G, primes)


def test_published_discriminant_support():
    ds = qt.discriminant_support(qt.PUBLISHED_F)
    assert ds.primes == [2]
    assert ds.cofactor == 1
    assert ds.two_adic_valuation == 216


def _inv3(A):
    from sympy import Matrix
    M = Matrix(A).inv()
    return [[Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(3)] for i in range(3)]


def test_involution_recovered_after_conjugation():
    rng = random.Random(4)
    while True:
        A = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
        if en.det_rational(A) != 0:
            break
    Ainv = _inv3(A)
    F = qt.TernaryQuartic.from_dict(qt.form_subst(qt.PUBLISHED_F.as_dict(), [[K([x]) for x in r] for r in A]))
    D = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]
    iota = [[sum(Fraction(Ainv[i][k]) * D[k][k] * A[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    norm = qt.involution_normalize(F, [[K([x]) for x in r] for r in iota])
    assert norm.H.is_even_in_x()
    with pytest.raises(qt.NotAnAutomorphismError):
        qt.involution_normalize(F, [[K([int(i == j)]) for j in range(3)] for i in range(3)])


def test_twist_reproduces_published_model():
    tw = qt.twist(qt.SIMPLIFIED_F0, qt.PUBLISHED_DELTA)
    c = qt.proportional_by_unit(tw, qt.PUBLISHED_F)
    assert c is not None and abs(c.norm()) == 1


def test_twice_twisted_is_coordinate_change():
    d = qt.PUBLISHED_DELTA
    tt = qt.twist(qt.twist(qt.SIMPLIFIED_F0, d), d)
    sub = qt.form_subst(qt.SIMPLIFIED_F0.as_dict(), [[d.inverse(), K.zero, K.zero], [K.zero, K.one, K.zero],
                                                      [K.zero, K.zero, K.one]])
    assert qt.form_proportional(tt.as_dict(), sub) is not None
    for P in qt.good_primes(20, kinds=("split",))[:3]:
        assert qt.lpoly_curve(tt, P).coeffs == qt.lpoly_curve(qt.SIMPLIFIED_F0, P).coeffs


def test_twist_rejects_odd_form():
    with pytest.raises(ValueError):
        qt.twist(qt.TernaryQuartic.from_dict({(3, 1, 0): K.one, (0, 0, 4): K.one}), 2)


def test_cover_systems():
    assert not qt.cover_check(qt.PRINTED_COVER).ok
    with pytest.raises(qt.CoverIdentityError):
        qt.cover_identity_check(qt.PRINTED_COVER)
    chk = qt.cover_identity_check(qt.RECONSTRUCTED_COVER)
    # F0 = (859 - 195 nu) * [(x^2 - q)^2 - 4 z p0]
    assert chk.scalar == (859 - 195 * NU).inverse()


def test_two_unit_class_of_delta():
    cls = qt.TwoUnitClass.of(qt.PUBLISHED_DELTA)
    assert cls.exponents == (1, 1, 0)
    assert cls.representative() == 22 - 5 * NU
    assert cls.representative().norm() == -1


def test_twist_search_small_bound_is_ambiguous(qe_small):
    with pytest.raises(qt.AmbiguousTwistError):
        qt.twist_search(qt.SIMPLIFIED_F0, qe_small, 7)


def test_fundamental_unit():
    u, s = qt.validate_fundamental_unit()
    assert u == 17 + 5 * NU and s == -4
    assert u.norm() == -1


def test_a5_odd(qe_small):
    assert qe_small.a(5) == -4 - en.alpha() ** 2
    assert qt.residue_mod_two(qe_small.a(5)) == 1
    assert qt.frobenius_order_mod_two(qe_small, 5) == 3
    assert qt.residue_mod_two(qe_small.a(2)) == 1  # alpha = 1 mod (2, alpha + 1)


def test_tangent_and_norm_obstruction():
    t = qt.endo_tangent_selfcheck()
    assert t["ok"] and t["block_det"] == -3
    n = qt.norm_obstruction()
    assert n["ok"]
    assert n["primitive_mod9"] == 0
    assert n["contrast_primitive_mod9"] > 0


def test_weil_polynomial_of_product():
    # h for (1 - aT + qT^2)(1 - bT + qT^2) is (W - a)(W - b)
    L = qt.LPolynomial(7, 7, tuple(qt.poly_mul((1, -3, 7), (1, 2, 7))))
    assert L.real_weil_poly() == [-6, -1, 1]
