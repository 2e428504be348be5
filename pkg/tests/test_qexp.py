import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from prym61 import exactnum as en
from prym61 import qexp as qx

P = 998244353  # 119 * 2^23 + 1


@pytest.fixture(scope="module")
def ctx():
    return qx.NTTContext(P)


@given(st.lists(st.integers(0, P - 1), min_size=1, max_size=200),
       st.lists(st.integers(0, P - 1), min_size=1, max_size=200))
@settings(max_examples=40, deadline=None)
def test_ntt_matches_schoolbook(a, b):
    ctx = qx.NTTContext(P)
    n = len(a) + len(b) - 1
    got = ctx.mul(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64), n)
    assert got.tolist() == qx.schoolbook_mul(a, b, n, P)


def test_sigma_sieve_against_sympy():
    for k in (0, 1, 3, 5):
        s = qx.sigma_sieve(200, k)
        assert s[1:] == [int(sympy.divisor_sigma(n, k)) for n in range(1, 201)]


def test_u_is_inverse_of_j(ctx):
    # q j(q) = 1 + 744 q + 196884 q^2 + 21493760 q^3 + 864299970 q^4 + ...
    qj = np.array([1, 744, 196884, 21493760, 864299970], dtype=np.int64) % P
    u = qx.u_series(40, P, ctx)
    assert u[0] == 0 and u[1] == 1
    prod = ctx.mul(u.shift_down(1).coeffs, qj, 5)
    assert prod.tolist() == [1, 0, 0, 0, 0]


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_inverse_and_sqrt(seed):
    ctx = qx.NTTContext(P)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, P, 300, dtype=np.int64)
    a[0] = 1
    s = qx.SeriesFp(P, a)
    inv = s.inverse(ctx)
    one = s.mul(inv, ctx).coeffs
    assert one[0] == 1 and not one[1:].any()
    r = s.sqrt_unit(ctx)
    assert np.array_equal(r.mul(r, ctx).coeffs, a)


def test_relation_and_newton_on_square_root(ctx):
    # v = sqrt(1 + 4u) satisfies y^2 - 4x - 1 = 0 with x = u
    B = 3000
    u = qx.u_series(B + 8, P, ctx)
    one = np.zeros(B + 8, dtype=np.int64)
    one[0] = 1
    v = qx.SeriesFp(P, (one + 4 * u.coeffs) % P).sqrt_unit(ctx)
    b = 40
    rel = qx.find_relation(u, v.truncate(b), b, degu=2, degv=1, ctx=ctx)
    assert rel.kernel_dim == 1
    a = np.array(rel.a) % P
    c = int(a[0][2])  # coefficient of y^2
    inv = pow(c, P - 2, P)
    assert ((a * inv) % P).tolist() == [[P - 1, 0, 1], [P - 4, 0, 0]]
    stats = {}
    ext = qx.newton_extend(rel, u, v.truncate(b), B, ctx, stats)
    assert np.array_equal(ext.coeffs, v.coeffs[:B])
    assert stats["derivative_valuation"] == 0


def test_choose_prime_properties():
    B = 1000
    C = en.embedding_bound_C(en.power_basis(en.KF))
    p = qx.choose_prime(B, C, en.KF)
    assert en.is_prime(p)
    assert p >= qx.deligne_prime_bound(B, C)
    assert (p - 1) % (1 << (2 * B - 1).bit_length()) == 0
    assert len(en.roots_mod_p(en.KF.min_poly, p)) == 4


def test_crt_lift_roundtrip():
    C = en.embedding_bound_C(en.power_basis(en.KF))
    p = qx.choose_prime(64, C, en.KF)
    roots = en.roots_mod_p(en.KF.min_poly, p)
    rng = random.Random(2)
    lam = np.zeros((50, 4), dtype=np.int64)
    for n in range(1, 50):
        lam[n] = [rng.randint(-1, 1) for _ in range(4)]
    residues = [np.array([sum(int(x) * pow(r, j, p) for j, x in enumerate(row)) % p for row in lam], dtype=np.int64)
                for r in roots]
    back = qx.crt_deligne_lift(residues, roots, p, en.KF, C)
    assert np.array_equal(back, lam)


@pytest.fixture(scope="module")
def f0_seeded():
    src = qx.SeedSource(qx.F0)
    A = src.coefficients(400)
    return qx.QExpansion(qx.F0.label, "Q", A, qx.LEVEL, "trivial")


def test_seeded_f0_hecke_and_ramanujan(f0_seeded):
    assert [int(f0_seeded.coeffs[n][0]) for n in (1, 2, 3)] == [1, -1, -2]
    assert qx.check_hecke_relations(f0_seeded) == []
    assert qx.check_ramanujan(f0_seeded) == []


def test_hecke_check_flags_corruption(f0_seeded):
    bad = qx.QExpansion(f0_seeded.label, "Q", f0_seeded.coeffs.copy(), qx.LEVEL, "trivial")
    bad.coeffs[6][0] += 1
    assert 6 in qx.check_hecke_relations(bad)


def test_qexpansion_json_roundtrip(f0_seeded):
    back = qx.QExpansion.from_json(f0_seeded.to_json())
    assert np.array_equal(back.coeffs, f0_seeded.coeffs)


def test_seeded_f_first_coefficients():
    src = qx.SeedSource(qx.F_NEB)
    assert src.a_prime(2) == [0, 1, 0, 0]
    assert src.a_prime(3) == [3, 0, 1, 0]
