import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prym61 import modsym as ms

P4 = (13, 0, 8, 0, 1)


def genus_gamma_H(p, H):
    """Genus of X_H(p) for p prime and -1 in H, from the index/elliptic/cusp formula."""
    H = set(H)
    assert p - 1 in H
    k = (p - 1) // len(H)
    mu = k * (p + 1)
    nu2 = k * sum(1 for x in range(1, p) if (x * x + 1) % p == 0 and x in H)
    nu3 = k * sum(1 for x in range(1, p) if (x * x + x + 1) % p == 0 and x in H)
    cusps = 2 * k
    g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    assert g.denominator == 1
    return int(g)


@pytest.fixture(scope="module")
def S61():
    return ms.build_space(61, ms.squares_subgroup(61))


@pytest.mark.parametrize("N,kind", [(11, "full"), (23, "full"), (37, "full"), (13, "squares"),
                                    (29, "squares"), (61, "full"), (61, "squares")])
def test_cuspidal_rank_matches_genus_formula(N, kind):
    H = ms.full_subgroup(N) if kind == "full" else ms.squares_subgroup(N)
    S = ms.build_space(N, H)
    g = genus_gamma_H(N, H)
    assert S.cuspidal_rank == 2 * g
    assert S.genus_from_cosets() == g


def test_level_one_is_empty():
    assert ms.build_space(1).cuspidal_rank == 0


def test_level_11_T2():
    S = ms.build_space(11)
    assert S.cuspidal_rank == 2
    assert S.hecke_matrix(2).charpoly() == [4, 4, 1]  # (x + 2)^2


def test_T2_factor_degrees(S61):
    facs = ms.factor_poly_Z(S61.hecke_matrix(2).charpoly())
    assert sorted(len(f) - 1 for f, _ in facs) == [1, 3, 4]
    assert (list(P4), 2) in facs


def _mul(A, B):
    return [[sum(a * b for a, b in zip(r, c)) for c in zip(*B)] for r in A]


def test_hecke_commute_and_multiplicative(S61):
    T2, T3, T6 = (S61.hecke_matrix(n).matrix for n in (2, 3, 6))
    assert _mul(T2, T3) == _mul(T3, T2)
    assert _mul(T2, T3) == T6
    assert all(isinstance(x, int) for r in T2 for x in r)


def test_isotypic_ranks(S61):
    assert len(ms.isotypic_sublattice(S61, P4, 2)) == 8
    assert ms.isotypic_sublattice(S61, (-100, 1), 2) == []  # 100 is not an eigenvalue
    cp = [int(c) for c in S61.hecke_matrix(2).charpoly()]
    assert len(ms.isotypic_sublattice(S61, cp, 2)) == 16


def test_trivial_winding_element(S61):
    W = ms.winding_decompose(S61, ms.Character(1, 0))
    assert W.vector == [ms.path_vector(S61, 0, 1)]


def test_continued_fraction_thirds():
    # convergents 0/1, 1/3 and 0/1, 1/1, 2/3; pairs are ((-1)^(j-1) q_j, q_{j-1})
    assert ms.continued_fraction_symbols(1, 3) == [(-1, 0), (3, 1)]
    assert ms.continued_fraction_symbols(2, 3) == [(-1, 0), (1, 1), (-3, 1)]


@given(st.integers(1, 500), st.integers(1, 500))
@settings(max_examples=80, deadline=None)
def test_continued_fraction_pairs_are_coprime(a, m):
    for c, d in ms.continued_fraction_symbols(a, m):
        assert math.gcd(c, d) == 1


def test_modulus_seven_characters(S61):
    chars = ms.primitive_characters(7)
    assert len(chars) == 5  # phi(7) - 1 nontrivial characters, all primitive
    for chi in chars:
        W = ms.winding_decompose(S61, chi)
        assert any(any(x for x in v) for v in W.vector)


def test_winding_rejects_level_divisor():
    S = ms.build_space(11)
    chi = ms.primitive_characters(11)[0]
    with pytest.raises(ValueError):
        ms.winding_decompose(S, chi)


def test_express_homology(S61):
    sub = ms.sublattice_in_space(S61, ms.isotypic_sublattice(S61, P4, 2))
    proj = ms.IsotypicProjector(S61, [(2, P4)])
    gens = [((c, i), v) for c, i, v in ms.rational_generators(S61)]
    expr = ms.express_homology_in_winding(S61, sub, gens, proj, 2, 4)
    assert len(expr.coeffs) == 8
    # reassemble gamma_j from the coefficients
    T = S61.hecke_full(2)
    trans = []
    for _, v in gens:
        x = proj(v)
        row = []
        for _ in range(4):
            row.append(x)
            x = ms.vec_mat(x, T)
        trans.append(row)
    for gamma, cj in zip(sub, expr.coeffs):
        acc = [Fraction(0)] * S61.dim
        for k in range(4):
            for g, c in enumerate(cj[k]):
                if c:
                    acc = [a + c * b for a, b in zip(acc, trans[g][k])]
        assert acc == list(gamma)
    back = ms.WindingExpression.from_json(expr.to_json())
    assert back.coeffs == expr.coeffs


def test_express_homology_trivial_only_is_deficient(S61):
    sub = ms.sublattice_in_space(S61, ms.isotypic_sublattice(S61, P4, 2))
    proj = ms.IsotypicProjector(S61, [(2, P4)])
    triv = [((c, i), v) for c, i, v in ms.rational_generators(S61, (1,))]
    with pytest.raises(ms.SpanDeficiencyError):
        ms.express_homology_in_winding(S61, sub, triv, proj, 2, 4)
    assert ms.express_homology_in_winding(S61, [], triv, proj, 2, 4).coeffs == []


def test_eigen_seeds(S61):
    seeds = ms.EigenSeeds(S61, P4, 2)
    assert seeds.coefficients(2) == [0, 1, 0, 0]
    assert seeds.coefficients(3) == [3, 0, 1, 0]
    seeds0 = ms.EigenSeeds(ms.build_space(61), (1, 1), 2)
    assert seeds0.coefficients(2) == [-1]
    assert seeds0.coefficients(3) == [-2]
