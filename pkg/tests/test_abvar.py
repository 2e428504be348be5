import itertools

import mpmath
import pytest
import sympy

from prym61 import abvar as av
from prym61 import lattice as lt
from prym61.apfloat import ComplexMatrix, ctx_for

D = 120


def product_periods(t1, t2, d1=1, d2=1):
    """Period matrix of E_t1 x E_t2 in the basis (d1, d1 t1, d2, d2 t2)-scaled columns."""
    return ComplexMatrix([[1, t1, 0, 0], [0, 0, 1, t2]], D)


@pytest.fixture(scope="module")
def cm_square():
    c = ctx_for(D)
    i = c.mpc(0, 1)
    return product_periods(i, i)


@pytest.fixture(scope="module")
def generic_product():
    c = ctx_for(D)
    t1 = c.mpc(c.e / 5, c.pi / 3)
    t2 = c.mpc(c.sqrt(2) / 3, 2 * c.euler + 1)
    return product_periods(t1, t2)


def test_complex_structure_squares_to_minus_one(cm_square):
    J, res = av.complex_structure(cm_square)
    c = cm_square.ctx
    assert av.j_squared_residual(J, c) < c.mpf(10) ** (-D + 60)


def test_neron_severi_ranks(cm_square, generic_product):
    # rho(E x E) = 2 + rank End(E): 4 with CM, 2 for non-isogenous factors
    assert len(av.ns_lattice(cm_square)) == 4
    assert len(av.ns_lattice(generic_product)) == 2


def test_endomorphism_ranks(cm_square, generic_product):
    ends = av.endomorphism_lattice(cm_square)
    assert len(ends) == 8  # M_2(Z[i])
    assert ends[0].R == lt.identity(4)
    c = cm_square.ctx
    for e in ends:
        assert e.residual < c.mpf(10) ** (-D + 60)
    assert len(av.endomorphism_lattice(generic_product)) == 2  # Z x Z


def test_find_polarization_principal(generic_product):
    P = av.find_polarization(generic_product, seed=0)
    assert P.type == (1, 1)
    assert av.is_polarization(generic_product, P.E)
    J, _ = av.complex_structure(generic_product)
    c = generic_product.ctx
    assert av.riemann_residual(P.E, J, c) < c.mpf(10) ** (-D + 60)
    assert not av.is_polarization(generic_product, [[-x for x in r] for r in P.E])


def test_find_polarization_type_12(generic_product):
    P = av.find_polarization(generic_product, target_type=(1, 2), seed=1)
    assert P.type == (1, 2)


def test_idempotents_of_product(generic_product):
    ends = [e.R for e in av.endomorphism_lattice(generic_product)]
    ids = av.find_idempotents(ends, 16)
    assert sorted(map(tuple, (tuple(x for r in R for x in r) for R in ids))) == sorted(
        [tuple(x for r in R for x in r) for R in (
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
            [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])])


def test_split_quotient_of_product(generic_product):
    E = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -2], [0, 0, 2, 0]]
    if not av.is_polarization(generic_product, E):
        E = [[-x for x in r] for r in E]
    R = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    fac = av.split_quotient(generic_product, E, R)
    assert fac.Pi.rows == 1
    assert lt.polarization_type(fac.E) == (1,)


def _eichler_trace_form_sympy():
    """Trace form of {[[a, b], [c, d]] : c in (4 + sqrt3)} over Z[sqrt3], by direct 2x2 algebra."""
    s = sympy.sqrt(3)
    pi = 4 + s
    elems = []
    for (i, j) in ((0, 0), (0, 1), (1, 1)):
        for u in (1, s):
            m = sympy.zeros(2, 2)
            m[i, j] = u
            elems.append(m)
    for u in (pi, pi * s):
        m = sympy.zeros(2, 2)
        m[1, 0] = u
        elems.append(m)

    def tr(x):  # 8x8 representation trace = 2 * Tr_{K/Q}(reduced trace)
        t = sympy.expand((x).trace())
        a = t.subs(s, 0)
        return int(2 * 2 * a)

    G = sympy.Matrix(8, 8, lambda i, j: tr(elems[i] * elems[j]))
    return G


def test_eichler_fixture_against_direct_computation():
    basis = av.eichler_order_basis()
    G = _eichler_trace_form_sympy()
    assert av.trace_form(basis) == [[int(x) for x in G.row(i)] for i in range(8)]
    from sympy.matrices.normalforms import smith_normal_form
    snf = smith_normal_form(G, domain=sympy.ZZ)
    ref = tuple(sorted(abs(int(snf[i, i])) for i in range(8)))
    assert tuple(sorted(av.ring_invariant(basis))) == ref
    assert av.sublattice_index(basis, av.m2_zsqrt3_basis()) == 13
    av.multiplication_table(basis)  # closed under products


def test_maximal_isotropic_count():
    # Lagrangian planes in a 4-dimensional symplectic F_2-space: (2 + 1)(4 + 1)
    subs = av.maximal_isotropic_subgroups()
    assert len(subs) == 15
    for a, b in subs:
        assert av.weil_form_f2(a, b) == 0


def test_glue_toy():
    c = ctx_for(D)
    Pi2 = product_periods(c.mpc(c.e / 5, c.pi / 3), c.mpc(c.sqrt(2) / 3, 2 * c.euler + 1))
    E2 = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -2], [0, 0, 2, 0]]
    assert av.is_polarization(Pi2, E2)
    Pi1 = ComplexMatrix([[1, c.mpc(c.sqrt(3) / 7, c.log(5))]], D)
    E1 = [[0, -1], [1, 0]]
    cands = av.glue(Pi2, E2, Pi1, E1, with_theta=False)
    assert len(cands) == 15
    E3p = [[0] * 6 for _ in range(6)]
    for i, j in itertools.product(range(4), repeat=2):
        E3p[i][j] = E2[i][j]
    E3p[4][5], E3p[5][4] = -2, 2
    for cand in cands:
        assert lt.polarization_type(cand.E3) == (1, 1, 1)
        assert av.induce_restriction(cand.E3, cand.R3) == E3p


def test_theta_constants_genus_one():
    c = mpmath.MPContext()
    c.dps = 30
    tau = c.matrix([[c.mpc("0.1", "1.3")]])
    th = av.theta_constants(tau, c)
    q = c.expjpi(tau[0, 0])
    assert abs(th[((0,), (0,))] - c.jtheta(3, 0, q)) < c.mpf(10) ** -25
    assert abs(th[((0,), (1,))] - c.jtheta(4, 0, q)) < c.mpf(10) ** -25
    assert abs(th[((1,), (0,))] - c.jtheta(2, 0, q)) < c.mpf(10) ** -25
    assert abs(th[((1,), (1,))]) < c.mpf(10) ** -25


def test_theta_classify_product_is_decomposable():
    c = mpmath.MPContext()
    c.dps = 30
    tau = c.matrix([[c.mpc(0, 1), 0, 0], [0, c.mpc("0.2", "1.1"), 0], [0, 0, c.mpc("-0.3", "1.5")]])
    res = av.classify_theta(av.theta_constants(tau, c), 3)
    assert res["classification"] == "decomposable"
    assert len(av.even_characteristics(3)) == 36
