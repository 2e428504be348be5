import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from prym61 import apfloat as ap


def _rand_matrix(rng, n, m, D):
    return ap.ComplexMatrix([[complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(m)] for _ in range(n)], D)


def test_complex_structure_of_unit_lattice():
    D = 100
    c = ap.ctx_for(D)
    Pi = ap.ComplexMatrix([[1, c.mpc(0, 1)]], D)
    J, res = ap.cmat_solve_right(Pi, Pi.scale(c.mpc(0, 1)), real=True)
    assert [[int(c.nint(x.real)) for x in r] for r in J.entries] == [[0, -1], [1, 0]]
    assert res < c.mpf(10) ** (-D + 10)


def test_solve_identity_returns_rhs():
    D = 60
    rng = random.Random(1)
    B = _rand_matrix(rng, 3, 2, D)
    X, _ = ap.cmat_solve_right(ap.ComplexMatrix.identity(3, D), B)
    assert (X - B).max_abs() == 0


@pytest.mark.parametrize("D", [100, 300])
def test_random_system_residual(D):
    rng = random.Random(D)
    # diagonally dominant, so well conditioned
    A = _rand_matrix(rng, 4, 4, D) + ap.ComplexMatrix.identity(4, D).scale(5)
    X0 = _rand_matrix(rng, 4, 2, D)
    X, res = ap.cmat_solve_right(A, A @ X0)
    assert res < mpmath.mpf(10) ** (-D + 20)
    assert (X - X0).max_abs() < mpmath.mpf(10) ** (-D + 20)


def test_inconsistent_system_raises():
    D = 100
    A = ap.ComplexMatrix([[1], [1]], D)
    B = ap.ComplexMatrix([[1], [2]], D)
    with pytest.raises(ap.InconsistentSystemError):
        ap.cmat_solve_right(A, B)


def test_positive_definite_examples():
    D = 60
    c = ap.ctx_for(D)
    assert ap.is_positive_definite(ap.ComplexMatrix.identity(3, D))
    assert not ap.is_positive_definite(ap.ComplexMatrix([[1, 0], [0, -1]], D))
    # i Pi E^{-1} Pi^* for Pi = (1, i), E = [[0,-1],[1,0]] is the scalar 2
    Pi = ap.ComplexMatrix([[1, c.mpc(0, 1)]], D)
    Einv = ap.ComplexMatrix([[0, 1], [-1, 0]], D)
    H = (Pi @ Einv @ Pi.conj_transpose()).scale(c.mpc(0, 1))
    assert abs(H[0, 0] - 2) < c.mpf(10) ** -50
    assert ap.is_positive_definite(H)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        ap.is_positive_definite(ap.ComplexMatrix([[1, 1], [0, 1]], 100))


def test_mixed_precision_rejected():
    with pytest.raises(ap.PrecisionError):
        ap.ComplexMatrix.identity(2, 30) @ ap.ComplexMatrix.identity(2, 40)
    with pytest.raises(ap.PrecisionError):
        ap.big(1, 30) + ap.big(1, 40)


@given(st.integers(0, 10**6))
@settings(max_examples=10, deadline=None)
def test_matmul_associative(seed):
    rng = random.Random(seed)
    for D in (100, 300):
        A, B, C = (_rand_matrix(rng, 3, 3, D) for _ in range(3))
        assert ((A @ B) @ C - A @ (B @ C)).max_abs() < mpmath.mpf(10) ** (-D + 60)


@given(st.integers(0, 10**6))
@settings(max_examples=10, deadline=None)
def test_cholesky_reconstruction(seed):
    D = 100
    rng = random.Random(seed)
    M = _rand_matrix(rng, 4, 4, D)
    H = M @ M.conj_transpose() + ap.ComplexMatrix.identity(4, D)
    L, _ = ap.cholesky(H)
    assert L is not None
    assert (L @ L.conj_transpose() - H).max_abs() < mpmath.mpf(10) ** (-D + 60)


def test_exp_q_values():
    D = 80
    c = ap.ctx_for(D)
    q = ap.exp_q(c.mpc(0, 1), D)
    assert abs(q - c.exp(-2 * c.pi)) < c.mpf(10) ** (-D)
    q1 = ap.exp_q(c.mpc(1, 1), D)
    assert q1 == q
    assert abs(ap.radius_R(1, 61, D) - c.exp(-2 * c.pi / c.sqrt(61))) < c.mpf(10) ** (-D)


@given(st.floats(-5, 5), st.floats(0.01, 3))
@settings(max_examples=30, deadline=None)
def test_exp_q_periodic(x, y):
    D = 40
    c = ap.ctx_for(D)
    a = ap.exp_q(c.mpc(x, y), D)
    b = ap.exp_q(c.mpc(c.mpf(x) + 1, y), D)
    assert abs(a - b) < c.mpf(10) ** (-D + 5)
    assert abs(a) < 1


def test_json_roundtrip():
    D = 50
    M = _rand_matrix(random.Random(3), 2, 3, D)
    back = ap.ComplexMatrix.from_json(M.to_json())
    assert (back - M).max_abs() < mpmath.mpf(10) ** (-D + 2)
