import random

import flint
import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from prym61 import lattice as lt

small = st.integers(-20, 20)


def square(n):
    return st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)


def _flint_rows(M):
    return [[int(M[i, j]) for j in range(M.ncols())] for i in range(M.nrows())]


@given(square(4))
@settings(max_examples=40, deadline=None)
def test_hnf_matches_flint_and_transform(A):
    H, U = lt.hnf(A)
    assert lt.matmul(U, A)[: len(H)] == H
    assert abs(lt.det_int(U)) == 1
    ref = [r for r in _flint_rows(flint.fmpz_mat(A).hnf()) if any(r)]
    assert H == ref


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_snf_matches_flint(A):
    S, U, V = lt.snf(A)
    assert lt.matmul(lt.matmul(U, A), V) == S
    ref = _flint_rows(flint.fmpz_mat(A).snf())
    assert [S[i][i] for i in range(3)] == [ref[i][i] for i in range(3)]


def test_snf_example():
    assert lt.elementary_divisors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]


def _random_alternating(rng, n):
    E = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            E[i][j] = rng.randint(-6, 6)
            E[j][i] = -E[i][j]
    return E


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_symplectic_basis(seed):
    rng = random.Random(seed)
    E = _random_alternating(rng, 6)
    if lt.det_int(E) == 0:
        return
    U, ds = lt.symplectic_basis(E)
    assert abs(lt.det_int(U)) == 1
    F = lt.matmul(lt.matmul(lt.transpose(U), E), U)
    for k, d in enumerate(ds):
        assert F[2 * k][2 * k + 1] == -d and F[2 * k + 1][2 * k] == d
    assert tuple(ds) == lt.polarization_type(E)
    assert all(ds[i + 1] % ds[i] == 0 for i in range(len(ds) - 1))


def test_polarization_type_standard():
    J = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -2], [0, 0, 2, 0]]
    assert lt.polarization_type(J) == (1, 2)
    with pytest.raises(ValueError):
        lt.symplectic_basis([[0, 1], [2, 0]])


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_lll_bound(seed):
    rng = random.Random(seed)
    B = [[rng.randint(-1000, 1000) for _ in range(5)] for _ in range(5)]
    if lt.det_int(B) == 0:
        return
    R, T = lt.lll_reduce(B, transform=True)
    assert lt.lll_bound_holds(R)
    assert lt.matmul(T, B) == R
    assert abs(lt.det_int(R)) == abs(lt.det_int(B))


def test_left_kernel_and_saturation():
    A = [[1, 2], [2, 4], [3, 6]]
    K = lt.integer_left_kernel(A)
    assert len(K) == 2
    for k in K:
        assert lt.matmul([k], A) == [[0, 0]]
    # 2*(1,1,0) spans a non-saturated lattice; saturation recovers (1,1,0)
    assert lt.saturate([[2, 2, 0]]) == [[1, 1, 0]]


def test_integer_kernel_numeric_finds_relation():
    dps = 200
    mpmath.mp.dps = dps + 20
    try:
        x = mpmath.sqrt(2)
        vals = [[mpmath.mpf(1)], [x], [x * x]]
        K = lt.integer_kernel_numeric(vals, dps)
    finally:
        mpmath.mp.dps = 15
    assert len(K) == 1
    v = K[0]
    if v[0] < 0:
        v = [-t for t in v]
    assert v == [2, 0, -1]


def test_integer_kernel_numeric_no_relation():
    dps = 200
    mpmath.mp.dps = dps + 20
    try:
        vals = [[mpmath.mpf(1)], [mpmath.pi], [mpmath.e]]
        K = lt.integer_kernel_numeric(vals, dps)
    finally:
        mpmath.mp.dps = 15
    assert K == []
