"""Integer lattices: LLL, numerical integer kernels, Hermite and Smith normal forms.

Matrices are plain lists of lists of Python ints (rows).  LLL itself is
delegated to FLINT; the normal forms are computed here with explicit
unimodular transforms so that callers can track bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import flint
import mpmath


class UnstableKernelError(RuntimeError):
    pass


@dataclass
class IntLattice:
    basis: list  # rows
    ambient_dim: int

    @property
    def rank(self) -> int:
        return len(self.basis)

    def hnf(self) -> list:
        return hnf(self.basis)[0]

    def __eq__(self, other):
        return isinstance(other, IntLattice) and self.ambient_dim == other.ambient_dim and self.hnf() == other.hnf()


def identity(n: int) -> list:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: list, b: list) -> list:
    bt = list(zip(*b)) if b else []
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a: list) -> list:
    return [list(r) for r in zip(*a)]


def det_int(a: list) -> int:
    if not a:
        return 1
    return int(flint.fmpz_mat(a).det())


def to_fmpz(a: list) -> "flint.fmpz_mat":
    if not a:
        return flint.fmpz_mat(0, 0)
    return flint.fmpz_mat(a)


def from_fmpz(m) -> list:
    return [[int(m[i, j]) for j in range(m.ncols())] for i in range(m.nrows())]


# ---------------------------------------------------------------------------
# LLL


def lll_reduce(B: list, delta: float = 0.99, transform: bool = False):
    """LLL-reduce the lattice spanned by the rows of B (zero rows dropped)."""
    rows = [list(map(int, r)) for r in B if any(r)]
    if not rows:
        return ([], []) if transform else []
    M = to_fmpz(rows)
    if transform:
        L, T = M.lll(transform=True, delta=delta)
        return from_fmpz(L), from_fmpz(T)
    return from_fmpz(M.lll(delta=delta))


def lll_bound_holds(reduced: list, delta: float = 0.99) -> bool:
    """First vector satisfies |b_1| <= 2^((m-1)/2) det^(1/m) (full-rank square input)."""
    m = len(reduced)
    d = abs(det_int(reduced))
    if d == 0:
        return False
    b1 = math.sqrt(sum(x * x for x in reduced[0]))
    return b1 <= 2 ** ((m - 1) / 2) * d ** (1 / m) * (1 + 1e-9)


# ---------------------------------------------------------------------------
# Hermite normal form (row style)


def hnf(A: Sequence[Sequence[int]]):
    """Row Hermite normal form.

    Returns (H, U) with U unimodular, U*A = H, H upper echelon with positive
    pivots and entries above each pivot reduced into [0, pivot).  Zero rows of
    H are removed; U keeps all rows (the extra rows of U span the left kernel).
    """
    A = [list(map(int, r)) for r in A]
    m = len(A)
    if m == 0:
        return [], []
    n = len(A[0])
    H = [r[:] for r in A]
    U = identity(m)
    r = 0
    for c in range(n):
        if r >= m:
            break
        # gcd-combine column c over rows r..m-1
        while True:
            nz = [i for i in range(r, m) if H[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(H[i][c]))
            if piv != r:
                H[r], H[piv] = H[piv], H[r]
                U[r], U[piv] = U[piv], U[r]
            done = True
            for i in range(r + 1, m):
                if H[i][c]:
                    q = H[i][c] // H[r][c]
                    if q:
                        H[i] = [x - q * y for x, y in zip(H[i], H[r])]
                        U[i] = [x - q * y for x, y in zip(U[i], U[r])]
                    if H[i][c]:
                        done = False
            if done:
                break
        if r < m and H[r][c] != 0:
            if H[r][c] < 0:
                H[r] = [-x for x in H[r]]
                U[r] = [-x for x in U[r]]
            for i in range(r):
                q = H[i][c] // H[r][c]
                if q:
                    H[i] = [x - q * y for x, y in zip(H[i], H[r])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[r])]
            r += 1
    return H[:r], U


def row_span_basis(vectors: Sequence[Sequence[int]]) -> list:
    """HNF basis of the Z-span of integer vectors."""
    return hnf(vectors)[0]


def saturate(basis: Sequence[Sequence[int]]) -> list:
    """Basis of (Q-span of basis) ∩ Z^n, as HNF rows."""
    if not basis:
        return []
    perp = integer_kernel(basis)
    if not perp:
        return identity(len(basis[0]))
    return hnf(integer_kernel(perp))[0]


def integer_left_kernel(A: Sequence[Sequence[int]]) -> list:
    """Saturated Z-basis (rows) of {x in Z^m : x A = 0} for an m x n integer matrix A."""
    A = [list(map(int, r)) for r in A]
    m = len(A)
    if m == 0:
        return []
    H, U = hnf(A)
    rank = len(H)
    K = U[rank:]
    if not K:
        return []
    return lll_reduce(K) if len(K) > 1 else K


def integer_kernel(A: Sequence[Sequence[int]]) -> list:
    """Saturated Z-basis of {x : A x = 0} (right kernel), rows."""
    return integer_left_kernel(transpose([list(r) for r in A])) if A else []


def rational_to_integer_rows(rows: Sequence[Sequence[Fraction]]):
    """Clear denominators of each row; returns (int rows, common denominators)."""
    out, dens = [], []
    for r in rows:
        d = 1
        for x in r:
            d = d * Fraction(x).denominator // math.gcd(d, Fraction(x).denominator)
        out.append([int(Fraction(x) * d) for x in r])
        dens.append(d)
    return out, dens


# ---------------------------------------------------------------------------
# Smith normal form


def snf(A: Sequence[Sequence[int]]):
    """Smith normal form with transforms: returns (S, U, V) with U*A*V = S.

    S is diagonal (rectangular) with nonnegative d_1 | d_2 | ... .  Computed by
    alternating row and column Hermite forms, which keeps entries small,
    followed by a gcd/lcm pass on the diagonal.
    """
    A = [list(map(int, r)) for r in A]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    V = identity(n)
    S = [r[:] for r in A]

    def is_diag(M):
        return all(M[i][j] == 0 for i in range(m) for j in range(n) if i != j)

    while not is_diag(S):
        H, U1 = hnf(S)
        S = H + [[0] * n for _ in range(m - len(H))]
        U = matmul(U1, U)
        if is_diag(S):
            break
        H2, V1 = hnf(transpose(S))
        S = transpose(H2 + [[0] * m for _ in range(n - len(H2))])
        V = matmul(V, transpose(V1))
    k = min(m, n)
    # move zeros to the end
    order = sorted(range(k), key=lambda i: S[i][i] == 0)
    if order != list(range(k)):
        P = [order + list(range(k, m))][0]
        Q = order + list(range(k, n))
        S = [[S[P[i]][Q[j]] for j in range(n)] for i in range(m)]
        U = [U[P[i]] for i in range(m)]
        V = [[row[Q[j]] for j in range(n)] for row in V]
    for i in range(k):
        if S[i][i] < 0:
            S[i][i] = -S[i][i]
            U[i] = [-x for x in U[i]]
    changed = True
    while changed:
        changed = False
        for i in range(k):
            for j in range(i + 1, k):
                a, b = S[i][i], S[j][j]
                if a == 0 or b % a == 0:
                    continue
                g, s_, t_ = _xgcd(a, b)
                Ui, Uj = U[i], U[j]
                U[i] = [s_ * x + t_ * y for x, y in zip(Ui, Uj)]
                U[j] = [(-b // g) * x + (a // g) * y for x, y in zip(Ui, Uj)]
                for row in V:
                    vi, vj = row[i], row[j]
                    row[i] = vi + vj
                    row[j] = -t_ * (b // g) * vi + s_ * (a // g) * vj
                S[i][i], S[j][j] = g, a * b // g
                changed = True
    return S, U, V


def _xgcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def elementary_divisors(A: Sequence[Sequence[int]]) -> list:
    S, _, _ = snf(A)
    k = min(len(S), len(S[0]) if S else 0)
    return [S[i][i] for i in range(k)]


def snf_elementary_divisors(E: Sequence[Sequence[int]]) -> list:
    return elementary_divisors(E)


def polarization_type(E: Sequence[Sequence[int]]) -> tuple:
    """Type (d_1, ..., d_n) of a nonsingular alternating integer matrix of size 2n."""
    d = [x for x in elementary_divisors(E)]
    if any(x == 0 for x in d):
        raise ValueError("degenerate alternating form")
    if len(d) % 2:
        raise ValueError("odd size")
    pairs = d[0::2]
    if d[1::2] != pairs:
        raise ValueError(f"elementary divisors {d} do not pair up")
    return tuple(pairs)


# ---------------------------------------------------------------------------
# symplectic normal form


def symplectic_basis(E: Sequence[Sequence[int]]):
    """Frobenius normal form of a nonsingular alternating integer matrix.

    Returns (U, d) with U unimodular and U^T E U block diagonal with blocks
    [[0, -d_k], [d_k, 0]] (d_1 | d_2 | ...), basis ordered e_1, f_1, e_2, f_2, ...
    """
    n = len(E)
    A = [list(map(int, r)) for r in E]
    for i in range(n):
        for j in range(n):
            if A[i][j] != -A[j][i]:
                raise ValueError("matrix is not alternating")
    U = identity(n)  # columns are the new basis vectors

    def col_op(dst, src, q):
        # basis vector dst -= q * basis vector src ; A <- P^T A P
        for row in U:
            row[dst] -= q * row[src]
        for k in range(n):
            A[k][dst] -= q * A[k][src]
        for k in range(n):
            A[dst][k] -= q * A[src][k]

    def swap(i, j):
        for row in U:
            row[i], row[j] = row[j], row[i]
        for k in range(n):
            A[k][i], A[k][j] = A[k][j], A[k][i]
        A[i], A[j] = A[j], A[i]

    def negate(i):
        for row in U:
            row[i] = -row[i]
        for k in range(n):
            A[k][i] = -A[k][i]
        A[i] = [-x for x in A[i]]

    ds = []
    t = 0
    while t < n:
        nz = [(abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, n) if i < j and A[i][j]]
        if not nz:
            raise ValueError("degenerate alternating form")
        _, i0, j0 = min(nz)
        swap(t, i0)
        swap(t + 1, j0)
        while True:
            if A[t][t + 1] == 0:
                raise RuntimeError("internal error in symplectic reduction")
            changed = False
            d = A[t][t + 1]
            for k in range(t + 2, n):
                # clear A[t][k] using f = t+1 : E(e_t, f - q e_{t+1})
                if A[t][k]:
                    q = A[t][k] // d
                    col_op(k, t + 1, q)
                    if A[t][k]:
                        swap(t + 1, k)
                        changed = True
                        break
                if A[t + 1][k]:
                    q = A[t + 1][k] // (-d)
                    col_op(k, t, q)
                    if A[t + 1][k]:
                        swap(t, k)
                        changed = True
                        break
            if changed:
                continue
            d = A[t][t + 1]
            bad = None
            for i in range(t + 2, n):
                for j in range(i + 1, n):
                    if A[i][j] % d:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            col_op(t, bad, -1)  # e_t += e_bad
        # want A[t][t+1] = -d with d > 0
        if A[t][t + 1] > 0:
            negate(t + 1)
        ds.append(-A[t][t + 1])
        t += 2
    return U, ds


# ---------------------------------------------------------------------------
# numerical integer kernels


def _ctx(dps: int):
    c = mpmath.MPContext()
    c.dps = dps
    return c


def _kernel_once(values, C, dps: int):
    """values[k][i] = l_i(e_k).  Returns the LLL basis rows and augmented norms."""
    ctx = _ctx(dps)
    m = len(values)
    rows = []
    Cm = ctx.mpf(C)
    for k in range(m):
        aug = [int(ctx.nint(Cm * ctx.mpf(v))) for v in values[k]]
        rows.append([int(i == k) for i in range(m)] + aug)
    red = lll_reduce(rows)
    return red


def integer_kernel_numeric(values: Sequence[Sequence], dps: int, C_exp: int | None = None,
                           tol_exp: int | None = None, check_stability: bool = True) -> list:
    """Z-basis of integer vectors v with all |l_i(v)| small.

    ``values[k][i]`` is the real number l_i(e_k) (mpmath mpf or anything mpf()
    accepts), known to about ``dps`` digits.  The scale is C = 10^C_exp with
    C_exp = dps - 100 by default; reduced rows are accepted when all their
    entries (coefficients and scaled images) are below 10^(C_exp/4), and afterwards re-verified against the unscaled forms
    with tolerance 10^tol_exp (default: -dps/2 + 100).
    """
    m = len(values)
    if m == 0:
        return []
    if C_exp is None:
        C_exp = dps - 100
    if tol_exp is None:
        tol_exp = -dps // 2 + 100
    ctx = _ctx(dps + 20)

    def run(cexp):
        red = _kernel_once(values, ctx.mpf(10) ** cexp, dps + 20)
        # genuine relations are short; the rest of the reduced basis has
        # entries of size about sqrt(C) or more
        thresh = 10 ** max(cexp // 4, 1)
        good = []
        for r in red:
            if max(abs(x) for x in r) < thresh:
                good.append(r[:m])
        return good

    good = run(C_exp)
    basis = lll_reduce(good) if good else []
    tol = ctx.mpf(10) ** tol_exp
    nforms = len(values[0])
    for v in basis:
        for i in range(nforms):
            s = ctx.fsum(ctx.mpf(values[k][i]) * v[k] for k in range(m) if v[k])
            if abs(s) > tol:
                raise UnstableKernelError(f"kernel vector fails re-evaluation: |l(v)| = {mpmath.nstr(abs(s), 5)}")
    if check_stability:
        other = run(C_exp + 1)
        if len(other) != len(basis) or (basis and hnf(other)[0] != hnf(basis)[0]):
            raise UnstableKernelError(
                f"kernel dimension unstable under C -> 10C ({len(basis)} vs {len(other)}); increase precision"
            )
    return basis
