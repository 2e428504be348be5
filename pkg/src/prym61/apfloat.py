"""Arbitrary-precision complex numbers and small dense complex linear algebra.

Every value carries its decimal precision D.  Arithmetic runs in a private
mpmath context with D + GUARD digits, so nothing here touches mpmath's global
context.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

import mpmath

GUARD = 50


class PrecisionError(ValueError):
    pass


class InconsistentSystemError(ArithmeticError):
    def __init__(self, residual):
        super().__init__(f"inconsistent system: residual {mpmath.nstr(residual, 5)}")
        self.residual = residual


@functools.lru_cache(maxsize=None)
def ctx_for(D: int) -> mpmath.ctx_mp.MPContext:
    """Private mpmath context working at D + GUARD digits."""
    c = mpmath.MPContext()
    c.dps = D + GUARD
    return c


@dataclass(frozen=True)
class BigComplex:
    value: object  # mpc in ctx_for(D)
    D: int

    def _check(self, other):
        if isinstance(other, BigComplex):
            if other.D != self.D:
                raise PrecisionError(f"mixed precision {self.D} vs {other.D}")
            return other.value
        return ctx_for(self.D).mpc(other)

    def __add__(self, o):
        return BigComplex(self.value + self._check(o), self.D)

    __radd__ = __add__

    def __sub__(self, o):
        return BigComplex(self.value - self._check(o), self.D)

    def __mul__(self, o):
        return BigComplex(self.value * self._check(o), self.D)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return BigComplex(self.value / self._check(o), self.D)

    def __neg__(self):
        return BigComplex(-self.value, self.D)

    def __abs__(self):
        return abs(self.value)

    def conjugate(self):
        return BigComplex(ctx_for(self.D).conj(self.value), self.D)

    def to_json(self) -> list:
        return [mpmath.nstr(self.value.real, self.D, min_fixed=1, max_fixed=0),
                mpmath.nstr(self.value.imag, self.D, min_fixed=1, max_fixed=0)]

    @classmethod
    def from_json(cls, pair, D: int):
        c = ctx_for(D)
        return cls(c.mpc(c.mpf(pair[0]), c.mpf(pair[1])), D)


def big(z, D: int) -> BigComplex:
    return BigComplex(ctx_for(D).mpc(z), D)


def exp_q(z, D: int):
    """q = exp(2 pi i z) with the real part of z reduced mod 1 first."""
    c = ctx_for(D)
    if isinstance(z, BigComplex):
        if z.D != D:
            raise PrecisionError("mixed precision")
        z = z.value
    z = c.mpc(z)
    x = z.real - c.floor(z.real)
    return c.expjpi(2 * c.mpc(x, z.imag))


def radius_R(m: int, N: int, D: int):
    """R = exp(-2 pi / (m sqrt(N)))."""
    c = ctx_for(D)
    return c.exp(-2 * c.pi / (m * c.sqrt(N)))


class ComplexMatrix:
    """Dense rectangular complex matrix at precision D (entries are mpc)."""

    __slots__ = ("rows", "cols", "entries", "D")

    def __init__(self, entries: Sequence[Sequence], D: int):
        c = ctx_for(D)
        self.entries = [[c.mpc(x) for x in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        if any(len(r) != self.cols for r in self.entries):
            raise ValueError("ragged matrix")
        self.D = D

    @property
    def ctx(self):
        return ctx_for(self.D)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def _same(self, other: "ComplexMatrix"):
        if other.D != self.D:
            raise PrecisionError(f"mixed precision {self.D} vs {other.D}")

    def __matmul__(self, other):
        if isinstance(other, ComplexMatrix):
            self._same(other)
            o = other.entries
        else:
            o = [[self.ctx.mpc(x) for x in row] for row in other]
        if self.cols != len(o):
            raise ValueError("shape mismatch")
        fsum = self.ctx.fsum
        ot = list(zip(*o))
        return ComplexMatrix([[fsum(a * b for a, b in zip(row, col)) for col in ot] for row in self.entries], self.D)

    def __rmatmul__(self, other):
        return ComplexMatrix(other, self.D) @ self

    def __add__(self, other):
        self._same(other)
        return ComplexMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.D)

    def __sub__(self, other):
        self._same(other)
        return ComplexMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.D)

    def scale(self, s):
        return ComplexMatrix([[s * a for a in r] for r in self.entries], self.D)

    def conj_transpose(self):
        cj = self.ctx.conj
        return ComplexMatrix([[cj(self.entries[i][j]) for i in range(self.rows)] for j in range(self.cols)], self.D)

    def transpose(self):
        return ComplexMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)], self.D)

    def real_part(self):
        return [[x.real for x in r] for r in self.entries]

    def imag_part(self):
        return [[x.imag for x in r] for r in self.entries]

    def max_abs(self):
        return max((abs(x) for r in self.entries for x in r), default=self.ctx.mpf(0))

    def columns(self, idx: Sequence[int]):
        return ComplexMatrix([[r[j] for j in idx] for r in self.entries], self.D)

    def rows_sel(self, idx: Sequence[int]):
        return ComplexMatrix([self.entries[i] for i in idx], self.D)

    def to_mp(self):
        c = self.ctx
        M = c.matrix(self.rows, self.cols)
        for i in range(self.rows):
            for j in range(self.cols):
                M[i, j] = self.entries[i][j]
        return M

    @classmethod
    def from_mp(cls, M, D: int):
        return cls([[M[i, j] for j in range(M.cols)] for i in range(M.rows)], D)

    @classmethod
    def identity(cls, n: int, D: int):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], D)

    def to_json(self) -> dict:
        nd = self.D
        return {
            "precision": self.D,
            "rows": self.rows,
            "cols": self.cols,
            "entries": [
                [[mpmath.nstr(x.real, nd, min_fixed=1, max_fixed=0), mpmath.nstr(x.imag, nd, min_fixed=1, max_fixed=0)]
                 for x in r]
                for r in self.entries
            ],
        }

    @classmethod
    def from_json(cls, obj: dict):
        D = int(obj["precision"])
        c = ctx_for(D)
        return cls([[c.mpc(c.mpf(a), c.mpf(b)) for a, b in r] for r in obj["entries"]], D)


def real_matrix_to_mp(M, D: int):
    c = ctx_for(D)
    out = c.matrix(len(M), len(M[0]))
    for i, r in enumerate(M):
        for j, x in enumerate(r):
            out[i, j] = c.mpf(x)
    return out


def _solve_pivoted(ctx, A, B, thresh):
    """Gaussian elimination with complete column pivoting on a (possibly
    overdetermined) system A X = B; returns X and the list of pivot columns."""
    m, n = A.rows, A.cols
    k = B.cols
    M = [[A[i, j] for j in range(n)] + [B[i, j] for j in range(k)] for i in range(m)]
    piv_cols = []
    r = 0
    for c_ in range(n):
        best, bi = ctx.mpf(0), None
        for i in range(r, m):
            if abs(M[i][c_]) > best:
                best, bi = abs(M[i][c_]), i
        if bi is None or best < thresh:
            continue
        M[r], M[bi] = M[bi], M[r]
        inv = 1 / M[r][c_]
        M[r] = [x * inv for x in M[r]]
        for i in range(m):
            if i != r and M[i][c_] != 0:
                f = M[i][c_]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c_)
        r += 1
        if r == m:
            break
    X = ctx.matrix(n, k)
    for row, c_ in enumerate(piv_cols):
        for j in range(k):
            X[c_, j] = M[row][n + j]
    return X, piv_cols


def cmat_solve_right(A: ComplexMatrix, B: ComplexMatrix, real: bool = False, tol_digits: int = GUARD):
    """Solve A X = B.

    With ``real=True`` the unknown X is a real matrix (the system is split into
    real and imaginary parts), which is how iPi = Pi J is solved for J.
    Returns (X, residual) where X is a ComplexMatrix (real entries if ``real``).
    Raises InconsistentSystemError if the residual exceeds 10^(-D + tol_digits).
    """
    if A.D != B.D:
        raise PrecisionError("mixed precision")
    D = A.D
    c = ctx_for(D)
    if real:
        Ar = ComplexMatrix([[x.real for x in r] for r in A.entries] + [[x.imag for x in r] for r in A.entries], D)
        Br = ComplexMatrix([[x.real for x in r] for r in B.entries] + [[x.imag for x in r] for r in B.entries], D)
        X, _ = _solve_pivoted(c, Ar, Br, c.mpf(10) ** (-D + GUARD))
    else:
        X, _ = _solve_pivoted(c, A, B, c.mpf(10) ** (-D + GUARD))
    Xm = ComplexMatrix.from_mp(X, D)
    res = (A @ Xm - B).max_abs()
    scale = max(A.max_abs(), c.mpf(1)) * max(Xm.max_abs(), c.mpf(1))
    if res > scale * c.mpf(10) ** (-D + tol_digits):
        raise InconsistentSystemError(res)
    return Xm, res


def cholesky(H: ComplexMatrix):
    """Hermitian Cholesky H = L L*; returns (L, pivots) or (None, pivots) on failure."""
    c = H.ctx
    n = H.rows
    L = [[c.mpc(0)] * n for _ in range(n)]
    pivots = []
    thresh = c.mpf(10) ** (-(H.D // 2))
    for j in range(n):
        s = H[j, j] - c.fsum(L[j][k] * c.conj(L[j][k]) for k in range(j))
        d = s.real
        pivots.append(d)
        if d <= thresh:
            return None, pivots
        ljj = c.sqrt(d)
        L[j][j] = c.mpc(ljj)
        for i in range(j + 1, n):
            t = H[i, j] - c.fsum(L[i][k] * c.conj(L[j][k]) for k in range(j))
            L[i][j] = t / ljj
    return ComplexMatrix(L, H.D), pivots


def is_positive_definite(H: ComplexMatrix) -> bool:
    c = H.ctx
    if H.rows != H.cols:
        raise ValueError("not square")
    tol = c.mpf(10) ** (-H.D + GUARD) * max(H.max_abs(), c.mpf(1))
    if (H - H.conj_transpose()).max_abs() > tol:
        raise ValueError("matrix is not Hermitian")
    L, _ = cholesky(H)
    return L is not None
