"""Numerical abelian varieties given by period matrices.

A period matrix Pi (g x 2g) defines A = C^g / Pi Z^2g.  This module finds
its complex structure, Riemann forms and endomorphisms by integer-relation
detection, splits off factors with idempotents, and glues a (1,2)-polarized
surface with an elliptic curve into principally polarized threefolds.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from . import lattice as lt
from .apfloat import GUARD, ComplexMatrix, cmat_solve_right, ctx_for, is_positive_definite
from .periods import PeriodMatrix, elliptic_lattice

log = logging.getLogger(__name__)


class PolarizationNotFound(RuntimeError):
    pass


class IdempotentNotFound(RuntimeError):
    pass


def _kernel_params(D: int) -> dict:
    """Scale and tolerances for integer relations among D-digit reals."""
    slack = min(100, D // 3)
    return {"C_exp": D - slack, "tol_exp": -D // 2 + min(100, D // 4)}


# ---------------------------------------------------------------------------
# complex structure


def complex_structure(Pi: ComplexMatrix):
    """Real 2g x 2g J with i Pi = Pi J, as a list of lists of mpf."""
    c = Pi.ctx
    iPi = Pi.scale(c.mpc(0, 1))
    X, res = cmat_solve_right(Pi, iPi, real=True, tol_digits=60)
    J = [[x.real for x in row] for row in X.entries]
    return J, res


def real_mat_mul(A, B, c):
    Bt = list(zip(*B))
    return [[c.fsum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def j_squared_residual(J, c):
    n = len(J)
    J2 = real_mat_mul(J, J, c)
    return max(abs(J2[i][j] + (1 if i == j else 0)) for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# polarizations


@dataclass
class AlternatingForm:
    E: list

    def __post_init__(self):
        n = len(self.E)
        for i in range(n):
            for j in range(n):
                if self.E[i][j] != -self.E[j][i]:
                    raise ValueError("form is not alternating")

    @property
    def type(self) -> tuple:
        return lt.polarization_type(self.E)

    def to_json(self):
        return {"E": self.E}


def _alt_basis(n: int) -> list:
    out = []
    for a in range(n):
        for b in range(a + 1, n):
            E = [[0] * n for _ in range(n)]
            E[a][b] = -1
            E[b][a] = 1
            out.append(E)
    return out


def riemann_residual(E, J, c) -> object:
    """max |J^t E J - E|."""
    n = len(E)
    JT = [list(r) for r in zip(*J)]
    M = real_mat_mul(real_mat_mul(JT, [[c.mpf(x) for x in r] for r in E], c), J, c)
    return max(abs(M[i][j] - E[i][j]) for i in range(n) for j in range(n))


def hermitian_form(Pi: ComplexMatrix, E) -> ComplexMatrix:
    """i Pi E^-1 Pi^*."""
    n = len(E)
    Einv = [[Fraction(x) for x in r] for r in _rat_inverse(E)]
    c = Pi.ctx
    Em = ComplexMatrix([[c.mpf(x.numerator) / x.denominator for x in r] for r in Einv], Pi.D)
    return (Pi @ Em @ Pi.conj_transpose()).scale(c.mpc(0, 1))


def _rat_inverse(M) -> list:
    import flint

    A = flint.fmpq_mat(len(M), len(M), [int(x) for r in M for x in r])
    inv = A.inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(len(M))] for i in range(len(M))]


def is_polarization(Pi: ComplexMatrix, E) -> bool:
    H = hermitian_form(Pi, E)
    return is_positive_definite(H)


def ns_lattice(Pi: ComplexMatrix, J=None) -> list:
    """Z-basis of alternating integer E with J^t E J = E (the Neron-Severi lattice)."""
    c = Pi.ctx
    D = Pi.D
    if J is None:
        J, _ = complex_structure(Pi)
    n = len(J)
    JT = [list(r) for r in zip(*J)]
    basis = _alt_basis(n)
    values = []
    for E in basis:
        Em = [[c.mpf(x) for x in r] for r in E]
        M = real_mat_mul(real_mat_mul(JT, Em, c), J, c)
        values.append([M[a][b] - E[a][b] for a in range(n) for b in range(a + 1, n)])
    kern = lt.integer_kernel_numeric(values, D, **_kernel_params(D))
    out = []
    for v in kern:
        E = [[0] * n for _ in range(n)]
        for coef, B in zip(v, basis):
            if coef:
                for a in range(n):
                    for b in range(n):
                        E[a][b] += coef * B[a][b]
        out.append(E)
    return out


def find_polarization(Pi: ComplexMatrix, target_type: tuple | None = None, seed: int = 0,
                      budget: int = 20000, coeff_range: int = 2, J=None, ns_basis=None) -> AlternatingForm:
    """Random small combinations of the Neron-Severi basis until one is a polarization
    (of the requested type, default principal)."""
    c = Pi.ctx
    g = Pi.rows
    if target_type is None:
        target_type = (1,) * g
    if J is None:
        J, _ = complex_structure(Pi)
    basis = ns_basis if ns_basis is not None else ns_lattice(Pi, J)
    r = len(basis)
    if r == 0:
        raise PolarizationNotFound("no integral alternating forms compatible with J")
    n = 2 * g
    target_det = math.prod(target_type) ** 2
    rng = random.Random(seed)
    # unit vectors first, then random combinations
    trials = [[int(i == k) for i in range(r)] for k in range(r)]
    for _ in range(budget):
        trials.append([rng.randint(-coeff_range, coeff_range) for _ in range(r)])
    seen = set()
    for co in trials:
        key = tuple(co)
        if key in seen or not any(co):
            continue
        seen.add(key)
        E = [[sum(co[k] * basis[k][a][b] for k in range(r)) for b in range(n)] for a in range(n)]
        d = lt.det_int(E)
        if d != target_det:
            continue
        if lt.polarization_type(E) != tuple(target_type):
            continue
        for s in (1, -1):
            Es = [[s * x for x in row] for row in E]
            if is_polarization(Pi, Es):
                return AlternatingForm(Es)
    raise PolarizationNotFound(f"no polarization of type {target_type} found; Neron-Severi rank {r}")


# ---------------------------------------------------------------------------
# endomorphisms


@dataclass
class EndoPair:
    T: ComplexMatrix
    R: list
    residual: object = None

    def to_json(self):
        return {"R": self.R, "T": self.T.to_json(), "residual": mpmath.nstr(self.residual, 5) if self.residual is not None else None}


def tangent_of(Pi: ComplexMatrix, R) -> tuple:
    """T with T Pi = Pi R (least squares through the exact transpose system)."""
    PR = Pi @ [[x for x in r] for r in R]
    Tt, res = cmat_solve_right(Pi.transpose(), PR.transpose(), tol_digits=60)
    return Tt.transpose(), res


def endomorphism_lattice(Pi: ComplexMatrix, J=None) -> list:
    """Z-basis of {R in M_2g(Z) : R J = J R}, normalised so that R_1 = 1."""
    c = Pi.ctx
    D = Pi.D
    if J is None:
        J, _ = complex_structure(Pi)
    n = len(J)
    values = []
    for a in range(n):
        for b in range(n):
            # R = E_ab : (E_ab J - J E_ab)_{ij} = delta_ia J_bj - J_ia delta_bj
            vals = []
            for i in range(n):
                for j in range(n):
                    v = (J[b][j] if i == a else 0) - (J[i][a] if j == b else 0)
                    vals.append(c.mpf(v))
            values.append(vals)
    kern = lt.integer_kernel_numeric(values, D, **_kernel_params(D))
    mats = [[[v[a * n + b] for b in range(n)] for a in range(n)] for v in kern]
    mats = normalize_with_identity(mats)
    out = []
    for R in mats:
        T, res = tangent_of(Pi, R)
        out.append(EndoPair(T, R, res))
    return out


def normalize_with_identity(mats: list) -> list:
    """Change Z-basis so that the first element is the identity matrix."""
    n = len(mats[0])
    flat = [[x for r in M for x in r] for M in mats]
    ident = [int(i == j) for i in range(n) for j in range(n)]
    coords = _int_coords(flat, ident)
    # unimodular W with first row = coords
    col = [[x] for x in coords]
    H, U = lt.hnf(col)[:2]
    if H[0][0] != 1:
        raise ArithmeticError("identity is not primitive in the endomorphism lattice")
    Uinv = _rat_inverse(U)
    W = [[int(Uinv[j][i]) for j in range(len(U))] for i in range(len(U))]  # first row is coords
    new = [[sum(W[i][k] * flat[k][t] for k in range(len(flat))) for t in range(n * n)] for i in range(len(flat))]
    assert new[0] == ident
    rest = lt.lll_reduce(new[1:]) if len(new) > 1 else []
    rows = [ident] + rest
    return [[r[a * n:(a + 1) * n] for a in range(n)] for r in rows]


def _int_coords(basis_rows: list, target: list) -> list:
    import flint

    A = flint.fmpq_mat(len(basis_rows[0]), len(basis_rows), [basis_rows[k][t] for t in range(len(target)) for k in range(len(basis_rows))])
    b = flint.fmpq_mat(len(target), 1, target)
    # least squares exact: solve normal equations
    AtA = A.transpose() * A
    x = AtA.solve(A.transpose() * b)
    out = []
    for i in range(len(basis_rows)):
        q = x[i, 0]
        if q.q != 1:
            raise ArithmeticError("target not in the lattice")
        out.append(int(q.p))
    if [sum(out[k] * basis_rows[k][t] for k in range(len(out))) for t in range(len(target))] != list(target):
        raise ArithmeticError("target not in the lattice")
    return out


def lattice_coords(basis: list, M: list) -> list:
    """Integer coordinates of the matrix M in a Z-basis of matrices."""
    flat = [[x for r in B for x in r] for B in basis]
    return _int_coords(flat, [x for r in M for x in r])


def multiplication_table(basis: list) -> list:
    """c[i][j] = coordinates of R_i R_j; raises if the span is not closed."""
    return [[lattice_coords(basis, lt.matmul(A, B)) for B in basis] for A in basis]


def trace_form(basis: list) -> list:
    return [[sum(lt.matmul(A, B)[i][i] for i in range(len(A))) for B in basis] for A in basis]


def ring_invariant(basis: list) -> tuple:
    """Elementary divisors of the trace form (basis independent)."""
    return tuple(abs(x) for x in lt.elementary_divisors(trace_form(basis)))


# ---------------------------------------------------------------------------
# orders in M_2(Z[sqrt 3])


def _zsqrt3_matrix(a: int, b: int) -> list:
    """a + b sqrt3 acting on Z[sqrt3] = Z + Z sqrt3."""
    return [[a, 3 * b], [b, a]]


def m2_zsqrt3_rep(x: Sequence[Sequence[tuple]]) -> list:
    """8x8 integer matrix of x in M_2(Z[sqrt3]) acting on Z[sqrt3]^2 (+) Z[sqrt3]^2."""
    blocks = [[_zsqrt3_matrix(*x[i][j]) for j in range(2)] for i in range(2)]
    M4 = [[blocks[i // 2][j // 2][i % 2][j % 2] for j in range(4)] for i in range(4)]
    out = [[0] * 8 for _ in range(8)]
    for i in range(4):
        for j in range(4):
            out[i][j] = M4[i][j]
            out[4 + i][4 + j] = M4[i][j]
    return out


def eichler_order_basis(level: tuple = (4, 1)) -> list:
    """Z-basis of {[[a, b], [c, d]] in M_2(Z[sqrt3]) : c in P} with P = (x + y sqrt3).

    The default P = (4 + sqrt3) has norm 13, so the order has index 13.
    """
    x, y = level
    # P as a Z-module: generated by pi and pi*sqrt3
    P = [(x, y), (3 * y, x)]
    elems = []
    for (i, j) in ((0, 0), (0, 1), (1, 1)):
        for u in ((1, 0), (0, 1)):
            m = [[(0, 0), (0, 0)], [(0, 0), (0, 0)]]
            m[i][j] = u
            elems.append(m)
    for u in P:
        m = [[(0, 0), (0, 0)], [u, (0, 0)]]
        elems.append(m)
    return [m2_zsqrt3_rep(e) for e in elems]


def m2_zsqrt3_basis() -> list:
    elems = []
    for i in range(2):
        for j in range(2):
            for u in ((1, 0), (0, 1)):
                m = [[(0, 0), (0, 0)], [(0, 0), (0, 0)]]
                m[i][j] = u
                elems.append(m)
    return [m2_zsqrt3_rep(e) for e in elems]


def sublattice_index(sub: list, full: list) -> int:
    coords = [lattice_coords(full, M) for M in sub]
    return abs(lt.det_int(coords))


# ---------------------------------------------------------------------------
# idempotents


def _frobenius(M) -> int:
    return sum(x * x for r in M for x in r)


def find_idempotents(basis: list, max_norm: int = 64, want_rank: int | None = None) -> list:
    """Idempotents R (R^2 = R, R != 0, 1) of Frobenius norm <= max_norm in the Z-span.

    Short vectors of the Frobenius form are enumerated by Fincke-Pohst on the
    Gram matrix.  Sorted by (norm, rank, entries).
    """
    import flint

    n = len(basis[0])
    flat = [[x for r in B for x in r] for B in basis]
    k = len(flat)
    G = [[sum(a * b for a, b in zip(flat[i], flat[j])) for j in range(k)] for i in range(k)]
    vecs = _fincke_pohst(G, max_norm)
    found = {}
    ident = lt.identity(n)
    for v in vecs:
        for s in (1, -1):
            R = [[sum(s * v[i] * basis[i][a][b] for i in range(k)) for b in range(n)] for a in range(n)]
            if R == ident or not any(any(r) for r in R):
                continue
            if lt.matmul(R, R) == R:
                key = tuple(x for r in R for x in r)
                found[key] = R
    out = []
    for R in found.values():
        rk = flint.fmpz_mat(R).rank()
        if want_rank is not None and rk != want_rank:
            continue
        out.append((_frobenius(R), rk, tuple(x for r in R for x in r), R))
    out.sort(key=lambda t: t[:3])
    return [t[3] for t in out]


def _fincke_pohst(G: list, bound: int) -> list:
    """All nonzero integer x (up to sign) with x^T G x <= bound."""
    k = len(G)
    # Cholesky-like decomposition in exact rationals (q_ii, q_ij)
    Q = [[Fraction(G[i][j]) for j in range(k)] for i in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            Q[j][i] = Q[i][j]
            Q[i][j] = Q[i][j] / Q[i][i]
        for a in range(i + 1, k):
            for b in range(a, k):
                Q[a][b] -= Q[a][i] * Q[i][b]
    q = [[float(Q[i][j]) for j in range(k)] for i in range(k)]
    out = []
    x = [0] * k

    def rec(i, rem):
        if i < 0:
            if any(x):
                out.append(list(x))
            return
        center = -sum(q[i][j] * x[j] for j in range(i + 1, k))
        r = math.sqrt(max(rem, 0) / q[i][i]) + 1e-9
        lo = math.ceil(center - r)
        hi = math.floor(center + r)
        for t in range(lo, hi + 1):
            x[i] = t
            d = q[i][i] * (t - center) ** 2
            if d <= rem + 1e-9:
                rec(i - 1, rem - d)
        x[i] = 0

    rec(k - 1, float(bound))
    # keep one of each +-pair
    seen = set()
    res = []
    for v in out:
        neg = tuple(-a for a in v)
        if neg in seen:
            continue
        seen.add(tuple(v))
        res.append(v)
    return res


def find_idempotent(basis: list, max_norm: int = 64, want_rank: int | None = None) -> list:
    cands = find_idempotents(basis, max_norm, want_rank)
    if not cands:
        raise IdempotentNotFound(f"no idempotent of Frobenius norm <= {max_norm}")
    return cands[0]


# ---------------------------------------------------------------------------
# induced polarizations


def induce_restriction(E: list, R: list) -> list:
    """R^t E R."""
    return lt.matmul(lt.matmul(lt.transpose(R), E), R)


def induce_quotient(E: list, P: list) -> list:
    """Primitive integer multiple of (P E^-1 P^t)^-1."""
    Einv = _rat_inverse(E)
    M = _frac_mul(_frac_mul(P, Einv), lt.transpose(P))
    Minv = _rat_inverse_frac(M)
    den = 1
    for r in Minv:
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
    out = [[int(x * den) for x in r] for r in Minv]
    g = 0
    for r in out:
        for x in r:
            g = math.gcd(g, x)
    return [[x // g for x in r] for r in out]


def _frac_mul(A, B):
    Bt = list(zip(*B))
    return [[sum(Fraction(a) * b for a, b in zip(r, col)) for col in Bt] for r in A]


def _rat_inverse_frac(M):
    import flint

    n = len(M)
    A = flint.fmpq_mat(n, n, [flint.fmpq(x.numerator, x.denominator) for r in M for x in r])
    inv = A.inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(n)] for i in range(n)]


@dataclass
class Factor:
    Pi: ComplexMatrix
    E: list
    P: list  # projection on homology: T Pi = Pi_factor P
    rows: list  # coordinates of C^g kept


def split_quotient(Pi: ComplexMatrix, E: list, R: list) -> Factor:
    """Image of the idempotent R: the factor A -> A' with Pi' and the induced E'."""
    import flint

    n = len(R)
    # columns of R span the image; basis L via HNF on the transpose
    H, _ = lt.hnf(lt.transpose(R))[:2]
    L = lt.transpose(H)  # n x k, columns a basis of R Z^n
    k = len(H)
    # P with R = L P
    Lm = flint.fmpq_mat(n, k, [x for r in L for x in r])
    Rm = flint.fmpq_mat(n, n, [x for r in R for x in r])
    P = []
    sol = (Lm.transpose() * Lm).solve(Lm.transpose() * Rm)
    for i in range(k):
        row = []
        for j in range(n):
            q = sol[i, j]
            if q.q != 1:
                raise ArithmeticError("image basis does not factor R")
            row.append(int(q.p))
        P.append(row)
    if lt.matmul(L, P) != [list(r) for r in R]:
        raise ArithmeticError("R != L P")
    PiL = Pi @ L
    # choose k/2 rows of PiL spanning the image
    g2 = k // 2
    c = Pi.ctx
    best = None
    for rows in itertools.combinations(range(Pi.rows), g2):
        sub = PiL.rows_sel(list(rows))
        from .periods import real_rank

        if real_rank(sub) == k:
            M = sub.to_mp()
            s = c.svd_c(M, compute_uv=False)
            score = min(abs(x) for x in s)
            if best is None or score > best[0]:
                best = (score, list(rows))
    if best is None:
        raise ArithmeticError("image of the idempotent has no coordinate chart")
    Pi2 = PiL.rows_sel(best[1])
    E2 = induce_quotient(E, P)
    if not is_polarization(Pi2, E2):
        E2 = [[-x for x in r] for r in E2]
        if not is_polarization(Pi2, E2):
            raise ArithmeticError("induced form is not a polarization")
    return Factor(Pi2, E2, P, best[1])


def to_symplectic(Pi: ComplexMatrix, E: list):
    """Change homology basis so that E becomes block diagonal [[0,-d],[d,0]]."""
    U, ds = lt.symplectic_basis(E)
    return Pi @ U, lt.matmul(lt.matmul(lt.transpose(U), E), U), U, ds


# ---------------------------------------------------------------------------
# elliptic factor


def elliptic_period_matrix(a_invariants: Sequence, D: int) -> ComplexMatrix:
    """(w1, w2) with the standard principal form [[0,-1],[1,0]] positive."""
    w1, w2 = elliptic_lattice(a_invariants, D)
    return ComplexMatrix([[w1, w2]], D)


def glue_curve_a_invariants(D: int, sqrt61_sign: int = 1) -> tuple:
    c = ctx_for(D)
    s = sqrt61_sign * c.sqrt(61)
    return (0, -s, 0, 4, 2)


# ---------------------------------------------------------------------------
# gluing


def weil_form_f2(x: Sequence[int], y: Sequence[int]) -> int:
    return (x[0] * y[1] + x[1] * y[0] + x[2] * y[3] + x[3] * y[2]) % 2


def maximal_isotropic_subgroups() -> list:
    """Lagrangian planes of F_2^4 with the product pairing, each as a sorted pair of generators."""
    vecs = [v for v in itertools.product((0, 1), repeat=4) if any(v)]
    planes = {}
    for a in vecs:
        for b in vecs:
            if a >= b or weil_form_f2(a, b):
                continue
            span = frozenset([a, b, tuple((x + y) % 2 for x, y in zip(a, b))])
            if span not in planes:
                planes[span] = (a, b)
    return [planes[k] for k in sorted(planes, key=lambda s: sorted(s))]


@dataclass
class GlueCandidate:
    h: tuple
    R3: list
    E3: list
    Pi3: ComplexMatrix
    theta: dict = field(default_factory=dict)

    @property
    def classification(self):
        return self.theta.get("classification")


def block_diag_period(Pi2: ComplexMatrix, Pi1: ComplexMatrix) -> ComplexMatrix:
    D = Pi2.D
    rows = [list(r) + [0] * Pi1.cols for r in Pi2.entries] + [[0] * Pi2.cols + list(r) for r in Pi1.entries]
    return ComplexMatrix(rows, D)


def glue(Pi2: ComplexMatrix, E2: list, Pi1: ComplexMatrix, E1: list, with_theta: bool = True,
         theta_dps: int = 50) -> list:
    """All principally polarized quotients of the product by maximal isotropic subgroups of G."""
    E2s = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -2], [0, 0, 2, 0]]
    if E2 != E2s or E1 != [[0, -1], [1, 0]]:
        raise ValueError("forms must be in the standard shape")
    Pi3p = block_diag_period(Pi2, Pi1)
    E3p = [[0] * 6 for _ in range(6)]
    for i in range(4):
        for j in range(4):
            E3p[i][j] = E2[i][j]
    for i in range(2):
        for j in range(2):
            E3p[4 + i][4 + j] = 2 * E1[i][j]
    out = []
    for h1, h2 in maximal_isotropic_subgroups():
        gens = [[2 * int(i == j) for j in range(6)] for i in range(6)]
        gens.append([0, 0] + list(h1))
        gens.append([0, 0] + list(h2))
        H = lt.hnf(gens)[0]
        M = [[Fraction(H[j][i], 2) for j in range(6)] for i in range(6)]  # columns: basis of Lambda in Lambda' coords
        E3f = _frac_mul(_frac_mul(lt.transpose(M), E3p), M)
        if any(x.denominator != 1 for r in E3f for x in r):
            raise ArithmeticError(f"non-integral E3 for subgroup {h1, h2}")
        E3 = [[int(x) for x in r] for r in E3f]
        R3f = _rat_inverse_frac(M)
        R3 = [[int(x) for x in r] for r in R3f]
        if any(x.denominator != 1 for r in R3f for x in r):
            raise ArithmeticError("R3 not integral")
        c = Pi3p.ctx
        Mm = ComplexMatrix([[c.mpf(x.numerator) / x.denominator for x in r] for r in M], Pi3p.D)
        Pi3 = Pi3p @ Mm
        cand = GlueCandidate((h1, h2), R3, E3, Pi3)
        if with_theta:
            cand.theta = theta_classify(Pi3, E3, theta_dps)
        out.append(cand)
    return out


# ---------------------------------------------------------------------------
# small period matrices and theta constants


def small_period_matrix(Pi: ComplexMatrix, E: list, dps: int = 50):
    """tau = Omega1^-1 Omega2 in a symplectic basis for the principal form E."""
    g = Pi.rows
    U, ds = lt.symplectic_basis(E)
    if any(d != 1 for d in ds):
        raise ValueError("polarization is not principal")
    order = [2 * i for i in range(g)] + [2 * i + 1 for i in range(g)]
    U2 = [[U[r][k] for k in order] for r in range(2 * g)]
    P = Pi @ U2
    c = mpmath.MPContext()
    c.dps = dps
    O1 = c.matrix(g, g)
    O2 = c.matrix(g, g)
    for i in range(g):
        for j in range(g):
            O1[i, j] = c.mpc(P[i, j])
            O2[i, j] = c.mpc(P[i, g + j])
    tau = c.inverse(O1) * O2
    tau = (tau + tau.T) / 2
    return tau, c


def siegel_reduce(tau, c, max_iter: int = 100):
    """Reduce tau in the Siegel upper half space for theta convergence.

    Alternates LLL reduction of Im(tau), rounding of Re(tau), and the
    inversion in the first coordinate when |tau_11| < 1.
    """
    g = tau.rows
    for _ in range(max_iter):
        Y = [[float(tau[i, j].imag) for j in range(g)] for i in range(g)]
        # LLL on Y via the Cholesky factor
        L = c.cholesky(c.matrix(Y))
        scale = 10**12
        Bm = [[int(round(float(L[i, j]) * scale)) for j in range(g)] for i in range(g)]
        red, T = lt.lll_reduce(Bm, transform=True)
        A = c.matrix([[T[i][j] for j in range(g)] for i in range(g)])
        tau = A * tau * A.T
        X = c.matrix(g, g)
        for i in range(g):
            for j in range(g):
                X[i, j] = c.nint(tau[i, j].real)
        tau = tau - X
        if abs(tau[0, 0]) >= c.mpf("0.99"):
            return tau
        # quasi-inversion on the first coordinate
        N = c.matrix(g, g)
        Nt = c.matrix(g, g)
        for i in range(1, g):
            N[i, i] = 1
            Nt[i, i] = 1
        # tau -> (A tau + B)(C tau + D)^-1 with A = D = diag(0,1,..), B = -e11, C = e11
        Am = N.copy()
        Dm = N.copy()
        Bm_ = c.matrix(g, g)
        Bm_[0, 0] = -1
        Cm = c.matrix(g, g)
        Cm[0, 0] = 1
        tau = (Am * tau + Bm_) * c.inverse(Cm * tau + Dm)
        tau = (tau + tau.T) / 2
    raise RuntimeError("Siegel reduction did not terminate")


def theta_constants(tau, c, radius: int | None = None) -> dict:
    """theta[a;b](0, tau) for all characteristics a, b in {0,1}^g (halves implied).

    Terms exp(pi i v^T tau v), v = n + a/2, are products of tabulated diagonal
    and off-diagonal factors; the sums for all b share one pass per a.
    """
    g = tau.rows
    if radius is None:
        Y = c.matrix([[tau[i, j].imag for j in range(g)] for i in range(g)])
        ev = min(c.eigsy(Y)[0])
        radius = int(math.ceil(math.sqrt(c.dps * math.log(10) / (math.pi * float(ev))))) + 2
    ns = list(range(-radius, radius + 1))
    out = {}
    chars = list(itertools.product((0, 1), repeat=g))
    pi_i = c.mpc(0, c.pi)
    for a in chars:
        vals = [[c.mpf(n) + c.mpf(a[i]) / 2 for n in ns] for i in range(g)]
        diag = [[c.exp(pi_i * tau[i, i] * v * v) for v in vals[i]] for i in range(g)]
        off = {}
        for i in range(g):
            for j in range(i + 1, g):
                e = 2 * pi_i * tau[i, j]
                off[(i, j)] = [[c.exp(e * x * y) for y in vals[j]] for x in vals[i]]
        classes = {}
        for idx in itertools.product(range(len(ns)), repeat=g):
            term = diag[0][idx[0]]
            for i in range(1, g):
                term *= diag[i][idx[i]]
            for (i, j), tab in off.items():
                term *= tab[idx[i]][idx[j]]
            par = tuple(ns[k] % 2 for k in idx)
            classes[par] = classes.get(par, 0) + term
        for b in chars:
            s = 0
            for par, val in classes.items():
                sign = -1 if sum(p * bb for p, bb in zip(par, b)) % 2 else 1
                s += sign * val
            ab = sum(x * y for x, y in zip(a, b))
            out[(a, b)] = s * c.expjpi(c.mpf(ab) / 2)
    return out


def even_characteristics(g: int) -> list:
    chars = list(itertools.product((0, 1), repeat=g))
    return [(a, b) for a in chars for b in chars if sum(x * y for x, y in zip(a, b)) % 2 == 0]


def classify_theta(values: dict, g: int, rel_threshold: float = 1e-15) -> dict:
    ev = even_characteristics(g)
    mags = {k: abs(values[k]) for k in ev}
    top = max(mags.values())
    vanish = [k for k in ev if mags[k] < rel_threshold * top]
    if not vanish:
        cls = "plane-quartic" if g == 3 else "curve"
    elif len(vanish) == 1:
        cls = "hyperelliptic"
    else:
        cls = "decomposable"
    return {
        "classification": cls,
        "n_vanishing": len(vanish),
        "magnitudes": {"".join(map(str, a)) + "|" + "".join(map(str, b)): mpmath.nstr(m, 8) for (a, b), m in mags.items()},
        "min_relative": mpmath.nstr(min(mags.values()) / top, 8),
    }


def theta_classify(Pi: ComplexMatrix, E: list, dps: int = 50, rel_threshold: float = 1e-15) -> dict:
    tau, c = small_period_matrix(Pi, E, dps)
    Y = c.matrix([[tau[i, j].imag for j in range(tau.rows)] for i in range(tau.rows)])
    if min(c.eigsy(Y)[0]) <= 0:
        raise ArithmeticError("small period matrix is not in the Siegel upper half space")
    tau = siegel_reduce(tau, c)
    vals = theta_constants(tau, c)
    return classify_theta(vals, tau.rows, rel_threshold)
