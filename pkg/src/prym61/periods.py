"""Periods of a newform along twisted winding elements, and the period matrix.

All integrals are returned multiplied by 2*pi*i, i.e. as integrals of
f(q) dq/q.  This keeps the lattice free of a common transcendental factor,
which changes nothing downstream (complex structure, polarizations and
endomorphisms are invariant under scaling Pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from . import exactnum as en
from . import modsym as ms
from .apfloat import GUARD, BigComplex, ComplexMatrix, PrecisionError, ctx_for, exp_q, radius_R
from .qexp import QExpansion, legendre

LEVEL = 61


class InsufficientTermsError(ValueError):
    def __init__(self, needed: int, have: int):
        super().__init__(f"need at least {needed} coefficients, have {have}")
        self.needed = needed
        self.have = have


class FrickeMismatchError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# characters


@dataclass
class CharacterData:
    chi: ms.Character
    D: int

    @property
    def m(self) -> int:
        return self.chi.m

    def value(self, a: int):
        return self.chi.value(a, ctx_for(self.D))

    def exact_sign(self, a: int) -> int:
        """chi(a) for a real-valued chi (or a with chi(a) = +-1), exactly."""
        e = self.chi.exponent(a)
        if e is None:
            return 0
        if e == 0:
            return 1
        if 2 * e == self.chi.M:
            return -1
        raise ValueError(f"chi({a}) is not +-1")

    @property
    def parity(self) -> int:
        return self.exact_sign(-1)

    def gauss(self, conj: bool = False):
        c = ctx_for(self.D)
        m = self.m
        s = c.mpc(0)
        for a in range(m):
            v = self.value(a)
            if conj:
                v = c.conj(v)
            s += v * c.expjpi(c.mpf(2 * a) / m)
        return s


# ---------------------------------------------------------------------------
# embedding helpers


def embedded_coefficients(qe: QExpansion, D: int, n_max: int, tau: int) -> list:
    """tau(a_n) for 0 <= n <= n_max as mpc numbers in ctx_for(D)."""
    c = ctx_for(D)
    F = qe.field
    r = c.mpc(F.embeddings(D + GUARD)[tau])
    pw = [c.mpc(1)]
    for _ in range(F.degree - 1):
        pw.append(pw[-1] * r)
    rows = qe.coeffs[: n_max + 1].tolist()
    return [c.fsum(x * y for x, y in zip(row, pw) if x) if any(row) else c.mpc(0) for row in rows]


def terms_needed(m: int, D: int, N: int = LEVEL, margin: float = 1.0) -> int:
    """Number of terms for D digits in the series with R = exp(-2 pi / (m sqrt N))."""
    return int(math.ceil(margin * m * math.sqrt(N) * math.log(10) / (2 * math.pi) * D))


# ---------------------------------------------------------------------------
# Fricke pseudo-eigenvalue


def _eval_series(coeffs: list, q, c):
    # reverse-order Horner: sum_{n>=1} a_n q^n
    acc = c.mpc(0)
    for a in reversed(coeffs[1:]):
        acc = (acc + a) * q
    return acc


def fricke_lambda(qe: QExpansion, D: int, tau: int, points: Sequence | None = None, tol_digits: int = 10):
    """lambda with f|W_N = lambda * sum conj(a_n) q^n, evaluated at two points.

    f|W_N (z) = N^-1 z^-2 f(-1/(N z)).  Returns a BigComplex.
    """
    c = ctx_for(D)
    N = qe.level
    sq = c.sqrt(N)
    if points is None:
        points = [c.mpc(0, c.mpf("1.07") / sq), c.mpc(c.mpf("0.1"), c.mpf("1.21") / sq)]
    vals = []
    for z in points:
        z = c.mpc(z)
        w = -1 / (N * z)
        # number of terms: |q|^n < 10^-(D+GUARD)
        rmin = min(z.imag, w.imag)
        n_max = int(math.ceil((D + GUARD) * math.log(10) / (2 * math.pi * float(rmin)))) + 10
        if n_max > qe.B:
            raise InsufficientTermsError(n_max, qe.B)
        a = embedded_coefficients(qe, D, n_max, tau)
        lhs = _eval_series(a, exp_q(w, D), c) / (N * z * z)
        rhs = _eval_series([c.conj(x) for x in a], exp_q(z, D), c)
        vals.append(lhs / rhs)
    tol = c.mpf(10) ** (-D + tol_digits)
    for v in vals[1:]:
        if abs(v - vals[0]) > tol:
            raise FrickeMismatchError(f"Fricke values disagree: {mpmath.nstr(abs(v - vals[0]), 5)}")
    if abs(abs(vals[0]) - 1) > tol:
        raise FrickeMismatchError("Fricke pseudo-eigenvalue is not of absolute value 1")
    return BigComplex(vals[0], D)


def fricke_lambdas(qe: QExpansion, D: int) -> list:
    return [fricke_lambda(qe, D, t) for t in range(qe.field.degree)]


# ---------------------------------------------------------------------------
# twisted winding integrals


def nebentypus_value(qe: QExpansion, m: int) -> int:
    if qe.character == "legendre61":
        return legendre(m, qe.level)
    return 1 if math.gcd(m, qe.level) == 1 else 0


def _fixed_point_sums(qe: QExpansion, m: int, R, n_max: int, bits: int, c) -> dict:
    """S[(j, r)] = sum_{n = r mod m, n <= n_max} lambda_{j,n} R^n / n, as integers scaled by 2^bits.

    Horner in R^m from the top index down (reverse summation).
    """
    Rm = int(c.nint(c.ldexp(R**m, bits)))
    d = qe.coeffs.shape[1]
    rows = qe.coeffs[: n_max + 1].tolist()
    out = {}
    for r in range(1, min(m, n_max) + 1):
        Rr = int(c.nint(c.ldexp(R**r, bits)))
        top = r + ((n_max - r) // m) * m
        for j in range(d):
            acc = 0
            for n in range(top, r - 1, -m):
                acc = acc * Rm >> bits
                lam = rows[n][j]
                if lam:
                    acc += (lam << bits) // n if lam > 0 else -((-lam << bits) // n)
            out[(j, r % m)] = acc * Rr >> bits
    return out


def winding_integral(qe: QExpansion, chi: ms.Character, D: int, lambdas: Sequence[BigComplex],
                     n_max: int | None = None, margin: float = 1.2) -> list:
    """2 pi i * integral of tau(f) over s_chi, one value per embedding tau."""
    c = ctx_for(D)
    m = chi.m
    N = qe.level
    need = terms_needed(m, D, N)
    if n_max is None:
        n_max = min(terms_needed(m, D, N, margin), qe.B)
    if n_max < need or n_max > qe.B:
        raise InsufficientTermsError(max(need, n_max), qe.B)
    if any(l.D != D for l in lambdas):
        raise PrecisionError("lambda precision mismatch")
    R = radius_R(m, N, D)
    bits = int((D + GUARD) * 3.33) + 64
    S = _fixed_point_sums(qe, m, R, n_max, bits, c)
    cd = CharacterData(chi, D)
    g = cd.gauss()
    gb = cd.gauss(conj=True)
    sign = cd.value(-N) * nebentypus_value(qe, m)
    F = qe.field
    roots = F.embeddings(D + GUARD)
    scale = c.ldexp(c.mpf(1), -bits)
    out = []
    for t, lam in enumerate(lambdas):
        r0 = c.mpc(roots[t])
        pw = [c.mpc(1)]
        for _ in range(F.degree - 1):
            pw.append(pw[-1] * r0)
        A = c.mpc(0)
        for r in range(m):
            v = cd.value(r)
            if v == 0:
                continue
            inner = c.fsum(pw[j] * S[(j, r)] for j in range(F.degree) if (j, r) in S)
            A += v * inner
        A *= scale
        val = m * (A / g - sign * lam.value * c.conj(A) / gb)
        out.append(BigComplex(val, D))
    return out


def winding_integral_naive(qe: QExpansion, chi: ms.Character, D: int, lambdas: Sequence[BigComplex],
                           n_max: int) -> list:
    """Term-by-term evaluation of the same series, for cross-checks."""
    c = ctx_for(D)
    m = chi.m
    N = qe.level
    R = radius_R(m, N, D)
    cd = CharacterData(chi, D)
    g, gb = cd.gauss(), cd.gauss(conj=True)
    sign = cd.value(-N) * nebentypus_value(qe, m)
    out = []
    for t, lam in enumerate(lambdas):
        a = embedded_coefficients(qe, D, n_max, t)
        s = c.mpc(0)
        for n in range(n_max, 0, -1):
            x = cd.value(n) * a[n]
            s += (x / g - sign * lam.value * c.conj(x) / gb) * R**n / n
        out.append(BigComplex(m * s, D))
    return out


def generator_integrals(qe: QExpansion, generators: Sequence[tuple], D: int, lambdas: Sequence[BigComplex],
                        margin: float = 1.2, n_scale: float = 1.0) -> dict:
    """Integrals over the rational parts w_{chi,i} of the winding elements.

    ``generators`` lists (Character, i).  With s_{chi^t} = sum_i zeta^(t i) w_i for
    the Galois conjugates chi^t, the w_i integrals follow by inverting the
    Vandermonde matrix V[t][i] = zeta^(t i).
    Returns {(m, j, i): [BigComplex per embedding]}.
    """
    c = ctx_for(D)
    out = {}
    reps = []
    for chi, _ in generators:
        if chi not in reps:
            reps.append(chi)
    for chi in reps:
        conj = chi.conjugates()
        k = chi.order
        deg = len(conj)
        ts = [t for t in range(1, k + 1) if math.gcd(t, k) == 1]
        vals = []
        for t in ts:
            ct = ms.Character(chi.m, (chi.j * t) % chi.M) if chi.m > 1 else chi
            n_max = None
            if n_scale != 1.0:
                n_max = min(int(terms_needed(chi.m, D, qe.level, margin) * n_scale), qe.B)
            vals.append(winding_integral(qe, ct, D, lambdas, n_max=n_max, margin=margin))
        z = c.expjpi(c.mpf(2) / k)
        V = c.matrix(deg, deg)
        for a, t in enumerate(ts):
            for i in range(deg):
                V[a, i] = z ** (t * i)
        Vinv = c.inverse(V)
        for i in range(deg):
            per_tau = []
            for tau in range(len(lambdas)):
                s = c.fsum(Vinv[i, a] * vals[a][tau].value for a in range(deg))
                per_tau.append(BigComplex(s, D))
            out[(chi.m, chi.j, i)] = per_tau
    return out


# ---------------------------------------------------------------------------
# period matrix


@dataclass
class PeriodMatrix:
    """g x 2g period matrix with a note on what its columns are."""

    matrix: ComplexMatrix
    provenance: dict = field(default_factory=dict)

    @property
    def g(self) -> int:
        return self.matrix.rows

    @property
    def D(self) -> int:
        return self.matrix.D

    def to_json(self) -> dict:
        return {"g": self.g, "matrix": self.matrix.to_json(), "provenance": self.provenance}

    @classmethod
    def from_json(cls, obj: dict) -> "PeriodMatrix":
        return cls(ComplexMatrix.from_json(obj["matrix"]), obj.get("provenance", {}))


def real_rank(P: ComplexMatrix, tol_digits: int | None = None) -> int:
    """Rank over R of the columns of P viewed in R^(2g)."""
    c = P.ctx
    M = c.matrix(2 * P.rows, P.cols)
    for i in range(P.rows):
        for j in range(P.cols):
            M[i, j] = P[i, j].real
            M[P.rows + i, j] = P[i, j].imag
    s = c.svd_r(M, compute_uv=False)
    top = max(abs(x) for x in s)
    if tol_digits is None:
        tol_digits = P.D // 2
    return sum(1 for x in s if abs(x) > top * c.mpf(10) ** (-P.D + tol_digits))


def assemble_period_matrix(expr: ms.WindingExpression, integrals: dict, hecke_roots: Sequence, D: int,
                           provenance: dict | None = None) -> PeriodMatrix:
    """Column j, row tau: sum_{k,g} c[j][k][g] * t_tau^k * integral(w_g, tau).

    ``hecke_roots[tau]`` is the eigenvalue of the Hecke operator on the tau-th
    embedding, in the action convention of the homology.
    """
    c = ctx_for(D)
    gens = [(chi.m, chi.j, i) for chi, i in expr.generators]
    ntau = len(hecke_roots)
    cols = []
    for cj in expr.coeffs:
        col = []
        for tau in range(ntau):
            h = c.mpc(hecke_roots[tau])
            s = c.mpc(0)
            hk = c.mpc(1)
            for k in range(expr.deg):
                row = cj[k]
                part = c.mpc(0)
                for gi, coef in enumerate(row):
                    if coef:
                        part += c.mpf(coef.numerator) / coef.denominator * integrals[gens[gi]][tau].value
                s += hk * part
                hk *= h
            col.append(s)
        cols.append(col)
    M = ComplexMatrix([[cols[j][t] for j in range(len(cols))] for t in range(ntau)], D)
    rk = real_rank(M)
    if rk != 2 * ntau:
        raise ArithmeticError(f"period columns have real rank {rk}, expected {2 * ntau}")
    return PeriodMatrix(M, dict(provenance or {}))


def hecke_eigen_roots(qe: QExpansion, n: int, D: int, sign: int = 1) -> list:
    """sign * tau(a_n) for each embedding tau."""
    c = ctx_for(D)
    F = qe.field
    roots = F.embeddings(D + GUARD)
    coords = qe.coeffs[n].tolist()
    out = []
    for r in roots:
        r = c.mpc(r)
        out.append(sign * c.fsum(x * r**j for j, x in enumerate(coords)))
    return out


# ---------------------------------------------------------------------------
# elliptic-curve periods (used to validate the rational newform)


def elliptic_invariants(a: Sequence, c) -> dict:
    a1, a2, a3, a4, a6 = [c.mpc(x) for x in a]
    b2 = a1 * a1 + 4 * a2
    b4 = a1 * a3 + 2 * a4
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return {"b2": b2, "b4": b4, "b6": b6, "c4": c4, "disc": disc, "j": c4**3 / disc}


def elliptic_lattice(a: Sequence, D: int) -> tuple:
    """Basis (w1, w2), Im(w2/w1) > 0, of the period lattice of dx/(2y + a1 x + a3).

    Periods come from the complex AGM over all orderings of the roots of
    4x^3 + b2 x^2 + 2 b4 x + b6; a basis is extracted and checked against j.
    """
    c = ctx_for(D)
    inv = elliptic_invariants(a, c)
    roots = c.polyroots([4, inv["b2"], 2 * inv["b4"], inv["b6"]], extraprec=4 * D)
    cands = []
    for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        cands.append(c.pi / c.agm(c.sqrt(roots[i] - roots[k]), c.sqrt(roots[i] - roots[j])))
    tol = c.mpf(10) ** (-D // 2)
    best = None
    for x in cands:
        for y in cands:
            vol = abs((c.conj(x) * y).imag)
            if vol > tol * abs(x) * abs(y) and (best is None or vol < best[0] - tol):
                best = (vol, x, y)
    _, w1, w2 = best
    # Gauss reduction
    while True:
        if abs(w2) < abs(w1):
            w1, w2 = w2, w1
        mu = c.nint((w2 / w1).real)
        if mu == 0:
            break
        w2 = w2 - mu * w1
    if (w2 / w1).imag < 0:
        w2 = -w2
    tau = w2 / w1
    jt = 1728 * c.kleinj(tau)
    if abs(jt - inv["j"]) > c.mpf(10) ** (-D + GUARD) * max(1, abs(inv["j"])) * 10**6:
        raise ArithmeticError("AGM lattice does not reproduce the j-invariant")
    return w1, w2
