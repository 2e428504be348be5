"""Exact checks on the plane quartic over K = Q(nu), nu^2 = nu + 15.

Forms are ternary polynomials stored as {(i, j, k): NFElement} for the monomial
x^i y^j z^k.  Point counts run over finite fields held as discrete-log tables
(numpy), so whole slices of a field are evaluated at once.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numba
import numpy as np
import sympy

from . import exactnum as en

K = en.QSQRT61
NU = en.nu()
U_FUND = 17 + 5 * NU  # (39 + 5 sqrt 61)/2
TWO_UNIT_GENERATORS = (K([-1]), U_FUND, K([2]))


class SingularCurveError(ValueError):
    pass


class NotAnAutomorphismError(ValueError):
    pass


class BadPrimeError(ValueError):
    pass


class TwistMismatchError(ArithmeticError):
    pass


class AmbiguousTwistError(ArithmeticError):
    def __init__(self, matches, n_primes):
        super().__init__(f"{len(matches)} twist classes match after {n_primes} prime ideals; raise the prime bound")
        self.matches = matches


# ---------------------------------------------------------------------------
# ternary forms


def monomials(d: int) -> list:
    """Degree-d monomials in degrevlex order (x > y > z), largest first."""
    out = [(i, j, d - i - j) for i in range(d + 1) for j in range(d + 1 - i)]
    out.sort(key=lambda m: (m[2], m[1]))
    return out


MONO4 = monomials(4)


def _k(c) -> en.NFElement:
    return c if isinstance(c, en.NFElement) else K([c])


def form_add(A: dict, B: dict) -> dict:
    out = dict(A)
    for m, c in B.items():
        out[m] = out[m] + c if m in out else c
    return {m: c for m, c in out.items() if c}


def form_scale(A: dict, s) -> dict:
    s = _k(s)
    return {m: c * s for m, c in A.items() if c * s}


def form_mul(A: dict, B: dict) -> dict:
    out: dict = {}
    for (a, ca), (b, cb) in itertools.product(A.items(), B.items()):
        m = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
        out[m] = out[m] + ca * cb if m in out else ca * cb
    return {m: c for m, c in out.items() if c}


def form_pow(A: dict, n: int) -> dict:
    out = {(0, 0, 0): K.one}
    for _ in range(n):
        out = form_mul(out, A)
    return out


def form_subst(F: dict, U) -> dict:
    """F(U v): each variable replaced by the corresponding row of U."""
    lin = [{(1, 0, 0): _k(U[r][0]), (0, 1, 0): _k(U[r][1]), (0, 0, 1): _k(U[r][2])} for r in range(3)]
    lin = [{m: c for m, c in L.items() if c} for L in lin]
    pows = [[form_pow(L, e) for e in range(5)] for L in lin]
    out: dict = {}
    for (i, j, k), c in F.items():
        t = form_mul(form_mul(pows[0][i], pows[1][j]), pows[2][k])
        out = form_add(out, form_scale(t, c))
    return out


def form_diff(F: dict, var: int) -> dict:
    out = {}
    for m, c in F.items():
        if m[var]:
            n = list(m)
            n[var] -= 1
            out[tuple(n)] = c * m[var]
    return out


def form_proportional(A: dict, B: dict):
    """Scalar c with A = c B, or None."""
    if set(A) != set(B) or not A:
        return None
    m0 = next(iter(A))
    c = A[m0] / B[m0]
    return c if all(A[m] == c * B[m] for m in A) else None


@dataclass(frozen=True)
class TernaryQuartic:
    coeffs: tuple  # 15 NFElements in MONO4 order

    def __post_init__(self):
        if len(self.coeffs) != 15:
            raise ValueError("a ternary quartic has 15 coefficients")
        if not any(self.coeffs):
            raise ValueError("zero form")

    @classmethod
    def from_dict(cls, F: dict) -> "TernaryQuartic":
        if any(sum(m) != 4 for m in F):
            raise ValueError("form is not homogeneous of degree 4")
        return cls(tuple(_k(F.get(m, 0)) for m in MONO4))

    def as_dict(self) -> dict:
        return {m: c for m, c in zip(MONO4, self.coeffs) if c}

    def coeff(self, i, j, k) -> en.NFElement:
        return self.coeffs[MONO4.index((i, j, k))]

    def is_even_in_x(self) -> bool:
        return all(not c for m, c in zip(MONO4, self.coeffs) if m[0] % 2)

    def to_json(self) -> dict:
        return {"monomials": [list(m) for m in MONO4], "coeffs": [[str(a) for a in c.coords] for c in self.coeffs]}

    def __str__(self):
        parts = []
        for (i, j, k), c in zip(MONO4, self.coeffs):
            if c:
                mono = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip("xyz", (i, j, k)) if e)
                parts.append(f"({str(c).replace('t', 'nu')})*{mono}")
        return " + ".join(parts)


def _quartic(spec: dict) -> TernaryQuartic:
    return TernaryQuartic.from_dict({m: K(list(c)) for m, c in spec.items()})


# published model and the simplified model before twisting; entries are (const, nu-coeff)
PUBLISHED_F = _quartic({
    (4, 0, 0): (17, 5), (2, 2, 0): (-48, -14), (2, 1, 1): (28, 8), (2, 0, 2): (-14, -4),
    (0, 4, 0): (33, 10), (0, 3, 1): (-44, -12), (0, 2, 2): (26, 2), (0, 1, 3): (-16, 4), (0, 0, 4): (-6, 1),
})
SIMPLIFIED_F0 = _quartic({
    (4, 0, 0): (859, -195), (2, 2, 0): (282, -64), (0, 4, 0): (24, -5), (2, 1, 1): (-652, 148),
    (0, 3, 1): (68, -16), (2, 0, 2): (326, -74), (0, 2, 2): (-422, 96), (0, 1, 3): (652, -148),
    (0, 0, 4): (207, -47),
})
PUBLISHED_DELTA = 22 - 5 * NU
# -(10nu+34) y^2 = x^3 - nu x^2 + (1 - nu) x - 1
ELLIPTIC_MODEL = (-(10 * NU + 34), (K([-1]), 1 - NU, -NU, K.one))
ELLIPTIC_CONDUCTOR = 64  # fixture metadata


# ---------------------------------------------------------------------------
# Z[nu] arithmetic on integer pairs (a + b nu) for the resultant


def _zmul(x, y):
    a, b = x
    c, d = y
    return (a * c + 15 * b * d, a * d + b * c + b * d)


def _zsub(x, y):
    return (x[0] - y[0], x[1] - y[1])


def _zdiv_exact(x, y):
    c, d = y
    n = c * c + c * d - 15 * d * d
    num = _zmul(x, (c + d, -d))
    if num[0] % n or num[1] % n:
        raise ArithmeticError("inexact division in Z[nu]")
    return (num[0] // n, num[1] // n)


def _bareiss_det(M: list):
    """Fraction-free determinant over Z[nu] (entries are integer pairs)."""
    n = len(M)
    if n == 0:
        return (1, 0)
    A = [list(r) for r in M]
    sign = 1
    prev = (1, 0)
    for k in range(n - 1):
        if A[k][k] == (0, 0):
            for i in range(k + 1, n):
                if A[i][k] != (0, 0):
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return (0, 0)
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = _zdiv_exact(_zsub(_zmul(akk, row_i[j]), _zmul(aik, row_k[j])), prev)
            row_i[k] = (0, 0)
        prev = akk
    d = A[n - 1][n - 1]
    return (sign * d[0], sign * d[1])


def _to_pair(c: en.NFElement):
    if c.field is not K:
        raise ValueError("coefficients must lie in Q(sqrt 61)")
    a, b = c.coords
    if a.denominator != 1 or b.denominator != 1:
        raise ValueError("coefficients must be integral on the basis (1, nu)")
    return (int(a), int(b))


def _macaulay_matrices(forms: Sequence[dict], degs: Sequence[int]):
    D = sum(d - 1 for d in degs) + 1
    monos = monomials(D)
    index = {m: i for i, m in enumerate(monos)}
    rows = []
    reduced = []
    for m in monos:
        divisible = [m[i] >= degs[i] for i in range(3)]
        i = divisible.index(True)
        reduced.append(sum(divisible) == 1)
        shift = list(m)
        shift[i] -= degs[i]
        row = [(0, 0)] * len(monos)
        for mm, c in forms[i].items():
            row[index[(mm[0] + shift[0], mm[1] + shift[1], mm[2] + shift[2])]] = _to_pair(c)
        rows.append(row)
    keep = [i for i, r in enumerate(reduced) if not r]
    minor = [[rows[i][j] for j in keep] for i in keep]
    return rows, minor


def macaulay_resultant(forms: Sequence[dict], degs: Sequence[int], seed: int = 0) -> en.NFElement:
    """Resultant of three ternary forms over Z[nu] as det(M) / det(minor).

    When the extraneous minor vanishes the forms are moved by a random element of
    SL_3(Z), which leaves the resultant unchanged.
    """
    rng = random.Random(seed)
    current = list(forms)
    for _ in range(20):
        M, minor = _macaulay_matrices(current, degs)
        dm = _bareiss_det(minor)
        if dm != (0, 0):
            num = _bareiss_det(M)
            q = _zdiv_exact(num, dm)
            return K([q[0], q[1]])
        g = _random_sl3(rng)
        current = [form_subst(f, g) for f in forms]
    raise ArithmeticError("extraneous factor vanished for every tried change of variables")


def _random_sl3(rng: random.Random):
    while True:
        U = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
        if en.det_rational(U) == 1:
            return U


@dataclass
class DiscriminantSupport:
    resultant: en.NFElement
    norm: int
    primes: list
    cofactor: int  # unfactored part of |norm| (1 when the factorization is complete)
    two_adic_valuation: int

    @property
    def singular(self) -> bool:
        return not self.resultant

    def to_json(self):
        return {"resultant": [str(c) for c in self.resultant.coords], "norm": str(self.norm),
                "primes": self.primes, "cofactor": str(self.cofactor), "v2": self.two_adic_valuation,
                "singular": self.singular}


def _integral_primitive(F: dict) -> dict:
    den = 1
    for c in F.values():
        for a in c.coords:
            den = math.lcm(den, a.denominator)
    F = form_scale(F, den)
    g = 0
    for c in F.values():
        for a in c.coords:
            g = math.gcd(g, int(a))
    return form_scale(F, Fraction(1, g)) if g > 1 else F


def discriminant_support(F: TernaryQuartic, factor_limit: int = 10**6) -> DiscriminantSupport:
    """Primes dividing the norm of Res(F_x, F_y, F_z)."""
    G = _integral_primitive(F.as_dict())
    parts = [form_diff(G, v) for v in range(3)]
    res = macaulay_resultant(parts, (3, 3, 3))
    if not res:
        return DiscriminantSupport(res, 0, [], 0, 0)
    n = res.norm()
    assert n.denominator == 1
    n = abs(int(n))
    fac = sympy.factorint(n, limit=factor_limit)
    primes, rest = [], n
    for q, e in fac.items():
        if sympy.isprime(q):
            primes.append(int(q))
            rest //= int(q) ** e
    if rest > 1 and sympy.isprime(rest):
        primes.append(rest)
        rest = 1
    v2 = 0
    while n % 2 == 0:
        n //= 2
        v2 += 1
    return DiscriminantSupport(res, int(res.norm()), sorted(primes), rest, v2)


# ---------------------------------------------------------------------------
# involution


def _mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(3)), K.zero) for j in range(3)] for i in range(3)]


def _kernel_K(A) -> list:
    """Basis of the right kernel of a 3x3 matrix over K (reduced row echelon)."""
    M = [[_k(x) for x in r] for r in A]
    pivots = []
    r = 0
    for c in range(3):
        p = next((i for i in range(r, 3) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for i in range(3):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(3) if c not in pivots]
    basis = []
    for f in free:
        v = [K.zero] * 3
        v[f] = K.one
        for row, pc in enumerate(pivots):
            v[pc] = -M[row][f]
        basis.append(v)
    return basis


@dataclass
class Normalized:
    U: list
    G: dict  # weighted form: G[(i, j, k)] is the coefficient of s^i y^j z^k with s = x^2
    H: TernaryQuartic  # F . U, even in x


def involution_normalize(F: TernaryQuartic, iota) -> Normalized:
    """Change coordinates so that the involution becomes x -> -x.

    Returns U with F(U v) = G(x^2, y, z).  Requires F(iota v) = lam F(v) and
    iota^2 scalar.
    """
    iota = [[_k(x) for x in r] for r in iota]
    Fd = F.as_dict()
    lam = form_proportional(form_subst(Fd, iota), Fd)
    if lam is None:
        raise NotAnAutomorphismError("iota does not preserve F up to a scalar")
    sq = _mat_mul(iota, iota)
    c = sq[0][0]
    if any(sq[i][j] != (c if i == j else 0) for i in range(3) for j in range(3)):
        raise NotAnAutomorphismError("iota^2 is not scalar")
    mu = iota[0][0] + iota[1][1] + iota[2][2]  # eigenvalues (-mu, mu, mu)
    if not mu or all(iota[i][j] == (iota[0][0] if i == j else 0) for i in range(3) for j in range(3)):
        raise NotAnAutomorphismError("iota acts as a scalar")
    simple = _kernel_K([[iota[i][j] + (mu if i == j else 0) for j in range(3)] for i in range(3)])
    double = _kernel_K([[iota[i][j] - (mu if i == j else 0) for j in range(3)] for i in range(3)])
    if len(simple) != 1 or len(double) != 2:
        raise NotAnAutomorphismError("iota is not a reflection-type involution")
    cols = simple + double
    U = [[cols[j][i] for j in range(3)] for i in range(3)]
    H = form_subst(Fd, U)
    if any(m[0] % 2 for m in H):
        raise NotAnAutomorphismError("transformed form is not even in x")
    G = {(m[0] // 2, m[1], m[2]): c for m, c in H.items()}
    return Normalized(U, G, TernaryQuartic.from_dict(H))


# ---------------------------------------------------------------------------
# the double cover and its elimination


def _poly_t(coeffs) -> dict:
    return {(0, i, 0): _k(c) for i, c in enumerate(coeffs) if _k(c)}


P0_CUBIC = (K.one, 1 - NU, NU, K.one)  # t^3 + nu t^2 + (1 - nu) t + 1, low degree first
P0_SCALE = 10 * NU + 34
COVER_Q = (-2 * NU - 7, 4 * NU + 14, -7 * NU - 24)


class CoverIdentityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CoverSystem:
    """u_coeff u^2 = cubic_scale * cubic(t);  w_coeff w^2 = 2u + q(t)."""

    u_coeff: en.NFElement
    cubic_scale: en.NFElement
    w_coeff: en.NFElement
    cubic: tuple = P0_CUBIC
    q: tuple = COVER_Q


# as printed next to the simplified quartic
PRINTED_COVER = CoverSystem(P0_SCALE, K.one, 9 - 2 * NU)
# u^2 = p0(t), x^2 = 2u + q(t): the system whose elimination is the simplified quartic
RECONSTRUCTED_COVER = CoverSystem(K.one, P0_SCALE, K.one)


def cover_eliminate(system: CoverSystem = PRINTED_COVER) -> dict:
    """Eliminate u and homogenize (w -> x, t -> y).

    2u = w_coeff w^2 - q(t), so 4 * first equation gives
    u_coeff (w_coeff w^2 - q)^2 - 4 cubic_scale cubic = 0.
    """
    two_u = form_add({(2, 0, 0): system.w_coeff}, form_scale(_poly_t(system.q), -1))
    aff = form_add(form_scale(form_mul(two_u, two_u), system.u_coeff),
                   form_scale(_poly_t(system.cubic), -4 * system.cubic_scale))
    return {(i, j, 4 - i - j): v for (i, j, _), v in aff.items()}


def binary_disc_of_weighted(G: dict) -> dict:
    """b^2 - 4ac for G = a s^2 + b(y,z) s + c(y,z), as a binary quartic {(j, k): coeff}."""
    a = G.get((2, 0, 0), K.zero)
    b = {(j, k): c for (i, j, k), c in G.items() if i == 1}
    cc = {(j, k): c for (i, j, k), c in G.items() if i == 0}
    out: dict = {}
    for (m1, c1), (m2, c2) in itertools.product(b.items(), b.items()):
        m = (m1[0] + m2[0], m1[1] + m2[1])
        out[m] = out.get(m, K.zero) + c1 * c2
    for m, c in cc.items():
        out[m] = out.get(m, K.zero) - 4 * a * c
    return {m: c for m, c in out.items() if c}


@dataclass
class CoverCheck:
    scalar: en.NFElement | None  # eliminated form / F0, None if not proportional
    leading_ratio: en.NFElement
    disc_scalar: en.NFElement | None  # disc of F0 as a quadratic in x^2, over z p0(y, z)
    point_residual: bool  # F0 vanishes at an exact point of the system

    @property
    def ok(self) -> bool:
        return self.scalar is not None and self.disc_scalar is not None and self.point_residual

    def to_json(self):
        return {"scalar": None if self.scalar is None else str(self.scalar),
                "leading_ratio": str(self.leading_ratio),
                "disc_scalar": None if self.disc_scalar is None else str(self.disc_scalar),
                "point_on_quartic": self.point_residual, "ok": self.ok}


def _system_point_residual(system: CoverSystem, F0: dict, seed: int) -> bool:
    """Evaluate F0(w, t, 1) at a point of the system with t in Q.

    u lives in K[u]/(u^2 - A) with A = cubic_scale cubic(t) / u_coeff; elements
    are pairs (c0, c1).  F0 is even in x so only w^2 = (2u + q(t)) / w_coeff enters.
    """
    rng = random.Random(seed)
    t = K([Fraction(rng.randint(-9, 9), rng.randint(1, 4))])
    A = system.cubic_scale * sum((ci * t**i for i, ci in enumerate(system.cubic)), K.zero) / system.u_coeff
    qt = sum((qi * t**i for i, qi in enumerate(system.q)), K.zero)
    w2 = (qt / system.w_coeff, 2 / system.w_coeff)

    def mul(x, y):
        return (x[0] * y[0] + x[1] * y[1] * A, x[0] * y[1] + x[1] * y[0])

    acc = (K.zero, K.zero)
    for (i, j, _), c in F0.items():
        term = (c * t**j, K.zero)
        for _ in range(i // 2):
            term = mul(term, w2)
        acc = (acc[0] + term[0], acc[1] + term[1])
    return not acc[0] and not acc[1]


def cover_check(system: CoverSystem = PRINTED_COVER, seed: int = 0) -> CoverCheck:
    elim = cover_eliminate(system)
    F0 = SIMPLIFIED_F0.as_dict()
    scalar = form_proportional(elim, F0)
    lead = elim[(4, 0, 0)] / F0[(4, 0, 0)]
    G0 = {(m[0] // 2, m[1], m[2]): c for m, c in F0.items()}
    disc = binary_disc_of_weighted(G0)
    p0 = {(i, 4 - i): P0_SCALE * ci for i, ci in enumerate(P0_CUBIC)}
    disc_scalar = form_proportional(disc, p0)
    return CoverCheck(scalar, lead, disc_scalar, _system_point_residual(system, F0, seed))


def cover_identity_check(system: CoverSystem = PRINTED_COVER, seed: int = 0) -> CoverCheck:
    """Hard check that eliminating u from the cover system gives the simplified quartic."""
    chk = cover_check(system, seed)
    if not chk.ok:
        raise CoverIdentityError(f"cover system does not reproduce F0: {chk.to_json()}")
    return chk


# ---------------------------------------------------------------------------
# twisting


def primitive_model(F: dict) -> dict:
    return _integral_primitive(F)


def twist(F: TernaryQuartic, delta) -> TernaryQuartic:
    """Replace x^2 by x^2/delta and clear denominators."""
    delta = _k(delta)
    if not delta:
        raise ValueError("delta must be nonzero")
    if not F.is_even_in_x():
        raise ValueError("form is not even in x")
    out = {}
    for m, c in F.as_dict().items():
        out[m] = c * delta ** (2 - m[0] // 2)
    return TernaryQuartic.from_dict(primitive_model(out))


def proportional_by_unit(A: TernaryQuartic, B: TernaryQuartic):
    """Scalar c with A = c B when c is a unit of Z[nu], else None."""
    c = form_proportional(A.as_dict(), B.as_dict())
    if c is None or abs(c.norm()) != 1 or not c.is_integral_coords():
        return None
    return c


# ---------------------------------------------------------------------------
# finite fields as log tables


@numba.njit(cache=True)
def _tables(p, n, mod):
    """exp (codes of g^k, k < Q - 1) and log (log[0] = Q - 1) for x = g mod a primitive modulus."""
    Q = p**n
    M = Q - 1
    exp = np.empty(M, dtype=np.int64)
    log = np.empty(Q, dtype=np.int64)
    log[0] = M
    cur = np.zeros(n, dtype=np.int64)
    cur[0] = 1
    for k in range(M):
        code = 0
        for i in range(n - 1, -1, -1):
            code = code * p + cur[i]
        exp[k] = code
        log[code] = k
        top = cur[n - 1]
        for i in range(n - 1, 0, -1):
            cur[i] = (cur[i - 1] - top * mod[i]) % p
        cur[0] = (-top * mod[0]) % p
    return exp, log


class LogField:
    """F_Q, Q = p^n, with elements stored as discrete logs (zero = Q - 1).

    Element codes are sum c_i p^i on the basis 1, g, ..., g^(n-1) of a primitive
    modulus, so F_p sits inside as the codes 0..p-1.
    """

    def __init__(self, p: int, n: int):
        if p == 2:
            raise ValueError("characteristic 2 is not supported")
        self.p, self.n = p, n
        self.Q = p**n
        self.M = self.Q - 1  # also the log of zero
        self.modulus = en.irreducible_poly(p, n, primitive=True)
        exp, log = _tables(p, n, np.array(self.modulus, dtype=np.int64))
        self.exp = np.append(exp, 0)
        self.log = log
        self.half = self.M // 2
        self._zech = None
        self._exp_digits = None

    @property
    def zech(self):
        """log(1 + g^k); zech[M] = log(1) = 0."""
        if self._zech is None:
            p = self.p
            exp = self.exp[:-1]
            digit0 = exp % p
            self._zech = np.append(self.log[exp - digit0 + (digit0 + 1) % p], 0)
        return self._zech

    @property
    def exp_digits(self) -> np.ndarray:
        """(Q - 1) x n table of the coordinates of g^k."""
        if self._exp_digits is None:
            codes = self.exp[:-1]
            out = np.empty((self.M, self.n), dtype=np.int64)
            for i in range(self.n):
                out[:, i] = codes % self.p
                codes = codes // self.p
            self._exp_digits = out
        return self._exp_digits

    def digits(self, lg: int) -> np.ndarray:
        code = int(self.exp[lg])
        out = np.zeros(self.n, dtype=np.int64)
        for i in range(self.n):
            out[i] = code % self.p
            code //= self.p
        return out

    # vectorized operations on logs
    def mul(self, a, b):
        M = self.M
        return np.where((a == M) | (b == M), M, (a + b) % M)

    def add(self, a, b):
        M = self.M
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        z = self.zech[(b - a) % M]
        s = np.where(z == M, M, (a + z) % M)
        return np.where(a == M, b, np.where(b == M, a, s))

    def neg(self, a):
        return np.where(a == self.M, self.M, (a + self.half) % self.M)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def inv(self, a):
        if np.any(a == self.M):
            raise ZeroDivisionError("inverse of zero")
        return (-a) % self.M

    def chi(self, a):
        return np.where(a == self.M, 0, 1 - 2 * (a % 2))

    def from_int(self, c: int) -> int:
        return int(self.log[c % self.p])

    def all_logs(self) -> np.ndarray:
        return np.arange(self.Q, dtype=np.int64)

    def scalar_pow(self, a: int, e: int) -> int:
        return self.M if a == self.M else (a * e) % self.M


@functools.lru_cache(maxsize=4)
def log_field(p: int, n: int) -> LogField:
    return LogField(p, n)


class ResidueMap:
    """Reduction Z[nu] -> F_Q at a prime ideal above p, with F_Q containing the residue field."""

    def __init__(self, P: en.PrimeIdeal, k: int):
        if P.p == 2:
            raise BadPrimeError("characteristic 2")
        self.P = P
        self.L = log_field(P.p, P.residue_degree * k)
        p = P.p
        L = self.L
        if P.residue_degree == 1:
            self.nu_log = L.from_int(P.root)
        else:
            s61 = L.from_int(61)
            assert s61 % 2 == 0
            root = L.add(L.from_int(1), s61 // 2)
            self.nu_log = int(L.mul(root, L.inv(np.int64(L.from_int(2)))))
        self.p = p

    def __call__(self, c: en.NFElement) -> int:
        a, b = c.coords
        p = self.p
        if a.denominator % p == 0 or b.denominator % p == 0:
            raise BadPrimeError("coefficient not integral at p")
        ai = a.numerator * pow(a.denominator, -1, p) % p
        bi = b.numerator * pow(b.denominator, -1, p) % p
        L = self.L
        return int(L.add(L.from_int(ai), L.mul(L.from_int(bi), self.nu_log)))


def _horner(L: LogField, coeffs: Sequence[int], X):
    """sum coeffs[i] X^i with logs; coeffs low degree first."""
    acc = np.full(np.shape(X), coeffs[-1], dtype=np.int64)
    for c in reversed(coeffs[:-1]):
        acc = L.add(L.mul(acc, X), c)
    return acc


def _roots_weighted_count(L: LogField, a, b, c):
    """#{x : a x^4 + b x^2 + c = 0} for log arrays b, c and scalar log a."""
    M = L.M
    b = np.asarray(b)
    c = np.asarray(c)
    out = np.zeros(b.shape, dtype=np.int64)
    if a == M:
        lin = b != M
        s = L.mul(L.neg(c), L.inv(np.where(lin, b, 0)))
        out = np.where(lin, 1 + L.chi(s), np.where(c == M, L.Q, 0))
        return out
    two_a = int(L.mul(a, L.from_int(2)))
    inv2a = (-two_a) % M
    disc = L.sub(L.mul(b, b), L.mul(L.mul(a, L.from_int(4)), c))
    chi_d = L.chi(disc)
    sq = np.where(chi_d == 1, disc // 2, M)
    mb = L.neg(b)
    s1 = L.mul(L.add(mb, sq), inv2a)
    s2 = L.mul(L.sub(mb, sq), inv2a)
    double = 1 + L.chi(s1)
    two = 2 + L.chi(s1) + L.chi(s2)
    return np.where(chi_d == 0, double, np.where(chi_d == 1, two, 0))


def _even_parts(F: TernaryQuartic, red: ResidueMap):
    a = red(F.coeff(4, 0, 0))
    b = [red(F.coeff(2, 0, 2)), red(F.coeff(2, 1, 1)), red(F.coeff(2, 2, 0))]  # in y at z = 1
    c = [red(F.coeff(0, 4 - i, i)) for i in range(4, -1, -1)]  # c(y, 1) low degree first
    return a, b, c


@numba.njit(cache=True, inline='always')
def _ffmul(x, y, out, tmp, mod, n, p):
    for i in range(2 * n - 1):
        tmp[i] = 0
    for i in range(n):
        if x[i]:
            for j in range(n):
                tmp[i + j] += x[i] * y[j]
    for k in range(2 * n - 2, n - 1, -1):
        c = tmp[k] % p
        if c:
            for i in range(n):
                tmp[k - n + i] -= c * mod[i]
    for i in range(n):
        out[i] = tmp[i] % p


@numba.njit(cache=True, inline='always')
def _code(x, n, p):
    c = 0
    for i in range(n - 1, -1, -1):
        c = c * p + x[i]
    return c


@numba.njit(cache=True, inline='always')
def _chi_code(code, log):
    if code == 0:
        return 0
    return 1 - 2 * (log[code] % 2)


@numba.njit(cache=True)
def _horner_ff(coeffs, y, out, tmp, tmp2, mod, n, p):
    d = coeffs.shape[0]
    for i in range(n):
        out[i] = coeffs[d - 1, i]
    for k in range(d - 2, -1, -1):
        _ffmul(out, y, tmp2, tmp, mod, n, p)
        for i in range(n):
            out[i] = (tmp2[i] + coeffs[k, i]) % p


@numba.njit(cache=True)
def _difference_table(coeffs, y0, table, tmp, tmp2, mod, n, p):
    """table[i] = i-th forward difference (step 1) of the polynomial at y0."""
    d = coeffs.shape[0]
    y = y0.copy()
    for t in range(d):
        _horner_ff(coeffs, y, table[t], tmp, tmp2, mod, n, p)
        y[0] = (y[0] + 1) % p
    for level in range(1, d):
        for t in range(d - 1, level - 1, -1):
            for i in range(n):
                table[t, i] = (table[t, i] - table[t - 1, i]) % p


@numba.njit(cache=True, inline='always')
def _step(table, n, p):
    d = table.shape[0]
    for t in range(d - 1):
        for i in range(n):
            v = table[t, i] + table[t + 1, i]
            if v >= p:
                v -= p
            table[t, i] = v


@numba.njit(cache=True)
def _even_affine_kernel(p, n, mod, log, exp_digits, disc, half_b, log_inv2a):
    """sum over y in F_Q of #{x : a x^4 + b(y) x^2 + c(y) = 0}.

    disc = b^2 - 4ac and half_b = -b/(2a) as polynomials in y; y runs over lines
    y0 + F_p and both are stepped by forward differences along each line.  The
    roots are half_b +- sqrt(disc)/(2a), with the product taken on logs.
    """
    Q = p**n
    M = Q - 1
    y0 = np.zeros(n, dtype=np.int64)
    Dt = np.zeros((disc.shape[0], n), dtype=np.int64)
    Bt = np.zeros((half_b.shape[0], n), dtype=np.int64)
    tmp = np.zeros(2 * n, dtype=np.int64)
    tmp2 = np.zeros(n, dtype=np.int64)
    total = 0
    for base in range(0, Q, p):
        x = base
        for i in range(n):
            y0[i] = x % p
            x //= p
        _difference_table(disc, y0, Dt, tmp, tmp2, mod, n, p)
        _difference_table(half_b, y0, Bt, tmp, tmp2, mod, n, p)
        for _ in range(p):
            dc = _code(Dt[0], n, p)
            if dc == 0:
                total += 1 + _chi_code(_code(Bt[0], n, p), log)
            else:
                ld = log[dc]
                if ld % 2 == 0:
                    j = ld // 2 + log_inv2a
                    if j >= M:
                        j -= M
                    cp = 0
                    cm = 0
                    for i in range(n - 1, -1, -1):
                        r = exp_digits[j, i]
                        v = Bt[0, i] + r
                        if v >= p:
                            v -= p
                        w = Bt[0, i] - r
                        if w < 0:
                            w += p
                        cp = cp * p + v
                        cm = cm * p + w
                    total += 2 + _chi_code(cp, log) + _chi_code(cm, log)
            _step(Dt, n, p)
            _step(Bt, n, p)
    return total


def _log_poly_mul(L: LogField, f, g):
    out = [L.M] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        for j, y in enumerate(g):
            out[i + j] = int(L.add(out[i + j], L.mul(x, y)))
    return out


def count_points_even_fast(F: TernaryQuartic, P: en.PrimeIdeal, k: int) -> int:
    """Same count as count_points_even, swept in compiled code on coordinates."""
    red = ResidueMap(P, k)
    L = red.L
    a, b, c = _even_parts(F, red)
    if a == L.M:
        return count_points_even(F, P, k)
    four_a = int(L.mul(a, L.from_int(4)))
    inv2a = (-int(L.mul(a, L.from_int(2)))) % L.M
    bb = _log_poly_mul(L, b, b)
    disc = [int(L.sub(bb[i] if i < len(bb) else L.M, L.mul(four_a, c[i]))) for i in range(5)]
    half_b = [int(L.mul(L.neg(x), inv2a)) for x in b]

    def digits(x):
        return L.digits(x) if x != L.M else np.zeros(L.n, dtype=np.int64)

    mod = np.array(L.modulus[:-1], dtype=np.int64)
    affine = int(_even_affine_kernel(L.p, L.n, mod, L.log, L.exp_digits, np.array([digits(x) for x in disc]),
                                     np.array([digits(x) for x in half_b]), inv2a))
    inf = int(_roots_weighted_count(L, a, np.array([b[2]]), np.array([c[4]]))[0])
    return affine + inf


def count_points_even(F: TernaryQuartic, P: en.PrimeIdeal, k: int) -> int:
    """#X(F_{N(P)^k}) for F = G(x^2, y, z), slicing by y (numpy log arithmetic)."""
    red = ResidueMap(P, k)
    L = red.L
    a, b, c = _even_parts(F, red)
    Y = L.all_logs()
    by = _horner(L, b, Y)
    cy = _horner(L, c, Y)
    affine = int(_roots_weighted_count(L, a, by, cy).sum())
    # z = 0: (x : 1 : 0) and (1 : 0 : 0)
    inf = int(_roots_weighted_count(L, a, np.array([b[2]]), np.array([c[4]]))[0])
    origin = 1 if a == L.M else 0
    return affine + inf + origin


def _sp_trim(f, M):
    f = list(f)
    while f and f[-1] == M:
        f.pop()
    return f


def _sp_mulmod(L: LogField, f, g, m):
    M = L.M
    if not f or not g:
        return []
    prod = [M] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x == M:
            continue
        for j, y in enumerate(g):
            if y != M:
                prod[i + j] = int(L.add(prod[i + j], L.mul(x, y)))
    return _sp_mod(L, _sp_trim(prod, M), m)


def _sp_mod(L: LogField, f, m):
    M = L.M
    f = _sp_trim(f, M)
    dm = len(m) - 1
    inv_lead = int(L.inv(np.int64(m[-1])))
    while len(f) - 1 >= dm and f:
        c = int(L.mul(f[-1], inv_lead))
        shift = len(f) - 1 - dm
        for i, mi in enumerate(m):
            if mi != M:
                f[shift + i] = int(L.sub(f[shift + i], L.mul(c, mi)))
        f = _sp_trim(f, M)
    return f


def _sp_gcd_degree(L: LogField, f, g) -> int:
    M = L.M
    f, g = _sp_trim(f, M), _sp_trim(g, M)
    while g:
        f, g = g, _sp_mod(L, f, g)
    return len(f) - 1


def _count_distinct_roots(L: LogField, f) -> int:
    """deg gcd(f, y^Q - y) for a polynomial f given by logs; all of F_Q if f = 0."""
    M = L.M
    f = _sp_trim(f, M)
    if not f:
        return L.Q
    if len(f) == 1:
        return 0
    r = [0]
    base = _sp_mod(L, [M, 0], f)
    e = L.Q
    while e:
        if e & 1:
            r = _sp_mulmod(L, r, base, f)
        base = _sp_mulmod(L, base, base, f)
        e >>= 1
    h = list(r) + [M] * max(0, 2 - len(r))
    h[1] = int(L.sub(h[1], 0))
    return _sp_gcd_degree(L, f, h)


def count_points_slices(F: TernaryQuartic, P: en.PrimeIdeal, k: int) -> int:
    """#X(F_{N(P)^k}) for any quartic: roots of F(x0, y, 1) per x-slice plus the line z = 0."""
    red = ResidueMap(P, k)
    L = red.L
    Fd = {m: red(c) for m, c in F.as_dict().items()}
    total = 0
    for x0 in range(L.Q):
        coeffs = [L.M] * 5
        for (i, j, _), c in Fd.items():
            coeffs[j] = int(L.add(coeffs[j], L.mul(c, L.scalar_pow(x0, i) if i else 0)))
        total += _count_distinct_roots(L, coeffs)
    line = [L.M] * 5
    for (i, j, kk), c in Fd.items():
        if kk == 0:
            line[i] = int(L.add(line[i], c))
    total += _count_distinct_roots(L, line)
    total += 1 if L.M == Fd.get((4, 0, 0), L.M) else 0
    return total


def count_points_brute(F: TernaryQuartic, P: en.PrimeIdeal, k: int) -> int:
    """Projective points by evaluating F on every normalized triple."""
    red = ResidueMap(P, k)
    L = red.L
    Fd = {m: red(c) for m, c in F.as_dict().items()}
    A = L.all_logs()
    X, Y = np.meshgrid(A, A, indexing="ij")
    X, Y = X.ravel(), Y.ravel()

    def ev(xs, ys, zs):
        acc = np.full(xs.shape, L.M, dtype=np.int64)
        for (i, j, kk), c in Fd.items():
            t = np.full(xs.shape, c, dtype=np.int64)
            for var, e in ((xs, i), (ys, j), (zs, kk)):
                if e:
                    t = L.mul(t, np.where(var == L.M, L.M, (var * e) % L.M))
            acc = L.add(acc, t)
        return acc

    one = np.zeros_like(X)
    n = int(np.sum(ev(X, Y, one) == L.M))
    n += int(np.sum(ev(A, np.zeros_like(A), np.full_like(A, L.M)) == L.M))
    n += int(ev(np.array([0]), np.array([L.M]), np.array([L.M]))[0] == L.M)
    return n


def count_points(F: TernaryQuartic, P: en.PrimeIdeal, k: int = 1) -> int:
    if P.p == 2:
        raise BadPrimeError("residue characteristic 2")
    if F.is_even_in_x():
        return count_points_even_fast(F, P, k)
    return count_points_slices(F, P, k)


def weil_ok(n: int, q: int, g: int = 3) -> bool:
    return (n - q - 1) ** 2 <= 4 * g * g * q


# ---------------------------------------------------------------------------
# L-polynomials


@dataclass
class LPolynomial:
    p: int
    q: int
    coeffs: tuple  # 1 + c_1 T + ... + c_{2g} T^{2g}

    @property
    def genus(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def functional_equation_ok(self) -> bool:
        g, c, q = self.genus, self.coeffs, self.q
        return all(c[2 * g - i] == q ** (g - i) * c[i] for i in range(g + 1))

    def real_weil_poly(self) -> list:
        """h(W) with T^-g L(T) = h(T^-1 + qT), so h(W) = prod (W - (alpha + q/alpha)); low degree first."""
        g, c, q = self.genus, self.coeffs, self.q
        P = [[2], [0, 1]]
        for _ in range(g - 1):
            a, b = P[-1], P[-2]
            nxt = [0] + a
            for i, x in enumerate(b):
                nxt[i] -= q * x
            P.append(nxt)
        h = [0] * (g + 1)
        h[0] = c[g]
        for i in range(g):
            for j, x in enumerate(P[g - i]):
                h[j] += c[i] * x
        return h

    def root_moduli_ok(self, dps: int = 30) -> bool:
        """Reciprocal roots all have absolute value sqrt(q).

        Equivalent to h(W) having only real roots, all with W^2 <= 4q.  Repeated
        roots are fine here, unlike a direct numerical root finder on L.
        """
        W = sympy.Symbol("W")
        h = self.real_weil_poly()
        poly = sympy.Poly(list(reversed(h)), W)
        roots = sympy.real_roots(poly)
        if len(roots) != self.genus:
            return False
        bound = 4 * self.q
        tol = sympy.Rational(1, 10**dps)
        return all(sympy.N(r**2, dps + 10) <= bound + tol for r in roots)

    def at_sign(self, s: int) -> "LPolynomial":
        return LPolynomial(self.p, self.q, tuple(c * s**i for i, c in enumerate(self.coeffs)))

    def to_json(self):
        return {"p": self.p, "q": self.q, "coeffs": list(self.coeffs)}


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_divmod(a, b):
    """Division of integer polynomials (low degree first) with Fraction quotient."""
    a = [Fraction(x) for x in a]
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        c = a[-1] / b[-1]
        s = len(a) - len(b)
        q[s] = c
        for i, y in enumerate(b):
            a[s + i] -= c * y
        a.pop()
    return q, a


def lpoly_from_counts(counts: Sequence[int], q: int, p: int, g: int = 3) -> LPolynomial:
    """L(T) from #X(F_{q^k}), k = 1..g, via Newton's identities and the functional equation."""
    S = [q**k + 1 - n for k, n in enumerate(counts, start=1)]
    e = [Fraction(1)]
    for k in range(1, g + 1):
        acc = sum(((-1) ** (i - 1) * e[k - i] * S[i - 1] for i in range(1, k + 1)), Fraction(0))
        e.append(acc / k)
    if any(x.denominator != 1 for x in e):
        raise ArithmeticError("non-integral L-polynomial coefficients")
    c = [int((-1) ** k * e[k]) for k in range(g + 1)]
    full = c + [q ** (g - i) * c[i] for i in range(g - 1, -1, -1)]
    return LPolynomial(p, q, tuple(full))


def lpoly_curve(F: TernaryQuartic, P: en.PrimeIdeal) -> LPolynomial:
    q = P.norm
    counts = [count_points(F, P, k) for k in (1, 2, 3)]
    return lpoly_from_counts(counts, q, P.p)


def _split_real_quadratic(t: en.NFElement):
    """t in Q(sqrt 3) inside Q(alpha), written as A + B sqrt 3 with sqrt 3 = alpha^2 + 4."""
    c0, c1, c2, c3 = t.coords
    if c1 or c3:
        raise ArithmeticError("Hecke trace is not in the real quadratic subfield")
    return c0 - 4 * c2, c2


def lpoly_modular(qe, P: en.PrimeIdeal, literal: bool = False) -> LPolynomial:
    """Base change of f to the prime P of K: the product over sqrt3 -> +-sqrt3 of
    (1 - t T + d T^2), t = trace of Frob_P and d = (chi(p) p)^deg.

    ``literal=True`` uses chi(p) instead of chi(p) p in both factors, the
    variant that fails the functional equation.
    """
    p, r = P.p, P.residue_degree
    ap = qe.a(p)
    chi = qe.chi(p)
    if r == 1:
        t, d = ap, chi * p
    elif r == 2:
        t, d = ap * ap - 2 * chi * p, p * p
    else:
        raise ValueError("residue degree must be 1 or 2")
    A, B = _split_real_quadratic(t)
    if literal and r == 1:
        d = chi
    # pairs (x, y) stand for x + y sqrt3
    f1 = [(Fraction(1), Fraction(0)), (-A, -B), (Fraction(d), Fraction(0))]
    f2 = [(Fraction(1), Fraction(0)), (-A, B), (Fraction(d), Fraction(0))]
    out = [(Fraction(0), Fraction(0))] * 5
    for i, (a1, b1) in enumerate(f1):
        for j, (a2, b2) in enumerate(f2):
            x, y = out[i + j]
            out[i + j] = (x + a1 * a2 + 3 * b1 * b2, y + a1 * b2 + a2 * b1)
    coeffs = []
    for x, y in out:
        if y or x.denominator != 1:
            raise ArithmeticError("modular L-factor is not integral")
        coeffs.append(int(x))
    return LPolynomial(p, P.norm, tuple(coeffs))


def count_elliptic(scale, cubic, P: en.PrimeIdeal, k: int = 1) -> int:
    """#E(F_{N(P)^k}) for scale*y^2 = cubic(x) (cubic low degree first, monic or not)."""
    red = ResidueMap(P, k)
    L = red.L
    s = red(_k(scale))
    cl = [red(_k(c)) for c in cubic]
    vals = _horner(L, cl, L.all_logs())
    ratio = L.mul(vals, (-s) % L.M)
    return int(L.Q + L.chi(ratio).sum()) + 1


def count_binary_quartic_curve(D: dict, P: en.PrimeIdeal, k: int = 1) -> int:
    """#C(F_{N(P)^k}) for the smooth model of w^2 = D(y, z), D a binary quartic {(j, k): c}."""
    red = ResidueMap(P, k)
    L = red.L
    coeffs = [red(D.get((j, 4 - j), K.zero)) for j in range(5)]
    vals = _horner(L, coeffs, L.all_logs())
    n = int(L.Q + L.chi(vals).sum())
    lead = coeffs[4]
    n += 1 if lead == L.M else int(1 + L.chi(np.array([lead]))[0])
    return n


def lpoly_elliptic(model, P: en.PrimeIdeal) -> LPolynomial:
    scale, cubic = model
    q = P.norm
    a = q + 1 - count_elliptic(scale, cubic, P)
    return LPolynomial(P.p, q, (1, -a, q))


def lpoly_quotient(F: TernaryQuartic, P: en.PrimeIdeal) -> LPolynomial:
    """L-polynomial of X / (x -> -x), the genus-one curve w^2 = b^2 - 4ac."""
    G = {(m[0] // 2, m[1], m[2]): c for m, c in F.as_dict().items()}
    D = binary_disc_of_weighted(G)
    q = P.norm
    a = q + 1 - count_binary_quartic_curve(D, P)
    return LPolynomial(P.p, q, (1, -a, q))


def divides(a: Sequence[int], b: Sequence[int]) -> bool:
    q, r = poly_divmod(b, a)
    return not any(r) and all(x.denominator == 1 for x in q)


def matching_signs(LX: LPolynomial, Lf: LPolynomial) -> list:
    return [s for s in (1, -1) if divides(Lf.at_sign(s).coeffs, LX.coeffs)]


# ---------------------------------------------------------------------------
# primes of K and 2-units


def good_primes(bound: int, kinds=("split", "inert"), min_p: int = 3) -> list:
    """Prime ideals of Z[nu] of norm <= bound above odd p >= min_p."""
    out = []
    for p in en.primes_up_to(bound):
        if p < max(min_p, 3) or p == 61:
            continue
        S = en.split_prime(p, K)
        if S.kind not in kinds:
            continue
        for P in S.primes:
            if P.norm <= bound:
                out.append(P)
    return out


def validate_fundamental_unit(ymax: int = 10):
    """Smallest solution of x^2 - 61 y^2 = +-4 with y <= ymax gives (x + y sqrt 61)/2."""
    for y in range(1, ymax + 1):
        for s in (-4, 4):
            x2 = 61 * y * y + s
            x = math.isqrt(x2)
            if x * x == x2:
                u = K([Fraction(x - y, 2), y])  # (x + y(2nu - 1))/2
                if u != U_FUND:
                    raise ArithmeticError(f"fundamental unit mismatch: {u}")
                return u, s
    raise ArithmeticError("no unit found")


def residue_symbol(delta: en.NFElement, P: en.PrimeIdeal) -> int:
    """Quadratic residue symbol (delta / P) by Euler's criterion in the residue field."""
    p = P.p
    if P.residue_degree == 1:
        r = P.root
        a, b = delta.coords
        v = (a.numerator * pow(a.denominator, -1, p) + b.numerator * pow(b.denominator, -1, p) * r) % p
        if v == 0:
            raise BadPrimeError("delta vanishes at P")
        e = pow(v, (p - 1) // 2, p)
        return 1 if e == 1 else -1
    n = delta.norm()
    v = n.numerator * pow(n.denominator, -1, p) % p
    if v == 0:
        raise BadPrimeError("delta vanishes at P")
    return 1 if pow(v, (p - 1) // 2, p) == 1 else -1


@dataclass(frozen=True)
class TwoUnitClass:
    exponents: tuple  # over (-1, u_fund, 2)

    def representative(self) -> en.NFElement:
        """Product of generators, with u replaced by u^-1 when that makes the value
        at the embedding nu > 0 smaller (same class, since u^2 is a square)."""
        out = K.one
        for g, e in zip(TWO_UNIT_GENERATORS, self.exponents):
            if e:
                out = out * g
        if self.exponents[1]:
            alt = out / (U_FUND * U_FUND)
            big = mpmath.mpf(1 + mpmath.sqrt(61)) / 2
            if abs(alt.embed(big)) < abs(out.embed(big)):
                out = alt
        return out

    def symbol(self, P: en.PrimeIdeal) -> int:
        s = 1
        for g, e in zip(TWO_UNIT_GENERATORS, self.exponents):
            if e:
                s *= residue_symbol(g, P)
        return s

    @classmethod
    def of(cls, delta: en.NFElement, primes: Sequence[en.PrimeIdeal] | None = None) -> "TwoUnitClass":
        """Class of a 2-unit, read off from residue symbols at enough primes."""
        primes = primes or good_primes(400, kinds=("split",), min_p=5)
        hits = [c for c in all_two_unit_classes() if all(c.symbol(P) == residue_symbol(delta, P) for P in primes)]
        if len(hits) != 1:
            raise ArithmeticError("could not pin down the 2-unit class")
        return hits[0]


def all_two_unit_classes() -> list:
    return [TwoUnitClass(e) for e in itertools.product((0, 1), repeat=3)]


@dataclass
class PrimeReport:
    p: int
    norm: int
    kind: str
    root: int | None
    counts: list
    LX: LPolynomial
    Lf: LPolynomial
    LE: LPolynomial
    signs: list
    decomposes: bool
    fe_ok: bool
    roots_ok: bool

    def to_json(self):
        return {"p": self.p, "norm": self.norm, "kind": self.kind, "root": self.root, "counts": self.counts,
                "LX": list(self.LX.coeffs), "Lf": list(self.Lf.coeffs), "LE": list(self.LE.coeffs),
                "signs": self.signs, "decomposes": self.decomposes, "fe_ok": self.fe_ok, "roots_ok": self.roots_ok}


def prime_report(F: TernaryQuartic, qe, P: en.PrimeIdeal, E_model=ELLIPTIC_MODEL, check_roots: bool = True) -> PrimeReport:
    q = P.norm
    counts = [count_points(F, P, k) for k in (1, 2, 3)]
    LX = lpoly_from_counts(counts, q, P.p)
    Lf = lpoly_modular(qe, P)
    LE = lpoly_elliptic(E_model, P)
    signs = matching_signs(LX, Lf)
    dec = False
    for s in signs:
        if tuple(poly_mul(Lf.at_sign(s).coeffs, LE.coeffs)) == LX.coeffs:
            dec = True
    fe = LX.functional_equation_ok() and Lf.functional_equation_ok() and LE.functional_equation_ok()
    roots = (LX.root_moduli_ok() and Lf.root_moduli_ok() and LE.root_moduli_ok()) if check_roots else True
    return PrimeReport(P.p, q, "split" if P.residue_degree == 1 else "inert", P.root, counts, LX, Lf, LE, signs,
                       dec, fe, roots)


def twist_search(F0: TernaryQuartic, qe, prime_bound: int, reports: list | None = None) -> TwoUnitClass:
    """The unique 2-unit class delta with (delta / P) = eps_P at every split P of norm <= bound."""
    validate_fundamental_unit()
    primes = good_primes(prime_bound, kinds=("split",), min_p=5)
    if not primes:
        raise AmbiguousTwistError(all_two_unit_classes(), 0)
    cands = all_two_unit_classes()
    used = 0
    for P in primes:
        LX = lpoly_curve(F0, P)
        signs = matching_signs(LX, lpoly_modular(qe, P))
        if reports is not None:
            reports.append((P.p, P.root, signs))
        if not signs:
            raise TwistMismatchError(f"no sign matches at P = ({P.p}, nu - {P.root})")
        if len(signs) == 2:
            # L(f, T) even in T: this prime says nothing about the twist
            continue
        used += 1
        cands = [c for c in cands if c.symbol(P) == signs[0]]
    if not cands:
        raise TwistMismatchError("no 2-unit class matches the sign pattern")
    if len(cands) > 1:
        raise AmbiguousTwistError(cands, used)
    return cands[0]


def residue_mod_two(a) -> int:
    """Image of an element of Z[alpha] in the residue field F_2 of the prime above 2.

    alpha^4 + 8 alpha^2 + 13 = (alpha + 1)^4 mod 2, so that prime is (2, alpha + 1)
    and reduction is evaluation at alpha = 1.
    """
    coords = a.coords if hasattr(a, "coords") else a
    if any(Fraction(c).denominator != 1 for c in coords):
        raise ValueError("not integral on the power basis")
    return int(sum(Fraction(c) for c in coords)) % 2


def frobenius_order_mod_two(qe, p: int) -> int:
    """Order of Frobenius at p in the mod-(alpha+1) image: 3 when a_p is odd, else 2 (order dividing 2)."""
    # characteristic polynomial x^2 - a_p x + chi(p) p over F_2; with p odd it is x^2 + a_p x + 1
    return 3 if residue_mod_two(qe.a(p)) == 1 else 2


# ---------------------------------------------------------------------------
# fixed-data self checks


def tangent_matrix():
    h = Fraction(1, 2)
    return [[K.one, K.zero, K.zero],
            [K.zero, K([3 * h]), (NU - 4) * h],
            [K.zero, (NU + 3) * h, K([-3 * h])]]


def endo_tangent_selfcheck() -> dict:
    T = tangent_matrix()
    T2 = _mat_mul(T, T)
    Mb = [[T[1][1], T[1][2]], [T[2][1], T[2][2]]]
    det = Mb[0][0] * Mb[1][1] - Mb[0][1] * Mb[1][0]
    diag_ok = all(T2[i][j] == ([1, 3, 3][i] if i == j else 0) for i in range(3) for j in range(3))
    return {"square_is_diag_1_3_3": diag_ok, "block_det": det, "ok": diag_ok and det == -3}


def primitive_solutions(coeffs: Sequence[int], modulus: int, prime: int) -> list:
    """Solutions of sum c_i x_i^2 = 0 mod modulus with some x_i a unit at prime."""
    out = []
    for v in itertools.product(range(modulus), repeat=len(coeffs)):
        if all(x % prime == 0 for x in v):
            continue
        if sum(c * x * x for c, x in zip(coeffs, v)) % modulus == 0:
            out.append(v)
    return out


def norm_obstruction() -> dict:
    """x^2 - 3y^2 - 2z^2 = 0 has no primitive solutions mod 9 or mod 8; N(1 + sqrt3) = -2."""
    conic = (1, -3, -2)
    mod3 = [(x, z) for x in range(3) for z in range(3) if (x * x - 2 * z * z) % 3 == 0]
    obstr9 = primitive_solutions(conic, 9, 3)
    obstr8 = primitive_solutions(conic, 8, 2)
    contrast = (1, -3, 2)  # x^2 - 3y^2 = -2z^2
    norm = 1 - 3 * 1  # (1 + sqrt3)(1 - sqrt3)
    return {
        "mod3_xz_solutions": mod3,
        "primitive_mod9": len(obstr9),
        "primitive_mod8": len(obstr8),
        "norm_1_plus_sqrt3": norm,
        "contrast_point": (1, 1, 1) if sum(c * 1 for c in contrast) == 0 else None,
        "contrast_primitive_mod9": len(primitive_solutions(contrast, 9, 3)),
        "contrast_primitive_mod8": len(primitive_solutions(contrast, 8, 2)),
        "ok": mod3 == [(0, 0)] and not obstr9 and norm == -2,
    }
