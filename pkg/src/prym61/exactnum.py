"""Exact arithmetic: the two fixed number fields, finite fields, polynomials mod p.

Elements are immutable.  Number field elements carry rational coordinates on
the power basis 1, theta, ..., theta^(d-1) of the defining polynomial.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to a rational")


# ---------------------------------------------------------------------------
# number fields


class NumberField:
    """Q[x]/(min_poly) for a monic irreducible integer polynomial.

    ``min_poly`` is given low degree first, e.g. ``(-15, -1, 1)`` for x^2 - x - 15.
    """

    def __init__(self, tag: str, min_poly: Sequence[int], var: str = "t"):
        if min_poly[-1] != 1:
            raise ValueError("min_poly must be monic")
        self.tag = tag
        self.min_poly = tuple(int(c) for c in min_poly)
        self.degree = len(min_poly) - 1
        self.var = var

    def __repr__(self):
        return f"NumberField({self.tag!r}, {self.min_poly})"

    def __reduce__(self):
        return (field_from_tag, (self.tag,))

    def __call__(self, coords) -> "NFElement":
        if isinstance(coords, NFElement):
            if coords.field is not self:
                raise ValueError("field mismatch")
            return coords
        if isinstance(coords, (int, Fraction)):
            coords = [coords]
        c = [_frac(x) for x in coords]
        if len(c) > self.degree:
            return NFElement(self, tuple(_reduce_poly(c, self.min_poly)))
        c += [Fraction(0)] * (self.degree - len(c))
        return NFElement(self, tuple(c))

    @property
    def gen(self) -> "NFElement":
        if self.degree == 1:
            return self([-self.min_poly[0]])
        return self([0, 1])

    @property
    def one(self) -> "NFElement":
        return self([1])

    @property
    def zero(self) -> "NFElement":
        return self([0])

    def embeddings(self, dps: int) -> list:
        """Complex roots of min_poly at ``dps`` digits, in a fixed order.

        Real roots come first in increasing order, then complex roots sorted by
        (real part, imaginary part).
        """
        return _roots_cached(self.min_poly, dps)

    def disc(self) -> int:
        return poly_discriminant(self.min_poly)


@functools.lru_cache(maxsize=64)
def _roots_cached(min_poly: tuple, dps: int) -> list:
    ctx = mpmath.MPContext()
    ctx.dps = dps + 20
    coeffs = [ctx.mpf(c) for c in reversed(min_poly)]
    if len(coeffs) == 2:
        roots = [-coeffs[1]]
    else:
        roots = ctx.polyroots(coeffs, maxsteps=200, extraprec=4 * dps + 100)
    eps = ctx.mpf(10) ** (-(dps + 10))
    out = []
    for r in roots:
        r = ctx.mpc(r)
        if abs(r.imag) < eps:
            r = ctx.mpc(r.real, 0)
        out.append(r)
    out.sort(key=lambda r: (r.imag != 0, float(r.real), float(r.imag)))
    return out


def _reduce_poly(c: list, mp: Sequence[int]) -> list:
    d = len(mp) - 1
    c = list(c)
    for i in range(len(c) - 1, d - 1, -1):
        lead = c[i]
        if lead:
            for j in range(d):
                c[i - d + j] -= lead * mp[j]
        c[i] = 0
    c = c[:d]
    c += [type(c[0])(0) if c else Fraction(0)] * (d - len(c))
    return c


class NFElement:
    __slots__ = ("field", "coords")

    def __init__(self, field: NumberField, coords: tuple):
        self.field = field
        self.coords = coords

    # -- construction helpers
    def _coerce(self, other) -> "NFElement":
        if isinstance(other, NFElement):
            if other.field is not self.field:
                raise ValueError(f"field mismatch: {self.field.tag} vs {other.field.tag}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field([other])
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return NFElement(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return NFElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return NFElement(self.field, tuple(a - b for a, b in zip(self.coords, o.coords)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NFElement(self.field, tuple(a * other for a in self.coords))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self.coords, o.coords
        d = len(a)
        prod = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return NFElement(self.field, tuple(_reduce_poly(prod, self.field.min_poly)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in number field")
            return NFElement(self.field, tuple(a / other for a in self.coords))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field([other])
        if not isinstance(other, NFElement):
            return NotImplemented
        return self.field is other.field and self.coords == other.coords

    def __hash__(self):
        return hash((self.field.tag, self.coords))

    def __bool__(self):
        return any(self.coords)

    def __repr__(self):
        return f"{self.field.tag}{list(map(str, self.coords))}"

    def __str__(self):
        v = self.field.var
        terms = []
        for i, c in enumerate(self.coords):
            if not c:
                continue
            mono = "" if i == 0 else (v if i == 1 else f"{v}^{i}")
            if mono and c == 1:
                s = mono
            elif mono and c == -1:
                s = "-" + mono
            else:
                s = f"{c}{'*' + mono if mono else ''}"
            terms.append(s)
        if not terms:
            return "0"
        return " + ".join(terms).replace("+ -", "- ")

    # -- linear algebra views
    def mult_matrix(self) -> list:
        """Matrix of multiplication by self on the power basis (columns = images)."""
        d = self.field.degree
        cols = []
        basis_elt = self.field.one
        g = self.field.gen
        for _ in range(d):
            cols.append((self * basis_elt).coords)
            basis_elt = basis_elt * g
        return [[cols[j][i] for j in range(d)] for i in range(d)]

    def inverse(self) -> "NFElement":
        if not self:
            raise ZeroDivisionError("inverse of zero in number field")
        m = self.mult_matrix()
        rhs = [Fraction(1)] + [Fraction(0)] * (self.field.degree - 1)
        return NFElement(self.field, tuple(solve_rational(m, rhs)))

    def norm(self) -> Fraction:
        return det_rational(self.mult_matrix())

    def trace(self) -> Fraction:
        m = self.mult_matrix()
        return sum((m[i][i] for i in range(len(m))), Fraction(0))

    def is_integral_coords(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def embed(self, root):
        """Value under the embedding theta -> root (an mpmath number)."""
        acc = 0
        for c in reversed(self.coords):
            acc = acc * root + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def embed_all(self, dps: int) -> list:
        ctx = mpmath.MPContext()
        ctx.dps = dps + 10
        out = []
        for r in self.field.embeddings(dps):
            acc = ctx.mpc(0)
            for c in reversed(self.coords):
                acc = acc * r + ctx.mpf(c.numerator) / c.denominator
            out.append(acc)
        return out

    def to_json(self) -> dict:
        return {"field": self.field.tag, "coords": [f"{c.numerator}/{c.denominator}" for c in self.coords]}


def nf_from_json(obj: dict) -> NFElement:
    F = field_from_tag(obj["field"])
    return F([Fraction(s) for s in obj["coords"]])


def nf_arith(a: NFElement, b: NFElement | None, op: str) -> NFElement:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown op {op!r}")


def nf_norm(a: NFElement) -> Fraction:
    return a.norm()


QQ = NumberField("Q", (0, 1), "1")
QSQRT61 = NumberField("Qsqrt61", (-15, -1, 1), "nu")
KF = NumberField("Kf", (13, 0, 8, 0, 1), "alpha")
QSQRT3 = NumberField("Qsqrt3", (-3, 0, 1), "s")

_FIELDS = {F.tag: F for F in (QQ, QSQRT61, KF, QSQRT3)}


def field_from_tag(tag: str) -> NumberField:
    try:
        return _FIELDS[tag]
    except KeyError:
        raise ValueError(f"unknown field tag {tag!r}") from None


def nu() -> NFElement:
    return QSQRT61.gen


def alpha() -> NFElement:
    return KF.gen


def sqrt61() -> NFElement:
    """sqrt(61) = 2*nu - 1."""
    return 2 * QSQRT61.gen - 1


def random_element(F: NumberField, rng: random.Random, size: int = 20) -> NFElement:
    return F([Fraction(rng.randint(-size, size), rng.randint(1, 5)) for _ in range(F.degree)])


# ---------------------------------------------------------------------------
# small exact linear algebra


def det_rational(m: list) -> Fraction:
    a = [[_frac(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            if a[i][k]:
                f = a[i][k] / a[k][k]
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return det


def solve_rational(m: list, rhs: list) -> list:
    n = len(m)
    a = [[_frac(x) for x in row] + [_frac(r)] for row, r in zip(m, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[k], a[piv] = a[piv], a[k]
        inv = 1 / a[k][k]
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [a[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# integer polynomials


def poly_discriminant(f: Sequence[int]) -> int:
    """Discriminant of an integer polynomial (low degree first) via the resultant."""
    n = len(f) - 1
    df = [i * f[i] for i in range(1, n + 1)]
    res = resultant_int(f, df)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * res // f[-1]


def resultant_int(f: Sequence[int], g: Sequence[int]) -> int:
    """Resultant via the Sylvester determinant (exact, small degrees)."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    fr = list(reversed(f))
    gr = list(reversed(g))
    for i in range(n):
        rows.append([0] * i + fr + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + gr + [0] * (size - n - 1 - i))
    d = det_rational(rows)
    assert d.denominator == 1
    return int(d)


# ---------------------------------------------------------------------------
# polynomials over F_p (lists of ints, low degree first)


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def pmod_normalize(a, p: int) -> list:
    return _trim([x % p for x in a])


def pmul(a: list, b: list, p: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return pmod_normalize(out, p)


def pdivmod(a: list, b: list, p: int):
    a = pmod_normalize(a, p)
    b = pmod_normalize(b, p)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    while len(r) >= len(b):
        c = r[-1] * inv % p
        k = len(r) - len(b)
        q[k] = c
        for j, y in enumerate(b):
            r[k + j] = (r[k + j] - c * y) % p
        _trim(r)
    return _trim(q), r


def pmod(a: list, b: list, p: int) -> list:
    return pdivmod(a, b, p)[1]


def pgcd(a: list, b: list, p: int) -> list:
    a = pmod_normalize(a, p)
    b = pmod_normalize(b, p)
    while b:
        a, b = b, pmod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def ppowmod(base: list, e: int, m: list, p: int) -> list:
    result = [1]
    base = pmod(base, m, p)
    while e:
        if e & 1:
            result = pmod(pmul(result, base, p), m, p)
        base = pmod(pmul(base, base, p), m, p)
        e >>= 1
    return result


def psub(a: list, b: list, p: int) -> list:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return pmod_normalize([x - y for x, y in zip(a, b)], p)


def pderiv(a: list, p: int) -> list:
    return pmod_normalize([i * a[i] for i in range(1, len(a))], p)


def is_irreducible_mod_p(f: list, p: int) -> bool:
    """Rabin's irreducibility test for a monic polynomial over F_p."""
    f = pmod_normalize(f, p)
    n = len(f) - 1
    if n <= 0:
        return False
    if n == 1:
        return True
    x = [0, 1]
    if ppowmod(x, p**n, f, p) != pmod(x, f, p):
        return False
    for q in _prime_factors(n):
        h = psub(ppowmod(x, p ** (n // q), f, p), x, p)
        if len(pgcd(f, h, p)) != 1:
            return False
    return True


def _prime_factors(n: int) -> list:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def prime_factors(n: int) -> list:
    return _prime_factors(n)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i in range(n + 1) if sieve[i]]


def factor_mod_p(f: Sequence[int], p: int) -> list:
    """Factor a monic polynomial over F_p into (monic irreducible, multiplicity) pairs.

    Squarefree decomposition, distinct-degree and equal-degree (Cantor-Zassenhaus)
    splitting.  The factor list is sorted for determinism.
    """
    f = pmod_normalize(list(f), p)
    if len(f) - 1 < 1:
        return []
    out: dict = {}
    for g, mult in _squarefree(f, p):
        for h in _ddf_edf(g, p):
            key = tuple(h)
            out[key] = out.get(key, 0) + mult
    return sorted(((list(k), m) for k, m in out.items()), key=lambda t: (len(t[0]), t[0]))


def _squarefree(f: list, p: int) -> list:
    # returns list of (squarefree factor, multiplicity)
    result = []
    i = 1
    fd = pderiv(f, p)
    if not fd:
        # f = g(x^p)
        g = [f[j] for j in range(0, len(f), p)]
        return [(h, m * p) for h, m in _squarefree(g, p)]
    c = pgcd(f, fd, p)
    w = pdivmod(f, c, p)[0]
    while len(w) > 1:
        y = pgcd(w, c, p)
        z = pdivmod(w, y, p)[0]
        if len(z) > 1:
            result.append((z, i))
        i += 1
        w = y
        c = pdivmod(c, y, p)[0]
    if len(c) > 1:
        g = [c[j] for j in range(0, len(c), p)]
        result.extend((h, m * p) for h, m in _squarefree(g, p))
    return result


def _ddf_edf(f: list, p: int) -> list:
    factors = []
    x = [0, 1]
    h = x
    d = 0
    g = list(f)
    while len(g) - 1 >= 2 * (d + 1):
        d += 1
        h = ppowmod(h, p, g, p)
        fac = pgcd(g, psub(h, x, p), p)
        if len(fac) > 1:
            factors.extend(_edf(fac, d, p))
            g = pdivmod(g, fac, p)[0]
            h = pmod(h, g, p)
    if len(g) > 1:
        factors.append(g)
    return factors


def _edf(f: list, d: int, p: int) -> list:
    n = len(f) - 1
    if n == d:
        return [f]
    rng = random.Random(p * 1000003 + n)
    while True:
        a = [rng.randrange(p) for _ in range(n)]
        a = _trim(a)
        if len(a) < 2:
            continue
        if p == 2:
            # trace map a + a^2 + ... + a^(2^(d-1))
            t = list(a)
            cur = list(a)
            for _ in range(d - 1):
                cur = pmod(pmul(cur, cur, p), f, p)
                t = _padd(t, cur, p)
            b = t
        else:
            b = psub(ppowmod(a, (p**d - 1) // 2, f, p), [1], p)
        g = pgcd(f, b, p)
        if 1 < len(g) < len(f):
            return _edf(g, d, p) + _edf(pdivmod(f, g, p)[0], d, p)


def _padd(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return pmod_normalize([x + y for x, y in zip(a, b)], p)


def roots_mod_p(f: Sequence[int], p: int) -> list:
    """Sorted distinct roots in F_p."""
    return sorted((-g[0]) % p for g, _ in factor_mod_p(f, p) if len(g) == 2)


# ---------------------------------------------------------------------------
# primes in number fields


@dataclass(frozen=True)
class PrimeIdeal:
    p: int
    poly: tuple  # monic irreducible factor of min_poly mod p (low degree first)
    residue_degree: int
    ramification: int

    @property
    def root(self):
        """Root of min_poly mod p when the residue degree is one."""
        if self.residue_degree != 1:
            return None
        return (-self.poly[0]) % self.p

    @property
    def norm(self) -> int:
        return self.p**self.residue_degree


@dataclass(frozen=True)
class PrimeSplit:
    p: int
    field_tag: str
    primes: tuple
    index_divisible: bool = False

    @property
    def kind(self) -> str:
        if any(P.ramification > 1 for P in self.primes):
            return "ramified"
        if all(P.residue_degree == 1 for P in self.primes):
            return "split"
        if len(self.primes) == 1:
            return "inert"
        return "partial"

    def check(self, degree: int) -> bool:
        return sum(P.residue_degree * P.ramification for P in self.primes) == degree


def split_prime(p: int, F: NumberField) -> PrimeSplit:
    """Dedekind factorization of p in the power-basis order.

    ``index_divisible`` flags primes dividing the discriminant of min_poly where
    the factorization of min_poly mod p need not reflect the maximal order.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    facs = factor_mod_p(F.min_poly, p)
    primes = tuple(PrimeIdeal(p, tuple(g), len(g) - 1, m) for g, m in facs)
    disc = F.disc()
    idx = disc % p == 0 and F.tag not in ("Qsqrt61", "Q")
    return PrimeSplit(p, F.tag, primes, idx)


def embedding_bound_C(basis: Sequence[NFElement], dps: int = 50) -> float:
    """C = max_j sum_tau |c_{j,tau}| for the inverse of the embedding matrix (tau(w_j)).

    Any field element x = sum_j lambda_j w_j has |lambda_j| <= C max_tau |tau(x)|.
    """
    F = basis[0].field
    d = F.degree
    if len(basis) != d:
        raise ValueError("basis has wrong length")
    ctx = mpmath.MPContext()
    ctx.dps = dps
    M = ctx.matrix(d, d)
    for t, root in enumerate(F.embeddings(dps)):
        for j, w in enumerate(basis):
            acc = ctx.mpc(0)
            for c in reversed(w.coords):
                acc = acc * root + ctx.mpf(c.numerator) / c.denominator
            M[t, j] = acc
    if abs(ctx.det(M)) < ctx.mpf(10) ** (-dps // 2):
        raise ValueError("singular embedding matrix")
    Minv = M**-1
    best = ctx.mpf(0)
    for j in range(d):
        s = ctx.fsum(abs(Minv[j, t]) for t in range(d))
        best = max(best, s)
    # round up slightly so the bound is safe
    return float(best) * (1 + 1e-12)


def power_basis(F: NumberField) -> list:
    return [F([0] * i + [1]) for i in range(F.degree)]


# ---------------------------------------------------------------------------
# finite fields


@functools.lru_cache(maxsize=None)
def irreducible_poly(p: int, k: int, primitive: bool = False) -> tuple:
    """Deterministic monic irreducible (optionally primitive) polynomial of degree k over F_p.

    Scans candidates x^k + c_{k-1} x^{k-1} + ... + c_0 in increasing lexicographic
    order of (c_0, c_1, ...).
    """
    if k == 1:
        if not primitive:
            return (0, 1)
        g = primitive_root(p)
        return ((-g) % p, 1)
    order = p**k - 1
    qs = _prime_factors(order)
    total = p**k
    for code in range(total):
        c = []
        x = code
        for _ in range(k):
            c.append(x % p)
            x //= p
        if c[0] == 0:
            continue
        f = c + [1]
        if not is_irreducible_mod_p(f, p):
            continue
        if primitive:
            if any(ppowmod([0, 1], order // q, f, p) == [1] for q in qs):
                continue
        return tuple(f)
    raise RuntimeError("no irreducible polynomial found")


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    qs = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise RuntimeError("no primitive root")


class FiniteField:
    """F_{p^k} = F_p[x]/(modulus)."""

    def __init__(self, p: int, k: int = 1, modulus: Sequence[int] | None = None):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.k = k
        self.modulus = tuple(modulus) if modulus is not None else irreducible_poly(p, k)
        if len(self.modulus) != k + 1:
            raise ValueError("modulus degree mismatch")
        self.order = p**k

    def __repr__(self):
        return f"GF({self.p}^{self.k})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __call__(self, x) -> "FiniteFieldElem":
        if isinstance(x, FiniteFieldElem):
            return x
        if isinstance(x, int):
            return FiniteFieldElem(self, (x % self.p,) + (0,) * (self.k - 1))
        c = [int(v) % self.p for v in x]
        if len(c) > self.k:
            c = pmod(c, list(self.modulus), self.p)
        c = list(c) + [0] * (self.k - len(c))
        return FiniteFieldElem(self, tuple(c))

    @property
    def gen(self):
        return self([0, 1]) if self.k > 1 else self(-self.modulus[0])

    def elements(self) -> Iterable["FiniteFieldElem"]:
        for code in range(self.order):
            c = []
            x = code
            for _ in range(self.k):
                c.append(x % self.p)
                x //= self.p
            yield FiniteFieldElem(self, tuple(c))


class FiniteFieldElem:
    __slots__ = ("field", "coords")

    def __init__(self, field: FiniteField, coords: tuple):
        self.field = field
        self.coords = coords

    def _c(self, o):
        if isinstance(o, FiniteFieldElem):
            if o.field != self.field:
                raise ValueError("finite field mismatch")
            return o
        if isinstance(o, int):
            return self.field(o)
        return NotImplemented

    def __add__(self, o):
        o = self._c(o)
        p = self.field.p
        return FiniteFieldElem(self.field, tuple((a + b) % p for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FiniteFieldElem(self.field, tuple((-a) % p for a in self.coords))

    def __sub__(self, o):
        return self + (-self._c(o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._c(o)
        F = self.field
        prod = pmul(_trim(list(self.coords)), _trim(list(o.coords)), F.p)
        return F(pmod(prod, list(F.modulus), F.p) if prod else [0])

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        F = self.field
        r = F(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero in finite field")
        return self ** (self.field.order - 2)

    def __truediv__(self, o):
        return self * self._c(o).inverse()

    def __eq__(self, o):
        if isinstance(o, int):
            o = self.field(o)
        if not isinstance(o, FiniteFieldElem):
            return NotImplemented
        return self.field == o.field and self.coords == o.coords

    def __hash__(self):
        return hash(self.coords)

    def __bool__(self):
        return any(self.coords)

    def __repr__(self):
        return f"FF{self.coords}"

    def is_square(self) -> bool:
        if not self:
            return True
        if self.field.p == 2:
            return True
        return self ** ((self.field.order - 1) // 2) == 1
