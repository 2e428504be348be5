"""q-expansions of the level-61 newforms from a modular relation and Newton lifting.

Outline for a target form g (coefficients in Z or Z[alpha]):

1. eigenvalue seeds a_n(g), n <= b, from modular symbols;
2. a weight-0 function v built from g, and u = 1/j, reduced mod a prime p
   that splits completely in the coefficient field and is NTT-friendly;
3. a relation Phi(u, v) = 0 found by linear algebra on the first b
   coefficients;
4. Newton iteration in F_p[[q]] extends v (hence g) to B coefficients;
5. CRT over the primes above p and the Deligne bound recover exact values.

For f0 (rational, level 61) we take v0 = f0^2 / E4, for f (the nebentypus
form) v = (f / f0)^2.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from . import exactnum as en
from . import modsym as ms

log = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# number-theoretic transform


_NTT_CACHE: dict = {}


def _ntt_tables(n: int, p: int, g: int):
    key = (n, p)
    if key in _NTT_CACHE:
        return _NTT_CACHE[key]
    if (p - 1) % n:
        raise ValueError(f"{n} does not divide p - 1")
    w = pow(g, (p - 1) // n, p)
    logn = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.int64)
    for i in range(logn):
        rev |= ((np.arange(n) >> i) & 1) << (logn - 1 - i)
    stages = []
    h = 1
    while h < n:
        wh = pow(w, n // (2 * h), p)
        tw = np.empty(h, dtype=np.int64)
        x = 1
        for i in range(h):
            tw[i] = x
            x = x * wh % p
        stages.append(tw)
        h *= 2
    winv = pow(w, p - 2, p)
    stages_inv = []
    h = 1
    while h < n:
        wh = pow(winv, n // (2 * h), p)
        tw = np.empty(h, dtype=np.int64)
        x = 1
        for i in range(h):
            tw[i] = x
            x = x * wh % p
        stages_inv.append(tw)
        h *= 2
    _NTT_CACHE[key] = (rev, stages, stages_inv, pow(n, p - 2, p))
    return _NTT_CACHE[key]


def ntt(a: np.ndarray, p: int, g: int, inverse: bool = False) -> np.ndarray:
    """Iterative radix-2 transform of a length-2^k int64 array mod p."""
    n = len(a)
    rev, stages, stages_inv, ninv = _ntt_tables(n, p, g)
    a = a[rev].copy()
    tw_list = stages_inv if inverse else stages
    h = 1
    for tw in tw_list:
        a = a.reshape(-1, 2, h)
        u = a[:, 0, :]
        v = a[:, 1, :] * tw % p
        a = np.stack(((u + v) % p, (u - v) % p), axis=1)
        h *= 2
    a = a.reshape(n)
    if inverse:
        a = a * ninv % p
    return a


class NTTContext:
    def __init__(self, p: int):
        self.p = p
        self.g = en.primitive_root(p)
        self.max_two = ((p - 1) & -(p - 1)).bit_length() - 1

    def mul(self, a: np.ndarray, b: np.ndarray, n_out: int) -> np.ndarray:
        """First n_out coefficients of a*b mod p."""
        p = self.p
        la, lb = min(len(a), n_out), min(len(b), n_out)
        if la == 0 or lb == 0:
            return np.zeros(n_out, dtype=np.int64)
        if min(la, lb) <= 32:
            return _school_small(a[:la], b[:lb], n_out, p)
        size = 1 << (la + lb - 1).bit_length()
        if size.bit_length() - 1 > self.max_two:
            raise ValueError("series too long for this NTT prime")
        fa = np.zeros(size, dtype=np.int64)
        fa[:la] = a[:la]
        fb = np.zeros(size, dtype=np.int64)
        fb[:lb] = b[:lb]
        A = ntt(fa, p, self.g)
        Bt = ntt(fb, p, self.g)
        c = ntt(A * Bt % p, p, self.g, inverse=True)
        out = np.zeros(n_out, dtype=np.int64)
        m = min(n_out, size)
        out[:m] = c[:m]
        return out

    def transform(self, a: np.ndarray, size: int) -> np.ndarray:
        fa = np.zeros(size, dtype=np.int64)
        fa[: min(len(a), size)] = a[:size]
        return ntt(fa, self.p, self.g)

    def mul_pre(self, a: np.ndarray, Bt: np.ndarray, n_out: int) -> np.ndarray:
        """a * b where Bt is the transform of b at size len(Bt)."""
        size = len(Bt)
        A = self.transform(a[:n_out], size)
        c = ntt(A * Bt % self.p, self.p, self.g, inverse=True)
        return c[:n_out].copy()


def _school_small(a, b, n_out, p):
    out = np.zeros(n_out, dtype=np.int64)
    if len(a) > len(b):
        a, b = b, a
    for i, x in enumerate(a.tolist()):
        if x and i < n_out:
            m = min(len(b), n_out - i)
            out[i : i + m] = (out[i : i + m] + x * b[:m]) % p
    return out


def schoolbook_mul(a: Sequence[int], b: Sequence[int], n_out: int, p: int) -> list:
    """Reference product in pure Python integers."""
    out = [0] * n_out
    for i, x in enumerate(a):
        if i >= n_out:
            break
        for j, y in enumerate(b):
            if i + j >= n_out:
                break
            out[i + j] += x * y
    return [x % p for x in out]


# ---------------------------------------------------------------------------
# power series mod p


@dataclass
class SeriesFp:
    """Truncated power series sum_{i < prec} c_i q^i over F_p."""

    p: int
    coeffs: np.ndarray

    @property
    def prec(self) -> int:
        return len(self.coeffs)

    @property
    def valuation(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[0]) if len(nz) else self.prec

    def __getitem__(self, i):
        return int(self.coeffs[i])

    def truncate(self, n: int) -> "SeriesFp":
        c = np.zeros(n, dtype=np.int64)
        m = min(n, self.prec)
        c[:m] = self.coeffs[:m]
        return SeriesFp(self.p, c)

    def __add__(self, o):
        n = min(self.prec, o.prec)
        return SeriesFp(self.p, (self.coeffs[:n] + o.coeffs[:n]) % self.p)

    def __sub__(self, o):
        n = min(self.prec, o.prec)
        return SeriesFp(self.p, (self.coeffs[:n] - o.coeffs[:n]) % self.p)

    def scale(self, c: int) -> "SeriesFp":
        return SeriesFp(self.p, self.coeffs * (c % self.p) % self.p)

    def mul(self, o: "SeriesFp", ctx: NTTContext) -> "SeriesFp":
        n = min(self.prec, o.prec)
        return SeriesFp(self.p, ctx.mul(self.coeffs, o.coeffs, n))

    def shift_down(self, k: int) -> "SeriesFp":
        """Divide by q^k (the first k coefficients must vanish)."""
        if np.any(self.coeffs[:k]):
            raise ValueError("series is not divisible by q^k")
        return SeriesFp(self.p, self.coeffs[k:].copy())

    def shift_up(self, k: int) -> "SeriesFp":
        return SeriesFp(self.p, np.concatenate([np.zeros(k, dtype=np.int64), self.coeffs]))

    def inverse(self, ctx: NTTContext) -> "SeriesFp":
        """Newton inversion of a unit series."""
        p = self.p
        c0 = int(self.coeffs[0])
        if c0 == 0:
            raise ZeroDivisionError("series is not a unit")
        n = self.prec
        inv = np.array([pow(c0, p - 2, p)], dtype=np.int64)
        k = 1
        while k < n:
            k2 = min(2 * k, n)
            e = ctx.mul(self.coeffs[:k2], inv, k2)  # a * inv
            e = (-e) % p
            e[0] = (e[0] + 2) % p
            inv = ctx.mul(inv, e, k2)
            k = k2
        return SeriesFp(p, inv)

    def sqrt_unit(self, ctx: NTTContext) -> "SeriesFp":
        """Square root of a series with constant term 1, constant term of result 1."""
        p = self.p
        if int(self.coeffs[0]) != 1:
            raise ValueError("constant term must be 1")
        n = self.prec
        s = np.array([1], dtype=np.int64)
        inv2 = (p + 1) // 2
        k = 1
        while k < n:
            k2 = min(2 * k, n)
            s_inv = SeriesFp(p, np.concatenate([s, np.zeros(k2 - len(s), dtype=np.int64)])).inverse(ctx).coeffs
            t = ctx.mul(self.coeffs[:k2], s_inv, k2)
            snew = np.zeros(k2, dtype=np.int64)
            snew[: len(s)] = s
            s = (snew + t) % p * inv2 % p
            k = k2
        return SeriesFp(p, s)


# ---------------------------------------------------------------------------
# arithmetic functions and Eisenstein series


def sigma_sieve(B: int, k: int) -> list:
    """sigma_k(n) for 0 <= n <= B (index 0 is 0), exact integers."""
    out = [0] * (B + 1)
    for d in range(1, B + 1):
        dk = d**k
        for m in range(d, B + 1, d):
            out[m] += dk
    return out


def sigma_sieve_mod(B: int, k: int, p: int) -> np.ndarray:
    out = np.zeros(B + 1, dtype=np.int64)
    for d in range(1, B + 1):
        out[d::d] += pow(d, k, p)
        if d % 64 == 0:
            out %= p
    return out % p


def divisor_counts(B: int) -> np.ndarray:
    out = np.zeros(B + 1, dtype=np.int64)
    for d in range(1, B + 1):
        out[d::d] += 1
    return out


def eisenstein_E4(B: int, p: int) -> SeriesFp:
    c = 240 * sigma_sieve_mod(B - 1, 3, p) % p
    c[0] = 1
    return SeriesFp(p, c)


def eisenstein_E6(B: int, p: int) -> SeriesFp:
    c = (-504) * sigma_sieve_mod(B - 1, 5, p) % p
    c[0] = 1
    return SeriesFp(p, c)


def u_series(B: int, p: int, ctx: NTTContext | None = None) -> SeriesFp:
    """1/j = (E4^3 - E6^2) / (12 E4)^3 to B coefficients (q^0 .. q^(B-1))."""
    if p <= 3:
        raise ValueError("need p > 3")
    ctx = ctx or NTTContext(p)
    E4 = eisenstein_E4(B, p)
    E6 = eisenstein_E6(B, p)
    E4c = E4.mul(E4, ctx).mul(E4, ctx)
    num = E4c - E6.mul(E6, ctx)
    den = E4c.scale(1728)
    return num.mul(den.inverse(ctx), ctx)


# ---------------------------------------------------------------------------
# prime selection


def max_sigma0_sqrt(B: int) -> float:
    d = divisor_counts(B)
    n = np.arange(B + 1)
    return float(np.max(d * np.sqrt(n)))


def deligne_prime_bound(B: int, C: float) -> int:
    return int(math.ceil(1 + 2 * C * max_sigma0_sqrt(B)))


def choose_prime(B: int, C: float, F: en.NumberField) -> int:
    """Smallest prime p >= 1 + 2C max sigma0(n) sqrt(n), split completely in F,
    with p = 1 mod 2^s where 2^s >= 2B."""
    bound = deligne_prime_bound(B, C)
    s = max(1, (2 * B - 1).bit_length())
    step = 1 << s
    k = max(1, (bound - 1 + step - 1) // step)
    while True:
        p = k * step + 1
        if p >= bound and en.is_prime(p):
            if F.degree == 1 or len(en.roots_mod_p(F.min_poly, p)) == F.degree:
                return p
        k += 1


# ---------------------------------------------------------------------------
# relation finding and Newton iteration


@dataclass
class Relation:
    """Phi(x, y) = sum a[m][n] x^m y^n over F_p (m <= degx, n <= degy)."""

    p: int
    a: list  # list of lists, a[m][n]
    kernel_dim: int = 1

    @property
    def degx(self):
        return len(self.a) - 1

    @property
    def degy(self):
        return len(self.a[0]) - 1

    def to_json(self):
        return {"p": self.p, "a": self.a, "kernel_dim": self.kernel_dim}


def riemann_roch_bound(degu: int, degv: int, margin: float = 0.1) -> int:
    """Number of q-coefficients that force Phi(u, v) = 0 for deg_x <= deg v, deg_y <= deg u."""
    base = (degv + 1) * (degu + 1) + degu * degv
    return int(math.ceil(base * (1 + margin)))


def find_relation(u: SeriesFp, v: SeriesFp, b: int, degu: int, degv: int, ctx: NTTContext | None = None) -> Relation:
    """Kernel of the b x (degv+1)(degu+1) matrix of coefficients of u^m v^n."""
    p = u.p
    ctx = ctx or NTTContext(p)
    if u.prec < b or v.prec < b:
        raise ValueError("series shorter than b")
    ub = u.coeffs[:b]
    vb = v.coeffs[:b]
    upow = [np.zeros(b, dtype=np.int64)]
    upow[0][0] = 1
    for _ in range(degv):
        upow.append(ctx.mul(upow[-1], ub, b))
    vpow = [upow[0]]
    for _ in range(degu):
        vpow.append(ctx.mul(vpow[-1], vb, b))
    cols = []
    labels = []
    for n in range(degu + 1):
        for m in range(degv + 1):
            cols.append(ctx.mul(upow[m], vpow[n], b))
            labels.append((m, n))
    M = np.stack(cols, axis=1)  # b x ncols
    ncols = M.shape[1]
    mat = flint.nmod_mat(b, ncols, [int(x) for x in M.reshape(-1)], p)
    X, nullity = mat.nullspace()
    if nullity == 0:
        raise ValueError(f"no relation with deg_x <= {degv}, deg_y <= {degu} in {b} coefficients")
    basis = [[int(X[i, j]) for i in range(ncols)] for j in range(nullity)]
    # minimal element: echelon form with monomials ordered from largest (n, m) down
    order = sorted(range(ncols), key=lambda c: (labels[c][1], labels[c][0]), reverse=True)
    Kt = flint.nmod_mat(nullity, ncols, [basis[j][c] for j in range(nullity) for c in order], p)
    R, rank = Kt.rref()
    last = [int(R[rank - 1, i]) for i in range(ncols)]
    vec = [0] * ncols
    for pos, c in enumerate(order):
        vec[c] = last[pos]
    if nullity > 1:
        log.warning("relation kernel has dimension %d; using the element with smallest leading monomial", nullity)
    a = [[0] * (degu + 1) for _ in range(degv + 1)]
    for c, (m, n) in enumerate(labels):
        a[m][n] = vec[c]
    return Relation(p, a, nullity)


def _phi_and_dphi(rel: Relation, upow_L: list, v: np.ndarray, L: int, ctx: NTTContext):
    """Phi(u, v) and dPhi/dy(u, v) mod q^L by Horner in y."""
    p = rel.p
    A = np.array(rel.a, dtype=np.int64)  # (degx+1) x (degy+1)
    U = np.stack([x[:L] for x in upow_L], axis=0)  # (degx+1) x L
    # P_n(u) = sum_m a[m][n] u^m  ->  (degy+1) x L
    P = np.zeros((A.shape[1], L), dtype=np.int64)
    for m in range(A.shape[0]):
        P = (P + np.outer(A[m], U[m]) % p) % p
    size = 1 << (2 * L - 1).bit_length()
    Vt = ctx.transform(v[:L], size)
    acc = P[-1].copy()
    dacc = np.zeros(L, dtype=np.int64)
    for n in range(A.shape[1] - 2, -1, -1):
        dacc = (ctx.mul_pre(dacc, Vt, L) + acc) % p
        acc = (ctx.mul_pre(acc, Vt, L) + P[n]) % p
    return acc, dacc


def newton_extend(rel: Relation, u: SeriesFp, v_seed: SeriesFp, B: int, ctx: NTTContext | None = None,
                  stats: dict | None = None) -> SeriesFp:
    """Extend a root v of Phi(u, y) from v_seed.prec to B coefficients.

    If dPhi/dy(u, v) has valuation k, a root known mod q^L (L > 2k) is
    refined to q^(2L - k); the residual is evaluated to q^(2L) for that.
    u must carry at least B + k coefficients.
    """
    p = rel.p
    ctx = ctx or NTTContext(p)
    L = v_seed.prec
    v = v_seed.coeffs.copy()
    degx = rel.degx
    P_full = u.prec
    upow = [np.zeros(P_full, dtype=np.int64)]
    upow[0][0] = 1
    for _ in range(degx):
        upow.append(ctx.mul(upow[-1], u.coeffs, P_full))
    phi, dphi = _phi_and_dphi(rel, upow, v, L, ctx)
    if np.any(phi):
        raise ValueError("seed does not satisfy the relation")
    nz = np.flatnonzero(dphi)
    k = int(nz[0]) if len(nz) else L
    if 2 * k + 1 >= L:
        raise ValueError(f"derivative valuation {k} too large for seed precision {L}")
    if P_full < B + k:
        raise ValueError(f"u has {P_full} coefficients, need {B + k}")
    iters = 0
    while L < B:
        L2 = min(2 * L - k, B)
        P = L2 + k
        vv = np.zeros(P, dtype=np.int64)
        vv[:L] = v[:L]
        phi, dphi = _phi_and_dphi(rel, upow, vv, P, ctx)
        if np.any(phi[:L]):
            raise ValueError("Newton iterate lost the relation")
        if np.any(dphi[:k]) or dphi[k] == 0:
            raise ValueError("derivative valuation changed during Newton iteration")
        num = SeriesFp(p, phi[k:P])
        den = SeriesFp(p, dphi[k:P])
        delta = num.mul(den.inverse(ctx), ctx).coeffs
        v = (vv[:L2] - delta[:L2]) % p
        L = L2
        iters += 1
    if stats is not None:
        stats["newton_iterations"] = iters
        stats["derivative_valuation"] = k
    return SeriesFp(p, v[:B])


# ---------------------------------------------------------------------------
# q-expansions with exact coefficients


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@dataclass
class QExpansion:
    """Exact coefficients a_1..a_B on the power basis of the coefficient field.

    ``coeffs[n]`` holds the integer coordinates of a_n (row 0 unused).
    """

    label: str
    field_tag: str
    coeffs: np.ndarray  # (B + 1) x d, int64
    level: int = 61
    character: str = "trivial"  # or "legendre61"
    meta: dict = field(default_factory=dict)

    @property
    def B(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def field(self) -> en.NumberField:
        return en.field_from_tag(self.field_tag)

    def chi(self, n: int) -> int:
        if n % self.level == 0:
            return 0
        if self.character == "legendre61":
            return legendre(n, self.level)
        return 1

    def a(self, n: int) -> en.NFElement:
        return self.field([int(x) for x in self.coeffs[n]])

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "field": self.field_tag,
            "level": self.level,
            "character": self.character,
            "B": self.B,
            "coeffs": self.coeffs[1:].tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QExpansion":
        c = np.array(obj["coeffs"], dtype=np.int64)
        d = c.shape[1]
        arr = np.zeros((c.shape[0] + 1, d), dtype=np.int64)
        arr[1:] = c
        return cls(obj["label"], obj["field"], arr, obj.get("level", 61), obj.get("character", "trivial"), obj.get("meta", {}))


def _nf_mul_int(a: Sequence[int], b: Sequence[int], mp: Sequence[int]) -> list:
    d = len(mp) - 1
    prod = [0] * (2 * d - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for i in range(2 * d - 2, d - 1, -1):
        c = prod[i]
        if c:
            for t in range(d):
                prod[i - d + t] -= c * mp[t]
            prod[i] = 0
    return prod[:d]


def check_hecke_relations(qe: QExpansion) -> list:
    """Indices n where multiplicativity or the prime-power recursion fails."""
    mp = qe.field.min_poly
    B = qe.B
    A = [list(map(int, r)) for r in qe.coeffs]
    spf = _smallest_prime_factor(B)
    bad = []
    one = [1] + [0] * (len(mp) - 2)
    if A[1] != one:
        bad.append(1)
    for n in range(2, B + 1):
        p = spf[n]
        pe, e = p, 1
        while n % (pe * p) == 0:
            pe *= p
            e += 1
        m = n // pe
        if m > 1:
            if _nf_mul_int(A[pe], A[m], mp) != A[n]:
                bad.append(n)
        elif e >= 2:
            prev = A[n // p]
            prev2 = A[n // (p * p)]
            chi = qe.chi(p)
            rhs = _nf_mul_int(A[p], prev, mp)
            rhs = [x - chi * p * y for x, y in zip(rhs, prev2)]
            if rhs != A[n]:
                bad.append(n)
    return bad


def _smallest_prime_factor(B: int) -> list:
    spf = list(range(B + 1))
    for i in range(2, int(B**0.5) + 1):
        if spf[i] == i:
            for j in range(i * i, B + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


def check_ramanujan(qe: QExpansion, tol: float = 1e-9) -> list:
    """Indices n where some embedding violates |tau(a_n)| <= sigma0(n) sqrt(n)."""
    F = qe.field
    roots = [complex(r) for r in F.embeddings(30)]
    d = F.degree
    V = np.array([[r**j for j in range(d)] for r in roots])  # emb x d
    vals = qe.coeffs.astype(np.float64) @ V.T  # (B+1) x emb
    n = np.arange(qe.B + 1)
    bound = divisor_counts(qe.B) * np.sqrt(n)
    bad = np.flatnonzero(np.any(np.abs(vals) > bound[:, None] * (1 + tol) + tol, axis=1))
    return [int(x) for x in bad if x > 0]


def crt_deligne_lift(residues: Sequence[np.ndarray], roots: Sequence[int], p: int, F: en.NumberField, C: float) -> np.ndarray:
    """Recover integer coordinates from a_n mod each prime above p.

    residues[i][n] = a_n mod (p, alpha - roots[i]).  Returns (len, d) int64 array.
    """
    d = F.degree
    if len(roots) != d:
        raise ValueError("need one residue per root")
    V = flint.nmod_mat(d, d, [pow(r, j, p) for r in roots for j in range(d)], p)
    Vinv = V.inv()
    W = np.array([[int(Vinv[i, j]) for j in range(d)] for i in range(d)], dtype=np.int64)
    R = np.stack(residues, axis=0)  # d x L
    lam = np.zeros((d, R.shape[1]), dtype=np.int64)
    for i in range(d):
        acc = np.zeros(R.shape[1], dtype=np.int64)
        for j in range(d):
            acc = (acc + W[i, j] * R[j]) % p
        lam[i] = acc
    lam = np.where(lam > (p - 1) // 2, lam - p, lam)
    n = np.arange(R.shape[1])
    bound = C * divisor_counts(R.shape[1] - 1) * np.sqrt(n) + 1e-9
    viol = np.flatnonzero(np.any(np.abs(lam) > bound[None, :], axis=0))
    viol = [int(x) for x in viol if x > 0]
    if viol:
        raise ArithmeticError(f"lifted coordinates violate the Deligne bound at n = {viol[:10]}")
    return lam.T.copy()


def symmetric_lift(res: np.ndarray, p: int, C: float = 1.0) -> np.ndarray:
    lam = np.where(res > (p - 1) // 2, res - p, res)
    n = np.arange(len(res))
    bound = C * divisor_counts(len(res) - 1) * np.sqrt(n) + 1e-9
    viol = [int(x) for x in np.flatnonzero(np.abs(lam) > bound) if x > 0]
    if viol:
        raise ArithmeticError(f"lifted coefficients violate the Deligne bound at n = {viol[:10]}")
    return lam


# ---------------------------------------------------------------------------
# seeds from modular symbols


@dataclass
class FormSpec:
    label: str
    field_tag: str
    subgroup: str  # "full" or "squares"
    hecke_poly: tuple  # minimal polynomial of a_2
    character: str
    extra_conditions: tuple = ()


F0 = FormSpec("61.2.a.a", "Q", "full", (1, 1), "trivial")
F_NEB = FormSpec("61.2.b.a", "Kf", "squares", (13, 0, 8, 0, 1), "legendre61")
LEVEL = 61


class SeedSource:
    """Exact a_n (n <= b) for one newform orbit from modular symbols."""

    def __init__(self, spec: FormSpec, space: ms.ManinSpace | None = None):
        self.spec = spec
        if space is None:
            H = ms.squares_subgroup(LEVEL) if spec.subgroup == "squares" else None
            space = ms.ManinSpace(LEVEL, H)
        self.space = space
        self.seeds = ms.EigenSeeds(space, spec.hecke_poly, 2, spec.extra_conditions)
        self.F = en.field_from_tag(spec.field_tag)
        self._cache: dict = {}

    def a_prime(self, l: int) -> list:
        if l not in self._cache:
            c = self.seeds.coefficients(l)
            if any(x.denominator != 1 for x in c):
                raise ArithmeticError(f"a_{l} is not in the power-basis order: {c}")
            d = self.F.degree
            self._cache[l] = [int(x) for x in c][:d] + [0] * (d - len(c))
        return self._cache[l]

    def coefficients(self, b: int) -> np.ndarray:
        """a_n for n <= b by multiplicativity from prime eigenvalues."""
        d = self.F.degree
        mp = self.F.min_poly
        A = [[0] * d for _ in range(b + 1)]
        if b >= 1:
            A[1] = [1] + [0] * (d - 1)
        spf = _smallest_prime_factor(b)
        chi = (lambda n: 0 if n % LEVEL == 0 else legendre(n, LEVEL)) if self.spec.character == "legendre61" else (
            lambda n: 0 if n % LEVEL == 0 else 1)
        for n in range(2, b + 1):
            p = spf[n]
            pe = p
            while n % (pe * p) == 0:
                pe *= p
            m = n // pe
            if m > 1:
                A[n] = _nf_mul_int(A[pe], A[m], mp)
            elif pe == p:
                A[n] = self.a_prime(p)
            else:
                rhs = _nf_mul_int(A[p], A[n // p], mp)
                A[n] = [x - chi(p) * p * y for x, y in zip(rhs, A[n // (p * p)])]
        return np.array(A, dtype=np.int64)


# ---------------------------------------------------------------------------
# degree bookkeeping on X_0(61)


@dataclass(frozen=True)
class CurveData:
    index: int  # [SL2(Z) : Gamma_0(N)]
    ncusps: int
    e2: int
    e3: int


def x0_data(space: ms.ManinSpace) -> CurveData:
    e2, e3 = space.elliptic_counts()
    return CurveData(space.nsymbols, space.ncusps, e2, e3)


def degree_u(cd: CurveData) -> int:
    """deg(1/j) on X_0(N) equals the index."""
    return cd.index


def degree_v_f0(cd: CurveData) -> int:
    """Poles of f0^2/E4 lie over the zeros of E4; the weight-4 form f0^2 is forced
    to vanish to order 1/3 at each elliptic point of order 3."""
    return math.floor(Fraction(4 * cd.index, 12) - Fraction(cd.e3, 3))


def degree_v_ratio(cd: CurveData) -> int:
    """Poles of (f/f0)^2 lie over the zeros of f0^2 (total 4 index/12), minus the zeros
    shared with f^2: order >= 2 at every cusp and >= 4/3 at order-3 elliptic points."""
    return math.floor(Fraction(4 * cd.index, 12) - 2 * cd.ncusps - Fraction(4 * cd.e3, 3))


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class QexpResult:
    f0: QExpansion
    f: QExpansion
    p: int
    timings: dict
    info: dict


def _series_from_ints(vals: np.ndarray, p: int) -> SeriesFp:
    return SeriesFp(p, np.asarray(vals, dtype=np.int64) % p)


def qexp_full(B: int, C: float | None = None, seeds_f0: SeedSource | None = None,
              seeds_f: SeedSource | None = None, p: int | None = None) -> QexpResult:
    """Compute f0 and f to B coefficients (a_1 .. a_B)."""
    timings: dict = {}
    info: dict = {}
    t0 = time.perf_counter()
    KF = en.KF
    if C is None:
        C = en.embedding_bound_C(en.power_basis(KF))
    if seeds_f0 is None:
        seeds_f0 = SeedSource(F0)
    if seeds_f is None:
        seeds_f = SeedSource(F_NEB)
    cd = x0_data(seeds_f0.space)
    du = degree_u(cd)
    dv0 = degree_v_f0(cd)
    dv1 = degree_v_ratio(cd)
    b0 = riemann_roch_bound(du, dv0)
    b1 = riemann_roch_bound(du, dv1)
    b0 = min(b0, B + 1) if B + 1 < b0 else b0
    info.update(deg_u=du, deg_v_f0=dv0, deg_v_f=dv1, b_f0=b0, b_f=b1)
    L = B + 1  # series index 0..B
    bmax = max(b0, b1)
    if p is None:
        p = choose_prime(max(L, bmax) + 64, C, KF)
    info["p"] = p
    ctx = NTTContext(p)
    A0 = seeds_f0.coefficients(b0)
    A1 = seeds_f.coefficients(b1)
    timings["seeds"] = time.perf_counter() - t0

    # --- f0
    t1 = time.perf_counter()
    if L <= b0:
        f0_mod = _series_from_ints(A0[:L, 0], p)
        u = u_series(max(L, b1) + 64, p, ctx)
        timings["u_series"] = time.perf_counter() - t1
        t_rel = 0.0
        t_series = time.perf_counter() - t1
    else:
        u = u_series(L + 64, p, ctx)
        t_u = time.perf_counter() - t1
        timings["u_series"] = t_u
        E4 = eisenstein_E4(L, p)
        f0_seed = _series_from_ints(A0[:, 0], p)  # length b0 (index 0..b0-1)
        v0_seed = f0_seed.mul(f0_seed, ctx).mul(E4.truncate(b0).inverse(ctx), ctx)
        tr = time.perf_counter()
        rel0 = find_relation(u, v0_seed, b0, du, dv0, ctx)
        t_rel = time.perf_counter() - tr
        info["relation_f0_kernel_dim"] = rel0.kernel_dim
        ts = time.perf_counter()
        st: dict = {}
        v0 = newton_extend(rel0, u, v0_seed, L + 2, ctx, st)
        info["newton_f0"] = st
        sq = v0.mul(E4.truncate(L + 2), ctx).shift_down(2)  # f0^2 / q^2
        f0_mod = sq.sqrt_unit(ctx).shift_up(1).truncate(L)
        t_series = t_u + (time.perf_counter() - ts)
    a0 = symmetric_lift(f0_mod.coeffs.copy(), p)
    a0[0] = 0
    f0_exact = QExpansion(F0.label, "Q", a0.reshape(-1, 1).astype(np.int64), LEVEL, "trivial")
    timings["f0_relation"] = t_rel
    # consistency with the seeds
    m0 = min(b0, L)
    if not np.array_equal(f0_exact.coeffs[1:m0, 0], A0[1:m0, 0]):
        raise ArithmeticError("f0 expansion disagrees with its seeds")

    # --- f via (f/f0)^2
    roots = en.roots_mod_p(KF.min_poly, p)
    residues = []
    f0_mod_L = SeriesFp(p, np.asarray(a0 % p, dtype=np.int64))
    t_rel1 = 0.0
    t_ser1 = 0.0
    info["newton_f"] = []
    for r in roots:
        pw = np.array([pow(r, j, p) for j in range(KF.degree)], dtype=np.int64)
        fseed = SeriesFp(p, (A1 @ pw) % p)  # index 0..b1-1
        if L <= b1:
            residues.append(fseed.coeffs[:L].copy())
            continue
        # (f / f0)^2 with f = q + ..., f0 = q + ...
        g = fseed.shift_down(1).mul(f0_mod_L.truncate(b1).shift_down(1).inverse(ctx), ctx)
        v1_seed = g.mul(g, ctx).truncate(b1 - 1)
        tr = time.perf_counter()
        rel1 = find_relation(u, v1_seed, b1 - 1, du, dv1, ctx)
        t_rel1 += time.perf_counter() - tr
        ts = time.perf_counter()
        st = {}
        v1 = newton_extend(rel1, u, v1_seed, L, ctx, st)
        info["newton_f"].append(st)
        ratio = v1.sqrt_unit(ctx)  # f/f0, constant term 1
        fr = f0_mod_L.shift_down(1).mul(ratio, ctx).shift_up(1).truncate(L)
        residues.append(fr.coeffs.copy())
        t_ser1 += time.perf_counter() - ts
        info.setdefault("relation_f_kernel_dims", []).append(rel1.kernel_dim)
    tc = time.perf_counter()
    lam = crt_deligne_lift(residues, roots, p, KF, C)
    lam[0] = 0
    t_crt = time.perf_counter() - tc
    f_exact = QExpansion(F_NEB.label, "Kf", lam.astype(np.int64), LEVEL, "legendre61")
    m1 = min(b1, L)
    if not np.array_equal(f_exact.coeffs[1:m1], A1[1:m1]):
        raise ArithmeticError("f expansion disagrees with its seeds")
    timings["f_relation"] = t_rel1
    timings["series"] = t_series + t_ser1 + t_crt
    timings["total"] = time.perf_counter() - t0
    return QexpResult(f0_exact, f_exact, p, timings, info)
