"""Weight-2 modular symbols for Gamma_H(N).

Manin symbols (c : d) are pairs mod N with gcd(c, d, N) = 1, taken modulo the
scaling (c, d) ~ (hc, hd) for h in H.  The pair (c, d) stands for the path
g{0, oo} where g = [[a, b], [c, d]] in SL_2(Z).  Vectors in the symbol space
are rows; operators act on the right.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint

from . import lattice as lat

# ---------------------------------------------------------------------------
# helpers


def squares_subgroup(N: int) -> tuple:
    return tuple(sorted({(x * x) % N for x in range(1, N) if math.gcd(x, N) == 1}))


def full_subgroup(N: int) -> tuple:
    return tuple(x for x in range(1, max(N, 2)) if math.gcd(x, N) == 1) if N > 1 else (0,)


def _fmpq_mat(rows):
    if not rows:
        return flint.fmpq_mat(0, 0)
    return flint.fmpq_mat(len(rows), len(rows[0]), [flint.fmpq(x.numerator, x.denominator) if isinstance(x, Fraction) else x for r in rows for x in r])


def _to_frac_rows(M) -> list:
    return [[Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(M.ncols())] for i in range(M.nrows())]


def rat_rank(rows) -> int:
    if not rows:
        return 0
    return _fmpq_mat(rows).rank()


def rat_solve_rows(basis: list, targets: list) -> list:
    """Coefficients c with c @ basis = target for each target row (exact).

    ``basis`` rows must be independent; raises ValueError if a target is not in the span.
    """
    if not targets:
        return []
    k = len(basis)
    n = len(basis[0])
    # solve B^T c^T = t^T via rref of augmented matrix
    aug = [[basis[i][j] for i in range(k)] + [t[j] for t in targets] for j in range(n)]
    R, rank = _fmpq_mat(aug).rref()
    R = _to_frac_rows(R)

    out = [[Fraction(0)] * k for _ in targets]
    piv = []
    for r in range(n):
        row = R[r]
        lead = next((j for j in range(k + len(targets)) if row[j] != 0), None)
        if lead is None:
            continue
        if lead >= k:
            raise ValueError("target not in span")
        piv.append((r, lead))
    if len(piv) != k:
        raise ValueError("basis rows are dependent")
    for r, c in piv:
        for t in range(len(targets)):
            out[t][c] = R[r][k + t]
    return out


def rat_kernel_left(rows: list) -> list:
    """Basis of {x : x @ rows = 0} over Q (as Fraction rows)."""
    if not rows:
        return []
    den = 1
    for r in rows:
        for x in r:
            d = Fraction(x).denominator
            den = den * d // math.gcd(den, d)
    M = flint.fmpz_mat([[int(Fraction(x) * den) for x in r] for r in rows]).transpose()
    X, nullity = M.nullspace()
    return [[Fraction(int(X[i, j])) for i in range(X.nrows())] for j in range(nullity)]


def mat_mul_frac(A, B):
    Bt = list(zip(*B))
    return [[sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in Bt] for r in A]


def vec_mat(v, M):
    n = len(M[0]) if M else 0
    out = [Fraction(0)] * n
    for x, row in zip(v, M):
        if x:
            for j, y in enumerate(row):
                if y:
                    out[j] += x * y
    return out


def poly_eval_matrix(P: Sequence[int], M: list) -> list:
    """P(M) for an integer/rational polynomial P (low degree first), Horner."""
    n = len(M)

    acc = [[Fraction(0)] * n for _ in range(n)]
    for c in reversed(P):
        acc = mat_mul_frac(acc, M)
        for i in range(n):
            acc[i][i] += c

    return acc


def charpoly(M: list) -> list:
    """Characteristic polynomial, integer coefficients low degree first."""
    cp = _fmpq_mat(M).charpoly()
    coeffs = [Fraction(int(c.p), int(c.q)) for c in cp.coeffs()]
    return coeffs


def factor_poly_Z(coeffs: Sequence) -> list:
    """Factor a rational polynomial over Z: list of (integer factor coeffs, multiplicity)."""
    den = 1
    for c in coeffs:
        den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
    p = flint.fmpz_poly([int(Fraction(c) * den) for c in coeffs])
    _, facs = p.factor()
    out = [([int(x) for x in f.coeffs()], e) for f, e in facs]
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


# ---------------------------------------------------------------------------
# Heilbronn matrices


@functools.lru_cache(maxsize=4096)
def heilbronn_cremona(p: int) -> tuple:
    """Cremona's Heilbronn matrices of determinant p (p prime), as (a, b, c, d)."""
    if p == 2:
        return ((1, 0, 0, 2), (2, 0, 0, 1), (2, 1, 0, 1), (1, 0, 1, 2))
    out = [(1, 0, 0, p)]
    half = (p - 1) // 2
    for r in range(-half, half + 1):
        x1, x2, y1, y2, a, b = p, -r, 0, 1, -p, r
        out.append((x1, x2, y1, y2))
        while b:
            q = _round_half_away(a, b)
            c = a - b * q
            a = -b
            b = c
            x3 = q * x2 - x1
            x1, x2 = x2, x3
            y3 = q * y2 - y1
            y1, y2 = y2, y3
            out.append((x1, x2, y1, y2))
    return tuple(out)


def _round_half_away(a: int, b: int) -> int:
    """Nearest integer to a/b, halves rounded away from zero."""
    num = Fraction(a, b)
    fl = math.floor(num)
    frac = num - fl
    if frac > Fraction(1, 2) or (frac == Fraction(1, 2) and num > 0):
        return fl + 1
    return fl


@functools.lru_cache(maxsize=256)
def heilbronn_merel(n: int) -> tuple:
    """Merel's set: [[a, b], [c, d]] with a > b >= 0, d > c >= 0, ad - bc = n."""
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 1):
            if a * d < n:
                continue
            bc = a * d - n
            if bc == 0:
                # b = 0 (c in [0, d)) or c = 0 (b in [0, a)); count the pair b = c = 0 once
                for c in range(d):
                    out.append((a, 0, c, d))
                for b in range(1, a):
                    out.append((a, b, 0, d))
                continue
            for b in range(1, a):
                if bc % b == 0:
                    c = bc // b
                    if c < d:
                        out.append((a, b, c, d))
    return tuple(out)


# ---------------------------------------------------------------------------
# the space


@dataclass
class HeckeOperator:
    n: int
    matrix: list  # integer matrix on the cuspidal lattice (row-vector convention)

    def charpoly(self) -> list:
        return charpoly([[Fraction(x) for x in r] for r in self.matrix])

    def to_json(self):
        return {"n": self.n, "matrix": self.matrix}


class ManinSpace:
    """Manin-symbol presentation of M_2(Gamma_H(N)) with its integral structure."""

    def __init__(self, N: int, H: Sequence[int] | None = None):
        self.N = N
        if N == 1:
            H = (0,)
        if H is None:
            H = full_subgroup(N)
        self.H = tuple(sorted(h % N for h in H)) if N > 1 else (0,)
        if N > 1:
            Hs = set(self.H)
            for h in self.H:
                for k in self.H:
                    if (h * k) % N not in Hs:
                        raise ValueError("H is not a subgroup")
            if (N - 1) % N not in Hs and N > 2:
                raise ValueError("this implementation needs -1 in H")
        self._build_symbols()
        self._build_relations()
        self._build_lattice()
        self._build_boundary()
        self._hecke_cache: dict = {}

    # -- symbols
    def _build_symbols(self):
        N = self.N
        if N == 1:
            self.pairs = {(0, 0): 0}
            self.reps = [(0, 0)]
            return
        cls: dict = {}
        reps = []
        for c in range(N):
            for d in range(N):
                if math.gcd(math.gcd(c, d), N) != 1 or (c, d) in cls:
                    continue
                orbit = {((h * c) % N, (h * d) % N) for h in self.H}
                idx = len(reps)
                reps.append(min(orbit))
                for o in orbit:
                    cls[o] = idx
        self.pairs = cls
        self.reps = reps

    @property
    def nsymbols(self) -> int:
        return len(self.reps)

    def index(self, c: int, d: int):
        """Class index of (c : d), or None if gcd(c, d, N) > 1."""
        if self.N == 1:
            return 0
        return self.pairs.get((c % self.N, d % self.N))

    def act(self, idx: int, g) -> int | None:
        c, d = self.reps[idx]
        a_, b_, c_, d_ = g
        return self.index(c * a_ + d * c_, c * b_ + d * d_)

    def _build_relations(self):
        n = self.nsymbols
        S = (0, -1, 1, 0)
        T = (0, -1, 1, -1)
        rels = []
        for i in range(n):
            j = self.act(i, S)
            row = [0] * n
            row[i] += 1
            row[j] += 1
            rels.append(row)
            k1 = self.act(i, T)
            k2 = self.act(k1, T)
            row = [0] * n
            row[i] += 1
            row[k1] += 1
            row[k2] += 1
            rels.append(row)
        R, den, rank = flint.fmpz_mat(rels).rref()  # fraction-free: true rref = R / den
        R = [[Fraction(int(R[i, j]), int(den)) for j in range(n)] for i in range(rank)]
        pivots = []
        for r in range(rank):
            pivots.append(next(j for j in range(n) if R[r][j] != 0))
        free = [j for j in range(n) if j not in set(pivots)]
        self.free = free
        self.dim = len(free)
        col = {j: k for k, j in enumerate(free)}
        coords = [None] * n
        for j in free:
            v = [Fraction(0)] * self.dim
            v[col[j]] = Fraction(1)
            coords[j] = v
        for r, pj in enumerate(pivots):
            lead = R[r][pj]
            v = [Fraction(0)] * self.dim
            for j in free:
                if R[r][j]:
                    v[col[j]] = -R[r][j] / lead
            coords[pj] = v
        self.coords = coords

    def symbol_vector(self, idx) -> list:
        if idx is None:
            return [Fraction(0)] * self.dim
        return list(self.coords[idx])

    def pair_vector(self, c: int, d: int) -> list:
        return self.symbol_vector(self.index(c, d))

    # -- integral structure
    def _build_lattice(self):
        """Z-span of all Manin symbols inside Q^dim (rows of self.M_basis)."""
        if self.dim == 0:
            self.M_basis = []
            self.M_basis_inv = []
            return
        rows = [self.coords[i] for i in range(self.nsymbols)]
        den = 1
        for r in rows:
            for x in r:
                den = den * x.denominator // math.gcd(den, x.denominator)
        irows = [[int(x * den) for x in r] for r in rows]
        H = lat.hnf(irows)[0]
        self.M_basis = [[Fraction(x, den) for x in r] for r in H]
        inv = _fmpq_mat(self.M_basis).inv()
        self.M_basis_inv = _to_frac_rows(inv)

    def to_lattice_coords(self, v) -> list:
        """Coordinates of a Q^dim vector in the Manin lattice basis."""
        return vec_mat(v, self.M_basis_inv)

    # -- cusps and boundary
    def _build_boundary(self):
        n = self.nsymbols
        if self.N == 1:
            self.cusp_of = [0]
            self.ncusps = 1
        else:
            orbit = [None] * n
            k = 0
            for i in range(n):
                if orbit[i] is not None:
                    continue
                j = i
                while orbit[j] is None:
                    orbit[j] = k
                    j = self.act(j, (1, 1, 0, 1))
                k += 1
            self.cusp_of = orbit
            self.ncusps = k
        S = (0, -1, 1, 0)
        # boundary of a symbol: [g oo] - [g 0]
        self.symbol_boundary = []
        for i in range(n):
            b = [0] * self.ncusps
            b[self.cusp_of[i]] += 1
            b[self.cusp_of[self.act(i, S)]] -= 1 if self.N > 1 else 0
            if self.N == 1:
                b = [0]
            self.symbol_boundary.append(b)
        # boundary map on the quotient: use free generators
        self.boundary = [self.symbol_boundary[j] for j in self.free]
        # cuspidal sublattice in Manin-lattice coordinates
        if self.dim == 0:
            self.cusp_basis_lat = []
            self.cusp_basis = []
            return
        Bl = mat_mul_frac(self.M_basis, [[Fraction(x) for x in r] for r in self.boundary])
        Bl_int = [[int(x) for x in r] for r in Bl]
        assert all(x.denominator == 1 for r in Bl for x in r)
        K = lat.integer_left_kernel(Bl_int)
        K = lat.hnf(K)[0] if K else []
        self.cusp_basis_lat = K  # rows, Manin-lattice coordinates
        self.cusp_basis = [vec_mat([Fraction(x) for x in r], self.M_basis) for r in K]  # rows in Q^dim
        if self.cusp_basis:
            self._cusp_inv_basis = self.cusp_basis
        self.check_boundary_consistency()

    def check_boundary_consistency(self):
        """Relations must have zero boundary."""
        for i in range(self.nsymbols):
            vi = self.coords[i]
            b = vec_mat(vi, [[Fraction(x) for x in r] for r in self.boundary])
            if [Fraction(x) for x in self.symbol_boundary[i]] != b:
                raise AssertionError("boundary map is not well defined")

    @property
    def cuspidal_rank(self) -> int:
        return len(self.cusp_basis)

    # -- genus oracle via the permutation action on cosets
    def genus_from_cosets(self) -> int:
        if self.N == 1:
            return 0
        n = self.nsymbols
        S = (0, -1, 1, 0)
        T = (0, -1, 1, -1)
        e2 = sum(1 for i in range(n) if self.act(i, S) == i)
        e3 = sum(1 for i in range(n) if self.act(i, T) == i)
        mu = n
        g = Fraction(1) + Fraction(mu, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(self.ncusps, 2)
        assert g.denominator == 1
        return int(g)

    def elliptic_counts(self):
        n = self.nsymbols
        e2 = sum(1 for i in range(n) if self.act(i, (0, -1, 1, 0)) == i)
        e3 = sum(1 for i in range(n) if self.act(i, (0, -1, 1, -1)) == i)
        return e2, e3

    # -- Hecke operators
    def heilbronn(self, n: int):
        if _is_prime(n) and self.N % n != 0:
            return heilbronn_cremona(n)
        return heilbronn_merel(n)

    def hecke_on_symbol_counts(self, idx: int, n: int, family: str = "auto") -> dict:
        """Multiset of classes in T_n (c : d) as {class: count}."""
        if family == "merel":
            mats = heilbronn_merel(n)
        elif family == "cremona":
            mats = heilbronn_cremona(n)
        else:
            mats = self.heilbronn(n)
        c, d = self.reps[idx]
        N = self.N
        counts: dict = {}
        pairs = self.pairs
        for a_, b_, c_, d_ in mats:
            key = ((c * a_ + d * c_) % N, (c * b_ + d * d_) % N)
            j = pairs.get(key)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        return counts

    def hecke_on_symbol(self, idx: int, n: int, family: str = "auto") -> list:
        v = [Fraction(0)] * self.dim
        for j, k in self.hecke_on_symbol_counts(idx, n, family).items():
            for t, x in enumerate(self.coords[j]):
                if x:
                    v[t] += k * x
        return v

    def hecke_full(self, n: int, family: str = "auto") -> list:
        """T_n on Q^dim (rows = images of the free generators)."""
        key = (n, family)
        if key not in self._hecke_cache:
            self._hecke_cache[key] = [self.hecke_on_symbol(j, n, family) for j in self.free]
        return self._hecke_cache[key]

    def _cusp_coords(self, v) -> list:
        """Coordinates of a Q^dim vector (in the cuspidal space) in cusp_basis."""
        return rat_solve_rows(self.cusp_basis, [v])[0]

    def hecke_matrix(self, n: int, family: str = "auto") -> HeckeOperator:
        T = self.hecke_full(n, family)
        rows = []
        for b in self.cusp_basis:
            rows.append(vec_mat(b, T))
        coeffs = rat_solve_rows(self.cusp_basis, rows) if rows else []
        for r in coeffs:
            for x in r:
                if x.denominator != 1:
                    raise AssertionError("Hecke operator does not preserve the cuspidal lattice")
        return HeckeOperator(n, [[int(x) for x in r] for r in coeffs])

    # -- serialization
    def to_json(self) -> dict:
        return {
            "N": self.N,
            "H": list(self.H),
            "nsymbols": self.nsymbols,
            "dim": self.dim,
            "ncusps": self.ncusps,
            "cuspidal_rank": self.cuspidal_rank,
            "cusp_basis": [[str(x) for x in r] for r in self.cusp_basis],
        }


def build_space(N: int, H: Sequence[int] | None = None) -> ManinSpace:
    return ManinSpace(N, H)


def hecke_matrix(S: ManinSpace, n: int) -> HeckeOperator:
    return S.hecke_matrix(n)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, int(n**0.5) + 1))


def _factorize(n: int) -> list:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


# ---------------------------------------------------------------------------
# isotypic pieces


def isotypic_sublattice(S: ManinSpace, P: Sequence[int], n: int = 2) -> list:
    """Saturated kernel of P(T_n) on the cuspidal lattice (rows in cuspidal coordinates)."""
    T = S.hecke_matrix(n).matrix
    PT = poly_eval_matrix(list(P), [[Fraction(x) for x in r] for r in T])
    PT = [[int(x) for x in r] for r in PT]
    K = lat.integer_left_kernel(PT)
    return lat.hnf(K)[0] if K else []


def sublattice_in_space(S: ManinSpace, sub: list) -> list:
    """Convert cuspidal-coordinate rows into Q^dim rows."""
    return [vec_mat([Fraction(x) for x in r], S.cusp_basis) for r in sub]


class IsotypicProjector:
    """Projection of Q^dim onto the joint kernel of P_l(T_l), along the sum of images.

    Valid when each T_l acts semisimply (true for the Hecke operators used here).
    """

    def __init__(self, S: ManinSpace, conditions: Sequence[tuple]):
        self.S = S
        self.conditions = [(l, tuple(P)) for l, P in conditions]
        dim = S.dim
        mats = []
        for l, P in self.conditions:
            mats.append(poly_eval_matrix(list(P), S.hecke_full(l)))
        # V_f = joint left kernel
        stacked = [[Fraction(0)] * 0 for _ in range(dim)]
        for M in mats:
            stacked = [a + b for a, b in zip(stacked, M)]
        Vf = rat_kernel_left(stacked)
        comp = []
        for M in mats:
            comp.extend(M)
        # basis of the span of images
        Vc = _row_basis(comp)
        if len(Vf) + len(Vc) != dim:
            raise ValueError(f"conditions do not isolate the component: {len(Vf)} + {len(Vc)} != {dim}")
        self.Vf = Vf
        self.Vc = Vc
        basis = Vf + Vc
        inv = _to_frac_rows(_fmpq_mat(basis).inv())
        k = len(Vf)
        # pi(v) = (v @ inv)[:k] @ Vf
        self.matrix = mat_mul_frac([r[:k] for r in inv], Vf)
        self.rank = k

    def __call__(self, v) -> list:
        return vec_mat(v, self.matrix)


def _row_basis(rows: list) -> list:
    if not rows:
        return []
    R, rank = _fmpq_mat(rows).rref()
    R = _to_frac_rows(R)
    return [r for r in R[:rank]]


class EigenSeeds:
    """Hecke eigenvalues of one Galois orbit of newforms read off from modular symbols.

    Works in the Krylov basis pi(x), pi(x)T, ..., pi(x)T^(d-1) for a Manin symbol x
    with nonzero projection, where T = T_{n0} acts on the component with minimal
    polynomial P of degree d.  For any prime l, pi(T_l x) = sum_k c_k pi(x) T^k
    and the eigenvalue is a_l = sum_k c_k theta^k with theta the root of P.
    """

    def __init__(self, S: ManinSpace, P: Sequence[int], n0: int = 2, extra_conditions: Sequence[tuple] = ()):
        self.S = S
        self.P = tuple(P)
        self.n0 = n0
        self.deg = len(P) - 1
        self.proj = IsotypicProjector(S, [(n0, P), *extra_conditions])
        T = S.hecke_full(n0)
        self.T = T
        x = None
        for j in range(S.nsymbols):
            v = self.proj(S.symbol_vector(j))
            if any(v):
                x = j
                break
        if x is None:
            raise ValueError("empty component")
        self.symbol = x
        v = self.proj(S.symbol_vector(x))
        kry = [v]
        for _ in range(self.deg - 1):
            kry.append(vec_mat(kry[-1], T))
        if rat_rank(kry) != self.deg:
            raise ValueError("Krylov vectors are dependent")
        self.krylov = kry

    def coefficients(self, l: int, family: str = "auto") -> list:
        """Rational coordinates of a_l on the power basis of theta."""
        w = self.proj(self.S.hecke_on_symbol(self.symbol, l, family))
        return rat_solve_rows(self.krylov, [w])[0]


# ---------------------------------------------------------------------------
# winding elements


def continued_fraction_symbols(a: int, m: int) -> list:
    """Manin pairs (c, d) with {oo, a/m} = sum of the corresponding symbols."""
    # convergents p_j / q_j of a/m
    if m <= 0:
        raise ValueError("m must be positive")
    g = math.gcd(a, m)
    a, m = a // g, m // g
    cf = []
    x, y = a, m
    while y:
        q = x // y
        cf.append(q)
        x, y = y, x - q * y
    out = []
    p_prev, q_prev = 1, 0  # p_{-1}, q_{-1}
    p_pp, q_pp = 0, 1  # p_{-2}, q_{-2}
    for j, aj in enumerate(cf):
        pj = aj * p_prev + p_pp
        qj = aj * q_prev + q_pp
        sign = 1 if (j % 2 == 1) else -1  # (-1)^(j-1)
        out.append((sign * qj, q_prev))
        p_pp, q_pp, p_prev, q_prev = p_prev, q_prev, pj, qj
    assert (p_prev, q_prev) == (a, m)
    return out


def path_vector(S: ManinSpace, a: int, m: int) -> list:
    """{oo, a/m} as a vector in Q^dim."""
    v = [Fraction(0)] * S.dim
    for c, d in continued_fraction_symbols(a, m):
        w = S.pair_vector(c, d)
        v = [x + y for x, y in zip(v, w)]
    return v


@dataclass(frozen=True)
class Character:
    """Primitive Dirichlet character mod m with chi(g^i) = zeta_M^(i*j), M = phi(m)."""

    m: int
    j: int

    @property
    def M(self) -> int:
        return _phi(self.m) if self.m > 1 else 1

    @property
    def generator(self) -> int:
        return _primitive_root_mod(self.m)

    @functools.cached_property
    def log_table(self) -> dict:
        if self.m == 1:
            return {0: 0}
        g = self.generator
        t = {}
        x = 1
        for i in range(self.M):
            t[x] = i
            x = x * g % self.m
        return t

    def exponent(self, a: int):
        """Exponent e with chi(a) = zeta_M^e, or None if gcd(a, m) > 1."""
        if self.m == 1:
            return 0
        a %= self.m
        if a not in self.log_table:
            return None
        return (self.log_table[a] * self.j) % self.M

    @property
    def order(self) -> int:
        return self.M // math.gcd(self.j, self.M) if self.m > 1 else 1

    def value(self, a: int, ctx):
        e = self.exponent(a)
        if e is None:
            return ctx.mpc(0)
        return ctx.expjpi(ctx.mpf(2 * e) / self.M)

    def is_real(self) -> bool:
        return self.order <= 2

    def conjugates(self) -> list:
        """Galois conjugates chi^t, t in (Z/order)^x, as Characters."""
        out = []
        for t in range(1, self.order + 1):
            if math.gcd(t, self.order) == 1:
                c = Character(self.m, (self.j * t) % self.M)
                if c not in out:
                    out.append(c)
        return out

    def to_json(self):
        return {"m": self.m, "j": self.j}


def _phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def _primitive_root_mod(m: int) -> int:
    if m <= 2:
        return 1
    units = [k for k in range(1, m) if math.gcd(k, m) == 1]
    for g in units:
        x, seen = 1, set()
        for _ in range(len(units)):
            x = x * g % m
            seen.add(x)
        if len(seen) == len(units):
            return g
    raise ValueError(f"(Z/{m})^x is not cyclic")


def is_primitive(chi: Character) -> bool:
    if chi.m == 1:
        return True
    for d in range(1, chi.m):
        if chi.m % d:
            continue
        # chi factors through (Z/d)^x iff chi(a) = 1 for all a = 1 mod d
        if all(chi.exponent(a) == 0 for a in range(1, chi.m) if a % d == 1 % d and math.gcd(a, chi.m) == 1):
            return False
    return True


def primitive_characters(m: int) -> list:
    if m == 1:
        return [Character(1, 0)]
    M = _phi(m)
    return [c for c in (Character(m, j) for j in range(M)) if is_primitive(c)]


def galois_orbit_reps(moduli: Sequence[int]) -> list:
    """One representative per Galois orbit of primitive characters, deterministic."""
    reps = []
    for m in moduli:
        seen = set()
        for c in primitive_characters(m):
            if c in seen:
                continue
            reps.append(c)
            seen.update(c.conjugates())
    return reps


_CYCLO = {1: (-1, 1), 2: (1, 1), 3: (1, 1, 1), 4: (1, 0, 1), 6: (1, -1, 1)}


def _zeta_power_coords(e: int, k: int) -> list:
    """zeta_k^e on the power basis of Q(zeta_k) (degree phi(k))."""
    mp = _CYCLO[k]
    d = len(mp) - 1
    v = [0] * (e % k + 1)
    v[e % k] = 1
    # reduce modulo the cyclotomic polynomial
    for i in range(len(v) - 1, d - 1, -1):
        c = v[i]
        if c:
            for t in range(d + 1):
                v[i - d + t] -= c * mp[t]
    return (v + [0] * d)[:d]


@dataclass
class WindingElement:
    chi: Character
    vector: list  # rational components w_i with s_chi = sum_i zeta^i w_i  (zeta = zeta_order)

    def assemble(self, ctx) -> list:
        """The complex vector s_chi in Q(zeta)^dim evaluated numerically."""
        k = self.chi.order
        z = ctx.expjpi(ctx.mpf(2) / k)
        out = [ctx.mpc(0)] * len(self.vector[0])
        for i, w in enumerate(self.vector):
            zi = z**i
            out = [a + zi * ctx.mpf(x.numerator) / x.denominator for a, x in zip(out, w)]
        return out


def winding_decompose(S: ManinSpace, chi: Character) -> WindingElement:
    """s_chi = sum_{a mod m} conj(chi)(-a) {oo, a/m}, split into rational parts.

    With zeta = exp(2 pi i / ord(chi)), s_chi = sum_i zeta^i w_i where the w_i
    are rational modular symbols (i < phi(ord(chi))).
    """
    m = chi.m
    if math.gcd(m, S.N) != 1:
        raise ValueError("modulus must be coprime to the level")
    k = chi.order
    deg = len(_CYCLO[k]) - 1
    w = [[Fraction(0)] * S.dim for _ in range(deg)]
    step = chi.M // k if chi.m > 1 else 1
    for a in range(m):
        e = chi.exponent(-a)
        if e is None:
            continue
        # conj(chi)(-a) = zeta_M^(-e) = zeta_k^(-e/step)
        ek = (-(e // step)) % k
        coords = _zeta_power_coords(ek, k)
        pv = path_vector(S, a, m)
        for i, c in enumerate(coords):
            if c:
                w[i] = [x + c * y for x, y in zip(w[i], pv)]
    return WindingElement(chi, w)


def rational_generators(S: ManinSpace, moduli: Sequence[int] = (1, 3, 4, 5, 7)) -> list:
    """Rational symbols w_{chi, i} for one chi per Galois orbit.

    Returns a list of (Character, i, vector) in a fixed order.
    """
    out = []
    for chi in galois_orbit_reps(moduli):
        W = winding_decompose(S, chi)
        for i, v in enumerate(W.vector):
            out.append((chi, i, v))
    return out


@dataclass
class WindingExpression:
    """gamma_j = sum_{k, g} coeffs[j][k][g] * pi(w_g) T^k  (exact rationals)."""

    generators: list  # (Character, i) labels
    coeffs: list  # [j][k][g]
    deg: int
    n: int

    def to_json(self):
        return {
            "generators": [{"chi": c.to_json(), "component": i} for c, i in self.generators],
            "deg": self.deg,
            "n": self.n,
            "coeffs": [[[str(x) for x in row] for row in cj] for cj in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WindingExpression":
        gens = [(Character(g["chi"]["m"], g["chi"]["j"]), g["component"]) for g in obj["generators"]]
        coeffs = [[[Fraction(x) for x in row] for row in cj] for cj in obj["coeffs"]]
        return cls(gens, coeffs, obj["deg"], obj["n"])


class SpanDeficiencyError(ValueError):
    pass


def express_homology_in_winding(S: ManinSpace, sublattice_rows: list, generators: list,
                                proj: IsotypicProjector, n: int = 2, deg: int = 4) -> WindingExpression:
    """Write each basis vector of the sublattice (Q^dim rows) through T_n-translates of
    the projected generators.  ``generators`` is a list of (label, vector)."""
    if not sublattice_rows:
        return WindingExpression([g for g, _ in generators], [], deg, n)
    T = S.hecke_full(n)
    cand = []
    for gi, (_, v) in enumerate(generators):
        x = proj(v)
        for k in range(deg):
            cand.append((gi, k, x))
            x = vec_mat(x, T)
    # greedy independent subset in the fixed order (generator, power)
    chosen = []
    rows = []
    for gi, k, x in cand:
        if not any(x):
            continue
        if rat_rank(rows + [x]) > len(rows):
            rows.append(x)
            chosen.append((gi, k))
        if len(rows) == len(sublattice_rows):
            break
    target_rank = rat_rank(sublattice_rows)
    if len(rows) < target_rank:
        raise SpanDeficiencyError(f"translates span rank {len(rows)} < {target_rank}")
    sol = rat_solve_rows(rows, sublattice_rows)
    ng = len(generators)
    coeffs = []
    for r in sol:
        cj = [[Fraction(0)] * ng for _ in range(deg)]
        for (gi, k), c in zip(chosen, r):
            cj[k][gi] = c
        coeffs.append(cj)
    return WindingExpression([g for g, _ in generators], coeffs, deg, n)
