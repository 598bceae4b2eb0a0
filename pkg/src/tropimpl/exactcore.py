"""Exact linear algebra over Q, Z and GF(p).

Everything downstream (polytopes, fans, interpolation) runs on the primitives
in this module: arbitrary-precision rationals, integer normal forms with
unimodular transforms, saturated kernel lattices, fraction-free kernels and
Chinese-remainder rational reconstruction.  No floating point anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DimensionMismatch,
    RankDeficient,
    ReconstructionFailed,
    SpanMismatch,
)

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    _mpq = Fraction

# Largest prime below 2^31; products of two residues stay inside int64.
DEFAULT_PRIME = 2147483647


def rat(a, b=1):
    """Exact rational; collapses to a plain int when the value is integral."""
    q = _mpq(a, b)
    return int(q) if q.denominator == 1 else q


def div_exact(a, d):
    """a / d for rational a and nonzero integer or rational d, as ``rat``."""
    if isinstance(a, int) and isinstance(d, int):
        return a // d if a % d == 0 else rat(a, d)
    an, ad = (a, 1) if isinstance(a, int) else (a.numerator, a.denominator)
    dn, dd = (d, 1) if isinstance(d, int) else (d.numerator, d.denominator)
    return rat(int(an) * int(dd), int(ad) * int(dn))


def rat_from_json(v):
    """Parse the wire form: bare int, or a "num/den" decimal string."""
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        if "/" in v:
            num, den = v.split("/", 1)
            return rat(int(num), int(den))
        return int(v)
    raise ValueError(f"not a rational: {v!r}")


def rat_to_json(q):
    if isinstance(q, int):
        return q
    if q.denominator == 1:
        return int(q)
    return f"{int(q.numerator)}/{int(q.denominator)}"


def vec_to_json(v):
    return [rat_to_json(x) for x in v]


def vec_from_json(v):
    return tuple(rat_from_json(x) for x in v)


# ---------------------------------------------------------------------------
# small dense helpers (rows are sequences; results are lists/tuples)

def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(M):
    return [list(col) for col in zip(*M)]


def mat_vec(M, v):
    return tuple(sum(r[j] * v[j] for j in range(len(v))) for r in M)


def mat_mul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v):
    return tuple(c * x for x in v)


def vec_gcd(v):
    g = 0
    for x in v:
        g = math.gcd(g, abs(int(x)))
    return g


def primitive_vector(v):
    """Scale a nonzero rational vector to coprime integers, direction kept."""
    den = 1
    for x in v:
        if not isinstance(x, int):
            den = den * x.denominator // math.gcd(den, int(x.denominator))
    w = [int(x * den) for x in v]
    g = vec_gcd(w)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in w)


def canonical_sign(v):
    """Flip so the first nonzero entry is positive."""
    for x in v:
        if x:
            return tuple(-y for y in v) if x < 0 else tuple(v)
    return tuple(v)


def canonicalize_rational_vector(v):
    """Scale to coprime integers with positive leading nonzero entry.

    This is the one normalization used for kernel vectors and coefficient
    vectors everywhere, so outputs are reproducible across runs and fields.
    """
    if all(x == 0 for x in v):
        return tuple(0 for _ in v)
    return canonical_sign(primitive_vector(v))


# ---------------------------------------------------------------------------
# integer normal forms

def row_hermite(M):
    """Row-style Hermite form: returns (H, U) with H = U*M, U unimodular.

    Pivots positive, entries above a pivot reduced into [0, pivot), zero rows
    at the bottom.
    """
    H = [list(map(int, row)) for row in M]
    m = len(H)
    n = len(H[0]) if m else 0
    U = identity_matrix(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if H[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(H[i][c]))
            if i0 != r:
                H[r], H[i0] = H[i0], H[r]
                U[r], U[i0] = U[i0], U[r]
            clean = True
            for i in range(r + 1, m):
                if H[i][c]:
                    q = H[i][c] // H[r][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    if H[i][c]:
                        clean = False
            if clean:
                break
        if r < m and H[r][c] != 0:
            if H[r][c] < 0:
                H[r] = [-a for a in H[r]]
                U[r] = [-a for a in U[r]]
            for i in range(r):
                q = H[i][c] // H[r][c]
                if q:
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
            r += 1
    return H, U


def smith_normal_form(M):
    """Smith form with transforms: returns (D, U, V) with D = U*M*V.

    Diagonal entries are nonnegative and satisfy d1 | d2 | ... ; the product
    of the nonzero d_i equals |det| for square nonsingular input.
    """
    A = [list(map(int, row)) for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity_matrix(m)
    V = identity_matrix(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(i, j, q):  # row_i += q * row_j
        A[i] = [a + q * b for a, b in zip(A[i], A[j])]
        U[i] = [a + q * b for a, b in zip(U[i], U[j])]

    def add_col(i, j, q):  # col_i += q * col_j
        for row in A:
            row[i] += q * row[j]
        for row in V:
            row[i] += q * row[j]

    t = 0
    while t < min(m, n):
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < best):
                    best = abs(A[i][j])
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
            rows_dirty = [i for i in range(t + 1, m) if A[i][t]]
            if rows_dirty:
                swap_rows(t, rows_dirty[0])
                continue
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
            cols_dirty = [j for j in range(t + 1, n) if A[t][j]]
            if cols_dirty:
                swap_cols(t, cols_dirty[0])
                continue
            culprit = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % A[t][t]:
                        culprit = i
                        break
                if culprit is not None:
                    break
            if culprit is None:
                break
            add_row(t, culprit, 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return A, U, V


def lattice_normal_form(M, kind="smith"):
    """Dispatch to Hermite or Smith form; returns (N, (U, V))."""
    if kind == "hermite":
        H, U = row_hermite(M)
        n = len(M[0]) if M else 0
        return H, (U, identity_matrix(n))
    if kind == "smith":
        D, U, V = smith_normal_form(M)
        return D, (U, V)
    raise ValueError(f"unknown normal form kind: {kind!r}")


def integer_kernel(M, ncols=None):
    """Basis of the saturated lattice {v in Z^n : M v = 0}, Hermite-reduced."""
    if ncols is None:
        if not M:
            raise ValueError("need ncols for an empty matrix")
        ncols = len(M[0])
    rows = [r for r in M if any(r)]
    if not rows:
        return [tuple(r) for r in identity_matrix(ncols)]
    H, U = row_hermite(transpose(rows))
    rank = sum(1 for row in H if any(row))
    basis = [U[i] for i in range(rank, ncols)]
    if not basis:
        return []
    Hb, _ = row_hermite(basis)
    return [tuple(r) for r in Hb if any(r)]


@dataclass(frozen=True)
class LatticeBasis:
    """Basis of a sublattice of Z^n, rows independent."""

    ambient_dim: int
    vectors: tuple

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)

    @property
    def rank(self):
        return len(self.vectors)

    def to_json(self):
        return {"ambient_dim": self.ambient_dim,
                "vectors": [list(v) for v in self.vectors]}

    @staticmethod
    def from_json(obj):
        return LatticeBasis(obj["ambient_dim"],
                            tuple(tuple(int(x) for x in v) for v in obj["vectors"]))


def saturate(generators, ambient_dim=None):
    """Basis of span_Q(generators) intersected with Z^n.

    Saturation of a saturation is itself; generators may be dependent and may
    be rational (only their span matters).
    """
    gens = list(generators)
    if ambient_dim is None:
        if not gens:
            raise ValueError("need ambient_dim without generators")
        ambient_dim = len(gens[0])
    prim = [primitive_vector(g) for g in gens if any(g)]
    if not prim:
        return LatticeBasis(ambient_dim, ())
    orth = integer_kernel(prim, ambient_dim)
    if not orth:
        basis = [tuple(r) for r in identity_matrix(ambient_dim)]
    else:
        basis = integer_kernel(orth, ambient_dim)
    return LatticeBasis(ambient_dim, tuple(basis))


def solve_integer(M, b):
    """One integer solution x of M x = b, or None.

    b may be rational; a solution exists only if it is integral in the Smith
    coordinates.
    """
    if not M:
        return ()
    m, n = len(M), len(M[0])
    D, U, V = smith_normal_form(M)
    c = mat_vec(U, tuple(b))
    y = [0] * n
    for i in range(m):
        d = D[i][i] if i < n else 0
        if d:
            q = div_exact(c[i], d)
            if not isinstance(q, int):
                return None
            y[i] = q
        elif c[i] != 0:
            return None
    return mat_vec(V, tuple(y))


def lattice_index(super_basis, sub_generators):
    """Index of the lattice generated by ``sub_generators`` in the lattice
    spanned by ``super_basis``.

    Raises SpanMismatch unless both span the same rational subspace and the
    sub-generators sit inside the super-lattice.  Generators may be dependent;
    the index is the product of diagonal entries of the Hermite form of the
    coordinate matrix.
    """
    sup = list(super_basis)
    subs = [g for g in sub_generators if any(g)]
    r = len(sup)
    if not r:
        if subs:
            raise SpanMismatch("sub spans more than the zero super-lattice")
        return 1
    # coordinates of each generator in the super basis
    cols = transpose(sup)  # n x r
    coords = []
    for g in subs:
        sol = solve_linear(cols, g)
        if sol is None:
            raise SpanMismatch("generator outside the span of the super basis")
        if not all(isinstance(x, int) for x in sol):
            raise SpanMismatch("generator outside the super lattice")
        coords.append(list(sol))
    if not coords or rational_rank(coords) < r:
        raise SpanMismatch("sub-generators span a smaller subspace")
    H, _ = row_hermite(coords)
    idx = 1
    for i in range(r):
        piv = next(x for x in H[i] if x)
        idx *= abs(piv)
    return idx


# ---------------------------------------------------------------------------
# rational elimination (fraction-free Bareiss)

def _integer_rows(rows):
    out = []
    for row in rows:
        den = 1
        for x in row:
            if not isinstance(x, int):
                den = den * x.denominator // math.gcd(den, int(x.denominator))
        out.append([int(x * den) for x in row])
    return out


def _bareiss_echelon(rows):
    """Echelon form of integer rows; returns (rows, pivot_cols)."""
    M = [list(r) for r in rows]
    m = len(M)
    n = len(M[0]) if m else 0
    piv_cols = []
    r = 0
    prev = 1
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if M[i][c]), None)
        if p is None:
            continue
        if p != r:
            M[r], M[p] = M[p], M[r]
        lead = M[r][c]
        Mr = M[r]
        for i in range(r + 1, m):
            head = M[i][c]
            Mi = M[i]
            for j in range(c + 1, n):
                Mi[j] = (lead * Mi[j] - head * Mr[j]) // prev
            Mi[c] = 0
        prev = M[r][c]
        piv_cols.append(c)
        r += 1
    return M[:r], piv_cols


def rational_rank(rows):
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    ech, piv = _bareiss_echelon(_integer_rows(rows))
    return len(piv)


def solve_linear(M, b):
    """Solve M x = b over Q (M as list of rows); None if inconsistent.

    Requires M to have full column rank; used for coordinates in a basis.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    aug = [list(M[i]) + [b[i]] for i in range(m)]
    ech, piv = _bareiss_echelon(_integer_rows(aug))
    if n in piv:
        return None
    if len(piv) < n:
        raise RankDeficient("basis matrix is rank deficient")
    x = [0] * n
    for k in range(len(piv) - 1, -1, -1):
        c = piv[k]
        row = ech[k]
        s = row[n]
        for j in range(c + 1, n):
            s -= row[j] * x[j]
        x[c] = div_exact(s, row[c])
    return tuple(x)


def rref(rows, ncols=None):
    """Reduced row echelon form over Q; returns (rows, pivot_cols).

    Pivot entries are 1 and pivot columns are cleared elsewhere; zero rows
    are dropped.
    """
    rows = [r for r in rows if any(r)]
    if not rows:
        return [], []
    n = ncols if ncols is not None else len(rows[0])
    ech, piv = _bareiss_echelon(_integer_rows(rows))
    out = [[div_exact(x, row[c]) for x in row]
           for row, c in zip(ech, piv)]
    for k in range(len(piv) - 1, -1, -1):
        c = piv[k]
        for i in range(k):
            f = out[i][c]
            if f:
                out[i] = [a - f * b for a, b in zip(out[i], out[k])]
    return [tuple(r) for r in out], piv


def reduce_mod_subspace(v, rref_rows, pivots):
    """Canonical representative of v modulo the row space of an rref basis:
    the pivot coordinates of the result are zero."""
    w = list(v)
    for row, c in zip(rref_rows, pivots):
        f = w[c]
        if f:
            w = [a - f * b for a, b in zip(w, row)]
    return tuple(w)


def rational_kernel(rows, ncols=None):
    """Canonical basis of the right kernel over Q.

    Vectors are cleared to coprime integers, leading nonzero positive, ordered
    by their free column.
    """
    rows = list(rows)
    if ncols is None:
        if not rows:
            raise ValueError("need ncols for an empty matrix")
        ncols = len(rows[0])
    rows = [r for r in rows if any(r)]
    if not rows:
        return [canonical_sign(tuple(r)) for r in identity_matrix(ncols)]
    ech, piv = _bareiss_echelon(_integer_rows(rows))
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for k in range(len(piv) - 1, -1, -1):
            c = piv[k]
            row = ech[k]
            s = 0
            for j in range(c + 1, ncols):
                if x[j]:
                    s += row[j] * x[j]
            x[c] = div_exact(-s, row[c])
        basis.append(canonicalize_rational_vector(x))
    return basis


# ---------------------------------------------------------------------------
# GF(p)

class PrimeField:
    """Arithmetic mod a prime, with reduction of rationals."""

    def __init__(self, p):
        if p < 2:
            raise ValueError("modulus must be a prime >= 2")
        self.p = p

    def reduce(self, q):
        """Image of a rational; raises ZeroDivisionError on denominator collision."""
        if isinstance(q, int):
            return q % self.p
        num = int(q.numerator) % self.p
        den = int(q.denominator) % self.p
        if den == 0:
            raise ZeroDivisionError(f"denominator of {q} vanishes mod {self.p}")
        return num * pow(den, self.p - 2, self.p) % self.p

    def reduce_vector(self, v):
        return tuple(self.reduce(x) for x in v)

    def inv(self, a):
        return pow(a % self.p, self.p - 2, self.p)

    def __repr__(self):
        return f"PrimeField({self.p})"


def gfp_echelon(rows, p):
    """Row echelon mod p with unit pivots; returns (rows, pivot_cols).

    Vectorized over numpy int64; safe for p < 2^31.
    """
    import numpy as np

    M = np.array([[int(x) % p for x in row] for row in rows], dtype=np.int64)
    m, n = M.shape
    piv_cols = []
    r = 0
    for c in range(n):
        if r == m:
            break
        col = M[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i0 = r + int(nz[0])
        if i0 != r:
            M[[r, i0]] = M[[i0, r]]
        inv = pow(int(M[r, c]), p - 2, p)
        M[r, c:] = (M[r, c:] * inv) % p
        below = M[r + 1:, c]
        mask = below != 0
        if mask.any():
            idx = np.nonzero(mask)[0] + r + 1
            M[idx, c:] = (M[idx, c:] - np.outer(M[idx, c], M[r, c:])) % p
        piv_cols.append(c)
        r += 1
    return M[:r], piv_cols


def gfp_kernel(rows, p, ncols=None):
    """Kernel basis mod p, each vector scaled so its first nonzero entry is 1."""
    rows = list(rows)
    if ncols is None:
        if not rows:
            raise ValueError("need ncols for an empty matrix")
        ncols = len(rows[0])
    rows = [r for r in rows if any(int(x) % p for x in r)]
    if not rows:
        return [tuple(r) for r in identity_matrix(ncols)]
    ech, piv = gfp_echelon(rows, p)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for k in range(len(piv) - 1, -1, -1):
            c = piv[k]
            s = 0
            row = ech[k]
            for j in range(c + 1, ncols):
                if x[j]:
                    s += int(row[j]) * x[j]
            x[c] = (-s) % p
        lead = next(v for v in x if v)
        inv = pow(lead, p - 2, p)
        basis.append(tuple(v * inv % p for v in x))
    return basis


def kernel_basis(M, field="q", ncols=None):
    """Right kernel basis over Q ("q") or GF(p) (pass the prime)."""
    if field == "q":
        return rational_kernel(M, ncols)
    if isinstance(field, int):
        return gfp_kernel(M, field, ncols)
    if isinstance(field, PrimeField):
        return gfp_kernel(M, field.p, ncols)
    raise ValueError(f"unknown field spec: {field!r}")


# ---------------------------------------------------------------------------
# Chinese remaindering

def crt_pair(r1, m1, r2, m2):
    g = math.gcd(m1, m2)
    if g != 1:
        raise ValueError("moduli must be coprime")
    inv = pow(m1 % m2, -1, m2)
    t = ((r2 - r1) * inv) % m2
    return (r1 + m1 * t) % (m1 * m2), m1 * m2


def rational_reconstruction(r, m):
    """Recover a/b from a*b^{-1} = r (mod m) with |a|, b <= sqrt(m/2)."""
    r %= m
    bound = math.isqrt(m // 2)
    a0, a1 = m, r
    b0, b1 = 0, 1
    while a1 > bound:
        q = a0 // a1
        a0, a1 = a1, a0 - q * a1
        b0, b1 = b1, b0 - q * b1
    if b1 == 0 or abs(b1) > bound:
        raise ReconstructionFailed(f"no small fraction for residue {r}")
    num, den = (a1, b1) if b1 > 0 else (-a1, -b1)
    if math.gcd(den, m) != 1 or (num - den * r) % m != 0:
        raise ReconstructionFailed(f"inconsistent reconstruction for residue {r}")
    g = math.gcd(abs(num), den)
    return num // g, den // g


def crt_rational_reconstruct(residue_vectors, primes):
    """Lift per-prime residue vectors to one rational vector.

    All vectors must have equal length and the primes must be distinct; raises
    ReconstructionFailed when some coordinate has no fraction below the
    sqrt(prod/2) bound.
    """
    if len(residue_vectors) != len(primes):
        raise DimensionMismatch("one residue vector per prime")
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    width = {len(v) for v in residue_vectors}
    if len(width) != 1:
        raise DimensionMismatch("residue vectors of mixed length")
    out = []
    for coord in range(width.pop()):
        r, m = 0, 1
        for vec, p in zip(residue_vectors, primes):
            r, m = crt_pair(r, m, int(vec[coord]) % p, p)
        num, den = rational_reconstruction(r, m)
        out.append(rat(num, den))
    return tuple(out)


# ---------------------------------------------------------------------------
# Gale duality

def gale_dual(A):
    """Integer basis of the saturated kernel lattice of A, as rows.

    A is d x n of full rank d (else RankDeficient); the result B is
    (n-d) x n with A * B^T = 0.
    """
    d = len(A)
    n = len(A[0]) if d else 0
    if rational_rank(A) != d:
        raise RankDeficient(f"matrix has rank below {d}")
    B = integer_kernel([list(map(int, row)) for row in A], n)
    return [tuple(row) for row in B]
