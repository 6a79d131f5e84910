"""Exact rational linear algebra.

All scalars are arbitrary-precision rationals (``fractions.Fraction``), kept in
lowest terms with positive denominator by the Fraction type itself.  Matrices
are small dense arrays of rationals; the routines here favour determinism over
speed: pivoting always picks the first nonzero entry in row-major order, and
nullspace bases are returned in reduced echelon form, so identical inputs give
identical outputs on every run.

Systems with more than ``LARGE_COLS`` unknowns are solved modulo several
word-size primes, lifted back to rationals by rational reconstruction, and the
result is verified exactly against the original matrix.  If verification ever
fails the code falls back to fraction-free (Bareiss) elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt, lcm
from typing import Iterable, Optional, Sequence

import numpy as np

Scalar = Fraction
Vec = tuple[Fraction, ...]

LARGE_COLS = 200

# Primes just below 2**21: residues fit in int64 with exact products
# (p*p < 2**42), and float64 matmuls on residue matrices stay exact.
_PRIMES = (
    2097143, 2097133, 2097131, 2097097, 2097091, 2097083, 2097047, 2097041,
    2097031, 2097023, 2097013, 2096993, 2096987, 2096971, 2096959, 2096957,
)


def frac(x) -> Fraction:
    """Coerce ints, strings like '-3/4' and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("refusing to coerce float to exact rational: %r" % (x,))
    return Fraction(x)


def format_fraction(q: Fraction) -> str:
    return str(frac(q))


def parse_fraction(s: str) -> Fraction:
    return Fraction(s)


def vec_add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vec_sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vec_scale(c: Fraction, v: Sequence[Fraction]) -> Vec:
    return tuple(c * a for a in v)


def vec_dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v, strict=True)), Fraction(0))


def zero_vec(n: int) -> Vec:
    return (Fraction(0),) * n


def basis_vec(n: int, i: int) -> Vec:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


@dataclass(frozen=True)
class Mat:
    """Dense rational matrix; data is a tuple of row tuples."""

    data: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def from_rows(rows: Iterable[Sequence]) -> "Mat":
        return Mat(tuple(tuple(frac(x) for x in r) for r in rows))

    @staticmethod
    def zeros(r: int, c: int) -> "Mat":
        row = (Fraction(0),) * c
        return Mat(tuple(row for _ in range(r)))

    @staticmethod
    def identity(n: int) -> "Mat":
        return Mat(tuple(basis_vec(n, i) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def cols(self) -> int:
        return len(self.data[0]) if self.data else 0

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self.data[ij[0]][ij[1]]

    def row(self, i: int) -> Vec:
        return self.data[i]

    def col(self, j: int) -> Vec:
        return tuple(r[j] for r in self.data)

    def __add__(self, other: "Mat") -> "Mat":
        return Mat(tuple(vec_add(a, b) for a, b in zip(self.data, other.data, strict=True)))

    def __sub__(self, other: "Mat") -> "Mat":
        return Mat(tuple(vec_sub(a, b) for a, b in zip(self.data, other.data, strict=True)))

    def __neg__(self) -> "Mat":
        return Mat(tuple(tuple(-x for x in r) for r in self.data))

    def scale(self, c) -> "Mat":
        c = frac(c)
        return Mat(tuple(tuple(c * x for x in r) for r in self.data))

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        bt = other.transpose().data
        return Mat(tuple(tuple(vec_dot(r, c) for c in bt) for r in self.data))

    def apply(self, v: Sequence[Fraction]) -> Vec:
        if len(v) != self.cols:
            raise ValueError("shape mismatch in matrix-vector product")
        return tuple(vec_dot(r, v) for r in self.data)

    def transpose(self) -> "Mat":
        return Mat(tuple(zip(*self.data, strict=True))) if self.data else self

    def commutator(self, other: "Mat") -> "Mat":
        return self @ other - other @ self

    def flatten(self) -> Vec:
        return tuple(x for r in self.data for x in r)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.data for x in r)

    def trace(self) -> Fraction:
        return sum((self.data[i][i] for i in range(min(self.rows, self.cols))), Fraction(0))

    def to_object_array(self) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=object)
        for i, r in enumerate(self.data):
            for j, x in enumerate(r):
                out[i, j] = x
        return out

    def __repr__(self) -> str:  # keep debug output short
        return "Mat(%dx%d)" % (self.rows, self.cols)


def mat_from_flat(flat: Sequence[Fraction], rows: int, cols: int) -> Mat:
    assert len(flat) == rows * cols
    return Mat(tuple(tuple(flat[i * cols + j] for j in range(cols)) for i in range(rows)))


# ---------------------------------------------------------------------------
# exact reduced row echelon form


def rref(m: Mat) -> tuple[Mat, tuple[int, ...]]:
    """Reduced row echelon form over the rationals.

    Pivoting is deterministic: scan columns left to right, take the first row
    with a nonzero entry.  Returns the RREF and the pivot column indices.
    """
    a = [list(r) for r in m.data]
    nr, nc = m.rows, m.cols
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        pr = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return Mat(tuple(tuple(row) for row in a)), tuple(pivots)


def rref_bareiss(m: Mat) -> tuple[Mat, tuple[int, ...]]:
    """Same RREF via fraction-free (Bareiss) elimination on a scaled copy.

    Works on integer rows (each input row is cleared of denominators), keeps
    all intermediate entries integral via the two-step exact division, and
    normalizes at the end.  Used as the fallback for the modular solver; the
    RREF of a matrix is unique, so this must agree with :func:`rref`.
    """
    nr, nc = m.rows, m.cols
    a: list[list[int]] = []
    for row in m.data:
        d = lcm(*(x.denominator for x in row)) if row else 1
        a.append([int(x * d) for x in row])
    pivots: list[int] = []
    r = 0
    prev = 1
    for c in range(nc):
        if r == nr:
            break
        pr = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        piv = a[r][c]
        for i in range(nr):
            if i == r:
                continue
            fi = a[i][c]
            if fi == 0 and prev == 1:
                continue
            a[i] = [(piv * a[i][j] - fi * a[r][j]) // prev for j in range(nc)]
        prev = piv
        pivots.append(c)
        r += 1
    out = []
    for i, row in enumerate(a):
        if i < len(pivots):
            piv = row[pivots[i]]
            out.append(tuple(Fraction(x, piv) for x in row))
        else:
            assert all(x == 0 for x in row), "Bareiss left a nonzero non-pivot row"
            out.append(tuple(Fraction(0) for _ in row))
    return Mat(tuple(out)), tuple(pivots)


def _nullspace_from_rref(r: Mat, pivots: Sequence[int]) -> list[Vec]:
    nc = r.cols
    pivset = set(pivots)
    free = [c for c in range(nc) if c not in pivset]
    basis = []
    for f in free:
        v = [Fraction(0)] * nc
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -r.data[i][f]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# modular arithmetic helpers


def _int_array(m: Mat) -> np.ndarray:
    """Row-wise denominator clearing; int64 when it fits, object otherwise."""
    rows = []
    big = False
    for row in m.data:
        d = lcm(*(x.denominator for x in row)) if row else 1
        ints = [int(x * d) for x in row]
        big = big or any(abs(v) >= 2**62 for v in ints)
        rows.append(ints)
    dtype = object if big else np.int64
    arr = np.empty((m.rows, m.cols), dtype=dtype)
    for i, r in enumerate(rows):
        arr[i] = r
    return arr


def _to_int64_mod(arr: np.ndarray, p: int) -> np.ndarray:
    if arr.dtype == object:
        return np.array([[int(x) % p for x in row] for row in arr], dtype=np.int64)
    return np.mod(arr, p).astype(np.int64)


def _rref_mod_p(m: np.ndarray, p: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Vectorized Gauss-Jordan over GF(p); same pivot rule as :func:`rref`."""
    a = np.mod(m, p).astype(np.int64)
    nr, nc = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        colv = a[:, c].copy()
        colv[r] = 0
        tgt = np.nonzero(colv)[0]
        if tgt.size:
            a[tgt] = (a[tgt] - colv[tgt, None] * a[r][None, :]) % p
        pivots.append(c)
        r += 1
    return a, tuple(pivots)


def _rat_reconstruct(r: int, m: int) -> Optional[Fraction]:
    """Wang's rational reconstruction of r mod m, or None."""
    r %= m
    if r == 0:
        return Fraction(0)
    bound = isqrt(m // 2)
    s0, s1 = m, r
    t0, t1 = 0, 1
    while s1 > bound:
        q = s0 // s1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound:
        return None
    a, b = s1, t1
    if b < 0:
        a, b = -a, -b
    if gcd(a, b) != 1:
        return None
    if (a - b * r) % m != 0:
        return None
    return Fraction(a, b)


def _crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    m = m1 * m2
    x = (r1 + m1 * ((r2 - r1) * pow(m1, -1, m2) % m2)) % m
    return x, m


def max_abs_int(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    if arr.dtype == object:
        return max((abs(int(x)) for x in arr.flat), default=0)
    return int(np.max(np.abs(arr)))


def exact_int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of integer matrices, picking the cheapest safe dtype.

    Float64 BLAS is used when every partial sum provably stays below 2**53,
    which also makes the result independent of BLAS thread count.
    """
    inner = a.shape[1]
    bound = max_abs_int(a) * max_abs_int(b) * max(inner, 1)
    if a.dtype != object and b.dtype != object:
        if bound < 2**53:
            prod = a.astype(np.float64) @ b.astype(np.float64)
            return np.rint(prod).astype(np.int64)
        if bound < 2**62:
            return a.astype(np.int64) @ b.astype(np.int64)
    ao = a.astype(object)
    bo = b.astype(object)
    return ao @ bo


@dataclass
class _SparseRows:
    """CSR-style view of integer rows for fast exact residual checks."""

    indptr: list[int]
    idx: list[int]
    val: list[int]

    @staticmethod
    def from_array(arr: np.ndarray) -> "_SparseRows":
        indptr = [0]
        idx: list[int] = []
        val: list[int] = []
        for r in arr:
            for j, x in enumerate(r):
                if x:
                    idx.append(j)
                    val.append(int(x))
            indptr.append(len(idx))
        return _SparseRows(indptr, idx, val)

    def apply_is_zero(self, v: Sequence[Fraction]) -> bool:
        for i in range(len(self.indptr) - 1):
            s = Fraction(0)
            for k in range(self.indptr[i], self.indptr[i + 1]):
                s += self.val[k] * v[self.idx[k]]
            if s != 0:
                return False
        return True


def _nullspace_modular(arr: np.ndarray) -> Optional[tuple[list[Vec], tuple[int, ...]]]:
    """Multi-prime modular nullspace with exact verification.

    Returns (basis, pivot columns), or None when the prime budget is
    exhausted without a verified answer, in which case the caller falls
    back to Bareiss elimination.
    """
    nc = arr.shape[1]
    work = arr
    if arr.shape[0] > 2 * nc:
        # Gram compression: over an ordered field null(A^T A) = null(A),
        # and A^T A is exact integer arithmetic, so nothing is lost.
        work = exact_int_matmul(arr.T, arr)
    sparse = _SparseRows.from_array(arr)

    best_pivots: Optional[tuple[int, ...]] = None
    residues: Optional[list[list[int]]] = None
    modulus = 1
    for p in _PRIMES:
        red, pivots = _rref_mod_p(_to_int64_mod(work, p), p)
        basis_p = []
        pivset = set(pivots)
        free = [c for c in range(nc) if c not in pivset]
        for f in free:
            v = [0] * nc
            v[f] = 1
            for i, pc in enumerate(pivots):
                v[pc] = (-int(red[i, f])) % p
            basis_p.append(v)
        if best_pivots is None or len(pivots) > len(best_pivots):
            best_pivots = pivots
            residues = basis_p
            modulus = p
        elif pivots == best_pivots:
            assert residues is not None
            residues = [
                [_crt_pair(r1, modulus, r2, p)[0] for r1, r2 in zip(v1, v2)]
                for v1, v2 in zip(residues, basis_p)
            ]
            modulus *= p
        else:
            continue  # bad prime: wrong pivot structure, skip its residues
        # attempt reconstruction + exact verification
        assert residues is not None and best_pivots is not None
        cand: list[Vec] = []
        ok = True
        for v in residues:
            vec = []
            for x in v:
                q = _rat_reconstruct(x, modulus)
                if q is None:
                    ok = False
                    break
                vec.append(q)
            if not ok:
                break
            cand.append(tuple(vec))
        if not ok:
            continue
        if all(sparse.apply_is_zero(v) for v in cand):
            if len(cand) + len(best_pivots) == nc:
                return cand, best_pivots
    return None


# ---------------------------------------------------------------------------
# public solvers


def _nullspace_of_int(arr: np.ndarray) -> tuple[list[Vec], tuple[int, ...]]:
    nr, nc = arr.shape
    if nc == 0:
        return [], ()
    if nr == 0:
        return [basis_vec(nc, i) for i in range(nc)], ()
    work = arr
    if nc <= LARGE_COLS and nr > 4 * nc:
        # tall stacks compress to their Gram matrix without changing the
        # nullspace; verification below still runs against the full rows
        work = exact_int_matmul(arr.T, arr)
    if nc > LARGE_COLS:
        modular = _nullspace_modular(arr)
        if modular is not None:
            result, pivots = modular
        else:
            red, pivots = rref_bareiss(Mat.from_rows([[int(x) for x in r] for r in arr]))
            result = _nullspace_from_rref(red, pivots)
    else:
        red, pivots = rref(Mat.from_rows([[int(x) for x in r] for r in work]))
        result = _nullspace_from_rref(red, pivots)
    sparse = _SparseRows.from_array(arr)
    for v in result:
        if not sparse.apply_is_zero(v):
            raise AssertionError("nullspace verification failed")
    return result, pivots


def nullspace(m: Mat) -> list[Vec]:
    """Basis of the right nullspace, in reduced echelon form.

    Every returned vector satisfies m @ v = 0 exactly; this is re-verified
    by multiplication before returning.
    """
    if m.cols == 0:
        return []
    if m.rows == 0:
        return [basis_vec(m.cols, i) for i in range(m.cols)]
    return _nullspace_of_int(_int_array(m))[0]


def nullspace_int(arr: np.ndarray) -> tuple[list[Vec], tuple[int, ...]]:
    """Nullspace of an integer matrix given as a numpy array.

    Returns (basis, pivot columns); the free columns are the complement of
    the pivots, and the canonical basis satisfies v_a[free_b] = delta_ab,
    which makes expansion coefficients of span members directly readable.
    """
    if arr.dtype not in (np.int64, object):
        arr = arr.astype(np.int64)
    return _nullspace_of_int(arr)


def rank(m: Mat) -> int:
    """Exact rank, certified by a verified nullspace basis.

    The modular path certifies both bounds: pivots nonzero mod p give
    rank >= r, and the verified nullspace vectors give rank <= r.
    """
    if m.rows == 0 or m.cols == 0:
        return 0
    return m.cols - len(nullspace(m))


def inverse(m: Mat) -> Mat:
    """Exact inverse of a square matrix; raises on singular input."""
    if m.rows != m.cols:
        raise ValueError("only square matrices invert")
    n = m.rows
    aug = Mat(tuple(r + Mat.identity(n).data[i] for i, r in enumerate(m.data)))
    red, pivots = rref(aug)
    if pivots[:n] != tuple(range(n)):
        raise ValueError("matrix is singular")
    inv = Mat(tuple(row[n:] for row in red.data))
    assert m @ inv == Mat.identity(n)
    return inv


def solve(m: Mat, b: Sequence[Fraction]) -> Optional[Vec]:
    """One exact solution of m x = b (free variables set to 0), or None."""
    if len(b) != m.rows:
        raise ValueError("right hand side has wrong length")
    nc = m.cols
    if nc <= LARGE_COLS:
        aug = Mat(tuple(r + (frac(x),) for r, x in zip(m.data, b)))
        red, pivots = rref(aug)
        if nc in pivots:
            return None
        x = [Fraction(0)] * nc
        for i, p in enumerate(pivots):
            x[p] = red.data[i][nc]
        sol = tuple(x)
    else:
        sol = _solve_modular(m, b)
        if sol is None:
            return None
    if m.apply(sol) != tuple(frac(x) for x in b):
        return None
    return sol


def _solve_modular(m: Mat, b: Sequence[Fraction]) -> Optional[Vec]:
    """Normal-equations route: solve A^T A x = A^T b and check A x = b.

    Over the rationals the normal equations are always consistent, and the
    original system is consistent iff the verified candidate satisfies it,
    so a nonzero residual is a definitive "no solution".
    """
    aug = Mat(tuple(r + (frac(x),) for r, x in zip(m.data, b)))
    int_aug = _int_array(aug).astype(object)
    a_obj = int_aug[:, :-1]
    b_obj = int_aug[:, -1:]
    gram = exact_int_matmul(a_obj.T, a_obj)
    rhs = exact_int_matmul(a_obj.T, b_obj)
    rows = np.empty((gram.shape[0], gram.shape[1] + 1), dtype=object)
    rows[:, :-1] = gram
    rows[:, -1:] = rhs
    nc = m.cols
    modulus = 1
    best: Optional[tuple[int, ...]] = None
    res: Optional[list[int]] = None
    for p in _PRIMES:
        red, pivots = _rref_mod_p(_to_int64_mod(rows, p), p)
        if nc in pivots:
            continue  # normal equations cannot be inconsistent; bad prime
        x = [0] * nc
        for i, pc in enumerate(pivots):
            x[pc] = int(red[i, nc])
        if best is None or len(pivots) > len(best):
            best, res, modulus = pivots, x, p
        elif pivots == best:
            assert res is not None
            res = [_crt_pair(r1, modulus, r2, p)[0] for r1, r2 in zip(res, x)]
            modulus *= p
        else:
            continue
        assert res is not None
        cand = []
        ok = True
        for v in res:
            q = _rat_reconstruct(v, modulus)
            if q is None:
                ok = False
                break
            cand.append(q)
        if not ok:
            continue
        sol = tuple(cand)
        signed = rows.copy()
        signed[:, -1] = [-int(x) for x in rows[:, -1]]
        if _SparseRows.from_array(signed).apply_is_zero(sol + (Fraction(1),)):
            return sol
    # prime budget exhausted: exact fallback on the normal equations
    red, pivots = rref_bareiss(Mat.from_rows([[int(x) for x in r] for r in rows]))
    if nc in pivots:
        return None
    x = [Fraction(0)] * nc
    for i, p in enumerate(pivots):
        x[p] = red.data[i][nc]
    return tuple(x)


def span_rref(vectors: Sequence[Sequence[Fraction]]) -> Mat:
    """Canonical form of a span: RREF rows with zero rows dropped.

    Two lists of vectors span the same subspace iff their span_rref agree.
    """
    if not vectors:
        return Mat(())
    red, pivots = rref(Mat.from_rows(vectors))
    return Mat(red.data[: len(pivots)])


def expand_in_basis(vectors: Sequence[Vec], target: Vec) -> Optional[Vec]:
    """Coefficients expressing target as a combination of vectors, or None."""
    if not vectors:
        return () if all(x == 0 for x in target) else None
    m = Mat.from_rows(list(zip(*vectors, strict=True)))
    return solve(m, list(target))
