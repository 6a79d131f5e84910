"""Derivation Lie algebras of the structure-constant algebras.

A derivation is a linear operator X with X(ab) = X(a)b + a X(b).  For a
fixed basis this is one homogeneous linear system over the matrix entries,
and :func:`derivation_basis` solves it exactly.  On the 27-dimensional
exceptional algebra the answer is the 52-dimensional simple Lie algebra of
type f4; the subalgebra annihilating the three diagonal idempotents is the
28-dimensional d4, isomorphic to so(8) acting compatibly on the three
off-diagonal octonion slots.  :func:`complete_triality` reconstructs, from
one antisymmetric 8x8 generator, the unique other two members of such a
compatible triple.

Inner derivations are the commutators [L_x, L_y] of multiplication
operators; for the simple algebras they span everything, and
:func:`express_in_inner` finds an explicit expansion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Optional, Sequence

import numpy as np

from .algebra import AlgebraPresentation, center_basis
from .cayley_dickson import CD, basis_table
from .linalg import (
    Mat,
    Vec,
    exact_int_matmul,
    expand_in_basis,
    frac,
    inverse,
    mat_from_flat,
    nullspace_int,
    solve,
)

# ---------------------------------------------------------------------------
# the Leibniz system


def _scaled_int_mats(mats: Sequence[Mat]) -> tuple[np.ndarray, int]:
    """Stack rational matrices as one int64 array with a common scale."""
    denoms = [x.denominator for m in mats for row in m.data for x in row]
    s = lcm(*denoms) if denoms else 1
    n = mats[0].rows if mats else 0
    out = np.zeros((len(mats), n, mats[0].cols if mats else 0), dtype=np.int64)
    for a, m in enumerate(mats):
        for r, row in enumerate(m.data):
            for c, x in enumerate(row):
                if x:
                    v = x * s
                    assert v.denominator == 1 and abs(v) < 2**62
                    out[a, r, c] = int(v)
    return out, s


def _leibniz_system(a: AlgebraPresentation) -> np.ndarray:
    """Rows of the constraint X(e_i e_j) - X(e_i)e_j - e_i X(e_j) = 0.

    Unknowns are the n*n matrix entries X[r, c] flattened row-major; one
    block of n rows per unordered basis pair.
    """
    c, _ = a.int_tensor()
    c = c.astype(np.int64)
    n = a.dim
    lm = np.ascontiguousarray(c.transpose(0, 2, 1))  # lm[i][r][m] = c[i,m,r]
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    rows = np.zeros((len(pairs) * n, n * n), dtype=np.int64)
    idx = np.arange(n)
    for t, (i, j) in enumerate(pairs):
        blk = rows[t * n : (t + 1) * n].reshape(n, n, n)
        blk[idx, idx] += c[i, j]
        blk[:, :, i] -= lm[j]
        blk[:, :, j] -= lm[i]
    return rows


def leibniz_violation(a: AlgebraPresentation, x: Mat) -> Optional[tuple[int, int]]:
    """First basis pair where x fails the derivation rule, or None.

    Batched as three exact integer contractions; the common scales cancel in
    the zero test, so no rational arithmetic is needed per pair.
    """
    n = a.dim
    if x.rows != n or x.cols != n:
        raise ValueError("operator shape does not match the algebra")
    c, _ = a.int_tensor()
    c = c.astype(np.int64)
    xm = _scaled_int_mats([x])[0][0]
    xt = xm.T.copy()
    t1 = exact_int_matmul(c.reshape(n * n, n), xt).reshape(n, n, n)
    t2 = exact_int_matmul(xt, c.reshape(n, n * n)).reshape(n, n, n)
    t3 = exact_int_matmul(xt, c.transpose(1, 0, 2).reshape(n, n * n)).reshape(
        n, n, n
    ).transpose(1, 0, 2)
    defect = (
        np.asarray(t1, dtype=object)
        - np.asarray(t2, dtype=object)
        - np.asarray(t3, dtype=object)
    )
    bad = np.argwhere(defect != 0)
    if bad.size == 0:
        return None
    i, j = int(bad[0][0]), int(bad[0][1])
    return (i, j) if i <= j else (j, i)


def _leibniz_ok_int(c: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Vectorized derivation test for a batch of integer matrices.

    c is the (scaled) structure tensor, xs has shape (batch, n, n).  Scales
    cancel because every term is bilinear in (c, x).  Returns a bool array.
    """
    cf = c.astype(np.float64)
    xf = xs.astype(np.float64)
    n = c.shape[0]
    bound = n * float(np.abs(c).max(initial=0)) * float(np.abs(xs).max(initial=0))
    assert bound < 2.0**53
    r1 = np.einsum("ijk,brk->bijr", cf, xf)
    r2 = np.einsum("bmi,mjr->bijr", xf, cf)
    r3 = np.einsum("bmj,imr->bijr", xf, cf)
    res = r1 - r2 - r3
    return np.array([not res[b].any() for b in range(xs.shape[0])])


@dataclass(frozen=True)
class DerivationBasis:
    """Canonical basis of the derivation Lie algebra of one algebra.

    The basis comes from the reduced echelon form of the Leibniz system, so
    flattened basis vectors satisfy mats[a].flatten()[free_coords[b]] ==
    delta(a, b); expansion coefficients of any span member can be read off
    its free coordinates directly.
    """

    algebra: AlgebraPresentation
    mats: tuple[Mat, ...]
    free_coords: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.mats)

    def coefficients_of(self, x: Mat) -> Vec:
        """Exact expansion of x in this basis; raises if x is not in the span."""
        flat = x.flatten()
        coeffs = tuple(flat[f] for f in self.free_coords)
        n = self.algebra.dim
        acc = [Fraction(0)] * (n * n)
        for q, m in zip(coeffs, self.mats):
            if q:
                for k, v in enumerate(m.flatten()):
                    acc[k] += q * v
        if tuple(acc) != flat:
            raise ValueError("operator is not in the derivation span")
        return coeffs

    def element(self, coeffs: Sequence) -> Mat:
        n = self.algebra.dim
        acc = [[Fraction(0)] * n for _ in range(n)]
        for q, m in zip(coeffs, self.mats):
            q = frac(q)
            if q:
                for r in range(n):
                    for c, v in enumerate(m.data[r]):
                        if v:
                            acc[r][c] += q * v
        return Mat.from_rows(acc)


def derivation_basis(a: AlgebraPresentation) -> DerivationBasis:
    """All derivations, as the exact nullspace of the Leibniz system."""
    rows = _leibniz_system(a)
    basis, pivots = nullspace_int(rows)
    n = a.dim
    pivset = set(pivots)
    free = tuple(k for k in range(n * n) if k not in pivset)
    mats = tuple(mat_from_flat(v, n, n) for v in basis)
    return DerivationBasis(a, mats, free)


# ---------------------------------------------------------------------------
# structure constants of the derivation algebra


def structure_constants(der: DerivationBasis) -> list[list[Vec]]:
    """b[p][q] = coefficients of [D_p, D_q] in the basis, exactly verified.

    The commutator of two derivations is a derivation, so it must expand in
    the computed basis; the expansion from the canonical free coordinates is
    re-checked by one exact matrix product over all pairs.
    """
    d = der.dim
    n = der.algebra.dim
    if d == 0:
        return []
    ints, s = _scaled_int_mats(der.mats)
    flat = ints.reshape(d, n * n)
    free = np.array(der.free_coords, dtype=np.int64)
    pairs = list(itertools.combinations(range(d), 2))
    comms = np.zeros((len(pairs), n, n), dtype=np.int64)
    bound = n * float(np.abs(ints).max(initial=0)) ** 2
    assert 2 * bound < 2.0**62
    for t, (p, q) in enumerate(pairs):
        comms[t] = ints[p] @ ints[q] - ints[q] @ ints[p]
    commflat = comms.reshape(len(pairs), n * n)
    # scaled coefficients: comm = sum_g (chat[g]/s) * mats[g] (both sides x s^2)
    chat = commflat[:, free]
    lhs = s * commflat
    rhs = exact_int_matmul(chat, flat)
    if not (np.asarray(lhs, dtype=object) == np.asarray(rhs, dtype=object)).all():
        raise AssertionError("derivation bracket left the computed span")
    out = [[None] * d for _ in range(d)]
    s2 = s * s
    zero = tuple(Fraction(0) for _ in range(d))
    for p in range(d):
        out[p][p] = zero
    for t, (p, q) in enumerate(pairs):
        vec = tuple(Fraction(int(x), s2) for x in chat[t])
        out[p][q] = vec
        out[q][p] = tuple(-x for x in vec)
    return out


def check_jacobi(b: list[list[Vec]]) -> bool:
    """Jacobi identity for bracket constants b[p][q] = coeffs of [D_p, D_q]."""
    d = len(b)
    if d == 0:
        return True
    dens = [x.denominator for row in b for v in row for x in v]
    s = lcm(*dens) if dens else 1
    bi = np.zeros((d, d, d), dtype=np.int64)
    for p in range(d):
        for q in range(d):
            for g, x in enumerate(b[p][q]):
                bi[p, q, g] = int(x * s)
    bound = d * float(np.abs(bi).max(initial=0)) ** 2
    if bound < 2.0**52:
        t1 = (bi.reshape(d * d, d).astype(np.float64) @ bi.reshape(d, d * d).astype(np.float64)).reshape(d, d, d, d)
    else:
        t1 = (bi.reshape(d * d, d).astype(object) @ bi.reshape(d, d * d).astype(object)).reshape(d, d, d, d)
    cyc = t1 + t1.transpose(1, 2, 0, 3) + t1.transpose(2, 0, 1, 3)
    return not np.asarray(cyc).any()


# ---------------------------------------------------------------------------
# structural checks


def check_unit_annihilated(der: DerivationBasis) -> bool:
    u = der.algebra.unit
    zero = der.algebra.zero()
    return all(m.apply(u) == zero for m in der.mats)


def check_center_stability(der: DerivationBasis) -> bool:
    """Derivations map the associative center into itself."""
    center = center_basis(der.algebra)
    for m in der.mats:
        for z in center:
            if expand_in_basis(center, m.apply(z)) is None:
                return False
    return True


def check_lie_rinehart(der: DerivationBasis) -> dict:
    """The center / derivation pair carries the expected structure.

    Checks that z * D is again a derivation for central z (module structure)
    and the mixed bracket law [D, z D'] = D(z) D' + z [D, D'], batched in
    scaled integer arithmetic so the float products stay exact.
    """
    a = der.algebra
    n = a.dim
    d = der.dim
    center = center_basis(a)
    c, _ = a.int_tensor()
    c = c.astype(np.int64)
    if d == 0 or not center:
        return {"center_stable": True, "module_closed": True, "mixed_bracket": True}
    dints, _ = _scaled_int_mats(der.mats)
    zdens = [x.denominator for z in center for x in z]
    t = lcm(*zdens)
    module_ok = True
    bracket_ok = True
    df = dints.astype(np.float64)
    cf = c.astype(np.float64)
    comm = np.einsum("pij,qjk->pqik", df, df) - np.einsum("qij,pjk->pqik", df, df)
    maxd = float(np.abs(df).max(initial=0))
    for z in center:
        zi = np.array([int(x * t) for x in z], dtype=np.float64)
        lz = np.einsum("i,imr->rm", zi, cf)  # scaled left multiplication by z
        dz = np.einsum("pri,i->pr", df, zi)
        ldz = np.einsum("pi,imr->prm", dz, cf)
        lzd = np.matmul(lz, df)  # (d, n, n) pairs L_z with each D
        for big, other in ((lzd, maxd), (ldz, maxd), (comm, np.abs(lz).max(initial=0))):
            assert n * float(np.abs(big).max(initial=0)) * float(other) < 2.0**53
        if not _leibniz_ok_int(c, lzd.astype(np.int64)).all():
            module_ok = False
        lhs = np.einsum("pij,qjk->pqik", df, lzd) - np.einsum("qij,pjk->pqik", lzd, df)
        rhs = np.einsum("pij,qjk->pqik", ldz, df) + np.einsum("ij,pqjk->pqik", lz, comm)
        if (lhs != rhs).any():
            bracket_ok = False
    return {
        "center_stable": check_center_stability(der),
        "module_closed": module_ok,
        "mixed_bracket": bracket_ok,
    }


# ---------------------------------------------------------------------------
# inner derivations


def inner_operator(a: AlgebraPresentation, x: Sequence, y: Sequence) -> Mat:
    """[L_x, L_y]; always a derivation when the algebra is Jordan."""
    return a.left_op(tuple(frac(v) for v in x)).commutator(
        a.left_op(tuple(frac(v) for v in y))
    )


def inner_basis_operators(a: AlgebraPresentation) -> list[tuple[tuple[int, int], Mat]]:
    """[L_i, L_j] for basis pairs i < j."""
    out = []
    for i in range(a.dim):
        li = a.left_mult_basis(i)
        for j in range(i + 1, a.dim):
            out.append(((i, j), li.commutator(a.left_mult_basis(j))))
    return out


def inner_span_report(a: AlgebraPresentation, der: Optional[DerivationBasis] = None) -> dict:
    """Whether the basis commutators [L_i, L_j] are derivations spanning Der.

    Rank reasoning: once every commutator passes the exact Leibniz test it
    lies in the derivation span, so its rank is at most dim Der; a mod-p
    pivot count meeting that bound is then an exact rank certificate.
    """
    if der is None:
        der = derivation_basis(a)
    ops = inner_basis_operators(a)
    c, _ = a.int_tensor()
    if ops:
        ints, _ = _scaled_int_mats([m for _, m in ops])
        all_der = bool(_leibniz_ok_int(c.astype(np.int64), ints).all())
        stacked = ints.reshape(len(ops), -1)
        from .linalg import _PRIMES, _rref_mod_p, _to_int64_mod

        rank_lower = 0
        for p in _PRIMES[:3]:
            _, pivots = _rref_mod_p(_to_int64_mod(stacked, p), p)
            rank_lower = max(rank_lower, len(pivots))
            if rank_lower == der.dim:
                break
    else:
        all_der = True
        rank_lower = 0
    spans = all_der and rank_lower == der.dim
    if all_der and rank_lower < der.dim and ops:
        # certificate failed; settle it exactly (small algebras only)
        rank_exact = stacked.shape[0] - len(nullspace_int(stacked.T)[0])
        spans = rank_exact == der.dim
        rank_lower = rank_exact
    return {
        "pairs": len(ops),
        "all_derivations": all_der,
        "span_rank": rank_lower,
        "derivation_dim": der.dim,
        "spans_derivations": spans,
    }


def express_in_inner(a: AlgebraPresentation, x: Mat) -> Optional[list[tuple[tuple[int, int], Fraction]]]:
    """Write x as sum of q_(i,j) [L_i, L_j] over basis pairs, or None."""
    ops = inner_basis_operators(a)
    if not ops:
        return None
    cols = [m.flatten() for _, m in ops]
    system = Mat.from_rows([[col[r] for col in cols] for r in range(len(cols[0]))])
    sol = solve(system, x.flatten())
    if sol is None:
        return None
    return [(ops[t][0], q) for t, q in enumerate(sol) if q]


# ---------------------------------------------------------------------------
# the subalgebra fixing the diagonal idempotents


def annihilator_subalgebra(
    der: DerivationBasis, idempotent_indices: tuple[int, ...] = (0, 1, 2)
) -> list[Mat]:
    """Derivations killing the given idempotent basis elements.

    On the exceptional 27-dimensional algebra with the three diagonal
    idempotents this is the d4 subalgebra, dimension 28.
    """
    a = der.algebra
    for i in idempotent_indices:
        if a.basis_product(i, i) != a.basis_element(i):
            raise ValueError("basis element %d is not idempotent" % i)
    if der.dim == 0:
        return []
    n = a.dim
    ints, _ = _scaled_int_mats(der.mats)
    rows = np.zeros((len(idempotent_indices) * n, der.dim), dtype=np.int64)
    for t, i in enumerate(idempotent_indices):
        rows[t * n : (t + 1) * n] = ints[:, :, i].T
    basis, _ = nullspace_int(rows)
    return [der.element(v) for v in basis]


def octonion_slot_block(x: Mat, slot: int, n_diag: int = 3, d: int = 8) -> Mat:
    """8x8 block of an operator on the slot-th off-diagonal coordinate range."""
    lo = n_diag + slot * d
    return Mat(tuple(row[lo : lo + d] for row in x.data[lo : lo + d]))


def is_block_diagonal_for_slots(x: Mat, n_diag: int = 3, d: int = 8) -> bool:
    """True when x preserves the diagonal span and each octonion slot."""
    edges = [0, n_diag] + [n_diag + d * (s + 1) for s in range((x.rows - n_diag) // d)]
    blocks = list(zip(edges, edges[1:]))
    for r in range(x.rows):
        rb = next(b for b in blocks if b[0] <= r < b[1])
        for c in range(x.cols):
            if not (rb[0] <= c < rb[1]) and x.data[r][c] != 0:
                return False
    return True


# ---------------------------------------------------------------------------
# triality completion on the octonions


def _antisym_pairs(d: int = 8) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


@lru_cache(maxsize=1)
def _triality_solver():
    """One-time exact data for the completion solve.

    The defining relation, evaluated on all basis pairs and coordinates,
    is linear in the two unknown antisymmetric matrices; the system has a
    trivial nullspace (uniqueness) and a fixed 56x56 invertible row
    submatrix whose inverse answers every query.
    """
    table = basis_table(3)
    pairs = _antisym_pairs()
    pos = {pq: t for t, pq in enumerate(pairs)}
    ncols = 2 * len(pairs)

    def col2(b, j):
        # column and sign for the D2[b, j] unknown, antisymmetry folded in
        if b == j:
            return None
        return (pos[(b, j)], 1) if b < j else (pos[(j, b)], -1)

    def col3(r, m):
        if r == m:
            return None
        t = pos[(r, m)] if r < m else pos[(m, r)]
        return (len(pairs) + t, 1 if r < m else -1)

    def kappa(m):
        return 1 if m == 0 else -1

    rows = np.zeros((512, ncols), dtype=np.int64)
    d1_coeff = []  # (a, i, coefficient) per row: contribution of D1[a, i]
    rowid = 0
    for i in range(8):
        for j in range(8):
            m, s_ij = table[i][j]
            for r in range(8):
                a = r ^ j
                _, s1 = table[a][j]
                d1_coeff.append((a, i, s1))
                b = i ^ r
                c2 = col2(b, j)
                if c2 is not None:
                    _, s2 = table[i][b]
                    rows[rowid, c2[0]] += s2 * c2[1]
                c3 = col3(r, m)
                if c3 is not None:
                    coef = -s_ij * kappa(m) * kappa(r)
                    rows[rowid, c3[0]] += coef * c3[1]
                rowid += 1
    null, _ = nullspace_int(rows)
    unique = len(null) == 0
    # independent rows: pivot columns of the transpose are row indices here
    from .linalg import rref

    _, piv = rref(Mat.from_rows([[int(v) for v in r] for r in rows.T]))
    sel = list(piv)
    sub = Mat.from_rows([[Fraction(int(v)) for v in rows[r]] for r in sel])
    sub_inv = inverse(sub)
    return rows, d1_coeff, sel, sub_inv, unique, pairs


def complete_triality(d1: Mat) -> tuple[Mat, Mat]:
    """The unique antisymmetric (d2, d3) compatible with antisymmetric d1.

    Compatibility means (d1 x) y + x (d2 y) = conj(d3(conj(x y))) for all
    octonions x, y; the result is verified on every basis pair before
    returning.
    """
    if d1.rows != 8 or d1.cols != 8:
        raise ValueError("expected an 8x8 matrix")
    if d1 != -d1.transpose():
        raise ValueError("triality completion needs an antisymmetric input")
    rows, d1_coeff, sel, sub_inv, unique, pairs = _triality_solver()
    assert unique
    rhs = [-frac(c) * d1.data[a][i] for (a, i, c) in d1_coeff]
    u = sub_inv.apply(tuple(rhs[r] for r in sel))
    # verify all 512 equations, not just the selected ones
    nc = rows.shape[1]
    for r in range(512):
        acc = -rhs[r]
        row = rows[r]
        for c in range(nc):
            if row[c]:
                acc += int(row[c]) * u[c]
        if acc != 0:
            raise ValueError("no compatible completion exists")

    def unpack(offset: int) -> Mat:
        m = [[Fraction(0)] * 8 for _ in range(8)]
        for t, (i, j) in enumerate(pairs):
            m[i][j] = u[offset + t]
            m[j][i] = -u[offset + t]
        return Mat.from_rows(m)

    return unpack(0), unpack(len(pairs))


def derivation_from_triality(d1: Mat) -> Mat:
    """27x27 derivation of the exceptional algebra built from one so(8) element.

    The completion (d2, d3) of d1 acts on the three off-diagonal octonion
    slots while the diagonal span is annihilated; the result lies in the d4
    subalgebra.
    """
    d2, d3 = complete_triality(d1)
    rows = [[Fraction(0)] * 27 for _ in range(27)]
    for s, blk in enumerate((d1, d2, d3)):
        lo = 3 + 8 * s
        for r in range(8):
            for c in range(8):
                rows[lo + r][lo + c] = blk.data[r][c]
    return Mat.from_rows(rows)


def triality_defect(d1: Mat, d2: Mat, d3: Mat) -> Optional[tuple[int, int]]:
    """First octonion basis pair violating the compatibility relation."""
    for i in range(8):
        x = CD.basis(3, i)
        dx = CD.from_coords(3, tuple(d1.data[a][i] for a in range(8)))
        for j in range(8):
            y = CD.basis(3, j)
            dy = CD.from_coords(3, tuple(d2.data[b][j] for b in range(8)))
            lhs = dx * y + x * dy
            xy = (x * y).conj()
            d3xy = CD.from_coords(
                3,
                tuple(
                    sum((d3.data[r][m] * xy.coords[m] for m in range(8)), Fraction(0))
                    for r in range(8)
                ),
            )
            if lhs.coords != d3xy.conj().coords:
                return (i, j)
    return None


# ---------------------------------------------------------------------------
# off-diagonal commutator derivations


def commutator_action_matrix(x1: Sequence, x2: Sequence, x3: Sequence) -> Mat:
    """Derivation of the exceptional algebra from an antihermitian matrix.

    The three octonion parameters fill the off-diagonal slots of a 3x3
    antihermitian matrix M with zero diagonal (same slot convention as the
    hermitian basis); the operator is z -> M z - z M, which preserves
    hermiticity and satisfies the derivation rule.
    """
    from .algebra import _hermitian_pairs

    n = 3
    xs = [CD.from_coords(3, tuple(frac(v) for v in x)) for x in (x1, x2, x3)]
    if any(len(x) != 8 for x in (x1, x2, x3)):
        raise ValueError("octonion parameters need 8 coordinates")
    m = [[CD.zero(3) for _ in range(n)] for _ in range(n)]
    for (pi, pj), x in zip(_hermitian_pairs(n), xs):
        m[pi][pj] = x
        m[pj][pi] = -x.conj()
    cols = []
    for idx in range(27):
        z = _albert_entry_matrix(idx)
        w = [
            [
                sum((m[i][t] * z[t][j] - z[i][t] * m[t][j] for t in range(n)), CD.zero(3))
                for j in range(n)
            ]
            for i in range(n)
        ]
        coords = []
        for i in range(n):
            assert w[i][i].is_real(), "diagonal stayed real"
            coords.append(w[i][i].real_part())
        for pi, pj in _hermitian_pairs(n):
            assert (w[pj][pi] - w[pi][pj].conj()).is_zero()
            coords.extend(w[pi][pj].coords)
        cols.append(coords)
    return Mat.from_rows([[cols[c][r] for c in range(27)] for r in range(27)])


def _albert_entry_matrix(idx: int) -> list[list[CD]]:
    from .algebra import _hermitian_pairs

    n = 3
    m = [[CD.zero(3) for _ in range(n)] for _ in range(n)]
    if idx < n:
        m[idx][idx] = CD.one(3)
    else:
        p, k = divmod(idx - n, 8)
        pi, pj = _hermitian_pairs(n)[p]
        m[pi][pj] = CD.basis(3, k)
        m[pj][pi] = CD.basis(3, k).conj()
    return m
