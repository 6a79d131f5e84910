"""Vectorized exact identity checks on integer structure tensors.

The heavy verifications (the linearized Jordan identity over all basis
triples, the module operator identity) are cubic or worse in the dimension,
so they run as numpy matrix products on denominator-cleared integer tensors.
Float64 GEMMs are used only under proven magnitude bounds: every product and
partial sum stays below 2**53, so the floating point arithmetic is exact and
independent of BLAS threading.  If a bound cannot be established the caller
falls back to slow rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

import numpy as np

_F64_SAFE = 2**53


class ExactOverflow(Exception):
    """Raised when entries are too large for the fast integer path."""


def to_int_tensor(
    entries: Sequence[tuple[tuple[int, ...], Fraction]],
    shape: tuple[int, ...],
    force_scale: int | None = None,
):
    """Clear denominators of a sparse rational tensor.

    Returns (int64 array, scale) with array = scale * tensor.  Raises
    ExactOverflow if any scaled entry does not fit comfortably in int64.
    force_scale lets two tensors share one scale so their entries stay
    directly comparable; it must clear every denominator.
    """
    scale = 1
    for _, q in entries:
        scale = lcm(scale, q.denominator)
    if force_scale is not None:
        if force_scale % scale != 0:
            raise ValueError("forced scale does not clear all denominators")
        scale = force_scale
    out = np.zeros(shape, dtype=np.int64)
    for idx, q in entries:
        v = q.numerator * (scale // q.denominator)
        if abs(v) >= 2**40:
            raise ExactOverflow("scaled structure constant too large for fast path")
        out[idx] = v
    return out, scale


def _check_f64(bound: int):
    if bound >= _F64_SAFE:
        raise ExactOverflow("magnitude bound %d too large for exact float64" % bound)


def _smallest_store(arr: np.ndarray) -> np.ndarray:
    m = int(np.abs(arr).max()) if arr.size else 0
    for dt, lim in ((np.int8, 127), (np.int16, 32767), (np.int32, 2**31 - 1)):
        if m <= lim:
            return arr.astype(dt)
    return arr.astype(np.int64)


def jordan_violation(c: np.ndarray) -> Optional[tuple[int, int, int]]:
    """First basis triple violating the linearized Jordan identity.

    c is the integer structure tensor, c[i, j, k] = coefficient of e_k in
    e_i e_j (times a global scale).  The identity checked for every triple
    i <= j <= k (it is fully symmetric) is

        [L(e_i e_j), L_k] + [L(e_k e_i), L_j] + [L(e_j e_k), L_i] = 0.

    Returns the lexicographically smallest violating (i, j, k), or None.
    """
    n = c.shape[0]
    if n == 0:
        return None
    cmax = int(np.abs(c).max()) if c.size else 0
    lmat = np.ascontiguousarray(c.transpose(0, 2, 1)).astype(np.float64)  # L[i][r][j]
    _check_f64(cmax * cmax * n)
    u = (c.reshape(n * n, n).astype(np.float64) @ lmat.reshape(n, n * n)).reshape(n, n, n, n)
    umax = int(np.abs(u).max()) if u.size else 0
    _check_f64(2 * cmax * umax * n)
    ustore = _smallest_store(u)
    del u

    best: Optional[tuple[int, int, int]] = None

    def note(i: int, j: int, k: int):
        nonlocal best
        t = (i, j, k)
        if best is None or t < best:
            best = t

    for j in range(n):
        kcnt = n - j
        uj = ustore[j, j:].astype(np.float64)  # U[j,k], k >= j
        uj_t = np.ascontiguousarray(uj.transpose(1, 0, 2)).reshape(n, kcnt * n)
        uj_f = uj.reshape(kcnt * n, n)
        uij_all = ustore[: j + 1, j].astype(np.float64)  # U[i,j], i <= j
        blk = max(1, 12_000_000 // max(1, kcnt * n * n))
        for i0 in range(0, j + 1, blk):
            i1 = min(j + 1, i0 + blk)
            b = i1 - i0
            li = lmat[i0:i1]  # (b, n, n)
            li_t = np.ascontiguousarray(li.transpose(1, 0, 2)).reshape(n, b * n)
            # X1 = [L_i, U_jk]
            p1 = (li.reshape(b * n, n) @ uj_t).reshape(b, n, kcnt, n)
            q1 = (uj_f @ li_t).reshape(kcnt, n, b, n)
            s = p1.transpose(0, 2, 1, 3) - q1.transpose(2, 0, 1, 3)
            del p1, q1
            # X2 = [L_j, U_ik]
            usub = ustore[i0:i1, j:].astype(np.float64)  # (b, kcnt, n, n)
            p2 = (lmat[j] @ usub.transpose(2, 0, 1, 3).reshape(n, b * kcnt * n)).reshape(
                n, b, kcnt, n
            )
            q2 = (usub.reshape(b * kcnt * n, n) @ lmat[j]).reshape(b, kcnt, n, n)
            s += p2.transpose(1, 2, 0, 3)
            s -= q2
            del p2, q2, usub
            # X3 = [L_k, U_ij]
            uij = uij_all[i0:i1]  # (b, n, n)
            p3 = (lmat[j:].reshape(kcnt * n, n) @ np.ascontiguousarray(
                uij.transpose(1, 0, 2)
            ).reshape(n, b * n)).reshape(kcnt, n, b, n)
            q3 = (uij.reshape(b * n, n) @ np.ascontiguousarray(
                lmat[j:].transpose(1, 0, 2)
            ).reshape(n, kcnt * n)).reshape(b, n, kcnt, n)
            s += p3.transpose(2, 0, 1, 3)
            s -= q3.transpose(0, 2, 1, 3)
            del p3, q3
            bad = np.abs(s).max(axis=(2, 3))
            if bad.any():
                for il, kl in zip(*np.nonzero(bad)):
                    note(i0 + int(il), j, j + int(kl))
            del s
    return best


def module_identity_violation(c: np.ndarray, a: np.ndarray) -> Optional[tuple[int, int, int]]:
    """First violation of [[A_i, A_j], A_k] + A((e_i e_k) e_j - e_i (e_k e_j)).

    c is the algebra structure tensor, a[i] the action operator of e_i
    (a[i][out][in]); both must carry the same denominator-clearing scale so
    that the two terms are comparable.  Checks all triples with i < j; both
    sides are antisymmetric in (i, j) and vanish at i = j.

    Returns the smallest violating (i, j, k) with i < j, else None.
    """
    n = c.shape[0]
    m = a.shape[1]
    if n == 0:
        return None
    cmax = int(np.abs(c).max()) if c.size else 0
    amax = int(np.abs(a).max()) if a.size else 0
    cf = c.astype(np.float64)
    af = a.astype(np.float64)

    # associator tensor assoc[i, k, j, :] = (e_i e_k) e_j - e_i (e_k e_j)
    _check_f64(cmax * cmax * n)
    t1 = (cf.reshape(n * n, n) @ cf.reshape(n, n * n)).reshape(n, n, n, n)
    # t1[i, k, j, r] = sum_m c[i,k,m] c[m,j,r]
    c_i_mr = np.ascontiguousarray(cf.transpose(1, 0, 2)).reshape(n, n * n)
    t2 = (cf.reshape(n * n, n) @ c_i_mr).reshape(n, n, n, n)
    # t2[k, j, i, r] = sum_m c[k,j,m] c[i,m,r]
    assoc = t1 - t2.transpose(2, 0, 1, 3)
    del t1, t2
    asmax = int(np.abs(assoc).max()) if assoc.size else 0

    # g[i, j] = [A_i, A_j]
    _check_f64(amax * amax * m)
    prod = (af.reshape(n * m, m) @ np.ascontiguousarray(
        af.transpose(1, 0, 2)
    ).reshape(m, n * m)).reshape(n, m, n, m)
    g = prod.transpose(0, 2, 1, 3) - prod.transpose(2, 0, 1, 3)  # (n, n, m, m)
    del prod
    gmax = int(np.abs(g).max()) if g.size else 0
    _check_f64(max(2 * gmax * amax * m, asmax * amax * n))

    gf = np.ascontiguousarray(g.reshape(n * n * m, m))
    gf_t = np.ascontiguousarray(g.transpose(2, 0, 1, 3).reshape(m, n * n * m))
    best: Optional[tuple[int, int, int]] = None
    for k in range(n):
        h = (gf @ af[k]).reshape(n, n, m, m)
        h -= (af[k] @ gf_t).reshape(m, n, n, m).transpose(1, 2, 0, 3)
        lam = (assoc[:, k].reshape(n * n, n) @ af.reshape(n, m * m)).reshape(n, n, m, m)
        h += lam
        bad = np.abs(h).max(axis=(2, 3))
        if bad.any():
            for i, j in zip(*np.nonzero(bad)):
                i, j = int(i), int(j)
                if i < j:
                    t = (i, j, k)
                    if best is None or t < best:
                        best = t
        del h, lam
    return best
