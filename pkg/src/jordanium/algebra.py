"""Finite-dimensional commutative algebras given by rational structure constants.

An :class:`AlgebraPresentation` holds a basis-free description of a
commutative algebra with unit: the dimension, the unit's coordinates, and the
sparse structure tensor c with e_i e_j = sum_k c[i,j,k] e_k.  Commutativity
and the unit law are enforced at construction; the Jordan identity is not,
it is the job of :func:`check_jordan`, so deliberately broken presentations
can be built for testing.

Constructors cover the standard classification:

* ``build_hermitian(n, level)``: hermitian n x n matrices over the level-th
  Cayley-Dickson algebra under the symmetrized product x y = (xy + yx) / 2.
  Octonion entries (level 3) are restricted to n <= 3; hermitian octonion
  matrices of larger size do not satisfy the Jordan identity.
* ``build_spin(n)``: the spin factor on R + R^n with
  (s + v)(s' + v') = (ss' + <v, v'>) + (sv' + s'v).
* ``direct_sum``: block sums, giving the non-simple semisimple examples.

Elements are plain coordinate tuples of Fractions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .cayley_dickson import _conj_coords, _mul_coords
from .linalg import (
    Mat,
    Vec,
    basis_vec,
    frac,
    format_fraction,
    nullspace_int,
    parse_fraction,
    vec_sub,
    zero_vec,
)

TableEntry = tuple[int, Fraction]


class AlgebraPresentation:
    """Commutative unital algebra with explicit rational structure constants."""

    def __init__(self, label: str, dim: int, unit: Sequence, structure):
        """structure maps (i, j) with i <= j to a sparse list of (k, coeff).

        The (j, i) products are filled in by commutativity.  Raises if an
        explicit asymmetric pair is supplied or the unit law fails.
        """
        self.label = str(label)
        self.dim = int(dim)
        self.unit: Vec = tuple(frac(x) for x in unit)
        if len(self.unit) != self.dim:
            raise ValueError("unit has wrong length")
        table: dict[tuple[int, int], tuple[TableEntry, ...]] = {}
        for (i, j), entries in structure.items():
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise ValueError("structure index out of range")
            cleaned = tuple(
                (int(k), frac(q)) for k, q in sorted(entries, key=lambda e: e[0]) if frac(q) != 0
            )
            if not cleaned:
                continue
            if (j, i) in table and table[(j, i)] != cleaned:
                raise ValueError("structure constants are not commutative")
            table[(i, j)] = cleaned
            table[(j, i)] = cleaned
        self._table = table
        self._lmats: dict[int, Mat] = {}
        self._int_cache = None
        for j in range(self.dim):
            if self.mul(self.unit, basis_vec(self.dim, j)) != basis_vec(self.dim, j):
                raise ValueError("unit law fails on basis vector %d" % j)

    # -- products ----------------------------------------------------------

    def basis_product(self, i: int, j: int) -> Vec:
        out = [Fraction(0)] * self.dim
        for k, q in self._table.get((i, j), ()):
            out[k] += q
        return tuple(out)

    def mul(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Vec:
        out = [Fraction(0)] * self.dim
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                f = xi * yj
                for k, q in self._table.get((i, j), ()):
                    out[k] += f * q
        return tuple(out)

    def left_mult_basis(self, i: int) -> Mat:
        """Matrix of left multiplication by e_i."""
        if i not in self._lmats:
            rows = [[Fraction(0)] * self.dim for _ in range(self.dim)]
            for j in range(self.dim):
                for k, q in self._table.get((i, j), ()):
                    rows[k][j] += q
            self._lmats[i] = Mat.from_rows(rows)
        return self._lmats[i]

    def left_op(self, x: Sequence[Fraction]) -> Mat:
        rows = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            li = self.left_mult_basis(i)
            for r in range(self.dim):
                for c, v in enumerate(li.data[r]):
                    if v:
                        rows[r][c] += xi * v
        return Mat.from_rows(rows)

    def associator(self, x, y, z) -> Vec:
        return vec_sub(self.mul(self.mul(x, y), z), self.mul(x, self.mul(y, z)))

    def square(self, x) -> Vec:
        return self.mul(x, x)

    # -- integer form ------------------------------------------------------

    def structure_entries(self) -> list[tuple[int, int, int, Fraction]]:
        """All nonzero (i, j, k, c) in lexicographic order."""
        out = []
        for (i, j), entries in self._table.items():
            for k, q in entries:
                out.append((i, j, k, q))
        out.sort(key=lambda e: e[:3])
        return out

    def int_tensor(self, force_scale: Optional[int] = None):
        """(int64 tensor, scale) with tensor = scale * structure constants."""
        if force_scale is None and self._int_cache is not None:
            return self._int_cache
        entries = [((i, j, k), q) for i, j, k, q in self.structure_entries()]
        n = self.dim
        result = kernels.to_int_tensor(entries, (n, n, n), force_scale)
        if force_scale is None:
            self._int_cache = result
        return result

    # -- misc --------------------------------------------------------------

    def basis_element(self, i: int) -> Vec:
        return basis_vec(self.dim, i)

    def zero(self) -> Vec:
        return zero_vec(self.dim)

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraPresentation)
            and self.label == other.label
            and self.dim == other.dim
            and self.unit == other.unit
            and self._table == other._table
        )

    def __repr__(self):
        return "AlgebraPresentation(%r, dim=%d)" % (self.label, self.dim)


# ---------------------------------------------------------------------------
# constructors


def build_real() -> AlgebraPresentation:
    return AlgebraPresentation("R", 1, (1,), {(0, 0): [(0, Fraction(1))]})


def build_spin(n: int) -> AlgebraPresentation:
    """Spin factor of dimension n + 1; basis: unit, then n vector units."""
    if n < 1:
        raise ValueError("spin factor needs n >= 1")
    dim = n + 1
    structure: dict[tuple[int, int], list[TableEntry]] = {}
    structure[(0, 0)] = [(0, Fraction(1))]
    for i in range(1, dim):
        structure[(0, i)] = [(i, Fraction(1))]
        structure[(i, i)] = [(0, Fraction(1))]
    unit = (Fraction(1),) + (Fraction(0),) * n
    return AlgebraPresentation("JSpin%d" % n, dim, unit, structure)


def _hermitian_pairs(n: int) -> list[tuple[int, int]]:
    """Positions carrying the unconjugated entry of each off-diagonal basis
    element.  For n = 3 the cyclic convention (2,3), (3,1), (1,2) is used
    (0-based: (1,2), (2,0), (0,1)); otherwise lexicographic (i, j), i < j.
    """
    if n == 3:
        return [(1, 2), (2, 0), (0, 1)]
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _herm_basis_int(n: int, level: int):
    """Basis matrices as n x n grids of integer coordinate tuples.

    None marks a zero entry so the multiplication loop can skip it.
    """
    d = 2**level
    mats = []

    def blank():
        return [[None] * n for _ in range(n)]

    for i in range(n):
        m = blank()
        m[i][i] = (1,) + (0,) * (d - 1)
        mats.append(m)
    for pi, pj in _hermitian_pairs(n):
        for k in range(d):
            m = blank()
            eps = tuple(1 if t == k else 0 for t in range(d))
            m[pi][pj] = eps
            m[pj][pi] = _conj_coords(eps)
            mats.append(m)
    return mats


def _mat_mul_sparse(a, b, n):
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        row = a[i]
        for t in range(n):
            x = row[t]
            if x is None:
                continue
            brow = b[t]
            for j in range(n):
                y = brow[j]
                if y is None:
                    continue
                p = _mul_coords(x, y)
                cur = out[i][j]
                out[i][j] = p if cur is None else tuple(u + v for u, v in zip(cur, p))
    return out


def _entry_sum(x, y, d):
    if x is None and y is None:
        return (0,) * d
    if x is None:
        return y
    if y is None:
        return x
    return tuple(u + v for u, v in zip(x, y))


def build_hermitian(n: int, level: int) -> AlgebraPresentation:
    """Hermitian n x n matrices over the level-th Cayley-Dickson algebra
    under the symmetrized product x y = (xy + yx) / 2.

    Dimension n + n(n-1)/2 * 2**level.  Basis order: diagonal units E_1..E_n,
    then for each off-diagonal position all 2**level coordinate entries.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if not (0 <= level <= 3):
        raise ValueError("Cayley-Dickson level must be 0..3")
    if level == 3 and n > 3:
        raise ValueError(
            "hermitian octonion matrices are only Jordan for n <= 3; n=%d rejected" % n
        )
    d = 2**level
    basis = _herm_basis_int(n, level)
    dim = len(basis)
    pairs = _hermitian_pairs(n)
    structure: dict[tuple[int, int], list[TableEntry]] = {}
    for a in range(dim):
        for b in range(a, dim):
            ab = _mat_mul_sparse(basis[a], basis[b], n)
            ba = _mat_mul_sparse(basis[b], basis[a], n)
            # ab + ba is hermitian with integer coordinates; halve at the end
            doubled: list[int] = []
            for i in range(n):
                e = _entry_sum(ab[i][i], ba[i][i], d)
                assert all(v == 0 for v in e[1:]), "diagonal not real"
                doubled.append(e[0])
            for pi, pj in pairs:
                e = _entry_sum(ab[pi][pj], ba[pi][pj], d)
                assert _entry_sum(ab[pj][pi], ba[pj][pi], d) == _conj_coords(e)
                doubled.extend(e)
            entries = [(k, Fraction(v, 2)) for k, v in enumerate(doubled) if v]
            if entries:
                structure[(a, b)] = entries
    unit = tuple(Fraction(1 if i < n else 0) for i in range(dim))
    return AlgebraPresentation("J%d_%d" % (2**level, n), dim, unit, structure)


def direct_sum(a: AlgebraPresentation, b: AlgebraPresentation, label: Optional[str] = None):
    dim = a.dim + b.dim
    structure: dict[tuple[int, int], list[TableEntry]] = {}
    for (i, j), entries in a._table.items():
        if i <= j:
            structure[(i, j)] = list(entries)
    for (i, j), entries in b._table.items():
        if i <= j:
            structure[(a.dim + i, a.dim + j)] = [(a.dim + k, q) for k, q in entries]
    unit = a.unit + b.unit
    return AlgebraPresentation(label or (a.label + "+" + b.label), dim, unit, structure)


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class JordanVerdict:
    passed: bool
    witness_triple: Optional[tuple[int, int, int]] = None
    witness_operator: Optional[Mat] = None


def jordan_witness_operator(a: AlgebraPresentation, i: int, j: int, k: int) -> Mat:
    """[L(e_i e_j), L_k] + [L(e_k e_i), L_j] + [L(e_j e_k), L_i], exactly."""

    def term(x: int, y: int, z: int) -> Mat:
        u = a.left_op(a.basis_product(x, y))
        return u.commutator(a.left_mult_basis(z))

    return term(i, j, k) + term(k, i, j) + term(j, k, i)


def _jordan_violation_exact(a: AlgebraPresentation) -> Optional[tuple[int, int, int]]:
    n = a.dim
    if n > 40:
        raise RuntimeError(
            "structure constants too large for the fast integer path and the "
            "dimension too large for rational fallback"
        )
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                if not jordan_witness_operator(a, i, j, k).is_zero():
                    return (i, j, k)
    return None


def check_jordan(a: AlgebraPresentation) -> JordanVerdict:
    """Complete check of the linearized Jordan identity over basis triples.

    The identity [L(xy), L_z] + [L(zx), L_y] + [L(yz), L_x] = 0 is linear in
    each argument and fully symmetric, so checking representative triples
    i <= j <= k over the basis decides it for the whole algebra.
    """
    try:
        tensor, _ = a.int_tensor()
        witness = kernels.jordan_violation(tensor)
    except kernels.ExactOverflow:
        witness = _jordan_violation_exact(a)
    if witness is None:
        return JordanVerdict(True)
    op = jordan_witness_operator(a, *witness)
    assert not op.is_zero()
    return JordanVerdict(False, witness, op)


def center_basis(a: AlgebraPresentation) -> list[Vec]:
    """Basis of {z : (x y) z = x (y z) for all x, y}, canonically ordered.

    For a commutative algebra this associative center is found as one
    nullspace: stack the operators L(e_i e_j) - L_i L_j over all ordered
    basis pairs.
    """
    tensor, _ = a.int_tensor()
    n = a.dim
    c = tensor.astype(np.int64)
    li64 = np.ascontiguousarray(c.transpose(0, 2, 1))  # scaled L_i as L[i][r][j]
    cmax = int(np.abs(c).max()) if c.size else 0
    if cmax * cmax * n >= 2**62:
        raise kernels.ExactOverflow("center system entries too large")
    rows = np.zeros((n * n * n, n), dtype=np.int64)
    pos = 0
    for i in range(n):
        for j in range(n):
            lij = np.tensordot(c[i, j], li64, axes=(0, 0))  # scale^2 * L(e_i e_j)
            lilj = li64[i] @ li64[j]  # scale^2 * L_i L_j
            rows[pos : pos + n] = lij - lilj
            pos += n
    basis, _ = nullspace_int(rows)
    return basis


def unit_check(a: AlgebraPresentation) -> bool:
    u = a.unit
    return all(a.mul(u, basis_vec(a.dim, j)) == basis_vec(a.dim, j) for j in range(a.dim))


# ---------------------------------------------------------------------------
# serialization


def algebra_to_dict(a: AlgebraPresentation) -> dict:
    return {
        "label": a.label,
        "dim": a.dim,
        "unit": [format_fraction(x) for x in a.unit],
        "structure": [
            [i, j, k, format_fraction(q)] for i, j, k, q in a.structure_entries()
        ],
    }


def algebra_from_dict(d: dict) -> AlgebraPresentation:
    dim = int(d["dim"])
    structure: dict[tuple[int, int], list[TableEntry]] = {}
    seen = {}
    for i, j, k, q in d["structure"]:
        seen.setdefault((int(i), int(j)), []).append((int(k), parse_fraction(q)))
    for (i, j), entries in seen.items():
        if i <= j:
            structure[(i, j)] = entries
        elif (j, i) not in seen:
            structure[(j, i)] = entries
    # asymmetric data is caught by the constructor through commutativity
    for (i, j), entries in seen.items():
        if i > j and (j, i) in seen:
            if sorted(entries) != sorted(seen[(j, i)]):
                raise ValueError("structure constants are not commutative")
    return AlgebraPresentation(d["label"], dim, [parse_fraction(x) for x in d["unit"]], structure)


def algebra_dumps(a: AlgebraPresentation, pretty: bool = False) -> str:
    return json.dumps(algebra_to_dict(a), indent=2 if pretty else None, sort_keys=True)


def algebra_loads(s: str) -> AlgebraPresentation:
    return algebra_from_dict(json.loads(s))
