"""Modules over the structure-constant algebras.

A module action stores one operator per algebra basis element; the unit must
act as the identity.  Whether the action makes a genuine module is decided
by :func:`check_module` through two independent routes: the split null
extension (J + M with M squaring to zero) must pass the full Jordan check,
and the multilinear operator identity

    [[A_x, A_y], A_z] + A((xz)y - x(zy)) = 0

must hold on basis triples.  The two verdicts are reported side by side.

Constructors: free modules (block copies of left multiplication),
antihermitian matrices over the associative Cayley-Dickson levels acting by
the symmetrized product, and Clifford modules over the spin factors.  Module
homomorphisms are computed exactly as intertwiner nullspaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .algebra import (
    AlgebraPresentation,
    JordanVerdict,
    algebra_from_dict,
    algebra_to_dict,
    center_basis,
    check_jordan,
)
from .cayley_dickson import CD
from .linalg import (
    Mat,
    Vec,
    expand_in_basis,
    format_fraction,
    frac,
    nullspace_int,
    parse_fraction,
)


class ModuleAction:
    """Action of an algebra on an m-dimensional carrier, one Mat per basis."""

    def __init__(self, algebra: AlgebraPresentation, ops: Sequence[Mat], label: str):
        self.algebra = algebra
        self.label = str(label)
        self.ops = tuple(ops)
        if len(self.ops) != algebra.dim:
            raise ValueError("need one operator per algebra basis element")
        self.mdim = self.ops[0].rows if self.ops else 0
        for op in self.ops:
            if op.rows != self.mdim or op.cols != self.mdim:
                raise ValueError("action operators must be square and same size")
        ident = Mat.identity(self.mdim)
        acc = Mat.zeros(self.mdim, self.mdim)
        for u, op in zip(algebra.unit, self.ops):
            if u:
                acc = acc + Mat(tuple(tuple(u * x for x in row) for row in op.data))
        if self.mdim and acc != ident:
            raise ValueError("unit does not act as the identity")

    def op_of(self, x: Sequence) -> Mat:
        acc = [[Fraction(0)] * self.mdim for _ in range(self.mdim)]
        for xi, op in zip(x, self.ops):
            xi = frac(xi)
            if xi:
                for r in range(self.mdim):
                    row = op.data[r]
                    for c in range(self.mdim):
                        if row[c]:
                            acc[r][c] += xi * row[c]
        return Mat.from_rows(acc)

    def act(self, x: Sequence, m: Sequence[Fraction]) -> Vec:
        return self.op_of(x).apply(tuple(frac(v) for v in m))

    def action_entries(self) -> list[tuple[int, int, int, Fraction]]:
        """Nonzero (i, alpha, beta, coeff): e_i f_alpha = sum_beta coeff f_beta."""
        out = []
        for i, op in enumerate(self.ops):
            for beta in range(self.mdim):
                for alpha in range(self.mdim):
                    v = op.data[beta][alpha]
                    if v:
                        out.append((i, alpha, beta, v))
        out.sort(key=lambda e: e[:3])
        return out

    def int_tensors(self):
        """(algebra tensor, action tensor, scale) under one shared scale."""
        _, s_alg = self.algebra.int_tensor()
        act_entries = [((i, b, al), v) for i, al, b, v in self.action_entries()]
        _, s_act = kernels.to_int_tensor(
            act_entries, (self.algebra.dim, self.mdim, self.mdim)
        )
        s = lcm(s_alg, s_act)
        n = self.algebra.dim
        c, _ = kernels.to_int_tensor(
            [((i, j, k), q) for i, j, k, q in self.algebra.structure_entries()],
            (n, n, n),
            force_scale=s,
        )
        a, _ = kernels.to_int_tensor(act_entries, (n, self.mdim, self.mdim), force_scale=s)
        return c, a, s

    def __eq__(self, other):
        return (
            isinstance(other, ModuleAction)
            and self.label == other.label
            and self.algebra == other.algebra
            and self.ops == other.ops
        )

    def __repr__(self):
        return "ModuleAction(%r, mdim=%d over %s)" % (self.label, self.mdim, self.algebra.label)


# ---------------------------------------------------------------------------
# split null extension and the module check


def split_null_extension(mod: ModuleAction) -> AlgebraPresentation:
    """J + M with product (x, m)(x', m') = (xx', x m' + m x') and M M = 0."""
    a = mod.algebra
    n, m = a.dim, mod.mdim
    structure: dict[tuple[int, int], list[tuple[int, Fraction]]] = {}
    for (i, j), entries in a._table.items():
        if i <= j:
            structure[(i, j)] = list(entries)
    for i in range(n):
        op = mod.ops[i]
        for alpha in range(m):
            entries = [
                (n + beta, op.data[beta][alpha]) for beta in range(m) if op.data[beta][alpha]
            ]
            if entries:
                key = (i, n + alpha) if i <= n + alpha else (n + alpha, i)
                structure[key] = entries
    unit = a.unit + (Fraction(0),) * m
    return AlgebraPresentation("snx(%s,%s)" % (a.label, mod.label), n + m, unit, structure)


@dataclass(frozen=True)
class ModuleVerdict:
    passed: bool
    extension_verdict: JordanVerdict
    operator_witness: Optional[tuple[int, int, int]]

    @property
    def oracles_agree(self) -> bool:
        return self.extension_verdict.passed == (self.operator_witness is None)


def check_module(mod: ModuleAction) -> ModuleVerdict:
    """Dual-oracle module check.

    Oracle one: the split null extension passes the full Jordan check.
    Oracle two: the operator identity [[A_i, A_j], A_k] = -A((e_i e_k) e_j -
    e_i (e_k e_j)) holds on all basis triples.  A genuine module passes both.
    """
    snx = split_null_extension(mod)
    ext = check_jordan(snx)
    c, a, _ = mod.int_tensors()
    witness = kernels.module_identity_violation(c, a)
    return ModuleVerdict(ext.passed and witness is None, ext, witness)


# ---------------------------------------------------------------------------
# constructors


def build_free(a: AlgebraPresentation, p: int) -> ModuleAction:
    """p block copies of the algebra acting on itself by left multiplication."""
    if p < 0:
        raise ValueError("rank must be nonnegative")
    n = a.dim
    ops = []
    for i in range(n):
        li = a.left_mult_basis(i)
        rows = [[Fraction(0)] * (n * p) for _ in range(n * p)]
        for t in range(p):
            for r in range(n):
                for c in range(n):
                    if li.data[r][c]:
                        rows[t * n + r][t * n + c] = li.data[r][c]
        ops.append(Mat.from_rows(rows))
    return ModuleAction(a, ops, "free%d(%s)" % (p, a.label))


def _antiherm_basis_cd(n: int, level: int) -> list[list[list[CD]]]:
    """Antihermitian basis: imaginary diagonals first, then off-diag slots."""
    from .algebra import _hermitian_pairs

    d = 2**level
    mats = []

    def blank():
        return [[CD.zero(level) for _ in range(n)] for _ in range(n)]

    for i in range(n):
        for k in range(1, d):
            m = blank()
            m[i][i] = CD.basis(level, k)
            mats.append(m)
    for pi, pj in _hermitian_pairs(n):
        for k in range(d):
            m = blank()
            eps = CD.basis(level, k)
            m[pi][pj] = eps
            m[pj][pi] = -eps.conj()
            mats.append(m)
    return mats


def _antiherm_coords(n: int, level: int, w: list[list[CD]]) -> Vec:
    from .algebra import _hermitian_pairs

    d = 2**level
    coords: list[Fraction] = []
    for i in range(n):
        entry = w[i][i]
        assert entry.coords[0] == 0, "diagonal must stay imaginary"
        coords.extend(entry.coords[k] for k in range(1, d))
    for pi, pj in _hermitian_pairs(n):
        entry = w[pi][pj]
        assert (w[pj][pi] + entry.conj()).is_zero()
        coords.extend(entry.coords[k] for k in range(d))
    return tuple(coords)


def build_antihermitian(n: int, level: int) -> ModuleAction:
    """Antihermitian n x n matrices over associative Cayley-Dickson entries,
    acted on by the hermitian algebra through x a = (xa + ax)/2.

    Carrier dimension n(n-1)/2 * 2**level + n * (2**level - 1).  Octonion
    entries are rejected: the symmetrized action needs associativity.
    """
    from .algebra import _herm_basis_int, build_hermitian

    if not (0 <= level <= 2):
        raise ValueError("antihermitian module needs Cayley-Dickson level 0..2")
    if n < 1:
        raise ValueError("need n >= 1")
    a = build_hermitian(n, level)
    herm = [_int_grid_to_cd(g, n, level) for g in _herm_basis_int(n, level)]
    anti = _antiherm_basis_cd(n, level)
    half = Fraction(1, 2)
    ops = []
    for x in herm:
        cols = []
        for z in anti:
            w = [
                [
                    sum(
                        (x[i][t] * z[t][j] + z[i][t] * x[t][j] for t in range(n)),
                        CD.zero(level),
                    )
                    * half
                    for j in range(n)
                ]
                for i in range(n)
            ]
            cols.append(_antiherm_coords(n, level, w))
        m = len(anti)
        ops.append(Mat.from_rows([[cols[c][r] for c in range(m)] for r in range(m)]))
    return ModuleAction(a, ops, "A%d_%d" % (2**level, n))


def _int_grid_to_cd(grid, n: int, level: int) -> list[list[CD]]:
    zero = CD.zero(level)
    return [
        [zero if grid[i][j] is None else CD.from_coords(level, grid[i][j]) for j in range(n)]
        for i in range(n)
    ]


def _blade_mult_sign(i: int, mask: int, from_left: bool) -> int:
    """Sign of e_i times blade(mask) (or blade times e_i), generators squaring
    to +1; counts the transpositions needed to slot e_i into position."""
    if from_left:
        below = mask & ((1 << i) - 1)
        count = bin(below).count("1")
    else:
        above = mask >> (i + 1)
        count = bin(above).count("1")
    return -1 if count % 2 else 1


def build_clifford(n: int) -> ModuleAction:
    """The 2**n-dimensional Clifford module over the spin factor of rank n.

    Blades are indexed by bitmask; the scalar basis element acts as the
    identity and each vector generator by the symmetrized product with e_i.
    """
    from .algebra import build_spin

    if not (1 <= n <= 8):
        raise ValueError("Clifford module supported for 1 <= n <= 8")
    a = build_spin(n)
    m = 1 << n
    ops = [Mat.identity(m)]
    half = Fraction(1, 2)
    for i in range(n):
        rows = [[Fraction(0)] * m for _ in range(m)]
        for mask in range(m):
            target = mask ^ (1 << i)
            left = _blade_mult_sign(i, mask, True)
            right = _blade_mult_sign(i, mask, False)
            rows[target][mask] += half * (left + right)
        ops.append(Mat.from_rows(rows))
    return ModuleAction(a, ops, "Cl%d" % n)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class ModuleHom:
    source: ModuleAction
    target: ModuleAction
    matrix: Mat  # (target.mdim x source.mdim)

    def __post_init__(self):
        if self.matrix.rows != self.target.mdim or self.matrix.cols != self.source.mdim:
            raise ValueError("hom matrix has wrong shape")

    def intertwining_defect(self) -> Optional[int]:
        """Index of the first algebra basis element where x phi != phi x."""
        for i, (s_op, t_op) in enumerate(zip(self.source.ops, self.target.ops)):
            if t_op @ self.matrix != self.matrix @ s_op:
                return i
        return None


def compose(f: ModuleHom, g: ModuleHom) -> ModuleHom:
    """f after g."""
    if g.target is not f.source and g.target != f.source:
        raise ValueError("middle modules do not match")
    return ModuleHom(g.source, f.target, f.matrix @ g.matrix)


def hom_basis(m1: ModuleAction, m2: ModuleAction) -> list[ModuleHom]:
    """Exact basis of the intertwiner space {phi : phi a = a phi for all a}.

    Unknowns are the entries of the (m2.mdim x m1.mdim) matrix, row-major.
    """
    if m1.algebra != m2.algebra:
        raise ValueError("modules live over different algebras")
    p, q = m1.mdim, m2.mdim
    if p == 0 or q == 0:
        return []
    s = lcm(
        *(
            x.denominator
            for mod in (m1, m2)
            for op in mod.ops
            for row in op.data
            for x in row
        )
    )
    n = m1.algebra.dim
    rows = np.zeros((n * q * p, q * p), dtype=np.int64)
    eye_p = np.eye(p, dtype=np.int64)
    eye_q = np.eye(q, dtype=np.int64)
    for i in range(n):
        a1 = np.array(
            [[int(x * s) for x in row] for row in m1.ops[i].data], dtype=np.int64
        )
        a2 = np.array(
            [[int(x * s) for x in row] for row in m2.ops[i].data], dtype=np.int64
        )
        rows[i * q * p : (i + 1) * q * p] = np.kron(a2, eye_p) - np.kron(eye_q, a1.T)
    basis, _ = nullspace_int(rows)
    out = []
    for v in basis:
        mat = Mat.from_rows([[v[r * p + c] for c in range(p)] for r in range(q)])
        hom = ModuleHom(m1, m2, mat)
        assert hom.intertwining_defect() is None
        out.append(hom)
    return out


def hom_center_restriction(hom: ModuleHom) -> Optional[list[list[Vec]]]:
    """For free modules: the matrix of central elements describing the hom.

    An intertwiner between free ranks p and q decomposes into q x p blocks,
    each of which must be left multiplication by a central element.  Returns
    that grid of center elements or None when the decomposition fails.
    """
    a = hom.source.algebra
    n = a.dim
    p, q = hom.source.mdim // n, hom.target.mdim // n
    if hom.source.mdim != n * p or hom.target.mdim != n * q:
        raise ValueError("hom_center_restriction expects free modules")
    center = center_basis(a)
    out = []
    for u in range(q):
        row = []
        for t in range(p):
            block = Mat(
                tuple(
                    hom.matrix.data[u * n + r][t * n : (t + 1) * n] for r in range(n)
                )
            )
            z = block.apply(a.unit)
            if expand_in_basis(center, z) is None:
                return None
            if a.left_op(z) != block:
                return None
            row.append(z)
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# serialization


def module_to_dict(mod: ModuleAction, inline_algebra: bool = True) -> dict:
    return {
        "label": mod.label,
        "algebra": algebra_to_dict(mod.algebra) if inline_algebra else mod.algebra.label,
        "mdim": mod.mdim,
        "action": [
            [i, alpha, beta, format_fraction(v)]
            for i, alpha, beta, v in mod.action_entries()
        ],
    }


def module_from_dict(
    d: dict, algebra_lookup: Optional[Callable[[str], AlgebraPresentation]] = None
) -> ModuleAction:
    spec = d["algebra"]
    if isinstance(spec, str):
        if algebra_lookup is None:
            raise ValueError("algebra given by label but no lookup provided")
        a = algebra_lookup(spec)
    else:
        a = algebra_from_dict(spec)
    m = int(d["mdim"])
    grids = [[[Fraction(0)] * m for _ in range(m)] for _ in range(a.dim)]
    for i, alpha, beta, v in d["action"]:
        grids[int(i)][int(beta)][int(alpha)] = parse_fraction(v)
    ops = [Mat.from_rows(g) for g in grids]
    return ModuleAction(a, ops, d["label"])


def module_dumps(mod: ModuleAction, pretty: bool = False) -> str:
    return json.dumps(module_to_dict(mod), indent=2 if pretty else None, sort_keys=True)


def module_loads(s: str, algebra_lookup=None) -> ModuleAction:
    return module_from_dict(json.loads(s), algebra_lookup)
