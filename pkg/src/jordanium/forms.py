"""Derivation-based differential forms with exact rational coefficients.

A degree-n form stores one value (an algebra or module coordinate vector)
per strictly increasing n-tuple of derivation-basis indices; evaluation on
arbitrary argument tuples is the antisymmetric multilinear extension.

Products follow the normalized antisymmetrization

    (w ^ f)(X_1, ..., X_{n+l}) = 1/(n+l)! sum_perm sign(perm) w(...) f(...)

which reduces to a shuffle sum weighted by n! l! / (n+l)!.  Under that
normalization the compatible differential carries a degree-dependent factor,

    d|degree n = 1/(n+1) * (Koszul alternating sum),

and the pair satisfies d(w^f) = (dw)^f + (-1)^n w^(df), d^2 = 0, and
graded commutativity w^f = (-1)^{nl} f^w, all as exact identities.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from math import factorial
from typing import Optional, Sequence, Union

from .algebra import center_basis
from .derivations import DerivationBasis, structure_constants
from .linalg import (
    Vec,
    basis_vec,
    format_fraction,
    frac,
    parse_fraction,
    vec_add,
    vec_scale,
    zero_vec,
)
from .modules import ModuleAction

DEGREE_CAP = 3

Key = tuple[int, ...]


def bracket_table(der: DerivationBasis) -> list[list[Vec]]:
    """Structure constants of the frame, computed once per basis object."""
    cached = getattr(der, "_bracket_cache", None)
    if cached is None:
        cached = structure_constants(der)
        # DerivationBasis is frozen; stash through the back door
        object.__setattr__(der, "_bracket_cache", cached)
    return cached


def _sort_sign(indices: Sequence[int]) -> tuple[Key, int]:
    # insertion sort, counting swaps; arities here never exceed DEGREE_CAP
    arr = list(indices)
    sign = 1
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    return tuple(arr), sign


def _merge_sign(k1: Key, k2: Key) -> tuple[Key, int]:
    """Sorted union of two disjoint increasing tuples and the shuffle sign."""
    inv = sum(1 for a in k1 for b in k2 if a > b)
    merged = tuple(sorted(k1 + k2))
    return merged, (-1 if inv % 2 else 1)


def _insert_index(tau: int, rest: Key) -> Optional[tuple[Key, int]]:
    """Sorted insertion of tau into an increasing tuple, or None on collision."""
    if tau in rest:
        return None
    pos = sum(1 for r in rest if r < tau)
    key = rest[:pos] + (tau,) + rest[pos:]
    return key, (-1 if pos % 2 else 1)


def _det(rows: list[Vec]) -> Fraction:
    n = len(rows)
    total = Fraction(0)
    for perm in permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        prod = Fraction(-1 if inv % 2 else 1)
        for r, c in enumerate(perm):
            prod *= rows[r][c]
            if not prod:
                break
        total += prod
    return total


class DerForm:
    """One homogeneous form over a fixed derivation basis.

    module=None means the values live in the base algebra; otherwise they are
    carrier coordinates of the given module action.
    """

    def __init__(
        self,
        der: DerivationBasis,
        degree: int,
        coeffs: Optional[dict] = None,
        module: Optional[ModuleAction] = None,
    ):
        if not 0 <= degree <= DEGREE_CAP:
            raise ValueError("form degree must lie in 0..%d" % DEGREE_CAP)
        self.der = der
        self.degree = int(degree)
        self.module = module
        self.value_dim = module.mdim if module is not None else der.algebra.dim
        store: dict[Key, Vec] = {}
        for key, vec in (coeffs or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != self.degree:
                raise ValueError("coefficient key arity differs from degree")
            if any(not 0 <= k < der.dim for k in key):
                raise ValueError("derivation index out of range")
            if any(key[t] >= key[t + 1] for t in range(len(key) - 1)):
                raise ValueError("coefficient keys must be strictly increasing")
            vec = tuple(frac(v) for v in vec)
            if len(vec) != self.value_dim:
                raise ValueError("coefficient value has the wrong dimension")
            if any(vec):
                store[key] = vec
        self.coeffs = store

    # -- container plumbing ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, DerForm):
            return NotImplemented
        return (
            self.der.mats == other.der.mats
            and self.degree == other.degree
            and self.module == other.module
            and self.coeffs == other.coeffs
        )

    def _combine(self, other: "DerForm", flip: bool) -> "DerForm":
        if not isinstance(other, DerForm):
            raise TypeError("can only combine forms with forms")
        if self.degree != other.degree or self.module != other.module:
            raise ValueError("can only combine forms of equal degree and carrier")
        out = dict(self.coeffs)
        for key, vec in other.coeffs.items():
            add = tuple(-v for v in vec) if flip else vec
            cur = out.get(key)
            out[key] = add if cur is None else vec_add(cur, add)
        return DerForm(self.der, self.degree, out, self.module)

    def __add__(self, other):
        return self._combine(other, False)

    def __sub__(self, other):
        return self._combine(other, True)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "DerForm":
        c = frac(c)
        out = {k: vec_scale(c, v) for k, v in self.coeffs.items()}
        return DerForm(self.der, self.degree, out, self.module)

    def __repr__(self):
        kind = "module" if self.module is not None else "algebra"
        return "DerForm(deg=%d, %s-valued, %d keys)" % (
            self.degree,
            kind,
            len(self.coeffs),
        )

    # -- evaluation --------------------------------------------------------

    def at(self, *indices: int) -> Vec:
        """Value on basis derivations, extended antisymmetrically."""
        if len(indices) != self.degree:
            raise ValueError("expected %d arguments" % self.degree)
        if len(set(indices)) != len(indices):
            return zero_vec(self.value_dim)
        key, sign = _sort_sign(indices)
        vec = self.coeffs.get(key)
        if vec is None:
            return zero_vec(self.value_dim)
        return vec if sign == 1 else tuple(-v for v in vec)

    def eval(self, *args: Union[int, Sequence]) -> Vec:
        """Value on arguments given as basis indices or frame coefficient vectors."""
        if len(args) != self.degree:
            raise ValueError("expected %d arguments" % self.degree)
        if all(isinstance(a, int) for a in args):
            return self.at(*args)
        rows = []
        for a in args:
            if isinstance(a, int):
                rows.append(basis_vec(self.der.dim, a))
            else:
                row = tuple(frac(v) for v in a)
                if len(row) != self.der.dim:
                    raise ValueError("argument has the wrong frame dimension")
                rows.append(row)
        acc = list(zero_vec(self.value_dim))
        for key, vec in self.coeffs.items():
            minor = [tuple(row[k] for k in key) for row in rows]
            c = _det(minor)
            if c:
                for t, v in enumerate(vec):
                    acc[t] += c * v
        return tuple(acc)


# ---------------------------------------------------------------------------
# constructors


def zero_form(der: DerivationBasis, degree: int, module: Optional[ModuleAction] = None) -> DerForm:
    return DerForm(der, degree, {}, module)


def element_form(der: DerivationBasis, x: Sequence) -> DerForm:
    """Degree-0 form wrapping an algebra element."""
    return DerForm(der, 0, {(): tuple(frac(v) for v in x)})


def module_element_form(der: DerivationBasis, module: ModuleAction, m: Sequence) -> DerForm:
    """Degree-0 form wrapping a module carrier element."""
    return DerForm(der, 0, {(): tuple(frac(v) for v in m)}, module)


def unit_form(der: DerivationBasis) -> DerForm:
    return element_form(der, der.algebra.unit)


def coordinate_form(der: DerivationBasis, k: int) -> DerForm:
    """The dual frame 1-form theta^k with theta^k(X_j) = delta_kj * unit."""
    if not 0 <= k < der.dim:
        raise ValueError("derivation index out of range")
    return DerForm(der, 1, {(k,): der.algebra.unit})


# ---------------------------------------------------------------------------
# product and differential


def wedge(w: DerForm, f: DerForm) -> DerForm:
    """Normalized antisymmetrized product; left factor must be algebra-valued."""
    if w.module is not None:
        raise ValueError("left wedge factor must take values in the algebra")
    if w.der is not f.der and w.der.mats != f.der.mats:
        raise ValueError("wedge factors use different derivation bases")
    n, l = w.degree, f.degree
    if n + l > DEGREE_CAP:
        raise ValueError("wedge degree exceeds the cap of %d" % DEGREE_CAP)
    factor = Fraction(factorial(n) * factorial(l), factorial(n + l))
    alg = w.der.algebra
    mod = f.module
    out: dict[Key, Vec] = {}
    for k1, v1 in w.coeffs.items():
        s1 = set(k1)
        for k2, v2 in f.coeffs.items():
            if s1 & set(k2):
                continue
            key, sign = _merge_sign(k1, k2)
            val = alg.mul(v1, v2) if mod is None else mod.act(v1, v2)
            contrib = vec_scale(factor if sign == 1 else -factor, val)
            cur = out.get(key)
            out[key] = contrib if cur is None else vec_add(cur, contrib)
    return DerForm(w.der, n + l, out, mod)


def d_der(w: DerForm) -> DerForm:
    """Differential of an algebra-valued form."""
    if w.module is not None:
        raise ValueError(
            "module-valued forms are differentiated by a connection, not by d_der"
        )
    n = w.degree
    if n + 1 > DEGREE_CAP:
        raise ValueError("differential would exceed the degree cap of %d" % DEGREE_CAP)
    der = w.der
    dim = der.dim
    vd = w.value_dim
    brackets = bracket_table(der)
    scale = Fraction(1, n + 1)
    out: dict[Key, Vec] = {}
    for key in combinations(range(dim), n + 1):
        acc = [Fraction(0)] * vd
        for p, kp in enumerate(key):
            rest = key[:p] + key[p + 1 :]
            val = w.coeffs.get(rest)
            if val is None:
                continue
            term = der.mats[kp].apply(val)
            if p % 2:
                for t, v in enumerate(term):
                    acc[t] -= v
            else:
                for t, v in enumerate(term):
                    acc[t] += v
        for r, s in combinations(range(n + 1), 2):
            rest = tuple(key[t] for t in range(n + 1) if t != r and t != s)
            sgn_rs = -1 if (r + s) % 2 else 1
            for tau, q in enumerate(brackets[key[r]][key[s]]):
                if not q:
                    continue
                ins = _insert_index(tau, rest)
                if ins is None:
                    continue
                kk, isign = ins
                val = w.coeffs.get(kk)
                if val is None:
                    continue
                c = q * sgn_rs * isign
                for t, v in enumerate(val):
                    acc[t] += c * v
        if any(acc):
            out[key] = tuple(v * scale for v in acc)
    return DerForm(der, n + 1, out)


# ---------------------------------------------------------------------------
# graded-structure checks


def leibniz_check(w: DerForm, f: DerForm) -> bool:
    """d(w^f) == (dw)^f + (-1)^n w^(df), as exact forms."""
    if w.module is not None or f.module is not None:
        raise ValueError("the Leibniz check applies to algebra-valued forms")
    if w.degree + f.degree + 1 > DEGREE_CAP:
        raise ValueError("combined degree leaves no room below the cap")
    lhs = d_der(wedge(w, f))
    rhs = wedge(d_der(w), f)
    tail = wedge(w, d_der(f))
    rhs = rhs - tail if w.degree % 2 else rhs + tail
    return lhs == rhs


def graded_commutativity_check(w: DerForm, f: DerForm) -> bool:
    """w^f == (-1)^{nl} f^w for algebra-valued forms."""
    lhs = wedge(w, f)
    rhs = wedge(f, w)
    if (w.degree * f.degree) % 2:
        rhs = -rhs
    return lhs == rhs


def form_associator(w1: DerForm, w2: DerForm, w3: DerForm) -> DerForm:
    """(w1^w2)^w3 - w1^(w2^w3); nonzero in general, the product is not associative."""
    return wedge(wedge(w1, w2), w3) - wedge(w1, wedge(w2, w3))


def z_linearity_defect(w: DerForm) -> Optional[tuple[int, Key]]:
    """First (center index, key) where center-scaling the first slot fails.

    Forms must be linear over the center acting on derivations, which is a
    real condition only when the center is bigger than the span of the unit
    (direct sums).  Returns None when the form passes.
    """
    alg = w.der.algebra
    if w.degree == 0 or w.der.dim == 0:
        return None
    value_op = alg.left_op if w.module is None else w.module.op_of
    cols = []
    for z in center_basis(alg):
        lz = alg.left_op(z)
        # z rescales each frame derivation inside the span; coefficients_of
        # raises if the center fails to stabilize the frame
        zcols = [w.der.coefficients_of(lz @ x) for x in w.der.mats]
        cols.append((z, zcols, value_op(z)))
    for key in combinations(range(w.der.dim), w.degree):
        for zi, (z, zcols, zval) in enumerate(cols):
            expect = zval.apply(w.at(*key))
            acc = list(zero_vec(w.value_dim))
            for nu, c in enumerate(zcols[key[0]]):
                if c:
                    got = w.at(nu, *key[1:])
                    for t, v in enumerate(got):
                        acc[t] += c * v
            if tuple(acc) != expect:
                return zi, key
    return None


# ---------------------------------------------------------------------------
# serialization


def form_to_dict(w: DerForm) -> dict:
    entries = [
        [list(key), [format_fraction(v) for v in vec]]
        for key, vec in sorted(w.coeffs.items())
    ]
    return {"degree": w.degree, "entries": entries}


def form_from_dict(
    der: DerivationBasis, d: dict, module: Optional[ModuleAction] = None
) -> DerForm:
    coeffs = {
        tuple(int(k) for k in key): tuple(parse_fraction(s) for s in vec)
        for key, vec in d["entries"]
    }
    return DerForm(der, int(d["degree"]), coeffs, module)
