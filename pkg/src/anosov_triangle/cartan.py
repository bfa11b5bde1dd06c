"""Cartan matrices of Coxeter representations and the representations they build.

A Coxeter representation sends s_i to an involution ``e_i (x) gamma_i - 1``
where ``gamma_i`` is the i-th row of a Cartan matrix ``A`` (so
``rho(s_i) v = gamma_i(v) e_i - v``).  Up to diagonal conjugation ``A`` is
determined by its type (q1, q2, q3), through ``a_ij a_ji = c_k^2`` with
``c_k = 2 cos(q_k pi / p_k)``, and by the parameter
``t = -a12 a23 a31 / (c1 c2 c3)``.

Generator labels can be permuted with :meth:`CartanMatrix.permuted`; a
transposition inverts ``t`` while a cyclic shift keeps it.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

import numpy as np

from . import errors
from . import tolerances as _tol

_counter = itertools.count()


@dataclasses.dataclass(frozen=True)
class TriangleSignature:
    """Angles pi/p1, pi/p2, pi/p3 of a hyperbolic triangle.

    ``p_k`` is the order of ``s_i s_j`` for ``{i, j, k} = {1, 2, 3}``.  The
    order p1 <= p2 <= p3 is conventional for user input but not required,
    since relabelled signatures appear internally.
    """

    p1: int
    p2: int
    p3: int

    def __post_init__(self):
        ps = self.ps
        if any(int(p) != p or p < 2 for p in ps):
            raise errors.InvalidSignature(f"orders must be integers >= 2, got {ps}")
        if sum(Fraction(1, p) for p in ps) >= 1:
            raise errors.InvalidSignature(f"{ps} is not hyperbolic (1/p1 + 1/p2 + 1/p3 >= 1)")

    @property
    def ps(self) -> tuple[int, int, int]:
        return (self.p1, self.p2, self.p3)

    @property
    def all_odd(self) -> bool:
        return all(p % 2 == 1 for p in self.ps)

    @property
    def is_sorted(self) -> bool:
        return self.p1 <= self.p2 <= self.p3

    def permuted(self, perm) -> "TriangleSignature":
        return TriangleSignature(*(self.ps[k] for k in perm))

    def __str__(self) -> str:
        return "({},{},{})".format(*self.ps)


@dataclasses.dataclass(frozen=True)
class RepType:
    q: tuple[int, int, int]
    c: tuple[float, float, float]

    @property
    def single_point(self) -> bool:
        return any(ck == 0.0 for ck in self.c)


def rep_type(sig: TriangleSignature, q) -> RepType:
    q = tuple(int(v) for v in q)
    if len(q) != 3:
        raise errors.TypeOutOfRange("type needs three entries")
    cs = []
    for qk, pk in zip(q, sig.ps):
        if qk < 1 or 2 * qk > pk:
            raise errors.TypeOutOfRange(f"q = {qk} outside 1 <= q <= p/2 for p = {pk}")
        cs.append(0.0 if 2 * qk == pk else 2.0 * math.cos(qk * math.pi / pk))
    return RepType(q, tuple(cs))


def hitchin_type(sig: TriangleSignature) -> RepType:
    return rep_type(sig, (1, 1, 1))


def barbot_type(sig: TriangleSignature) -> RepType:
    if not sig.all_odd:
        raise errors.EvenSignature(f"Barbot type needs all orders odd, got {sig.ps}")
    return rep_type(sig, tuple((p - 1) // 2 for p in sig.ps))


@dataclasses.dataclass(frozen=True, eq=False)
class CartanMatrix:
    a: np.ndarray
    sig: TriangleSignature
    type: RepType
    t: float  # NaN when the type is a single point

    @property
    def has_parameter(self) -> bool:
        return not math.isnan(self.t)

    def require_parameter(self) -> float:
        if not self.has_parameter:
            raise errors.UndefinedParameter("type has some q_k = p_k/2; t is undefined")
        return self.t

    def permuted(self, perm) -> "CartanMatrix":
        """Relabel generators: new s_k is old s_{perm[k]} (0-based)."""
        perm = tuple(perm)
        a = self.a[np.ix_(perm, perm)]
        sig = self.sig.permuted(perm)
        typ = RepType(tuple(self.type.q[k] for k in perm), tuple(self.type.c[k] for k in perm))
        t = self.t
        if self.has_parameter and _is_odd(perm):
            t = 1.0 / t
        return CartanMatrix(a, sig, typ, t)

    def __repr__(self) -> str:
        return f"CartanMatrix(sig={self.sig}, q={self.type.q}, t={self.t!r})"


def _is_odd(perm) -> bool:
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
    return inv % 2 == 1


def parameter_of(a, c) -> float:
    c1, c2, c3 = c
    if c1 == 0.0 or c2 == 0.0 or c3 == 0.0:
        return math.nan
    return -a[0, 1] * a[1, 2] * a[2, 0] / (c1 * c2 * c3)


def normal_form(sig: TriangleSignature, typ, t: float | None = 1.0) -> CartanMatrix:
    """The normal-form representative with entries -c3, -c2, -t c1, -c1/t.

    ``typ`` is a :class:`RepType` or a plain (q1, q2, q3) triple.  For a
    single-point type ``t`` is ignored and stored as NaN.
    """
    if not isinstance(typ, RepType):
        typ = rep_type(sig, typ)
    c1, c2, c3 = typ.c
    if typ.single_point:
        a = np.array([[2.0, -c3, -c2], [-c3, 2.0, -c1], [-c2, -c1, 2.0]])
        return CartanMatrix(a, sig, typ, math.nan)
    if t is None or t == 0.0:
        raise errors.ZeroParameter("parameter t must be nonzero")
    t = float(t)
    a = np.array([[2.0, -c3, -c2], [-c3, 2.0, -t * c1], [-c2, -c1 / t, 2.0]])
    return CartanMatrix(a, sig, typ, t)


def from_matrix(a, sig: TriangleSignature) -> CartanMatrix:
    """Read type and parameter off an arbitrary Cartan matrix for ``sig``."""
    a = np.asarray(a, dtype=float)
    if np.max(np.abs(np.diag(a) - 2.0)) > 1e-12:
        raise errors.TypeOutOfRange("diagonal entries must be 2")
    q = []
    pairs = ((1, 2), (2, 0), (0, 1))
    for k, (i, j) in enumerate(pairs):
        if (a[i, j] == 0.0) != (a[j, i] == 0.0):
            raise errors.TypeOutOfRange("a_ij = 0 must imply a_ji = 0")
        prod = a[i, j] * a[j, i]
        pk = sig.ps[k]
        best = min(range(1, pk // 2 + 1),
                   key=lambda qq: abs(prod - 4.0 * math.cos(qq * math.pi / pk) ** 2))
        if abs(prod - 4.0 * math.cos(best * math.pi / pk) ** 2) > 1e-9:
            raise errors.TypeOutOfRange(f"a_ij a_ji = {prod} is not 4cos^2(q pi/{pk})")
        q.append(best)
    typ = rep_type(sig, q)
    return CartanMatrix(a.copy(), sig, typ, parameter_of(a, typ.c))


def normalize(c: CartanMatrix) -> CartanMatrix:
    """Normal form equivalent to ``c`` (same type and parameter)."""
    return normal_form(c.sig, c.type, c.t if c.has_parameter else None)


def dual_representation(c: CartanMatrix) -> CartanMatrix:
    """Cartan matrix of the inverse-transpose representation: the transpose, with t -> 1/t."""
    t = 1.0 / c.t if c.has_parameter else math.nan
    return CartanMatrix(c.a.T.copy(), c.sig, c.type, t)


def swap_p2_p3(c: CartanMatrix) -> CartanMatrix:
    """Interchange the labels of s2 and s3: signature (p1, p3, p2), parameter 1/t."""
    return c.permuted((0, 2, 1))


# ---------------------------------------------------------------------------
# representations


@dataclasses.dataclass(frozen=True, eq=False)
class CoxeterRep:
    """Generator images of a Coxeter representation.

    ``gens[i]`` is the matrix of s_{i+1}.  ``key`` identifies the
    representation in word-evaluation caches.
    """

    gens: tuple
    sig: TriangleSignature
    cartan: CartanMatrix | None = None
    key: int = dataclasses.field(default_factory=lambda: next(_counter))

    @property
    def b(self) -> tuple:
        return tuple(np.eye(3)[i] for i in range(3))

    @property
    def alpha(self) -> tuple:
        return tuple(self.gens[i][i] + np.eye(3)[i] for i in range(3))

    def permuted(self, perm) -> "CoxeterRep":
        """Same matrices with relabelled generators (new s_k = old s_{perm[k]})."""
        perm = tuple(perm)
        cart = self.cartan.permuted(perm) if self.cartan is not None else None
        return CoxeterRep(tuple(self.gens[k] for k in perm), self.sig.permuted(perm), cart)

    def inverse_transpose(self) -> "CoxeterRep":
        """rho^{-T}; for involutions this is the transpose of each generator."""
        cart = dual_representation(self.cartan) if self.cartan is not None else None
        return CoxeterRep(tuple(np.ascontiguousarray(g.T) for g in self.gens), self.sig, cart)

    def relation_residual(self) -> float:
        return relation_residual(self.gens, self.sig)


def relation_residual(gens, sig: TriangleSignature) -> float:
    eye = np.eye(3)
    worst = max(float(np.max(np.abs(g @ g - eye))) for g in gens)
    for k, (i, j) in enumerate(((1, 2), (2, 0), (0, 1))):
        m = np.linalg.matrix_power(gens[i] @ gens[j], sig.ps[k])
        worst = max(worst, float(np.max(np.abs(m - eye))))
    return worst


def involution(alpha, b) -> np.ndarray:
    """The involution b (x) alpha - 1; needs alpha(b) = 2."""
    return np.outer(b, alpha) - np.eye(3)


def build_representation(c: CartanMatrix) -> CoxeterRep:
    """rho_C(s_i) = e_i (x) gamma_i - 1 with gamma_i the i-th row of the Cartan matrix."""
    gens = tuple(involution(c.a[i], np.eye(3)[i]) for i in range(3))
    res = relation_residual(gens, c.sig)
    if res > _tol.TOL.rel:
        raise errors.RelationViolation("Coxeter relations fail", res)
    return CoxeterRep(gens, c.sig, c)


def invariant_form(gens) -> np.ndarray:
    """Symmetric J with g^T J g = J for all generators, or raise FormNotFound.

    Solved as the null space of the stacked linear system on the six
    independent entries of J.
    """
    basis = []
    for i in range(3):
        for j in range(i, 3):
            e = np.zeros((3, 3))
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
    rows = []
    for g in gens:
        cols = [(g.T @ e @ g - e)[np.triu_indices(3)] for e in basis]
        rows.append(np.stack(cols, axis=1))
    system = np.vstack(rows)
    _, s, vt = np.linalg.svd(system)
    if s[-1] > 1e-9 * s[0] or s[-2] < 1e-9 * s[0]:
        raise errors.FormNotFound("invariant form is not unique")
    return sum(v * e for v, e in zip(vt[-1], basis))
