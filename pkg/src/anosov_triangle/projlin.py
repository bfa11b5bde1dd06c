"""Projective-plane primitives on top of 3x3 real linear algebra.

Points of RP^2 and lines (covectors) are plain numpy 3-vectors; most functions
normalize them to unit length so that comparisons are scale free.  The module
provides

* ``eig3``: closed-form eigen-decomposition of a 3x3 matrix,
* conics through points and the disk / Moebius-strip side test,
* convex hulls in the affine chart complementary to a line, with signed
  membership margins,
* the cross ratio of four collinear points.

Example
-------
>>> import numpy as np
>>> hull = chart_hull([0, 0, 1], [[0, 0, 1], [1, 0, 1], [0, 1, 1]])
>>> round(hull.area, 12)
0.5
>>> hull.margin([0.25, 0.25, 1.0]) > 0
True
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Iterable, Sequence

import numpy as np

from . import errors
from . import tolerances as _tol


def unit(v) -> np.ndarray:
    """Return ``v / |v|`` as a float array."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("zero or non-finite vector has no projective class")
    return v / n


def proj_distance(x, y) -> float:
    """Angle in [0, pi/2] between the lines spanned by ``x`` and ``y``."""
    x, y = unit(x), unit(y)
    return math.atan2(np.linalg.norm(np.cross(x, y)), abs(float(x @ y)))


def proj_equal(x, y, tol: float | None = None) -> bool:
    tol = _tol.TOL.pt if tol is None else tol
    return abs(1.0 - abs(float(unit(x) @ unit(y)))) < tol


def incidence(point, line) -> float:
    """|<l, x>| for unit representatives."""
    return abs(float(unit(line) @ unit(point)))


def incident(point, line, tol: float | None = None) -> bool:
    tol = _tol.TOL.inc if tol is None else tol
    return incidence(point, line) < tol


def join(x, y) -> np.ndarray:
    """Line through two points."""
    return unit(np.cross(x, y))


def meet(l1, l2) -> np.ndarray:
    """Intersection point of two lines."""
    return unit(np.cross(l1, l2))


def act_point(g, x) -> np.ndarray:
    return unit(np.asarray(g) @ np.asarray(x, dtype=float))


def act_line(g, line) -> np.ndarray:
    """Image of a line under g: the covector l o g^-1."""
    return unit(np.linalg.solve(np.asarray(g, dtype=float).T, np.asarray(line, dtype=float)))


# ---------------------------------------------------------------------------
# eigenvalues


@dataclasses.dataclass(frozen=True)
class Eig3:
    """Eigen-data of a 3x3 real matrix.

    ``values`` are sorted by decreasing modulus.  ``vectors[k]`` is a unit real
    eigenvector for a real ``values[k]`` and ``None`` for a non-real one.  For
    a defective repeated eigenvalue both slots carry the single eigenvector.
    """

    values: tuple
    vectors: tuple
    kind: str  # "distinct-real", "complex", "repeated"
    diagonalizable: bool

    @property
    def real(self) -> bool:
        return self.kind != "complex"

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(np.asarray(self.values))


def depressed_cubic(tr: float, minors: float, det: float) -> tuple[float, float]:
    """(p, q) with lambda = mu + tr/3 turning the characteristic cubic into mu^3 + p mu + q."""
    a2, a1, a0 = -tr, minors, -det
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    return p, q


def cubic_regime(p: float, q: float, tol: float | None = None) -> str:
    """Classify the roots of mu^3 + p mu + q by the sign of its discriminant.

    The discriminant -(4p^3 + 27q^2) is compared against ``tol`` times the
    size of its two terms, so the answer does not depend on the overall scale.
    """
    tol = _tol.TOL.eig if tol is None else tol
    scale = 4.0 * abs(p) ** 3 + 27.0 * q * q
    disc = -(4.0 * p**3 + 27.0 * q * q)
    if scale == 0.0 or abs(disc) <= tol * scale:
        return "repeated"
    return "distinct-real" if disc > 0 else "complex"


def _cubic_roots(p: float, q: float, regime: str) -> list[complex]:
    if regime == "repeated":
        if p == 0.0:
            return [0.0, 0.0, 0.0]
        simple = 3.0 * q / p
        double = -1.5 * q / p
        return [simple, double, double]
    if regime == "distinct-real":
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r) if p != 0 else 0.0
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        return [r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    # one real root; Cardano in the cancellation-free arrangement
    s = math.sqrt(q * q / 4.0 + p**3 / 27.0)
    a = -math.copysign(np.cbrt(abs(q) / 2.0 + s), q)
    b = -p / (3.0 * a) if a != 0.0 else 0.0
    mu = a + b
    im = math.sqrt(max(0.0, 0.75 * mu * mu + p))
    return [mu, complex(-mu / 2.0, im), complex(-mu / 2.0, -im)]


def _polish(lam: float, coeffs: Sequence[float]) -> float:
    # two Newton steps on the characteristic polynomial; kept only if they help
    poly = np.polynomial.Polynomial(coeffs[::-1])
    dpoly = poly.deriv()
    best, best_res = lam, abs(poly(lam))
    x = lam
    for _ in range(2):
        d = dpoly(x)
        if d == 0.0:
            break
        x = x - poly(x) / d
        r = abs(poly(x))
        if r < best_res:
            best, best_res = x, r
    return best


def _null_vectors(n: np.ndarray, count: int) -> list[np.ndarray]:
    _, _, vt = np.linalg.svd(n)
    return [unit(vt[-1 - k]) for k in range(count)]


def eig3(m) -> Eig3:
    """Closed-form eigenvalues and real eigenvectors of a 3x3 matrix.

    The characteristic polynomial is solved by the depressed-cubic method
    (trigonometric form for three real roots, Cardano otherwise); simple real
    roots get two deterministic Newton refinements.  A repeated root is
    declared when the discriminant is within ``TOL.eig`` of zero relative to
    its terms, and its eigenspace dimension comes from a rank test on
    ``m - lambda I`` with tolerance ``TOL.eig * |m|``.

    >>> r = eig3(np.diag([2.0, -1.0, -0.5]))
    >>> [round(v.real, 12) for v in r.values]
    [2.0, -1.0, -0.5]
    """
    m = np.asarray(m, dtype=float)
    tr = float(np.trace(m))
    minors = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
                   + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
                   + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    det = float(np.linalg.det(m))
    p, q = depressed_cubic(tr, minors, det)
    regime = cubic_regime(p, q)
    shift = tr / 3.0
    roots = [r + shift for r in _cubic_roots(p, q, regime)]
    coeffs = (1.0, -tr, minors, -det)
    if regime == "distinct-real":
        roots = [_polish(float(r), coeffs) for r in roots]
    elif regime == "complex":
        r = _polish(float(np.real(roots[0])), coeffs)
        # the pair has sum tr - r and product det / r
        half = 0.5 * (tr - r)
        prod = det / r if r != 0.0 else abs(roots[1]) ** 2
        im = math.sqrt(max(0.0, prod - half * half))
        roots = [r, complex(half, im), complex(half, -im)]

    norm = float(np.linalg.norm(m))
    tol = _tol.TOL.eig * max(norm, 1e-300)
    eye = np.eye(3)
    if regime == "repeated":
        simple, double = float(np.real(roots[0])), float(np.real(roots[1]))
        if abs(simple - double) <= tol:
            # triple root
            lam = (simple + 2.0 * double) / 3.0
            n = m - lam * eye
            rank = int(np.sum(np.linalg.svd(n, compute_uv=False) > tol))
            vecs = _null_vectors(n, max(1, 3 - rank))
            return Eig3((lam, lam, lam), tuple(vecs[k % len(vecs)] for k in range(3)),
                        "repeated", rank == 0)
        n = m - double * eye
        rank = int(np.sum(np.linalg.svd(n, compute_uv=False) > tol))
        diagonalizable = rank <= 1
        dvecs = _null_vectors(n, 2 if diagonalizable else 1)
        svec = _null_vectors(m - simple * eye, 1)[0]
        if abs(simple) >= abs(double):
            values, vectors = (simple, double, double), (svec, dvecs[0], dvecs[-1])
        else:
            values, vectors = (double, double, simple), (dvecs[0], dvecs[-1], svec)
        return Eig3(values, vectors, "repeated", diagonalizable)

    pairs = []
    for r in roots:
        if isinstance(r, complex) and r.imag != 0.0:
            pairs.append((r, None))
        else:
            lam = float(np.real(r))
            pairs.append((lam, _null_vectors(m - lam * eye, 1)[0]))
    pairs.sort(key=lambda pr: (-abs(pr[0]), -np.real(pr[0]), -np.imag(pr[0])))
    return Eig3(tuple(pr[0] for pr in pairs), tuple(pr[1] for pr in pairs), regime, True)


def attracting_point(m) -> np.ndarray:
    """Eigenvector of the eigenvalue of largest modulus.

    A defective double top eigenvalue still has a unique (attracting) fixed
    point; a complex top pair or a diagonalizable tie does not.
    """
    e = eig3(m)
    top_tie = abs(abs(e.values[0]) - abs(e.values[1])) <= _tol.TOL.eig * abs(e.values[0])
    if e.vectors[0] is None or (top_tie and e.diagonalizable):
        raise errors.ComplexCoxeter("no real attracting eigenvector")
    return e.vectors[0]


def attracting_line(m) -> np.ndarray:
    """Covector of the attracting fixed line: left eigenvector of the smallest eigenvalue."""
    e = eig3(np.asarray(m, dtype=float).T)
    if e.vectors[2] is None:
        raise errors.ComplexCoxeter("no real attracting line")
    return e.vectors[2]


# ---------------------------------------------------------------------------
# conics


class Side(enum.Enum):
    INSIDE_DISK = "InsideDisk"
    ON_CONIC = "OnConic"
    MOBIUS_STRIP = "MobiusStrip"


@dataclasses.dataclass(frozen=True)
class Conic:
    """Symmetric form of signature (2, 1), scaled so its positive eigenvalues multiply to 1."""

    form: np.ndarray
    residual: float = 0.0

    def __call__(self, x) -> float:
        x = unit(x)
        return float(x @ self.form @ x)

    def values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        xs = xs / np.linalg.norm(xs, axis=-1, keepdims=True)
        return np.einsum("...i,ij,...j->...", xs, self.form, xs)

    def frame(self) -> np.ndarray:
        """Matrix F with F^T diag(1, 1, -1) F = form."""
        vals, vecs = np.linalg.eigh(self.form)
        order = np.argsort(-vals)  # two positive first, negative last
        vals, vecs = vals[order], vecs[:, order]
        return (np.sqrt(np.abs(vals))[:, None] * vecs.T)

    def angle(self, x) -> float:
        """Position of a point on (or near) the conic as an angle in [0, 2 pi)."""
        y = self.frame() @ np.asarray(x, dtype=float)
        s = 1.0 if y[2] >= 0 else -1.0
        return math.atan2(s * y[1], s * y[0]) % (2.0 * math.pi)

    def transformed(self, g) -> "Conic":
        """The conic g(C), whose form is g^-T Q g^-1."""
        gi = np.linalg.inv(np.asarray(g, dtype=float))
        return normalize_form(gi.T @ self.form @ gi)


def normalize_form(q) -> Conic:
    q = np.asarray(q, dtype=float)
    q = 0.5 * (q + q.T)
    vals = np.linalg.eigvalsh(q)
    scale = np.max(np.abs(vals))
    if scale == 0.0 or np.min(np.abs(vals)) < _tol.TOL.conic * scale:
        raise errors.DegenerateConic("form has rank < 3")
    npos = int(np.sum(vals > 0))
    if npos in (0, 3):
        raise errors.DegenerateConic("form is definite")
    if npos == 1:
        q, vals = -q, -vals[::-1]
    pos = vals[vals > 0]
    return Conic(q / math.sqrt(pos[0] * pos[1]))


def conic_through(points: Iterable) -> Conic:
    """Conic through five (or, by least squares, more) points.

    Raises :class:`DegenerateConic` when the points do not determine a
    non-degenerate real conic: too few points, four on a line (non-unique
    fit), a line pair, or a definite form.
    """
    pts = np.array([unit(p) for p in points])
    if len(pts) < 5:
        raise errors.DegenerateConic("need at least five points")
    x, y, z = pts.T
    design = np.stack([x * x, y * y, z * z, 2 * x * y, 2 * x * z, 2 * y * z], axis=1)
    _, s, vt = np.linalg.svd(design)
    if len(s) >= 5 and s[4] < _tol.TOL.conic * s[0]:
        raise errors.DegenerateConic("points do not determine a unique conic")
    a, b, c, d, e, f = vt[-1]
    conic = normalize_form(np.array([[a, d, e], [d, b, f], [e, f, c]]))
    residual = float(np.max(np.abs(conic.values(pts))))
    return dataclasses.replace(conic, residual=residual)


def mobius_side(c: Conic, x) -> Side:
    v = c(x)
    eps = _tol.TOL.side
    if v > eps:
        return Side.MOBIUS_STRIP
    if v < -eps:
        return Side.INSIDE_DISK
    return Side.ON_CONIC


def second_intersection(c: Conic, line, w) -> np.ndarray:
    """The point of ``line`` on the conic other than ``w`` (which lies on both).

    The line is parametrized as alpha*w + beta*d; the binary quadratic form in
    (alpha, beta) is factored and the root farther from w is returned.
    """
    w = unit(w)
    d = np.cross(line, w)
    d = unit(d)
    qa = float(w @ c.form @ w)
    qb = float(w @ c.form @ d)
    qc = float(d @ c.form @ d)
    disc = qb * qb - qa * qc
    if disc <= _tol.TOL.conic * max(qb * qb, abs(qa * qc), 1e-300):
        raise errors.DegenerateConic("line is tangent to the conic")
    r = math.sqrt(disc)
    # roots beta/alpha of qc s^2 + 2 qb s + qa = 0; pick the one far from s = 0
    cand = [(-qb + r) / qc, (-qb - r) / qc] if qc != 0.0 else [math.inf]
    s = max(cand, key=abs)
    if not np.isfinite(s):
        return d
    return unit(w + s * d)


# ---------------------------------------------------------------------------
# affine charts and convex hulls


def chart_rotation(line) -> np.ndarray:
    """Rotation R with R @ unit(line) = e3, so the chart coordinate is (Rx)[:2] / (Rx)[2]."""
    l = unit(line)
    e3 = np.array([0.0, 0.0, 1.0])
    v = np.cross(l, e3)
    s = float(np.linalg.norm(v))
    c = float(l @ e3)
    if s < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    k = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + k + k @ k * ((1.0 - c) / (s * s))


def to_chart(rot: np.ndarray, xs) -> np.ndarray:
    """Affine chart coordinates of one point (shape (3,)) or many (shape (N, 3))."""
    y = np.asarray(xs, dtype=float) @ rot.T
    return y[..., :2] / y[..., 2:3]


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(pts: np.ndarray) -> list[int]:
    """Indices of the counterclockwise convex hull (monotone chain, lexicographic ties)."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    if len(order) <= 2:
        return order
    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and _cross2(pts[lower[-2]], pts[lower[-1]], pts[i]) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and _cross2(pts[upper[-2]], pts[upper[-1]], pts[i]) <= 0:
            upper.pop()
        upper.append(i)
    hull = lower[:-1] + upper[:-1]
    return hull if hull else order[:1]


def _segment_distance(p, a, b) -> np.ndarray:
    ab = b - a
    L = float(ab @ ab)
    if L == 0.0:
        return np.linalg.norm(p - a, axis=-1)
    s = np.clip(((p - a) @ ab) / L, 0.0, 1.0)
    return np.linalg.norm(p - (a + s[..., None] * ab), axis=-1)


@dataclasses.dataclass(frozen=True)
class ChartHull:
    """Convex hull of projective points in the chart missing ``chart_line``."""

    chart_line: np.ndarray
    rotation: np.ndarray
    vertices: tuple  # unit representatives in hull order (counterclockwise)
    coords: np.ndarray  # (K, 2) chart coordinates of the hull vertices

    @property
    def degenerate(self) -> bool:
        return len(self.coords) < 3 or self.area <= 1e-300

    @property
    def area(self) -> float:
        c = self.coords
        if len(c) < 3:
            return 0.0
        x, y = c[:, 0], c[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def diameter(self) -> float:
        c = self.coords
        return float(np.max(np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1)))

    def chart_coords(self, xs) -> np.ndarray:
        return to_chart(self.rotation, xs)

    def margins_2d(self, pts) -> np.ndarray:
        """Signed distance of chart points to the hull boundary (positive inside)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c = self.coords
        if self.degenerate:
            if len(c) == 1:
                return -np.linalg.norm(pts - c[0], axis=-1)
            a, b = c[0], c[-1]
            return -_segment_distance(pts, a, b)
        a = c
        b = np.roll(c, -1, axis=0)
        e = b - a
        lens = np.linalg.norm(e, axis=1)
        cross = e[None, :, 0] * (pts[:, None, 1] - a[None, :, 1]) - e[None, :, 1] * (pts[:, None, 0] - a[None, :, 0])
        return np.min(cross / lens[None, :], axis=1)

    def margins(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return self.margins_2d(self.chart_coords(xs))

    def margin(self, x) -> float:
        return float(self.margins(np.asarray(x, dtype=float)[None, :])[0])

    def contains(self, x, strict: bool = False) -> bool:
        m = self.margin(x)
        return m > 0 if strict else m >= -_tol.TOL.inc


def chart_hull(chart, pts) -> ChartHull:
    """Convex hull CH_l{pts} in the affine chart complementary to the line ``chart``."""
    line = unit(chart)
    reps = [unit(p) for p in pts]
    for p in reps:
        if abs(float(line @ p)) < _tol.TOL.inc:
            raise errors.PointOnChartLine("point lies on the chart line")
    rot = chart_rotation(line)
    coords = to_chart(rot, np.array(reps))
    idx = convex_hull_2d(coords)
    verts = tuple(reps[i] * math.copysign(1.0, float(line @ reps[i])) for i in idx)
    return ChartHull(line, rot, verts, coords[idx])


# ---------------------------------------------------------------------------
# cross ratio


def cross_ratio(a, x, y, b) -> float:
    """[a:x:y:b] = |y-a||b-x| / (|x-a||b-y|) for four collinear points.

    Evaluated through 2x2 determinants of coordinates on the common line,
    which equals the affine formula in any chart where the four points are
    finite.

    >>> cross_ratio([0, 0, 1], [1, 0, 1], [2, 0, 1], [3, 0, 1])
    4.0
    """
    pts = np.array([unit(v) for v in (a, x, y, b)])
    _, s, vt = np.linalg.svd(pts)
    if s[2] > _tol.TOL.inc * max(s[0], 1.0):
        raise errors.NotCollinear("points are not collinear")
    coords = pts @ vt[:2].T
    pa, px, py, pb = coords

    def det(u, v):
        return u[0] * v[1] - u[1] * v[0]

    d_xa, d_by = det(px, pa), det(pb, py)
    if abs(d_xa) < _tol.TOL.pt or abs(d_by) < _tol.TOL.pt:
        raise errors.CoincidentPoints("a = x or b = y")
    return abs(det(py, pa) * det(pb, px) / (d_xa * d_by))
