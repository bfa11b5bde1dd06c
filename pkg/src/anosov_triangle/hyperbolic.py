"""The reference hyperbolic structure of a triangle group.

The discrete faithful representation is the type (1,1,1), t = 1 Coxeter
representation, which preserves a form J of signature (2,1).  The boundary
circle is the projectivized null cone of J, and circle points are angles in
a fixed J-orthonormal frame.  The frame is rotated so that z_0 sits at angle
0, and oriented so that z_0, z_1, z_2, ... have increasing angles.

Frames: frame 0 uses the generators (s1, s2, s3), frame 1 ("primed") uses
(s2, s3, s1) and frame 2 ("double-primed") uses (s3, s1, s2).  In frame f the
points z^f_i, the interval I_f = [z^f_3, z^f_0] and the alphabet Q_f are
defined by the same recipe in the relabelled generators.  Since
I_0, I_1 = [z_2, z_3] and I_2 = [z_0, z_2] cover the circle, codes start in
the frame whose interval contains the point.
"""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np

from . import cartan, errors, group
from . import projlin as pl
from . import tolerances as _tol

TWO_PI = 2.0 * math.pi
NEXT_FRAME = {0: 2, 2: 1, 1: 0}
FRAME_NAMES = {0: "unprimed", 1: "primed", 2: "double-primed"}


def frame_letters(frame: int) -> str:
    """The generators (g1, g2, g3) of a frame as letters."""
    return group.cyclic_shift("abc", frame)


def wrap(theta: float) -> float:
    r = theta % TWO_PI
    return 0.0 if TWO_PI - r < 1e-13 else r


@dataclasses.dataclass(frozen=True, eq=False)
class FuchsianRep:
    """Reflection representation preserving J, with a fixed circle chart.

    ``chart`` maps a vector v to coordinates where J becomes diag(1, 1, -1);
    the angle of a null vector is atan2 of its first two chart coordinates.
    """

    gens: tuple
    sig: cartan.TriangleSignature
    form: np.ndarray
    chart: np.ndarray
    key: int
    perm: tuple = (0, 1, 2)

    def permuted(self, perm) -> "FuchsianRep":
        """Relabel generators but keep the circle chart, so angles are unchanged."""
        perm = tuple(perm)
        total = tuple(self.perm[k] for k in perm)
        return FuchsianRep(tuple(self.gens[k] for k in perm), self.sig.permuted(perm),
                           self.form, self.chart, next(cartan._counter), total)

    @property
    def origin(self) -> np.ndarray:
        """Basepoint o: the timelike direction of the chart, on the future sheet."""
        o = np.linalg.solve(self.chart, np.array([0.0, 0.0, 1.0]))
        return o / math.sqrt(-float(o @ self.form @ o))

    def null_vector(self, theta: float) -> np.ndarray:
        return np.linalg.solve(self.chart, np.array([math.cos(theta), math.sin(theta), 1.0]))

    def angle(self, v) -> float:
        u = self.chart @ np.asarray(v, dtype=float)
        if u[2] < 0:
            u = -u
        return wrap(math.atan2(u[1], u[0]))

    def act(self, m, theta: float) -> float:
        return self.angle(m @ self.null_vector(theta))

    def act_word(self, w: str, theta: float) -> float:
        return self.act(group.evaluate(w, self), theta)


def fuchsian(sig: cartan.TriangleSignature) -> FuchsianRep:
    """The type (1,1,1), t = 1 representation with its invariant form and circle chart.

    J is solved from the linear system g^T J g = J and scaled so that its
    positive eigenvalues have product 1.  The chart comes from the
    extended-precision construction, so double and extended computations
    share one circle coordinate.
    """
    rep = cartan.build_representation(cartan.normal_form(sig, (1, 1, 1), 1.0))
    j = cartan.invariant_form(rep.gens)
    vals = np.linalg.eigvalsh(j)
    if np.sum(vals > 0) == 1:
        j, vals = -j, -vals
    vals = np.sort(vals)
    if not (vals[0] < 0 < vals[1]):
        raise errors.FormNotFound(f"invariant form has eigenvalues {vals}")
    j = j / math.sqrt(vals[1] * vals[2])
    circ = _ExactCircle(sig, (0, 1, 2), 40)
    chart = np.array([[float(v) for v in row] for row in circ.chart])
    d = np.diag([1.0, 1.0, -1.0])
    if np.max(np.abs(chart.T @ d @ chart - j)) > 1e-9:
        raise errors.FormNotFound("solved form disagrees with the closed-form chart")
    return FuchsianRep(rep.gens, sig, j, chart, rep.key)


def boundary_fixed_points(rep: FuchsianRep, w: str) -> tuple[float, float]:
    """(attracting, repelling) boundary angles of a hyperbolic element."""
    e = pl.eig3(group.evaluate(w, rep))
    mods = np.abs(e.values)
    if e.kind != "distinct-real" or mods[0] <= mods[1] * (1 + 1e-9) or mods[1] <= mods[2] * (1 + 1e-9):
        raise errors.NotHyperbolic(f"word {w!r} has no boundary fixed points")
    return rep.angle(e.vectors[0]), rep.angle(e.vectors[2])


def frame_order(sig: cartan.TriangleSignature, frame: int) -> int:
    g = frame_letters(frame)
    return group.order(sig, g[0], g[1])


def z_points(rep: FuchsianRep, frame: int = 0) -> np.ndarray:
    """Angles of z^f_0 ... z^f_{2m-1} with m the order of g1 g2 in the frame.

    z_0 is the attracting fixed point of g1 g2 g3, z_{2k} = (g2 g1)^k z_0 and
    z_{3+2k} = (g2 g1)^k g1 z_0 (indices mod 2m).
    """
    g = frame_letters(frame)
    m = frame_order(rep.sig, frame)
    z = np.empty(2 * m)
    z0, _ = boundary_fixed_points(rep, g)
    rot = g[1] + g[0]
    for k in range(m):
        z[(2 * k) % (2 * m)] = rep.act_word(rot * k, z0)
        z[(3 + 2 * k) % (2 * m)] = rep.act_word(rot * k + g[0], z0)
    return z


@dataclasses.dataclass(frozen=True)
class Interval:
    """Closed counterclockwise arc from ``start`` to ``end`` (angles)."""

    start: float
    end: float

    @property
    def length(self) -> float:
        return wrap(self.end - self.start)

    def offset(self, theta: float) -> float:
        d = wrap(theta - self.start)
        if d > TWO_PI - 1e-9:
            d -= TWO_PI
        return d

    def margin(self, theta: float) -> float:
        """Angular distance inside the arc to the nearest endpoint (negative outside)."""
        d = self.offset(theta)
        if d < 0:
            return d
        if d > self.length:
            return min(self.length - d, TWO_PI - d)
        return min(d, self.length - d)

    def contains(self, theta: float, tol: float | None = None) -> bool:
        tol = _tol.TOL.angle if tol is None else tol
        return self.margin(theta) >= -tol

    def contains_interval(self, other: "Interval", tol: float | None = None) -> bool:
        tol = _tol.TOL.angle if tol is None else tol
        return (self.contains(other.start, tol) and self.contains(other.end, tol)
                and self.offset(other.start) <= self.offset(other.end) + tol)

    def image(self, rep: FuchsianRep, w: str) -> "Interval":
        """g I as an interval (odd words reverse orientation)."""
        a, b = rep.act_word(w, self.start), rep.act_word(w, self.end)
        return Interval(a, b) if len(w) % 2 == 0 else Interval(b, a)


@dataclasses.dataclass(frozen=True)
class Intervals:
    I: Interval
    I1: Interval
    I2: Interval
    K: Interval
    K1: Interval
    K2: Interval
    J: Interval
    J1: Interval
    J2: Interval

    def of_frame(self, frame: int) -> Interval:
        return (self.I, self.I1, self.I2)[frame]


def intervals(rep: FuchsianRep) -> Intervals:
    """I = [z3, z0], K = [z1, z2], J = [(g2 g3 g1)_-, (g1 g2 g3)_-] in each frame."""
    out = []
    for f in range(3):
        g = frame_letters(f)
        z = z_points(rep, f)
        i = Interval(z[3], z[0])
        k = Interval(z[1], z[2])
        _, rep_a = boundary_fixed_points(rep, g[1] + g[2] + g[0])
        _, rep_b = boundary_fixed_points(rep, g)
        out.append((i, k, Interval(rep_a, rep_b)))
    (i0, k0, j0), (i1, k1, j1), (i2, k2, j2) = out
    return Intervals(i0, i1, i2, k0, k1, k2, j0, j1, j2)


def subdivision(rep: FuchsianRep, frame: int) -> list[tuple[str, Interval]]:
    """Pairs (gamma, gamma I_next) for gamma in the frame's alphabet Q_f.

    With I_next = [z_0, z_2] (the interval of the next frame in the cycle),
    (g1 g2)^j I_next = [z_{-2j}, z_{2-2j}] and g1 (g1 g2)^j I_next = [z_{1+2j}, z_{3+2j}].
    """
    g = frame_letters(frame)
    m = frame_order(rep.sig, frame)
    z = z_points(rep, frame)
    n = 2 * m
    out = []
    for j in range(1, (m - 1) // 2 + 1):
        out.append((group.reduce(g[0] + (g[0] + g[1]) * j, rep.sig),
                    Interval(z[(1 + 2 * j) % n], z[(3 + 2 * j) % n])))
        out.append((group.reduce((g[0] + g[1]) * j, rep.sig),
                    Interval(z[(-2 * j) % n], z[(2 - 2 * j) % n])))
    return out


@dataclasses.dataclass(frozen=True)
class Code:
    """A code of a circle point.

    ``letters[n]`` is chosen in ``frames[n]``; after the n-th letter the
    point g_n^{-1} x lies in the interval of frame ``frames[n+1]``
    (``final_frame`` after the last letter).
    """

    x: float
    start_frame: int
    letters: tuple
    frames: tuple
    final_frame: int
    margins: tuple

    @property
    def depth(self) -> int:
        return len(self.letters)

    def word(self, n: int | None = None) -> str:
        return "".join(self.letters[:n])

    def frame_after(self, n: int) -> int:
        return self.start_frame if n == 0 else NEXT_FRAME[self.frames[n - 1]]


class _ExactCircle:
    """The Fuchsian generators, circle chart and z-points in extended precision.

    Built from the closed-form Cartan matrix (whose symmetric form is the
    invariant form J), with the same rotation and orientation normalization
    as :func:`fuchsian`.  Codes at depth n need roughly n digits beyond double
    precision because each letter expands the circle near the point.
    """

    def __init__(self, sig: cartan.TriangleSignature, perm, dps: int):
        import mpmath

        self.mp = mpmath
        self.dps = dps
        with mpmath.workdps(dps):
            p1, p2, p3 = sig.ps
            c = [2 * mpmath.cos(mpmath.pi / p) for p in (p1, p2, p3)]
            a = [[mpmath.mpf(2), -c[2], -c[1]], [-c[2], mpmath.mpf(2), -c[0]],
                 [-c[1], -c[0], mpmath.mpf(2)]]
            base = []
            for i in range(3):
                g = [[(a[i][k] if r == i else 0) - (1 if r == k else 0) for k in range(3)]
                     for r in range(3)]
                base.append(g)
            self.base_gens = base
            self.gens = [base[k] for k in perm]
            evals, evecs = mpmath.eigsy(mpmath.matrix(a))
            idx = sorted(range(3), key=lambda k: -evals[k])
            scale = mpmath.sqrt(evals[idx[0]] * evals[idx[1]])
            chart = [[mpmath.sqrt(abs(evals[k]) / scale) * evecs[r, k] for r in range(3)]
                     for k in idx]
            self.chart = chart
            z0 = self._angle_raw(self._attracting(self._word(base, "abc")))
            z2 = self._angle_raw(self._apply(self._word(base, "ba"), self._null_raw(z0)))
            cz, sz = mpmath.cos(z0), mpmath.sin(z0)
            rot = [[cz, sz, 0], [-sz, cz, 0], [0, 0, 1]]
            flip = (z2 - z0) % (2 * mpmath.pi) > mpmath.pi
            if flip != cartan._is_odd(perm):  # odd relabellings see the circle reversed
                rot[1] = [-v for v in rot[1]]
            self.chart = self._mul(rot, chart)
            self.chart_inv = [list(row) for row in (mpmath.matrix(self.chart) ** -1).tolist()]
            self.two_pi = 2 * mpmath.pi

    # small dense helpers on nested lists (faster than mpmath.matrix)
    @staticmethod
    def _mul(x, y):
        return [[sum(x[i][k] * y[k][j] for k in range(3)) for j in range(3)] for i in range(3)]

    @staticmethod
    def _apply(m, v):
        return [m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
                m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
                m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]]

    def _word(self, gens, w):
        m = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
        for ch in w:
            m = self._mul(m, gens[group.letter_index(ch)])
        return m

    def _attracting(self, m):
        mp = self.mp
        e, er = mp.eig(mp.matrix(m))
        k = max(range(3), key=lambda i: abs(e[i]))
        return [mp.re(er[r, k]) for r in range(3)]

    def _angle_raw(self, v, chart=None):
        u = self._apply(chart or self.chart, v)
        if u[2] < 0:
            u = [-x for x in u]
        return self.mp.atan2(u[1], u[0]) % (2 * self.mp.pi)

    def _null_raw(self, theta, chart_inv=None):
        mp = self.mp
        if chart_inv is None:
            chart_inv = [list(r) for r in (mp.matrix(self.chart) ** -1).tolist()]
        return self._apply(chart_inv, [mp.cos(theta), mp.sin(theta), mp.mpf(1)])

    def angle(self, v):
        return self._angle_raw(v)

    def null_vector(self, theta):
        return self._null_raw(theta, self.chart_inv)

    def word(self, w):
        return self._word(self.gens, w)

    def act(self, w, theta):
        return self.angle(self._apply(self.word(w), self.null_vector(theta)))

    def z_points(self, sig, frame):
        g = frame_letters(frame)
        m = group.order(sig, g[0], g[1])
        z0 = self.angle(self._attracting(self.word(g)))
        rot = g[1] + g[0]
        z = [None] * (2 * m)
        for k in range(m):
            z[(2 * k) % (2 * m)] = self.act(rot * k, z0)
            z[(3 + 2 * k) % (2 * m)] = self.act(rot * k + g[0], z0)
        return z


class _ExactInterval:
    def __init__(self, start, end, two_pi):
        self.start, self.end, self.two_pi = start, end, two_pi
        self.length = (end - start) % two_pi

    def margin(self, theta):
        d = (theta - self.start) % self.two_pi
        if d > self.length:
            return max(self.length - d, d - self.two_pi)
        return min(d, self.length - d)


@functools.lru_cache(maxsize=64)
def _exact_tables(sig: cartan.TriangleSignature, perm: tuple, dps: int):
    base_sig = sig.permuted(_inverse_perm(perm))
    circ = _ExactCircle(base_sig, perm, dps)
    with circ.mp.workdps(dps):
        tables, starts = {}, {}
        for f in range(3):
            g = frame_letters(f)
            m = frame_order(sig, f)
            z = circ.z_points(sig, f)
            n = 2 * m
            starts[f] = _ExactInterval(z[3], z[0], circ.two_pi)
            rows = []
            for j in range(1, (m - 1) // 2 + 1):
                for w, (lo, hi) in (
                        (g[0] + (g[0] + g[1]) * j, ((1 + 2 * j) % n, (3 + 2 * j) % n)),
                        ((g[0] + g[1]) * j, ((-2 * j) % n, (2 - 2 * j) % n))):
                    w = group.reduce(w, sig)
                    rows.append((w, _ExactInterval(z[lo], z[hi], circ.two_pi),
                                 circ.word(group.inverse(w))))
            tables[f] = rows
    return circ, tables, starts


def _inverse_perm(perm) -> tuple:
    inv = [0, 0, 0]
    for k, p in enumerate(perm):
        inv[p] = k
    return tuple(inv)


_MIRROR = np.diag([1.0, -1.0, 1.0])


class Coder:
    """Code generation for circle points of one Fuchsian representation.

    The choice at each step is the subinterval gamma I_next of the current
    frame's interval that contains y = g_n^{-1} x most deeply; when two are
    equally deep (y a shared endpoint) the one starting at y wins, which is
    the clockwise-endpoint convention.  The margins of y in its chosen
    subinterval are recorded, so validity can be checked afterwards.
    """

    def __init__(self, rep: FuchsianRep):
        if not rep.sig.all_odd:
            raise errors.EvenSignature("codes need all orders odd")
        self.rep = rep
        # an odd relabelling reverses the cyclic order of the frames, so codes
        # are computed on the mirrored circle and x is mirrored on the way in
        self.flip = cartan._is_odd(rep.perm)
        circle = dataclasses.replace(rep, chart=_MIRROR @ rep.chart) if self.flip else rep
        self.ints = intervals(circle)

    def start_frame(self, x: float) -> int:
        margins = [self.ints.of_frame(f).margin(x) for f in range(3)]
        best = max(margins)
        for f in (0, 2, 1):
            if margins[f] >= best - _tol.TOL.angle:
                return f
        return 0  # unreachable

    def frame_of(self, x: float) -> int:
        """Start frame of the caller's angle x."""
        x = wrap(x)
        return self.start_frame(wrap(-x) if self.flip else x)

    def code(self, x: float, depth: int) -> Code:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        x = wrap(x)
        xw = wrap(-x) if self.flip else x
        dps = 30 + 2 * depth
        circ, tables, _ = _exact_tables(self.rep.sig, self.rep.perm, dps)
        mp = circ.mp
        frame = self.start_frame(xw)
        start = frame
        letters, frames, margins = [], [], []
        with mp.workdps(dps):
            tie = mp.mpf(10) ** (-(dps // 2))
            v = circ.null_vector(mp.mpf(xw))
            for _ in range(depth):
                y = circ.angle(v)
                best, best_m = 0, None
                for k, (_, iv, _) in enumerate(tables[frame]):
                    m = iv.margin(y)
                    if best_m is None or m > best_m + tie or (
                            abs(m - best_m) <= tie and abs(y - iv.start) <= tie):
                        best, best_m = k, m
                w, iv, inv = tables[frame][best]
                letters.append(w)
                frames.append(frame)
                margins.append(float(best_m))
                v = circ._apply(inv, v)
                s = max(abs(c) for c in v)
                v = [c / s for c in v]
                frame = NEXT_FRAME[frame]
        return Code(x, start, tuple(letters), tuple(frames), frame, tuple(margins))


def code(rep: FuchsianRep, x: float, depth: int) -> Code:
    return Coder(rep).code(x, depth)


def hyperbolic_distance(rep: FuchsianRep, p, q) -> float:
    j = rep.form
    p, q = np.asarray(p, float), np.asarray(q, float)
    num = abs(float(p @ j @ q))
    den = math.sqrt(float(p @ j @ p) * float(q @ j @ q))
    return math.acosh(max(1.0, num / den))


def _mirror(g) -> tuple[np.ndarray, np.ndarray]:
    """(b, gamma) with g = b (x) gamma - 1, b scaled so its largest entry is positive."""
    m = np.asarray(g) + np.eye(3)
    i, j = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    b = m[:, j] / m[i, j]
    gamma = m[i, :]
    k = int(np.argmax(np.abs(b)))
    if b[k] < 0:
        b, gamma = -b, -gamma
    return b, gamma


def ray_word(rep: FuchsianRep, theta: float, radius: float) -> str:
    """Word g with the point at distance ``radius`` from o towards theta in g(chamber).

    Walks back to the fundamental triangle {gamma_i <= 0} by reflecting in any
    violated side; the letters in application order spell g.  The walk runs
    in extended precision: near the boundary the point sits about e^(-2r)
    inside the light cone, which double precision cannot resolve past r ~ 15.
    """
    import mpmath

    dps = 20 + int(0.9 * radius)
    base_sig = rep.sig.permuted(_inverse_perm(rep.perm))
    circ = _ray_circle(base_sig, dps)
    with mpmath.workdps(dps):
        rows = [circ.a_rows[k] for k in rep.perm]
        cols = [circ.e_cols[k] for k in rep.perm]
        ch, sh = mpmath.cosh(radius), mpmath.sinh(radius)
        th = mpmath.mpf(theta)
        p = circ._apply(circ.chart_inv, [sh * mpmath.cos(th), sh * mpmath.sin(th), ch])
        # keep p on the sheet of the chamber (the Cartan rows are the form)
        if sum(circ.chamber[i] * circ.a_rows[i][j] * p[j] for i in range(3) for j in range(3)) > 0:
            p = [-c for c in p]
        tol = mpmath.mpf(10) ** (-(dps - int(0.45 * radius) - 5))
        letters = []
        for _ in range(100000):
            vals = [sum(r[i] * p[i] for i in range(3)) for r in rows]
            k = max(range(3), key=lambda i: vals[i])
            if vals[k] <= tol * max(abs(c) for c in p):
                break
            p = [p[i] - vals[k] * cols[k][i] for i in range(3)]  # -s_k p, same sheet
            letters.append(group.LETTERS[k])
    return "".join(letters)


@functools.lru_cache(maxsize=32)
def _ray_circle(sig: cartan.TriangleSignature, dps: int) -> "_ExactCircle":
    circ = _ExactCircle(sig, (0, 1, 2), dps)
    with circ.mp.workdps(dps):
        # gens g_i = e_i (x) a_i - 1 with a_i the i-th Cartan row
        circ.a_rows = [[circ.base_gens[i][i][k] + (1 if i == k else 0) for k in range(3)]
                       for i in range(3)]
        circ.e_cols = [[1 if r == i else 0 for r in range(3)] for i in range(3)]
        circ.chamber = list(circ.mp.lu_solve(circ.mp.matrix(circ.a_rows), circ.mp.matrix([-1, -1, -1])))
    return circ
