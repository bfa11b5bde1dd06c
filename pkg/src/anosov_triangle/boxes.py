"""Orbit points, invariant conics and the hexagonal box of a Barbot-type representation.

For the Coxeter element abc of a representation (a, b, c the images of s1,
s2, s3) the attracting point w0 and attracting line l0 are moved around by the
dihedral group <a, b>, giving 2*p3 points w_i and lines l_i with

    a w_i = w_{3-i},   b w_i = w_{5-i}

(and the same for lines).  The w_i lie on one conic C; u_i is the second
intersection of l_i with C.  The same construction with the generators
cyclically shifted (b, c, a) and (c, a, b) gives the primed and double-primed
frames.  The box is the convex hull, in the affine chart missing l2, of

    w0, w3, w5, w_{-2}, bc u0, abc u0

and :func:`verify_inclusions` measures with signed margins how the alphabet
words move boxes into each other.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import itertools
import math

import numpy as np

from . import errors
from . import group
from . import projlin as pl
from . import tolerances as _tol
from .cartan import CoxeterRep, TriangleSignature, barbot_type

FRAME_LETTERS = ("abc", "bca", "cab")
PRIMES = ("", "'", "''")


# ---------------------------------------------------------------------------
# frames and configuration


@dataclasses.dataclass(frozen=True, eq=False)
class FrameData:
    """Orbit data of one frame: points, lines and the conic through the points."""

    frame: int
    gens: tuple  # (g1, g2, g3) = the frame's relabelled a, b, c
    p: int  # order of g1 g2
    w: tuple
    u: tuple
    ell: tuple
    conic: pl.Conic

    @property
    def n(self) -> int:
        return 2 * self.p

    def wi(self, i: int) -> np.ndarray:
        return self.w[i % self.n]

    def ui(self, i: int) -> np.ndarray:
        return self.u[i % self.n]

    def li(self, i: int) -> np.ndarray:
        return self.ell[i % self.n]

    def word(self, w: str) -> np.ndarray:
        """Matrix of a word spelled in this frame's letters (a = g1, b = g2, c = g3)."""
        m = np.eye(3)
        for ch in w:
            m = m @ self.gens[group.letter_index(ch)]
        return m


def _orbit(gens, p: int):
    a, b, c = gens
    coxeter = a @ b @ c
    w0 = pl.attracting_point(coxeter)
    l0 = pl.attracting_line(coxeter)
    n = 2 * p
    w: list = [None] * n
    ell: list = [None] * n
    g = np.eye(3)
    ba = b @ a
    for k in range(p):
        h = g @ a
        for idx, m in (((2 * k) % n, g), ((3 + 2 * k) % n, h)):
            w[idx] = pl.act_point(m, w0)
            ell[idx] = pl.act_line(m, l0)
        g = ba @ g
    return tuple(w), tuple(ell)


def _frame(rep: CoxeterRep, f: int, conic_fit: str) -> FrameData:
    gens = tuple(rep.gens[(k + f) % 3] for k in range(3))
    p = rep.sig.ps[(2 + f) % 3]
    w, ell = _orbit(gens, p)
    pts = w[:5] if conic_fit == "five" else w
    conic = pl.conic_through(pts)
    u = tuple(pl.second_intersection(conic, ell[i], w[i]) for i in range(2 * p))
    return FrameData(f, gens, p, w, u, ell, conic)


@dataclasses.dataclass(frozen=True, eq=False)
class BoxConfig:
    """Orbit data of the three frames of one representation.

    ``frames[0]`` is the unprimed frame; ``w``, ``u``, ``ell`` and ``conic``
    are shortcuts to it.  ``residuals`` holds the worst violation of each
    defining relation.
    """

    rep: CoxeterRep
    frames: tuple
    residuals: dict

    @property
    def sig(self) -> TriangleSignature:
        return self.rep.sig

    @property
    def w(self) -> tuple:
        return self.frames[0].w

    @property
    def u(self) -> tuple:
        return self.frames[0].u

    @property
    def ell(self) -> tuple:
        return self.frames[0].ell

    @property
    def conic(self) -> pl.Conic:
        return self.frames[0].conic

    def word(self, w: str) -> np.ndarray:
        return self.frames[0].word(w)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def _frame_residuals(fd: FrameData) -> dict:
    a, b, _ = fd.gens
    n = fd.n
    orbit = 0.0
    for i in range(n):
        orbit = max(orbit,
                    pl.proj_distance(a @ fd.wi(i), fd.wi(3 - i)),
                    pl.proj_distance(b @ fd.wi(i), fd.wi(5 - i)),
                    pl.proj_distance(pl.act_line(a, fd.li(i)), fd.li(3 - i)),
                    pl.proj_distance(pl.act_line(b, fd.li(i)), fd.li(5 - i)))
    incid = max(max(abs(pl.incidence(fd.w[i], fd.ell[i])), abs(pl.incidence(fd.u[i], fd.ell[i])))
                for i in range(n))
    on_conic = float(np.max(np.abs(fd.conic.values(np.array(fd.w + fd.u)))))
    inv = 0.0
    for g in (a, b):
        moved = fd.conic.transformed(g).form
        inv = max(inv, float(np.max(np.abs(moved - fd.conic.form))))
    return {"orbit": orbit, "incidence": incid, "conic": on_conic, "invariance": inv}


def _min_separation(fd: FrameData) -> float:
    angles = sorted(fd.conic.angle(x) for x in fd.w)
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(angles[0] + 2.0 * math.pi - angles[-1])
    return min(gaps)


def build_config(rep: CoxeterRep, conic_fit: str = "five") -> BoxConfig:
    """Orbit points, lines and conics of all three frames.

    The conic is fitted through w0..w4 and validated on every w_i; with
    ``conic_fit="all"`` a least-squares fit through the whole orbit is used
    instead.  Raises :class:`ComplexCoxeter` when a Coxeter element has no
    real attracting point or line, and :class:`DegenerateConic` when the
    fitted conic is degenerate, misses an orbit point, a line is tangent, or
    two w_i coincide.
    """
    if conic_fit not in ("five", "all"):
        raise errors.ConfigError(f"conic_fit must be 'five' or 'all', got {conic_fit!r}")
    if rep.cartan is not None and rep.cartan.type is not None:
        if rep.cartan.type.q != barbot_type(rep.sig).q:
            raise errors.NotBarbotType(f"type {rep.cartan.type.q} is not the Barbot type")
    frames = tuple(_frame(rep, f, conic_fit) for f in range(3))
    residuals: dict = {}
    for fd in frames:
        for k, v in _frame_residuals(fd).items():
            residuals[k] = max(residuals.get(k, 0.0), v)
        sep = _min_separation(fd)
        if sep < 1e-6:
            raise errors.DegenerateConic(f"orbit points collide (separation {sep:.3g})")
    if residuals["conic"] > _tol.TOL.conic:
        raise errors.DegenerateConic(f"orbit leaves the fitted conic by {residuals['conic']:.3g}")
    return BoxConfig(rep, frames, residuals)


# ---------------------------------------------------------------------------
# order along the conic


@dataclasses.dataclass(frozen=True)
class OrderingReport:
    sequence: tuple  # labels like "w0", "u1" in cyclic order along C, starting at w0
    matches: bool
    swapped: bool  # u_{2k-1} and u_{2k} exchanged relative to the reducible order
    w1_in_mobius_prime: bool
    u0_in_mobius_prime: bool
    u0_dprime_in_mobius: bool
    cu0_in_mobius: bool
    crossings: tuple  # index pairs (i, j) with l_i, l_j meeting inside M
    crossings_ok: bool

    @property
    def ok(self) -> bool:
        return (self.matches and self.w1_in_mobius_prime and self.u0_dprime_in_mobius
                and self.cu0_in_mobius and self.crossings_ok)


def _expected_labels(p: int) -> list[tuple[str, int]]:
    n = 2 * p
    return [("w" if i % 4 in (0, 3) else "u", i % n) for i in range(4 * p)]


def _check_pattern(pos: dict, p: int) -> tuple[bool, bool, bool]:
    """(matches, some pair reversed, some pair in reducible order) for one orientation."""
    n = 2 * p
    ws = [i for i in range(4 * p) if i % 4 in (0, 3)]
    w_pos = [pos[("w", i % n)] for i in ws]
    if w_pos[0] != 0.0 or any(y <= x for x, y in zip(w_pos, w_pos[1:])):
        return False, False, False
    fwd = rev = False
    for blk in range(p):
        lo, hi = pos[("w", (4 * blk) % n)], pos[("w", (4 * blk + 3) % n)]
        if blk == p - 1 and hi < lo:
            hi += 2.0 * math.pi
        i1, i2 = (4 * blk + 1) % n, (4 * blk + 2) % n
        x1, x2 = pos[("u", i1)], pos[("u", i2)]
        if not (lo < x1 < hi and lo < x2 < hi):
            return False, False, False
        if x1 < x2:
            fwd = True
        elif x2 < x1:
            rev = True
    return True, rev, fwd


def ordering_check(cfg: BoxConfig, raise_on_failure: bool = True) -> OrderingReport:
    """Cyclic order of the 4*p3 points along C and the strip memberships.

    The reducible order is w0, u1, u2, w3, w4, u5, u6, w7, ... (indices
    mod 2*p3, the pattern continuing for 4*p3 entries); every pair
    (u_{2k-1}, u_{2k}) may be reversed, but all pairs the same way.  Raises
    :class:`OrderViolation` when the order or a membership fails, unless
    ``raise_on_failure`` is false.
    """
    f0, f1, f2 = cfg.frames
    p, n = f0.p, f0.n
    labels = [(k, i) for k in ("w", "u") for i in range(n)]
    pts = {("w", i): f0.w[i] for i in range(n)}
    pts.update({("u", i): f0.u[i] for i in range(n)})
    raw = {lab: f0.conic.angle(pts[lab]) for lab in labels}
    base = raw[("w", 0)]
    best = None
    for sgn in (1.0, -1.0):
        pos = {lab: (sgn * (raw[lab] - base)) % (2.0 * math.pi) for lab in labels}
        pos[("w", 0)] = 0.0
        ok, rev, fwd = _check_pattern(pos, p)
        seq = tuple(f"{k}{i}" for k, i in sorted(labels, key=lambda lab: (pos[lab], lab)))
        if ok and not (rev and fwd):
            best = (True, rev, seq)
            break
        if best is None:
            best = (False, False, seq)
    matches, swapped, seq = best
    mob = pl.Side.MOBIUS_STRIP
    w1_m1 = pl.mobius_side(f1.conic, f0.wi(1)) == mob
    u0_m1 = pl.mobius_side(f1.conic, f0.ui(0)) == mob
    u0pp_m = pl.mobius_side(f0.conic, f2.ui(0)) == mob
    cu0_m = pl.mobius_side(f0.conic, f0.gens[2] @ f0.ui(0)) == mob
    crossings = []
    for i in range(n):
        for j in range(i + 1, n):
            x = pl.meet(f0.li(i), f0.li(j))
            if pl.mobius_side(f0.conic, x) == mob:
                crossings.append((i, j))
    allowed = {frozenset(((2 * k - 1) % n, (2 * k) % n)) for k in range(p)}
    cross_ok = all(frozenset(c) in allowed for c in crossings)
    rep = OrderingReport(seq, matches, swapped, w1_m1, u0_m1, u0pp_m, cu0_m,
                         tuple(crossings), cross_ok)
    if raise_on_failure and not rep.ok:
        raise errors.OrderViolation(f"conic order check failed: {rep}")
    return rep


# ---------------------------------------------------------------------------
# the box


@dataclasses.dataclass(frozen=True, eq=False)
class BoxHexagon:
    """The six vertices (w0, w3, w5, w_{-2}, bc u0, abc u0) and their hull in the l2 chart."""

    frame: int
    vertices: tuple
    chart: np.ndarray
    hull: pl.ChartHull
    invariance_residual: float  # a permutes the vertices
    chart_consistent: bool  # the l1 chart gives the same hull

    def margins(self, xs) -> np.ndarray:
        return self.hull.margins(xs)

    def margin(self, x) -> float:
        return self.hull.margin(x)

    @property
    def diameter(self) -> float:
        return self.hull.diameter


VERTEX_NAMES = ("w0", "w3", "w5", "w-2", "bc*u0", "abc*u0")


def box_vertices(fd: FrameData) -> tuple:
    a, b, c = fd.gens
    return (fd.wi(0), fd.wi(3), fd.wi(5), fd.wi(-2),
            pl.unit(b @ c @ fd.ui(0)), pl.unit(a @ b @ c @ fd.ui(0)))


def build_box(cfg: BoxConfig, frame: int = 0) -> BoxHexagon:
    """Hexagonal box of one frame; raises :class:`ChartCrossing` if a vertex touches l2."""
    fd = cfg.frames[frame]
    verts = box_vertices(fd)
    chart = pl.unit(fd.li(2))
    for v in verts:
        if abs(float(chart @ v)) < _tol.TOL.inc:
            raise errors.ChartCrossing("box vertex lies on the chart line")
    verts = tuple(v * math.copysign(1.0, float(chart @ v)) for v in verts)
    hull = pl.chart_hull(chart, verts)
    a = fd.gens[0]
    # a swaps w0 <-> w3, w5 <-> w_{-2}, bc u0 <-> abc u0
    pairs = ((0, 1), (2, 3), (4, 5))
    inv = max(max(pl.proj_distance(a @ verts[i], verts[j]), pl.proj_distance(a @ verts[j], verts[i]))
              for i, j in pairs)
    # CH_{l2} = CH_{l1} exactly when l1 misses the hull, i.e. all vertices on one side
    s = np.array([float(fd.li(1) @ v) for v in verts])
    consistent = bool(np.all(s > 0) or np.all(s < 0))
    return BoxHexagon(frame, verts, chart, hull, inv, consistent)


def boxes_of(cfg: BoxConfig) -> tuple:
    return tuple(build_box(cfg, f) for f in range(3))


# ---------------------------------------------------------------------------
# inclusion report


@dataclasses.dataclass(frozen=True)
class InclusionRow:
    check: str
    word: str
    relation: str
    margin: float
    passed: bool

    def line(self) -> str:
        return "\t".join((self.check, self.word, self.relation, f"{self.margin:.17g}",
                          "pass" if self.passed else "FAIL"))


STRICT = ("interior", "avoids-line", "in-hull", "on-edge")


@dataclasses.dataclass(frozen=True)
class InclusionReport:
    """Rows sorted by (check, word).

    Strict relations pass when the margin is positive:

    * ``interior``: a point lies in the open box;
    * ``in-hull``: points lie in the open quadrilateral CH{w0, w2, u0, u2};
    * ``avoids-line``: a convex set misses a line (the margin is the smallest
      |<line, x>| over the unit vertices x, negative when the line cuts it);
    * ``on-edge``: a point lies on a box edge strictly between its endpoints.

    Closure relations pass when the margin is >= -inc:

    * ``closure``: a point lies in the closed box;
    * ``vertex``: a point coincides with a vertex (the margin is minus the
      projective distance);
    * ``subset``: a moved box lies in the closed target, the margin taken over
      the moved vertices that are not vertices of the target;
    * ``touches-line``: a convex set meets a line only in its boundary.
    """

    rows: tuple
    triples_checked: int = 0
    triples_total: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def min_margin(self) -> float:
        ms = [r.margin for r in self.rows if r.relation in STRICT]
        return min(ms) if ms else math.inf

    def by_check(self, check: str) -> list:
        return [r for r in self.rows if r.check == check]

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_table(self, header_lines=()) -> str:
        out = [f"# {h}" for h in header_lines]
        out.append(f"# triples checked {self.triples_checked} of {self.triples_total}")
        out.append("check\tword\trelation\tmargin\tpass")
        out.extend(r.line() for r in self.rows)
        return "\n".join(out) + "\n"

    @classmethod
    def from_table(cls, text: str) -> "InclusionReport":
        rows = []
        checked = total = 0
        lines = text.splitlines()
        for line in lines:
            if line.startswith("# triples checked"):
                parts = line.split()
                checked, total = int(parts[3]), int(parts[5])
        body = [ln for ln in lines if ln and not ln.startswith("#")][1:]
        for ln in body:
            check, word, rel, margin, ok = ln.split("\t")
            rows.append(InclusionRow(check, word, rel, float(margin), ok == "pass"))
        return cls(tuple(rows), checked, total)


def _row(check, word, relation, margin) -> InclusionRow:
    if relation in STRICT:
        ok = margin > 0
    else:
        ok = margin >= -_tol.TOL.inc
    return InclusionRow(check, word, relation, float(margin), bool(ok))


def _near(x, pts) -> float:
    return min(pl.proj_distance(x, v) for v in pts)


def _subset_margin(box: BoxHexagon, pts) -> float:
    """Min hull margin over the points that are not vertices of the box."""
    rest = [x for x in pts if _near(x, box.vertices) >= _tol.TOL.rel]
    return float(np.min(box.margins(np.array(rest)))) if rest else math.inf


def _point_claim(box: BoxHexagon, x, strict: bool) -> tuple[str, float]:
    d = _near(x, box.vertices)
    if d < _tol.TOL.rel and not strict:
        return "vertex", -d
    return ("interior" if strict else "closure"), box.margin(x)


def _line_margin(chart_line, line, pts) -> float:
    """Signed distance between a convex set (hull of ``pts`` in the given chart) and a line.

    With unit representatives normalized to the positive side of the chart
    line, the set misses ``line`` exactly when all values <line, x> share a
    sign; the margin is then the smallest |<line, x>|.  Otherwise it is minus
    the smaller of the two one-sided extents.
    """
    line = pl.unit(line)
    chart_line = pl.unit(chart_line)
    vals = []
    for x in pts:
        x = pl.unit(x)
        x = x * math.copysign(1.0, float(chart_line @ x))
        vals.append(float(line @ x))
    d = np.array(vals)
    if np.all(d > 0) or np.all(d < 0):
        return float(np.min(np.abs(d)))
    return -float(min(np.max(d), -np.min(d)))


def _edge_margin(box: BoxHexagon, x, i: int, j: int) -> float:
    """How far x sits inside the segment between box vertices i and j.

    Positive when x is collinear with them (within ``inc``) and strictly
    between; the value is the smaller chart distance to the two endpoints.
    """
    vi, vj = box.vertices[i], box.vertices[j]
    line = pl.join(vi, vj)
    if abs(pl.incidence(x, line)) > _tol.TOL.inc:
        return -abs(pl.incidence(x, line))
    xy = box.hull.chart_coords(np.array([vi, vj, x]))
    a, b, y = xy
    s = float((y - a) @ (b - a) / ((b - a) @ (b - a)))
    length = float(np.linalg.norm(b - a))
    return min(s, 1.0 - s) * length


def _q_pairs(sig: TriangleSignature):
    q, _, q2, _ = group.alphabets(sig)
    return q.words, q2.words


def _box_orbit_rows(cfg: BoxConfig, box: BoxHexagon) -> list:
    """w_i in the box for i not in {1, 2}, interior away from the vertices; u_i interior."""
    fd = cfg.frames[0]
    n = fd.n
    rows = []
    for i in range(n):
        if i in (1, 2):
            continue
        strict = (i % n) not in {(-2) % n, 0, 1, 2, 3, 5 % n}
        rel, m = _point_claim(box, fd.wi(i), strict)
        rows.append(_row("box-orbit", f"w{i}", rel, m))
    for i in range(n):
        if (i % n) in {(-1) % n, 0, 1, 2, 3, 4 % n}:
            continue
        rows.append(_row("box-orbit", f"u{i}", "interior", box.margin(fd.ui(i))))
    return rows


def _dprime_hull_rows(cfg: BoxConfig, boxes) -> list:
    """The double-primed box lies in CH_{l_i}{w0, w2, u0, u2} for i not in {-1, 0, 1, 2}.

    In the chart of l3 that box is the hull of w2, w0, w1, w''_{-2}, ab u0''
    and cab u0''.  The first two are corners of the quadrilateral and the last
    two lie on its edges (on l0 and l2), so the closed inclusion is checked
    for all six and the open one for w1 and w''_{-2}.  Each l_i must also
    miss the box.
    """
    fd = cfg.frames[0]
    n = fd.n
    quad = [fd.wi(0), fd.wi(2), fd.ui(0), fd.ui(2)]
    dbox = boxes[2]
    inner = [dbox.vertices[2], dbox.vertices[3]]
    rest = [x for x in dbox.vertices if _near(x, quad) >= _tol.TOL.rel]
    rows = []
    for i in range(n):
        if (i % n) in {(-1) % n, 0, 1, 2}:
            continue
        hull = pl.chart_hull(fd.li(i), quad)
        rows.append(_row("dprime-in-hull", f"l{i}", "closure", float(np.min(hull.margins(np.array(rest))))))
        rows.append(_row("dprime-in-hull", f"l{i}", "in-hull", float(np.min(hull.margins(np.array(inner))))))
        rows.append(_row("dprime-in-hull", f"l{i}*avoid", "avoids-line",
                         _line_margin(dbox.chart, fd.li(i), dbox.vertices)))
    return rows


def _moved(box: BoxHexagon, m: np.ndarray) -> tuple[list, np.ndarray]:
    return [m @ v for v in box.vertices], pl.act_line(m, box.chart)


def _single_letter_rows(cfg: BoxConfig, boxes, q_words) -> list:
    """g box'' inside the box for g in Q, with the open claims on single vertices."""
    fd, f2 = cfg.frames[0], cfg.frames[2]
    p3 = cfg.sig.ps[2]
    box = boxes[0]
    rows = [_row("single-letter", "abab*u0''", "interior", box.margin(fd.word("abab") @ f2.ui(0)))]
    # vertex order of the double-primed box: w0'', w3'', w5'', w-2'', ab u0'', cab u0''
    for g in q_words:
        moved, chart = _moved(boxes[2], fd.word(g))
        rows.append(_row("single-letter", f"{g}*box''", "subset", _subset_margin(box, moved)))
        rows.append(_row("single-letter", f"{g}*w-2''", "interior", box.margin(moved[3])))
        rows.append(_row("single-letter", f"{g}*ab*u0''", "interior", box.margin(moved[4])))
        if p3 > 3:
            rows.append(_row("single-letter", f"{g}*w5''", "interior", box.margin(moved[2])))
        if g not in ("b", "ab"):
            rows.append(_row("single-letter", f"{g}*w3''", "interior", box.margin(moved[1])))
        if g != "ab":
            rows.append(_row("line-avoid", f"{g}*box''", "avoids-line", _line_margin(chart, fd.li(0), moved)))
    return rows


def _two_letter_rows(cfg: BoxConfig, boxes, q_words, q2_words) -> list:
    """g g'' box' inside the box for g in Q, g'' in Q'' (orders p2 = p3 = 3).

    The point (bca)^2 u0' lies on l3 together with the box vertices w3 and
    bc u0, so it sits on that edge rather than in the open box.
    """
    fd, f1 = cfg.frames[0], cfg.frames[1]
    box = boxes[0]
    rows = []
    for name, word, x in (("bca*w-2'", "bca", f1.wi(-2)), ("bcaca*u0'", "bcaca", f1.ui(0)),
                          ("baca*u0'", "baca", f1.ui(0))):
        rows.append(_row("two-letter-points", name, "interior", box.margin(fd.word(word) @ x)))
    rows.append(_row("two-letter-points", "bcabca*u0'", "on-edge",
                     _edge_margin(box, fd.word("bcabca") @ f1.ui(0), 1, 4)))
    targets = (box.vertices[3], box.vertices[2])  # w-2, w5
    for g in q_words:
        for g2 in q2_words:
            word = g + g2
            moved, chart = _moved(boxes[1], fd.word(word))
            rows.append(_row("two-letter", f"{word}*box'", "subset", _subset_margin(box, moved)))
            for label, x in (("w-2'", moved[3]), ("w5'", moved[2])):
                d = _near(x, targets)
                if d < _tol.TOL.rel:
                    rows.append(_row("two-letter", f"{word}*{label}", "vertex", -d))
                else:
                    rows.append(_row("two-letter", f"{word}*{label}", "interior", box.margin(x)))
            if (g, g2) != ("ab", "ca"):
                rows.append(_row("line-avoid", f"{word}*box'", "avoids-line",
                                 _line_margin(chart, fd.li(0), moved)))
    return rows


def _t_rows(cfg: BoxConfig, box: BoxHexagon, t_words, t_bar: str) -> list:
    """h{w-2, w5, bc u0} open, h w3 open or in {w-2, w5}, h box misses l0 unless h = (abc)^2."""
    fd = cfg.frames[0]
    rows = []
    v = box.vertices
    for h in sorted(set(t_words)):
        m = fd.word(h)
        for label, x in (("w-2", v[3]), ("w5", v[2]), ("bc*u0", v[4])):
            rows.append(_row("t-strict", f"{h}*{label}", "interior", box.margin(m @ x)))
        y = m @ v[1]
        d = _near(y, (v[3], v[2]))
        if d < _tol.TOL.rel:
            rows.append(_row("t-strict", f"{h}*w3", "vertex", -d))
        else:
            rows.append(_row("t-strict", f"{h}*w3", "interior", box.margin(y)))
        moved, chart = _moved(box, m)
        lm = _line_margin(chart, fd.li(0), moved)
        if h == t_bar:
            rows.append(_row("t-exceptional", f"{h}*box", "subset", _subset_margin(box, moved)))
            rows.append(_row("t-exceptional", f"{h}*box", "touches-line", -abs(lm)))
        else:
            rows.append(_row("line-avoid", f"{h}*box", "avoids-line", lm))
    return rows


def _triple_margins(box: BoxHexagon, tmats: np.ndarray, i1: int, allowed3: np.ndarray,
                    subset) -> np.ndarray:
    """Margins of h1 h2 h3 box for fixed h1 = T[i1] over all (h2, h3), or the listed pairs."""
    verts = np.array(box.vertices).T  # (3, 6)
    v3 = tmats[allowed3] @ verts  # (K3, 3, 6)
    left = tmats[i1] @ tmats  # (K, 3, 3)
    if subset is None:
        pts = np.einsum("aij,bjk->abik", left, v3)  # (K, K3, 3, 6)
    else:
        pts = np.einsum("aij,ajk->aik", left[subset[:, 0]], v3[subset[:, 1]])[:, None]
    shape = pts.shape
    flat = np.moveaxis(pts, 2, -1).reshape(-1, 3)
    marg = box.margins(flat).reshape(shape[0], shape[1], shape[3])
    return marg.min(axis=2)


def _triple_rows(cfg: BoxConfig, box: BoxHexagon, t_words, t_bar: str, max_triples: int,
                 seed: int, workers: int | None):
    """h1 h2 h3 box strictly inside the box for all h3 != (abc)^2.

    One row per h3 with the worst (h1, h2); exhaustive when |T|^3 <= max_triples,
    otherwise a seeded sample of h1 plus every triple whose h3 is among the
    four worst single words.
    """
    fd = cfg.frames[0]
    t_words = list(t_words)
    k = len(t_words)
    tmats = np.array([fd.word(h) for h in t_words])
    allowed3 = np.array([i for i, h in enumerate(t_words) if h != t_bar])
    total = k * k * len(allowed3)
    worst = {int(j): (math.inf, "") for j in allowed3}

    def run(i1, subset=None):
        return i1, _triple_margins(box, tmats, i1, allowed3, subset)

    tasks = []
    if total <= max_triples:
        tasks = [(i1, None) for i1 in range(k)]
        checked = total
    else:
        rng = np.random.default_rng(seed)
        n_rows = max(1, max_triples // (k * len(allowed3)))
        sample = sorted(rng.choice(k, size=min(k, n_rows), replace=False).tolist())
        tasks = [(i1, None) for i1 in sample]
        checked = len(sample) * k * len(allowed3)
        single = [min(box.margins(np.array([tmats[j] @ v for v in box.vertices]))) for j in allowed3]
        suspects = np.argsort(single)[:4]
        for i1 in range(k):
            if i1 in sample:
                continue
            pairs = np.array([(i2, s) for i2 in range(k) for s in suspects])
            tasks.append((i1, pairs))
            checked += len(pairs)

    def merge(i1, marg, subset):
        if subset is None:
            for i2 in range(k):
                for s, j in enumerate(allowed3):
                    m = float(marg[i2, s])
                    if m < worst[int(j)][0]:
                        worst[int(j)] = (m, f"{t_words[i1]}|{t_words[i2]}|{t_words[j]}")
        else:
            for r, (i2, s) in enumerate(subset):
                j = int(allowed3[s])
                m = float(marg[r, 0])
                if m < worst[j][0]:
                    worst[j] = (m, f"{t_words[i1]}|{t_words[i2]}|{t_words[j]}")

    if workers and workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(lambda t: run(*t), tasks))
    else:
        results = [run(*t) for t in tasks]
    for (i1, marg), (_, subset) in zip(results, tasks):
        merge(i1, marg, subset)
    rows = [_row("triple", worst[j][1], "interior", worst[j][0]) for j in sorted(worst)]
    return rows, checked, total


def verify_inclusions(cfg: BoxConfig, boxes=None, *, max_triples: int = 10**6, seed: int = 0,
                      workers: int | None = None) -> InclusionReport:
    """Measure every box inclusion with a signed margin in the l2 chart.

    Checks, for the labelling of ``cfg`` (all orders odd):

    * ``box-orbit``: where the orbit points w_i, u_i sit relative to the box;
    * ``dprime-in-hull``: the double-primed box inside CH_{l_i}{w0, w2, u0, u2};
    * ``single-letter`` (p2 > 3 or p3 > 3): g box'' inside the box for g in Q;
    * ``two-letter`` (p2 = p3 = 3): g g'' box' inside the box;
    * ``t-strict``, ``line-avoid``, ``t-exceptional`` and ``triple`` (p1 > 3):
      the alphabet T moves the box strictly inside itself, except the
      word (abc)^2 which fixes w0 and l0.

    Rows are sorted by (check, word), so the report does not depend on
    ``workers``.
    """
    sig = cfg.sig
    if not sig.all_odd:
        raise errors.EvenSignature(f"box inclusions need all orders odd, got {sig.ps}")
    if boxes is None:
        boxes = boxes_of(cfg)
    p1, p2, p3 = sig.ps
    q_words, q2_words = _q_pairs(sig)
    rows = _box_orbit_rows(cfg, boxes[0])
    rows += _dprime_hull_rows(cfg, boxes)
    if p2 > 3 or p3 > 3:
        rows += _single_letter_rows(cfg, boxes, q_words)
    else:
        rows += _two_letter_rows(cfg, boxes, q_words, q2_words)
    checked = total = 0
    if p1 > 3:
        # distinct products only: different (q, q'', q') can name one element
        t_words = tuple(dict.fromkeys(group.alphabets(sig)[3].words))
        t_bar = group.reduce(group.T_BAR, sig)
        rows += _t_rows(cfg, boxes[0], t_words, t_bar)
        trip, checked, total = _triple_rows(cfg, boxes[0], t_words, t_bar, max_triples, seed, workers)
        rows += trip
    rows.sort(key=lambda r: (r.check, r.word, r.relation))
    return InclusionReport(tuple(rows), checked, total)


# ---------------------------------------------------------------------------
# working labelling


_EVEN = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
_ODD = ((0, 2, 1), (2, 1, 0), (1, 0, 2))


def working_permutation(sig: TriangleSignature, t: float) -> tuple:
    """Relabelling (new s_k = old s_{perm[k]}) with parameter >= 1 and the largest p1.

    Cyclic relabellings keep t; the others invert it.  Ties keep the earliest
    permutation in the fixed candidate order.
    """
    cands = _EVEN if t >= 1.0 else _ODD
    return max(cands, key=lambda perm: (sig.ps[perm[0]], -cands.index(perm)))


# ---------------------------------------------------------------------------
# nested contraction


@dataclasses.dataclass(frozen=True)
class ShrinkReport:
    diameters: tuple
    ratios: tuple
    limit_point: np.ndarray
    limit_residual: float  # projective distance of the limit point to w0


def _hull_diameter(box: BoxHexagon, pts) -> float:
    xy = box.hull.chart_coords(np.array(pts))
    return float(np.max(np.linalg.norm(xy[:, None, :] - xy[None, :, :], axis=-1)))


def intersection_shrink(cfg: BoxConfig, box: BoxHexagon | None = None, words=None,
                        depth: int = 20) -> ShrinkReport:
    """Chart diameters of the nested boxes g_1 ... g_i box.

    ``words`` defaults to ``depth`` copies of (abc)^2.  The running product is
    rescaled every step.  Raises :class:`NoContraction` if the last diameter
    is not smaller than the first.
    """
    if box is None:
        box = build_box(cfg, 0)
    if words is None:
        words = [group.T_BAR] * depth
    g = np.eye(3)
    diams = [box.diameter]
    pts = list(box.vertices)
    for w in words:
        g = g @ cfg.word(w)
        g = g / np.max(np.abs(g))
        pts = [g @ v for v in box.vertices]
        diams.append(_hull_diameter(box, pts))
    ratios = tuple(b / a if a > 0 else 0.0 for a, b in zip(diams, diams[1:]))
    if len(diams) > 1 and not diams[-1] < diams[0]:
        raise errors.NoContraction(f"box diameter did not shrink ({diams[0]:.3g} -> {diams[-1]:.3g})")
    limit = pl.unit(sum(pl.unit(x) * math.copysign(1.0, float(box.chart @ x)) for x in pts))
    return ShrinkReport(tuple(diams), ratios, limit, pl.proj_distance(limit, cfg.w[0]))


__all__ = [
    "BoxConfig", "BoxHexagon", "FrameData", "InclusionReport", "InclusionRow", "OrderingReport",
    "ShrinkReport", "VERTEX_NAMES", "box_vertices", "boxes_of", "build_box", "build_config",
    "intersection_shrink", "ordering_check", "verify_inclusions", "working_permutation",
]
