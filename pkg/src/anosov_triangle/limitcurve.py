"""Boundary maps of Barbot and Hitchin representations.

For a Barbot-type representation with parameter outside the critical
interval, xi^(1)(x) is located by nested boxes: the code gamma_1 gamma_2 ...
of x moves the box of the frame reached after n letters by
rho(gamma_1 ... gamma_n), and those boxes shrink to a point.  Values are
reported as the barycenter of the last box together with its diameter (the
largest projective angle between two of its vertices), which bounds the
error.  xi^(2) is the same construction for the transposed generators, read
as a line through the standard inner product.

Parameters below 1 are handled by relabelling the generators with an odd
permutation (which inverts t); circle points keep their angles throughout.

Hitchin curves are not built from boxes: the flag at angle theta is read off
the singular vectors of rho(g) for a long word g tracking the geodesic ray
towards theta.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import math

import numpy as np

from . import classify, errors, group, hyperbolic, kernels
from . import boxes as bx
from . import projlin as pl
from . import tolerances as _tol
from .cartan import CoxeterRep, barbot_type, hitchin_type

CRIT_BAND = 1e-9  # relative slack when deciding t is at the critical value


# ---------------------------------------------------------------------------
# samples and diagnostics


@dataclasses.dataclass(frozen=True)
class FlagSample:
    x: float
    point: np.ndarray
    line: np.ndarray
    diam1: float
    diam2: float
    depth: int

    @property
    def incidence(self) -> float:
        return abs(pl.incidence(self.point, self.line))


@dataclasses.dataclass(frozen=True)
class CurveDiagnostics:
    min_pair_separation: float
    min_transversality: float
    equivariance_residual: float
    svgap_slope: float | None
    max_diam1: float
    max_diam2: float
    max_incidence: float
    min_nesting_margin: float
    interval_pairs_flagged: int
    interval_pattern_violations: int
    lift_closes: bool  # the curve lifts to a closed curve in R^3 (null-homotopic)
    supporting_lines: float  # fraction of sampled xi2 lines with the rest of the curve on one side


# ---------------------------------------------------------------------------
# nested boxes


@dataclasses.dataclass(frozen=True)
class BoxTrace:
    """Barycenter and diameter after each code letter, plus nesting margins."""

    point: np.ndarray
    diameter: float
    diameters: tuple
    nesting: tuple
    code: hyperbolic.Code


def _box_points(g: np.ndarray, verts: np.ndarray) -> np.ndarray:
    pts = verts @ g.T
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _diameter(pts: np.ndarray) -> float:
    # vertices share one side of the moved chart line, so vector angles are projective distances
    return kernels.max_angle(pts)


def _barycenter(pts: np.ndarray) -> np.ndarray:
    return pl.unit(np.sum(pts, axis=0))


class BoundaryMap:
    """Nested-box evaluation of xi^(1) for one Barbot-type representation.

    ``rep`` carries the caller's labelling.  Construction picks the working
    relabelling (parameter >= 1, largest first order), builds the three
    boxes there, and codes circle points with the correspondingly relabelled
    Fuchsian structure.
    """

    def __init__(self, rep: CoxeterRep, fuchs: hyperbolic.FuchsianRep | None = None,
                 allow_critical: bool = True):
        sig = rep.sig
        if rep.cartan is None or rep.cartan.type is None or rep.cartan.type.q != barbot_type(sig).q:
            raise errors.NotBarbotType("nested boxes need a Barbot-type Cartan matrix")
        t = rep.cartan.require_parameter()
        if t <= 0:
            raise errors.NotInBarbotRange(f"parameter {t} is not positive")
        tc = classify.t_crit(sig)
        lo, hi = 1.0 / tc, tc
        inside = lo * (1 + CRIT_BAND) < t < hi * (1 - CRIT_BAND)
        critical = not inside and (lo * (1 - CRIT_BAND) <= t <= hi * (1 + CRIT_BAND)) and (
            abs(t - hi) <= CRIT_BAND * hi or abs(t - lo) <= CRIT_BAND * lo)
        if inside or (critical and not allow_critical):
            raise errors.NotInBarbotRange(
                f"t = {t:.17g} lies in the non-Anosov interval [{lo:.17g}, {hi:.17g}]")
        self.rep = rep
        self.t = t
        self.critical = critical
        self.perm = bx.working_permutation(sig, t)
        self.work = rep.permuted(self.perm)
        self.cfg = bx.build_config(self.work)
        self.boxes = bx.boxes_of(self.cfg)
        self.fuchs = fuchs if fuchs is not None else hyperbolic.fuchsian(sig)
        self.coder = hyperbolic.Coder(self.fuchs.permuted(self.perm))
        self._verts = {f: np.array(b.vertices) for f, b in enumerate(self.boxes)}
        self._gens = self.work.gens

    def _word(self, w: str) -> np.ndarray:
        return group.evaluate(w, self.work)

    def trace(self, x: float, depth: int, nesting: bool = False) -> BoxTrace:
        """Nested boxes along the code of x.

        With ``nesting`` each step records the margin of the next box's
        barycenter in the current box.  Both boxes are first pulled back by
        rho(g_n); that projective map preserves membership, so the test reads
        rho(q) box_next against box_f in the box's own chart and stays well
        conditioned however long the prefix is.
        """
        code = self.coder.code(x, depth)
        frames = [code.frame_after(n) for n in range(len(code.letters) + 1)]
        steps = np.array([self._word(w) for w in code.letters]).reshape(-1, 3, 3)
        diams, point = kernels.box_chain(steps, np.array([self._verts[f] for f in frames]))
        nest = []
        if nesting:
            for n, q in enumerate(steps):
                moved = _box_points(q, self._verts[frames[n + 1]])
                nest.append(self.boxes[frames[n]].margin(_barycenter(moved)))
        return BoxTrace(point, float(diams[-1]), tuple(map(float, diams)), tuple(nest), code)

    def _orient(self, f: int, v: np.ndarray) -> float:
        """Sign of v against the chart line of start box f (its vertices count as positive)."""
        h = self.boxes[f].chart
        return float(np.sign(h @ v) * np.sign(h @ self._verts[f][0]))

    def lift(self, xs, points, depth: int) -> tuple[np.ndarray, bool]:
        """Signed representatives of xi^(1) along increasing angles xs.

        Each start box is convex in its own chart, so the curve over that
        box's interval has a lift on the positive side of the chart line.
        Where consecutive samples change start frame, the shared endpoint is
        located by bisection and its image fixes the relative sign.  The
        second value is True when the lift closes up after one turn.
        """
        n = len(xs)
        frames = [self.coder.frame_of(x) for x in xs]
        out = np.array(points, dtype=float)
        sign = 1.0
        for i in range(n + 1):
            k = i % n
            if i > 0 and frames[k] != frames[i - 1]:
                lo = xs[i - 1]
                hi = xs[k] + (hyperbolic.TWO_PI if k == 0 else 0.0)
                for _ in range(48):
                    mid = 0.5 * (lo + hi)
                    if self.coder.frame_of(mid) == frames[i - 1]:
                        lo = mid
                    else:
                        hi = mid
                v = self.trace(hi, depth).point
                sign *= self._orient(frames[i - 1], v) * self._orient(frames[k], v)
            if i < n:
                out[k] = sign * self._orient(frames[k], out[k]) * out[k]
        closes = sign > 0
        return out, bool(closes)

    def __call__(self, x: float, depth: int) -> tuple[np.ndarray, float]:
        tr = self.trace(x, depth)
        return tr.point, tr.diameter


_MAPS: dict = {}


def boundary_map(rep: CoxeterRep, allow_critical: bool = True) -> BoundaryMap:
    key = (rep.key, allow_critical)
    bm = _MAPS.get(key)
    if bm is None:
        bm = BoundaryMap(rep, allow_critical=allow_critical)
        _MAPS[key] = bm
    return bm


def xi1(rep: CoxeterRep, x: float, depth: int = 30) -> tuple[np.ndarray, float]:
    """(xi^(1)(x), diameter of the final box)."""
    return boundary_map(rep)(x, depth)


def xi2(rep: CoxeterRep, x: float, depth: int = 30) -> tuple[np.ndarray, float]:
    """(xi^(2)(x) as a covector, diameter), from the transposed representation."""
    return boundary_map(dual_of(rep))(x, depth)


_DUALS: dict = {}


def dual_of(rep: CoxeterRep) -> CoxeterRep:
    d = _DUALS.get(rep.key)
    if d is None:
        d = rep.inverse_transpose()
        _DUALS[rep.key] = d
    return d


# ---------------------------------------------------------------------------
# Hitchin flags from long words


def ray_flag(rep: CoxeterRep, fuchs: hyperbolic.FuchsianRep, theta: float,
             radius: float = 25.0) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(point, line, err1, err2) from the singular vectors of rho(g) along the ray to theta.

    err1 = sigma2/sigma1 and err2 = sigma3/sigma2 are the gap ratios that
    control the distance to the limit flag.
    """
    w = hyperbolic.ray_word(fuchs, theta, radius)
    # renormalised running product, no overflow on long rays
    m = kernels.chain_product(np.asarray(rep.gens), [group.letter_index(ch) for ch in w])
    u, s, _ = np.linalg.svd(m)
    return u[:, 0], u[:, 2], float(s[1] / s[0]), float(s[2] / s[1])


# ---------------------------------------------------------------------------
# curve sampling


def _canonical(v: np.ndarray) -> np.ndarray:
    v = pl.unit(v)
    k = int(np.argmax(np.abs(v)))
    return v if v[k] > 0 else -v


def _interval_index(z: np.ndarray, x: float) -> int:
    """j with x on the arc [z_j, z_{j+1}] (consecutive points, in either orientation)."""
    n = len(z)
    order = np.argsort(z)
    pos = int(np.searchsorted(z[order], hyperbolic.wrap(x), side="right")) - 1
    ja, jb = int(order[pos % n]), int(order[(pos + 1) % n])
    return ja if (jb - ja) % n == 1 else jb


def _pattern_allowed(j: int, k: int, n: int) -> bool:
    d = min((j - k) % n, (k - j) % n)
    return d <= 1 or (d == 2 and j % 2 == 0 and k % 2 == 0)


def _lift(points: np.ndarray) -> tuple[np.ndarray, bool]:
    # sign continuity between neighbours; fine for the smooth Hitchin curves
    out = points.copy()
    for i in range(1, len(out)):
        if out[i] @ out[i - 1] < 0:
            out[i] = -out[i]
    return out, bool(out[0] @ out[-1] > 0)


def _transversality(points: np.ndarray, lines: np.ndarray, gap: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(points)
    inc = np.abs(lines @ points.T)  # inc[k, j] = |<xi2(x_k), xi1(x_j)>|
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :])
    sep = np.minimum(sep, n - sep)
    return inc, sep >= gap


@dataclasses.dataclass(frozen=True)
class Curve:
    samples: tuple
    diagnostics: CurveDiagnostics
    method: str  # "boxes" or "singular-vectors"
    lifted: np.ndarray  # signed representatives along the samples (see lift_closes)
    chart: np.ndarray | None  # chart line of the unprimed box, when boxes were used


def _sample_boxes(rep: CoxeterRep, xs, depth: int, allow_critical: bool, workers: int | None,
                  equivariance: bool):
    bm1 = boundary_map(rep, allow_critical)
    try:
        bm2 = boundary_map(dual_of(rep), allow_critical)
    except errors.DegenerateConic as exc:
        # at t = t_red^(+-1) the transposed generators keep a plane invariant, so the
        # dual orbit is collinear and has no conic to build boxes on
        raise errors.DegenerateConic(
            "the dual representation is reducible here (t = t_red or 1/t_red); "
            "xi^(2) has no nested-box construction") from exc

    def one(x):
        t1 = bm1.trace(x, depth, nesting=True)
        t2 = bm2.trace(x, depth)
        return t1, t2

    if workers and workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as ex:
            traces = list(ex.map(one, xs))
    else:
        traces = [one(x) for x in xs]
    samples = tuple(FlagSample(float(x), t1.point, t2.point, t1.diameter, t2.diameter, depth)
                    for x, (t1, t2) in zip(xs, traces))
    nest = min((m for t1, _ in traces for m in t1.nesting), default=math.inf)
    eq = 0.0
    if equivariance:
        fuchs = bm1.fuchs
        for s in samples:
            for k in range(3):
                y = fuchs.act(fuchs.gens[k], s.x)
                ty = bm1.trace(y, depth)
                moved = rep.gens[k] @ s.point
                eq = max(eq, pl.proj_distance(moved, ty.point))
    return samples, nest, eq, bm1


def _sample_rays(rep: CoxeterRep, xs, radius: float, equivariance: bool):
    fuchs = hyperbolic.fuchsian(rep.sig)
    samples = []
    for x in xs:
        p, l, e1, e2 = ray_flag(rep, fuchs, x, radius)
        samples.append(FlagSample(float(x), p, l, e1, e2, 0))
    eq = 0.0
    if equivariance:
        for s in samples:
            for k in range(3):
                y = fuchs.act(fuchs.gens[k], s.x)
                p, _, _, _ = ray_flag(rep, fuchs, y, radius)
                eq = max(eq, pl.proj_distance(rep.gens[k] @ s.point, p))
    return tuple(samples), eq


def sample_curve(rep: CoxeterRep, n_samples: int = 500, depth: int = 30, *,
                 allow_critical: bool = False, equivariance: bool = True,
                 svgap_len: int | None = None, radius: float = 25.0,
                 workers: int | None = None) -> Curve:
    """Flags at ``n_samples`` equally spaced circle angles, with diagnostics.

    Barbot-type representations use nested boxes (parameter outside
    [1/t_crit, t_crit]; the endpoints only with ``allow_critical``).  Hitchin
    type uses singular vectors along geodesic rays of length ``radius``.
    Pair diagnostics skip pairs of neighbouring samples.
    """
    if n_samples < 4:
        raise ValueError("need at least four samples")
    xs = [hyperbolic.TWO_PI * i / n_samples for i in range(n_samples)]
    typ = rep.cartan.type.q if rep.cartan is not None and rep.cartan.type is not None else None
    if typ == hitchin_type(rep.sig).q and (typ != barbot_type(rep.sig).q):
        samples, eq = _sample_rays(rep, xs, radius, equivariance)
        nest, method, bm = math.inf, "singular-vectors", None
    else:
        samples, nest, eq, bm = _sample_boxes(rep, xs, depth, allow_critical, workers, equivariance)
        method = "boxes"
    points = np.array([s.point for s in samples])
    lines = np.array([pl.unit(s.line) for s in samples])
    inc, far = _transversality(points, lines, 2)
    min_trans = float(np.min(inc[far]))
    cos = np.clip(np.abs(points @ points.T), 0.0, 1.0)
    min_sep = float(np.min(np.arccos(cos[far])))
    if bm is not None:
        lifted, closes = bm.lift(xs, points, depth)
    else:
        lifted, closes = _lift(points)
    side = np.sign(lines @ lifted.T)
    support = 0
    for k in range(n_samples):
        sk = side[k][far[k]]
        if np.all(sk == sk[0]):
            support += 1
    flagged = violations = 0
    if bm is not None:
        z = hyperbolic.z_points(bm.coder.rep, 0)
        nz = len(z)
        jj = [_interval_index(z, x) for x in xs]
        tau = 1e-3
        for k in range(n_samples):
            for j in np.nonzero((inc[k] < tau) & far[k])[0]:
                flagged += 1
                if not _pattern_allowed(jj[j], jj[k], nz):
                    violations += 1
    slope = svgap_check(rep, svgap_len).slope if svgap_len else None
    diag = CurveDiagnostics(
        min_pair_separation=min_sep,
        min_transversality=min_trans,
        equivariance_residual=eq,
        svgap_slope=slope,
        max_diam1=max(s.diam1 for s in samples),
        max_diam2=max(s.diam2 for s in samples),
        max_incidence=max(s.incidence for s in samples),
        min_nesting_margin=nest,
        interval_pairs_flagged=flagged,
        interval_pattern_violations=violations,
        lift_closes=closes,
        supporting_lines=support / n_samples,
    )
    chart = None if bm is None else bm.boxes[0].chart
    return Curve(samples, diag, method, lifted, chart)


CURVE_COLUMNS = ("angle", "px", "py", "pz", "lx", "ly", "lz", "diam1", "diam2")


def curve_csv(samples, header_lines=()) -> str:
    out = [f"# {h}" for h in header_lines]
    out.append(",".join(CURVE_COLUMNS))
    for s in samples:
        p, l = _canonical(s.point), _canonical(s.line)
        vals = [s.x, *p, *l, s.diam1, s.diam2]
        out.append(",".join(classify.fmt(float(v)) for v in vals))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# singular value gaps


@dataclasses.dataclass(frozen=True)
class SvgapResult:
    lengths: tuple
    min_gap12: tuple  # min over words of that length of log(s1/s2)
    min_gap23: tuple
    slope: float  # least-squares slope of min(gap12, gap23) over the upper half of lengths


def svgap_check(rep: CoxeterRep, max_len: int = 14) -> SvgapResult:
    """Growth of the smallest singular value gaps with word length.

    All group elements up to ``max_len`` are enumerated once (as normal
    forms); the slope is fitted on lengths ceil(max_len/2)..max_len, where the
    short-word transient has died out.
    """
    layers = group.elements_by_length(rep.sig, max_len)
    lengths, g12, g23 = [], [], []
    for n, words in enumerate(layers):
        if not words:
            continue
        mats = np.stack([group.evaluate(w, rep) for w in words])
        s = np.linalg.svd(mats, compute_uv=False)
        s = np.maximum(s, 1e-300)
        lengths.append(n)
        g12.append(float(np.min(np.log(s[:, 0] / s[:, 1]))))
        g23.append(float(np.min(np.log(s[:, 1] / s[:, 2]))))
    lo = (max_len + 1) // 2
    sel = [i for i, n in enumerate(lengths) if n >= lo]
    if len(sel) >= 2:
        xs = np.array([lengths[i] for i in sel], dtype=float)
        ys = np.array([min(g12[i], g23[i]) for i in sel])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = 0.0
    return SvgapResult(tuple(lengths), tuple(g12), tuple(g23), slope)


__all__ = [
    "BoundaryMap", "BoxTrace", "CURVE_COLUMNS", "Curve", "CurveDiagnostics", "FlagSample",
    "SvgapResult", "boundary_map", "curve_csv", "dual_of", "ray_flag", "sample_curve",
    "svgap_check", "xi1", "xi2",
]
