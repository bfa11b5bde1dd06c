"""Traces, the Coxeter-element discriminant, critical parameters and the Anosov verdict.

Along the Barbot normal form the traces of s1s2s3 and s3s2s1 are

    x(t) = -t c - S + 3,    y(t) = -c/t - S + 3,

with c = c1 c2 c3 and S = c1^2 + c2^2 + c3^2 (Barbot c_k).  The Coxeter
element has distinct real eigenvalues exactly when
delta = x^2 y^2 - 4(x^3 + y^3) + 18 x y - 27 is positive.

The reducible parameter is where det(Cartan) = x + y + 2 vanishes, i.e.
c (t + 1/t) = 8 - 2 S.  The critical parameter is the root of delta in
(1, t_red).
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import math

import numpy as np

from . import cartan, errors, group
from . import projlin as pl
from . import tolerances as _tol
from .cartan import CartanMatrix, TriangleSignature


class Component(enum.Enum):
    HITCHIN = "Hitchin"
    BARBOT = "Barbot"
    OTHER = "Other"
    NON_COXETER = "NonCoxeter"


class Regime(enum.Enum):
    REAL_DISTINCT = "RealDistinct"
    DOUBLE_NONDIAGONALIZABLE = "DoubleNondiagonalizable"
    COMPLEX_PAIR = "ComplexPair"


_REGIME_OF = {
    "distinct-real": Regime.REAL_DISTINCT,
    "repeated": Regime.DOUBLE_NONDIAGONALIZABLE,
    "complex": Regime.COMPLEX_PAIR,
}


@dataclasses.dataclass(frozen=True)
class TraceData:
    t1: float
    t2: float
    t3: float
    x: float
    y: float

    @property
    def u(self) -> float:
        return 0.5 * (self.x + self.y)

    @property
    def v(self) -> float:
        return 0.5 * (self.x - self.y)


def traces(c: CartanMatrix | np.ndarray) -> TraceData:
    """Pair and Coxeter traces straight from the Cartan entries."""
    a = c.a if isinstance(c, CartanMatrix) else np.asarray(c, dtype=float)
    p12, p23, p31 = a[0, 1] * a[1, 0], a[1, 2] * a[2, 1], a[2, 0] * a[0, 2]
    x = a[0, 1] * a[1, 2] * a[2, 0] - p12 - p23 - p31 + 3.0
    y = a[1, 0] * a[2, 1] * a[0, 2] - p12 - p23 - p31 + 3.0
    return TraceData(p23 - 1.0, p31 - 1.0, p12 - 1.0, x, y)


def traces_of_matrices(gens) -> TraceData:
    """The same five traces evaluated on generator matrices."""
    s1, s2, s3 = gens
    return TraceData(float(np.trace(s2 @ s3)), float(np.trace(s3 @ s1)),
                     float(np.trace(s1 @ s2)), float(np.trace(s1 @ s2 @ s3)),
                     float(np.trace(s3 @ s2 @ s1)))


def discriminant(x, y):
    """Discriminant of lambda^3 - x lambda^2 + y lambda - 1 (works on arrays)."""
    return x * x * y * y - 4.0 * (x ** 3 + y ** 3) + 18.0 * x * y - 27.0


def regime_of_traces(x: float, y: float) -> Regime:
    """Eigenvalue regime of a unimodular 3x3 with traces x (matrix) and y (inverse).

    Uses the same relative threshold as :func:`projlin.eig3`, so the two agree
    away from the tolerance band.
    """
    p, q = pl.depressed_cubic(x, y, 1.0)
    return _REGIME_OF[pl.cubic_regime(p, q)]


# ---------------------------------------------------------------------------
# the Barbot line


def barbot_constants(sig: TriangleSignature) -> tuple[float, float]:
    """(c1 c2 c3, c1^2 + c2^2 + c3^2) for the Barbot type."""
    cs = cartan.barbot_type(sig).c
    return cs[0] * cs[1] * cs[2], sum(ck * ck for ck in cs)


def barbot_traces(sig: TriangleSignature, t):
    """(x, y) along the Barbot normal form; ``t`` may be an array."""
    c, s = barbot_constants(sig)
    t = np.asarray(t, dtype=float) if not np.isscalar(t) else float(t)
    return -t * c - s + 3.0, -c / t - s + 3.0


def barbot_delta(sig: TriangleSignature, t):
    x, y = barbot_traces(sig, t)
    return discriminant(x, y)


def t_red(sig: TriangleSignature) -> float:
    """Larger reducible parameter: the root of c (t + 1/t) = 8 - 2 S with t > 1."""
    c, s = barbot_constants(sig)
    k = (8.0 - 2.0 * s) / c
    if k <= 2.0:
        raise errors.BracketingFailed(f"no reducible parameter for {sig}")
    return 0.5 * (k + math.sqrt(k * k - 4.0))


def t_crit(sig: TriangleSignature) -> float:
    """Critical parameter in (1, t_red): delta changes sign from negative to positive.

    Bisection to relative width 1e-12; the upper (delta > 0) end is returned.
    """
    hi = t_red(sig)
    lo = 1.0 + 1e-9
    if not (barbot_delta(sig, lo) < 0 < barbot_delta(sig, hi)):
        raise errors.BracketingFailed(f"delta does not change sign on ({lo}, {hi}) for {sig}")
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if barbot_delta(sig, mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# the (u, v) curve system


def f_curve(sig: TriangleSignature, u):
    c, s = barbot_constants(sig)
    return (np.asarray(u) - 3.0 + s) ** 2 - c * c


def g_curve(u, sign: int):
    u = np.asarray(u, dtype=float)
    if np.any(2.0 * u + 3.0 < 0):
        raise errors.DomainError("g(u) needs 2u + 3 >= 0")
    return u * u + 12.0 * u + 9.0 + sign * 2.0 * (2.0 * u + 3.0) ** 1.5


def u_pm(sig: TriangleSignature) -> tuple[float, float]:
    """(u_-, u_+), the zeros of f."""
    c, s = barbot_constants(sig)
    return 3.0 - s - c, 3.0 - s + c


@dataclasses.dataclass(frozen=True)
class GoldmanCurves:
    u: np.ndarray
    f: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    u_minus: float
    u_plus: float


def goldman_curves(sig: TriangleSignature, u_min: float = -1.5, u_max: float | None = None,
                   n: int = 401) -> GoldmanCurves:
    """Samples of f, g+ and g- on a uniform u grid (Barbot type)."""
    um, up = u_pm(sig)
    if u_max is None:
        u_max = max(3.0, up + 1.0)
    u = np.linspace(u_min, u_max, n)
    return GoldmanCurves(u, f_curve(sig, u), g_curve(u, +1), g_curve(u, -1), um, up)


# ---------------------------------------------------------------------------
# verdicts


@dataclasses.dataclass(frozen=True)
class Verdict:
    component: Component
    eigen_regime: Regime
    anosov: bool
    traces: TraceData
    delta: float
    t: float
    t_crit: float | None = None
    t_red: float | None = None
    diagonalizable: bool = True
    reducible: bool = False


def _component(sig: TriangleSignature, c: CartanMatrix) -> Component:
    q = c.type.q
    if q == (1, 1, 1):
        if not c.has_parameter or c.t > 0:
            return Component.HITCHIN
        return Component.OTHER
    if sig.all_odd and q == tuple((p - 1) // 2 for p in sig.ps) and c.t > 0:
        return Component.BARBOT
    return Component.OTHER


def classify(sig: TriangleSignature, c: CartanMatrix) -> Verdict:
    """Component, eigenvalue regime of s1s2s3 and the Anosov verdict.

    Anosov exactly for the Hitchin component, or the Barbot component with
    distinct real Coxeter eigenvalues.  Values inside the tolerance band around
    a double eigenvalue count as the double regime, hence as not Anosov.  A
    type-(1,1,1) single point (some p_k = 2) is the Fuchsian character and is
    classified as Hitchin.
    """
    tr = traces(c)
    delta = float(discriminant(tr.x, tr.y))
    regime = regime_of_traces(tr.x, tr.y)
    rep = cartan.build_representation(c)
    e = pl.eig3(group.evaluate("abc", rep, cache=None))
    comp = _component(sig, c)
    anosov = comp is Component.HITCHIN or (
        comp is Component.BARBOT and regime is Regime.REAL_DISTINCT)
    tc = tred = None
    if sig.all_odd and comp in (Component.BARBOT, Component.OTHER) and c.type.q == tuple(
            (p - 1) // 2 for p in sig.ps):
        tc, tred = t_crit(sig), t_red(sig)
    det = float(np.linalg.det(c.a))
    return Verdict(comp, regime, anosov, tr, delta, c.t, tc, tred, e.diagonalizable,
                   abs(det) < _tol.TOL.det)


def classify_generators(sig: TriangleSignature, gens) -> Verdict:
    """Classify a representation given by generator matrices.

    Matrices failing the Coxeter relations (or not of the form b (x) gamma - 1)
    are reported as NonCoxeter without further analysis.
    """
    gens = tuple(np.asarray(g, dtype=float) for g in gens)
    tr = traces_of_matrices(gens)
    if cartan.relation_residual(gens, sig) > _tol.TOL.rel:
        return Verdict(Component.NON_COXETER, regime_of_traces(tr.x, tr.y), False, tr,
                       float(discriminant(tr.x, tr.y)), math.nan)
    a = np.empty((3, 3))
    bs, gs = [], []
    for g in gens:
        m = g + np.eye(3)
        if np.linalg.matrix_rank(m, tol=1e-9 * max(1.0, np.abs(m).max())) != 1:
            return Verdict(Component.NON_COXETER, regime_of_traces(tr.x, tr.y), False, tr,
                           float(discriminant(tr.x, tr.y)), math.nan)
        i, j = np.unravel_index(np.argmax(np.abs(m)), m.shape)
        bs.append(m[:, j] / m[i, j])
        gs.append(m[i, :])
    for i in range(3):
        for j in range(3):
            a[i, j] = gs[i] @ bs[j]
    return classify(sig, cartan.from_matrix(a, sig))


def classify_traces(sig: TriangleSignature, tr: TraceData, tol: float = 1e-9) -> bool:
    """The trace-only Anosov criterion.

    Anosov iff (i) t_k = c_k^2 - 1 for all k and x + t1 + t2 + t3 < 0, or
    (ii) all p_k odd, t_k = 1 - c_k for all k and delta(x, y) > 0, where
    c_k = 2 cos(pi/p_k).  Needs p_k >= 3.  Positivity of delta uses the same
    tolerance band as the Cartan-based verdict.
    """
    if min(sig.ps) < 3:
        raise errors.DomainError("the trace criterion needs all p_k >= 3")
    cs = [2.0 * math.cos(math.pi / p) for p in sig.ps]
    ts = (tr.t1, tr.t2, tr.t3)
    if all(abs(t - (ck * ck - 1.0)) < tol for t, ck in zip(ts, cs)):
        return bool(tr.x + tr.t1 + tr.t2 + tr.t3 < 0)
    if sig.all_odd and all(abs(t - (1.0 - ck)) < tol for t, ck in zip(ts, cs)):
        return regime_of_traces(tr.x, tr.y) is Regime.REAL_DISTINCT
    return False


# ---------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ("t", "t1", "t2", "t3", "x", "y", "u", "v", "delta", "regime", "anosov")


@dataclasses.dataclass(frozen=True)
class SweepRow:
    t: float
    traces: TraceData
    delta: float
    regime: Regime
    anosov: bool

    @property
    def reducible(self) -> bool:
        return abs(self.traces.x + self.traces.y + 2.0) < _tol.TOL.det


def sweep(sig: TriangleSignature, typ, ts) -> list[SweepRow]:
    """Classify the normal form along a list of parameters."""
    rows = []
    for t in ts:
        c = cartan.normal_form(sig, typ, float(t))
        tr = traces(c)
        regime = regime_of_traces(tr.x, tr.y)
        comp = _component(sig, c)
        anosov = comp is Component.HITCHIN or (
            comp is Component.BARBOT and regime is Regime.REAL_DISTINCT)
        rows.append(SweepRow(float(t), tr, float(discriminant(tr.x, tr.y)), regime, anosov))
    return rows


def fmt(v: float) -> str:
    return format(v, ".17g")


def sweep_csv(rows, header_lines=()) -> str:
    out = io.StringIO()
    for line in header_lines:
        out.write(f"# {line}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        tr = r.traces
        w.writerow([fmt(r.t), fmt(tr.t1), fmt(tr.t2), fmt(tr.t3), fmt(tr.x), fmt(tr.y),
                    fmt(tr.u), fmt(tr.v), fmt(r.delta), r.regime.value, str(r.anosov).lower()])
    return out.getvalue()


def non_anosov_interval(rows) -> tuple[float, float] | None:
    """Smallest and largest t among non-Anosov positive-t rows (None if all Anosov)."""
    bad = [r.t for r in rows if not r.anosov and r.t > 0]
    if not bad:
        return None
    return min(bad), max(bad)
