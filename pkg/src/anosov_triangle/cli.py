"""Command-line front end.

Subcommands: classify, scan, goldman-plot, limit-curve, verify-boxes.  Every
file written carries a ``#`` header (``<!-- -->`` in SVG) listing the fully
resolved configuration, and all output is byte-for-byte deterministic.

Exit codes: 0 success (anosov / all checks pass), 1 negative outcome
(not anosov / some check fails), 2 invalid input.
"""

from __future__ import annotations

import argparse
import ast
import dataclasses
import math
import operator
import sys

import numpy as np

from . import boxes as bx
from . import cartan, classify, errors, hyperbolic, limitcurve
from . import projlin as pl
from . import tolerances as _tol
from .cartan import TriangleSignature

EXIT_OK, EXIT_NEGATIVE, EXIT_INVALID = 0, 1, 2

_DEFAULTS = {
    "component": "barbot",
    "type": None,
    "t": None,
    "t-min": None,
    "t-max": None,
    "steps": 1000,
    "depth": 30,
    "samples": 500,
    "seed": 0,
    "out": None,
    "allow-critical": False,
    "chart": "l2",
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one command (config file, then flags on top)."""

    command: str
    sig: TriangleSignature
    component: str | None
    q: tuple | None
    t: float | None
    t_text: str | None
    t_min: float | None
    t_max: float | None
    steps: int
    depth: int
    samples: int
    seed: int
    out: str | None
    allow_critical: bool
    chart: str
    tol: dict

    def rep_type(self) -> cartan.RepType:
        if self.q is not None:
            return cartan.rep_type(self.sig, self.q)
        if self.component == "hitchin":
            return cartan.hitchin_type(self.sig)
        return cartan.barbot_type(self.sig)

    def header_lines(self) -> list[str]:
        typ = self.rep_type()
        lines = [
            f"anosov_triangle {self.command}",
            "p = {},{},{}".format(*self.sig.ps),
            f"component = {self.component if self.q is None else 'explicit'}",
            "type = {},{},{}".format(*typ.q),
        ]
        if self.t is not None:
            lines.append(f"t = {classify.fmt(self.t)}" + (
                f" ({self.t_text})" if self.t_text and self.t_text != classify.fmt(self.t) else ""))
        if self.t_min is not None:
            lines += [f"t-min = {classify.fmt(self.t_min)}", f"t-max = {classify.fmt(self.t_max)}",
                      f"steps = {self.steps}"]
        lines += [f"depth = {self.depth}", f"samples = {self.samples}", f"seed = {self.seed}",
                  f"allow-critical = {str(self.allow_critical).lower()}", f"chart = {self.chart}"]
        tol = _tol.current()
        for f in dataclasses.fields(tol):
            lines.append(f"tol.{f.name} = {getattr(tol, f.name)!r}")
        return lines


# ---------------------------------------------------------------------------
# parsing

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv}


def parse_t(text: str, sig: TriangleSignature) -> float:
    """A number or an arithmetic expression in t_red and t_crit, e.g. 3*t_red or 1/(2*t_red)."""
    named = {"t_red": classify.t_red, "t_crit": classify.t_crit}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in named:
            return named[node.id](sig)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise errors.ConfigError(f"cannot read parameter {text!r}") from None
    if not math.isfinite(value):
        raise errors.ConfigError(f"parameter {text!r} is not finite")
    return value


def _triple(text: str, what: str) -> tuple:
    try:
        vals = tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise errors.ConfigError(f"{what} must be three comma-separated integers") from None
    if len(vals) != 3:
        raise errors.ConfigError(f"{what} must have three entries")
    return vals


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise errors.ConfigError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("_", "-") if not key.startswith("tol.") else key] = value
    return out


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("1", "true", "yes", "on"):
        return True
    if str(v).lower() in ("0", "false", "no", "off"):
        return False
    raise errors.ConfigError(f"not a boolean: {v!r}")


def resolve(command: str, args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and flags, and validate."""
    values = dict(_DEFAULTS)
    tol = {}
    if args.config:
        for k, v in read_config_file(args.config).items():
            if k.startswith("tol."):
                tol[k[4:]] = v
            elif k in values or k == "p":
                values[k] = v
            else:
                raise errors.ConfigError(f"unknown config key {k!r}")
    for key in ("p", "component", "type", "t", "t-min", "t-max", "steps", "depth", "samples",
                "seed", "out", "chart"):
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            values[key] = v
    if getattr(args, "allow_critical", False):
        values["allow-critical"] = True
    if "p" not in values or values["p"] is None:
        raise errors.ConfigError("--p is required")
    sig = TriangleSignature(*_triple(values["p"], "--p"))
    names = {f.name for f in dataclasses.fields(_tol.Tolerances)}
    tol_vals = {}
    for k, v in tol.items():
        if k not in names:
            raise errors.ConfigError(f"unknown tolerance {k!r}")
        tol_vals[k] = float(v)
    comp = values["component"]
    if comp not in ("hitchin", "barbot"):
        raise errors.ConfigError("--component must be hitchin or barbot")
    q = _triple(values["type"], "--type") if values["type"] is not None else None
    t_text = None if values["t"] is None else str(values["t"])
    t = None if t_text is None else parse_t(t_text, sig)
    t_min = None if values["t-min"] is None else parse_t(str(values["t-min"]), sig)
    t_max = None if values["t-max"] is None else parse_t(str(values["t-max"]), sig)
    ints = {}
    for key in ("steps", "depth", "samples", "seed"):
        try:
            ints[key] = int(values[key])
        except (TypeError, ValueError):
            raise errors.ConfigError(f"--{key} must be an integer") from None
    if ints["steps"] < 1 or ints["depth"] < 1 or ints["samples"] < 4:
        raise errors.ConfigError("steps and depth must be positive, samples at least 4")
    cfg = RunConfig(command, sig, comp, q, t, t_text, t_min, t_max, ints["steps"], ints["depth"],
                    ints["samples"], ints["seed"], values["out"], _bool(values["allow-critical"]),
                    str(values["chart"]), tol_vals)
    cfg.rep_type()  # type must exist for the signature
    return cfg


# ---------------------------------------------------------------------------
# output helpers


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _rep(cfg: RunConfig, t: float | None = None) -> cartan.CoxeterRep:
    t = cfg.t if t is None else t
    return cartan.build_representation(cartan.normal_form(cfg.sig, cfg.rep_type(), t))


def _require_t(cfg: RunConfig) -> float:
    if cfg.t is None:
        raise errors.ConfigError("--t is required")
    return cfg.t


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg: RunConfig) -> int:
    t = _require_t(cfg)
    c = cartan.normal_form(cfg.sig, cfg.rep_type(), t)
    v = classify.classify(cfg.sig, c)
    tr = v.traces
    f = classify.fmt
    lines = [
        f"component: {v.component.value}",
        f"t: {f(t)}",
        f"traces: t1={f(tr.t1)} t2={f(tr.t2)} t3={f(tr.t3)} x={f(tr.x)} y={f(tr.y)}",
        f"delta: {f(v.delta)}",
        f"regime: {v.eigen_regime.value}",
        f"t_crit: {'n/a' if v.t_crit is None else f(v.t_crit)}",
        f"t_red: {'n/a' if v.t_red is None else f(v.t_red)}",
        f"reducible: {str(v.reducible).lower()}",
        f"anosov: {str(v.anosov).lower()}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if v.anosov else EXIT_NEGATIVE


def _grid(cfg: RunConfig) -> np.ndarray:
    if cfg.t_min is None or cfg.t_max is None:
        raise errors.ConfigError("--t-min and --t-max are required")
    if not cfg.t_min < cfg.t_max:
        raise errors.ConfigError("need t-min < t-max")
    return np.linspace(cfg.t_min, cfg.t_max, cfg.steps)


def cmd_scan(cfg: RunConfig) -> int:
    ts = _grid(cfg)
    rows = classify.sweep(cfg.sig, cfg.rep_type(), ts)
    summary = []
    bad = classify.non_anosov_interval(rows)
    if bad is None:
        summary.append("non-anosov samples: none")
    else:
        summary.append(f"non-anosov samples: [{classify.fmt(bad[0])}, {classify.fmt(bad[1])}]")
    flips = [(a.t, b.t) for a, b in zip(rows, rows[1:]) if a.anosov != b.anosov]
    for a, b in flips:
        summary.append(f"verdict change between t = {classify.fmt(a)} and {classify.fmt(b)}")
    if cfg.sig.all_odd and cfg.rep_type().q == cartan.barbot_type(cfg.sig).q:
        tc = classify.t_crit(cfg.sig)
        summary.append(f"non-anosov interval: [{classify.fmt(1.0 / tc)}, {classify.fmt(tc)}]")
        summary.append(f"t_red: {classify.fmt(classify.t_red(cfg.sig))}")
    for r in rows:
        if r.reducible:
            summary.append(f"reducible row: t = {classify.fmt(r.t)}")
    text = classify.sweep_csv(rows, cfg.header_lines())
    text += "".join(f"# {s}\n" for s in summary)
    _emit(text, cfg.out)
    if cfg.out is not None:
        sys.stdout.write("\n".join(summary) + "\n")
    return EXIT_OK


GOLDMAN_COLUMNS = ("u", "f", "g_plus", "g_minus")


def cmd_goldman(cfg: RunConfig) -> int:
    if not cfg.sig.all_odd:
        raise errors.EvenSignature("the Barbot curve f needs all orders odd")
    lo = -1.5 if cfg.t_min is None else cfg.t_min
    g = classify.goldman_curves(cfg.sig, lo, cfg.t_max, cfg.steps)
    f = classify.fmt
    out = [f"# {h}" for h in cfg.header_lines()]
    fm = classify.f_curve(cfg.sig, np.array([g.u_minus, g.u_plus]))
    out.append(f"# u_minus = {f(g.u_minus)}  f(u_minus) = {f(float(fm[0]))}")
    out.append(f"# u_plus = {f(g.u_plus)}  f(u_plus) = {f(float(fm[1]))}")
    out.append(",".join(GOLDMAN_COLUMNS))
    for row in zip(g.u, g.f, g.g_plus, g.g_minus):
        out.append(",".join(f(float(v)) for v in row))
    _emit("\n".join(out) + "\n", cfg.out)
    return EXIT_OK


# SVG rendering ---------------------------------------------------------------

SVG_MARGIN = 0.9  # fitted content spans [-0.9, 0.9]
SVG_FAR = 100.0  # off-screen polyline points are capped at this radius


def _svg_num(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


def chart_line(curve: limitcurve.Curve, choice: str) -> np.ndarray:
    """The chart line named by ``choice``: l2 (box chart), auto, or explicit a,b,c."""
    if choice == "l2" and curve.chart is not None:
        return pl.unit(curve.chart)
    if choice in ("l2", "auto"):
        # covector averaging the lifted curve; every sample is on its positive side
        # when the curve lies in an affine chart
        return pl.unit(np.sum(curve.lifted, axis=0))
    try:
        vals = np.array([float(v) for v in choice.split(",")])
    except ValueError:
        raise errors.ConfigError(f"bad chart {choice!r}") from None
    if vals.shape != (3,):
        raise errors.ConfigError("chart needs three coordinates")
    return pl.unit(vals)


@dataclasses.dataclass(frozen=True)
class SvgCurve:
    text: str
    arcs: int
    crossings: int


def render_svg(curve: limitcurve.Curve, line: np.ndarray, header_lines=(), closes=None) -> SvgCurve:
    """Polylines of xi^(1) in the affine chart of ``line``.

    The curve is split wherever the lifted samples change side of the chart
    line; the count of such changes, wrap-around included, is reported as
    crossings (odd exactly when the curve is not null-homotopic).  Points are
    centred and scaled to fit [-0.9, 0.9]; when the curve crosses the chart
    line only the nearer 90% are fitted and arcs through infinity leave the
    viewBox.  Circles mark error radii that are visible.
    """
    rot = pl.chart_rotation(line)
    lifted = np.asarray(curve.lifted)
    sides = lifted @ line
    n = len(lifted)
    closes = curve.diagnostics.lift_closes if closes is None else closes
    wrap_side = sides[0] if closes else -sides[0]
    nxt = np.append(sides[1:], wrap_side)
    cross = int(np.sum(np.sign(sides) != np.sign(nxt)))
    xy = pl.to_chart(rot, lifted)
    r = np.hypot(xy[:, 0], xy[:, 1])
    finite = np.isfinite(r)
    if cross:
        # arcs through infinity: fit the nearer 90% of the samples
        pts = xy[finite][r[finite] <= np.quantile(r[finite], 0.9)]
    else:
        pts = xy[finite]
    center = 0.5 * (pts.max(axis=0) + pts.min(axis=0))
    span = float(np.max(np.abs(pts - center))) or 1.0
    scale = SVG_MARGIN / span
    # split into arcs at side changes (the wrap joins the last arc to the first)
    arcs, cur = [], [0]
    for i in range(1, n):
        if np.sign(sides[i]) != np.sign(sides[i - 1]):
            arcs.append(cur)
            cur = []
        cur.append(i)
    joined = np.sign(wrap_side) == np.sign(sides[n - 1])
    if arcs and joined:
        arcs[0] = cur + arcs[0]
    elif not arcs and joined:
        arcs.append(cur + [0])  # one closed polyline
    else:
        arcs.append(cur)
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    out.append("<!--")
    out += [f"  {h.replace('--', '-')}" for h in header_lines]
    out.append(f"  chart line = {', '.join(_svg_num(v) for v in line)}")
    out.append(f"  chart crossings = {cross}")
    out.append("-->")
    out.append('<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1 -1 2 2" width="600" height="600">')
    out.append('<rect x="-1" y="-1" width="2" height="2" fill="white"/>')
    for arc in arcs:
        coords = (xy[arc] - center) * scale
        # points near the chart line run off to huge coordinates; pull them
        # radially onto a far circle so the digits stay stable
        rr = np.hypot(coords[:, 0], coords[:, 1])
        far = rr > SVG_FAR
        coords[far] *= (SVG_FAR / rr[far])[:, None]
        pts_txt = " ".join(f"{_svg_num(x)},{_svg_num(-y)}" for x, y in coords)
        out.append(f'<polyline fill="none" stroke="black" stroke-width="0.004" points="{pts_txt}"/>')
    for k, s in enumerate(curve.samples):
        x, y = (xy[k] - center) * scale
        # projective radius to chart length: d(chart)/d(angle) is about 1 + |z|^2
        rad = s.diam1 * (1.0 + float(xy[k] @ xy[k])) * scale
        if rad >= 2e-3 and abs(x) < 1 and abs(y) < 1:
            out.append(f'<circle cx="{_svg_num(x)}" cy="{_svg_num(-y)}" r="{_svg_num(min(rad, 0.2))}" '
                       'fill="none" stroke="red" stroke-width="0.002"/>')
    out.append("</svg>")
    return SvgCurve("\n".join(out) + "\n", len(arcs), cross)


def _out_paths(out: str | None) -> tuple[str | None, str | None]:
    if out is None:
        return None, None
    stem = out[:-4] if out.endswith((".csv", ".svg")) else out
    return stem + ".csv", stem + ".svg"


def cmd_limit_curve(cfg: RunConfig) -> int:
    t = _require_t(cfg)
    rep = _rep(cfg, t)
    curve = limitcurve.sample_curve(rep, cfg.samples, cfg.depth, allow_critical=cfg.allow_critical)
    header = cfg.header_lines() + [f"method = {curve.method}"]
    csv_path, svg_path = _out_paths(cfg.out)
    line = chart_line(curve, cfg.chart)
    svg = render_svg(curve, line, header)
    _emit(limitcurve.curve_csv(curve.samples, header), csv_path)
    if svg_path is not None:
        _emit(svg.text, svg_path)
    d = curve.diagnostics
    f = classify.fmt
    lines = [
        f"method: {curve.method}",
        f"max_diam1: {f(d.max_diam1)}",
        f"max_diam2: {f(d.max_diam2)}",
        f"max_incidence: {f(d.max_incidence)}",
        f"equivariance_residual: {f(d.equivariance_residual)}",
        f"min_pair_separation: {f(d.min_pair_separation)}",
        f"min_transversality: {f(d.min_transversality)}",
        f"min_nesting_margin: {f(d.min_nesting_margin)}",
        f"interval_pattern_violations: {d.interval_pattern_violations} of {d.interval_pairs_flagged}",
        f"lift_closes: {str(d.lift_closes).lower()}",
        f"chart_crossings: {svg.crossings}",
        f"arcs: {svg.arcs}",
    ]
    (sys.stderr if csv_path is None else sys.stdout).write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify_boxes(cfg: RunConfig) -> int:
    t = _require_t(cfg)
    if not cfg.sig.all_odd:
        raise errors.EvenSignature("boxes need all orders odd")
    if cfg.q is not None and cfg.q != cartan.barbot_type(cfg.sig).q or cfg.component != "barbot":
        raise errors.NotBarbotType("verify-boxes needs the Barbot component")
    if t <= 0:
        raise errors.ConfigError("t must be positive")
    perm = bx.working_permutation(cfg.sig, t)
    work = _rep(cfg, t).permuted(perm)
    header = cfg.header_lines() + [
        "working labelling = {},{},{} (new s_k = old s_perm[k], perm = {},{},{})".format(
            *work.sig.ps, *perm),
        f"working t = {classify.fmt(work.cartan.t)}",
    ]
    try:
        # inside the non-Anosov interval the Coxeter element has no real
        # attracting eigenvector and the boxes do not exist: a negative outcome
        bcfg = bx.build_config(work)
        order = bx.ordering_check(bcfg, raise_on_failure=False)
        report = bx.verify_inclusions(bcfg, seed=cfg.seed)
    except (errors.DegenerateConic, errors.OrderViolation, errors.ChartCrossing,
            errors.PointOnChartLine, errors.ComplexCoxeter) as exc:
        text = "".join(f"# {h}\n" for h in header) + f"# failed: {type(exc).__name__}: {exc}\n"
        _emit(text, cfg.out)
        sys.stderr.write(f"box construction failed: {exc}\n")
        return EXIT_NEGATIVE
    header.append(f"ordering = {'ok' if order.ok else 'violated'}")
    header.append(f"min margin = {classify.fmt(report.min_margin)}")
    _emit(report.to_table(header), cfg.out)
    ok = report.passed and order.ok
    summary = f"{len(report.rows)} rows, {len(report.failures())} failures, min margin {classify.fmt(report.min_margin)}"
    (sys.stdout if cfg.out is not None else sys.stderr).write(summary + "\n")
    return EXIT_OK if ok else EXIT_NEGATIVE


COMMANDS = {
    "classify": cmd_classify,
    "scan": cmd_scan,
    "goldman-plot": cmd_goldman,
    "limit-curve": cmd_limit_curve,
    "verify-boxes": cmd_verify_boxes,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anosov-triangle",
                                     description="Anosov Coxeter representations of triangle groups")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--p", help="orders P1,P2,P3")
        p.add_argument("--component", choices=("hitchin", "barbot"))
        p.add_argument("--type", help="explicit type Q1,Q2,Q3")
        p.add_argument("--t", help="parameter: a number or an expression in t_red, t_crit (e.g. 3*t_red, 1/(2*t_red))")
        p.add_argument("--t-min")
        p.add_argument("--t-max")
        p.add_argument("--steps", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--allow-critical", action="store_true")
        p.add_argument("--chart", help="l2, auto or a,b,c")
        p.add_argument("--config", help="key = value file; flags override it")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        with _tol.overridden(**cfg.tol):
            return COMMANDS[args.command](cfg)
    except errors.NotInBarbotRange as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except (errors.TriangleRepError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
