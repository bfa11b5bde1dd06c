import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anosov_triangle import cartan, classify, group, projlin as pl

from conftest import ODD_SIGS, barbot_rep, sig_of

S = cartan.TriangleSignature
SIG = S(3, 3, 5)
Regime = classify.Regime
EIG_KIND = {"distinct-real": Regime.REAL_DISTINCT, "complex": Regime.COMPLEX_PAIR,
            "repeated": Regime.DOUBLE_NONDIAGONALIZABLE, "defective": Regime.DOUBLE_NONDIAGONALIZABLE}


def quadratic_t_red(sig):
    """Larger root of c (t + 1/t) = 8 - 2 sum c_k^2, the vanishing of det of the normal form."""
    cs = cartan.barbot_type(sig).c
    c = cs[0] * cs[1] * cs[2]
    s = (8 - 2 * sum(v * v for v in cs)) / c
    return (s + math.sqrt(s * s - 4)) / 2


def bisect_t_crit(sig, lo=1.0, hi=None):
    hi = hi or quadratic_t_red(sig)
    f = lambda t: float(classify.barbot_delta(sig, t))
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_traces_hitchin_335():
    c = cartan.normal_form(SIG, (1, 1, 1), 1.0)
    tr = classify.traces(c)
    assert tr.t1 == pytest.approx(0, abs=1e-12) and tr.t2 == pytest.approx(0, abs=1e-12)
    assert tr.t3 == pytest.approx((2 * math.cos(math.pi / 5)) ** 2 - 1)
    assert tr.t3 == pytest.approx(1.618034, abs=1e-6)


def test_traces_barbot_335():
    tr = classify.traces(cartan.normal_form(SIG, cartan.barbot_type(SIG), 2.0))
    assert tr.t1 == pytest.approx(0, abs=1e-12) and tr.t2 == pytest.approx(0, abs=1e-12)
    assert tr.t3 == pytest.approx(1 - 2 * math.cos(math.pi / 5))
    assert tr.t3 == pytest.approx(-0.618034, abs=1e-6)


def test_traces_reducible_sum():
    tr = classify.traces(cartan.normal_form(SIG, cartan.barbot_type(SIG), classify.t_red(SIG)))
    assert tr.x + tr.y == pytest.approx(-2, abs=1e-9)


def test_discriminant_values():
    assert classify.discriminant(3, 3) == pytest.approx(0, abs=1e-12)
    assert classify.discriminant(0, 0) == pytest.approx(-27)
    assert classify.barbot_delta(SIG, classify.t_red(SIG)) > 0


def test_goldman_roots():
    for ps in ODD_SIGS:
        sig = sig_of(ps)
        um, up = classify.u_pm(sig)
        assert abs(classify.f_curve(sig, um)) < 1e-12
        assert abs(classify.f_curve(sig, up)) < 1e-12


def test_goldman_g_plus_at_branch_point():
    assert classify.g_curve(-1.5, +1) == pytest.approx(-27 / 4)
    assert classify.g_curve(-1.5, -1) == pytest.approx(-27 / 4)


def test_goldman_555_roots_ordered():
    um, up = classify.u_pm(S(5, 5, 5))
    assert 0 <= um < up < 3


def test_goldman_curves_shape():
    g = classify.goldman_curves(SIG, n=101)
    assert len(g.u) == len(g.f) == len(g.g_plus) == len(g.g_minus) == 101


@pytest.mark.parametrize("ps", ODD_SIGS)
def test_t_crit_defining_equation(ps):
    sig = sig_of(ps)
    tc = classify.t_crit(sig)
    assert abs(classify.barbot_delta(sig, tc)) < 1e-10 * max(1.0, abs(classify.barbot_delta(sig, 1.0)))
    assert 1 < tc < classify.t_red(sig)
    assert tc == pytest.approx(bisect_t_crit(sig), rel=1e-12)


@pytest.mark.parametrize("ps", ODD_SIGS)
def test_t_red_quadratic_oracle(ps):
    sig = sig_of(ps)
    assert classify.t_red(sig) == pytest.approx(quadratic_t_red(sig), rel=1e-12)


def test_t_red_335_value():
    # the determinant condition puts t_red near 5.0376; 2.8901 solves c (t + 1/t) = 2 instead
    assert classify.t_red(SIG) == pytest.approx(5.037559141801555, rel=1e-12)
    c = cartan.barbot_type(SIG).c
    c = c[0] * c[1] * c[2]
    alt = (2 / c + math.sqrt((2 / c) ** 2 - 4)) / 2
    assert alt == pytest.approx(2.8901, abs=1e-4)
    assert abs(np.linalg.det(cartan.normal_form(SIG, cartan.barbot_type(SIG), alt).a)) > 0.1


def test_t_red_reciprocal_roots():
    t = classify.t_red(SIG)
    a = cartan.normal_form(SIG, cartan.barbot_type(SIG), 1 / t).a
    assert abs(np.linalg.det(a)) < 1e-9


def test_det_vanishes_at_t_red():
    a = cartan.normal_form(SIG, cartan.barbot_type(SIG), classify.t_red(SIG)).a
    assert abs(np.linalg.det(a)) < 1e-9


def test_classify_examples():
    v = classify.classify(SIG, cartan.normal_form(SIG, (1, 1, 1), 1.0))
    assert v.anosov and v.component is classify.Component.HITCHIN
    v = classify.classify(SIG, cartan.normal_form(SIG, cartan.barbot_type(SIG), 1.0))
    assert not v.anosov and v.eigen_regime is Regime.COMPLEX_PAIR
    v = classify.classify(SIG, cartan.normal_form(SIG, cartan.barbot_type(SIG), classify.t_crit(SIG)))
    assert not v.anosov and v.eigen_regime is Regime.DOUBLE_NONDIAGONALIZABLE


def test_classify_444_only_hitchin():
    sig = S(4, 4, 4)
    for q in itertools.product((1, 2), repeat=3):
        ts = (0.3, 1.0, 3.0) if 2 not in q else (None,)
        for t in ts:
            v = classify.classify(sig, cartan.normal_form(sig, q, t))
            assert v.anosov == (q == (1, 1, 1))


def test_negative_parameter_complex():
    for ps in ODD_SIGS:
        sig = sig_of(ps)
        for t in (-0.2, -1.0, -7.0):
            v = classify.classify(sig, cartan.normal_form(sig, cartan.barbot_type(sig), t))
            assert v.eigen_regime is Regime.COMPLEX_PAIR and not v.anosov


def test_coxeter_eigenvalue_minus_one_at_t_red():
    for ps in ODD_SIGS:
        t = classify.t_red(sig_of(ps))
        vals = np.linalg.eigvals(group.evaluate("abc", barbot_rep(ps, t)))
        assert np.min(np.abs(vals + 1)) < 1e-7


@pytest.mark.parametrize("ps", ODD_SIGS[:5])
def test_sweep_sign_changes_at_critical(ps):
    sig = sig_of(ps)
    tc, tr = classify.t_crit(sig), classify.t_red(sig)
    ts = np.linspace(0, 4 * tr, 10001)[1:]
    rows = classify.sweep(sig, cartan.barbot_type(sig), ts)
    band = lambda t: min(abs(t * tc - 1), abs(t / tc - 1)) < 1e-6
    delta = np.array([r.delta for r in rows])
    flips = np.nonzero(np.diff(np.sign(delta)))[0]
    assert len(flips) == 2
    assert ts[flips[0]] <= 1 / tc <= ts[flips[0] + 1]
    assert ts[flips[1]] <= tc <= ts[flips[1] + 1]
    for t, r in zip(ts, rows):
        if band(t):
            continue
        assert r.anosov == (t < 1 / tc or t > tc)


@pytest.mark.parametrize("ps", [(3, 3, 5), (5, 5, 5)])
def test_eig3_regime_matches_delta(ps):
    sig = sig_of(ps)
    tc = classify.t_crit(sig)
    ts = np.geomspace(0.01, 30, 1500)
    for t in ts:
        if min(abs(t * tc - 1), abs(t / tc - 1)) < 1e-6:
            continue
        v = classify.classify(sig, cartan.normal_form(sig, cartan.barbot_type(sig), float(t)))
        kind = pl.eig3(group.evaluate("abc", barbot_rep(ps, float(t)), cache=None)).kind
        assert EIG_KIND[kind] is v.eigen_regime


@given(st.sampled_from(ODD_SIGS + [(4, 4, 4), (2, 3, 7), (3, 4, 5)]), st.data())
def test_det_equals_trace_sum(ps, data):
    sig = sig_of(ps)
    q = tuple(data.draw(st.integers(1, max(1, (p - 1) // 2))) for p in ps)
    t = data.draw(st.floats(0.05, 20) | st.floats(-20, -0.05))
    c = cartan.normal_form(sig, q, t)
    tr = classify.traces(c)
    assert np.linalg.det(c.a) == pytest.approx(tr.x + tr.y + 2, abs=1e-9 * max(1, abs(tr.x) + abs(tr.y)))


def test_sweep_csv_columns():
    rows = classify.sweep(SIG, cartan.barbot_type(SIG), [0.5, 1.0, 6.0])
    text = classify.sweep_csv(rows)
    header = [l for l in text.splitlines() if not l.startswith("#")][0]
    assert tuple(header.split(",")) == classify.SWEEP_COLUMNS


def test_non_anosov_interval_brackets():
    tc = classify.t_crit(SIG)
    rows = classify.sweep(SIG, cartan.barbot_type(SIG), np.linspace(0.01, 10, 1000))
    lo, hi = classify.non_anosov_interval(rows)
    assert lo <= 1 / tc + 0.01 and lo >= 1 / tc - 0.011
    assert tc - 0.011 <= hi <= tc + 0.011
