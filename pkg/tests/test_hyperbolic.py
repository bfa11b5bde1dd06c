import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anosov_triangle import cartan, errors, group, hyperbolic as hy

from conftest import ODD_SIGS, sig_of

S = cartan.TriangleSignature
SIG = S(3, 3, 5)
FU = hy.fuchsian(SIG)


def ang_dist(a, b):
    d = hy.wrap(a - b)
    return min(d, hy.TWO_PI - d)


def word_matrix(letters):
    m = np.eye(3)
    for w in letters:
        m = m @ group.evaluate(w, FU)
    return m


@pytest.mark.parametrize("ps", ODD_SIGS + [(2, 3, 7), (4, 4, 4)])
def test_fuchsian_pair_traces(ps):
    fu = hy.fuchsian(sig_of(ps))
    for k, (i, j) in enumerate(((1, 2), (2, 0), (0, 1))):
        c = 2 * math.cos(math.pi / ps[k])
        assert np.trace(fu.gens[i] @ fu.gens[j]) == pytest.approx(c * c - 1, abs=1e-12)


def test_fuchsian_rotation_orders():
    for (x, y), p in zip((("b", "c"), ("c", "a"), ("a", "b")), (3, 3, 5)):
        m = np.linalg.matrix_power(group.evaluate(x + y, FU), p)
        assert np.max(np.abs(m - np.eye(3))) < 1e-7


def test_fuchsian_form_signature():
    vals = np.linalg.eigvalsh(FU.form)
    assert (vals > 0).sum() == 2 and (vals < 0).sum() == 1
    for g in FU.gens:
        assert np.allclose(g.T @ FU.form @ g, FU.form, atol=1e-12)


def test_fixed_points_z0_z2():
    z = hy.z_points(FU)
    assert ang_dist(hy.boundary_fixed_points(FU, "abc")[0], z[0]) < 1e-12
    assert ang_dist(hy.boundary_fixed_points(FU, "cab")[0], z[2]) < 1e-12


def test_fixed_points_elliptic_raises():
    with pytest.raises(errors.NotHyperbolic):
        hy.boundary_fixed_points(FU, "ab")


@given(st.text(alphabet="abc", max_size=6))
def test_fixed_points_conjugation(g):
    w = "abc"
    conj = g + w + group.inverse(g)
    att, rep = hy.boundary_fixed_points(FU, conj)
    a0, r0 = hy.boundary_fixed_points(FU, w)
    assert ang_dist(att, FU.act_word(g, a0)) < 1e-8
    assert ang_dist(rep, FU.act_word(g, r0)) < 1e-8


def test_z_points_rotation():
    z = hy.z_points(FU)
    n = len(z)
    for i in range(n):
        assert ang_dist(FU.act_word("ab", z[i]), z[(i - 2) % n]) < 1e-12


def test_z_points_cyclic_order():
    z = hy.z_points(FU)
    assert z[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(z) > 0)


@pytest.mark.parametrize("ps", [(3, 3, 5), (5, 5, 5), (3, 5, 7)])
def test_t_images_strictly_inside(ps):
    sig = sig_of(ps)
    fu = hy.fuchsian(sig)
    whole = hy.intervals(fu).I
    fixing = set()
    for w in set(group.alphabets(sig)[3].words):
        iv = whole.image(fu, w)
        assert whole.contains_interval(iv)
        assert iv.length < whole.length - 1e-9
        if any(ang_dist(fu.act_word(w, e), e) < 1e-9 for e in (whole.start, whole.end)):
            fixing.add(group.reduce(w, sig))
    assert fixing == {group.reduce(group.T_BAR, sig)}


def test_k_inside_j():
    ints = hy.intervals(FU)
    for k, j in ((ints.K, ints.J), (ints.K1, ints.J1), (ints.K2, ints.J2)):
        assert j.contains_interval(k)


def test_code_of_z0_is_t_bar_block():
    z = hy.z_points(FU)
    c = hy.code(FU, z[0], 15)
    assert c.start_frame == 0
    assert "".join(c.letters[-6:]) == group.T_BAR * 2 or "".join(c.letters[-3:]) == group.T_BAR
    assert c.letters[-3:] == ("ab", "ca", "bc")


def test_code_first_letter():
    sub = dict(hy.subdivision(FU, 0))
    i2 = hy.intervals(FU).I2
    for w in group.alphabets(SIG)[0].words:
        x = FU.act_word(w, hy.wrap(i2.start + 0.37 * i2.length))
        assert sub[w].contains(x)
        assert hy.code(FU, x, 3).letters[0] == w


@settings(max_examples=25)
@given(st.floats(0, hy.TWO_PI, exclude_max=True), st.integers(1, 25))
def test_code_validated(x, depth):
    c = hy.code(FU, x, depth)
    assert min(c.margins) >= -1e-12
    assert len(c.letters) == depth


def test_quasigeodesic_growth():
    rng = np.random.default_rng(3)
    o = FU.origin
    for x in rng.uniform(0, hy.TWO_PI, 5):
        c = hy.code(FU, float(x), 60)
        d, m = [], np.eye(3)
        for w in c.letters:
            m = m @ group.evaluate(w, FU)
            # <go, go> = <o, o> = -1 exactly, so only the cross term is needed
            d.append(math.acosh(max(1.0, abs(float(o @ FU.form @ (m @ o))))))
        slope = np.polyfit(np.arange(1, 61), d, 1)[0]
        assert slope > 0


def test_orbit_converges_to_point():
    rng = np.random.default_rng(4)
    o = FU.origin
    for x in rng.uniform(0, hy.TWO_PI, 100):
        c = hy.code(FU, float(x), 60)
        m = word_matrix(c.letters)
        assert ang_dist(FU.angle(m @ o), float(x)) < 1e-6


def test_subdivision_endpoints_exact():
    ints = hy.intervals(FU)
    for f in range(3):
        z = hy.z_points(FU, f)
        nxt = ints.of_frame(hy.NEXT_FRAME[f])
        for w, iv in hy.subdivision(FU, f):
            img = nxt.image(FU, w)
            assert ang_dist(img.start, iv.start) < 1e-12 * 1e3
            assert ang_dist(img.end, iv.end) < 1e-12 * 1e3
            assert min(ang_dist(iv.start, zz) for zz in z) < 1e-12 * 1e3


def test_ray_word_lands_in_chamber():
    w = hy.ray_word(FU, 1.0, 8.0)
    assert len(group.reduce(w, SIG)) == len(w)
    # the moved chamber contains the ray point, so the word's fixed direction drifts to theta
    w_long = hy.ray_word(FU, 1.0, 25.0)
    m = group.evaluate(w_long, FU)
    assert ang_dist(FU.angle(m @ FU.origin), 1.0) < 1e-3
