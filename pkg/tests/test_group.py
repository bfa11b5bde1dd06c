import numpy as np
import pytest
from hypothesis import given, strategies as st

from anosov_triangle import cartan, group, hyperbolic as hy

from conftest import ODD_SIGS, barbot_rep, sig_of

S = cartan.TriangleSignature
SIG = S(3, 3, 5)
words = st.text(alphabet="abc", max_size=40)


def test_reduce_involution():
    assert group.reduce("aa", SIG) == ""


def test_reduce_dihedral_relation():
    assert group.reduce("ab" * 5, SIG) == ""
    assert group.reduce("ba" * 5, SIG) == ""


def test_reduce_free_cancellation():
    assert group.reduce("bccba", SIG) == "a"


def test_cyclic_shift():
    assert group.cyclic_shift("abc", 1) == "bca"
    assert group.cyclic_shift("abcab", 0) == "abcab"
    w = "abacbcab"
    assert group.cyclic_shift(group.cyclic_shift(group.cyclic_shift(w, 1), 1), 1) == w


def test_alphabet_q_555():
    q = group.alphabets(S(5, 5, 5))[0]
    assert set(q.words) == {"b", "ab", "bab", "abab"}


def test_alphabet_sizes_335():
    q, q1, q2, t = group.alphabets(SIG)
    assert (len(q.words), len(q1.words), len(q2.words), len(t.words)) == (4, 2, 2, 16)


def test_t_bar_in_t():
    t = group.alphabets(SIG)[3]
    assert group.T_BAR in t.words
    rep = barbot_rep((3, 3, 5), 3.0)
    want = group.evaluate("ab", rep) @ group.evaluate("ca", rep) @ group.evaluate("bc", rep)
    assert np.allclose(group.evaluate(group.T_BAR, rep), want)
    assert np.allclose(want, np.linalg.matrix_power(group.evaluate("abc", rep), 2))


def test_evaluate_empty():
    assert np.array_equal(group.evaluate("", barbot_rep((3, 3, 5), 2.0)), np.eye(3))


def test_coxeter_element_at_t_red():
    from anosov_triangle import classify

    t = classify.t_red(SIG)
    vals = np.linalg.eigvals(group.evaluate("abc", barbot_rep((3, 3, 5), t)))
    vals = np.sort(vals.real)
    lam = -vals[0]
    assert lam > 1
    assert vals[1] == pytest.approx(-1, abs=1e-7)
    assert vals[2] == pytest.approx(1 / lam, rel=1e-7)


def test_elements_by_length_identity_layer():
    layers = group.elements_by_length(SIG, 3)
    assert layers[0] == [""]
    assert sorted(layers[1]) == ["a", "b", "c"]


@given(words, st.sampled_from(ODD_SIGS), st.floats(0.1, 10))
def test_reduce_idempotent_and_sound(w, ps, t):
    sig = sig_of(ps)
    r = group.reduce(w, sig)
    assert group.reduce(r, sig) == r
    assert len(r) <= len(w)
    rep = barbot_rep(ps, t)
    a, b = group.evaluate(w, rep, cache=None), group.evaluate(r, rep, cache=None)
    scale = max(1.0, np.max(np.abs(a)))
    assert np.max(np.abs(a - b)) <= 1e-9 * scale


@given(st.text(alphabet="abc", max_size=15), st.text(alphabet="abc", max_size=15))
def test_evaluate_homomorphism(v, w):
    rep = barbot_rep((3, 3, 5), 3.7)
    lhs = group.evaluate(v + w, rep)
    rhs = group.evaluate(v, rep) @ group.evaluate(w, rep)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(rhs)))


@pytest.mark.parametrize("ps", ODD_SIGS[:4])
def test_alphabets_subdivide_intervals(ps):
    sig = sig_of(ps)
    fuchs = hy.fuchsian(sig)
    ints = hy.intervals(fuchs)
    alph = group.alphabets(sig)
    for f in range(3):
        whole = ints.of_frame(f)
        nxt = ints.of_frame(hy.NEXT_FRAME[f])
        imgs = sorted((nxt.image(fuchs, w) for w in alph[f].words), key=lambda iv: whole.offset(iv.start))
        for iv in imgs:
            assert whole.contains_interval(iv)
            assert iv.length < whole.length - 1e-6
        # the images cover the interval (for odd orders the middle two overlap)
        tol = 1e3 * 1e-12
        assert abs(whole.offset(imgs[0].start)) < tol
        reach = 0.0
        for iv in imgs:
            assert whole.offset(iv.start) <= reach + tol
            reach = max(reach, whole.offset(iv.start) + iv.length)
        assert reach == pytest.approx(whole.length, abs=tol)
        # endpoints are z-points: compare with the subdivision built from them
        subs = dict(hy.subdivision(fuchs, f))
        for w in alph[f].words:
            iv, ref = nxt.image(fuchs, w), subs[w]
            assert abs(hy.wrap(iv.start - ref.start + 1) - 1) < tol
            assert abs(hy.wrap(iv.end - ref.end + 1) - 1) < tol
