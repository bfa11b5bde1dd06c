import itertools

import numpy as np
import pytest

from anosov_triangle import boxes as bx, cartan, classify, errors, group, projlin as pl
from anosov_triangle import tolerances as _tol

from conftest import barbot_rep, sig_of

S = cartan.TriangleSignature
EPS = _tol.TOL.inc


def working_config(ps, t):
    sig = sig_of(ps)
    perm = bx.working_permutation(sig, t)
    return bx.build_config(barbot_rep(ps, t).permuted(perm))


def t_grid(ps):
    sig = sig_of(ps)
    tc, tr = classify.t_crit(sig), classify.t_red(sig)
    return [1.01 * tc, tr, 3 * tr]


@pytest.fixture(scope="module")
def cfg555():
    return working_config((5, 5, 5), 3 * classify.t_red(S(5, 5, 5)))


def test_primed_w0_is_w3(cfg555):
    f0, f1, _ = cfg555.frames
    assert pl.proj_distance(f1.wi(0), f0.wi(3)) < 1e-12
    assert pl.proj_distance(f0.wi(3), f0.gens[0] @ f0.wi(0)) < 1e-12


def test_double_primed_w0_is_w2(cfg555):
    f0, _, f2 = cfg555.frames
    assert pl.proj_distance(f2.wi(0), f0.wi(2)) < 1e-12
    ba = f0.gens[1] @ f0.gens[0]
    assert pl.proj_distance(f0.wi(2), ba @ f0.wi(0)) < 1e-12


def test_conics_meet_in_four_orbit_points(cfg555):
    f0, f1, _ = cfg555.frames
    on_both = [i for i in range(f0.n)
               if abs(pl.unit(f0.wi(i)) @ f1.conic.form @ pl.unit(f0.wi(i))) < _tol.TOL.conic]
    assert on_both == [0, 2, 3, 5]


@pytest.mark.parametrize("ps", [(3, 3, 5), (5, 5, 5), (5, 3, 3)])
def test_ordering_at_t_red(ps):
    cfg = working_config(ps, classify.t_red(sig_of(ps)))
    o = bx.ordering_check(cfg)
    n = cfg.frames[0].n
    want = tuple(f"{k}{i % n}" for k, i in zip("wuuwwuuw", range(8)))
    assert o.sequence[:8] == want
    assert o.matches and o.ok


def test_ordering_mobius_memberships(cfg555):
    o = bx.ordering_check(cfg555)
    assert o.u0_in_mobius_prime and o.u0_dprime_in_mobius and o.cu0_in_mobius
    assert o.crossings_ok


def test_box_membership_pattern(cfg555):
    f0 = cfg555.frames[0]
    box = bx.build_box(cfg555)
    n = f0.n
    for i in range(-4, n - 4):
        m = box.margin(f0.wi(i))
        if i not in (1, 2):
            assert m >= -EPS
        if i not in (-2, 0, 1, 2, 3, 5):
            assert m > 0
        if i not in (-1, 0, 1, 2, 3, 4):
            assert box.margin(f0.ui(i)) > 0


def test_box_invariant_under_a(cfg555):
    box = bx.build_box(cfg555)
    assert box.invariance_residual < 1e-9
    a = cfg555.frames[0].gens[0]
    moved = [a @ v for v in box.vertices]
    for v in moved:
        assert min(pl.proj_distance(v, w) for w in box.vertices) < 1e-9


def test_verify_555(cfg555):
    r = bx.verify_inclusions(cfg555)
    assert r.passed
    assert r.triples_checked == r.triples_total


def test_verify_533_two_letter_branch():
    sig = S(5, 3, 3)
    r = bx.verify_inclusions(working_config((5, 3, 3), classify.t_red(sig)))
    assert r.passed
    assert r.by_check("two-letter") and r.by_check("two-letter-points")


def test_exceptional_word_touches_l0(cfg555):
    r = bx.verify_inclusions(cfg555)
    rows = r.by_check("t-exceptional")
    assert {row.relation for row in rows} == {"subset", "touches-line"}
    for row in rows:
        assert row.word.startswith(group.T_BAR)
        assert abs(row.margin) < EPS


def test_shrink_first_diameter(cfg555):
    box = bx.build_box(cfg555)
    sh = bx.intersection_shrink(cfg555, box)
    assert sh.diameters[0] == pytest.approx(box.diameter)


def test_shrink_ratio_matches_eigenvalues(cfg555):
    sh = bx.intersection_shrink(cfg555)
    e = np.sort(np.abs(np.linalg.eigvals(cfg555.word(group.T_BAR))))
    assert sh.ratios[3] == pytest.approx(e[1] / e[2], rel=0.05)
    assert max(sh.ratios[1:4]) < 1


def test_shrink_limit_is_w0(cfg555):
    sh = bx.intersection_shrink(cfg555)
    assert pl.proj_distance(sh.limit_point, cfg555.frames[0].wi(0)) < 1e-9
    assert sh.limit_residual < 1e-9


@pytest.mark.parametrize("ps", [(3, 3, 5), (3, 5, 5), (5, 5, 5), (3, 3, 7), (5, 3, 3)])
def test_config_residuals(ps):
    for t in t_grid(ps):
        assert working_config(ps, t).max_residual < 1e-8


@pytest.mark.parametrize("ps", [(3, 3, 5), (5, 5, 5), (3, 5, 5)])
def test_dprime_hull_closure_and_triples(ps):
    for t in t_grid(ps):
        r = bx.verify_inclusions(working_config(ps, t))
        assert all(row.margin >= -EPS for row in r.by_check("dprime-in-hull"))
        triples = r.by_check("triple")
        assert triples and min(row.margin for row in triples) > 0


@pytest.mark.parametrize("ps", [(3, 3, 5), (5, 5, 5), (3, 3, 7)])
def test_orbit_points_distinct(ps):
    for t in t_grid(ps):
        f0 = working_config(ps, t).frames[0]
        for i, j in itertools.combinations(range(f0.n), 2):
            assert pl.proj_distance(f0.wi(i), f0.wi(j)) > 1e-6


def test_working_permutation():
    sig = S(3, 3, 5)
    assert bx.working_permutation(sig, 6.0) == (2, 0, 1)
    assert bx.working_permutation(sig, 1 / 6) == (2, 1, 0)
    assert bx.working_permutation(S(5, 5, 5), 30.0) == (0, 1, 2)


def test_report_table_round_trip(cfg555):
    r = bx.verify_inclusions(cfg555)
    back = bx.InclusionReport.from_table(r.to_table(["note = x"]))
    assert len(back.rows) == len(r.rows)
    assert back.passed == r.passed
    assert back.min_margin == pytest.approx(r.min_margin)


def test_complex_regime_rejected():
    sig = S(3, 3, 5)
    with pytest.raises(errors.ComplexCoxeter):
        working_config((3, 3, 5), 0.99 * classify.t_crit(sig))
