"""Exact exponent arithmetic and hull geometry."""

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlgp.exponents import (
    ExponentTuple,
    HullPoint,
    as_fraction,
    construct_for_dimension,
    in_convex_hull,
    in_hull_of_points,
    lemma_last_memberships,
    lemma_last_points,
    riesz_thorin_interpolate,
    sN,
    verify_wn,
)

LOCAL_3D = ExponentTuple.from_values(["3/2", 3, 3, 2], ["3/2", 3, 3, 2], [3, 3])


def barycentric_oracle(point, verts):
    """Solve for barycentric coordinates with Cramer's rule (exact)."""
    (ax, ay), (bx, by), (cx, cy) = [(v.a, v.b) for v in verts]
    det = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)
    if det == 0:
        return None
    px, py = point.a - ax, point.b - ay
    l1 = (px * (cy - ay) - (cx - ax) * py) / det
    l2 = ((bx - ax) * py - px * (by - ay)) / det
    return 1 - l1 - l2, l1, l2


class TestParsing:
    def test_strings_and_ints(self):
        assert as_fraction("3/2") == F(3, 2)
        assert as_fraction(4) == F(4)

    @pytest.mark.parametrize("bad", [1.5, True, None])
    def test_inexact_rejected(self, bad):
        with pytest.raises(TypeError):
            as_fraction(bad)

    def test_wrong_lengths(self):
        with pytest.raises(ValueError):
            ExponentTuple.from_values([1, 2, 3], [1, 2, 3, 4], [1, 2])

    def test_completed_fills_s(self):
        t = ExponentTuple.completed(["3/2", 3, 3, 2], ["3/2", 3, 3, 2])
        assert t.s == (F(3), F(3))


class TestVerify:
    def test_local_kernel_tuple_n3(self):
        assert verify_wn(LOCAL_3D, 3).passed

    def test_same_tuple_passes_n1(self):
        assert verify_wn(LOCAL_3D, 1).passed

    def test_q1_boundary_violation(self):
        t = ExponentTuple.from_values(["3/2", 3, 3, 2], [1, 3, 3, 2], [3, 3])
        rep = verify_wn(t, 3)
        assert not rep.passed
        assert any("q1 > 2N/(N+2) = 6/5" in v for v in rep.violations)

    def test_identity_violation_reported(self):
        t = ExponentTuple.from_values(["3/2", 3, 3, 2], ["3/2", 4, 3, 2], [3, 3])
        rep = verify_wn(t, 3)
        assert any("1/p3 + 1/q2 = 1/q1" in v for v in rep.violations)

    def test_p4_strict_bound(self):
        t = ExponentTuple.from_values(["3/2", 3, 3, 3], ["3/2", 3, 3, 2], [3, 3])
        rep = verify_wn(t, 3)
        assert rep.violations == ["p4 < N/(N-2) = 3 (got 3)"]

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            verify_wn(LOCAL_3D, 0)

    def test_q1_perturbation_flips_exactly_one_entry(self):
        # lowering q1 with p3 and q2 adjusted keeps the identities intact
        t = construct_for_dimension(6, 2)
        rep = verify_wn(t, 6)
        assert rep.passed
        low = F(12, 8)  # 2N/(N+2) = 3/2
        q1 = low - F(1, 100)
        q2 = 1 / (1 / q1 - 1 / t.p[2])
        q3 = t.q[2]
        s2 = 1 / (1 / q1 - 1 / q3)
        bad = ExponentTuple(t.p, (q1, q2, q3, t.q[3]), (t.s[0], s2))
        vio = verify_wn(bad, 6).violations
        assert [v for v in vio if v.startswith("q1 >")] and all(
            not v.startswith("1/") for v in vio
        )


class TestConstruct:
    def test_n4(self):
        t = construct_for_dimension(4, 2)
        assert t.p == (F(3, 2), F(3), F(3), F(4, 3))
        assert t.q == (F(3, 2), F(3), F(3), F(4))
        assert verify_wn(t, 4).passed

    def test_n6(self):
        assert sN(6) == F(7, 4)
        t = construct_for_dimension(6, 2)
        assert t.p == (F(6, 5), F(7, 3), F(7, 3), F(4, 3))
        assert t.q[:3] == (F(42, 25), F(6), F(6))
        assert verify_wn(t, 6).passed

    def test_sN_large(self):
        assert sN(8) == F(18, 10)
        assert sN(7) == F(7, 4) + (2 - F(7, 4)) / 2

    def test_rbar_precondition(self):
        with pytest.raises(ValueError, match="rbar"):
            construct_for_dimension(4, 1)
        with pytest.raises(ValueError):
            construct_for_dimension(3, 2)

    def test_random_pairs(self):
        rnd = random.Random(7)
        for _ in range(200):
            N = rnd.randint(4, 20)
            den = rnd.randint(1, 50)
            lo = N * den // 4 + 1
            rbar = F(rnd.randint(lo, N * den), den)
            assert verify_wn(construct_for_dimension(N, rbar), N).passed


class TestHull:
    def test_interior(self):
        tri = [HullPoint(0, 0), HullPoint(1, 0), HullPoint(0, 1)]
        assert in_convex_hull(HullPoint(F(1, 4), F(1, 4)), tri, strict=True)

    def test_collinear_hull_has_no_strict_interior(self):
        tri = [HullPoint(F(1, 2), F(1, 2)), HullPoint(1, 0), HullPoint(0, 1)]
        p = HullPoint(F(1, 2), F(1, 2))
        assert not in_convex_hull(p, tri, strict=True)
        assert in_convex_hull(p, tri, strict=False)

    def test_edge_point(self):
        tri = [HullPoint(0, 0), HullPoint(1, 0), HullPoint(0, 1)]
        p = HullPoint(F(1, 2), F(1, 2))
        assert in_convex_hull(p, tri) and not in_convex_hull(p, tri, strict=True)

    def test_outside(self):
        tri = [HullPoint(0, 0), HullPoint(1, 0), HullPoint(0, 1)]
        assert not in_convex_hull(HullPoint(F(3, 4), F(1, 2)), tri)

    def test_collinear_triple_is_segment(self):
        seg = [HullPoint(0, 0), HullPoint(F(1, 2), F(1, 2)), HullPoint(1, 1)]
        assert in_convex_hull(HullPoint(F(1, 4), F(1, 4)), seg)
        assert in_convex_hull(HullPoint(1, 1), seg)
        # a segment has no interior in the plane
        assert not in_convex_hull(HullPoint(F(1, 4), F(1, 4)), seg, strict=True)
        assert not in_convex_hull(HullPoint(F(1, 4), F(1, 3)), seg)

    def test_point_validation(self):
        with pytest.raises(ValueError):
            HullPoint(F(3, 2), 0)

    def test_lemma_last_n6(self):
        t = construct_for_dimension(6, 2)
        pts = lemma_last_points(6)
        assert pts["N/(N-2)->N/2"] == HullPoint(F(2, 3), F(1, 3))
        assert lemma_last_memberships(t, 6)["N/(N-2)->N/2"]

    def test_dual_reflection(self):
        assert HullPoint(F(3, 4), F(1, 4)).dual() == HullPoint(F(3, 4), F(1, 4))
        assert HullPoint(F(5, 6), F(1, 3)).dual() == HullPoint(F(2, 3), F(1, 6))

    def test_hull_of_points_square(self):
        sq = [HullPoint(0, 0), HullPoint(1, 0), HullPoint(1, 1), HullPoint(0, 1)]
        assert in_hull_of_points(HullPoint(F(9, 10), F(9, 10)), sq)
        assert in_hull_of_points(HullPoint(1, F(1, 2)), sq)
        assert not in_hull_of_points(HullPoint(F(1, 2), F(1, 2)), sq[:2])

    def test_half_point_needs_duals_for_n_ge_5(self):
        for N in (5, 6, 9):
            t = construct_for_dimension(N, N)
            assert not lemma_last_memberships(t, N)["2->N/2"]
            assert lemma_last_memberships(t, N, with_duals=True)["2->N/2"]
        t4 = construct_for_dimension(4, 2)
        assert lemma_last_memberships(t4, 4)["2->N/2"]

    def test_random_against_barycentric(self):
        rnd = random.Random(11)

        def rq():
            return F(rnd.randint(0, 12), 12)

        checked = 0
        for _ in range(1000):
            verts = [HullPoint(rq(), rq()) for _ in range(3)]
            p = HullPoint(rq(), rq())
            bary = barycentric_oracle(p, verts)
            if bary is None:
                continue
            checked += 1
            assert in_convex_hull(p, verts) == all(l >= 0 for l in bary)
            assert in_convex_hull(p, verts, strict=True) == all(l > 0 for l in bary)
        assert checked > 500


class TestInterpolate:
    def test_midpoint(self):
        assert riesz_thorin_interpolate(HullPoint(1, 1), HullPoint(0, 0), F(1, 2)) == HullPoint(F(1, 2), F(1, 2))

    def test_theta_zero(self):
        e1 = HullPoint(F(1, 3), F(2, 5))
        assert riesz_thorin_interpolate(e1, HullPoint(0, 0), 0) == e1

    def test_three_quarters(self):
        out = riesz_thorin_interpolate(HullPoint(F(1, 2), F(1, 2)), HullPoint(F(2, 3), F(1, 3)), F(3, 4))
        assert out == HullPoint(F(5, 8), F(3, 8))

    def test_theta_range(self):
        with pytest.raises(ValueError):
            riesz_thorin_interpolate(HullPoint(0, 0), HullPoint(1, 1), F(5, 4))


@st.composite
def n_and_rbar(draw):
    N = draw(st.integers(4, 20))
    den = draw(st.integers(1, 60))
    num = draw(st.integers(N * den // 4 + 1, N * den))
    return N, F(num, den)


@settings(max_examples=200, deadline=None)
@given(n_and_rbar())
def test_construction_always_admissible(pair):
    N, rbar = pair
    t = construct_for_dimension(N, rbar)
    assert verify_wn(t, N).passed
    assert lemma_last_memberships(t, N)["N/(N-2)->N/2"]
    assert all(lemma_last_memberships(t, N, with_duals=True).values())
    assert all(isinstance(v, F) for v in (*t.p, *t.q, *t.s))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=4, max_size=4),
)
def test_hull_matches_oracle(coords):
    pts = [HullPoint(F(a, 8), F(b, 8)) for a, b in coords]
    verts, p = pts[:3], pts[3]
    bary = barycentric_oracle(p, verts)
    if bary is not None:
        assert in_convex_hull(p, verts) == all(l >= 0 for l in bary)
