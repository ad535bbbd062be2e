import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilatone.affine1d import periodic_points
from dilatone.corpus import build
from dilatone.geom import cross, ray_hit_segment, segment_param, smul, vadd, vsub
from dilatone.tracer import return_map, saddle_connections, separatrices, trace


def marked_cycle(surface):
    return next(c for c in surface.vertex_cycles() if c.marked)


# -- trace --------------------------------------------------------------------


def test_torus_diagonal_closes():
    t = build("square_torus")
    r = trace(t, (0, (F(1, 4), 0)), (1, 1))
    assert r.outcome == "closed"
    assert r.n_crossings == 2
    assert r.accumulated_dilation == 1
    # one period develops to start + (1,1)
    assert r.period_map((F(1, 4), 0)) == (F(5, 4), 1)


def test_torus_vertical_closes_from_interior():
    t = build("square_torus")
    r = trace(t, (0, (F(1, 8), F(1, 16))), (0, 1))
    assert r.closed and r.n_crossings == 1
    assert r.period_map((F(1, 8), F(1, 16))) == (F(1, 8), F(17, 16))


def test_torus_side_start_counts_seam_crossing():
    t = build("square_torus")
    up = trace(t, (0, (F(1, 2), 0)), (0, 1))
    down = trace(t, (0, (F(1, 2), 0)), (0, -1))
    assert up.closed and up.n_crossings == 1
    assert down.closed and down.n_crossings == 1  # hop to the partner is free


def test_marked_vertex_start_hits_singularity():
    t = build("square_torus")
    r = trace(t, (0, (0, 0)), (2, 1))
    assert r.outcome == "singularity"
    assert r.hit_corner == (0, 2)
    assert r.hit_cycle.marked


def test_riding_a_seam_ends_at_the_far_vertex():
    t = build("square_torus")
    r = trace(t, (0, (0, 0)), (1, 0))
    assert r.outcome == "singularity"
    assert r.n_crossings == 0
    assert r.hit_dev == (1, 0)  # the horizontal saddle connection, length 1


def test_singular_start_raises():
    g2 = build("two_pentagon_genus2")
    cyc = next(c for c in g2.vertex_cycles() if c.is_singular)
    p, v = cyc.corners[0]
    with pytest.raises(ValueError, match="start at singularity"):
        trace(g2, (p, g2.polygons[p][v]), (1, 1))


def test_start_outside_raises():
    t = build("square_torus")
    with pytest.raises(ValueError, match="outside"):
        trace(t, (0, (3, 7)), (1, 1))


def test_dilation_cylinder_bisector_closes_with_dilation():
    q = build("dilation_cylinder_quarter")
    r = trace(q, (0, (F(3, 4), F(3, 4))), (-1, -1))
    assert r.closed and r.n_crossings == 1
    assert r.accumulated_dilation == 2
    assert r.period_map.a == F(1, 2)
    assert r.period_map.fixed_point() == (0, 0)


def test_hit_boundary():
    q = build("dilation_cylinder_quarter")
    r = trace(q, (0, (F(3, 2), F(1, 4))), (0, -1))
    assert r.outcome == "boundary"
    assert r.boundary_side == (0, 0)
    assert r.hit_dev == (F(3, 2), 0)


def test_budget_exhausted_spiral():
    # off-axis leaves in a cone direction spiral towards the core leaf
    q = build("dilation_cylinder_quarter")
    r = trace(q, (0, (F(3, 2), 0)), (0, 1), budget=30)
    assert r.outcome == "budget"
    assert r.n_crossings == 30


def test_accumulated_dilation_is_multiplicative():
    q = build("dilation_cylinder_quarter")
    full = trace(q, (0, (F(3, 2), 0)), (0, 1), budget=5)
    head = trace(q, (0, (F(3, 2), 0)), (0, 1), budget=3)
    last = head.crossings[-1]
    resume_poly = q.partner((last.polygon, last.side))[0]
    resume = q.map_across((last.polygon, last.side))(last.point)
    tail = trace(q, (resume_poly, resume), (0, 1), budget=2)
    assert head.accumulated_dilation * tail.accumulated_dilation \
        == full.accumulated_dilation


def test_direction_constancy_in_developed_log():
    t = build("square_torus")
    r = trace(t, (0, (F(1, 7), F(2, 7))), (3, 2))
    pts = [r.start[1]]
    pts += [c.dev_point for c in r.crossings]
    for a, b in zip(pts, pts[1:]):
        step = vsub(b, a)
        assert cross(step, r.direction) == 0
        assert step[0] * r.direction[0] + step[1] * r.direction[1] >= 0


@settings(deadline=None, max_examples=60)
@given(
    x=st.fractions(min_value=0, max_value=1, max_denominator=8),
    y=st.fractions(min_value=0, max_value=1, max_denominator=8),
    p=st.integers(min_value=-5, max_value=5),
    q=st.integers(min_value=-5, max_value=5),
)
def test_torus_rational_leaves_close_or_hit_vertex(x, y, p, q):
    if p == 0 and q == 0:
        return
    t = build("square_torus")
    r = trace(t, (0, (x, y)), (p, q), budget=64)
    assert r.outcome in ("closed", "singularity")
    assert r.accumulated_dilation == 1
    if r.closed:
        v = vsub(r.period_map(r.start[1]), r.start[1])
        assert cross(v, r.direction) == 0


# -- separatrices -------------------------------------------------------------


def test_torus_horizontal_separatrix():
    t = build("square_torus")
    seps = separatrices(t, marked_cycle(t), (1, 0))
    assert len(seps) == 1
    (s,) = seps
    assert s.outcome == "singularity"
    assert s.hit_dev == (1, 0)


def test_torus_golden_approximation_separatrix():
    # 13/21 approximates the golden mean; the leaf crosses 20 vertical
    # and 12 horizontal seams before landing back on the marked point
    t = build("square_torus")
    seps = separatrices(t, marked_cycle(t), (21, 13), budget=100)
    assert len(seps) == 1
    (s,) = seps
    assert s.outcome == "singularity"
    assert s.n_crossings == 32
    assert s.hit_dev == (21, 13)


def test_genus2_cone_emits_three_separatrices_per_direction():
    g2 = build("two_pentagon_genus2")
    sing = next(c for c in g2.vertex_cycles() if c.is_singular)
    assert sing.turns == 3
    for d in [(1, 0), (0, 1), (1, 1), (2, 1), (-1, 3)]:
        seps = separatrices(g2, sing, d, budget=100)
        assert len(seps) == 3


# -- return maps --------------------------------------------------------------


def test_torus_vertical_return_is_identity():
    t = build("square_torus")
    rm = return_map(t, (0, 0), (0, 1))
    (b,) = rm.branches
    assert (b.lo, b.hi, b.slope, b.offset) == (0, 1, 1, 0)
    assert b.itinerary == ((0, 2),)
    assert rm.complete
    assert [u for u, _ in rm.singular_params] == [0]


def test_torus_drift_return_is_a_rotation():
    t = build("square_torus")
    rm = return_map(t, (0, 0), (1, 3))
    assert [(b.lo, b.hi, b.slope, b.offset) for b in rm.branches] == [
        (0, F(2, 3), 1, F(1, 3)),
        (F(2, 3), 1, 1, F(-2, 3)),
    ]
    assert rm.singular_params == [(F(2, 3), (0, 2))]
    assert rm(F(1, 2)) == F(5, 6)
    assert rm(F(5, 6)) == F(1, 6)


def test_quarter_cylinder_contracting_return():
    q = build("dilation_cylinder_quarter")
    rm = return_map(q, (0, 3), (1, 1))
    (b,) = rm.branches
    assert (b.lo, b.hi, b.slope, b.offset) == (0, 1, F(1, 2), F(1, 4))
    assert b.itinerary == ((0, 1),)
    assert rm.complete and not rm.singular_params
    (fp,) = periodic_points(rm.branches, 4)
    assert (fp.x, fp.period, fp.multiplier) == (F(1, 2), 1, F(1, 2))


def test_quarter_cylinder_expanding_return():
    q = build("dilation_cylinder_quarter")
    rm = return_map(q, (0, 3), (-1, -1))
    (b,) = rm.resolved_branches()
    assert (b.lo, b.hi, b.slope, b.offset) == (F(1, 4), F(3, 4), 2, F(-1, 2))
    assert [u for u, _ in rm.singular_params] == [F(1, 4), F(3, 4)]
    assert [(lo, hi) for lo, hi, _ in rm.escapes] == [(0, F(1, 4)), (F(3, 4), 1)]
    (fp,) = periodic_points(rm.resolved_branches(), 4)
    assert (fp.x, fp.multiplier) == (F(1, 2), 2)


def test_return_map_parallel_direction_raises():
    t = build("square_torus")
    with pytest.raises(ValueError, match="parallel"):
        return_map(t, (0, 0), (1, 0))


def test_return_map_unresolved_branch():
    # leaves from a boundary circle of the cylinder never come back:
    # they spiral towards the core, so the budget runs out
    q = build("dilation_cylinder_quarter")
    rm = return_map(q, (0, 0), (1, 1), budget=30)
    (b,) = rm.branches
    assert not b.resolved and (b.lo, b.hi) == (0, 1)
    assert len(b.itinerary) == 30
    assert not rm.complete and rm.resolved_branches() == []
    with pytest.raises(ValueError, match="unresolved"):
        rm(F(1, 2))


def test_return_map_point_at():
    q = build("dilation_cylinder_quarter")
    rm = return_map(q, (0, 3), (1, 1))
    assert rm.point_at(0) == (0, (0, 1))
    assert rm.point_at(F(1, 2)) == (0, (F(1, 2), F(1, 2)))


def _first_return_oracle(surface, rm, u):
    """Re-trace a single leaf flight by flight, independently of the
    strip propagation, and report the first-return parameter."""
    p0, i0 = rm.transversal
    A, B = surface.side_points((p0, i0))
    d = rm.direction
    poly, P = rm.point_at(u)
    if cross(vsub(B, A), d) < 0:
        poly = surface.partner((p0, i0))[0]
        P = surface.map_across((p0, i0))(P)
    for _ in range(10**4):
        verts = surface.polygons[poly]
        n = len(verts)
        best = None
        for i in range(n):
            h = ray_hit_segment(P, d, verts[i], verts[(i + 1) % n])
            if h is None or h == "collinear":
                continue
            t, s = h
            if t > 0 and 0 < s < 1 and (best is None or t < best[0]):
                best = (t, i)
        t, i = best
        Q = vadd(P, smul(t, d))
        if (poly, i) == (p0, i0):
            return segment_param(A, B, Q)
        if surface.partner((poly, i)) == (p0, i0):
            return segment_param(A, B, surface.map_across((poly, i))(Q))
        m = surface.map_across((poly, i))
        poly, P = surface.partner((poly, i))[0], m(Q)
    raise AssertionError("no return")


def test_branch_formulas_agree_with_retracing():
    rng = random.Random(7)
    cases = [
        (build("square_torus"), (0, 0), (1, 3)),
        (build("square_torus"), (0, 0), (2, 5)),
        (build("dilation_cylinder_quarter"), (0, 3), (1, 1)),
        (build("dilation_cylinder_quarter"), (0, 3), (-1, -1)),
    ]
    checked = 0
    for surface, side, d in cases:
        rm = return_map(surface, side, d)
        for b in rm.resolved_branches():
            for _ in range(25):
                u = b.lo + (b.hi - b.lo) * F(rng.randrange(1, 256), 256)
                if any(u == s for s, _ in rm.singular_params):
                    continue
                assert b(u) == _first_return_oracle(surface, rm, u)
                checked += 1
    assert checked >= 100


def test_flat_torus_return_maps_have_unit_slopes():
    for name in ("square_torus", "rect_torus_2x1", "hexagon_flat_torus"):
        s = build(name)
        for d in [(0, 1), (1, 2), (1, 5), (-2, 3)]:
            rm = return_map(s, (0, 0), d)
            assert rm.branches and all(b.slope == 1 for b in rm.branches)


# -- saddle connections -------------------------------------------------------


def test_torus_saddle_connections_budget_one():
    t = build("square_torus")
    sc = saddle_connections(t, 1)
    assert sorted(c.vec for c in sc) == [(0, 1), (1, 0)]
    assert all(len(c.itinerary) == 1 for c in sc)


def test_torus_saddle_connections_budget_three():
    t = build("square_torus")
    vecs = sorted(c.vec for c in saddle_connections(t, 3))
    assert vecs == [
        (-2, 1), (-1, 1), (-1, 2), (0, 1),
        (1, 0), (1, 1), (1, 2), (2, 1),
    ]


def test_rect_torus_saddle_connections():
    r = build("rect_torus_2x1")
    assert sorted(c.vec for c in saddle_connections(r, 1)) == [(0, 1), (2, 0)]
    vecs = {c.vec for c in saddle_connections(r, 3)}
    assert {(2, 1), (-2, 1), (2, 2)} <= vecs
    assert (1, 1) not in vecs  # not a vertex: the seam midpoint


def test_saddle_connections_are_unoriented_and_blocked():
    g2 = build("two_pentagon_genus2")
    sc = saddle_connections(g2, 2)
    assert sc
    seen = set()
    for c in sc:
        x, y = c.direction
        assert y > 0 or (y == 0 and x > 0)
        key = (c.start, c.direction)
        assert key not in seen  # blocking keeps one leaf per corner+ray
        seen.add(key)
        assert len(c.itinerary) <= 2


def test_saddle_connection_budget_is_monotone():
    g2 = build("two_pentagon_genus2")
    small = {(c.start, c.end, c.vec) for c in saddle_connections(g2, 1)}
    large = {(c.start, c.end, c.vec) for c in saddle_connections(g2, 3)}
    assert small <= large
