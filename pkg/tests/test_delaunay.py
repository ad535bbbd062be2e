"""Edge flips, cocircular merging, pattern codes, and the wide-cylinder screen."""

import math

import pytest

from dilatone.corpus import build, random_dilation_torus
from dilatone.cylinders import INF
from dilatone.delaunay import (
    CylinderObstruction,
    DelaunayPolygonation,
    FlipBudgetError,
    disk_audit,
    empty_disk_audit,
    flip_to_delaunay,
    initial_triangulation,
    pattern_signature,
)
from dilatone.geom import incircle, norm2, vsub
from dilatone.surface import DilationSurface


def polygonate(name_or_surface):
    s = (
        build(name_or_surface)
        if isinstance(name_or_surface, str)
        else name_or_surface
    )
    return flip_to_delaunay(initial_triangulation(s))


# -- initial_triangulation -----------------------------------------------------


@pytest.mark.parametrize(
    "name,count",
    [
        ("square_torus", 2),
        ("rect_torus_2x1", 2),
        ("hexagon_flat_torus", 4),
        ("two_pentagon_genus2", 6),  # a fan of 3 per pentagon
        ("dilation_torus_hexagon", 4),
    ],
)
def test_initial_triangle_counts(name, count):
    t = initial_triangulation(build(name))
    assert t.n_triangles == count


@pytest.mark.parametrize(
    "name",
    [
        "square_torus",
        "hexagon_flat_torus",
        "dilation_torus_hexagon",
        "two_pentagon_genus2",
        "l_shaped_genus2",
    ],
)
def test_triangle_count_matches_complexity(name):
    s = build(name)
    assert initial_triangulation(s).n_triangles == s.complexity()


def test_initial_triangulation_rejects_boundary():
    s = build("dilation_cylinder_quarter")
    with pytest.raises(ValueError, match="must be closed"):
        initial_triangulation(s)


def test_initial_triangulation_rejects_plain_regular_vertices():
    # hexagon torus with only one of its two regular points marked
    poly = [(0, 0), (2, 0), (3, 1), (2, 2), (0, 2), (-1, 1)]
    gl = [((0, 0), (0, 3)), ((0, 1), (0, 4)), ((0, 2), (0, 5))]
    s = DilationSurface([poly], gl, marked=[(0, 0)])
    with pytest.raises(ValueError, match="singular or marked"):
        initial_triangulation(s)


def test_initial_gluings_are_involutive_and_chart_consistent():
    t = initial_triangulation(build("two_pentagon_genus2"))
    for dart, (pos, m) in t.glue.items():
        back, m2 = t.glue[pos]
        assert back == dart
        assert (m2 * m).is_identity()


# -- flip_to_delaunay on the corpus: frozen outcomes ---------------------------


@pytest.mark.parametrize(
    "name,faces,flips",
    [
        ("square_torus", [4], 0),
        ("rect_torus_2x1", [4], 0),
        ("hexagon_flat_torus", [4, 3, 3], 3),
        ("dilation_torus_hexagon", [3, 3, 3, 3], 1),
        ("two_pentagon_genus2", [4, 3, 3, 3, 3], 2),
        ("l_shaped_genus2", [4, 4, 4], 1),
    ],
)
def test_corpus_polygonations(name, faces, flips):
    out = polygonate(name)
    assert isinstance(out, DelaunayPolygonation)
    assert sorted((f.degree for f in out.faces), reverse=True) == faces
    assert len(out.flips) == flips


def test_square_torus_merges_to_one_square_face():
    out = polygonate("square_torus")
    assert out.n_faces == 1
    face = out.faces[0]
    assert face.degree == 4
    assert len(set(face.labels)) == 1  # all corners are the marked point


def test_rect_torus_diagonal_is_cocircular_not_flippable():
    # the four corners of the 2x1 rectangle lie on one circle, so the
    # initial diagonal passes the strict test and merging eats it
    assert incircle((0, 0), (2, 0), (2, 1), (0, 1)) == 0
    out = polygonate("rect_torus_2x1")
    assert len(out.flips) == 0
    assert out.n_faces == 1


def test_flips_preserve_triangles_and_vertex_set():
    s = build("hexagon_flat_torus")
    t0 = initial_triangulation(s)
    before = t0.n_triangles
    verts_before = {x for tri in t0.labels for x in tri}
    out = flip_to_delaunay(t0)
    t = out.triangulation
    assert t.n_triangles == before
    assert {x for tri in t.labels for x in tri} == verts_before


@pytest.mark.parametrize(
    "name",
    [
        "square_torus",
        "rect_torus_2x1",
        "hexagon_flat_torus",
        "dilation_torus_hexagon",
        "two_pentagon_genus2",
        "l_shaped_genus2",
    ],
)
def test_corpus_audits_are_clean(name):
    out = polygonate(name)
    assert empty_disk_audit(out.triangulation) == []
    assert disk_audit(out.triangulation) == []


def test_faces_are_inscribed_in_their_disks():
    for name in ("hexagon_flat_torus", "two_pentagon_genus2"):
        out = polygonate(name)
        for face in out.faces:
            for v in face.verts:
                assert norm2(vsub(v, face.center)) == face.r2


# -- pattern signatures --------------------------------------------------------


def test_pattern_invariant_under_relabeling():
    rotated = DilationSurface(
        [[(1, 0), (1, 1), (0, 1), (0, 0)]],
        [((0, 0), (0, 2)), ((0, 1), (0, 3))],
        marked=[(0, 0)],
    )
    a = polygonate("square_torus")
    b = polygonate(rotated)
    assert pattern_signature(a) == pattern_signature(b)
    assert str(a.pattern) == str(b.pattern)


def test_pattern_separates_square_from_hexagon_torus():
    a = polygonate("square_torus")
    b = polygonate("hexagon_flat_torus")
    assert pattern_signature(a) != pattern_signature(b)


# -- obstructions and failure modes --------------------------------------------


def test_angle_pi_cylinder_reports_obstruction():
    out = polygonate("obstruction_surface")
    assert isinstance(out, CylinderObstruction)
    c = out.cylinder
    assert c.multiplier == 2
    assert c.modulus == INF
    assert c.theta_float() == pytest.approx(math.pi)
    assert len(out.parts) == 2  # two quarter-turn parts split by the mark


def test_wide_cylinder_reports_obstruction():
    out = polygonate("wide_obstruction_surface")
    assert isinstance(out, CylinderObstruction)
    c = out.cylinder
    assert c.multiplier == 2
    assert c.modulus == INF
    assert c.theta_float() == pytest.approx(3 * math.pi / 2)
    assert len(out.parts) == 3
    # parts chain across the two marked rays only
    for p in out.parts:
        assert p.theta_float() == pytest.approx(math.pi / 2)


def test_exhausted_budget_without_cylinder_raises():
    t = initial_triangulation(build("hexagon_flat_torus"))
    with pytest.raises(FlipBudgetError, match=r"flip nonterminating \(budget 0\)") as e:
        flip_to_delaunay(t, flip_budget=0)
    assert e.value.flips == ()


# -- random corpus surfaces stay polygonable ------------------------------------


@pytest.mark.parametrize("seed", [1, 2, 5])
def test_random_dilation_tori_polygonate_cleanly(seed):
    out = polygonate(random_dilation_torus(seed))
    assert isinstance(out, DelaunayPolygonation)
    assert empty_disk_audit(out.triangulation) == []
    assert disk_audit(out.triangulation) == []
