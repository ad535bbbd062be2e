"""Built-in example surfaces.

Small constructors for the surfaces used throughout the test-suite and
docs: flat tori, dilation tori, genus-2 surfaces with a single 6*pi
cone point, dilation cylinders of prescribed angular width, and a
closed surface containing a cylinder of angle exactly pi.  All
coordinates are exact; see the docstrings for the frozen invariants
(genus, cone angles, holonomies) each fixture is known to have.
"""

from __future__ import annotations

import random

from .scalars import ONE, rat
from .geom import cross, smul, vadd, vneg, vsub, primitive
from .surface import DilationSurface, build_dilation_cylinder_rays


def square_torus() -> DilationSurface:
    """Unit square, opposite sides glued by translations.  Genus 1.

    The single vertex point is regular (2*pi) and marked, so the torus
    counts as having one cone point: complexity 4*1 - 4 + 2*1 = 2.
    """
    return rect_torus(1, 1)


def rect_torus(w, h) -> DilationSurface:
    w, h = rat(w), rat(h)
    poly = [(rat(0), rat(0)), (w, rat(0)), (w, h), (rat(0), h)]
    return DilationSurface(
        [poly], [((0, 0), (0, 2)), ((0, 1), (0, 3))], marked=[(0, 0)]
    )


def hexagon_flat_torus() -> DilationSurface:
    """A hexagonal flat torus: opposite sides translated.  Genus 1.

    Two regular vertex points (each 2*pi, trivial holonomy), both
    marked: complexity 4*1 - 4 + 2*2 = 4.
    """
    poly = [(0, 0), (2, 0), (3, 1), (2, 2), (0, 2), (-1, 1)]
    gl = [((0, 0), (0, 3)), ((0, 1), (0, 4)), ((0, 2), (0, 5))]
    return DilationSurface([poly], gl, marked=[(0, 0), (0, 1)])


def dilation_torus_hexagon() -> DilationSurface:
    """A genus-1 dilation surface with nontrivial linear holonomy.

    One hexagon, opposite sides glued by dilations with factors 3/2,
    1/2 and 2.  Two vertex points, both of cone angle exactly 2*pi,
    with linear holonomies 1/6 and 6: genuine (exponential) singular
    points of the dilation structure.
    """
    h = rat(1, 2)
    poly = [(0, 0), (1, 0), (2, 2), (2, 3), (h, 3), (0, 2)]
    gl = [((0, 0), (0, 3)), ((0, 1), (0, 4)), ((0, 2), (0, 5))]
    return DilationSurface([poly], gl)


def two_pentagon_genus2() -> DilationSurface:
    """Two pentagons glued side-to-side through dilations.  Genus 2.

    Side i of the first pentagon is glued to side i of the second,
    which is the first's side scaled by a_i = (1, 1/2, 3/2, 1/2, 3/2)
    and reversed.  All ten corners chain into a single vertex of cone
    angle 6*pi with trivial linear holonomy; the surface's holonomy on
    homology is still nontrivial (individual gluing factors differ).
    """
    p1 = [(0, 0), (2, 0), (3, 2), (1, 4), (-1, 2)]
    factors = [rat(1), rat(1, 2), rat(3, 2), rat(1, 2), rat(3, 2)]
    return _doubled_polygon(p1, factors)


def _doubled_polygon(p1, factors) -> DilationSurface:
    """Glue a ccw polygon to a second one built from its scaled sides.

    The second polygon's side vectors are -a_i * v_i; they must sum to
    zero, which is the caller's responsibility.
    """
    n = len(p1)
    p1 = [(rat(x), rat(y)) for x, y in p1]
    sides = [vsub(p1[(i + 1) % n], p1[i]) for i in range(n)]
    w = [vneg(smul(a, v)) for a, v in zip(factors, sides)]
    acc = (rat(0), rat(0))
    p2 = []
    for v in w:
        p2.append(acc)
        acc = vadd(acc, v)
    if acc != (0, 0):
        raise ValueError("scaled sides do not close up")
    gl = [((0, i), (1, i)) for i in range(n)]
    return DilationSurface([p1, p2], gl)


def l_shaped_genus2() -> DilationSurface:
    """L-shaped translation surface of genus 2 (one 6*pi cone point).

    Horizontal sides glued vertically in two pieces, vertical sides
    glued horizontally in two pieces.  Carries two horizontal flat
    cylinders, of moduli 1/2 and 1.
    """
    poly = [(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2), (0, 1)]
    gl = [
        ((0, 0), (0, 5)),  # bottom-left up to the top edge of the tall box
        ((0, 1), (0, 3)),  # bottom-right up to the low box's top
        ((0, 7), (0, 2)),  # left-lower across to the right side
        ((0, 6), (0, 4)),  # left-upper across to the inner right side
    ]
    return DilationSurface([poly], gl)


def dilation_cylinder(multiplier, rays=((1, 0), (0, 1))) -> DilationSurface:
    """A dilation cylinder as one polygon with boundary.

    The cylinder is the cone of directions swept ccw through ``rays``
    (consecutive rays less than pi apart), modulo z -> multiplier*z.
    The polygon is the annular region between a polyline transversal
    through the ray points and its image; matching chords are glued by
    the dilation, the first and last radial sides are the boundary
    circles.

    ``dilation_cylinder(2)`` is the quarter-circle cylinder: angle
    pi/2, multiplier 2, modulus exactly 2*tan(pi/4)/(2-1) = 2.
    """
    return build_dilation_cylinder_rays(multiplier, rays)


def obstruction_surface() -> DilationSurface:
    """Closed genus-2 surface containing a dilation cylinder of angle pi.

    An angle-pi cylinder (multiplier 2, transversal through (1,0),
    (0,1), (-1,0)) is closed up by a flat piece: a 4x3 box whose top
    edge is split to receive the cylinder's two boundary segments, with
    the remaining middle segment glued to the box's bottom by z -> 2z
    and the box's vertical sides glued by a translation.

    One 6*pi singular point, one regular vertex point (marked), genus
    2.  The marked point on the transversal chops the cylinder into two
    quarter-turn sub-cylinders, which is what lets the polygonal
    presentation exist at all; edge flips terminate, and the wide
    cylinder is recovered by merging the parts across the marked ray.
    """
    hexagon = [(1, 0), (2, 0), (0, 2), (-2, 0), (-1, 0), (0, 1)]
    box = [(-2, -3), (2, -3), (2, 0), (1, 0), (-1, 0), (-2, 0)]
    gl = [
        ((0, 5), (0, 1)),  # inner chord -> outer chord, z -> 2z
        ((0, 4), (0, 2)),
        ((0, 0), (1, 2)),  # cylinder boundary radii onto the box's top
        ((0, 3), (1, 4)),
        ((1, 3), (1, 0)),  # top middle onto the bottom, z -> 2z + (0,-3)
        ((1, 1), (1, 5)),  # right side onto left side, translation
    ]
    return DilationSurface([hexagon, box], gl, marked=[(0, 2)])


def wide_obstruction_surface() -> DilationSurface:
    """Closed genus-2 surface with a dilation cylinder of angle 3*pi/2.

    The cylinder (multiplier 2, transversal through all four axis
    directions) is presented as three quarter-turn sub-cylinders
    separated by two marked points; its boundary radii are absorbed by
    a flat staircase hexagon whose remaining sides are glued to each
    other by z -> z/2 + b maps.

    One 6*pi singular point plus two regular points (marked), genus 2.
    Without the marks the three parts merge into a single cylinder
    wider than pi, so no polygonation with genuinely singular vertices
    exists.
    """
    sector = [(1, 0), (2, 0), (0, 2), (-2, 0), (0, -2), (0, -1),
              (-1, 0), (0, 1)]
    stair = [(0, 0), (2, 0), (2, 2), (1, 2), (1, 1), (0, 1)]
    gl = [
        ((0, 5), (0, 3)),  # inner chords -> outer chords, z -> 2z
        ((0, 6), (0, 2)),
        ((0, 7), (0, 1)),
        ((0, 0), (1, 2)),  # cylinder boundary radii into the staircase
        ((0, 4), (1, 3)),
        ((1, 0), (1, 4)),  # staircase self-gluings, factor 1/2
        ((1, 1), (1, 5)),
    ]
    return DilationSurface([sector, stair], gl, marked=[(0, 2), (0, 3)])


# ---------------------------------------------------------------------------
# seeded random families


def random_dilation_torus(seed: int, tries: int = 400) -> DilationSurface:
    """A random hexagonal dilation torus (genus 1), reproducible by seed.

    Opposite sides are glued by dilations with random rational factors;
    hexagons are rejection-sampled until convex.
    """
    rng = random.Random(seed)
    for _ in range(tries):
        v1 = (rat(rng.randint(1, 4)), rat(rng.randint(-2, 2)))
        v2 = (rat(rng.randint(-2, 2)), rat(rng.randint(1, 4)))
        if cross(v1, v2) <= 0:
            continue
        a = [rat(rng.randint(1, 6), rng.randint(1, 6)) for _ in range(3)]
        if any(x == 1 for x in a):
            continue
        num = vadd(smul(1 - a[0], v1), smul(1 - a[1], v2))
        v3 = smul(-1 / (1 - a[2]), num)
        sides = [v1, v2, v3, vneg(smul(a[0], v1)), vneg(smul(a[1], v2)), vneg(smul(a[2], v3))]
        if any(s == (0, 0) for s in sides):
            continue
        if not all(cross(sides[i], sides[(i + 1) % 6]) > 0 for i in range(6)):
            continue
        acc = (rat(0), rat(0))
        poly = []
        for s in sides:
            poly.append(acc)
            acc = vadd(acc, s)
        assert acc == (0, 0)
        gl = [((0, 0), (0, 3)), ((0, 1), (0, 4)), ((0, 2), (0, 5))]
        try:
            return DilationSurface([poly], gl)
        except ValueError:
            continue
    raise RuntimeError("no convex hexagon found for seed %d" % seed)


def random_double_pentagon(seed: int, tries: int = 400) -> DilationSurface:
    """A random genus-2 double pentagon, reproducible by seed.

    Keeps the first pentagon fixed and draws random positive gluing
    factors; the last two factors are solved exactly so that the scaled
    sides close up, rejecting draws that force them nonpositive.
    """
    rng = random.Random(seed)
    p1 = [(0, 0), (2, 0), (3, 2), (1, 4), (-1, 2)]
    pts = [(rat(x), rat(y)) for x, y in p1]
    sides = [vsub(pts[(i + 1) % 5], pts[i]) for i in range(5)]
    for _ in range(tries):
        a = [rat(rng.randint(1, 5), rng.randint(1, 5)) for _ in range(3)]
        rhs = vneg(vadd(vadd(smul(a[0], sides[0]), smul(a[1], sides[1])), smul(a[2], sides[2])))
        den = cross(sides[3], sides[4])
        a4 = cross(rhs, sides[4]) / den
        a5 = cross(sides[3], rhs) / den
        if a4 <= 0 or a5 <= 0:
            continue
        try:
            return _doubled_polygon(p1, a + [a4, a5])
        except ValueError:
            continue
    raise RuntimeError("no valid double pentagon for seed %d" % seed)


def random_l_shape(seed: int) -> DilationSurface:
    """A random genus-2 L-shaped translation surface."""
    rng = random.Random(seed)
    w1 = rat(rng.randint(1, 5))
    w2 = rat(rng.randint(1, 5))
    h1 = rat(rng.randint(1, 5))
    h2 = rat(rng.randint(1, 5))
    z = rat(0)
    poly = [
        (z, z), (w1, z), (w1 + w2, z), (w1 + w2, h1), (w1, h1),
        (w1, h1 + h2), (z, h1 + h2), (z, h1),
    ]
    gl = [((0, 0), (0, 5)), ((0, 1), (0, 3)), ((0, 7), (0, 2)), ((0, 6), (0, 4))]
    return DilationSurface([poly], gl)


BUILTIN = {
    "square_torus": square_torus,
    "rect_torus_2x1": lambda: rect_torus(2, 1),
    "hexagon_flat_torus": hexagon_flat_torus,
    "dilation_torus_hexagon": dilation_torus_hexagon,
    "two_pentagon_genus2": two_pentagon_genus2,
    "l_shaped_genus2": l_shaped_genus2,
    "dilation_cylinder_third": lambda: dilation_cylinder(3, rays=((1, 0), (1, 2))),
    "dilation_cylinder_quarter": lambda: dilation_cylinder(2),
    "dilation_cylinder_half": lambda: dilation_cylinder(2, rays=((1, 0), (0, 1), (-1, 0))),
    "obstruction_surface": obstruction_surface,
    "wide_obstruction_surface": wide_obstruction_surface,
}


def build(name: str) -> DilationSurface:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError("unknown builtin surface %r (have: %s)" % (name, ", ".join(sorted(BUILTIN))))


def write_corpus(directory):
    """Write every builtin surface to <directory>/<name>.json."""
    import os

    os.makedirs(directory, exist_ok=True)
    for name, make in sorted(BUILTIN.items()):
        make().save(os.path.join(directory, name + ".json"))
