"""Exact planar primitives: predicates, directions, cones, dilation maps.

Points and vectors are plain ``(x, y)`` tuples of rationals from
:mod:`dilatone.scalars`.  Every predicate here is decided by the sign of
an exact rational expression; floats appear only in ``*_float`` helpers
meant for sanity checks and rendering.
"""

from __future__ import annotations

import math
from math import gcd

from .scalars import ZERO, ONE, rat, sign

# ---------------------------------------------------------------------------
# vectors


def vadd(u, v):
    return (u[0] + v[0], u[1] + v[1])


def vsub(u, v):
    return (u[0] - v[0], u[1] - v[1])


def smul(a, v):
    return (a * v[0], a * v[1])


def vneg(v):
    return (-v[0], -v[1])


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def norm2(v):
    return v[0] * v[0] + v[1] * v[1]


def rot90(v):
    """Rotate a vector by +90 degrees."""
    return (-v[1], v[0])


def is_zero(v):
    return v[0] == 0 and v[1] == 0


# ---------------------------------------------------------------------------
# predicates


def orient2d(a, b, c) -> int:
    """Sign of the signed area of triangle (a, b, c): +1 for ccw."""
    return sign(cross(vsub(b, a), vsub(c, a)))


def incircle(a, b, c, d) -> int:
    """In-circle predicate for a ccw triangle (a, b, c).

    Returns +1 when d lies strictly inside the circumcircle of (a,b,c),
    0 when the four points are cocircular, -1 when strictly outside.
    Evaluated as the exact 3x3 determinant of coordinate differences.
    """
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd2 - cdy * bd2)
        - ady * (bdx * cd2 - cdx * bd2)
        + ad2 * (bdx * cdy - cdx * bdy)
    )
    return sign(det)


def circumcircle(a, b, c):
    """Exact circumcenter and squared radius of a non-degenerate triangle."""
    ab = vsub(b, a)
    ac = vsub(c, a)
    den = 2 * cross(ab, ac)
    if den == 0:
        raise ValueError("degenerate triangle has no circumcircle")
    rb = norm2(b) - norm2(a)
    rc = norm2(c) - norm2(a)
    # solve 2*ab . x = rb, 2*ac . x = rc by Cramer's rule
    cx = ONE * (rb * ac[1] - rc * ab[1]) / den
    cy = ONE * (rc * ab[0] - rb * ac[0]) / den
    center = (cx, cy)
    return center, norm2(vsub(a, center))


def on_segment(a, b, p) -> bool:
    """Is p on the closed segment [a, b]?"""
    if cross(vsub(b, a), vsub(p, a)) != 0:
        return False
    t = dot(vsub(p, a), vsub(b, a))
    return 0 <= t <= norm2(vsub(b, a))


def _exact_div(num, den):
    return ONE * num / den


def segment_param(a, b, p):
    """Parameter t with p == a + t*(b-a); raises if p is off the line."""
    ab = vsub(b, a)
    if cross(ab, vsub(p, a)) != 0:
        raise ValueError("point not on the supporting line")
    if ab[0] != 0:
        return _exact_div(p[0] - a[0], ab[0])
    return _exact_div(p[1] - a[1], ab[1])


def ray_hit_segment(start, direction, a, b):
    """Intersect the ray start + t*direction (t rational) with segment [a, b].

    Returns ``(t, s)`` with the hit point equal to ``a + s*(b-a)`` and
    ``s`` clamped to nothing -- the caller filters by the ranges it
    wants (t > 0, 0 <= s <= 1).  Returns None for a parallel miss and
    the string ``"collinear"`` when the ray runs inside the segment's
    own line, which the caller must treat specially.
    """
    e = vsub(b, a)
    f = vsub(a, start)
    den = cross(direction, e)
    if den == 0:
        if cross(f, direction) == 0:
            return "collinear"
        return None
    t = _exact_div(cross(f, e), den)
    s = _exact_div(cross(f, direction), den)
    return (t, s)


def point_in_polygon(vertices, p):
    """Exact point location: 'inside', 'boundary' or 'outside'.

    ``vertices`` is a ccw simple polygon.  Winding-number count with
    exact orientation tests.
    """
    n = len(vertices)
    wind = 0
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        if on_segment(a, b, p):
            return "boundary"
        if a[1] <= p[1]:
            if b[1] > p[1] and orient2d(a, b, p) > 0:
                wind += 1
        else:
            if b[1] <= p[1] and orient2d(a, b, p) < 0:
                wind -= 1
    return "inside" if wind != 0 else "outside"


def polygon_area2(vertices):
    """Twice the signed area (positive for ccw)."""
    n = len(vertices)
    s = ZERO
    for i in range(n):
        s += cross(vertices[i], vertices[(i + 1) % n])
    return s


def is_convex(vertices) -> bool:
    """Strict convexity of a ccw polygon (no straight vertices)."""
    n = len(vertices)
    for i in range(n):
        if orient2d(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0:
            return False
    return True


def _in_closed_triangle(a, b, c, p) -> bool:
    return (
        orient2d(a, b, p) >= 0
        and orient2d(b, c, p) >= 0
        and orient2d(c, a, p) >= 0
    )


def ear_clip(vertices):
    """Triangulate a simple ccw polygon; returns index triples.

    Plain O(n^2) ear clipping with exact predicates.  Straight (angle
    pi) vertices are fine: they are never clipped as ears themselves
    and block any ear whose closed triangle would swallow them, so no
    triangulation edge ever passes through a vertex.
    """
    n = len(vertices)
    if n < 3:
        raise ValueError("need at least three vertices")
    idx = list(range(n))
    out = []
    while len(idx) > 3:
        for k in range(len(idx)):
            i, j, l = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = vertices[i], vertices[j], vertices[l]
            if orient2d(a, b, c) <= 0:
                continue
            if any(
                _in_closed_triangle(a, b, c, vertices[m])
                for m in idx
                if m not in (i, j, l)
            ):
                continue
            out.append((i, j, l))
            del idx[k]
            break
        else:
            raise ValueError("no ear found; polygon is not simple?")
    i, j, l = idx
    if orient2d(vertices[i], vertices[j], vertices[l]) <= 0:
        raise ValueError("degenerate final triangle")
    out.append((i, j, l))
    return out


# ---------------------------------------------------------------------------
# exact directions
#
# A direction is a nonzero vector considered up to positive scaling.  The
# canonical representative is the primitive integer vector: multiply by
# the lcm of the denominators, divide by the gcd of the absolute values.


def primitive(v):
    """Canonical primitive integer representative of a direction."""
    x, y = v
    if x == 0 and y == 0:
        raise ValueError("zero vector has no direction")
    l = _lcm(x.denominator, y.denominator)
    nx = int(x.numerator) * (l // int(x.denominator))
    ny = int(y.numerator) * (l // int(y.denominator))
    g = gcd(abs(nx), abs(ny))
    return (rat(nx // g), rat(ny // g))


def _lcm(a, b):
    a, b = int(a), int(b)
    return a // gcd(a, b) * b


def same_direction(u, v) -> bool:
    return cross(u, v) == 0 and dot(u, v) > 0


def direction_key(v):
    """Hashable exact key identifying the direction of v."""
    p = primitive(v)
    return (int(p[0].numerator), int(p[1].numerator))


def _lower_half(d) -> bool:
    # angle in [pi, 2*pi) -- i.e. strictly below the x-axis, or on the
    # negative x-axis.
    return d[1] < 0 or (d[1] == 0 and d[0] < 0)


def angle_less(u, w) -> bool:
    """Exact comparison of directions by angle in [0, 2*pi) from +x."""
    hu, hw = _lower_half(u), _lower_half(w)
    if hu != hw:
        return hw  # upper half comes first
    return cross(u, w) > 0


def ccw_sweep_crosses_positive_x(u, w) -> bool:
    """Does the ccw sweep from u to w (angle in (0, 2*pi)) meet +x?

    Arrival exactly at +x counts, departure from +x does not: the swept
    half-open arc is (u, w].  u and w must not be positive multiples of
    each other.
    """
    if same_direction(u, w):
        raise ValueError("sweep of angle 0 or 2*pi is ambiguous")
    return not angle_less(u, w)


def angle_float(v) -> float:
    return math.atan2(float(v[1]), float(v[0])) % (2.0 * math.pi)


def ccw_angle_float(u, w) -> float:
    """Float ccw angle from u to w, in (0, 2*pi]."""
    a = (angle_float(w) - angle_float(u)) % (2.0 * math.pi)
    return 2.0 * math.pi if a == 0.0 else a


# ---------------------------------------------------------------------------
# cones of directions


class Cone:
    """Closed ccw arc of directions from ``start`` to ``end``.

    The pair determines the arc completely: its width is the ccw angle
    from start to end, in (0, 2*pi).  Equal start and end denote a
    single ray.  Arcs of width > pi are supported (membership tests go
    through the complement) but ``intersect`` is only offered for arcs
    of width <= pi, which is all the cylinder machinery needs.
    """

    __slots__ = ("start", "end")

    def __init__(self, start, end):
        self.start = primitive(start)
        self.end = primitive(end)

    def __repr__(self):
        return "Cone(%s, %s)" % (self.start, self.end)

    def __eq__(self, other):
        return self.start == other.start and self.end == other.end

    def __hash__(self):
        return hash((self.start, self.end))

    def is_ray(self) -> bool:
        return self.start == self.end

    def width_vs_pi(self) -> int:
        """-1, 0 or +1 as the width compares to pi (a ray compares -1)."""
        if self.is_ray():
            return -1
        c = cross(self.start, self.end)
        if c > 0:
            return -1
        if c == 0:
            return 0  # antipodal endpoints
        return 1

    def contains(self, v, strict: bool = False) -> bool:
        """Is direction v in the arc (strict: in its interior)?"""
        if self.is_ray():
            return (not strict) and same_direction(self.start, v)
        w = self.width_vs_pi()
        if w <= 0:
            cs = cross(self.start, v)
            ce = cross(v, self.end)
            if strict:
                return cs > 0 and ce > 0
            if cs == 0:
                # v is start or its antipode; the antipode belongs to the
                # arc only when it is the far endpoint (width exactly pi)
                return dot(self.start, v) > 0 or same_direction(v, self.end)
            if ce == 0:
                return cs > 0 and dot(self.end, v) > 0
            return cs > 0 and ce > 0
        # wide arc: complement of the open ccw arc from end to start
        comp = Cone(self.end, self.start)
        return not comp.contains(v, strict=not strict)

    def intersect(self, other):
        """Intersection with another arc, both of width <= pi.

        Returns a Cone (possibly a single ray) or None when disjoint.
        Two arcs of width <= pi meet in at most one arc, except for the
        antipodal-points corner case which the cylinder code never
        produces; that case raises.
        """
        if self.width_vs_pi() > 0 or other.width_vs_pi() > 0:
            raise ValueError("intersect is defined for arcs of width <= pi")
        if self.contains(other.start):
            s = other.start
        elif other.contains(self.start):
            s = self.start
        else:
            return None
        if self.contains(other.end):
            e = other.end
        elif other.contains(self.end):
            e = self.end
        else:
            return None
        got = Cone(s, e)
        if got.width_vs_pi() > 0:
            raise ValueError("two width-pi arcs met in antipodal components")
        if got.width_vs_pi() == 0:
            # endpoints antipodal: make sure this is one genuine arc and
            # not two opposite touching rays
            mid = rot90(got.start)
            if not (self.contains(mid) and other.contains(mid)):
                raise ValueError("two width-pi arcs met in antipodal components")
        return got

    def antipode(self):
        return Cone(vneg(self.start), vneg(self.end))

    def width_float(self) -> float:
        if self.is_ray():
            return 0.0
        return ccw_angle_float(self.start, self.end)


def cone_from_segment(apex, a, b):
    """Directions from ``apex`` towards points of segment [a, b].

    The apex must not lie on the segment's line between a and b; the
    result is a closed arc of width < pi.
    """
    u = vsub(a, apex)
    v = vsub(b, apex)
    c = cross(u, v)
    if c > 0:
        return Cone(u, v)
    if c < 0:
        return Cone(v, u)
    raise ValueError("apex is aligned with the segment")


# ---------------------------------------------------------------------------
# dilation maps


class DilationMap:
    """Affine map z -> a*z + b with a > 0 rational and b a vector.

    These are exactly the orientation-preserving similarities with no
    rotational part, the gluing maps of dilation surfaces.  They form a
    group under composition.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        if a <= 0:
            raise ValueError("dilation factor must be positive")
        self.a = ONE * a
        self.b = (ONE * b[0], ONE * b[1])

    @classmethod
    def identity(cls):
        return cls(ONE, (ZERO, ZERO))

    @classmethod
    def from_sides(cls, src, dst):
        """The dilation sending segment src onto segment dst reversed.

        src = (u, v) and dst = (u2, v2) as point pairs; the map sends
        u to v2 and v to u2, which is the gluing convention for sides
        of ccw polygons (side vectors are anti-parallel).
        """
        u, v = src
        u2, v2 = dst
        d1 = vsub(v, u)
        d2 = vsub(u2, v2)  # reversed
        if cross(d1, d2) != 0:
            raise ValueError("sides are not anti-parallel")
        if d1[0] != 0:
            a = _exact_div(d2[0], d1[0])
        else:
            a = _exact_div(d2[1], d1[1])
        if a <= 0:
            raise ValueError("sides are parallel, not anti-parallel")
        b = vsub(v2, smul(a, u))
        got = cls(a, b)
        if got(v) != tuple(u2):
            raise ValueError("sides are not related by a dilation")
        return got

    def __call__(self, p):
        return (self.a * p[0] + self.b[0], self.a * p[1] + self.b[1])

    def apply_vector(self, v):
        return (self.a * v[0], self.a * v[1])

    def compose(self, other):
        """self after other: (self * other)(z) == self(other(z))."""
        return DilationMap(
            self.a * other.a,
            (self.a * other.b[0] + self.b[0], self.a * other.b[1] + self.b[1]),
        )

    __mul__ = compose

    def inverse(self):
        ia = ONE / self.a
        return DilationMap(ia, (-ia * self.b[0], -ia * self.b[1]))

    def is_identity(self) -> bool:
        return self.a == 1 and self.b[0] == 0 and self.b[1] == 0

    def fixed_point(self):
        """The unique fixed point when a != 1, else None."""
        if self.a == 1:
            return None
        d = ONE - self.a
        return (self.b[0] / d, self.b[1] / d)

    def __eq__(self, other):
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return "DilationMap(a=%s, b=(%s, %s))" % (self.a, self.b[0], self.b[1])
