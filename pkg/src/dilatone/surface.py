"""Dilation surfaces from polygons glued by z -> a*z + b.

A surface is a finite list of ccw simple polygons together with an
involutive pairing of some of their sides; paired sides must be
anti-parallel so that a unique orientation-preserving dilation carries
one onto the other.  Unpaired sides form the boundary.

Because no gluing map rotates, a tangent direction transports to the
same direction in every chart: cone angles at the glued-up vertices are
exact integer multiples of 2*pi, and we compute that integer (and the
linear holonomy around the vertex) purely with sign tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .scalars import ONE, fstr, parse_rat, rat
from .geom import (
    DilationMap,
    ccw_sweep_crosses_positive_x,
    ccw_angle_float,
    cross,
    dot,
    norm2,
    on_segment,
    orient2d,
    polygon_area2,
    primitive,
    rot90,
    smul,
    vadd,
    vsub,
)

Side = tuple  # (polygon index, side index)
Corner = tuple  # (polygon index, vertex index)


@dataclass
class ValidationReport:
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def add(self, msg: str):
        self.problems.append(msg)

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(self.problems)


@dataclass(frozen=True)
class VertexCycle:
    """A chained family of polygon corners meeting at one surface point.

    ``closed`` distinguishes interior vertices (the chain is a cycle)
    from boundary vertices (an open chain).  For closed cycles ``turns``
    is the exact integer k with cone angle 2*pi*k and ``holonomy`` the
    derivative of the developing map around the vertex.
    """

    corners: tuple
    closed: bool
    turns: Optional[int]
    holonomy: object
    angle_float: float
    marked: bool

    @property
    def is_singular(self) -> bool:
        if not self.closed:
            return False
        return self.turns != 1 or self.holonomy != 1


class DilationSurface:
    def __init__(self, polygons, gluings, marked=(), check: bool = True):
        self.polygons = [
            tuple((rat(x), rat(y)) for (x, y) in poly) for poly in polygons
        ]
        self.gluings = self._normalize_gluings(gluings)
        self.marked = set((int(p), int(v)) for (p, v) in marked)
        self.maps = {}
        for side, other in self.gluings.items():
            try:
                self.maps[side] = DilationMap.from_sides(
                    self.side_points(side), self.side_points(other)
                )
            except (ValueError, ZeroDivisionError):
                self.maps[side] = None
        if check:
            report = self.validate()
            if not report.ok:
                raise ValueError("invalid surface:\n%s" % report)

    # -- basic structure ----------------------------------------------------

    @staticmethod
    def _normalize_gluings(gluings):
        if isinstance(gluings, dict):
            items = list(gluings.items())
        else:
            items = [(tuple(a), tuple(b)) for a, b in gluings]
        out = {}
        for a, b in items:
            a = (int(a[0]), int(a[1]))
            b = (int(b[0]), int(b[1]))
            for k, v in ((a, b), (b, a)):
                if k in out and out[k] != v:
                    raise ValueError("side %s glued twice" % (k,))
                out[k] = v
        return out

    def n_sides(self, p: int) -> int:
        return len(self.polygons[p])

    def side_points(self, side):
        p, j = side
        poly = self.polygons[p]
        return (poly[j], poly[(j + 1) % len(poly)])

    def side_vector(self, side):
        a, b = self.side_points(side)
        return vsub(b, a)

    def sides(self):
        for p, poly in enumerate(self.polygons):
            for j in range(len(poly)):
                yield (p, j)

    def boundary_sides(self):
        return [s for s in self.sides() if s not in self.gluings]

    def is_boundary(self, side) -> bool:
        return tuple(side) not in self.gluings

    def partner(self, side):
        return self.gluings[tuple(side)]

    def map_across(self, side) -> DilationMap:
        """The gluing map from the chart of ``side`` to its partner's."""
        return self.maps[tuple(side)]

    def corners(self):
        for p, poly in enumerate(self.polygons):
            for v in range(len(poly)):
                yield (p, v)

    # -- validation ----------------------------------------------------------

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        for p, poly in enumerate(self.polygons):
            self._validate_polygon(p, poly, rep)
        for side, other in self.gluings.items():
            if side == other:
                rep.add("side %s glued to itself" % (side,))
                continue
            p, j = side
            if not (0 <= p < len(self.polygons)) or not (0 <= j < self.n_sides(p)):
                rep.add("gluing refers to missing side %s" % (side,))
                continue
            q, l = other
            if not (0 <= q < len(self.polygons)) or not (0 <= l < self.n_sides(q)):
                rep.add("gluing refers to missing side %s" % (other,))
                continue
            if self.maps.get(side) is None:
                rep.add(
                    "sides %s and %s are not anti-parallel under a positive dilation"
                    % (side, other)
                )
        for p, v in self.marked:
            if not (0 <= p < len(self.polygons)) or not (0 <= v < self.n_sides(p)):
                rep.add("marked point (%d, %d) does not exist" % (p, v))
        return rep

    @staticmethod
    def _validate_polygon(p, poly, rep):
        n = len(poly)
        if n < 3:
            rep.add("polygon %d has fewer than 3 vertices" % p)
            return
        for j in range(n):
            if poly[j] == poly[(j + 1) % n]:
                rep.add("polygon %d has a zero-length side %d" % (p, j))
                return
        if polygon_area2(poly) <= 0:
            rep.add("polygon %d is not counterclockwise" % p)
            return
        # simplicity: non-adjacent sides must be disjoint, adjacent sides
        # must share exactly their common vertex (straight corners are
        # fine, zero-angle spikes are not)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            for j in range(i + 1, n):
                c, d = poly[j], poly[(j + 1) % n]
                if j == i + 1 or (i == 0 and j == n - 1):
                    s, u, w = (b, a, d) if j == i + 1 else (a, b, c)
                    du, dw = vsub(u, s), vsub(w, s)
                    if cross(du, dw) == 0 and dot(du, dw) > 0:
                        rep.add("polygon %d has a zero-angle spike at side %d" % (p, i))
                elif _segments_meet(a, b, c, d):
                    rep.add("polygon %d sides %d and %d intersect" % (p, i, j))

    # -- vertex cycles, singularities, topology ------------------------------

    def _next_corner(self, corner):
        """Cross the incoming side of a corner, staying at the same point.

        Sweeping ccw around the vertex: from corner (p, v) the walk
        crosses side (p, v-1) and resumes at the partner side's base
        corner.  Returns None at the boundary.
        """
        p, v = corner
        side = (p, (v - 1) % self.n_sides(p))
        if side not in self.gluings:
            return None, None
        q, l = self.gluings[side]
        return (q, l), self.maps[side]

    def _prev_corner(self, corner):
        p, v = corner
        side = (p, v)
        if side not in self.gluings:
            return None
        q, l = self.gluings[side]
        return (q, (l + 1) % self.n_sides(q))

    def _corner_arc(self, corner):
        """Outgoing and reversed-incoming side directions at a corner.

        The interior angle at the corner is the ccw sweep from the first
        to the second.
        """
        p, v = corner
        n = self.n_sides(p)
        poly = self.polygons[p]
        d_out = vsub(poly[(v + 1) % n], poly[v])
        d_in = vsub(poly[(v - 1) % n], poly[v])
        return d_out, d_in

    def vertex_cycles(self):
        """All vertex cycles and boundary chains, each one VertexCycle."""
        seen = set()
        out = []
        # open chains first: start wherever the outgoing side is boundary
        for start in self.corners():
            if start in seen:
                continue
            p, v = start
            if (p, v) in self.gluings:
                continue
            out.append(self._walk(start, seen))
        for start in self.corners():
            if start not in seen:
                out.append(self._walk(start, seen))
        return out

    def _walk(self, start, seen) -> VertexCycle:
        corners = []
        angle = 0.0
        turns = 0
        holonomy = ONE
        cur = start
        closed = False
        while True:
            if cur in seen:
                raise ValueError("vertex walk re-entered corner %s" % (cur,))
            seen.add(cur)
            corners.append(cur)
            d_out, d_in = self._corner_arc(cur)
            angle += ccw_angle_float(d_out, d_in)
            if ccw_sweep_crosses_positive_x(d_out, d_in):
                turns += 1
            nxt, gmap = self._next_corner(cur)
            if nxt is None:
                break
            holonomy = holonomy * gmap.a
            if nxt == start:
                closed = True
                break
            cur = nxt
        marked = any(c in self.marked for c in corners)
        return VertexCycle(
            corners=tuple(corners),
            closed=closed,
            turns=turns if closed else None,
            holonomy=holonomy if closed else None,
            angle_float=angle,
            marked=marked,
        )

    def singularities(self):
        """One record per vertex cycle.

        Regular interior points (angle 2*pi, holonomy 1) are included; whether
        they count as cone points is the caller's business (see ``marked``).
        Open chains describe boundary vertices and carry sector angles only.
        """
        return self.vertex_cycles()

    def cone_points(self):
        """Cycles that downstream modules treat as distinguished vertices:
        genuinely singular ones plus marked regular points."""
        return [c for c in self.vertex_cycles() if c.is_singular or c.marked]

    def is_closed(self) -> bool:
        return not self.boundary_sides()

    def euler_characteristic(self) -> int:
        V = len(self.vertex_cycles())
        n_sides = sum(len(poly) for poly in self.polygons)
        n_glued = len(self.gluings) // 2
        E = n_glued + (n_sides - 2 * n_glued)
        F = len(self.polygons)
        return V - E + F

    def genus(self) -> int:
        if not self.is_closed():
            raise ValueError("genus is computed for closed surfaces only")
        chi = self.euler_characteristic()
        if chi % 2:
            raise ValueError("odd Euler characteristic; surface is broken")
        return (2 - chi) // 2

    def complexity(self) -> int:
        """4g - 4 + 2s, the dimension count driving all the budgets.

        s counts cone points, i.e. singular vertex cycles plus marked regular
        ones.  A closed surface with nothing distinguished (bare flat torus)
        has no meaningful complexity; mark a point first.
        """
        g = self.genus()
        s = len(self.cone_points())
        if s == 0:
            raise ValueError("needs at least one singularity")
        return 4 * g - 4 + 2 * s

    # -- serialisation --------------------------------------------------------

    def to_dict(self) -> dict:
        pairs = sorted(set(tuple(sorted((a, b))) for a, b in self.gluings.items()))
        return {
            "polygons": [
                [[fstr(x), fstr(y)] for (x, y) in poly] for poly in self.polygons
            ],
            "gluings": [{"from": list(a), "to": list(b)} for a, b in pairs],
            "marked_points": sorted([list(c) for c in self.marked]),
            "boundary": [list(s) for s in self.boundary_sides()],
        }

    @classmethod
    def from_dict(cls, data: dict, check: bool = True) -> "DilationSurface":
        polygons = [
            [(parse_rat(x), parse_rat(y)) for (x, y) in poly]
            for poly in data["polygons"]
        ]
        gluings = [
            (tuple(g["from"]), tuple(g["to"])) for g in data.get("gluings", [])
        ]
        marked = [tuple(c) for c in data.get("marked_points", [])]
        return cls(polygons, gluings, marked=marked, check=check)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path, check: bool = True) -> "DilationSurface":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), check=check)


def build_flat_cylinder(z1, z2) -> DilationSurface:
    """Flat cylinder: parallelogram spanned by z1 and z2, z2-sides glued
    by the translation z -> z +/- z1.

    Core curves run parallel to z1, the z1-sides are the two boundary
    circles.  The modulus height/circumference = |cross(z1, z2)|/|z1|^2
    is an exact rational, stashed in ``cylinder_info`` for cross-checks.
    """
    z1 = (rat(z1[0]), rat(z1[1]))
    z2 = (rat(z2[0]), rat(z2[1]))
    c = cross(z1, z2)
    if c == 0:
        raise ValueError("spanning vectors must be linearly independent")
    origin = (rat(0), rat(0))
    if c > 0:
        verts = [origin, z1, vadd(z1, z2), z2]
        glue = [((0, 1), (0, 3))]
    else:
        verts = [origin, z2, vadd(z2, z1), z1]
        glue = [((0, 0), (0, 2))]
    s = DilationSurface([verts], glue)
    s.cylinder_info = {"kind": "flat", "modulus": abs(c) / norm2(z1)}
    return s


def build_dilation_cylinder_rays(multiplier, rays=((1, 0), (0, 1))) -> DilationSurface:
    """A dilation cylinder as one polygon with boundary.

    The cylinder is the cone of directions swept ccw through ``rays``
    (consecutive rays less than pi apart), modulo z -> multiplier*z.
    The polygon is the annular region between a polyline transversal
    through the ray points and its image; matching chords are glued by
    the dilation, the first and last radial sides are the boundary
    circles.

    ``build_dilation_cylinder_rays(2)`` is the quarter-circle cylinder:
    angle pi/2, multiplier 2, modulus exactly 2*tan(pi/4)/(2-1) = 2.
    """
    lam = rat(multiplier)
    if lam <= 1:
        raise ValueError("multiplier must be > 1")
    pts = [primitive((rat(x), rat(y))) for x, y in rays]
    if len(pts) < 2:
        raise ValueError("need at least two rays")
    for u, v in zip(pts, pts[1:]):
        if cross(u, v) <= 0:
            raise ValueError("rays must advance ccw by less than pi each")
    k = len(pts) - 1  # number of chords on each transversal
    verts = [pts[0]]
    verts += [smul(lam, p) for p in pts]
    verts += list(reversed(pts[1:]))
    # sides: 0 radial out; 1..k outer chords; k+1 radial in; k+2..2k+1
    # inner chords (reversed order)
    gl = []
    for i in range(k):
        outer = 1 + i
        inner = 2 * k + 1 - i
        gl.append(((0, inner), (0, outer)))
    s = DilationSurface([verts], gl)
    theta = sum(ccw_angle_float(u, v) for u, v in zip(pts, pts[1:]))
    s.cylinder_info = {
        "kind": "dilation",
        "multiplier": lam,
        "theta": theta,
        "rays": tuple(pts),
    }
    return s


_QUADRANT = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _rational_direction(alpha: float, max_denominator: int):
    """Primitive integer vector whose angle approximates alpha (radians)."""
    quadrant, beta = divmod(alpha % (2 * math.pi), math.pi / 2)
    if beta <= math.pi / 4:
        f = Fraction(math.tan(beta)).limit_denominator(max_denominator)
        d = (f.denominator, f.numerator)
    else:
        f = Fraction(math.tan(math.pi / 2 - beta)).limit_denominator(max_denominator)
        d = (f.numerator, f.denominator)
    for _ in range(int(quadrant) % 4):
        d = rot90(d)
    return primitive((rat(d[0]), rat(d[1])))


def build_dilation_cylinder(theta, multiplier, max_denominator=10**6) -> DilationSurface:
    """Dilation cylinder of angle theta (radians) and the given multiplier.

    Multiples of pi/4 are realised exactly by chains of axis/diagonal
    rays.  Any other angle is realised up to a rational-slope
    approximation of the final ray; the achieved angle is what
    ``cylinder_info["theta"]`` reports.
    """
    th = float(theta)
    if not 0 < th < 2 * math.pi:
        raise ValueError("angle must be in (0, 2*pi)")
    lam = rat(multiplier)
    if lam <= 1:
        raise ValueError("multiplier must be > 1")
    steps = th / (math.pi / 2)
    whole = int(math.floor(steps + 1e-9))
    rays = [_QUADRANT[i] for i in range(whole + 1)]
    if abs(steps - round(steps)) >= 1e-9:
        last = _rational_direction(th, max_denominator)
        if cross(rays[-1], last) > 0:
            rays.append(last)
    return build_dilation_cylinder_rays(lam, rays)


def _segments_meet(a, b, c, d) -> bool:
    """Do closed segments [a,b] and [c,d] share any point?"""
    o1 = orient2d(a, b, c)
    o2 = orient2d(a, b, d)
    o3 = orient2d(c, d, a)
    o4 = orient2d(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        on_segment(a, b, c)
        or on_segment(a, b, d)
        or on_segment(c, d, a)
        or on_segment(c, d, b)
    )
