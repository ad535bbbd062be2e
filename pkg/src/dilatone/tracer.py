"""Straight-line leaf tracing on dilation surfaces.

Leaves of the directional foliation are straight segments inside each
polygon; crossing a glued side applies the gluing dilation to the
position while the direction, being global, never changes.  Everything
is exact: a trace either closes up (the exact start point reappears on
a later flight), hits a vertex, leaves through the boundary, or runs
out of budget.

Three consumers build on the same flight engine:

* ``trace`` follows one leaf from a point;
* ``separatrices`` follows the leaves leaving a vertex, one per
  angular sector containing the direction;
* ``return_map`` pushes a whole side across the surface as a strip,
  splitting it whenever a corner of some polygon is about to cut it,
  which yields the exact piecewise-affine first-return map.

``saddle_connections`` enumerates vertex-to-vertex leaves by a
visibility cone search over a triangulation of the polygons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .scalars import ONE, rat
from .affine1d import AffineBranch
from .geom import (
    Cone,
    DilationMap,
    cone_from_segment,
    cross,
    ear_clip,
    is_zero,
    norm2,
    on_segment,
    point_in_polygon,
    primitive,
    ray_hit_segment,
    same_direction,
    segment_param,
    smul,
    vadd,
    vsub,
)

DEFAULT_BUDGET = 10**4


@dataclass(frozen=True)
class Crossing:
    """One side crossing: where the leaf met the side, in the chart it
    was flying in, plus the same data developed into the start chart."""

    polygon: int
    side: int
    point: tuple
    dev_point: tuple
    dev_side: tuple
    ratio: object  # gluing ratio picked up when hopping through


@dataclass
class TraceResult:
    outcome: str  # "closed" | "singularity" | "boundary" | "budget"
    start: tuple  # (polygon, point), after normalising the representative
    direction: tuple
    crossings: list
    accumulated_dilation: object
    period_map: Optional[DilationMap] = None  # closed: develops the next period
    hit_corner: Optional[tuple] = None
    hit_cycle: object = None
    hit_dev: Optional[tuple] = None
    boundary_side: Optional[tuple] = None

    @property
    def closed(self) -> bool:
        return self.outcome == "closed"

    @property
    def n_crossings(self) -> int:
        return len(self.crossings)

    def dev_length_float(self) -> float:
        """Developed Euclidean length of the trace, in the start chart."""
        import math

        p0, s = self.start
        end = self.period_map(s) if self.closed else self.hit_dev
        if end is None and self.crossings:
            end = self.crossings[-1].dev_point
        if end is None:
            return 0.0
        return math.sqrt(float(norm2(vsub(end, s))))


def _param_along(P, d, e):
    """t with P + t*d == e, for e on the ray's line."""
    if d[0] != 0:
        return (ONE * (e[0] - P[0])) / d[0]
    return (ONE * (e[1] - P[1])) / d[1]


def _first_hit(surface, poly, P, d):
    """First meeting of the ray P + t*d (t > 0) with the polygon's sides.

    Returns ``(t, "vertex", vertex_index)`` or
    ``(t, "cross", (side, point, s))``; vertex hits win ties since an
    equal-t pair names the same point.
    """
    verts = surface.polygons[poly]
    n = len(verts)
    best = None

    def consider(t, kind, data):
        nonlocal best
        if best is None or t < best[0] or (t == best[0] and kind == "vertex" and best[1] != "vertex"):
            best = (t, kind, data)

    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        h = ray_hit_segment(P, d, a, b)
        if h is None:
            continue
        if h == "collinear":
            for vi, e in ((i, a), ((i + 1) % n, b)):
                t = _param_along(P, d, e)
                if t > 0:
                    consider(t, "vertex", vi)
            continue
        t, s = h
        if t <= 0 or s < 0 or s > 1:
            continue
        if s == 0:
            consider(t, "vertex", i)
        elif s == 1:
            consider(t, "vertex", (i + 1) % n)
        else:
            q = vadd(P, smul(t, d))
            consider(t, "cross", (i, q, s))
    return best


def _cycle_lookup(surface):
    table = {}
    for cyc in surface.vertex_cycles():
        for c in cyc.corners:
            table[c] = cyc
    return table


def _run(surface, poly, P, d, budget, start_reprs):
    """Flight loop shared by trace and separatrices."""
    cycles = _cycle_lookup(surface)
    dev = DilationMap.identity()  # current chart -> start chart
    acc = ONE
    events = []
    flight = 0
    start = (poly, P)
    while True:
        hit = _first_hit(surface, poly, P, d)
        if hit is None:
            raise RuntimeError("ray escaped polygon %d; invalid geometry" % poly)
        t, kind, data = hit
        if kind == "vertex":
            Q = surface.polygons[poly][data]
        else:
            Q = data[1]
        closure = None
        for rp, rq in start_reprs:
            if (
                rp == poly
                and on_segment(P, Q, rq)
                and not (flight == 0 and rq == P)
                and not (kind == "vertex" and rq == Q)
            ):
                closure = rq
                break
        if closure is not None:
            if kind == "cross" and closure == Q:
                # closed exactly on a gluing seam: that final side
                # crossing still counts towards the path log
                j = data[0]
                if not surface.is_boundary((poly, j)):
                    if len(events) >= budget:
                        return TraceResult("budget", start, d, events, acc)
                    m = surface.map_across((poly, j))
                    a, b = surface.side_points((poly, j))
                    events.append(
                        Crossing(poly, j, Q, dev(Q), (dev(a), dev(b)), m.a)
                    )
                    acc = acc * m.a
                    dev = dev * m.inverse()
            return TraceResult("closed", start, d, events, acc, period_map=dev)
        if kind == "vertex":
            corner = (poly, data)
            return TraceResult(
                "singularity",
                start,
                d,
                events,
                acc,
                hit_corner=corner,
                hit_cycle=cycles.get(corner),
                hit_dev=dev(Q),
            )
        i, Q, _ = data
        a, b = surface.side_points((poly, i))
        if surface.is_boundary((poly, i)):
            events.append(Crossing(poly, i, Q, dev(Q), (dev(a), dev(b)), None))
            return TraceResult(
                "boundary", start, d, events, acc, boundary_side=(poly, i),
                hit_dev=dev(Q),
            )
        if len(events) >= budget:
            return TraceResult("budget", start, d, events, acc)
        m = surface.map_across((poly, i))
        events.append(Crossing(poly, i, Q, dev(Q), (dev(a), dev(b)), m.a))
        acc = acc * m.a
        dev = dev * m.inverse()
        poly, _ = surface.partner((poly, i))
        P = m(Q)
        flight += 1


def _side_of_point(surface, poly, P):
    """Sides of the polygon whose closed segment contains P."""
    verts = surface.polygons[poly]
    n = len(verts)
    return [
        i
        for i in range(n)
        if on_segment(verts[i], verts[(i + 1) % n], P)
    ]


def _sector_contains(surface, corner, d) -> bool:
    """Is direction d in the half-open corner sector [out-side, in-side)?

    The half-open convention makes the sectors around a vertex cycle
    tile its full cone exactly once: a direction along a side belongs
    to the corner on the side's left.
    """
    p, v = corner
    verts = surface.polygons[p]
    n = len(verts)
    d_out = vsub(verts[(v + 1) % n], verts[v])
    d_in = vsub(verts[(v - 1) % n], verts[v])
    if same_direction(d, d_out):
        return True
    if same_direction(d, d_in):
        return False
    return Cone(d_out, d_in).contains(d)


def trace(surface, start, direction, budget: int = DEFAULT_BUDGET) -> TraceResult:
    """Follow the leaf of the directional foliation through ``start``.

    ``start`` is (polygon index, point in that chart); the point may
    lie on a side (either representative works) or at a non-singular
    vertex.  Starting at a singular vertex is an error; use
    ``separatrices``.
    """
    poly, P = start
    P = (rat(P[0]), rat(P[1]))
    d = primitive((rat(direction[0]), rat(direction[1])))
    where = point_in_polygon(surface.polygons[poly], P)
    if where == "outside":
        raise ValueError("start point lies outside polygon %d" % poly)

    if where == "boundary":
        verts = surface.polygons[poly]
        vertex = next((v for v, q in enumerate(verts) if q == P), None)
        if vertex is not None:
            cycles = _cycle_lookup(surface)
            cyc = cycles[(poly, vertex)]
            if cyc.is_singular:
                raise ValueError("start at singularity")
            for corner in cyc.corners:
                if _sector_contains(surface, corner, d):
                    q, w = corner
                    return _run(
                        surface, q, surface.polygons[q][w], d, budget,
                        [(q, surface.polygons[q][w])],
                    )
            # boundary vertex with the direction pointing out of the surface
            return TraceResult("boundary", (poly, P), d, [], ONE)
        (i,) = _side_of_point(surface, poly, P)
        sv = surface.side_vector((poly, i))
        reprs = [(poly, P)]
        if not surface.is_boundary((poly, i)):
            m = surface.map_across((poly, i))
            q, _ = surface.partner((poly, i))
            reprs.append((q, m(P)))
            if cross(sv, d) < 0:  # flowing out of this chart: hop first
                poly, P = q, m(P)
        elif cross(sv, d) < 0:
            return TraceResult(
                "boundary", (poly, P), d, [], ONE, boundary_side=(poly, i),
                hit_dev=P,
            )
        return _run(surface, poly, P, d, budget, reprs)

    return _run(surface, poly, P, d, budget, [(poly, P)])


def separatrices(surface, cycle, direction, budget: int = DEFAULT_BUDGET):
    """Trace every leaf leaving the vertex cycle in the given direction.

    One leaf per corner sector containing the direction; a vertex of
    total angle 2*pi*k gets exactly k of them.  A separatrix ending at
    a vertex is reported as a "singularity" outcome; if it ends where
    it started it closed into a saddle connection.
    """
    d = primitive((rat(direction[0]), rat(direction[1])))
    out = []
    for corner in cycle.corners:
        if _sector_contains(surface, corner, d):
            p, v = corner
            V = surface.polygons[p][v]
            out.append(_run(surface, p, V, d, budget, [(p, V)]))
    return out


# -- first-return maps -------------------------------------------------------


@dataclass
class ReturnMap:
    """Exact first-return map of a directional foliation to a side.

    The side is parametrised affinely by u in [0, 1) from its first
    vertex.  ``branches`` partition [0, 1) minus the singular
    parameters; unresolved branches (budget ran out) have slope None.
    ``escapes`` are parameter intervals whose leaves leave through the
    surface boundary.
    """

    surface: object
    transversal: tuple
    direction: tuple
    budget: int
    branches: list
    singular_params: list  # (u, corner) pairs, sorted by u
    escapes: list  # (lo, hi, boundary side)

    def resolved_branches(self):
        return [b for b in self.branches if b.resolved]

    @property
    def complete(self) -> bool:
        return not self.escapes and all(b.resolved for b in self.branches)

    def __call__(self, u):
        u = rat(u)
        for b in self.branches:
            if b.contains(u):
                if not b.resolved:
                    raise ValueError("parameter %s lies in an unresolved branch" % u)
                return b(u)
        raise ValueError("parameter %s is singular or escaping" % u)

    def point_at(self, u):
        """The surface point (polygon, coords) at parameter u."""
        p, i = self.transversal
        a, b = self.surface.side_points((p, i))
        u = rat(u)
        return (p, vadd(a, smul(u, vsub(b, a))))


@dataclass
class _Strip:
    lo: object
    hi: object
    poly: int
    C: tuple  # leaf u starts at C + u*E
    E: tuple
    sigma: object
    itinerary: tuple
    crossings: int


def return_map(surface, transversal, direction, budget: int = DEFAULT_BUDGET) -> ReturnMap:
    """Exact piecewise-affine first-return map to a side.

    Pushes the whole side forward as one strip, splitting it whenever
    some leaf inside it is about to hit a vertex; each surviving piece
    crosses the same sides in the same order, so its return parameter
    is a single affine function computed symbolically.
    """
    p0, i0 = transversal
    A, B = surface.side_points((p0, i0))
    sv = vsub(B, A)
    d = primitive((rat(direction[0]), rat(direction[1])))
    c0 = cross(sv, d)
    if c0 == 0:
        raise ValueError("direction parallel to transversal")

    branches = []
    singular = {}  # u -> (n_crossings, corner)
    escapes = []

    if c0 > 0:
        first = _Strip(rat(0), rat(1), p0, A, sv, ONE, (), 0)
    elif surface.is_boundary((p0, i0)):
        return ReturnMap(surface, (p0, i0), d, budget, [], [], [(rat(0), rat(1), None)])
    else:
        m = surface.map_across((p0, i0))
        q, _ = surface.partner((p0, i0))
        first = _Strip(rat(0), rat(1), q, m(A), smul(m.a, sv), ONE, (), 0)

    work = [first]
    while work:
        st = work.pop()
        if st.crossings >= budget:
            branches.append(AffineBranch(st.lo, st.hi, itinerary=st.itinerary))
            continue
        verts = surface.polygons[st.poly]
        den = cross(st.E, d)
        tden = cross(d, st.E)
        cuts = []
        for vi, V in enumerate(verts):
            u = cross(vsub(V, st.C), d) / den
            if st.lo <= u < st.hi:
                t = cross(vsub(V, st.C), st.E) / tden
                if t > 0:
                    cuts.append((u, vi))
        cuts.sort()
        for u, vi in cuts:
            rec = (st.crossings, (st.poly, vi))
            if u not in singular or rec < singular[u]:
                singular[u] = rec
        bounds = [st.lo] + sorted({u for u, _ in cuts if u > st.lo}) + [st.hi]
        for lo, hi in zip(bounds, bounds[1:]):
            mid = (lo + hi) / 2
            Pm = vadd(st.C, smul(mid, st.E))
            hit = _first_hit(surface, st.poly, Pm, d)
            if hit is None or hit[1] != "cross":
                raise RuntimeError("strip interior hit a vertex; split logic broken")
            j = hit[2][0]
            aj, bj = surface.side_points((st.poly, j))
            ej = vsub(bj, aj)
            denj = cross(d, ej)
            t0 = cross(vsub(aj, st.C), ej) / denj
            t1 = -cross(st.E, ej) / denj
            C2 = vadd(st.C, smul(t0, d))
            E2 = vadd(st.E, smul(t1, d))
            hop = surface.partner((st.poly, j)) if not surface.is_boundary((st.poly, j)) else None
            itin = st.itinerary + (((st.poly), j),)
            if (st.poly, j) == (p0, i0) or hop == (p0, i0):
                if hop == (p0, i0):
                    m = surface.map_across((st.poly, j))
                    C2, E2 = m(C2), smul(m.a, E2)
                offset = segment_param(A, B, C2)
                slope = (ONE * E2[0]) / sv[0] if sv[0] != 0 else (ONE * E2[1]) / sv[1]
                if slope <= 0:
                    raise RuntimeError("return branch with non-positive slope")
                branches.append(AffineBranch(lo, hi, slope, offset, itin))
            elif hop is None:
                escapes.append((lo, hi, (st.poly, j)))
            else:
                m = surface.map_across((st.poly, j))
                work.append(
                    _Strip(lo, hi, hop[0], m(C2), smul(m.a, E2),
                           st.sigma * m.a, itin, st.crossings + 1)
                )

    branches.sort(key=lambda b: b.lo)
    merged = []
    for b in branches:
        last = merged[-1] if merged else None
        if (
            last is not None
            and last.hi == b.lo
            and last.itinerary == b.itinerary
            and last.slope == b.slope
            and last.offset == b.offset
        ):
            merged[-1] = AffineBranch(last.lo, b.hi, b.slope, b.offset, b.itinerary)
        else:
            merged.append(b)
    sing = sorted((u, corner) for u, (_, corner) in singular.items())
    escapes.sort()
    return ReturnMap(surface, (p0, i0), d, budget, merged, sing, escapes)


# -- saddle connections --------------------------------------------------------


@dataclass(frozen=True)
class SaddleConnection:
    start: tuple  # corner (polygon, vertex)
    end: tuple
    vec: tuple  # developed vector in the start corner's chart
    itinerary: tuple  # glued sides crossed, in order

    @property
    def direction(self):
        return primitive(self.vec)


def _triangulations(surface):
    """Per polygon: triangles, and adjacency across internal edges."""
    tris = [ear_clip(poly) for poly in surface.polygons]
    nbr = []
    for p, ts in enumerate(tris):
        table = {}
        for k, (i, j, l) in enumerate(ts):
            for u, v in ((i, j), (j, l), (l, i)):
                table[(u, v)] = k
        nbr.append(table)
    return tris, nbr


def _arrival_sides(surface, endc, direction):
    """Glued sides met exactly at the arrival vertex.

    A leaf ending at a corner sits on the endpoint of both incident
    sides; per the vertex-hit convention those count as crossings,
    except a side the leaf rode along (and boundary sides).
    """
    p, w = endc
    n = surface.n_sides(p)
    extra = []
    for side in ((w - 1) % n, w):
        if surface.is_boundary((p, side)):
            continue
        if cross(surface.side_vector((p, side)), direction) == 0:
            continue
        extra.append((p, side))
    return tuple(extra)


def saddle_connections(surface, max_crossings: int):
    """All leaves joining two cone points whose itinerary has at most
    ``max_crossings`` sides, as developed vectors; one entry per
    unoriented connection, oriented into the upper half plane.

    Endpoints are cone points (singular or marked vertex cycles);
    regular vertices still block leaves, since hitting any vertex
    terminates a trace.  Itineraries include the sides met exactly at
    the arrival vertex, so on the square torus the gluing sides
    themselves cost 1 and the diagonal costs 2.
    """
    cycles = _cycle_lookup(surface)
    cone_corners = [
        c
        for cyc in surface.vertex_cycles()
        for c in cyc.corners
        if cyc.is_singular or cyc.marked
    ]

    tris, nbr = _triangulations(surface)
    raw = []  # (start corner, end corner, developed vec, itinerary)

    def record(source, endc, vec, itin):
        raw.append((source, endc, vec, itin + _arrival_sides(surface, endc, vec)))

    for source in cone_corners:
        p0, v0 = source
        S = surface.polygons[p0][v0]
        stack = []
        for k, t in enumerate(tris[p0]):
            if v0 not in t:
                continue
            i = t.index(v0)
            a, b = t[(i + 1) % 3], t[(i + 2) % 3]
            va = vsub(surface.polygons[p0][a], S)
            vb = vsub(surface.polygons[p0][b], S)
            cone = Cone(va, vb)
            stack.append((p0, k, (v0, a), DilationMap.identity(), cone, 0, ()))
            record(source, (p0, a), va, ())
            record(source, (p0, b), vb, ())
        while stack:
            p, k, entry, dev, cone, crossed, itin = stack.pop()
            t = tris[p][k]
            verts = surface.polygons[p]
            for w in t:
                dw = vsub(dev(verts[w]), S)
                if not is_zero(dw) and cone.contains(dw):
                    record(source, (p, w), dw, itin)
            n = len(verts)
            for x in range(3):
                u, w = t[x], t[(x + 1) % 3]
                if (u, w) == entry:
                    continue
                eu, ew = dev(verts[u]), dev(verts[w])
                try:
                    edge_cone = cone_from_segment(S, eu, ew)
                except ValueError:
                    continue  # edge is radial from the source: leaves ride it
                sub = cone.intersect(edge_cone)
                if sub is None or sub.is_ray():
                    continue
                if (w - u) % n == 1:  # a real polygon side, index u
                    if surface.is_boundary((p, u)):
                        continue
                    if crossed + 1 > max_crossings:
                        continue
                    m = surface.map_across((p, u))
                    q, l = surface.partner((p, u))
                    nq = len(surface.polygons[q])
                    entry2 = (l, (l + 1) % nq)
                    k2 = nbr[q][entry2]
                    stack.append(
                        (q, k2, entry2, dev * m.inverse(), sub,
                         crossed + 1, itin + ((p, u),))
                    )
                else:  # internal triangulation edge
                    k2 = nbr[p].get((w, u))
                    if k2 is not None:
                        stack.append((p, k2, (w, u), dev, sub, crossed, itin))

    # blocking: a leaf stops at the first vertex in its direction, so of
    # all hits from one corner in one direction only the nearest is real;
    # on exact ties (the same leaf logged via different unrollings) keep
    # the shortest itinerary
    best = {}
    for source, endc, vec, itin in raw:
        key = (source, primitive(vec))
        cur = best.get(key)
        if (
            cur is None
            or norm2(vec) < norm2(cur[1])
            or (norm2(vec) == norm2(cur[1]) and len(itin) < len(cur[2]))
        ):
            best[key] = (endc, vec, itin)

    # every connection is found twice, once from each end, with opposite
    # global directions (dilations preserve direction); keeping the copy
    # pointing into the upper half plane keeps exactly one of the two.
    # A leaf riding a glued side also appears at two corners of its own
    # cycle; the copy leaving along a corner's incoming side duplicates
    # the partner corner's outgoing copy and is dropped.
    out = []
    for (source, pdir), (endc, vec, itin) in best.items():
        if len(itin) > max_crossings:
            continue
        cyc = cycles[endc]
        if not (cyc.is_singular or cyc.marked):
            continue  # leaf blocked by a regular vertex, not a connection
        x, y = pdir
        if not (y > 0 or (y == 0 and x > 0)):
            continue
        p, v = source
        n = surface.n_sides(p)
        verts = surface.polygons[p]
        d_in = vsub(verts[(v - 1) % n], verts[v])
        if same_direction(vec, d_in) and not surface.is_boundary(
            (p, (v - 1) % n)
        ):
            continue
        out.append(SaddleConnection(source, endc, tuple(vec), itin))
    out.sort(key=lambda c: (norm2(c.vec), c.vec, c.start, c.itinerary))
    return out
