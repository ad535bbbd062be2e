"""Delaunay polygonation by exact edge flips.

A geodesic triangulation (vertex set = the cone points) is flipped,
Lawson-style, until every interior edge passes the empty-disk test.
All predicates are exact: an edge's two triangles are developed into a
common chart through the edge's gluing map and the opposite vertex is
tested with the incircle determinant.  Flips fire only on a *strict*
violation; cocircular edges are left alone and merged afterwards into
convex inscribed faces, which makes the resulting polygonation
canonical.

A dilation cylinder of angle >= pi rules out any polygonation whose
vertices are genuine singularities.  In a polygonal presentation such a
cylinder is always chopped into sub-cylinders by marked points sitting
on its transversal chords (a straight chord subtends less than pi of
angle around the fixed point, so a wider cylinder cannot be presented
without them).  The flips themselves then settle happily -- marked
points are legitimate vertices -- which is why, whenever the surface
mixes marked points with dilating gluings, the result is screened for
detected cylinders whose cones chain across marked-only rays to a total
angle >= pi; if found, a CylinderObstruction is reported instead of the
polygonation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cylinders import Cylinder, detect_cylinders, merge_wide_cylinder
from .geom import (
    DilationMap,
    circumcircle,
    dot,
    ear_clip,
    incircle,
    norm2,
    orient2d,
    primitive,
    rot90,
    same_direction,
    smul,
    vadd,
    vsub,
)
from .scalars import rat
from .surface import DilationSurface


class FlipBudgetError(ValueError):
    """Flip loop exhausted its budget and no wide cylinder was found."""

    def __init__(self, budget, flips):
        super().__init__("flip nonterminating (budget %d)" % budget)
        self.budget = budget
        self.flips = tuple(flips)


@dataclass
class GeodesicTriangulation:
    """Triangles in private charts, glued edge-to-edge by dilations.

    ``verts[t]`` are the ccw corner coordinates of triangle ``t`` in its
    own chart, ``labels[t]`` the cone point each corner projects to, and
    ``glue[(t, k)] = ((t2, k2), m)`` pairs side ``k`` (from corner k to
    corner k+1) with its partner, ``m`` mapping chart t into chart t2.
    """

    surface: DilationSurface
    verts: list
    labels: list
    glue: dict

    @property
    def n_triangles(self) -> int:
        return len(self.verts)

    def edges(self):
        """Canonical (smaller-dart-first) interior edges."""
        out = set()
        for dart, (partner, _) in self.glue.items():
            out.add(min(dart, partner))
        return sorted(out)

    def partner(self, dart):
        return self.glue[dart][0]

    def quad(self, dart):
        """Develop the edge's far triangle into this dart's chart.

        Returns (a, b, p, q): the edge a -> b, this triangle's apex p,
        and the opposite triangle's apex q, all in one chart, with
        (a, b, p) ccw and q on the other side of ab.
        """
        t, k = dart
        (t2, k2), m12 = self.glue[dart]
        a = self.verts[t][k]
        b = self.verts[t][(k + 1) % 3]
        p = self.verts[t][(k + 2) % 3]
        q = m12.inverse()(self.verts[t2][(k2 + 2) % 3])
        return a, b, p, q

    def edge_sign(self, dart) -> int:
        """+1 when the edge strictly fails the empty-disk test."""
        a, b, p, q = self.quad(dart)
        return incircle(a, b, p, q)

    def flip(self, dart):
        """Replace the edge by the quad's other diagonal.

        Both new triangles live in this dart's chart; the four outer
        gluings are recomposed with the chart changes.
        """
        t1, k1 = dart
        (t2, k2), m12 = self.glue[dart]
        # a triangle cannot be glued to itself: glued sides are
        # anti-parallel and no triangle has two parallel sides
        m21 = m12.inverse()
        a, b, p, q = self.quad(dart)
        if orient2d(a, q, p) <= 0 or orient2d(q, b, p) <= 0:
            raise RuntimeError("flip of a non-convex quad")

        # quad boundary, ccw: a->q, q->b, b->p, p->a
        old_outer = [
            (t2, (k2 + 1) % 3),
            (t2, (k2 + 2) % 3),
            (t1, (k1 + 1) % 3),
            (t1, (k1 + 2) % 3),
        ]
        renamed = {
            old_outer[0]: (t1, 0),
            old_outer[1]: (t2, 0),
            old_outer[2]: (t2, 1),
            old_outer[3]: (t1, 2),
        }
        saved = [(os, self.glue[os]) for os in old_outer]

        la = self.labels[t1][k1]
        lb = self.labels[t1][(k1 + 1) % 3]
        lp = self.labels[t1][(k1 + 2) % 3]
        lq = self.labels[t2][(k2 + 2) % 3]
        self.verts[t1] = (a, q, p)
        self.verts[t2] = (q, b, p)
        self.labels[t1] = (la, lq, lp)
        self.labels[t2] = (lq, lb, lp)

        ident = DilationMap.identity()
        self.glue[(t1, 1)] = ((t2, 2), ident)
        self.glue[(t2, 2)] = ((t1, 1), ident)
        for os, (pos, m_old) in saved:
            m = m_old * m12 if os[0] == t2 else m_old  # new chart is t1's
            npos = renamed.get(pos, pos)
            if pos[0] == t2 and pos in renamed:
                m = m21 * m  # partner's chart collapsed into t1's too
            ns = renamed[os]
            self.glue[ns] = (npos, m)
            self.glue[npos] = (ns, m.inverse())


def initial_triangulation(s: DilationSurface) -> GeodesicTriangulation:
    """Triangulate each polygon; vertices must all be cone points."""
    if any(s.is_boundary(side) for p in range(len(s.polygons))
           for side in ((p, i) for i in range(s.n_sides(p)))):
        raise ValueError("surface must be closed")
    label_of = {}
    for cyc in s.vertex_cycles():
        if not (cyc.is_singular or cyc.marked):
            raise ValueError("vertices must be singular or marked")
        for corner in cyc.corners:
            label_of[corner] = min(cyc.corners)

    verts, labels, glue = [], [], {}
    dart_of = {}  # (polygon, directed vertex pair) -> dart
    for p, poly in enumerate(s.polygons):
        for i, j, k in ear_clip(poly):
            t = len(verts)
            verts.append((poly[i], poly[j], poly[k]))
            labels.append((label_of[(p, i)], label_of[(p, j)],
                           label_of[(p, k)]))
            for e, (u, w) in enumerate(((i, j), (j, k), (k, i))):
                dart_of[(p, u, w)] = (t, e)
    ident = DilationMap.identity()
    for (p, u, w), dart in dart_of.items():
        back = dart_of.get((p, w, u))
        if back is not None:  # internal diagonal of the same polygon
            glue[dart] = (back, ident)
        else:
            n = s.n_sides(p)
            assert w == (u + 1) % n
            p2, i2 = s.partner((p, u))
            glue[dart] = (dart_of[(p2, i2, (i2 + 1) % s.n_sides(p2))],
                          s.map_across((p, u)))
    return GeodesicTriangulation(s, verts, labels, glue)


def empty_disk_audit(t: GeodesicTriangulation):
    """Interior edges whose disk is non-empty, as (edge, sign) pairs.

    Tests both opposite vertices; the non-strict condition (<= 0) is
    the Delaunay criterion, cocircular edges pass.
    """
    bad = []
    for dart in t.edges():
        s1 = t.edge_sign(dart)
        s2 = t.edge_sign(t.partner(dart))
        if s1 > 0 or s2 > 0:
            bad.append((dart, max(s1, s2)))
    return bad


def _segment_meets_disk(c, r2, p, q) -> bool:
    """Does the open segment pq enter the open disk?  Exact."""
    if norm2(vsub(p, c)) < r2 or norm2(vsub(q, c)) < r2:
        return True
    d = vsub(q, p)
    t = dot(vsub(c, p), d)
    n = norm2(d)
    if not 0 < t < n:
        return False
    foot = vadd(p, smul(t / n, d))
    return norm2(vsub(foot, c)) < r2


def disk_audit(t: GeodesicTriangulation, cap: int = None):
    """Check every triangle's circumdisk immersed into the surface.

    The edge test is only local; a disk can wrap through a wide
    cylinder and swallow a singularity several charts away.  For each
    triangle the neighboring charts are developed outward as long as
    their edges still enter the open disk, and any vertex image landing
    strictly inside is a violation.  Returns (triangle, vertex image,
    crossed edge directions) triples.
    """
    if cap is None:
        cap = 50 * t.n_triangles + 100
    out = []
    for root in range(t.n_triangles):
        c, r2 = circumcircle(*t.verts[root])
        stack = [(root, DilationMap.identity(), None)]
        visited = 0
        while stack:
            tri, dev, entry = stack.pop()
            visited += 1
            if visited > cap:
                raise RuntimeError("empty-disk audit did not stabilize")
            vs = [dev(v) for v in t.verts[tri]]
            hit = next((w for w in vs if norm2(vsub(w, c)) < r2), None)
            if hit is not None:
                dirs = []
                for k in range(3):
                    vec = primitive(vsub(vs[(k + 1) % 3], vs[k]))
                    if vec not in dirs:
                        dirs.append(vec)
                out.append((root, hit, tuple(dirs)))
                break
            for k in range(3):
                if k == entry:
                    continue
                if not _segment_meets_disk(c, r2, vs[k], vs[(k + 1) % 3]):
                    continue
                (t2, k2), m = t.glue[(tri, k)]
                stack.append((t2, dev * m.inverse(), k2))
    return out


# -- cocircular merging -------------------------------------------------------


@dataclass(frozen=True)
class Face:
    """Convex face inscribed in a Delaunay disk, in its own chart."""

    verts: tuple  # developed boundary vertices, ccw
    labels: tuple  # cone point under each vertex
    darts: tuple  # triangulation dart realizing each boundary side
    center: tuple  # exact circumcenter
    r2: object  # exact squared radius

    @property
    def degree(self) -> int:
        return len(self.verts)


@dataclass(frozen=True)
class PatternSignature:
    """Canonical code of the faces-with-glued-sides combinatorial map.

    Two polygonations get equal signatures exactly when some
    relabeling of faces and rotation of their sides matches them.
    """

    code: tuple

    def __str__(self):
        return "|".join(
            "%d:%s" % (row[0], ",".join("%d.%d" % ps for ps in row[1:]))
            for row in self.code
        )


@dataclass(frozen=True)
class DelaunayPolygonation:
    faces: tuple
    pattern: PatternSignature
    triangulation: GeodesicTriangulation
    flips: tuple

    @property
    def n_faces(self) -> int:
        return len(self.faces)


@dataclass(frozen=True)
class CylinderObstruction:
    """Wide dilation cylinder that prevents any Delaunay polygonation."""

    cylinder: Cylinder
    parts: tuple
    flips: tuple


def pattern_signature(d: DelaunayPolygonation) -> PatternSignature:
    """The polygonation's relabeling-invariant combinatorial code."""
    return d.pattern


def _merge_faces(t: GeodesicTriangulation):
    """Union triangles across exactly-cocircular edges into faces."""
    merge = set()
    for dart in t.edges():
        if t.edge_sign(dart) == 0:
            merge.add(dart)
            merge.add(t.partner(dart))

    dev = {}  # triangle -> map into its face's root chart
    face_of = {}
    roots = []
    for root in range(t.n_triangles):
        if root in face_of:
            continue
        roots.append(root)
        dev[root] = DilationMap.identity()
        face_of[root] = root
        stack = [root]
        while stack:
            tri = stack.pop()
            for k in range(3):
                if (tri, k) not in merge:
                    continue
                (t2, _), m = t.glue[(tri, k)]
                m2 = dev[tri] * m.inverse()
                if t2 in dev:
                    if not (dev[t2].a == m2.a and dev[t2].b == m2.b):
                        raise RuntimeError(
                            "cocircular region wraps around a cone point")
                    continue
                dev[t2] = m2
                face_of[t2] = root
                stack.append(t2)

    faces = []
    dart_pos = {}
    for root in roots:
        # walk the boundary: rotate ccw around each corner inside the face
        start = next(
            (tri, k)
            for tri in sorted(tt for tt, r in face_of.items() if r == root)
            for k in range(3)
            if (tri, k) not in merge
        )
        vs, ls, ds = [], [], []
        dart = start
        while True:
            tri, k = dart
            vs.append(dev[tri](t.verts[tri][k]))
            ls.append(t.labels[tri][k])
            ds.append(dart)
            nxt = (tri, (k + 1) % 3)
            while nxt in merge:
                (t2, k2), _ = t.glue[nxt]
                nxt = (t2, (k2 + 1) % 3)
            dart = nxt
            if dart == start:
                break
        center, r2 = circumcircle(vs[0], vs[1], vs[2])
        for v in vs:
            if norm2(vsub(v, center)) != r2:
                raise RuntimeError("merged face is not inscribed")
        for j, d in enumerate(ds):
            dart_pos[d] = (len(faces), j)
        faces.append(Face(tuple(vs), tuple(ls), tuple(ds), center, r2))
    return faces, dart_pos


def _best_encoding(t, faces, dart_pos):
    """Minimal code over all (root face, rotation) choices, with the
    face visit order that realizes it."""
    adj = [
        [dart_pos[t.partner(d)] for d in f.darts]
        for f in faces
    ]
    deg = [f.degree for f in faces]

    def encode(f0, s0):
        frame = {f0: (0, s0)}
        seq = [f0]
        out = []
        qi = 0
        while qi < len(seq):
            f = seq[qi]
            qi += 1
            _, rot = frame[f]
            row = [deg[f]]
            for j in range(deg[f]):
                pf, ps = adj[f][(rot + j) % deg[f]]
                if pf not in frame:
                    frame[pf] = (len(seq), ps)
                    seq.append(pf)
                pidx, prot = frame[pf]
                row.append((pidx, (ps - prot) % deg[pf]))
            out.append(tuple(row))
        return tuple(out), tuple(seq)

    return min(encode(f, s) for f in range(len(faces)) for s in range(deg[f]))


def _signature(t, faces, dart_pos) -> PatternSignature:
    code, _ = _best_encoding(t, faces, dart_pos)
    return PatternSignature(code)


def pattern_signature(d: DelaunayPolygonation) -> PatternSignature:
    return d.pattern


def canonical_face_order(d: DelaunayPolygonation) -> tuple:
    """Face indices in the order the canonical pattern code visits them.

    Two polygonations with equal patterns list matching faces at the
    same positions, which is how faces keep their identity along a
    flow of constant pattern.
    """
    dart_pos = {
        dart: (fi, si)
        for fi, f in enumerate(d.faces)
        for si, dart in enumerate(f.darts)
    }
    _, seq = _best_encoding(d.triangulation, d.faces, dart_pos)
    return seq


# -- the flip loop ------------------------------------------------------------


def _canon(t, dart):
    return min(dart, t.partner(dart))


def _unoriented(d):
    d = primitive(d)
    return vsub((0, 0), d) if d < (0, 0) else d


def _mergeable_ray(cycles, *blocker_sets):
    """A cylinder continues past a cone boundary ray exactly when every
    vertex pinning that ray is a marked regular point, not a genuine
    singularity: removing the marks, the radial leaf there closes up."""
    corners = [x for blk in blocker_sets for x in blk]
    return bool(corners) and all(not cycles[x].is_singular for x in corners)


def _probe_obstruction(surface, dirs, flips):
    """Chase the given directions for a cylinder of angle >= pi.

    Every maximal cylinder of a polygonal presentation is pinned to a
    cone narrower than pi by the vertices on its transversal chords, so
    a wide cylinder can only exist on the underlying surface where some
    of those vertices are mere marked points.  Each detected part whose
    cone boundary is blocked by marked points alone enqueues slightly
    rotated probe directions, which walks the whole chain of adjacent
    parts; chains are then merged across marked-only rays.
    """
    cycles = {
        corner: cyc
        for cyc in surface.vertex_cycles()
        for corner in cyc.corners
    }
    queue, seen = [], set()

    def push(d):
        d = _unoriented(d)
        if d not in seen:
            seen.add(d)
            queue.append(d)

    for d in dirs:
        push(d)
    for p, poly in enumerate(surface.polygons):
        for i in range(len(poly)):
            push(surface.side_vector((p, i)))
    for _, vec in flips:
        push(vec)

    parts = {}

    def known_past(ray, orientation):
        # some detected part already sits on the far side of this ray
        edge = (lambda c: c.cone.start) if orientation > 0 else (
            lambda c: c.cone.end)
        return any(same_direction(edge(c), ray) for c in parts.values())

    def absorb(c):
        if c.flat or c.canonical_key() in parts:
            return
        parts[c.canonical_key()] = c
        grow.append((c.cone.start, c.blockers[0], -1))
        grow.append((c.cone.end, c.blockers[1], 1))

    grow = []
    probes = 0
    while (queue or grow) and probes < 64:
        if grow:
            ray, blk, orientation = grow.pop()
            if not _mergeable_ray(cycles, blk) or known_past(ray, orientation):
                continue
            # nudge past the marked ray into the neighbouring part's cone
            for k in (3, 6, 9):
                d = vadd(ray, smul(rat(orientation, 2 ** k), rot90(ray)))
                probes += 1
                for c in detect_cylinders(surface, d, budget=400,
                                          max_period=16):
                    absorb(c)
                if known_past(ray, orientation):
                    break
            continue
        d = queue.pop(0)
        probes += 1
        for c in detect_cylinders(surface, d, budget=400, max_period=16):
            absorb(c)

    by_mult = {}
    for key in sorted(parts):
        c = parts[key]
        by_mult.setdefault(c.multiplier, []).append(c)
    for group in by_mult.values():
        nxt_of = {}
        has_prev = set()
        for x in group:  # mergeable-adjacency edges between cones
            for y in group:
                if (y is not x
                        and same_direction(x.cone.end, y.cone.start)
                        and _mergeable_ray(cycles, x.blockers[1],
                                           y.blockers[0])
                        and id(x) not in nxt_of):
                    nxt_of[id(x)] = y
                    has_prev.add(id(y))
        chains = []
        for x in group:
            if id(x) in has_prev:
                continue
            chain = [x]
            while id(chain[-1]) in nxt_of and len(chain) < len(group):
                chain.append(nxt_of[id(chain[-1])])
            chains.append(chain)
        chains.sort(key=lambda ch: -sum(c.theta_float() for c in ch))
        for chain in chains:
            try:
                merged = merge_wide_cylinder(chain)
            except ValueError:
                continue
            return CylinderObstruction(merged, tuple(chain), tuple(flips))
    return None


def flip_to_delaunay(t: GeodesicTriangulation, flip_budget: int = None):
    """Flip until Delaunay, then merge cocircular faces.

    Returns a DelaunayPolygonation, or a CylinderObstruction when a
    cylinder of angle >= pi blocks it: the cylinder shows up either as a
    non-terminating flip loop, as a circumdisk wrapping onto a
    singularity, or -- with marked points chopping it into quiet
    sub-cylinders -- through the explicit cylinder screen at the end.
    A worklist keyed by the smallest dart keeps the flip sequence
    reproducible.
    """
    if flip_budget is None:
        flip_budget = 50 * t.n_triangles ** 2
    pending = set(t.edges())
    flips = []
    while pending:
        dart = min(pending)
        pending.remove(dart)
        if t.glue.get(dart, (None,))[0] is None:
            continue
        if t.edge_sign(dart) <= 0:
            continue
        if len(flips) >= flip_budget:
            hit = _probe_obstruction(t.surface, [], flips)
            if hit is not None:
                return hit
            raise FlipBudgetError(flip_budget, flips)
        a, b, _, _ = t.quad(dart)
        flips.append((dart, primitive(vsub(b, a))))
        t.flip(dart)
        t1, _ = dart
        t2 = t.partner((t1, 1))[0]
        for tri in (t1, t2):
            for k in range(3):
                pending.add(_canon(t, (tri, k)))

    # wrapping circumdisks need a dilation cylinder's fixed point; on a flat
    # surface locally Delaunay is globally Delaunay, and auditing a very
    # eccentric flat torus would develop through millions of empty charts
    dilating = any(m.a != 1 for _, m in t.glue.values())
    wraps = disk_audit(t) if dilating else []
    # marked points let the flips settle even inside a wide cylinder (they
    # are legitimate face vertices), so a clean triangulation must still be
    # screened for cylinders that merge to >= pi once the marks are ignored
    marked = any(not cyc.is_singular for cyc in t.surface.vertex_cycles())
    if wraps or (dilating and marked):
        dirs = [v for _, _, vecs in wraps for v in vecs]
        for tri, k in t.edges():
            dirs.append(vsub(t.verts[tri][(k + 1) % 3], t.verts[tri][k]))
        hit = _probe_obstruction(t.surface, dirs, flips)
        if hit is not None:
            return hit
        if wraps:
            raise RuntimeError(
                "edge flips converged but a circumdisk swallows a "
                "singularity and no wide cylinder was identified")

    faces, dart_pos = _merge_faces(t)
    sig = _signature(t, faces, dart_pos)
    return DelaunayPolygonation(tuple(faces), sig, t, tuple(flips))
