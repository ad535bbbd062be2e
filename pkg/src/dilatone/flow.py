"""The SL(2,R) action and Teichmuller degeneration tracking.

Linear maps of determinant one commute with the gluing dilations, so
they act on dilation surfaces polygon by polygon.  Flowing a surface
with diag(r, 1/r) and recomputing its Delaunay polygonation at each
time yields, per face, a sequence of inscribed polygons; normalizing
each to a point of the shape sphere lets the tail of the sequence be
classified by how its vertices cluster on the circumcircle.

The flow stays exact as long as the times are logarithms of rationals
(``ratio=`` arguments); every snapshot is then an ordinary rational
surface and the flips stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .delaunay import (
    CylinderObstruction,
    DelaunayPolygonation,
    FlipBudgetError,
    canonical_face_order,
    flip_to_delaunay,
    initial_triangulation,
)
from .geom import circumcircle, cross, norm2, orient2d, smul, vsub
from .scalars import rat, sqrt_exact
from .surface import DilationSurface


@dataclass(frozen=True)
class Sl2Matrix:
    """2x2 matrix of determinant one, exact when the entries are rational."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if self.exact:
            if det != 1:
                raise ValueError("determinant must be 1, got %s" % (det,))
        elif abs(det - 1.0) > 1e-9:
            raise ValueError("determinant must be 1, got %s" % (det,))

    @property
    def exact(self) -> bool:
        return not any(isinstance(x, float) for x in
                       (self.a, self.b, self.c, self.d))

    @staticmethod
    def identity() -> "Sl2Matrix":
        return Sl2Matrix(rat(1), rat(0), rat(0), rat(1))

    def __mul__(self, other: "Sl2Matrix") -> "Sl2Matrix":
        return Sl2Matrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Sl2Matrix":
        return Sl2Matrix(self.d, -self.b, -self.c, self.a)

    def apply(self, v):
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)


def teichmuller(t: float = None, *, ratio=None) -> Sl2Matrix:
    """diag(e^t, e^-t); pass ``ratio=r`` for the exact diag(r, 1/r).

    The exact form keeps every flowed surface rational, which is what
    the flips need; a float ``t`` gives the approximate matrix.
    """
    if (t is None) == (ratio is None):
        raise ValueError("pass exactly one of t, ratio")
    if ratio is not None:
        r = rat(ratio)
        if r <= 0:
            raise ValueError("ratio must be positive")
        return Sl2Matrix(r, rat(0), rat(0), 1 / r)
    e = math.exp(t)
    return Sl2Matrix(e, 0.0, 0.0, 1.0 / e)


def conjugated(d1, d2, t: float = None, *, ratio=None) -> Sl2Matrix:
    """The flow contracting direction ``d1`` and dilating ``d2``.

    diag(r, 1/r) conjugated into the basis (d2, d1); exact for rational
    directions and ``ratio``.
    """
    d1 = (rat(d1[0]), rat(d1[1]))
    d2 = (rat(d2[0]), rat(d2[1]))
    den = cross(d2, d1)
    if den == 0:
        raise ValueError("dependent directions")
    g = teichmuller(t, ratio=ratio)
    r, s = g.a, g.d
    # B * diag(r, s) * B^-1 with B = [d2 | d1], det B = den
    p, q = d2
    u, v = d1
    return Sl2Matrix(
        (r * p * v - s * u * q) / den,
        (s - r) * p * u / den,
        (r - s) * q * v / den,
        (s * p * v - r * u * q) / den,
    )


def apply_sl2(A: Sl2Matrix, s: DilationSurface) -> DilationSurface:
    """Push the surface through the linear map, regluing as before.

    Paired sides stay anti-parallel (the map is linear), so the same
    combinatorial gluings remain valid and their dilation factors are
    re-derived from the new coordinates.
    """
    polygons = [[A.apply(v) for v in poly] for poly in s.polygons]
    pairs = [(u, w) for u, w in s.gluings.items() if u <= w]
    return DilationSurface(polygons, pairs, marked=sorted(s.marked))


# -- normalized shapes ---------------------------------------------------------


@dataclass(frozen=True)
class NormalizedPolygon:
    """An inscribed polygon up to positive scaling.

    ``sides`` is the exact canonical representative of the ray of side
    tuples (unit euclidean norm when that is rational, else unit L1
    norm); ``unit`` the float side tuple of euclidean norm one, which
    is the honest point of the shape sphere.
    """

    sides: tuple
    unit: tuple
    center: tuple  # circumcenter of the canonical realization
    r2: object  # exact squared circumradius

    @property
    def degree(self) -> int:
        return len(self.sides)

    def verts(self):
        """Canonical realization, anchored at the origin."""
        out, p = [], (rat(0), rat(0))
        for z in self.sides:
            out.append(p)
            p = (p[0] + z[0], p[1] + z[1])
        return tuple(out)

    def vertex_angles(self) -> tuple:
        """Float angular positions of the vertices on the circumcircle."""
        cx, cy = float(self.center[0]), float(self.center[1])
        return tuple(
            math.atan2(float(y) - cy, float(x) - cx) % (2 * math.pi)
            for x, y in self.verts()
        )


def normalize(polygon) -> NormalizedPolygon:
    """Scale a cocircular polygon to its canonical shape representative.

    Rational input stays exact; float input (approximate snapshots,
    constructed test shapes) goes through the same construction with a
    relative cocircularity tolerance instead of exact equality.
    """
    verts = [tuple(v) for v in polygon]
    exact = not any(
        isinstance(x, float) for v in verts for x in v)
    sides = [vsub(verts[(i + 1) % len(verts)], verts[i])
             for i in range(len(verts))]
    s2 = sum(norm2(z) for z in sides)
    if s2 == 0:
        raise ValueError("zero polygon")
    if exact:
        root = sqrt_exact(rat(s2))
        scale = 1 / root if root is not None else 1 / sum(
            abs(z[0]) + abs(z[1]) for z in sides)
    else:
        scale = 1.0 / math.sqrt(s2)
    canon = tuple(smul(scale, z) for z in sides)
    f = 1.0 / math.sqrt(float(s2))
    unit = tuple((float(z[0]) * f, float(z[1]) * f) for z in sides)

    zero = rat(0) if exact else 0.0
    run, p = [(zero, zero)], (zero, zero)
    for z in canon[:-1]:
        p = (p[0] + z[0], p[1] + z[1])
        run.append(p)
    a, b = run[0], run[1]
    c = next(v for v in run[2:] if orient2d(a, b, v) != 0)
    center, r2 = circumcircle(a, b, c)
    for v in run:
        err = norm2(vsub(v, center)) - r2
        if (err != 0) if exact else (abs(err) > 1e-9 * float(r2)):
            raise ValueError("vertices are not cocircular")
    return NormalizedPolygon(canon, unit, center, r2)


# -- degeneration classification -----------------------------------------------


@dataclass(frozen=True)
class DegenerationLabel:
    kind: str  # Convergent | Type1 | Type2 | Type3 | Unclassified
    long_sides: tuple
    clusters: tuple


def _clusters(angles, epsilon):
    """Split circularly ordered vertices at angular gaps > epsilon."""
    order = sorted(range(len(angles)), key=lambda i: angles[i])
    cuts = []
    for k, i in enumerate(order):
        j = order[(k + 1) % len(order)]
        gap = (angles[j] - angles[i]) % (2 * math.pi)
        if gap > epsilon:
            cuts.append(k)
    if not cuts:
        return [tuple(order)], []
    groups = []
    for a, b in zip(cuts, cuts[1:] + [cuts[0] + len(order)]):
        groups.append(tuple(order[(k + 1) % len(order)]
                            for k in range(a, b)))
    gaps = [order[k] for k in cuts]  # vertex before each gap = side index
    return groups, gaps


def _is_cauchy(seq, tol) -> bool:
    if len(seq) < 2:
        return True
    u, v = seq[-2].unit, seq[-1].unit
    if len(u) != len(v):
        return False
    return all(
        abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol
        for a, b in zip(u, v)
    )


def classify(seq, epsilon: float = 1e-3,
             cauchy_tol: float = 1e-6) -> DegenerationLabel:
    """Label one face's shape sequence by its final snapshot.

    Vertices of the last shape are clustered on its circumcircle at
    angular scale ``epsilon``: one cluster means every vertex converges
    to a point (Type1, the side closing the big gap is the long side),
    two clusters give Type2 with the two crossing sides long, a proper
    merge with at least three clusters and a settled shape is Type3,
    and a settled shape with no merging at all is Convergent.  Anything
    else is reported as Unclassified rather than forced into a type.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not seq:
        raise ValueError("empty shape sequence")
    last = seq[-1]
    groups, gap_sides = _clusters(last.vertex_angles(), epsilon)
    clusters = tuple(tuple(sorted(g)) for g in groups)
    if len(groups) == 1:
        if gap_sides:  # a dominant gap: everything else collapsed
            return DegenerationLabel("Type1", (gap_sides[0],), clusters)
        return DegenerationLabel("Unclassified", (), clusters)
    if len(groups) == 2:
        return DegenerationLabel("Type2", tuple(sorted(gap_sides)), clusters)
    settled = _is_cauchy(seq, cauchy_tol)
    if len(groups) < last.degree and settled:
        return DegenerationLabel("Type3", (), clusters)
    if len(groups) == last.degree and settled:
        return DegenerationLabel("Convergent", (), clusters)
    return DegenerationLabel("Unclassified", (), clusters)


# -- flowing a surface ---------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    ratio: object  # r with t = log r
    surface: DilationSurface
    polygonation: Optional[DelaunayPolygonation]
    obstruction: Optional[CylinderObstruction]

    @property
    def t(self) -> float:
        return math.log(float(self.ratio))

    @property
    def pattern(self):
        return None if self.polygonation is None else self.polygonation.pattern


@dataclass(frozen=True)
class FlowTrace:
    snapshots: tuple
    segments: tuple  # (first, last) snapshot index per constant pattern
    labels: tuple  # one DegenerationLabel per face of the final segment
    face_order: tuple  # canonical face indices matching ``labels``
    truncated: bool
    diagnostic: str


def track(s: DilationSurface, ratios, dirs=None, epsilon: float = 1e-3,
          cauchy_tol: float = 1e-6, flip_budget: int = None) -> FlowTrace:
    """Flow by t = log(r) for each r, polygonate, and classify the tail.

    Snapshots are grouped into maximal runs of equal Delaunay pattern;
    within the final run the faces keep their identity (matched through
    the canonical pattern code), so each face yields a shape sequence
    for ``classify``.  An obstruction or flip failure truncates the
    trace and is reported in the diagnostic.
    """
    ratios = [rat(r) for r in ratios]
    if any(r2 <= r1 for r1, r2 in zip(ratios, ratios[1:])):
        raise ValueError("times must increase")
    snapshots, truncated, diagnostic = [], False, ""
    for r in ratios:
        A = teichmuller(ratio=r) if dirs is None else conjugated(
            dirs[0], dirs[1], ratio=r)
        s_t = apply_sl2(A, s)
        try:
            out = flip_to_delaunay(initial_triangulation(s_t),
                                   flip_budget=flip_budget)
        except FlipBudgetError as e:
            truncated, diagnostic = True, "t=log(%s): %s" % (r, e)
            break
        if isinstance(out, CylinderObstruction):
            snapshots.append(Snapshot(r, s_t, None, out))
            truncated = True
            diagnostic = "t=log(%s): cylinder obstruction" % (r,)
            break
        snapshots.append(Snapshot(r, s_t, out, None))

    segments = []
    for i, snap in enumerate(snapshots):
        if snap.polygonation is None:
            continue
        if segments and snapshots[segments[-1][1]].pattern == snap.pattern:
            segments[-1] = (segments[-1][0], i)
        else:
            segments.append((i, i))

    labels, order = (), ()
    if segments:
        first, last = segments[-1]
        tail = [snapshots[i].polygonation for i in range(first, last + 1)]
        orders = [canonical_face_order(d) for d in tail]
        shapes = [
            [normalize(d.faces[f].verts) for f in o]
            for d, o in zip(tail, orders)
        ]
        order = orders[-1]
        labels = tuple(
            classify([row[k] for row in shapes], epsilon, cauchy_tol)
            for k in range(len(order))
        )
    return FlowTrace(tuple(snapshots), tuple(segments), labels, order,
                     truncated, diagnostic)


# -- forbidden configurations --------------------------------------------------


def _face_positions(d: DelaunayPolygonation):
    return {
        dart: (fi, si)
        for fi, f in enumerate(d.faces)
        for si, dart in enumerate(f.darts)
    }


def _union_across(d, f1, s1, f2, s2):
    """Both faces developed into f1's chart, glued along side s1 of f1."""
    from .geom import DilationMap

    a, b = f1.verts[s1], f1.verts[(s1 + 1) % f1.degree]
    c, e = f2.verts[s2], f2.verts[(s2 + 1) % f2.degree]
    m = DilationMap.from_sides((c, e), (a, b))  # sends c -> b, e -> a
    w = [m(v) for v in f2.verts]
    n1, n2 = f1.degree, f2.degree
    union = [f1.verts[(s1 + 1 + k) % n1] for k in range(n1)]
    union += [w[(s2 + 2 + k) % n2] for k in range(n2 - 2)]
    return union


def audit_degenerations(d: DelaunayPolygonation, labels, face_order):
    """Check classified faces against the forbidden gluing patterns.

    The long side of a Type1 face may not be glued to the long side of
    another Type1 or Type2 face, and two Type2 faces glued along long
    sides may not bulge strictly convex at a junction (that would push
    the neighbor's corners into a Delaunay disk).  Straight junctions
    pass: a flat cylinder chops into inscribed slabs stacked edge to
    edge, and those are honestly Delaunay.  Returns a list of violation
    records, empty when the configuration is admissible.
    """
    pos = _face_positions(d)
    t = d.triangulation
    label_of = {face_order[k]: labels[k] for k in range(len(face_order))}
    seen = set()
    violations = []
    for k, fi in enumerate(face_order):
        lab = labels[k]
        for s in lab.long_sides:
            dart = d.faces[fi].darts[s]
            fj, sj = pos[t.partner(dart)]
            if frozenset({(fi, s), (fj, sj)}) in seen:
                continue
            seen.add(frozenset({(fi, s), (fj, sj)}))
            other = label_of.get(fj)
            if other is None or sj not in other.long_sides:
                continue
            kinds = {lab.kind, other.kind}
            if "Type1" in kinds and kinds <= {"Type1", "Type2"}:
                violations.append(("long-to-long", fi, s, fj, sj))
            elif kinds == {"Type2"}:
                u = _union_across(d, d.faces[fi], s, d.faces[fj], sj)
                j1 = len(d.faces[fi].verts) - 1  # junction corners
                j2 = 0
                bulge = [
                    orient2d(u[j - 1], u[j], u[(j + 1) % len(u)]) > 0
                    for j in (j1, j2)
                ]
                if any(bulge):
                    violations.append(("convex-type2-union", fi, s, fj, sj))
    return violations
