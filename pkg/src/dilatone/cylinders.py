"""Cylinder detection and the crossing-moduli bound.

A cylinder is a maximal family of closed leaves of one directional
foliation.  On a dilation surface they come in two kinds: flat ones
(trivial holonomy, a one-parameter family of parallel closed leaves in
a single direction) and dilation ones (holonomy z -> lambda*z + b with
lambda != 1, a single closed leaf per direction but a whole open cone
of directions).

Detection is exact end to end: periodic parameters of return maps come
from ``affine1d``, the closed leaf is re-traced, and the cylinder's
invariants are read off the developed holonomy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .affine1d import PeriodicFamily, PeriodicPoint, periodic_points
from .geom import (
    Cone,
    cone_from_segment,
    cross,
    dot,
    norm2,
    orient2d,
    primitive,
    segment_param,
    smul,
    vadd,
    vneg,
    vsub,
)
from .scalars import ONE, rat, sqrt_exact
from .tracer import _first_hit, return_map, trace

INF = float("inf")


def tan_half_angle(u, w):
    """tan of half the ccw angle from u to w (angle <= pi).

    Exact: rational whenever |u||w| is, a sympy surd otherwise.  Uses
    tan(t/2) = sin(t) / (1 + cos(t)) on the normalized pair.
    """
    c = cross(u, w)
    if c < 0:
        raise ValueError("angle not in (0, pi]")
    if c == 0:
        if dot(u, w) > 0:
            raise ValueError("zero angle")
        return INF  # angle exactly pi
    n = norm2(u) * norm2(w)
    r = sqrt_exact(n)
    if r is not None:
        return c / (r + dot(u, w))
    import sympy as sp

    f = lambda q: sp.Rational(q.numerator, q.denominator)
    return f(c) / (sp.sqrt(f(n)) + f(dot(u, w)))


@dataclass
class Cylinder:
    kind: str  # "flat" | "dilation"
    direction: tuple  # primitive; for dilation kind any interior direction
    itinerary: tuple  # sides crossed by one period of the core, cyclic
    multiplier: object  # lambda >= 1 (exactly 1 for flat)
    modulus: object  # exact scalar when possible; inf for angle >= pi
    cone: Optional[Cone]  # dilation: the full cone of core directions
    core: tuple  # ((polygon, (P, Q)), ...) chords of the closed leaf
    fixed_point: Optional[tuple] = None  # dilation: developed center
    family: Optional[tuple] = None  # flat: (transversal, lo, hi)
    blockers: Optional[tuple] = None  # corners pinning (cone.start, cone.end)

    @property
    def flat(self) -> bool:
        return self.kind == "flat"

    def theta_float(self) -> float:
        return 0.0 if self.cone is None else self.cone.width_float()

    def modulus_float(self) -> float:
        return float(self.modulus)

    def canonical_key(self):
        rots = [
            self.itinerary[i:] + self.itinerary[:i]
            for i in range(len(self.itinerary))
        ]
        return (self.kind, min(rots), self.multiplier)


def fixed_points(rmap, max_period: int):
    """Periodic parameters of a return map, solved exactly.

    Composes resolved branches up to ``max_period`` deep and solves
    slope*x + offset = x on each composed domain.  Isolated solutions
    come back as PeriodicPoint (slope != 1), identity compositions as
    PeriodicFamily.  Parameters whose leaf dies in a vertex are
    dropped.
    """
    found = periodic_points(rmap.resolved_branches(), max_period)
    singular = {u for u, _ in rmap.singular_params}
    return [
        f
        for f in found
        if isinstance(f, PeriodicFamily) or f.x not in singular
    ]


def _core_chords(surface, orbit):
    """Chords (one straight segment per polygon visit) of a closed trace."""
    chords = []
    poly, P = orbit.start
    for c in orbit.crossings:
        chords.append((c.polygon, (P, c.point)))
        poly, _ = surface.partner((c.polygon, c.side))
        P = surface.map_across((c.polygon, c.side))(c.point)
    if P != orbit.start[1] or poly != orbit.start[0]:
        # closed up in mid-flight: finish the wrapping chord
        t, kind, data = _first_hit(surface, poly, P, orbit.direction)
        Q = surface.polygons[poly][data] if kind == "vertex" else data[1]
        chords.append((poly, (P, Q)))
    return tuple(chords)


def assemble_cylinder(surface, orbit) -> Cylinder:
    """Build the maximal cylinder around one closed trace.

    Flat holonomy widens the orbit to the full parallel family sharing
    its itinerary; dilating holonomy yields the cone of directions
    whose ray from the holonomy's fixed point crosses the same sides.
    """
    if not orbit.closed:
        raise ValueError("orbit is not closed")
    d = orbit.direction
    # record each crossing by the smaller side of its gluing pair so the
    # same leaf found from either side dedupes to one cylinder
    itinerary = tuple(
        min((c.polygon, c.side), surface.partner((c.polygon, c.side)))
        for c in orbit.crossings
    )
    core = _core_chords(surface, orbit)
    acc = orbit.accumulated_dilation

    if acc == 1:
        c0 = orbit.crossings[0]
        side = (c0.polygon, c0.side)
        rm = return_map(surface, side, d, budget=4 * len(itinerary) + 16)
        a, b = surface.side_points(side)
        u0 = segment_param(a, b, c0.point)
        branch = next(br for br in rm.resolved_branches() if br.contains(u0))
        hol = orbit.period_map.b  # translation by the circumference vector
        band = smul(branch.hi - branch.lo, vsub(b, a))
        return Cylinder(
            "flat",
            primitive(d),
            itinerary,
            ONE,
            abs(cross(band, hol)) / norm2(hol),
            None,
            core,
            family=(side, branch.lo, branch.hi),
        )

    center = orbit.period_map.fixed_point()
    cone = None
    for c in orbit.crossings:
        ca, cb = c.dev_side
        arc = cone_from_segment(center, ca, cb)
        cone = arc if cone is None else cone.intersect(arc)
        if cone is None:
            raise ValueError("closed orbit with empty direction cone")
    lam, direction = acc, primitive(d)
    if lam < 1:
        lam, direction = 1 / lam, vneg(direction)
    if not cone.contains(direction):
        cone = cone.antipode()  # report the cone holding the lam>1 direction
    t = tan_half_angle(cone.start, cone.end)
    # the cone boundary rays pass through crossed-side endpoints; those
    # vertices are what stops the cylinder from opening any wider
    start_blk, end_blk = [], []
    for c in orbit.crossings:
        n = len(surface.polygons[c.polygon])
        corners = ((c.polygon, c.side), (c.polygon, (c.side + 1) % n))
        for w, corner in zip(c.dev_side, corners):
            u = vsub(w, center)
            if cross(u, cone.start) == 0:
                start_blk.append(corner)
            elif cross(u, cone.end) == 0:
                end_blk.append(corner)
    return Cylinder(
        "dilation",
        direction,
        itinerary,
        lam,
        2 * t / (lam - 1),
        cone,
        core,
        fixed_point=center,
        blockers=(
            tuple(dict.fromkeys(start_blk)),
            tuple(dict.fromkeys(end_blk)),
        ),
    )


def merge_wide_cylinder(parts) -> Cylinder:
    """Join same-multiplier sub-cylinders whose cones chain into one
    cylinder of total angle >= pi (modulus becomes infinite).

    A cylinder cut by several transversal chords is detected once per
    chord itinerary, each time with a partial cone; geometrically it is
    one cylinder whose angle is the sum.
    """
    parts = list(parts)
    total = sum(p.theta_float() for p in parts)
    lam = parts[0].multiplier
    itinerary = tuple(x for p in parts for x in p.itinerary)
    modulus = INF if total >= math.pi - 1e-12 else None
    if modulus is None:
        raise ValueError("merged angle below pi; keep the parts instead")
    cone = Cone(parts[0].cone.start, parts[-1].cone.end)
    blockers = None
    if parts[0].blockers is not None and parts[-1].blockers is not None:
        blockers = (parts[0].blockers[0], parts[-1].blockers[1])
    return Cylinder(
        "dilation",
        parts[0].direction,
        itinerary,
        lam,
        modulus,
        cone,
        tuple(x for p in parts for x in p.core),
        fixed_point=parts[0].fixed_point,
        blockers=blockers,
    )


def detect_cylinders(surface, direction, budget: int = 10**3,
                     max_period: int = 32):
    """All cylinders of the foliation in one direction, via return maps
    on every gluing side not parallel to it."""
    d = primitive((rat(direction[0]), rat(direction[1])))
    seen = {}
    sides = sorted(set(surface.gluings) | set(surface.gluings.values()))
    for side in sides:
        if cross(surface.side_vector(side), d) == 0:
            continue
        rm = return_map(surface, side, d, budget=budget)
        for f in fixed_points(rm, max_period):
            if isinstance(f, PeriodicFamily):
                u = (f.lo + f.hi) / 2
            else:
                u = f.x
            try:
                orbit = trace(surface, rm.point_at(u), d, budget=budget)
            except ValueError:
                continue  # fixed parameter sits on a singular vertex
            if not orbit.closed:
                continue  # the parameter's leaf dies in a vertex
            cyl = assemble_cylinder(surface, orbit)
            seen.setdefault(cyl.canonical_key(), cyl)
    return sorted(seen.values(), key=lambda c: c.canonical_key())


# -- direction sweeps ---------------------------------------------------------


@dataclass
class SweepReport:
    cylinders: list
    arcs: list  # covered (start_angle, end_angle) radians, merged, sorted
    largest_gap_degrees: float
    sampled: int
    unresolved: int

    @property
    def n_cylinders(self) -> int:
        return len(self.cylinders)


def _coverage(cylinders, point_dirs):
    # reversing a closed leaf closes it up in the opposite foliation, so
    # every cylinder covers its cone and the antipodal one
    spans = []
    for c in cylinders:
        if c.cone is not None:
            a = math.atan2(float(c.cone.start[1]), float(c.cone.start[0]))
            w = c.cone.width_float()
        else:
            a = math.atan2(float(c.direction[1]), float(c.direction[0]))
            w = 0.0
        spans.append((a % (2 * math.pi), w))
        spans.append(((a + math.pi) % (2 * math.pi), w))
    for d in point_dirs:
        a = math.atan2(d[1], d[0])
        spans.append((a % (2 * math.pi), 0.0))
        spans.append(((a + math.pi) % (2 * math.pi), 0.0))
    return spans


def _largest_gap(spans) -> float:
    if not spans:
        return 2 * math.pi
    # merge on the circle: unroll arcs, sort, scan
    arcs = sorted((s, s + w) for s, w in spans)
    merged = []
    for lo, hi in arcs:
        if merged and lo <= merged[-1][1] + 1e-15:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    gaps = [b[0] - a[1] for a, b in zip(merged, merged[1:])]
    gaps.append(merged[0][0] + 2 * math.pi - merged[-1][1])
    return max(0.0, max(gaps))


def sweep(surface, n_directions: int, budget: int = 10**4,
          max_period: int = 32, saddle_crossings: int = 4) -> SweepReport:
    """Sample directions around the circle, detect cylinders in each,
    and measure how much of the circle their direction sets cover.

    Samples are equispaced rational approximations plus every
    saddle-connection direction (crossing depth ``saddle_crossings``;
    the full trace budget would make that enumeration explode), since
    flat cylinders cover single directions that generic samples miss.
    """
    from .surface import _rational_direction  # local: avoids cycle at import
    from .tracer import saddle_connections

    dirs = []
    for k in range(n_directions):
        dirs.append(_rational_direction(2 * math.pi * k / n_directions, 10**4))
    for sc in saddle_connections(surface, saddle_crossings):
        dirs.append(sc.direction)
        dirs.append(vneg(sc.direction))

    cylinders = {}
    unresolved = 0
    seen_dirs = set()
    for d in dirs:
        d = primitive(d)
        if d in seen_dirs:
            continue
        seen_dirs.add(d)
        for side in sorted(set(surface.gluings)):
            if cross(surface.side_vector(side), d) == 0:
                continue
            rm = return_map(surface, side, d, budget=budget)
            unresolved += sum(1 for b in rm.branches if not b.resolved)
            for f in fixed_points(rm, max_period):
                u = (f.lo + f.hi) / 2 if isinstance(f, PeriodicFamily) else f.x
                try:
                    orbit = trace(surface, rm.point_at(u), d, budget=budget)
                except ValueError:
                    continue
                if not orbit.closed:
                    continue
                cyl = assemble_cylinder(surface, orbit)
                cylinders.setdefault(cyl.canonical_key(), cyl)

    cyls = sorted(cylinders.values(), key=lambda c: c.canonical_key())
    flat_dirs = [
        (float(c.direction[0]), float(c.direction[1])) for c in cyls if c.flat
    ]
    spans = _coverage([c for c in cyls if not c.flat], flat_dirs)
    gap = _largest_gap(spans)
    arcs = sorted((s % (2 * math.pi), (s + w) % (2 * math.pi)) for s, w in spans if w > 0)
    return SweepReport(cyls, arcs, math.degrees(gap), len(seen_dirs), unresolved)


# -- crossing moduli (the M1*M2 <= 1 bound) -----------------------------------


def _segments_cross(a1, a2, b1, b2) -> bool:
    """Do the closed segments meet in a genuine transversal point?"""
    if cross(vsub(a2, a1), vsub(b2, b1)) == 0:
        return False
    o1 = orient2d(a1, a2, b1)
    o2 = orient2d(a1, a2, b2)
    o3 = orient2d(b1, b2, a1)
    o4 = orient2d(b1, b2, a2)
    return o1 * o2 <= 0 and o3 * o4 <= 0 and not (
        o1 == 0 and o2 == 0 and o3 == 0 and o4 == 0
    )


def cylinders_cross(c1: Cylinder, c2: Cylinder) -> bool:
    """Transversal crossing of the two cores (chords compared within
    each shared polygon chart)."""
    if cross(c1.direction, c2.direction) == 0:
        return False
    for p1, (a1, a2) in c1.core:
        for p2, (b1, b2) in c2.core:
            if p1 == p2 and _segments_cross(a1, a2, b1, b2):
                return True
    return False


def _product_at_most_one(m1, m2) -> bool:
    if m1 == INF or m2 == INF:
        return False
    try:
        return bool(m1 * m2 <= 1)
    except TypeError:  # sympy surd times gmpy rational
        import sympy as sp

        f = lambda q: q if isinstance(q, sp.Expr) else sp.Rational(
            q.numerator, q.denominator
        )
        return bool(f(m1) * f(m2) <= 1)


def check_moduli_lemma(cylinders, surface):
    """Every transversally crossing pair must satisfy M1 * M2 <= 1.

    Returns the violating pairs; an empty list is the expected outcome
    on any dilation surface.
    """
    violations = []
    for i, c1 in enumerate(cylinders):
        for c2 in cylinders[i + 1:]:
            if not cylinders_cross(c1, c2):
                continue
            if not _product_at_most_one(c1.modulus, c2.modulus):
                violations.append((c1, c2, c1.modulus_float() * c2.modulus_float()))
    return violations
