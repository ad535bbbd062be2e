"""Piecewise-affine maps of an interval and their periodic points.

The 1-D dynamical side of the package: first-return maps of directional
foliations and affine interval exchanges both reduce to a family of
affine branches x -> slope*x + offset on half-open subintervals of
[0, 1).  Everything here is exact rational arithmetic.

Periodic points are found by composing branches symbolically: a
composition of k branches is again affine on the (interval) set of
points whose orbit follows that itinerary, so solving g(x) = x is a
single exact division.  The number of valid depth-k itineraries grows
only linearly with k for maps whose branch domains are disjoint, which
keeps the search cheap even at period 64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .scalars import ONE, rat


@dataclass(frozen=True)
class AffineBranch:
    """x -> slope*x + offset on the half-open domain [lo, hi).

    ``slope`` must be positive (orientation is preserved throughout the
    package).  ``slope is None`` marks an unresolved branch: the domain
    is known but its dynamics exceeded some budget.  ``itinerary`` is
    opaque bookkeeping for callers (crossed sides, branch labels...).
    """

    lo: object
    hi: object
    slope: object = None
    offset: object = None
    itinerary: tuple = ()

    @property
    def resolved(self) -> bool:
        return self.slope is not None

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo >= self.hi:
            raise ValueError("empty branch domain")
        if self.slope is not None:
            object.__setattr__(self, "slope", rat(self.slope))
            object.__setattr__(self, "offset", rat(self.offset))
            if self.slope <= 0:
                raise ValueError("branch slope must be positive")

    def __call__(self, x):
        if not self.resolved:
            raise ValueError("unresolved branch has no formula")
        return self.slope * x + self.offset

    def contains(self, x) -> bool:
        return self.lo <= x < self.hi

    def image(self):
        """Image interval [f(lo), f(hi)), still half-open."""
        return (self(self.lo), self(self.hi))


def branch_compose(after: AffineBranch, first: AffineBranch) -> Optional[AffineBranch]:
    """The branch ``after o first`` on the points whose first image lands
    in after's domain; None when no point does."""
    lo = max(first.lo, (after.lo - first.offset) / first.slope)
    hi = min(first.hi, (after.hi - first.offset) / first.slope)
    if lo >= hi:
        return None
    return AffineBranch(
        lo,
        hi,
        after.slope * first.slope,
        after.slope * first.offset + after.offset,
        first.itinerary + after.itinerary,
    )


@dataclass(frozen=True)
class PeriodicPoint:
    x: object
    period: int
    multiplier: object
    itinerary: tuple = ()


@dataclass(frozen=True)
class PeriodicFamily:
    """A whole subinterval [lo, hi) of period-``period`` points (the
    composed map is the identity there: flat cylinder behaviour)."""

    lo: object
    hi: object
    period: int
    itinerary: tuple = ()

    @property
    def multiplier(self):
        return ONE


def check_disjoint_domains(branches) -> None:
    ordered = sorted(branches, key=lambda b: b.lo)
    for a, b in zip(ordered, ordered[1:]):
        if a.hi > b.lo:
            raise ValueError("branch domains overlap: [%s,%s) and [%s,%s)" % (a.lo, a.hi, b.lo, b.hi))


class _FoundFirst(Exception):
    pass


def periodic_points(branches, max_period: int, first_only: bool = False):
    """All periodic points of period <= max_period, exactly.

    ``branches`` is a list of resolved AffineBranch with pairwise
    disjoint domains.  Returns PeriodicPoint entries (one per orbit
    point, with its primitive period and the multiplier of the orbit)
    and PeriodicFamily entries for intervals on which some composition
    is the identity.  ``first_only`` stops at the first find, for
    callers who only ask whether any orbit exists.
    """
    branches = list(branches)
    for b in branches:
        if not b.resolved:
            raise ValueError("periodic_points needs resolved branches only")
    check_disjoint_domains(branches)
    if max_period < 1:
        raise ValueError("max_period must be >= 1")

    points = {}  # x -> PeriodicPoint with minimal period
    families = []  # (lo, hi, period, labels), chronological = by period

    def labels_of(seq):
        return tuple(x for b in seq for x in b.itinerary)

    def visit(lo, hi, slope, offset, seq):
        depth = len(seq)
        if slope != 1:
            x = offset / (ONE - slope)
            if lo <= x < hi and x not in points:
                points[x] = PeriodicPoint(x, depth, slope, labels_of(seq))
                if first_only:
                    raise _FoundFirst
        elif offset == 0:
            covered = any(
                depth % p == 0 and depth > p and flo <= lo and hi <= fhi
                for flo, fhi, p, _ in families
            )
            if not covered:
                families.append((lo, hi, depth, labels_of(seq)))
                if first_only:
                    raise _FoundFirst
        if depth == max_period:
            return
        for b in branches:
            nlo = max(lo, (b.lo - offset) / slope)
            nhi = min(hi, (b.hi - offset) / slope)
            if nlo < nhi:
                visit(nlo, nhi, b.slope * slope, b.slope * offset + b.offset, seq + (b,))

    try:
        for b in sorted(branches, key=lambda b: b.lo):
            visit(b.lo, b.hi, b.slope, b.offset, (b,))
    except _FoundFirst:
        pass

    out = []
    out.extend(sorted(points.values(), key=lambda p: (p.period, p.x)))
    for lo, hi, p, labels in families:
        minimal = not any(
            p % q == 0 and p > q and flo <= lo and hi <= fhi
            for flo, fhi, q, _ in families
        )
        if minimal:
            out.append(PeriodicFamily(lo, hi, p, labels))
    return out


def orbit(branches, x, steps: int):
    """Iterate the branch family from x; stops early (returning the
    partial orbit) when x falls in no branch domain."""
    xs = [x]
    for _ in range(steps):
        b = next((b for b in branches if b.contains(x)), None)
        if b is None:
            break
        x = b(x)
        xs.append(x)
    return xs
