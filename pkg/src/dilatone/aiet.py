"""Affine interval exchange transformations and the density experiment.

An AIET is a finite family of affine branches x -> slope*x + offset on
half-open pieces of [0, 1) whose images again tile [0, 1): a bijection
off the breakpoints.  Shifting any such map by t mod 1 gives the
one-parameter family whose periodic members are expected to be dense in
t; ``density_sweep`` runs that experiment on an exact grid.

Return maps of directional foliations embed here through
``from_return_map``.  A complete return map of a surface with boundary
can be injective without being onto (leaves spiral toward an attracting
closed geodesic and part of the transversal is never hit back); such
maps are kept with ``partial=True`` instead of being rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .affine1d import AffineBranch
from .affine1d import periodic_points as _branch_periodic_points
from .scalars import rat

ZERO = rat(0)
ONE = rat(1)


@dataclass(frozen=True)
class Aiet:
    """Piecewise-affine bijection of [0, 1), right-continuous at breaks.

    ``branches`` must be sorted and tile [0, 1) exactly; breakpoint
    images follow the branch that starts there.  ``partial`` waives the
    image-tiling check for embedded one-sided return maps.
    """

    branches: tuple
    partial: bool = False

    def __post_init__(self):
        bs = self.branches
        if not bs:
            raise ValueError("empty branch list")
        for b in bs:
            if not b.resolved:
                raise ValueError(
                    "unresolved branch [%s,%s)" % (b.lo, b.hi))
        if bs[0].lo != 0 or bs[-1].hi != 1 or any(
                a.hi != b.lo for a, b in zip(bs, bs[1:])):
            raise ValueError("branch domains must tile [0,1)")
        if not self.partial:
            images = sorted(b.image() for b in bs)
            if images[0][0] != 0 or images[-1][1] != 1 or any(
                    a[1] != b[0] for a, b in zip(images, images[1:])):
                raise ValueError("images do not tile [0,1)")

    @classmethod
    def from_tables(cls, breakpoints, slopes, offsets,
                    partial: bool = False) -> "Aiet":
        """Build from the serialized form: 0 = a0 < ... < ak = 1 plus a
        slope and offset per interval."""
        pts = [rat(a) for a in breakpoints]
        if len(slopes) != len(pts) - 1 or len(offsets) != len(pts) - 1:
            raise ValueError("need one slope and offset per interval")
        if pts[0] != 0 or pts[-1] != 1 or any(
                a >= b for a, b in zip(pts, pts[1:])):
            raise ValueError("breakpoints must increase from 0 to 1")
        return cls(tuple(
            AffineBranch(lo, hi, s, o)
            for lo, hi, s, o in zip(pts, pts[1:], slopes, offsets)), partial)

    @property
    def breakpoints(self) -> tuple:
        return tuple(b.lo for b in self.branches) + (ONE,)

    def branch_at(self, x) -> AffineBranch:
        x = rat(x)
        if not 0 <= x < 1:
            raise ValueError("x must lie in [0,1)")
        return next(b for b in self.branches if b.contains(x))

    def __call__(self, x):
        return self.branch_at(x)(rat(x))

    def inverse_at(self, y):
        """The x with T(x) = y, available off the image breakpoints."""
        y = rat(y)
        for b in self.branches:
            lo, hi = b.image()
            if lo <= y < hi:
                return (y - b.offset) / b.slope
        raise ValueError("%s is not in the image" % (y,))


def evaluate(T: Aiet, x):
    """Exact evaluation; breakpoints resolve by right-continuity."""
    return T(x)


def rotation(alpha) -> Aiet:
    """The rotation x -> x + alpha mod 1 as a one- or two-branch AIET."""
    a = rat(alpha)
    a = a - math.floor(a)
    if a == 0:
        return Aiet((AffineBranch(0, 1, 1, 0),))
    return Aiet((
        AffineBranch(ZERO, ONE - a, ONE, a),
        AffineBranch(ONE - a, ONE, ONE, a - 1),
    ))


@dataclass(frozen=True)
class AietFamily:
    """The translated family t -> (x -> base(x) + t mod 1)."""

    base: Aiet


def member(F: AietFamily, t) -> Aiet:
    """The family member at parameter t, re-split at the wrap point.

    Branches whose shifted image crosses 1 are cut in two; adjacent
    pieces that end up with the same formula are coalesced, so a shift
    by exactly -alpha undoes ``rotation(alpha)`` structurally.
    """
    t = rat(t)
    tm = t - math.floor(t)
    pieces = []
    for b in F.base.branches:
        o2 = b.offset + tm
        lo_img, hi_img = b.slope * b.lo + o2, b.slope * b.hi + o2
        if hi_img <= 1:
            pieces.append(AffineBranch(b.lo, b.hi, b.slope, o2, b.itinerary))
        elif lo_img >= 1:
            pieces.append(
                AffineBranch(b.lo, b.hi, b.slope, o2 - 1, b.itinerary))
        else:
            cut = (ONE - o2) / b.slope
            pieces.append(AffineBranch(b.lo, cut, b.slope, o2, b.itinerary))
            pieces.append(
                AffineBranch(cut, b.hi, b.slope, o2 - 1, b.itinerary))
    pieces.sort(key=lambda b: b.lo)
    merged = []
    for b in pieces:
        last = merged[-1] if merged else None
        if (last is not None and last.hi == b.lo
                and (last.slope, last.offset, last.itinerary)
                == (b.slope, b.offset, b.itinerary)):
            merged[-1] = AffineBranch(
                last.lo, b.hi, b.slope, b.offset, b.itinerary)
        else:
            merged.append(b)
    return Aiet(tuple(merged), partial=F.base.partial)


def from_return_map(m) -> Aiet:
    """Re-read a foliation's first-return map as AIET data.

    The transversal is already parametrised over [0, 1), so the branches
    carry over once they are complete: evaluation of the result equals
    re-tracing.  One-sided maps (image a proper subinterval) are kept
    with the ``partial`` flag.
    """
    if m.escapes:
        lo, hi, side = m.escapes[0]
        raise ValueError(
            "leaves of [%s,%s) escape through the boundary" % (lo, hi))
    for b in m.branches:
        if not b.resolved:
            raise ValueError("unresolved branch [%s,%s)" % (b.lo, b.hi))
    bs = tuple(sorted(m.branches, key=lambda b: b.lo))
    images = sorted(b.image() for b in bs)
    tiles = (images[0][0] == 0 and images[-1][1] == 1
             and all(a[1] == b[0] for a, b in zip(images, images[1:])))
    return Aiet(bs, partial=not tiles)


def periodic_points(T: Aiet, max_period: int = 64):
    """Exact periodic orbits up to max_period; same solver and output
    (points and identity families) as the cylinder detector."""
    return _branch_periodic_points(T.branches, max_period)


def random_aiet(seed: int, k: int = 3) -> Aiet:
    """A seeded random k-branch interval exchange with affine branches.

    Domain and image breakpoints are drawn from the 1/24 grid and the
    image slots are permuted, so slopes are automatic and the result is
    an honest bijection off breakpoints.
    """
    import random as _random

    rng = _random.Random(seed)
    grid = [rat(i, 24) for i in range(1, 24)]
    dom = sorted(rng.sample(grid, k - 1))
    img = sorted(rng.sample(grid, k - 1))
    dom = [ZERO] + dom + [ONE]
    img = [ZERO] + img + [ONE]
    perm = list(range(k))
    rng.shuffle(perm)
    slopes, offsets = [], []
    for i, j in enumerate(perm):
        s = (img[j + 1] - img[j]) / (dom[i + 1] - dom[i])
        slopes.append(s)
        offsets.append(img[j] - s * dom[i])
    return Aiet.from_tables(dom, slopes, offsets)


# -- the density experiment ----------------------------------------------------


@dataclass(frozen=True)
class SweepReport:
    """Window-by-window outcome of the periodic-parameter search.

    An uncovered window means no grid parameter in it had a periodic
    orbit OF PERIOD <= max_period: evidence of absence only up to that
    period, never nonexistence.
    """

    step: object
    window: object
    max_period: int
    n_grid: int
    hits: tuple  # grid parameters whose member has a periodic orbit
    windows: tuple  # covered flag per window [k*w, (k+1)*w)

    @property
    def coverage(self):
        return rat(sum(self.windows), len(self.windows))

    @property
    def largest_empty_window(self):
        """Length of the longest cyclic run of uncovered windows."""
        w = self.windows
        if all(w):
            return ZERO
        if not any(w):
            return ONE
        doubled = w + w
        run = best = 0
        for flag in doubled:
            run = 0 if flag else run + 1
            best = max(best, min(run, len(w)))
        return min(best * self.window, ONE)


def density_sweep(F: AietFamily, step, window,
                  max_period: int = 64) -> SweepReport:
    """Test every grid parameter for a periodic orbit, report coverage.

    Walks t over the step-grid of [0, 1), asks ``periodic_points`` of
    each member, and marks the width-``window`` tiles of [0, 1) that
    contain at least one periodic parameter.  Full coverage is the
    desk-scale version of density of periodic members.
    """
    step, window = rat(step), rat(window)
    if not 0 < step < window:
        raise ValueError("step must be smaller than the window")
    n_windows = math.ceil(1 / window)
    covered = [False] * n_windows
    hits = []
    t, n_grid = ZERO, 0
    while t < 1:
        n_grid += 1
        T = member(F, t)
        if _branch_periodic_points(T.branches, max_period, first_only=True):
            hits.append(t)
            covered[min(int(t / window), n_windows - 1)] = True
        t = t + step
    return SweepReport(step, window, max_period, n_grid,
                       tuple(hits), tuple(covered))
