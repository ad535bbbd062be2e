"""Exact rational scalars.

Everything geometric in this package runs on exact rational arithmetic.
``gmpy2.mpq`` is used when available (much faster on the big numerators
that show up after a few hundred dilation compositions); otherwise we
fall back to :class:`fractions.Fraction`, which implements the same
protocol.  Callers should only ever go through :func:`rat` so that the
two backends never get mixed inside one computation.

Scalars serialise as ``"p/q"`` strings (``"p"`` when q == 1) so that
JSON files round-trip without any precision loss.
"""

from __future__ import annotations

import math
from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    def rat(p=0, q=None):
        if q is None:
            if isinstance(p, float):
                raise TypeError("refusing implicit float->rational; use rat_from_float")
            return _mpq(p)
        return _mpq(p, q)

    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover - exercised only without gmpy2
    def rat(p=0, q=None):
        if q is None:
            if isinstance(p, float):
                raise TypeError("refusing implicit float->rational; use rat_from_float")
            return Fraction(p)
        return Fraction(p, q)

    BACKEND = "fractions"

ZERO = rat(0)
ONE = rat(1)


def fstr(x) -> str:
    """Serialise a rational as ``"p/q"`` (or ``"p"`` for integers)."""
    n, d = x.numerator, x.denominator
    if d == 1:
        return str(n)
    return "%d/%d" % (n, d)


def parse_rat(s):
    """Inverse of :func:`fstr`; also accepts plain ints."""
    if isinstance(s, int):
        return rat(s)
    if isinstance(s, str):
        if "/" in s:
            p, q = s.split("/")
            return rat(int(p), int(q))
        return rat(int(s))
    raise TypeError("expected 'p/q' string or int, got %r" % (s,))


def rat_from_float(x: float, max_den: int = 10**12):
    """Nearest rational with denominator bounded by ``max_den``.

    This is the only sanctioned float->rational conversion; it is used
    when an approximate real (say exp(t)) has to enter an otherwise
    exact computation, and callers are expected to flag the result as
    approximate.
    """
    if not math.isfinite(x):
        raise ValueError("cannot rationalise %r" % x)
    f = Fraction(x).limit_denominator(max_den)
    return rat(f.numerator, f.denominator)


def sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def sqrt_exact(q):
    """Exact square root of a nonnegative rational, or None.

    Returns a rational r with r*r == q when one exists (numerator and
    denominator are both perfect squares), else None.  Used to keep
    cylinder moduli exact whenever the side lengths allow it.
    """
    if q < 0:
        raise ValueError("negative radicand")
    n, d = q.numerator, q.denominator
    rn = math.isqrt(int(n))
    rd = math.isqrt(int(d))
    if rn * rn == n and rd * rd == d:
        return rat(rn, rd)
    return None
