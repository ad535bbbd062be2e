"""Exact computational geometry of dilation surfaces.

A dilation surface is a union of euclidean polygons whose sides are glued
in pairs by maps of the form z -> a*z + b with a > 0 real.  Because the
gluing maps have no rotational part, every tangent direction is globally
well defined, and all the geometry here (cone angles, linear holonomy,
straight-line flow, cylinders, Delaunay patterns) can be carried out in
exact rational arithmetic.

The package is organised around :class:`dilatone.surface.DilationSurface`;
see the README for a map of the modules.
"""

from .scalars import rat, fstr
from .surface import DilationSurface

__version__ = "0.1.0"

__all__ = ["rat", "fstr", "DilationSurface", "__version__"]
