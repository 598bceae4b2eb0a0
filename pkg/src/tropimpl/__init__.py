"""Exact tropical implicitization.

Tropical cycles of generic complete intersections and their images, Newton
polytope reconstruction by ray shooting, lattice point enumeration, exact and
modular interpolation of implicit equations, tropical discriminants of point
configurations, and Chow forms of low dimensional varieties.
"""

__version__ = "0.1.0"
