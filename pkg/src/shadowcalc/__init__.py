"""Calculus of decorated standard polyhedra.

The package models shadows of smooth 4-manifolds combinatorially: a
standard polyhedron whose regions carry half-integer gleams, an
orientation choice (branching) on the regions, and multisets of
complex-point markers.  On top of the static model it implements the
local rewrite moves, the integral cochain classes they displace, and
the elimination calculus for negative complex points.
"""

from .decor import Branching, Shadow, enumerate_branchings, is_branching
from .errors import ShadowError
from .poly import Edge, Polyhedron, Region

__all__ = [
    "Branching",
    "Edge",
    "Polyhedron",
    "Region",
    "Shadow",
    "ShadowError",
    "enumerate_branchings",
    "is_branching",
]

__version__ = "0.1.0"
