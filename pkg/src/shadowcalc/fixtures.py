"""Built-in shadows: named fixtures and small enumerated catalogs.

Every fixture passes the full validity check.  Gleams default to the
parity forced by the Z2-gleam (0 or 1/2 per region) so that each
catalog entry is a well-formed shadow as written; tests overwrite them
freely.

The two-vertex fixtures were found by exhaustive search over the two
possible 4-valent skeletons on two vertices (four parallel edges, or a
loop at each vertex joined by two parallel edges), keeping the valid
gluings with three regions.  ``abalone`` is the loop-skeleton class
whose two monogon caps flank one long region; ``bing_house`` is a
parallel-skeleton class with two bigons; ``non_branchable`` is a
parallel-skeleton class that provably admits no branching (exhaustive
scan over all eight orientation assignments).
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Tuple

from .decor import Shadow
from .errors import ShadowError
from .poly import Edge, Polyhedron

CATALOG_VERSION = 1


def default_shadow(poly: Polyhedron, orient=None) -> Shadow:
    """Wrap a polyhedron with the minimal parity-correct gleams."""
    gleam2 = {r.id: poly.z2_gleam(r.id) for r in poly.regions}
    return Shadow(poly, gleam2, orient).check()


def _build(edge_spec: Dict[int, tuple], vertices=(0, 1)) -> Polyhedron:
    edges = {k: Edge(ends, wings) for k, (ends, wings) in edge_spec.items()}
    return Polyhedron(list(vertices), edges).check()


def abalone() -> Polyhedron:
    """Two vertices, a loop at each, two crossing edges; regions 1/1/10."""
    return _build(
        {
            0: (((0, 0), (0, 1)), ((1, 2, 3), (0, 2, 3))),
            1: (((1, 0), (1, 1)), ((1, 2, 3), (0, 2, 3))),
            2: (((0, 2), (1, 2)), ((0, 1, 3), (0, 3, 1))),
            3: (((0, 3), (1, 3)), ((0, 1, 2), (0, 2, 1))),
        }
    )


def bing_house() -> Polyhedron:
    """Two vertices joined by four parallel edges; regions 2/2/8."""
    return _build(
        {
            0: (((0, 0), (1, 0)), ((1, 2, 3), (1, 2, 3))),
            1: (((0, 1), (1, 1)), ((0, 2, 3), (0, 3, 2))),
            2: (((0, 2), (1, 2)), ((0, 1, 3), (0, 3, 1))),
            3: (((0, 3), (1, 3)), ((0, 1, 2), (1, 2, 0))),
        }
    )


def non_branchable() -> Polyhedron:
    """A valid two-vertex polyhedron admitting no branching at all."""
    return _build(
        {
            0: (((0, 0), (1, 0)), ((1, 2, 3), (1, 2, 3))),
            1: (((0, 1), (1, 1)), ((0, 2, 3), (0, 2, 3))),
            2: (((0, 2), (1, 2)), ((0, 1, 3), (0, 3, 1))),
            3: (((0, 3), (1, 3)), ((0, 1, 2), (1, 2, 0))),
        }
    )


def one_two_double() -> Polyhedron:
    """The doubled vertex ball: two vertices joined by four edges whose
    six regions are bigons, one per germ pair.

    Edge k sits at slot k of both vertices with identical wing maps, so
    the six regions are exactly the six slot-pair germs, each appearing
    identically at both vertices.  This is the local model used to
    calibrate the vertex move: its branchings biject with the branched
    local configurations at a single vertex.
    """
    return _build(
        {
            0: (((0, 0), (1, 0)), ((1, 2, 3), (1, 2, 3))),
            1: (((0, 1), (1, 1)), ((0, 2, 3), (0, 2, 3))),
            2: (((0, 2), (1, 2)), ((0, 1, 3), (0, 1, 3))),
            3: (((0, 3), (1, 3)), ((0, 1, 2), (0, 1, 2))),
        }
    )


def one_vertex_catalog() -> List[Polyhedron]:
    """All valid single-vertex polyhedra (two loop edges), one per
    isomorphism class, in canonical-key order."""
    perms = list(itertools.permutations(range(3)))
    pairings = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
    found: Dict[tuple, Polyhedron] = {}
    for pair in pairings:
        for p0, p1 in itertools.product(range(6), repeat=2):
            edges = {}
            for k, (sa, sb) in enumerate(pair):
                others0 = tuple(s for s in range(4) if s != sa)
                others1 = tuple(s for s in range(4) if s != sb)
                perm = perms[(p0, p1)[k]]
                edges[k] = Edge(
                    ((0, sa), (0, sb)),
                    (others0, tuple(others1[perm[i]] for i in range(3))),
                )
            try:
                poly = Polyhedron([0], edges).check()
            except ShadowError:
                continue
            found.setdefault(poly.canonical_key(), poly)
    return [found[k] for k in sorted(found)]


NAMED: Dict[str, object] = {
    "abalone": abalone,
    "bing_house": bing_house,
    "non_branchable": non_branchable,
    "one_two_double": one_two_double,
}


def named_shadow(name: str) -> Shadow:
    if name in NAMED:
        return default_shadow(NAMED[name]())
    if name.startswith("one_vertex_"):
        idx = int(name.rsplit("_", 1)[1])
        catalog = one_vertex_catalog()
        if 0 <= idx < len(catalog):
            return default_shadow(catalog[idx])
    raise KeyError(f"unknown fixture {name!r}")


def fixture_names() -> List[str]:
    base = sorted(NAMED)
    base.extend(f"one_vertex_{i}" for i in range(len(one_vertex_catalog())))
    return base
