"""Cochain vectors on a branched shadow.

Regions index integer vectors; an edge e with preferred region R_i and
other wing regions R_j, R_k contributes the coboundary
delta(e) = -R_i + R_j + R_k.  The Euler cochain counts, per region,
the index of the maw (the field pointing into preferred regions along
the singular set) extended over the region: 1 plus the net rotation of
the maw against the boundary tangent, accumulated per vertex passage
from a finite turning table.

Gleam-involving vectors are kept doubled.  Two doubled vectors
represent the same class exactly when their difference lies in the
integer coboundary lattice; halving the scale identifies the class
group with the integer one, which is why the single lattice is used
rather than its double.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from . import _tables
from .decor import Shadow
from .errors import CalibrationError
from .homology import Lattice
from .poly import Dart

PassageKey = Tuple[int, int, int, int]  # (p, q, din, dout)


def coboundary_vector(s: Shadow, edge: int) -> List[int]:
    """delta of the edge's dual: -1 on the preferred region, +1 twice."""
    vec = [0] * s.poly.region_count
    pref = s.preferred_wing(edge)
    for w in (0, 1, 2):
        rid = s.poly.region_of(edge, w)
        vec[rid] += -1 if w == pref else 1
    return vec


def coboundary_lattice(s: Shadow) -> Lattice:
    gens = [coboundary_vector(s, e) for e in sorted(s.poly.edges)]
    return Lattice(gens, s.poly.region_count)


def boundary_matrix(s: Shadow) -> List[List[int]]:
    """Rows are edges, columns regions; entries sum signed traversals.

    A region's column records, per edge, the algebraic number of times
    its oriented boundary runs along the edge in the end-0 to end-1
    direction.
    """
    edge_ids = sorted(s.poly.edges)
    row_of = {e: i for i, e in enumerate(edge_ids)}
    mat = [[0] * s.poly.region_count for _ in edge_ids]
    for reg in s.poly.trace_regions():
        sign = s.sign(reg.id)
        for (e, _w, d) in reg.steps:
            mat[row_of[e]][reg.id] += sign * d
    return mat


def oriented_steps(s: Shadow, rid: int) -> List[Dart]:
    """The region's boundary circuit run in its positive direction."""
    steps = s.poly.region_steps(rid)
    if s.sign(rid) == 1:
        return list(steps)
    return [(e, w, -d) for (e, w, d) in reversed(steps)]


def passage_key(s: Shadow, dart_in: Dart, dart_out: Dart) -> PassageKey:
    """Branched local data of one vertex passage of an oriented circuit.

    p and q report whether the incoming and outgoing wings are their
    edges' preferred wings; din compares the preferred wing's induced
    direction on the incoming edge with the toward-vertex sense, dout
    with the away-from-vertex sense on the outgoing edge.  p forces
    din = +1 and q forces dout = +1.
    """
    e_in, w_in, d_in = dart_in
    e_out, w_out, d_out = dart_out
    poly = s.poly

    wp_in = s.preferred_wing(e_in)
    p = 1 if w_in == wp_in else 0
    induced_in = s.sign(poly.region_of(e_in, wp_in)) * poly.wing_direction(e_in, wp_in)
    toward = d_in  # the oriented dart itself runs toward the vertex
    din = 1 if induced_in == toward else -1

    wp_out = s.preferred_wing(e_out)
    q = 1 if w_out == wp_out else 0
    induced_out = s.sign(poly.region_of(e_out, wp_out)) * poly.wing_direction(e_out, wp_out)
    away = d_out
    dout = 1 if induced_out == away else -1

    if p and din != 1:
        raise AssertionError("incoming preferred wing must run toward the vertex")
    if q and dout != 1:
        raise AssertionError("outgoing preferred wing must run away from the vertex")
    return (p, q, din, dout)


def _turn_table(t2: Optional[Dict[PassageKey, int]]) -> Dict[PassageKey, int]:
    table = t2 if t2 is not None else _tables.MAW_TURN2
    if table is None:
        raise CalibrationError("maw turning table is not frozen yet")
    return table


def euler_index(s: Shadow, rid: int, t2: Optional[Dict[PassageKey, int]] = None) -> int:
    """n = 1 + net maw rotation along the region's oriented boundary."""
    table = _turn_table(t2)
    run = oriented_steps(s, rid)
    total2 = 0
    n = len(run)
    for k in range(n):
        key = passage_key(s, run[k], run[(k + 1) % n])
        try:
            total2 += table[key]
        except KeyError:
            raise CalibrationError(
                f"vertex passage {key} is outside the turning table"
            ) from None
    if total2 % 2:
        raise CalibrationError(
            f"half-integral net turning {total2}/2 on region {rid}"
        )
    return 1 + total2 // 2


def euler_vector(s: Shadow, t2: Optional[Dict[PassageKey, int]] = None) -> List[int]:
    return [euler_index(s, rid, t2) for rid in range(s.poly.region_count)]


def gleam_vector2(s: Shadow) -> List[int]:
    return [s.gleam2[rid] for rid in range(s.poly.region_count)]


def chern_vector2(s: Shadow, t2: Optional[Dict[PassageKey, int]] = None) -> List[int]:
    eul = euler_vector(s, t2)
    gl2 = gleam_vector2(s)
    return [2 * a + b for a, b in zip(eul, gl2)]
