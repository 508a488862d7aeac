"""Decorations on a standard polyhedron: gleams, branchings, markers.

A shadow is a polyhedron whose regions carry half-integer gleams.  The
gleam of a region is an integer exactly when the transverse page
monodromy of its boundary is trivial, so gleams are stored doubled and
the doubled parity must match the monodromy parity.

A branching is a choice of orientation for every region such that on
each edge the three induced wing directions are not all equal.  The
odd wing out is the edge's preferred wing; its region is the preferred
region, the one whose boundary runs against the other two.

Regions may additionally carry complex-point markers: a multiset of
(sign, index) pairs with nonzero index, manipulated by the rewriting
calculus in :mod:`shadowcalc.cxpoints`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    GleamParityError,
    NotBranched,
    PreconditionViolated,
    TooManyRegions,
)
from .poly import Dart, Polyhedron, ValidationReport

Branching = Dict[int, int]  # region id -> +1 or -1
PointSet = Tuple[Tuple[int, int], ...]  # sorted ((sign, index), ...)

MAX_ENUMERATED_REGIONS = 24


def induced_wing_directions(
    poly: Polyhedron, orient: Mapping[int, int], edge: int
) -> Tuple[int, int, int]:
    """Directions the three wing traversals induce on the edge.

    Wing w is traversed once by its region, in stored direction d; the
    region's orientation sign flips d when negative.
    """
    out = []
    for w in (0, 1, 2):
        rid = poly.region_of(edge, w)
        out.append(orient[rid] * poly.wing_direction(edge, w))
    return tuple(out)  # type: ignore[return-value]


def is_branching(poly: Polyhedron, orient: Mapping[int, int]) -> bool:
    """True when no edge has all three induced directions equal."""
    if set(orient) != set(range(poly.region_count)):
        return False
    if any(s not in (1, -1) for s in orient.values()):
        return False
    return not violating_edges(poly, orient)


def violating_edges(poly: Polyhedron, orient: Mapping[int, int]) -> List[int]:
    bad = []
    for e in sorted(poly.edges):
        dirs = induced_wing_directions(poly, orient, e)
        if dirs[0] == dirs[1] == dirs[2]:
            bad.append(e)
    return bad


def preferred_wing(poly: Polyhedron, orient: Mapping[int, int], edge: int) -> int:
    """The wing whose induced direction disagrees with the other two."""
    dirs = induced_wing_directions(poly, orient, edge)
    if dirs[0] == dirs[1] == dirs[2]:
        raise NotBranched(f"edge {edge} has all wings running direction {dirs[0]}")
    for w in (0, 1, 2):
        if dirs[w] != dirs[(w + 1) % 3] and dirs[w] != dirs[(w + 2) % 3]:
            return w
    raise AssertionError("three signs always have a strict minority")


def preferred_region(poly: Polyhedron, orient: Mapping[int, int], edge: int) -> int:
    return poly.region_of(edge, preferred_wing(poly, orient, edge))


def enumerate_branchings(poly: Polyhedron) -> List[Branching]:
    """Every branching, in sign-vector order.

    Backtracks over region orientations, pruning an edge's constraint
    as soon as all three of its wing regions are assigned.  The result
    is closed under the global flip.  Refuses inputs with more than
    MAX_ENUMERATED_REGIONS regions.
    """
    n = poly.region_count
    if n > MAX_ENUMERATED_REGIONS:
        raise TooManyRegions(f"{n} regions exceed bound {MAX_ENUMERATED_REGIONS}")
    # For each edge, the three (region, stored direction) pairs.
    edge_wings = []
    for e in sorted(poly.edges):
        edge_wings.append(
            tuple(
                (poly.region_of(e, w), poly.wing_direction(e, w))
                for w in (0, 1, 2)
            )
        )
    # Edges become checkable once their highest region id is assigned.
    by_last: Dict[int, List[Tuple[Tuple[int, int], ...]]] = {}
    for trip in edge_wings:
        last = max(rid for rid, _ in trip)
        by_last.setdefault(last, []).append(trip)

    found: List[Branching] = []
    signs: List[int] = []

    def extend(rid: int) -> None:
        if rid == n:
            found.append({i: s for i, s in enumerate(signs)})
            return
        for s in (1, -1):
            signs.append(s)
            ok = True
            for trip in by_last.get(rid, ()):  # all regions now assigned
                d0, d1, d2 = (signs[r] * d for r, d in trip)
                if d0 == d1 == d2:
                    ok = False
                    break
            if ok:
                extend(rid + 1)
            signs.pop()

    extend(0)
    return found


@dataclass(frozen=True)
class Shadow:
    """A polyhedron with gleams, an optional branching, and markers.

    ``gleam2`` holds doubled gleams so that half-integers stay exact;
    ``orient`` maps each region to +1/-1 when a branching is chosen;
    ``points`` maps a region to its sorted multiset of (sign, index)
    complex-point markers.  Instances are immutable; use the ``with_*``
    helpers to derive modified copies.
    """

    poly: Polyhedron
    gleam2: Mapping[int, int]
    orient: Optional[Mapping[int, int]] = None
    points: Mapping[int, PointSet] = field(default_factory=dict)

    # ------------------------------------------------------------- access

    @property
    def is_branched(self) -> bool:
        return self.orient is not None

    def gleam(self, rid: int) -> Fraction:
        return Fraction(self.gleam2[rid], 2)

    def total_gleam2(self) -> int:
        return sum(self.gleam2[r.id] for r in self.poly.regions)

    def sign(self, rid: int) -> int:
        if self.orient is None:
            raise NotBranched("shadow carries no branching")
        return self.orient[rid]

    def preferred_wing(self, edge: int) -> int:
        if self.orient is None:
            raise NotBranched("shadow carries no branching")
        return preferred_wing(self.poly, self.orient, edge)

    def preferred_region(self, edge: int) -> int:
        return self.poly.region_of(edge, self.preferred_wing(edge))

    def point_list(self, rid: int) -> PointSet:
        return tuple(self.points.get(rid, ()))

    def all_points(self) -> List[Tuple[int, int, int]]:
        """Flat list of (region, sign, index), sorted."""
        out = []
        for rid in sorted(self.points):
            for sign, index in self.points[rid]:
                out.append((rid, sign, index))
        return out

    # ------------------------------------------------------------- copies

    def with_orientation(self, orient: Optional[Mapping[int, int]]) -> "Shadow":
        return replace(self, orient=None if orient is None else dict(orient))

    def with_gleams(self, gleam2: Mapping[int, int]) -> "Shadow":
        return replace(self, gleam2=dict(gleam2))

    def with_points(self, points: Mapping[int, Iterable[Tuple[int, int]]]) -> "Shadow":
        cleaned = {
            rid: tuple(sorted(tuple(p) for p in pts))
            for rid, pts in points.items()
            if tuple(pts)
        }
        return replace(self, points=cleaned)

    def flipped(self) -> "Shadow":
        """Global orientation flip; branchings are closed under it."""
        if self.orient is None:
            return self
        return self.with_orientation({r: -s for r, s in self.orient.items()})

    # --------------------------------------------------------- validation

    def validate(self) -> ValidationReport:
        report = self.poly.validate()
        if report.problems:
            return report
        rids = set(range(self.poly.region_count))
        if set(self.gleam2) != rids:
            report.problems.append(
                GleamParityError(
                    f"gleams given for regions {sorted(self.gleam2)},"
                    f" expected {sorted(rids)}"
                )
            )
            return report
        for rid in sorted(rids):
            g2 = self.gleam2[rid]
            if not isinstance(g2, int):
                report.problems.append(
                    GleamParityError(f"region {rid} doubled gleam {g2!r} not an int")
                )
                continue
            z2 = self.poly.z2_gleam(rid)
            if g2 % 2 != z2:
                report.problems.append(
                    GleamParityError(
                        f"region {rid} gleam {Fraction(g2, 2)} parity"
                        f" disagrees with page monodromy {z2}"
                    )
                )
        if self.orient is not None:
            if set(self.orient) != rids or not is_branching(self.poly, self.orient):
                bad = violating_edges(self.poly, self.orient) if set(self.orient) == rids else []
                report.problems.append(
                    NotBranched(
                        "orientation is not a branching"
                        + (f"; uniform edges {bad}" if bad else "")
                    )
                )
        for rid, pts in sorted(self.points.items()):
            if rid not in rids:
                report.problems.append(
                    PreconditionViolated(f"markers on unknown region {rid}")
                )
                continue
            for sign, index in pts:
                if sign not in (1, -1) or index == 0:
                    report.problems.append(
                        PreconditionViolated(
                            f"marker ({sign},{index}) on region {rid} is not"
                            " a signed nonzero-index point"
                        )
                    )
        return report

    def check(self) -> "Shadow":
        self.validate().raise_first()
        return self

    # ------------------------------------------------------ preferred data

    def preferred_wing(self, edge: int) -> int:
        if self.orient is None:
            raise NotBranched("shadow carries no branching")
        return preferred_wing(self.poly, self.orient, edge)

    def preferred_region(self, edge: int) -> int:
        return self.poly.region_of(edge, self.preferred_wing(edge))

    # -------------------------------------------------------- canonical key

    def canonical_key(self) -> tuple:
        """Label-independent encoding of the decorated shadow.

        Extends the polyhedron key with per-region decoration tuples:
        doubled gleam, branching sign read against the relabeled
        region's stored traversal, and the marker multiset.  Minimized
        over every labeling that already minimizes the structure key.
        """
        best: Optional[tuple] = None
        for enc, vmap, emap, disc_end, wing_orders in self.poly.minimal_labelings():
            relab = self.poly.relabeled(
                vmap,
                emap,
                wing_perms={
                    e: _rank_perm(order) for e, order in wing_orders.items()
                },
                end_flips=[e for e, end in disc_end.items() if end == 1],
            )
            rid_map, sign_map = _transport_regions(
                self.poly, relab, emap, disc_end, wing_orders
            )
            deco = []
            for new_rid in range(relab.region_count):
                old_rid = rid_map[new_rid]
                entry = [self.gleam2[old_rid]]
                if self.orient is not None:
                    entry.append(self.orient[old_rid] * sign_map[new_rid])
                entry.append(tuple(self.points.get(old_rid, ())))
                deco.append(tuple(entry))
            cand = (enc, tuple(deco))
            if best is None or cand < best:
                best = cand
        assert best is not None
        return best


def _rank_perm(order: Sequence[int]) -> Tuple[int, int, int]:
    """order[k] = old wing at new rank k  ->  perm[old wing] = new rank."""
    perm = [0, 0, 0]
    for rank, w in enumerate(order):
        perm[w] = rank
    return tuple(perm)  # type: ignore[return-value]


def _transport_regions(
    old: Polyhedron,
    new: Polyhedron,
    emap: Mapping[int, int],
    disc_end: Mapping[int, int],
    wing_orders: Mapping[int, Sequence[int]],
) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Match regions across a relabeling.

    Returns (new rid -> old rid, new rid -> direction agreement sign),
    the sign telling whether the old stored traversal maps onto the new
    stored traversal (+1) or onto its reversal (-1).
    """
    rid_map: Dict[int, int] = {}
    sign_map: Dict[int, int] = {}
    for reg in old.trace_regions():
        e, w, d = reg.steps[0]
        ne = emap[e]
        nw = _rank_perm(wing_orders[e])[w]
        nd = -d if disc_end[e] == 1 else d
        new_rid = new.region_of(ne, nw)
        rid_map[new_rid] = reg.id
        sign_map[new_rid] = 1 if new.wing_direction(ne, nw) == nd else -1
    return rid_map, sign_map
