"""Combinatorial standard polyhedra.

A standard polyhedron is encoded by its singular graph: a connected
4-valent graph whose vertices carry four numbered slots (0..3), plus
gluing data describing how the three sheet germs (wings) along each
edge attach to the corners (germs) at each endpoint.

    * Each edge has two ends, 0 and 1; end k attaches to a (vertex,
      slot) pair.  The attachment over all edge ends is a bijection
      onto all (vertex, slot) pairs, so the edge count is twice the
      vertex count.
    * Each edge carries three wings, numbered 0..2.  At each end the
      wings are matched bijectively with the three slots of the vertex
      other than the slot the end occupies ("complementary slots").
      Wing w together with its complementary slot spans a germ, i.e.
      one of the six corners of a vertex, indexed by the unordered
      pair of slots it touches.

Regions (the 2-cells) are not stored: they are traced as orbits of a
successor function on directed wing traversals and are discs exactly
when the gluing is valid.  Closed edge circles without vertices are
not representable, which is intentional: only standard polyhedra are
supported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    DisconnectedSingularSet,
    NonBijectiveAttachment,
    ShadowError,
    TraceIncomplete,
    ValenceViolation,
)

# A dart is a directed wing traversal: (edge id, wing 0..2, direction).
# Direction +1 runs from end 0 toward end 1, -1 the other way.
Dart = Tuple[int, int, int]
EndAttachment = Tuple[int, int]  # (vertex id, slot 0..3)
WingMap = Tuple[int, int, int]  # wing w -> complementary slot


@dataclass(frozen=True)
class Edge:
    """One edge of the singular graph with its two end attachments.

    ``ends[k]`` is the (vertex, slot) pair of end k and ``wings[k]``
    maps each wing to the complementary slot it occupies at that end.
    """

    ends: Tuple[EndAttachment, EndAttachment]
    wings: Tuple[WingMap, WingMap]

    def end_at(self, end: int) -> EndAttachment:
        return self.ends[end]

    def wing_to_slot(self, end: int, wing: int) -> int:
        return self.wings[end][wing]

    def wing_from_slot(self, end: int, slot: int) -> int:
        """The wing occupying complementary slot ``slot`` at ``end``."""
        return self.wings[end].index(slot)


@dataclass(frozen=True)
class Region:
    """A traced region: a disc attached along one boundary circuit.

    ``steps`` is the canonical traversal: the lexicographically least
    rotation over both running directions, so region identity and ids
    are reproducible across runs and relabelings of nothing at all.
    """

    id: int
    steps: Tuple[Dart, ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def wing_pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((e, w) for (e, w, _d) in self.steps)


@dataclass
class ValidationReport:
    """Outcome of :meth:`Polyhedron.validate`.

    ``problems`` holds one exception instance per violation; an empty
    list means the polyhedron satisfies every invariant and ``regions``
    carries the traced regions.
    """

    problems: List[ShadowError] = field(default_factory=list)
    regions: Optional[List[Region]] = None

    @property
    def ok(self) -> bool:
        return not self.problems

    def raise_first(self) -> None:
        if self.problems:
            raise self.problems[0]


def _reversed_orbit(orbit: Sequence[Dart]) -> Tuple[Dart, ...]:
    return tuple((e, w, -d) for (e, w, d) in reversed(orbit))


def _canonical_cycle(orbit: Sequence[Dart]) -> Tuple[Dart, ...]:
    """Least rotation of the orbit or of its reversal."""
    best = None
    for seq in (tuple(orbit), _reversed_orbit(orbit)):
        n = len(seq)
        for k in range(n):
            cand = seq[k:] + seq[:k]
            if best is None or cand < best:
                best = cand
    assert best is not None
    return best


class Polyhedron:
    """An immutable standard polyhedron.

    Values are treated as frozen once built: every query is a pure
    function and cached traces may be shared between threads.  Move
    rewrites construct new instances instead of mutating.
    """

    def __init__(self, vertices: Iterable[int], edges: Mapping[int, Edge]):
        self.vertices: Tuple[int, ...] = tuple(sorted(set(vertices)))
        self.edges: Dict[int, Edge] = dict(edges)
        self._slot_table: Optional[Dict[EndAttachment, Tuple[int, int]]] = None
        self._regions: Optional[List[Region]] = None
        self._region_of: Optional[Dict[Tuple[int, int], int]] = None
        self._wing_dir: Optional[Dict[Tuple[int, int], int]] = None

    # ------------------------------------------------------------ structure

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def slot_table(self) -> Dict[EndAttachment, Tuple[int, int]]:
        """Map (vertex, slot) -> (edge id, end) built from the attachments."""
        if self._slot_table is None:
            table: Dict[EndAttachment, Tuple[int, int]] = {}
            for eid in sorted(self.edges):
                edge = self.edges[eid]
                for end in (0, 1):
                    key = edge.ends[end]
                    if key not in table:
                        table[key] = (eid, end)
            self._slot_table = table
        return self._slot_table

    def darts(self) -> List[Dart]:
        return [
            (e, w, d)
            for e in sorted(self.edges)
            for w in (0, 1, 2)
            for d in (1, -1)
        ]

    def successor(self, dart: Dart) -> Dart:
        """The next directed wing traversal of the same region.

        Arriving at a vertex through slot i via wing w whose germ is
        {i, j}, the region continues along the edge glued at slot j,
        through the wing matched with slot i there.
        """
        e, w, d = dart
        edge = self.edges[e]
        arrive = 1 if d == 1 else 0
        v, i = edge.ends[arrive]
        j = edge.wings[arrive][w]
        e2, end2 = self.slot_table[(v, j)]
        edge2 = self.edges[e2]
        w2 = edge2.wing_from_slot(end2, i)
        d2 = 1 if end2 == 0 else -1
        return (e2, w2, d2)

    def passage(self, dart: Dart) -> Tuple[int, int, int]:
        """Vertex and germ (arrival slot, departure slot) after ``dart``."""
        e, w, d = dart
        edge = self.edges[e]
        arrive = 1 if d == 1 else 0
        v, i = edge.ends[arrive]
        j = edge.wings[arrive][w]
        return v, i, j

    # -------------------------------------------------------------- tracing

    def trace_regions(self) -> List[Region]:
        """Orbits of the successor function, modulo reversal.

        Each unordered (edge, wing) pair must be covered by exactly one
        region, exactly once; otherwise the gluing does not describe a
        standard polyhedron and TraceIncomplete is raised.
        """
        if self._regions is not None:
            return self._regions
        try:
            orbits = self._dart_orbits()
        except (KeyError, ValueError, IndexError) as exc:
            raise TraceIncomplete(f"region tracing broke down: {exc!r}")
        regions: List[Region] = []
        seen_keys: Dict[Tuple[Dart, ...], int] = {}
        for orbit in orbits:
            if set(_reversed_orbit(orbit)) == set(orbit):
                e, w, _ = orbit[0]
                raise TraceIncomplete(
                    f"wing (edge {e}, wing {w}) is traversed twice by one region"
                )
            key = _canonical_cycle(orbit)
            if key not in seen_keys:
                seen_keys[key] = 1
        keys = sorted(seen_keys)
        region_of: Dict[Tuple[int, int], int] = {}
        wing_dir: Dict[Tuple[int, int], int] = {}
        for rid, key in enumerate(keys):
            regions.append(Region(rid, key))
            for (e, w, d) in key:
                if (e, w) in region_of:
                    raise TraceIncomplete(
                        f"wing (edge {e}, wing {w}) lies in two regions"
                    )
                region_of[(e, w)] = rid
                wing_dir[(e, w)] = d
        expected = 3 * self.edge_count
        covered = len(region_of)
        if covered != expected:
            raise TraceIncomplete(
                f"trace covered {covered} of {expected} (edge, wing) pairs"
            )
        self._regions = regions
        self._region_of = region_of
        self._wing_dir = wing_dir
        return regions

    def _dart_orbits(self) -> List[Tuple[Dart, ...]]:
        visited = set()
        orbits = []
        for start in self.darts():
            if start in visited:
                continue
            orbit = [start]
            visited.add(start)
            cur = self.successor(start)
            while cur != start:
                if cur in visited:
                    raise TraceIncomplete(
                        f"successor walk from {start} re-entered {cur} off cycle"
                    )
                orbit.append(cur)
                visited.add(cur)
                cur = self.successor(cur)
            orbits.append(tuple(orbit))
        return orbits

    @property
    def regions(self) -> List[Region]:
        return self.trace_regions()

    @property
    def region_count(self) -> int:
        return len(self.trace_regions())

    def region_of(self, edge: int, wing: int) -> int:
        self.trace_regions()
        assert self._region_of is not None
        return self._region_of[(edge, wing)]

    def region_at_germ(self, vertex: int, slot_a: int, slot_b: int) -> int:
        """Region occupying the corner between two slots of a vertex."""
        e, end = self.slot_table[(vertex, slot_a)]
        w = self.edges[e].wing_from_slot(end, slot_b)
        return self.region_of(e, w)

    def wing_direction(self, edge: int, wing: int) -> int:
        """Direction of the stored traversal of this wing (+1 or -1)."""
        self.trace_regions()
        assert self._wing_dir is not None
        return self._wing_dir[(edge, wing)]

    def region_steps(self, rid: int) -> Tuple[Dart, ...]:
        return self.trace_regions()[rid].steps

    # ----------------------------------------------------------- validation

    def validate(self) -> ValidationReport:
        report = ValidationReport()
        if self.vertex_count < 1:
            report.problems.append(ValenceViolation("no vertices"))
            return report

        # End attachment must hit every (vertex, slot) exactly once.
        usage: Dict[EndAttachment, List[Tuple[int, int]]] = {}
        for eid, edge in sorted(self.edges.items()):
            for end in (0, 1):
                v, s = edge.ends[end]
                if v not in set(self.vertices) or s not in (0, 1, 2, 3):
                    report.problems.append(
                        NonBijectiveAttachment(
                            f"edge {eid} end {end} attaches to missing slot ({v},{s})"
                        )
                    )
                    continue
                usage.setdefault((v, s), []).append((eid, end))
        for (v, s), users in sorted(usage.items()):
            if len(users) > 1:
                report.problems.append(
                    ValenceViolation(
                        f"slot ({v},{s}) used by edge ends {users}"
                    )
                )
        for v in self.vertices:
            for s in range(4):
                if (v, s) not in usage:
                    report.problems.append(
                        ValenceViolation(f"slot ({v},{s}) is unused")
                    )
        if self.edge_count != 2 * self.vertex_count:
            report.problems.append(
                ValenceViolation(
                    f"edge count {self.edge_count} != 2 * vertex count"
                    f" {self.vertex_count}"
                )
            )

        # Wing maps must be bijections onto the complementary slots.
        for eid, edge in sorted(self.edges.items()):
            for end in (0, 1):
                v, s = edge.ends[end]
                want = {0, 1, 2, 3} - {s}
                got = set(edge.wings[end])
                if got != want or len(edge.wings[end]) != 3:
                    report.problems.append(
                        NonBijectiveAttachment(
                            f"edge {eid} end {end} wing map {edge.wings[end]}"
                            f" is not a bijection onto slots {sorted(want)}"
                        )
                    )

        if report.problems:
            return report

        # Connectivity of the singular graph.
        adj: Dict[int, set] = {v: set() for v in self.vertices}
        for edge in self.edges.values():
            (v0, _), (v1, _) = edge.ends
            adj[v0].add(v1)
            adj[v1].add(v0)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != self.vertex_count:
            missing = sorted(set(self.vertices) - seen)
            report.problems.append(
                DisconnectedSingularSet(
                    f"vertices {missing} unreachable from {self.vertices[0]}"
                )
            )
            return report

        try:
            report.regions = self.trace_regions()
        except TraceIncomplete as exc:
            report.problems.append(exc)
        return report

    def check(self) -> "Polyhedron":
        self.validate().raise_first()
        return self

    # ----------------------------------------------------------- invariants

    def euler_characteristic(self) -> int:
        """V - E + R; equals R - V when the attachment bijections hold."""
        return self.vertex_count - self.edge_count + self.region_count

    def z2_gleam(self, rid: int) -> int:
        """Parity of the transverse page monodromy of a region boundary.

        Along each traversal the two pages are the edge's other two
        wings.  Through a vertex passage the page sitting against a
        complementary slot continues as the page sitting against the
        same slot on the outgoing edge.  An odd total permutation means
        the abstract neighborhood needs an odd number of Moebius bands.
        """
        steps = self.region_steps(rid)
        n = len(steps)
        e0, w0, _ = steps[0]
        pages = tuple(w for w in (0, 1, 2) if w != w0)
        cur = pages
        for k in range(n):
            e, w, d = steps[k]
            e2, w2, d2 = steps[(k + 1) % n]
            edge = self.edges[e]
            arrive = 1 if d == 1 else 0
            sigma_in = edge.wings[arrive]
            edge2 = self.edges[e2]
            exit_end = 0 if d2 == 1 else 1
            sigma_out = edge2.wings[exit_end]
            cur = tuple(sigma_out.index(sigma_in[p]) for p in cur)
        if cur == pages:
            return 0
        return 1

    # ----------------------------------------------------- canonical labels

    def relabeled(
        self,
        vmap: Mapping[int, int],
        emap: Mapping[int, int],
        wing_perms: Optional[Mapping[int, Tuple[int, int, int]]] = None,
        end_flips: Optional[Iterable[int]] = None,
    ) -> "Polyhedron":
        """A fresh polyhedron with renamed cells.

        ``wing_perms[e][w]`` is the new index of wing w of edge e and
        ``end_flips`` lists edges whose ends 0 and 1 are exchanged.
        Slot numbers are not renamed; use :meth:`canonical_key` when
        slot-level symmetry matters.
        """
        wing_perms = wing_perms or {}
        flips = set(end_flips or ())
        new_edges: Dict[int, Edge] = {}
        for eid, edge in self.edges.items():
            perm = wing_perms.get(eid, (0, 1, 2))
            inv = [0, 0, 0]
            for w, nw in enumerate(perm):
                inv[nw] = w
            ends = []
            wings = []
            order = (1, 0) if eid in flips else (0, 1)
            for end in order:
                v, s = edge.ends[end]
                ends.append((vmap[v], s))
                wings.append(tuple(edge.wings[end][inv[nw]] for nw in range(3)))
            new_edges[emap[eid]] = Edge((ends[0], ends[1]), (wings[0], wings[1]))
        return Polyhedron([vmap[v] for v in self.vertices], new_edges)

    def canonical_key(self) -> tuple:
        """Label-independent encoding, equal iff polyhedra are isomorphic.

        For every seed (vertex, slot numbering) the singular graph is
        relabeled breadth first: edges are discovered in slot order,
        a newly reached vertex takes its slot names from the arriving
        edge's wing order, and wings are ordered by their complementary
        slot at the already-labeled end.  The least of all encodings is
        the key.
        """
        best = None
        for seed in self.vertices:
            for perm in itertools.permutations(range(4)):
                enc = self._bfs_encoding(seed, perm)
                if best is None or enc < best:
                    best = enc
        assert best is not None
        return best

    def minimal_labelings(self) -> List[Tuple[tuple, dict, dict, dict, dict]]:
        """All BFS relabelings achieving the canonical encoding.

        Each entry is (encoding, vertex map, edge map, discovery end per
        edge, wing order per edge).  Decorated canonicalization minimizes
        a secondary key over exactly these labelings.
        """
        best: Optional[tuple] = None
        found: List[Tuple[tuple, dict, dict, dict, dict]] = []
        for seed in self.vertices:
            for perm in itertools.permutations(range(4)):
                entry = self._bfs_labels(seed, perm)
                enc = entry[0]
                if best is None or enc < best:
                    best = enc
                    found = [entry]
                elif enc == best:
                    found.append(entry)
        return found

    def _bfs_encoding(self, seed: int, seed_slots: Tuple[int, ...]) -> tuple:
        return self._bfs_labels(seed, seed_slots)[0]

    def _bfs_labels(
        self, seed: int, seed_slots: Tuple[int, ...]
    ) -> Tuple[tuple, dict, dict, dict, dict]:
        # smap[v][old slot] = new slot
        smap: Dict[int, Tuple[int, ...]] = {seed: seed_slots}
        vname: Dict[int, int] = {seed: 0}
        equeue: List[Tuple[int, int]] = []  # (edge id, discovery end)
        ename: Dict[int, int] = {}
        order: List[int] = [seed]
        idx = 0
        while idx < len(order):
            v = order[idx]
            idx += 1
            inv_slots = [0] * 4
            for old, new in enumerate(smap[v]):
                inv_slots[new] = old
            for new_slot in range(4):
                old_slot = inv_slots[new_slot]
                eid, end = self.slot_table[(v, old_slot)]
                if eid in ename:
                    continue
                ename[eid] = len(ename)
                equeue.append((eid, end))
                edge = self.edges[eid]
                far = 1 - end
                fv, fs = edge.ends[far]
                if fv not in vname:
                    vname[fv] = len(vname)
                    order.append(fv)
                    # Wing order at the near end fixes the far slot names.
                    near_v, near_s = edge.ends[end]
                    near_new = smap[near_v]
                    wing_order = sorted(
                        range(3), key=lambda w: near_new[edge.wings[end][w]]
                    )
                    fmap = [0] * 4
                    fmap[fs] = 0
                    for rank, w in enumerate(wing_order):
                        fmap[edge.wings[far][w]] = rank + 1
                    smap[fv] = tuple(fmap)
        disc_end: Dict[int, int] = dict(equeue)
        if len(vname) != self.vertex_count:
            # Disconnected input; encode reachable part plus a marker.
            return (("disconnected", len(vname)), vname, ename, disc_end, {})
        enc: List[tuple] = []
        wing_orders: Dict[int, Tuple[int, int, int]] = {}
        for eid, end in equeue:
            edge = self.edges[eid]
            near_v, near_s = edge.ends[end]
            far_v, far_s = edge.ends[1 - end]
            near_new = smap[near_v]
            far_new = smap[far_v]
            wing_order = sorted(
                range(3), key=lambda w: near_new[edge.wings[end][w]]
            )
            wing_orders[eid] = tuple(wing_order)
            enc.append(
                (
                    vname[near_v],
                    near_new[near_s],
                    vname[far_v],
                    far_new[far_s],
                    tuple(near_new[edge.wings[end][w]] for w in wing_order),
                    tuple(far_new[edge.wings[1 - end][w]] for w in wing_order),
                )
            )
        return (tuple(enc), vname, ename, disc_end, wing_orders)

    def canonical_region_index(self) -> Dict[int, Tuple[Dart, ...]]:
        return {r.id: r.steps for r in self.trace_regions()}

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"Polyhedron(V={self.vertex_count}, E={self.edge_count},"
            f" regions={'?' if self._regions is None else len(self._regions)})"
        )
