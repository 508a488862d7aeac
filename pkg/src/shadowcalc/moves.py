"""The shadow move calculus: lune, 2-to-3, 1-to-2, and inverses.

Every rewrite is a local surgery on the edge/wing gluing data.  The
conventions fixed here (and relied on by the whole package):

Lune (0->2) at site (e1, pusher wing p, side s):
    the two non-pusher wings of e1, sorted, are (R at index s, U at
    the other); the stored traversal of R's wing on e1 points toward
    a vertex u, and the passage through u continues on an edge e2
    (which must differ from e1).  The finger of Q = region(e1, p)
    pushes across R through u: e1 and e2 split into top halves (at u)
    and bottom halves ending at two new vertices v1, v2, joined by
    fresh edges f1 (Q side) and f2 (U side) that bound the new lens L.
    R splits into the pinch bigon R_top (through u and v1, gleam 0)
    and R_bot (the rest, inheriting R's gleam); L gets gleam 0.  The
    old region R corresponds to R_bot; R_top continues R's sheet and
    keeps its orientation, so only L's orientation is a version choice.

2-to-3 at site (e0, sliding wing w):
    e0 must join distinct vertices u1, u2.  The rewrite itself is
    independent of w (the wing only names which sheet slides).  e0
    disappears; one new vertex appears along with a triangular region
    D bounded by three new edges; the six non-e0 edge ends at u1, u2
    redistribute so vertex v[w] carries the continuations of the
    wing-w region from both sides.  Old gleams are kept; D gets
    gleam 0 and a free orientation.

1-to-2 at site (u, germ {a, b} with a < b):
    the region in the germ {a, b} slides over u.  The vertex splits
    into v1 (keeping id u, carrying the slot-a and slot-b edges) and a
    new v2 (carrying the other two), joined by fresh edges f and g
    that bound a new bigon region r7.  The six corner regions, in the
    role order r1 = {a,b}, r2 = {a,d}, r3 = {c,d}, r4 = {b,c},
    r5 = {a,c}, r6 = {b,d}, receive fixed half-integer gleam
    increments; r7 gets a fixed half-integer gleam.  All seven touched
    roles flip gleam parity, matching the page-monodromy change.

Inverse moves strictly pattern-match these after-pictures, including
the gleam requirements on the disappearing regions; mismatches raise
SiteMismatch, and a merge that cannot carry a branching raises
UnbranchableInverse.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from typing import (
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from . import _tables
from .decor import Shadow, is_branching, violating_edges
from .errors import (
    CalibrationError,
    NotBranched,
    ReplayFailure,
    SiteMismatch,
    StepBudgetExceeded,
    UnbranchableInverse,
)
from .homology import solve_integer
from .poly import Dart, Edge, Polyhedron


class MoveKind(Enum):
    LUNE = "lune"
    MP23 = "mp23"
    ONE_TWO = "onetwo"


@dataclass(frozen=True)
class LuneSite:
    edge: int
    pusher: int  # wing slot; forward: the pushing region, inverse: the lens
    side: int  # which sorted non-pusher wing splits (forward only)


@dataclass(frozen=True)
class MP23Site:
    edge: int
    wing: int  # forward: the sliding sheet, inverse: a triangle wing


@dataclass(frozen=True)
class OneTwoSite:
    vertex: int
    germ: Tuple[int, int]  # slot pair, sorted


Site = Union[LuneSite, MP23Site, OneTwoSite]


@dataclass(frozen=True)
class MoveInstance:
    kind: MoveKind
    site: Site
    direction: str = "forward"  # or "inverse"
    version: int = 0  # branched version index; ignored when unbranched

    def reversed(self) -> "MoveInstance":
        d = "inverse" if self.direction == "forward" else "forward"
        return replace(self, direction=d)


@dataclass
class MoveRecord:
    """Everything a caller can learn from one applied move."""

    instance: MoveInstance
    before: Shadow
    after: Shadow
    region_map: Dict[int, int]  # old rid -> new rid (surviving regions)
    agreement: Dict[int, int]  # old rid -> stored-direction agreement sign
    destroyed: Tuple[int, ...]  # old rids with no correspondent
    created: Dict[str, int]  # role -> new rid for created regions
    roles_before: Dict[str, int]
    roles_after: Dict[str, int]
    classification: str = "unclassified"  # sliding | bumping | n/a | unbranched
    case_label: Optional[str] = None
    delta_region: Optional[int] = None  # after rid carrying the bumping class
    alpha_vec: Optional[Tuple[int, ...]] = None  # integer cochain over after
    rebuilt_site: Optional[Site] = None  # inverses: site of the undone forward move
    free_dart: Optional[Dart] = None  # inverses: before-dart reading the collapsed sheet


# =====================================================================
# shared plumbing


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SiteMismatch(msg)


def _fresh_vertex_ids(poly: Polyhedron, n: int) -> List[int]:
    base = max(poly.vertices) + 1
    return [base + k for k in range(n)]


def _fresh_edge_ids(poly: Polyhedron, n: int) -> List[int]:
    base = max(poly.edges) + 1
    return [base + k for k in range(n)]


def _wing_map_from(assign: Mapping[int, int]) -> Tuple[int, int, int]:
    """Dense wing -> complementary-slot triple from a sparse assignment."""
    out: List[Optional[int]] = [None, None, None]
    for w, slot in assign.items():
        out[w] = slot
    assert None not in out
    return (out[0], out[1], out[2])  # type: ignore[return-value]


def _correspond(
    old: Shadow,
    new_poly: Polyhedron,
    translate: Callable[[Dart], Optional[Dart]],
) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Match old regions to their descendants via witness darts.

    translate maps an old dart to a new dart on the same sheet, or
    None when the step lies on removed cells.  Regions whose every
    step is removed have no correspondent and are left out.
    """
    region_map: Dict[int, int] = {}
    agreement: Dict[int, int] = {}
    for reg in old.poly.trace_regions():
        for step in reg.steps:
            t = translate(step)
            if t is None:
                continue
            e, w, d = t
            nrid = new_poly.region_of(e, w)
            region_map[reg.id] = nrid
            agreement[reg.id] = 1 if new_poly.wing_direction(e, w) == d else -1
            break
    return region_map, agreement


def _transport_orientation(
    old: Shadow, region_map: Mapping[int, int], agreement: Mapping[int, int]
) -> Optional[Dict[int, int]]:
    if old.orient is None:
        return None
    out: Dict[int, int] = {}
    for rid, nrid in region_map.items():
        sign = old.orient[rid] * agreement[rid]
        if nrid in out and out[nrid] != sign:
            raise UnbranchableInverse(
                f"merged region {nrid} inherits conflicting orientations"
            )
        out[nrid] = sign
    return out


def _transport_points(
    old: Shadow, region_map: Mapping[int, int]
) -> Dict[int, Tuple[Tuple[int, int], ...]]:
    out: Dict[int, List[Tuple[int, int]]] = {}
    for rid, pts in old.points.items():
        if not pts:
            continue
        if rid not in region_map:
            raise SiteMismatch(
                f"region {rid} carries complex points but disappears"
            )
        out.setdefault(region_map[rid], []).extend(pts)
    return {rid: tuple(sorted(v)) for rid, v in out.items()}


def _one_two_gleams(
    override: Optional[Mapping[str, int]] = None,
) -> Tuple[Dict[str, int], int]:
    table = override if override is not None else _tables.ONE_TWO_GLEAM2
    if table is None:
        raise CalibrationError("1->2 gleam increments are not frozen yet")
    inc = dict(table)
    c7 = inc.pop("r7")
    return inc, c7


# =====================================================================
# forward surgeries (pure polyhedron rewrites plus bookkeeping)


@dataclass
class _Surgery:
    new_poly: Polyhedron
    translate: Callable[[Dart], Optional[Dart]]
    roles_old: Dict[str, int]
    created_darts: Dict[str, Dart]  # role -> witness dart in the new polyhedron
    gleam_fixed: Dict[str, int]  # created role -> doubled gleam
    gleam_inc: Dict[str, int]  # pre-existing role -> doubled increment


def _lune_surgery(s: Shadow, site: LuneSite) -> _Surgery:
    poly = s.poly
    _require(site.edge in poly.edges, f"no edge {site.edge}")
    _require(site.pusher in (0, 1, 2), f"bad pusher wing {site.pusher}")
    _require(site.side in (0, 1), f"bad side {site.side}")
    e1 = site.edge
    p = site.pusher
    others = sorted(w for w in (0, 1, 2) if w != p)
    w_r = others[site.side]
    w_u = others[1 - site.side]

    d_r = poly.wing_direction(e1, w_r)
    arr = 1 if d_r == 1 else 0
    edge1 = poly.edges[e1]
    u, slot_i = edge1.ends[arr]
    e2, wp_r, d2 = poly.successor((e1, w_r, d_r))
    _require(e2 != e1, f"edge {e1} turns back onto itself at vertex {u}")
    end_u2 = 0 if d2 == 1 else 1
    edge2 = poly.edges[e2]
    _, slot_j = edge2.ends[end_u2]
    sigma1 = edge1.wings[arr]
    sigma2 = edge2.wings[end_u2]
    wp_q = sigma2.index(sigma1[p])
    wp_u = sigma2.index(sigma1[w_u])

    v1, v2 = _fresh_vertex_ids(poly, 2)
    e1t, e1b, e2t, e2b, f1, f2 = _fresh_edge_ids(poly, 6)

    far1 = 1 - arr
    far2 = 1 - end_u2
    wt1 = _wing_map_from({w_r: 1, p: 2, w_u: 3})
    wt2 = _wing_map_from({wp_r: 0, wp_q: 2, wp_u: 3})

    def split(old: Edge, keep_end: int, keep_att, new_att, new_map) -> Edge:
        ends: List = [None, None]
        wings: List = [None, None]
        ends[keep_end] = keep_att
        wings[keep_end] = old.wings[keep_end]
        ends[1 - keep_end] = new_att
        wings[1 - keep_end] = new_map
        return Edge((ends[0], ends[1]), (wings[0], wings[1]))

    new_edges = dict(poly.edges)
    del new_edges[e1]
    del new_edges[e2]
    new_edges[e1t] = split(edge1, arr, (u, slot_i), (v1, 0), wt1)
    new_edges[e1b] = split(edge1, far1, edge1.ends[far1], (v2, 0), wt1)
    new_edges[e2t] = split(edge2, end_u2, (u, slot_j), (v1, 1), wt2)
    new_edges[e2b] = split(edge2, far2, edge2.ends[far2], (v2, 1), wt2)
    # f1 bounds L, Q, Q'; f2 bounds L, U, U'.  Wing 0 is always the lens.
    new_edges[f1] = Edge(((v1, 2), (v2, 2)), ((3, 0, 1), (3, 0, 1)))
    new_edges[f2] = Edge(((v1, 3), (v2, 3)), ((2, 0, 1), (2, 0, 1)))
    new_poly = Polyhedron(list(poly.vertices) + [v1, v2], new_edges)

    def translate(dart: Dart) -> Optional[Dart]:
        e, w, d = dart
        if e == e1:
            return (e1b, w, d)
        if e == e2:
            return (e2b, w, d)
        return dart

    roles_old = {
        "R": poly.region_of(e1, w_r),
        "Q": poly.region_of(e1, p),
        "U": poly.region_of(e1, w_u),
        "Q'": poly.region_of(e2, wp_q),
        "U'": poly.region_of(e2, wp_u),
    }
    created = {
        "R_top": (e1t, w_r, 1 if arr == 1 else -1),  # runs toward u
        "L": (f1, 0, 1),
    }
    return _Surgery(
        new_poly, translate, roles_old, created, {"R_top": 0, "L": 0}, {}
    )


def _mp23_surgery(s: Shadow, site: MP23Site) -> _Surgery:
    poly = s.poly
    _require(site.edge in poly.edges, f"no edge {site.edge}")
    _require(site.wing in (0, 1, 2), f"bad wing {site.wing}")
    e0 = site.edge
    edge0 = poly.edges[e0]
    (u1, i1), (u2, i2) = edge0.ends
    _require(u1 != u2, f"edge {e0} is a loop at vertex {u1}")
    sigma1, sigma2 = edge0.wings

    def others(w: int) -> Tuple[int, int]:
        a, b = (x for x in (0, 1, 2) if x != w)
        return a, b

    (v_new,) = _fresh_vertex_ids(poly, 1)
    g_ids = dict(zip((0, 1, 2), _fresh_edge_ids(poly, 3)))
    v = {0: u1, 1: u2, 2: v_new}

    def g_slot(gw: int, at: int) -> int:
        # at vertex v[at], slots 2 and 3 hold g[min other], g[max other]
        lo, _hi = others(at)
        return 2 if gw == lo else 3

    new_edges = dict(poly.edges)
    del new_edges[e0]

    # Re-home the six outer edge ends; keyed by (edge, end) so loop
    # edges and edges joining u1 to u2 update both their ends.
    moved: Dict[Tuple[int, int], Tuple[Tuple[int, int], Tuple[int, int, int]]] = {}
    for w in (0, 1, 2):
        wp, wpp = others(w)
        for host_end, (sig, iend) in enumerate(((sigma1, i1), (sigma2, i2))):
            host_v = (u1, u2)[host_end]
            eid, end = poly.slot_table[(host_v, sig[w])]
            old_map = poly.edges[eid].wings[end]
            w_region = old_map.index(iend)
            w_s_pp = old_map.index(sig[wp])  # bounds the S region of index w''
            w_s_p = old_map.index(sig[wpp])  # bounds the S region of index w'
            assign = {
                w_region: 1 - host_end,
                w_s_p: g_slot(wp, w),
                w_s_pp: g_slot(wpp, w),
            }
            moved[(eid, end)] = ((v[w], host_end), _wing_map_from(assign))

    for (eid, end), (att, nmap) in moved.items():
        cur = new_edges[eid]
        ends = list(cur.ends)
        wings = list(cur.wings)
        ends[end] = att
        wings[end] = nmap
        new_edges[eid] = Edge((ends[0], ends[1]), (wings[0], wings[1]))

    # Triangle edges g[w] join v[w'] (end 0) and v[w''] (end 1); wing 0
    # always bounds the new triangle D.
    for w in (0, 1, 2):
        wp, wpp = others(w)
        s_lo = g_slot(w, wp)
        s_hi = g_slot(w, wpp)
        m_lo = _wing_map_from({0: 5 - s_lo, 1: 0, 2: 1})
        m_hi = _wing_map_from({0: 5 - s_hi, 1: 0, 2: 1})
        new_edges[g_ids[w]] = Edge(((v[wp], s_lo), (v[wpp], s_hi)), (m_lo, m_hi))
    new_poly = Polyhedron(list(poly.vertices) + [v_new], new_edges)

    def translate(dart: Dart) -> Optional[Dart]:
        if dart[0] == e0:
            return None
        return dart

    roles_old = {}
    for w in (0, 1, 2):
        wp, wpp = others(w)
        roles_old[f"W{w}"] = poly.region_of(e0, w)
        roles_old[f"S1_{w}"] = poly.region_at_germ(u1, sigma1[wp], sigma1[wpp])
        roles_old[f"S2_{w}"] = poly.region_at_germ(u2, sigma2[wp], sigma2[wpp])
    created = {"D": (g_ids[0], 0, 1)}
    return _Surgery(new_poly, translate, roles_old, created, {"D": 0}, {})


def _one_two_surgery(
    s: Shadow, site: OneTwoSite, gleam_c2: Optional[Mapping[str, int]] = None
) -> _Surgery:
    poly = s.poly
    u = site.vertex
    _require(u in set(poly.vertices), f"no vertex {u}")
    germ = tuple(site.germ)
    _require(
        len(germ) == 2 and 0 <= germ[0] < germ[1] <= 3, f"bad germ {site.germ}"
    )
    a, b = germ
    c, d = (x for x in range(4) if x not in germ)

    ends = {slot: poly.slot_table[(u, slot)] for slot in range(4)}
    (v2,) = _fresh_vertex_ids(poly, 1)
    f_id, g_id = _fresh_edge_ids(poly, 2)
    v1 = u

    role_germs = {
        "r1": (a, b),
        "r2": (a, d),
        "r3": (c, d),
        "r4": (b, c),
        "r5": (a, c),
        "r6": (b, d),
    }
    roles_old = {
        role: poly.region_at_germ(u, x, y) for role, (x, y) in role_germs.items()
    }

    new_edges = dict(poly.edges)

    def reattach(slot: int, att: Tuple[int, int], assign: Mapping[int, int]) -> None:
        eid, end = ends[slot]
        cur = new_edges[eid]
        es = list(cur.ends)
        ws = list(cur.wings)
        es[end] = att
        ws[end] = _wing_map_from(assign)
        new_edges[eid] = Edge((es[0], es[1]), (ws[0], ws[1]))

    def wing_of(slot: int, toward: int) -> int:
        eid, end = ends[slot]
        return poly.edges[eid].wings[end].index(toward)

    reattach(a, (v1, 0), {wing_of(a, b): 1, wing_of(a, c): 2, wing_of(a, d): 3})
    reattach(b, (v1, 1), {wing_of(b, a): 0, wing_of(b, d): 2, wing_of(b, c): 3})
    reattach(c, (v2, 0), {wing_of(c, d): 1, wing_of(c, a): 2, wing_of(c, b): 3})
    reattach(d, (v2, 1), {wing_of(d, c): 0, wing_of(d, b): 2, wing_of(d, a): 3})
    # f bounds r7, r5, r6; g bounds r7, r2, r4.  Wing 0 is always r7.
    new_edges[f_id] = Edge(((v1, 2), (v2, 2)), ((3, 0, 1), (3, 0, 1)))
    new_edges[g_id] = Edge(((v1, 3), (v2, 3)), ((2, 0, 1), (2, 1, 0)))
    new_poly = Polyhedron(list(poly.vertices) + [v2], new_edges)

    def translate(dart: Dart) -> Optional[Dart]:
        return dart  # every old edge keeps id, wing ids, and end order

    inc2, c7 = _one_two_gleams(gleam_c2)
    created = {"r7": (f_id, 0, 1)}
    return _Surgery(new_poly, translate, roles_old, created, {"r7": c7}, inc2)


_SITE_TYPES = {
    MoveKind.LUNE: LuneSite,
    MoveKind.MP23: MP23Site,
    MoveKind.ONE_TWO: OneTwoSite,
}


def _surgery_for(
    s: Shadow, m: MoveInstance, gleam_c2: Optional[Mapping[str, int]]
) -> _Surgery:
    if m.kind is MoveKind.LUNE:
        return _lune_surgery(s, m.site)
    if m.kind is MoveKind.MP23:
        return _mp23_surgery(s, m.site)
    return _one_two_surgery(s, m.site, gleam_c2)


def _assemble_forward(
    s: Shadow,
    m: MoveInstance,
    sign: Optional[int],
    gleam_c2: Optional[Mapping[str, int]] = None,
) -> MoveRecord:
    """Build the after-shadow from one surgery and a created-sheet sign."""
    surgery = _surgery_for(s, m, gleam_c2)
    new_poly = surgery.new_poly
    region_map, agreement = _correspond(s, new_poly, surgery.translate)
    assert len(region_map) == s.poly.region_count, "a region lost its witness"

    gleam2: Dict[int, int] = {}
    for rid, nrid in region_map.items():
        gleam2[nrid] = s.gleam2[rid]
    for role, inc in surgery.gleam_inc.items():
        gleam2[region_map[surgery.roles_old[role]]] += inc
    created_rids: Dict[str, int] = {}
    for role, dart in surgery.created_darts.items():
        rid = new_poly.region_of(dart[0], dart[1])
        created_rids[role] = rid
        gleam2[rid] = surgery.gleam_fixed[role]

    orient = _transport_orientation(s, region_map, agreement)
    if orient is not None:
        if m.kind is MoveKind.LUNE:
            e, w, d = surgery.created_darts["R_top"]
            agree = 1 if new_poly.wing_direction(e, w) == d else -1
            orient[created_rids["R_top"]] = (
                s.orient[surgery.roles_old["R"]] * agree
            )
            free = created_rids["L"]
        else:
            (free,) = created_rids.values()
        if sign is None:
            raise NotBranched("branched apply needs a version sign")
        orient[free] = sign
        if not is_branching(new_poly, orient):
            raise NotBranched(
                f"orientation {sign:+d} on the new region breaks the branching"
            )

    after = Shadow(new_poly, gleam2, orient, _transport_points(s, region_map))
    roles_after = {role: region_map[rid] for role, rid in surgery.roles_old.items()}
    roles_after.update(created_rids)
    return MoveRecord(
        instance=m,
        before=s,
        after=after,
        region_map=region_map,
        agreement=agreement,
        destroyed=(),
        created=created_rids,
        roles_before=dict(surgery.roles_old),
        roles_after=roles_after,
    )


# =====================================================================
# classification


def push_vector(
    before: Shadow,
    vec: Sequence[int],
    region_map: Mapping[int, int],
    destroyed: Sequence[int],
    dim_after: int,
) -> List[int]:
    """Push an integer cochain vector through a move correspondence.

    Coefficients on destroyed regions are first traded away along the
    coboundary lattice of the before-shadow (the class is unchanged);
    coefficients of merged regions add.  Raises ReplayFailure when no
    equivalent representative avoids the destroyed regions.
    """
    from .cochains import coboundary_vector

    vec = list(vec)
    dead = [r for r in destroyed if vec[r] != 0]
    if dead:
        edges = sorted(before.poly.edges)
        deltas = {e: coboundary_vector(before, e) for e in edges}
        rows = [[deltas[e][r] for e in edges] for r in dead]
        target = [-vec[r] for r in dead]
        x = solve_integer(rows, target)
        if x is None:
            raise ReplayFailure(
                f"cochain class cannot avoid destroyed regions {dead}"
            )
        for e, coeff in zip(edges, x):
            if coeff:
                vec = [v + coeff * dv for v, dv in zip(vec, deltas[e])]
    out = [0] * dim_after
    for rid, nrid in region_map.items():
        out[nrid] += vec[rid]
    return out


def dart_sign(s: Shadow, dart: Dart) -> int:
    """The dart's direction measured against its region's orientation."""
    e, w, d = dart
    rid = s.poly.region_of(e, w)
    return s.sign(rid) * s.poly.wing_direction(e, w) * d


def lune_frame_darts(poly: Polyhedron, site: LuneSite) -> Dict[str, Dart]:
    """Reference darts of the five lune corner roles at a forward site."""
    e1, p = site.edge, site.pusher
    rest = sorted(w for w in (0, 1, 2) if w != p)
    w_r = rest[site.side]
    w_u = rest[1 - site.side]
    d_r = poly.wing_direction(e1, w_r)
    arr = 1 if d_r == 1 else 0
    e2, _, d2 = poly.successor((e1, w_r, d_r))
    end_u2 = 0 if d2 == 1 else 1
    sigma1 = poly.edges[e1].wings[arr]
    sigma2 = poly.edges[e2].wings[end_u2]
    wp_q = sigma2.index(sigma1[p])
    wp_u = sigma2.index(sigma1[w_u])
    return {
        "R": (e1, w_r, d_r),
        "Q": (e1, p, d_r),
        "U": (e1, w_u, d_r),
        "Q'": (e2, wp_q, d2),
        "U'": (e2, wp_u, d2),
    }


def mp23_frame_darts(poly: Polyhedron, site: MP23Site) -> Dict[str, Dart]:
    """Reference darts of the nine 2->3 corner roles at a forward site."""
    e0 = site.edge
    (u1, _), (u2, _) = poly.edges[e0].ends
    sigma1, sigma2 = poly.edges[e0].wings

    def germ_dart(u: int, slot_in: int, slot_face: int) -> Dart:
        eid, end = poly.slot_table[(u, slot_in)]
        w = poly.edges[eid].wings[end].index(slot_face)
        return (eid, w, 1 if end == 1 else -1)

    out: Dict[str, Dart] = {}
    for w in (0, 1, 2):
        wp, wpp = (x for x in (0, 1, 2) if x != w)
        out[f"W{w}"] = (e0, w, 1)
        out[f"S1_{w}"] = germ_dart(u1, sigma1[wp], sigma1[wpp])
        out[f"S2_{w}"] = germ_dart(u2, sigma2[wp], sigma2[wpp])
    return out


LUNE_SIG_ORDER = ("R", "Q", "U", "Q'", "U'")
MP23_SIG_ORDER = (
    "W0", "W1", "W2", "S1_0", "S1_1", "S1_2", "S2_0", "S2_1", "S2_2"
)


def local_signature(
    rec: MoveRecord,
) -> Tuple[Tuple[int, ...], Dict[str, int]]:
    """Corner signs plus created-sheet sign of the (undone) forward move.

    Returns the signature tuple and the role -> after-region map the
    classification tables speak about.  For an inverse record the frame
    lives on rec.after and the created-sheet sign is read off the
    collapsed region in rec.before via the recorded witness dart.
    """
    if rec.instance.kind is MoveKind.LUNE:
        frame_of, order, free = lune_frame_darts, LUNE_SIG_ORDER, "L"
    else:
        frame_of, order, free = mp23_frame_darts, MP23_SIG_ORDER, "D"
    if rec.instance.direction == "forward":
        frame = frame_of(rec.before.poly, rec.instance.site)
        sig = tuple(dart_sign(rec.before, frame[r]) for r in order)
        sig += (rec.after.orient[rec.created[free]],)
        roles = {r: rec.roles_after[r] for r in order}
    else:
        assert rec.rebuilt_site is not None and rec.free_dart is not None
        frame = frame_of(rec.after.poly, rec.rebuilt_site)
        sig = tuple(dart_sign(rec.after, frame[r]) for r in order)
        sig += (dart_sign(rec.before, rec.free_dart),)
        roles = {
            r: rec.after.poly.region_of(e, w) for r, (e, w, _d) in frame.items()
        }
    return sig, roles


def _classify(rec: MoveRecord) -> None:
    """Fill classification, delta_region, case_label, and alpha_vec."""
    if rec.before.orient is None:
        rec.classification = "unbranched"
        return
    if rec.instance.kind is MoveKind.ONE_TWO:
        rec.classification = "n/a"
        rec.case_label = _one_two_case_label(rec)
        rec.alpha_vec = _one_two_alpha(rec)
        return
    table = (
        _tables.LUNE_VERSIONS
        if rec.instance.kind is MoveKind.LUNE
        else _tables.MP23_VERSIONS
    )
    if table is None:
        raise CalibrationError(
            f"{rec.instance.kind.value} version table is not frozen yet"
        )
    sig, roles = local_signature(rec)
    try:
        tag, bump_role = table[sig]
    except KeyError:
        raise CalibrationError(
            f"{rec.instance.kind.value} signature {sig} is outside the"
            f" frozen version table"
        ) from None
    rec.classification = tag
    dim = rec.after.poly.region_count
    if tag == "sliding":
        rec.alpha_vec = tuple([0] * dim)
        return
    rid = roles[bump_role]
    rec.delta_region = rid
    alpha = [0] * dim
    alpha[rid] = -1 if rec.instance.direction == "forward" else 1
    rec.alpha_vec = tuple(alpha)


def _one_two_ref_darts(s: Shadow, site: OneTwoSite) -> Dict[str, Dart]:
    """Per-role reference darts (edge, wing, toward-vertex direction)."""
    poly = s.poly
    a, b = site.germ
    c, d = (x for x in range(4) if x not in site.germ)
    u = site.vertex

    def dart(slot: int, toward: int) -> Dart:
        eid, end = poly.slot_table[(u, slot)]
        w = poly.edges[eid].wings[end].index(toward)
        to_u = 1 if end == 1 else -1
        return (eid, w, to_u)

    return {
        "r1": dart(a, b),
        "r2": dart(a, d),
        "r3": dart(c, d),
        "r4": dart(b, c),
        "r5": dart(a, c),
        "r6": dart(b, d),
    }


def _one_two_signs(s: Shadow, ref: Mapping[str, Dart]) -> Dict[str, int]:
    if _tables.ONE_TWO_POLARITY is None:
        raise CalibrationError("1->2 polarity conventions are not frozen yet")
    out = {}
    for role, (e, w, toward) in ref.items():
        induced = s.sign(s.poly.region_of(e, w)) * s.poly.wing_direction(e, w)
        out[role] = induced * toward * _tables.ONE_TWO_POLARITY[role]
    return out


def _r7_sign(s: Shadow, rid: int) -> int:
    if _tables.ONE_TWO_POLARITY is None:
        raise CalibrationError("1->2 polarity conventions are not frozen yet")
    e, w, _d = min(s.poly.region_steps(rid))
    induced = s.sign(rid) * s.poly.wing_direction(e, w)
    return induced * _tables.ONE_TWO_POLARITY["r7"]


def one_two_signature(
    before: Shadow, site: OneTwoSite, after7: Shadow, r7_rid: int
) -> Tuple[Tuple[int, ...], int]:
    """Corner sign profile (sigma_1..sigma_6) and the bigon sign."""
    signs = _one_two_signs(before, _one_two_ref_darts(before, site))
    vec = tuple(signs[f"r{i}"] for i in range(1, 7))
    return vec, _r7_sign(after7, r7_rid)


def _one_two_case_label(rec: MoveRecord) -> str:
    if _tables.ONE_TWO_CASE_OF_SIGNS is None:
        raise CalibrationError("1->2 case table is not frozen yet")
    if rec.instance.direction == "forward":
        vec, s7 = one_two_signature(
            rec.before, rec.instance.site, rec.after, rec.created["r7"]
        )
    else:
        vec, s7 = one_two_signature(
            rec.after, rec.rebuilt_site, rec.before, rec.roles_before["r7"]
        )
    try:
        return _tables.ONE_TWO_CASE_OF_SIGNS[(vec, s7)]
    except KeyError:
        raise CalibrationError(
            f"1->2 sign profile {vec} / bigon {s7:+d} is outside the case table"
        ) from None


def _one_two_alpha(rec: MoveRecord) -> Tuple[int, ...]:
    table = _tables.ONE_TWO_TABLE
    if table is None:
        raise CalibrationError("1->2 class table is not frozen yet")
    entry = table[rec.case_label]["dc1"]
    alpha = [0] * rec.after.poly.region_count
    sgn = 1 if rec.instance.direction == "forward" else -1
    for role, coeff in entry.items():
        alpha[rec.roles_after[role]] += sgn * (coeff // 2)
    return tuple(alpha)


# =====================================================================
# forward apply and version enumeration


def _forward_candidates(
    s: Shadow, m: MoveInstance, gleam_c2: Optional[Mapping[str, int]]
) -> List[Tuple[int, MoveRecord]]:
    out = []
    for sign in (1, -1):
        try:
            rec = _assemble_forward(s, m, sign, gleam_c2)
        except NotBranched:
            continue
        out.append((sign, rec))
    if not out:
        raise CalibrationError(
            f"forward {m.kind.value} at {m.site} admits no branched version"
        )
    return out


def branched_versions(
    s: Shadow,
    kind: MoveKind,
    site: Site,
    classify: bool = True,
    gleam_c2: Optional[Mapping[str, int]] = None,
) -> List[Tuple[int, int, str, Optional[str]]]:
    """All valid created-sheet orientations at a forward site.

    Returns (version id, sign, classification, case label) in sign
    order +1 before -1.  Every forward move admits at least one.
    """
    if s.orient is None:
        raise NotBranched("version enumeration needs a branched shadow")
    out = []
    candidates = _forward_candidates(s, MoveInstance(kind, site), gleam_c2)
    for vid, (sign, rec) in enumerate(candidates):
        rec.instance = replace(rec.instance, version=vid)
        if classify:
            _classify(rec)
            out.append((vid, sign, rec.classification, rec.case_label))
        else:
            out.append((vid, sign, "unclassified", None))
    return out


def enumerate_one_two_cases(
    s: Shadow, site: OneTwoSite
) -> List[Tuple[int, int, str]]:
    """(version, new-sheet sign, case label) for a 1->2 site."""
    return [
        (vid, sign, label)
        for vid, sign, _cls, label in branched_versions(s, MoveKind.ONE_TWO, site)
    ]


def apply(
    s: Shadow,
    m: MoveInstance,
    classify: bool = True,
    gleam_c2: Optional[Mapping[str, int]] = None,
) -> MoveRecord:
    """Rewrite the shadow; returns the full record with correspondence."""
    if not isinstance(m.site, _SITE_TYPES[m.kind]):
        raise SiteMismatch(
            f"{m.kind.value} move cannot use a {type(m.site).__name__}"
        )
    if m.direction == "inverse":
        return _apply_inverse(s, m, classify, gleam_c2)
    if s.orient is None:
        rec = _assemble_forward(s, m, None, gleam_c2)
        if classify:
            _classify(rec)
        rec.after.check()
        return rec
    candidates = _forward_candidates(s, m, gleam_c2)
    if not (0 <= m.version < len(candidates)):
        raise SiteMismatch(
            f"version {m.version} is not among the {len(candidates)} valid"
            f" orientations at this site"
        )
    rec = candidates[m.version][1]
    rec.instance = m
    if classify:
        _classify(rec)
    rec.after.check()
    return rec


# =====================================================================
# inverse pattern matching


def _bigon_data(poly: Polyhedron, rid: int):
    steps = poly.region_steps(rid)
    if len(steps) != 2 or steps[0][0] == steps[1][0]:
        return None
    return steps


def _apply_inverse(
    s: Shadow,
    m: MoveInstance,
    classify: bool,
    gleam_c2: Optional[Mapping[str, int]] = None,
) -> MoveRecord:
    if m.kind is MoveKind.LUNE:
        rec = _inverse_lune(s, m)
    elif m.kind is MoveKind.MP23:
        rec = _inverse_mp23(s, m)
    else:
        rec = _inverse_one_two(s, m, gleam_c2)
    if rec.after.orient is not None and not is_branching(
        rec.after.poly, rec.after.orient
    ):
        raise UnbranchableInverse(
            f"inverse {m.kind.value} merge does not admit the branching"
        )
    if classify and s.orient is not None:
        _classify(rec)
    rec.after.check()
    return rec


# --------------------------------------------------------------- lune


def _inverse_lune(s: Shadow, m: MoveInstance) -> MoveRecord:
    poly = s.poly
    site = m.site
    _require(site.edge in poly.edges, f"no edge {site.edge}")
    _require(site.pusher in (0, 1, 2), f"bad wing {site.pusher}")
    lens_rid = poly.region_of(site.edge, site.pusher)
    lens = _bigon_data(poly, lens_rid)
    _require(lens is not None, f"region {lens_rid} is not a two-edge lens")
    f_ids = sorted({lens[0][0], lens[1][0]})
    ends_a = poly.edges[f_ids[0]].ends
    ends_b = poly.edges[f_ids[1]].ends
    va = {ends_a[0][0], ends_a[1][0]}
    _require(
        va == {ends_b[0][0], ends_b[1][0]} and len(va) == 2,
        "lens edges must join the same two distinct vertices",
    )
    _require(s.gleam2[lens_rid] == 0, "lens gleam must be zero")

    info = None
    for v1 in sorted(va):
        v2 = next(x for x in va if x != v1)
        info = _match_lune_side(s, set(f_ids), v1, v2)
        if info is not None:
            break
    _require(info is not None, "neither lens endpoint shows the pinch pattern")
    return _collapse_lune(s, m, lens_rid, f_ids, info)


def _match_lune_side(s: Shadow, f_edges, v1: int, v2: int):
    """Try to read the split-edge picture with the pinch bigon at v1."""
    poly = s.poly
    slots1 = {slot: poly.slot_table[(v1, slot)] for slot in range(4)}
    lens_slots1 = sorted(sl for sl, (e, _) in slots1.items() if e in f_edges)
    if len(lens_slots1) != 2:
        return None
    top_slots = [sl for sl in range(4) if sl not in lens_slots1]
    top_rid = poly.region_at_germ(v1, top_slots[0], top_slots[1])
    top = _bigon_data(poly, top_rid)
    if top is None or s.gleam2[top_rid] != 0:
        return None
    top_edges = {top[0][0], top[1][0]}
    if top_edges & f_edges:
        return None
    et1, _ = slots1[top_slots[0]]
    et2, _ = slots1[top_slots[1]]
    if top_edges != {et1, et2}:
        return None
    u_set = set()
    for te in (et1, et2):
        vs = {poly.edges[te].ends[0][0], poly.edges[te].ends[1][0]}
        if v1 not in vs or len(vs) != 2:
            return None
        u_set.add(next(x for x in vs if x != v1))
    if len(u_set) != 1:
        return None
    u = u_set.pop()
    if u in (v1, v2):
        return None

    slots2 = {slot: poly.slot_table[(v2, slot)] for slot in range(4)}
    lens_slots2 = sorted(sl for sl, (e, _) in slots2.items() if e in f_edges)
    if len(lens_slots2) != 2:
        return None
    bot_slots = [sl for sl in range(4) if sl not in lens_slots2]
    eb1, _ = slots2[bot_slots[0]]
    eb2, _ = slots2[bot_slots[1]]
    if eb1 == eb2 or {eb1, eb2} & f_edges or {eb1, eb2} & {et1, et2}:
        return None

    f_by_id1 = {e: sl for sl, (e, _) in slots1.items() if e in f_edges}
    f_by_id2 = {e: sl for sl, (e, _) in slots2.items() if e in f_edges}
    f_ids = sorted(f_edges)

    top_sig = [
        tuple(poly.region_at_germ(v1, sl, f_by_id1[fe]) for fe in f_ids)
        for sl in top_slots
    ]
    bot_sig = [
        tuple(poly.region_at_germ(v2, sl, f_by_id2[fe]) for fe in f_ids)
        for sl in bot_slots
    ]
    # Pair each split top edge with the bottom edge continuing the same
    # side regions across the lens; coinciding side regions admit either
    # assignment, so take the first perfect matching.
    pairing = None
    for perm in ((0, 1), (1, 0)):
        if top_sig[0] == bot_sig[perm[0]] and top_sig[1] == bot_sig[perm[1]]:
            pairing = {0: bot_slots[perm[0]], 1: bot_slots[perm[1]]}
            break
    if pairing is None:
        return None
    bot_rid = poly.region_at_germ(v2, bot_slots[0], bot_slots[1])
    if bot_rid == top_rid:
        return None
    return {
        "v1": v1,
        "v2": v2,
        "u": u,
        "top_rid": top_rid,
        "bot_rid": bot_rid,
        "top_slots": top_slots,
        "bot_slot_of": pairing,
        "slots1": slots1,
        "slots2": slots2,
        "f_by_id1": f_by_id1,
        "f_by_id2": f_by_id2,
    }


def _collapse_lune(
    s: Shadow, m: MoveInstance, lens_rid: int, f_ids: List[int], info
) -> MoveRecord:
    poly = s.poly
    v1, v2 = info["v1"], info["v2"]
    top_rid, bot_rid = info["top_rid"], info["bot_rid"]
    slots1, slots2 = info["slots1"], info["slots2"]
    f_by_id1, f_by_id2 = info["f_by_id1"], info["f_by_id2"]

    new_edges = dict(poly.edges)
    drop = set(f_ids)
    fused_ids = _fresh_edge_ids(poly, 2)
    # old edge id -> (fused id, old wing -> fused wing, end at v1/v2, is top)
    trans: Dict[int, Tuple[int, Dict[int, int], int, bool]] = {}
    roles_before = {"R_top": top_rid, "R_bot": bot_rid, "L": lens_rid}

    for k in (0, 1):
        t_slot = info["top_slots"][k]
        et, et_end = slots1[t_slot]
        b_slot = info["bot_slot_of"][k]
        eb, eb_end = slots2[b_slot]
        other_top = info["top_slots"][1 - k]
        et_map = poly.edges[et].wings[et_end]
        w_r_t = et_map.index(other_top)
        w_q_t = et_map.index(f_by_id1[f_ids[0]])
        w_u_t = et_map.index(f_by_id1[f_ids[1]])
        other_bot = info["bot_slot_of"][1 - k]
        eb_map = poly.edges[eb].wings[eb_end]
        w_r_b = eb_map.index(other_bot)
        w_q_b = eb_map.index(f_by_id2[f_ids[0]])
        w_u_b = eb_map.index(f_by_id2[f_ids[1]])
        far_t = 1 - et_end
        far_b = 1 - eb_end
        new_id = fused_ids[k]
        # fused edge: end 0 keeps the top edge's far (= u) attachment,
        # end 1 keeps the bottom edge's far attachment; wing order R, Q, U
        top_far_map = poly.edges[et].wings[far_t]
        bot_far_map = poly.edges[eb].wings[far_b]
        new_edges[new_id] = Edge(
            (poly.edges[et].ends[far_t], poly.edges[eb].ends[far_b]),
            (
                (top_far_map[w_r_t], top_far_map[w_q_t], top_far_map[w_u_t]),
                (bot_far_map[w_r_b], bot_far_map[w_q_b], bot_far_map[w_u_b]),
            ),
        )
        drop.update((et, eb))
        trans[et] = (new_id, {w_r_t: 0, w_q_t: 1, w_u_t: 2}, et_end, True)
        trans[eb] = (new_id, {w_r_b: 0, w_q_b: 1, w_u_b: 2}, eb_end, False)
        if k == 0:
            roles_before["Q"] = poly.region_of(et, w_q_t)
            roles_before["U"] = poly.region_of(et, w_u_t)
        else:
            roles_before["Q'"] = poly.region_of(et, w_q_t)
            roles_before["U'"] = poly.region_of(et, w_u_t)
    for e in drop:
        del new_edges[e]
    new_poly = Polyhedron(
        [v for v in poly.vertices if v not in (v1, v2)], new_edges
    )

    f_set = set(f_ids)

    def translate(dart: Dart) -> Optional[Dart]:
        e, w, d = dart
        if e in f_set:
            return None
        if e not in trans:
            return dart
        new_id, wmap, near_end, is_top = trans[e]
        toward_near = (1 if d == 1 else 0) == near_end
        # on a top edge, running toward v1 runs away from u, hence
        # toward end 1 of the fused edge; on a bottom edge, running
        # toward v2 runs toward u, hence toward end 0
        if is_top:
            nd = 1 if toward_near else -1
        else:
            nd = -1 if toward_near else 1
        return (new_id, wmap[w], nd)

    region_map, agreement = _correspond(s, new_poly, translate)
    destroyed = tuple(r for r in range(poly.region_count) if r not in region_map)

    gleam2 = {}
    for rid, nrid in region_map.items():
        if rid == top_rid:
            continue  # merged; the bottom part carries the gleam
        gleam2[nrid] = s.gleam2[rid]
    orient = _transport_orientation(s, region_map, agreement)
    after = Shadow(new_poly, gleam2, orient, _transport_points(s, region_map))
    roles_after = {
        role: region_map[rid]
        for role, rid in roles_before.items()
        if rid in region_map
    }
    # The forward move this collapse undoes: its split edge is the fused
    # edge whose R band (wing 0) is stored running toward the pinch end
    # (end 0); exactly one of the two qualifies.  The lens sign is read
    # on the lens edge beside Q and Q', running from v2 toward v1.
    fused_e1 = next(
        fe for fe in (fused_ids[0], fused_ids[1])
        if new_poly.wing_direction(fe, 0) == -1
    )
    w_lens = next(
        w for w in (0, 1, 2) if poly.region_of(f_ids[0], w) == lens_rid
    )
    d_lens = -1 if poly.edges[f_ids[0]].ends[0][0] == v1 else 1
    return MoveRecord(
        instance=m,
        before=s,
        after=after,
        region_map=region_map,
        agreement=agreement,
        destroyed=destroyed,
        created={},
        roles_before=roles_before,
        roles_after=roles_after,
        rebuilt_site=LuneSite(fused_e1, 1, 0),
        free_dart=(f_ids[0], w_lens, d_lens),
    )


# --------------------------------------------------------------- 3->2


def _inverse_mp23(s: Shadow, m: MoveInstance) -> MoveRecord:
    poly = s.poly
    site = m.site
    _require(site.edge in poly.edges, f"no edge {site.edge}")
    _require(site.wing in (0, 1, 2), f"bad wing {site.wing}")
    d_rid = poly.region_of(site.edge, site.wing)
    steps = poly.region_steps(d_rid)
    _require(len(steps) == 3, f"region {d_rid} is not a triangle")
    g_ids = sorted({e for (e, _, _) in steps})
    _require(len(g_ids) == 3, "triangle must run over three distinct edges")
    verts = set()
    for e in g_ids:
        verts.update(vv for (vv, _) in poly.edges[e].ends)
    _require(len(verts) == 3, "triangle must pass three distinct vertices")
    _require(s.gleam2[d_rid] == 0, "triangle gleam must be zero")
    tri = sorted(verts)

    g_slots: Dict[int, List[int]] = {vv: [] for vv in tri}
    for vv in tri:
        for slot in range(4):
            e, _ = poly.slot_table[(vv, slot)]
            if e in g_ids:
                g_slots[vv].append(slot)
        _require(
            len(g_slots[vv]) == 2, "each triangle vertex needs two triangle slots"
        )
    outer = {vv: [sl for sl in range(4) if sl not in g_slots[vv]] for vv in tri}

    pair_edge: Dict[Tuple[int, int], int] = {}
    for i in range(3):
        for j in range(i + 1, 3):
            for e in g_ids:
                vs = {poly.edges[e].ends[0][0], poly.edges[e].ends[1][0]}
                if vs == {tri[i], tri[j]}:
                    pair_edge[(i, j)] = e
                    break
            _require(
                (i, j) in pair_edge,
                "triangle edges must pairwise join its vertices",
            )

    def slot_at(e: int, vv: int) -> int:
        for end in (0, 1):
            v_e, sl = poly.edges[e].ends[end]
            if v_e == vv and poly.slot_table[(vv, sl)] == (e, end):
                return sl
        raise AssertionError("edge end not found at vertex")

    # Decide which outer slot at each vertex belongs to the u1 sheet:
    # the side regions along every triangle edge must agree vertexwise.
    best = None
    for bits in itertools.product((0, 1), repeat=3):
        side1 = {tri[k]: outer[tri[k]][bits[k]] for k in range(3)}
        side2 = {tri[k]: outer[tri[k]][1 - bits[k]] for k in range(3)}
        ok = True
        for i in range(3):
            for j in range(i + 1, 3):
                e = pair_edge[(i, j)]
                sl_i = slot_at(e, tri[i])
                sl_j = slot_at(e, tri[j])
                if poly.region_at_germ(
                    tri[i], side1[tri[i]], sl_i
                ) != poly.region_at_germ(tri[j], side1[tri[j]], sl_j):
                    ok = False
                    break
                if poly.region_at_germ(
                    tri[i], side2[tri[i]], sl_i
                ) != poly.region_at_germ(tri[j], side2[tri[j]], sl_j):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            best = (side1, side2)
            break
    _require(best is not None, "no consistent sheet pairing around the triangle")
    side1, side2 = best

    roles_before: Dict[str, int] = {"D": d_rid}
    for k, vv in enumerate(tri):
        roles_before[f"W{k}"] = poly.region_at_germ(vv, outer[vv][0], outer[vv][1])
    for k in range(3):
        i, j = (x for x in range(3) if x != k)
        e = pair_edge[(i, j)]
        sl_i = slot_at(e, tri[i])
        roles_before[f"S1_{k}"] = poly.region_at_germ(tri[i], side1[tri[i]], sl_i)
        roles_before[f"S2_{k}"] = poly.region_at_germ(tri[i], side2[tri[i]], sl_i)

    u1, u2 = tri[0], tri[1]
    (e0_id,) = _fresh_edge_ids(poly, 1)
    new_edges = dict(poly.edges)
    for e in g_ids:
        del new_edges[e]

    def reattach(vv: int, old_slot: int, att, assign) -> None:
        eid, end = poly.slot_table[(vv, old_slot)]
        cur = new_edges[eid]
        es = list(cur.ends)
        ws = list(cur.wings)
        es[end] = att
        ws[end] = _wing_map_from(assign)
        new_edges[eid] = Edge((es[0], es[1]), (ws[0], ws[1]))

    for k, vv in enumerate(tri):
        wp, wpp = (x for x in range(3) if x != k)
        for side_slot, host in ((side1[vv], u1), (side2[vv], u2)):
            eid, end = poly.slot_table[(vv, side_slot)]
            old_map = poly.edges[eid].wings[end]
            other_outer = outer[vv][0] if outer[vv][1] == side_slot else outer[vv][1]
            w_region = old_map.index(other_outer)
            g_wing = {}
            for other in (wp, wpp):
                lo, hi = min(k, other), max(k, other)
                sl = slot_at(pair_edge[(lo, hi)], vv)
                third = 3 - k - other
                g_wing[third] = old_map.index(sl)
            # the wing along the triangle edge toward v[other] bounds
            # the S-region of the third index, and must point at the
            # rebuilt slot of that third sheet (slot third+1 at host)
            assign = {w_region: 0, g_wing[wp]: wpp + 1, g_wing[wpp]: wp + 1}
            reattach(vv, side_slot, (host, k + 1), assign)

    new_edges[e0_id] = Edge(((u1, 0), (u2, 0)), ((1, 2, 3), (1, 2, 3)))
    new_poly = Polyhedron([vv for vv in poly.vertices if vv != tri[2]], new_edges)

    g_set = set(g_ids)

    def translate(dart: Dart) -> Optional[Dart]:
        if dart[0] in g_set:
            return None
        return dart

    region_map, agreement = _correspond(s, new_poly, translate)
    destroyed = tuple(r for r in range(poly.region_count) if r not in region_map)
    gleam2 = {region_map[r]: s.gleam2[r] for r in region_map}
    orient = _transport_orientation(s, region_map, agreement)
    after = Shadow(new_poly, gleam2, orient, _transport_points(s, region_map))
    roles_after = {
        role: region_map[rid]
        for role, rid in roles_before.items()
        if rid in region_map
    }
    # The forward split at the rebuilt edge recreates the triangle with
    # tri[k] in seat k; its created-sheet sign is read on the triangle
    # edge opposite tri[0], running from the dropped vertex to tri[1].
    e_d = pair_edge[(1, 2)]
    w_d = next(w for w in (0, 1, 2) if poly.region_of(e_d, w) == d_rid)
    d_d = -1 if poly.edges[e_d].ends[0][0] == tri[1] else 1
    return MoveRecord(
        instance=m,
        before=s,
        after=after,
        region_map=region_map,
        agreement=agreement,
        destroyed=destroyed,
        created={},
        roles_before=roles_before,
        roles_after=roles_after,
        rebuilt_site=MP23Site(e0_id, 0),
        free_dart=(e_d, w_d, d_d),
    )


# --------------------------------------------------------------- 2->1


def _inverse_one_two(
    s: Shadow,
    m: MoveInstance,
    gleam_c2: Optional[Mapping[str, int]] = None,
) -> MoveRecord:
    poly = s.poly
    site = m.site
    v1 = site.vertex
    _require(v1 in set(poly.vertices), f"no vertex {v1}")
    a, b = site.germ
    _require(0 <= a < b <= 3, f"bad germ {site.germ}")
    r7 = poly.region_at_germ(v1, a, b)
    bigon = _bigon_data(poly, r7)
    _require(bigon is not None, f"region {r7} is not a two-edge bigon")
    f_e, g_e = sorted({bigon[0][0], bigon[1][0]})
    vs = {poly.edges[f_e].ends[0][0], poly.edges[f_e].ends[1][0]}
    _require(
        vs == {poly.edges[g_e].ends[0][0], poly.edges[g_e].ends[1][0]}
        and len(vs) == 2
        and v1 in vs,
        "bigon edges must join the site vertex to one other vertex",
    )
    v2 = next(x for x in vs if x != v1)
    inc2, c7 = _one_two_gleams(gleam_c2)
    _require(
        s.gleam2[r7] == c7,
        f"bigon carries gleam {s.gleam2[r7]}/2 instead of {c7}/2",
    )

    def slot_at(e: int, vv: int) -> int:
        for end in (0, 1):
            v_e, sl = poly.edges[e].ends[end]
            if v_e == vv and poly.slot_table[(vv, sl)] == (e, end):
                return sl
        raise AssertionError("edge end not found at vertex")

    sf1, sg1 = slot_at(f_e, v1), slot_at(g_e, v1)
    _require({sf1, sg1} == set(site.germ), "site germ must span the bigon slots")
    sf2, sg2 = slot_at(f_e, v2), slot_at(g_e, v2)
    outer1 = sorted(sl for sl in range(4) if sl not in (sf1, sg1))
    outer2 = sorted(sl for sl in range(4) if sl not in (sf2, sg2))

    match = None
    for swap1, swap2 in itertools.product((0, 1), repeat=2):
        sE1, sE2 = outer1[swap1], outer1[1 - swap1]
        sE3, sE4 = outer2[swap2], outer2[1 - swap2]
        if (
            poly.region_at_germ(v1, sE1, sf1) == poly.region_at_germ(v2, sE3, sf2)
            and poly.region_at_germ(v1, sE1, sg1)
            == poly.region_at_germ(v2, sE4, sg2)
            and poly.region_at_germ(v1, sE2, sf1)
            == poly.region_at_germ(v2, sE4, sf2)
            and poly.region_at_germ(v1, sE2, sg1)
            == poly.region_at_germ(v2, sE3, sg2)
        ):
            match = (sE1, sE2, sE3, sE4)
            break
    _require(match is not None, "corner regions do not pair across the bigon")
    sE1, sE2, sE3, sE4 = match

    roles_before = {
        "r7": r7,
        "r1": poly.region_at_germ(v1, sE1, sE2),
        "r3": poly.region_at_germ(v2, sE3, sE4),
        "r5": poly.region_at_germ(v1, sE1, sf1),
        "r2": poly.region_at_germ(v1, sE1, sg1),
        "r6": poly.region_at_germ(v1, sE2, sf1),
        "r4": poly.region_at_germ(v1, sE2, sg1),
    }

    new_edges = dict(poly.edges)
    del new_edges[f_e]
    del new_edges[g_e]

    def reattach(vv: int, old_slot: int, att, assign) -> None:
        eid, end = poly.slot_table[(vv, old_slot)]
        cur = new_edges[eid]
        es = list(cur.ends)
        ws = list(cur.wings)
        es[end] = att
        ws[end] = _wing_map_from(assign)
        new_edges[eid] = Edge((es[0], es[1]), (ws[0], ws[1]))

    def wing_of(vv: int, slot: int, toward: int) -> int:
        eid, end = poly.slot_table[(vv, slot)]
        return poly.edges[eid].wings[end].index(toward)

    u = v1
    reattach(
        v1,
        sE1,
        (u, 0),
        {
            wing_of(v1, sE1, sE2): 1,
            wing_of(v1, sE1, sf1): 2,
            wing_of(v1, sE1, sg1): 3,
        },
    )
    reattach(
        v1,
        sE2,
        (u, 1),
        {
            wing_of(v1, sE2, sE1): 0,
            wing_of(v1, sE2, sg1): 2,
            wing_of(v1, sE2, sf1): 3,
        },
    )
    reattach(
        v2,
        sE3,
        (u, 2),
        {
            wing_of(v2, sE3, sE4): 3,
            wing_of(v2, sE3, sf2): 0,
            wing_of(v2, sE3, sg2): 1,
        },
    )
    reattach(
        v2,
        sE4,
        (u, 3),
        {
            wing_of(v2, sE4, sE3): 2,
            wing_of(v2, sE4, sg2): 0,
            wing_of(v2, sE4, sf2): 1,
        },
    )
    new_poly = Polyhedron([vv for vv in poly.vertices if vv != v2], new_edges)

    dropped = {f_e, g_e}

    def translate(dart: Dart) -> Optional[Dart]:
        if dart[0] in dropped:
            return None
        return dart

    region_map, agreement = _correspond(s, new_poly, translate)
    destroyed = tuple(r for r in range(poly.region_count) if r not in region_map)
    gleam2 = {region_map[r]: s.gleam2[r] for r in region_map}
    for role, dec in inc2.items():
        gleam2[region_map[roles_before[role]]] -= dec
    orient = _transport_orientation(s, region_map, agreement)
    after = Shadow(new_poly, gleam2, orient, _transport_points(s, region_map))
    roles_after = {
        role: region_map[rid]
        for role, rid in roles_before.items()
        if rid in region_map
    }
    return MoveRecord(
        instance=m,
        before=s,
        after=after,
        region_map=region_map,
        agreement=agreement,
        destroyed=destroyed,
        created={},
        roles_before=roles_before,
        roles_after=roles_after,
        rebuilt_site=OneTwoSite(u, (0, 1)),
    )


# =====================================================================
# site enumeration


def lune_sites(s: Shadow) -> List[LuneSite]:
    out = []
    for e in sorted(s.poly.edges):
        for p in (0, 1, 2):
            for side in (0, 1):
                site = LuneSite(e, p, side)
                try:
                    _lune_surgery(s, site)
                except SiteMismatch:
                    continue
                out.append(site)
    return out


def mp23_sites(s: Shadow) -> List[MP23Site]:
    out = []
    for e in sorted(s.poly.edges):
        (va, _), (vb, _) = s.poly.edges[e].ends
        if va != vb:
            out.append(MP23Site(e, 0))
    return out


def one_two_sites(s: Shadow) -> List[OneTwoSite]:
    return [
        OneTwoSite(v, (x, y))
        for v in s.poly.vertices
        for x in range(4)
        for y in range(x + 1, 4)
    ]


def inverse_sites(
    s: Shadow, gleam_c2: Optional[Mapping[str, int]] = None
) -> List[MoveInstance]:
    """Pattern-matching inverse instances, canonically ordered."""
    out = []
    seen = set()
    for e in sorted(s.poly.edges):
        for w in (0, 1, 2):
            rid = s.poly.region_of(e, w)
            if rid in seen:
                continue
            seen.add(rid)
            for m in (
                MoveInstance(MoveKind.LUNE, LuneSite(e, w, 0), "inverse"),
                MoveInstance(MoveKind.MP23, MP23Site(e, w), "inverse"),
            ):
                try:
                    apply(s, m, classify=False)
                except (SiteMismatch, UnbranchableInverse, CalibrationError):
                    continue
                out.append(m)
    for site in one_two_sites(s):
        m = MoveInstance(MoveKind.ONE_TWO, site, "inverse")
        try:
            apply(s, m, classify=False, gleam_c2=gleam_c2)
        except (SiteMismatch, UnbranchableInverse, CalibrationError):
            continue
        out.append(m)
    return out


# =====================================================================
# blow-up branching


def branch_by_blowup(
    s: Shadow, orient: Mapping[int, int], max_steps: int = 50
) -> Tuple[List[Tuple[MoveInstance, int]], Shadow]:
    """Repair an arbitrary orientation into a branching by blow-ups.

    Uniformly-oriented edges are processed in id order; a loop edge is
    first split by a 1->2 move at a germ holding exactly one of its
    slots, then blown up as an ordinary edge by a 2->3 move.  Each new
    region takes the orientation repairing the most edges, ties broken
    toward +1.  Returns the (move, new-sheet sign) log and the
    branched shadow; raises StepBudgetExceeded past max_steps moves.
    """
    cur = s.with_orientation(None)
    o = dict(orient)
    log: List[Tuple[MoveInstance, int]] = []
    for _ in range(max_steps):
        bad = violating_edges(cur.poly, o)
        if not bad:
            return log, cur.with_orientation(o).check()
        e = bad[0]
        (va, sa), (vb, sb) = cur.poly.edges[e].ends
        if va == vb:
            germ = next(
                (x, y)
                for x in range(4)
                for y in range(x + 1, 4)
                if len({x, y} & {sa, sb}) == 1
            )
            m = MoveInstance(MoveKind.ONE_TWO, OneTwoSite(va, germ))
        else:
            m = MoveInstance(MoveKind.MP23, MP23Site(e, 0))
        rec = apply(cur, m, classify=False)
        base = {rec.region_map[rid]: o[rid] * rec.agreement[rid] for rid in o}
        (new_rid,) = rec.created.values()
        scored = []
        for sign in (1, -1):
            cand = dict(base)
            cand[new_rid] = sign
            scored.append(
                (len(violating_edges(rec.after.poly, cand)), -sign, cand)
            )
        scored.sort(key=lambda t: (t[0], t[1]))
        _, neg_sign, o = scored[0]
        log.append((m, -neg_sign))
        cur = rec.after
    bad = violating_edges(cur.poly, o)
    raise StepBudgetExceeded(
        f"{len(bad)} uniformly oriented edges remain after {max_steps} blow-ups"
    )
