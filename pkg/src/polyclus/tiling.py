"""Decorated polygons and tilings of marked surfaces.

A decorated polygon is a cyclic list of oriented sides with one angle
indicator per side (a segment from the side to a vertex) and one color
(parallel or crossing) per vertex.  Decorated polygons up to rotation are in
bijection with ST-tiles, and decorated tilings of oriented marked surfaces
(collections of such polygons glued along arcs, plus commutative arrows
between arcs) are in bijection with ST-compatible ordered quivers.

Conventions used throughout (fixed once, verified against the quiver side):

* sides are listed counterclockwise; vertex ``i`` sits between side ``i``
  and side ``i+1``;
* ``indicators[i] = t`` means the indicator of side ``i`` ends at vertex
  ``t``; the in-neighbors of side ``i`` are the sides strictly between
  ``i`` and ``t`` counterclockwise, inclusive of ``t`` (empty when
  ``t == i``), and every in-neighbor points an arrow at side ``i``;
* the color of an arrow ``src -> dst`` is ``1 + sum (1 + c(v))`` over the
  counterclockwise vertex arc from ``dst`` up to ``src`` (mod 2); the two
  boundary arcs between two sides always give opposite values because a
  polygon has an odd number of parallel angles, so the direction matters;
* a side whose arc orientation agrees with the counterclockwise boundary
  (``reversed=False``) shows the polygon its *filled* side; a reversed side
  shows the *empty* side.

The flip of a tiling at an interior arc is the geometric counterpart of
admissible quiver mutation.  It is implemented directly on polygon data
(chord surgery, angle-color bookkeeping, indicator re-derivation, and
commutative-arrow concatenation on the local exchange entries), without
calling `ordered.mutate_st`; the equality of the two routes is an invariant
checked by the test-suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    Inadmissible,
    InvalidDecoration,
    NotDigonConfiguration,
    NotSTCompatible,
    NotTwoTiles,
    PolyclusError,
)
from .numbers import EPS, ONE, SplitComplexInt, split_pos_neg
from .ordered import (
    EMPTY,
    FILLED,
    OrderedQuiver,
    STTile,
    SideOrder,
    _canonical_rotation,
    is_st_compatible,
)
from .quiver import ColoredQuiver
from .symalg import NCExpr, apply_sigma_tau, apply_tau, norm

Y = SplitComplexInt
ZERO = Y(0, 0)
COMM = ONE + EPS

PARALLEL, CROSSING = 0, 1
_COLOR_NAME = {PARALLEL: "parallel", CROSSING: "crossing"}
_COLOR_BIT = {"parallel": PARALLEL, "crossing": CROSSING}


# ---------------------------------------------------------------------------
# decorated polygons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoratedPolygon:
    """Cyclic side list with angle indicators and angle colors.

    ``sides[i] = (arc, reversed)``, ``angle_colors[i]`` colors the vertex
    between side ``i`` and side ``i+1``, and ``indicators[i]`` is the vertex
    at which the indicator of side ``i`` ends.
    """

    sides: tuple
    angle_colors: tuple
    indicators: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "sides", tuple((str(a), bool(r)) for a, r in self.sides)
        )
        object.__setattr__(self, "angle_colors", tuple(int(c) for c in self.angle_colors))
        object.__setattr__(self, "indicators", tuple(int(t) for t in self.indicators))
        n = len(self.sides)
        if n < 2:
            raise InvalidDecoration("a decorated polygon needs at least 2 sides")
        if len(self.angle_colors) != n or len(self.indicators) != n:
            raise InvalidDecoration("side/color/indicator lengths differ")
        if any(c not in (PARALLEL, CROSSING) for c in self.angle_colors):
            raise InvalidDecoration("angle colors must be 0 (parallel) or 1 (crossing)")
        if any(not 0 <= t < n for t in self.indicators):
            raise InvalidDecoration("indicator target out of range")
        if sum(1 for c in self.angle_colors if c == PARALLEL) % 2 != 1:
            raise InvalidDecoration(
                "admissibility requires an odd number of parallel angles"
            )
        for i in range(n):
            for j in range(i + 1, n):
                if self.points_at(j, i) == self.points_at(i, j):
                    raise InvalidDecoration(
                        f"indicators of sides {i} and {j} do not intersect"
                    )

    @property
    def n(self):
        return len(self.sides)

    def arc(self, i):
        return self.sides[i % self.n][0]

    def arcs(self):
        return tuple(a for a, _ in self.sides)

    def points_at(self, j, i):
        """True iff side ``j`` is an in-neighbor of side ``i`` (arrow j->i)."""
        n = self.n
        d = (j - i) % n
        return 0 < d <= (self.indicators[i] - i) % n

    def in_set(self, i):
        n = self.n
        return [(i + d) % n for d in range(1, ((self.indicators[i] - i) % n) + 1)]

    def arrow_color(self, src, dst):
        """Color of the arrow from side ``src`` to side ``dst``."""
        n = self.n
        dist = (src - dst) % n
        s = sum(1 + self.angle_colors[(dst + m) % n] for m in range(dist))
        return (s + 1) % 2

    def iter_arrows(self):
        """Yield (src_index, dst_index, color) for the side tournament."""
        for i in range(self.n):
            for j in self.in_set(i):
                yield (j, i, self.arrow_color(j, i))

    def pair_arrow(self, i, j):
        """The arrow between sides ``i`` and ``j`` as (src, dst, color)."""
        if self.points_at(j, i):
            return (j, i, self.arrow_color(j, i))
        return (i, j, self.arrow_color(i, j))

    def rotate(self, r):
        """The same polygon listed starting from side ``r``."""
        n = self.n
        sides = self.sides[r:] + self.sides[:r]
        colors = self.angle_colors[r:] + self.angle_colors[:r]
        indicators = tuple(
            (self.indicators[(k + r) % n] - r) % n for k in range(n)
        )
        return DecoratedPolygon(sides, colors, indicators)

    def to_json(self):
        return {
            "sides": [{"arc": a, "reversed": r} for a, r in self.sides],
            "angle_colors": [_COLOR_NAME[c] for c in self.angle_colors],
            "indicators": list(self.indicators),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            tuple((s["arc"], s["reversed"]) for s in data["sides"]),
            tuple(_COLOR_BIT[c] for c in data["angle_colors"]),
            tuple(data["indicators"]),
        )


def polygons_equal_up_to_rotation(p1: DecoratedPolygon, p2: DecoratedPolygon):
    if p1.n != p2.n:
        return False
    return any(p1.rotate(r) == p2 for r in range(p1.n))


# ---------------------------------------------------------------------------
# polygon <-> tile
# ---------------------------------------------------------------------------


def polygon_to_tile(p: DecoratedPolygon) -> STTile:
    """The ST-tile of a decorated polygon: clockwise cyclic order, the side
    tournament with its colors, and the fill each side shows the polygon."""
    arcs = p.arcs()
    if len(set(arcs)) != len(arcs):
        raise InvalidDecoration(
            "self-glued polygon (repeated arc) has no single ST-tile"
        )
    cycle = _canonical_rotation(tuple(reversed(arcs)))
    arrows = tuple(
        sorted((arcs[s], arcs[d], c) for s, d, c in p.iter_arrows())
    )
    sides = tuple(
        sorted((a, EMPTY if r else FILLED) for a, r in p.sides)
    )
    return STTile(frozenset(arcs), cycle, arrows, sides)


def tile_to_polygon(t: STTile) -> DecoratedPolygon:
    """The decorated polygon of an ST-tile (inverse of `polygon_to_tile`,
    up to rotation)."""
    ccw = (t.cycle[0],) + tuple(reversed(t.cycle[1:]))
    n = len(ccw)
    index = {a: i for i, a in enumerate(ccw)}
    arrows = {(s, d): c for s, d, c in t.arrows}
    fills = dict(t.sides)
    indicators = []
    for i, a in enumerate(ccw):
        ins = sorted((index[s] - i) % n for (s, d) in arrows if d == a)
        if ins != list(range(1, len(ins) + 1)):
            raise InvalidDecoration(
                f"in-neighbors of {a} are not consecutive in the cyclic order"
            )
        indicators.append((i + len(ins)) % n)
    colors = []
    for i in range(n):
        a, b = ccw[i], ccw[(i + 1) % n]
        if (b, a) in arrows:
            colors.append(arrows[(b, a)])
        elif (a, b) in arrows:
            colors.append((arrows[(a, b)] + 1) % 2)
        else:
            raise InvalidDecoration(f"no arrow between neighbors {a} and {b}")
    sides = tuple((a, fills[a] == EMPTY) for a in ccw)
    return DecoratedPolygon(sides, tuple(colors), tuple(indicators))


# ---------------------------------------------------------------------------
# side collapse and vertex blowup
# ---------------------------------------------------------------------------


def side_collapse(p: DecoratedPolygon, side) -> DecoratedPolygon:
    """Remove side ``side`` and identify its two endpoints.

    Indicators end at the image of their original endpoint; the merged angle
    is recolored (``c = c1 + c2 + 1``) so the result stays admissible."""
    n = p.n
    i = side % n
    if n < 3:
        raise PolyclusError("collapse needs at least 3 sides")
    sides, colors, indicators = [], [], []
    for k in range(n - 1):
        old = (i + 1 + k) % n
        sides.append(p.sides[old])
        if k < n - 2:
            colors.append(p.angle_colors[old])
        t = p.indicators[old]
        if t in ((i - 1) % n, i):
            indicators.append(n - 2)
        else:
            indicators.append((t - i - 1) % n)
    colors.append((p.angle_colors[(i - 1) % n] + p.angle_colors[i] + 1) % 2)
    return DecoratedPolygon(tuple(sides), tuple(colors), tuple(indicators))


def blowup_choices(p: DecoratedPolygon, vertex, arc=None, reversed_=False):
    """All blowups of ``vertex`` into a new side, as valid polygons.

    Returns a list of (slot, color_bit, polygon) triples, deterministically
    ordered; if ``n`` indicators end at the vertex there are ``n + 1`` slots
    for each of the two color choices."""
    import itertools

    n = p.n
    v = vertex % n
    new_arc = str(arc) if arc is not None else _fresh_arc_name(p)
    pointing = [j for j in range(n) if p.indicators[j] == v]
    old_color = p.angle_colors[v]

    def build(t_new, assign, c1):
        c2 = (old_color + c1 + 1) % 2
        sides = list(p.sides[: v + 1]) + [(new_arc, bool(reversed_))] + list(
            p.sides[v + 1 :]
        )
        colors = (
            list(p.angle_colors[:v]) + [c1, c2] + list(p.angle_colors[v + 1 :])
        )

        def new_vertex(t):
            return t if t < v else t + 1

        indicators = []
        for j in range(n + 1):
            if j == v + 1:
                indicators.append(t_new)
                continue
            old_j = j if j < v + 1 else j - 1
            t = p.indicators[old_j]
            if t == v:
                indicators.append(v if assign[old_j] == 0 else v + 1)
            else:
                indicators.append(new_vertex(t))
        return DecoratedPolygon(tuple(sides), tuple(colors), tuple(indicators))

    results = []
    seen = set()
    for c1 in (0, 1):
        found = []
        for t_new in range(n + 1):
            for bits in itertools.product((0, 1), repeat=len(pointing)):
                assign = dict(zip(pointing, bits))
                try:
                    q = build(t_new, assign, c1)
                except InvalidDecoration:
                    continue
                if side_collapse(q, v + 1) != p.rotate((v + 1) % n):
                    continue
                key = (c1, q)
                if key in seen:
                    continue
                seen.add(key)
                found.append((t_new, bits, q))
        for slot, (t_new, bits, q) in enumerate(sorted(found, key=lambda x: (x[0], x[1]))):
            results.append((slot, c1, q))
    return results


def vertex_blowup(p: DecoratedPolygon, vertex, choice, arc=None, reversed_=False):
    """Insert a new side at ``vertex``; ``choice = (slot, color_bit)``.

    ``slot`` selects among the valid indicator placements for the new side
    (``0..n`` when ``n`` indicators end at the vertex), ``color_bit`` the
    color of the first of the two new angles (a crossing angle blows up into
    a matching pair, a parallel angle into distinct colors)."""
    slot, color_bit = choice
    options = [
        q
        for s, c1, q in blowup_choices(p, vertex, arc=arc, reversed_=reversed_)
        if c1 == color_bit and s == slot
    ]
    if not options:
        raise PolyclusError(f"invalid blowup choice {choice!r}")
    return options[0]


def standard_polygon(arcs) -> DecoratedPolygon:
    """The standard decorated polygon (odd side count): all angles parallel
    and the indicator of side ``i`` spanning the (n-1)/2 following vertices,
    so that any two indicators intersect.  Its tile is a parallel cycle on
    the neighbors plus crossing chords."""
    arcs = tuple(str(a) for a in arcs)
    n = len(arcs)
    if n % 2 == 0:
        raise InvalidDecoration(
            "standard polygons have an odd number of sides"
        )
    half = (n - 1) // 2
    return DecoratedPolygon(
        tuple((a, False) for a in arcs),
        (PARALLEL,) * n,
        tuple((i + half) % n for i in range(n)),
    )


def _fresh_arc_name(p):
    used = set(p.arcs())
    k = 0
    while f"s{k}" in used:
        k += 1
    return f"s{k}"


# ---------------------------------------------------------------------------
# decorated tilings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoratedTiling:
    """A tiling of an oriented marked surface by decorated polygons.

    ``arcs`` lists arc ids (fixing node order for the quiver side); each arc
    appears on one polygon side (boundary arc) or two (interior arc), with
    opposite orientation flags.  ``comm_arrows`` are (src, dst, mult)
    commutative arrows between arcs."""

    arcs: tuple
    polygons: tuple
    comm_arrows: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(str(a) for a in self.arcs))
        object.__setattr__(self, "polygons", tuple(self.polygons))
        object.__setattr__(
            self,
            "comm_arrows",
            tuple((str(s), str(d), int(m)) for s, d, m in self.comm_arrows),
        )
        if len(set(self.arcs)) != len(self.arcs):
            raise InvalidDecoration("duplicate arc ids")
        used = {}
        for p_idx, p in enumerate(self.polygons):
            for i, (a, rev) in enumerate(p.sides):
                used.setdefault(a, []).append((p_idx, i, rev))
        if set(used) != set(self.arcs):
            raise InvalidDecoration("arc list does not match the arcs in use")
        for a, incs in used.items():
            if len(incs) > 2:
                raise InvalidDecoration(f"arc {a} borders more than two sides")
            if len(incs) == 2 and incs[0][2] == incs[1][2]:
                raise InvalidDecoration(
                    f"arc {a} is traversed twice in the same direction"
                )
        arcset = set(self.arcs)
        for s, d, m in self.comm_arrows:
            if s not in arcset or d not in arcset or s == d or m < 1:
                raise InvalidDecoration(f"bad commutative arrow {(s, d, m)}")

    # -- queries -------------------------------------------------------------

    def incidences(self, arc):
        out = []
        for p_idx, p in enumerate(self.polygons):
            for i, (a, rev) in enumerate(p.sides):
                if a == arc:
                    out.append((p_idx, i, rev))
        return out

    # -- surface reconstruction ---------------------------------------------

    def _corner_gluings(self):
        """Polygon corners as gluings of ribbon corners (arc, end, fill)."""
        gluings = []
        for p in self.polygons:
            n = p.n
            for i in range(n):
                a_i, r_i = p.sides[i]
                a_j, r_j = p.sides[(i + 1) % n]
                c_i = (a_i, 0 if r_i else 1, EMPTY if r_i else FILLED)
                c_j = (a_j, 1 if r_j else 0, EMPTY if r_j else FILLED)
                gluings.append((c_i, c_j))
        return gluings

    def marked_points(self):
        """Equivalence classes of arc ends (arc, end) as sorted tuples."""
        parent = {}

        def find(x):
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a in self.arcs:
            for e in (0, 1):
                find((a, e))
        for (a1, e1, _f1), (a2, e2, _f2) in self._corner_gluings():
            r1, r2 = find((a1, e1)), find((a2, e2))
            if r1 != r2:
                parent[r2] = r1
        classes = {}
        for x in list(parent):
            classes.setdefault(find(x), []).append(x)
        return sorted(tuple(sorted(v)) for v in classes.values())

    def surface(self):
        """Genus, boundary components (with marked-point counts), punctures."""
        glued = {}
        for c1, c2 in self._corner_gluings():
            if c1 in glued or c2 in glued:
                raise InvalidDecoration("inconsistent corner gluing")
            glued[c1] = c2
            glued[c2] = c1
        edge_list = []
        incident = {}

        def link(x, y, kind):
            eid = len(edge_list)
            edge_list.append((x, y, kind))
            incident.setdefault(x, []).append(eid)
            incident.setdefault(y, []).append(eid)

        used_fills = {(a, f) for (a, _e, f) in glued}
        for a in self.arcs:
            for e in (0, 1):
                link((a, e, 0), (a, e, 1), "cross")
            for f in (EMPTY, FILLED):
                if (a, f) not in used_fills:
                    link((a, 0, f), (a, 1, f), "free")
        for c1, c2 in self._corner_gluings():
            link(c1, c2, "glue")
        for node, eids in incident.items():
            if len(eids) != 2:
                raise InvalidDecoration(f"ribbon corner {node} has degree {len(eids)}")
        # the graph is 2-regular (possibly with parallel edges); walk its
        # cycles edge by edge
        used = set()
        cycles = []
        for e0 in range(len(edge_list)):
            if e0 in used:
                continue
            cycle_nodes, cycle_kinds = [], []
            eid, node = e0, edge_list[e0][0]
            while eid not in used:
                used.add(eid)
                cycle_kinds.append(edge_list[eid][2])
                x, y, _k = edge_list[eid]
                node = y if node == x else x
                cycle_nodes.append(node)
                first, second = incident[node]
                eid = second if eid == first else first
            cycles.append((cycle_nodes, cycle_kinds))
        points = self.marked_points()
        point_of = {}
        for idx, cls in enumerate(points):
            for end in cls:
                point_of[end] = idx
        boundary_cycles = [c for c in cycles if "free" in c[1]]
        boundary_points = set()
        for nodes, kinds in boundary_cycles:
            for a, e, _f in nodes:
                boundary_points.add(point_of[(a, e)])
        V, E, F = len(points), len(self.arcs), len(self.polygons)
        b = len(boundary_cycles)
        chi = V - E + F
        g2 = 2 - b - chi
        if g2 < 0 or g2 % 2:
            raise InvalidDecoration("gluing data is not an oriented surface")
        boundaries = sorted(
            (kinds.count("free") for _nodes, kinds in boundary_cycles), reverse=True
        )
        return {
            "genus": g2 // 2,
            "boundaries": [{"marked": m} for m in boundaries],
            "punctures": V - len(boundary_points),
        }

    # -- serialization --------------------------------------------------------

    def to_json(self):
        points = self.marked_points()
        label = {}
        for idx, cls in enumerate(points):
            for end in cls:
                label[end] = f"p{idx}"
        return {
            "surface": self.surface(),
            "arcs": [
                {"id": a, "ends": [label[(a, 0)], label[(a, 1)]]} for a in self.arcs
            ],
            "polygons": [p.to_json() for p in self.polygons],
            "comm_arrows": [
                {"src": s, "dst": d, "mult": m} for s, d, m in self.comm_arrows
            ],
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            tuple(a["id"] for a in data["arcs"]),
            tuple(DecoratedPolygon.from_json(p) for p in data["polygons"]),
            tuple((c["src"], c["dst"], c["mult"]) for c in data.get("comm_arrows", ())),
        )


def dumps(t: DecoratedTiling) -> str:
    return json.dumps(t.to_json(), indent=2, sort_keys=True)


def loads(text: str) -> DecoratedTiling:
    return DecoratedTiling.from_json(json.loads(text))


def tilings_equivalent(t1: DecoratedTiling, t2: DecoratedTiling) -> bool:
    """Equality up to polygon order/rotation and arc/comm list order."""
    if set(t1.arcs) != set(t2.arcs):
        return False
    if sorted(t1.comm_arrows) != sorted(t2.comm_arrows):
        return False
    if len(t1.polygons) != len(t2.polygons):
        return False
    remaining = list(t2.polygons)
    for p in t1.polygons:
        for q in remaining:
            if polygons_equal_up_to_rotation(p, q):
                remaining.remove(q)
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# tiling <-> ordered quiver
# ---------------------------------------------------------------------------


def _polygon_side_orders(p: DecoratedPolygon):
    """Per-side (arc, fill, SideOrder) for one polygon."""
    n = p.n
    out = []
    for i in range(n):
        a, rev = p.sides[i]
        dist = (p.indicators[i] - i) % n
        ins = tuple(p.arc(p.indicators[i] - m) for m in range(dist))
        outs = tuple(p.arc(i - 1 - m) for m in range(n - 1 - dist))
        out.append((a, EMPTY if rev else FILLED, SideOrder(ins + outs, len(ins))))
    return out


def tiling_to_quiver(T: DecoratedTiling) -> OrderedQuiver:
    order = {a: [SideOrder(), SideOrder()] for a in T.arcs}
    arrows = []
    for p in T.polygons:
        if len(set(p.arcs())) != len(p.arcs()):
            raise NotSTCompatible(
                "self-glued polygons have no ordered-quiver counterpart"
            )
        for s, d, c in p.iter_arrows():
            arrows.append((p.arc(s), p.arc(d), _COLOR_NAME[c], 1))
        for a, fill, so in _polygon_side_orders(p):
            order[a][fill] = so
    for s, d, m in T.comm_arrows:
        arrows.append((s, d, "parallel", m))
        arrows.append((s, d, "crossing", m))
    try:
        quiver = ColoredQuiver.from_arrows(
            [(a,) for a in T.arcs], arrows, allow_mixed_two_cycles=True
        )
        q = OrderedQuiver(quiver, {a: tuple(sos) for a, sos in order.items()})
    except PolyclusError as exc:
        raise NotSTCompatible(str(exc)) from exc
    ok, issues = is_st_compatible(q)
    if not ok:
        raise NotSTCompatible(f"tiling does not give an ST-compatible quiver: {issues}")
    return q


def quiver_to_tiling(Q: OrderedQuiver) -> DecoratedTiling:
    ids = Q.quiver.ids()
    for k in ids:
        node = Q.quiver.node(k)
        if not node.big or node.frozen:
            raise NotSTCompatible(
                f"node {k} is small or frozen; tilings cover plain big nodes only"
            )
    ok, issues = is_st_compatible(Q)
    if not ok:
        raise NotSTCompatible(f"quiver is not ST-compatible: {issues}")
    for k in ids:
        s0, s1 = Q.order[k]
        if not s0.seq and not s1.seq:
            raise NotSTCompatible(f"node {k} lies in no tile")
    # Rebuild each tile's arrow set from the side orders of its members
    # (two nodes can share both their tiles, in which case the quiver holds
    # one arrow in each direction and a global lookup cannot tell which
    # arrow belongs to which tile).
    seen = set()
    tiles = []
    for k in ids:
        for f in (EMPTY, FILLED):
            so = Q.order[k][f]
            if not so.seq:
                continue
            cycle = _canonical_rotation(so.ins + (k,) + so.outs)
            if cycle in seen:
                continue
            seen.add(cycle)
            nodes = frozenset(cycle)
            arrows = {}
            sides = []
            for m in cycle:
                matches = [
                    g
                    for g in (EMPTY, FILLED)
                    if Q.order[m][g].seq
                    and _canonical_rotation(
                        Q.order[m][g].ins + (m,) + Q.order[m][g].outs
                    )
                    == cycle
                ]
                if len(matches) != 1:
                    raise NotSTCompatible(
                        f"node {m} does not border tile {cycle} exactly once"
                    )
                g = matches[0]
                sides.append((m, g))
                som = Q.order[m][g]
                for i in som.ins:
                    arrows[(i, m)] = Q.arrow_color(i, m)
                for j in som.outs:
                    arrows[(m, j)] = Q.arrow_color(m, j)
            tiles.append(
                STTile(
                    nodes,
                    cycle,
                    tuple(sorted((s, d, c) for (s, d), c in arrows.items())),
                    tuple(sorted(sides)),
                )
            )
    polygons = tuple(tile_to_polygon(t) for t in tiles)
    tile_entries = {}
    for t in tiles:
        for s, d, c in t.arrows:
            w = ONE if c == PARALLEL else EPS
            tile_entries[(s, d)] = tile_entries.get((s, d), ZERO) + w
            tile_entries[(d, s)] = tile_entries.get((d, s), ZERO) - w
    comms = []
    for ii, i in enumerate(ids):
        for j in ids[ii + 1 :]:
            residual = Q.quiver.entry(i, j) - tile_entries.get((i, j), ZERO)
            if residual.re != residual.im:
                raise NotSTCompatible(
                    f"entry between {i} and {j} is not tiles plus commutative pairs"
                )
            m = residual.re
            if m > 0:
                comms.append((i, j, m))
            elif m < 0:
                comms.append((j, i, -m))
    return DecoratedTiling(tuple(ids), polygons, tuple(comms))


# ---------------------------------------------------------------------------
# flip
# ---------------------------------------------------------------------------


def _local_entries(T, scope, skip=(), with_comm=True):
    """Exchange-matrix entries restricted to the arcs in ``scope``."""
    entries = {}

    def add(i, j, c):
        if i in scope and j in scope:
            entries[(i, j)] = entries.get((i, j), ZERO) + c

    for p_idx, p in enumerate(T.polygons):
        if p_idx in skip:
            continue
        arcs = p.arcs()
        if len(set(arcs)) != len(arcs):
            if any(a in scope for a in arcs):
                raise Inadmissible(
                    "flip neighborhood touches a self-glued polygon; "
                    "use digon_flip",
                    details={"kind": "self-glued", "polygon": p_idx},
                )
            continue
        for s, d, c in p.iter_arrows():
            w = ONE if c == PARALLEL else EPS
            add(arcs[s], arcs[d], w)
            add(arcs[d], arcs[s], -w)
    if with_comm:
        for s, d, m in T.comm_arrows:
            add(s, d, COMM * Y(m, 0))
            add(d, s, -(COMM * Y(m, 0)))
    return entries


def _split_comm(c):
    """Write an entry as (tournament part, commutative multiplicity) by
    cancelling parallel/crossing pairs, as pruning does."""
    a, b = c.re, c.im
    if a * b > 0:
        sign = 1 if a > 0 else -1
        m = sign * min(abs(a), abs(b))
        return c - COMM * Y(m, 0), m
    return c, 0


def flip(T: DecoratedTiling, arc) -> DecoratedTiling:
    """Flip the tiling at an interior arc (steps: replace the indicators of
    the arc by a chord, rotate it clockwise, re-aim indicators, merge and
    split angle colors, and recompute commutative arrows)."""
    arc = str(arc)
    if arc not in set(T.arcs):
        raise PolyclusError(f"unknown arc {arc}")
    incs = T.incidences(arc)
    if len(incs) < 2:
        raise NotTwoTiles(
            f"arc {arc} is a boundary arc", details={"arc": arc}
        )
    if incs[0][0] == incs[1][0]:
        raise NotTwoTiles(
            f"arc {arc} is glued to itself; use digon_flip",
            details={"arc": arc},
        )
    (pf_idx, i_f, _), (pe_idx, i_e, _) = sorted(
        incs, key=lambda inc: inc[2]
    )  # filled-facing polygon first (reversed=False)
    P1 = T.polygons[pf_idx].rotate(i_f)
    P2 = T.polygons[pe_idx].rotate(i_e)
    n1, n2 = P1.n, P2.n
    N = n1 + n2 - 2

    # union boundary: vertex 0 is the forward endpoint of the arc in P1
    # ("u"), vertex n1-1 the backward one ("w"); side k spans vertex k-1 -> k.
    usides = list(P1.sides[1:]) + list(P2.sides[1:])
    if len({a for a, _ in usides}) != N:
        raise Inadmissible(
            "flip would glue a polygon to itself; use digon_flip",
            details={"kind": "self-glued", "arc": arc},
        )
    ucolors = [0] * N
    ucolors[0] = (P1.angle_colors[0] + P2.angle_colors[n2 - 1]) % 2
    for m in range(1, n1 - 1):
        ucolors[m] = P1.angle_colors[m]
    ucolors[n1 - 1] = (P1.angle_colors[n1 - 1] + P2.angle_colors[0]) % 2
    for m in range(1, n2 - 1):
        ucolors[n1 - 1 + m] = P2.angle_colors[m]
    t1 = P1.indicators[0]
    t2 = (n1 - 1 + P2.indicators[0]) % N
    if t1 == t2:
        raise Inadmissible(
            "chord endpoints coincide; the flip has no polygonal counterpart",
            details={"kind": "degenerate-chord", "arc": arc},
        )

    def region(start, stop):
        """1-based union side indices spanning vertices start..stop CCW."""
        count = (stop - start) % N
        return [(start + m) % N + 1 for m in range(count)]

    # Pa runs t1 -> t2 and faces the empty side of the chord, Pb the rest.
    # Union vertices interior to each run keep their colors; the colors of
    # the two chord-endpoint vertices are recovered below from the mutated
    # arrows (a vertex color equals the color of the arrow between its two
    # sides, target first).
    pa_ids = region(t1, t2)
    pb_ids = region(t2, t1)
    pa_sides = [(arc, True)] + [usides[k - 1] for k in pa_ids]
    pb_sides = [(arc, False)] + [usides[k - 1] for k in pb_ids]
    pa_mid = [ucolors[k % N] for k in pa_ids[:-1]]
    pb_mid = [ucolors[k % N] for k in pb_ids[:-1]]

    pa_arcs = [arc] + [usides[k - 1][0] for k in pa_ids]
    pb_arcs = [arc] + [usides[k - 1][0] for k in pb_ids]

    # local exchange-matrix mutation at the arc
    scope = set(P1.arcs()) | set(P2.arcs())
    scope |= {s for s, d, m in T.comm_arrows if d == arc}
    scope |= {d for s, d, m in T.comm_arrows if s == arc}
    entries = _local_entries(T, scope)
    external = _local_entries(T, scope, skip={pf_idx, pe_idx}, with_comm=False)
    mutated = dict(entries)
    for i in scope:
        cik = entries.get((i, arc))
        if i == arc or not cik:
            continue
        for j in scope:
            ckj = entries.get((arc, j))
            if j in (arc, i) or not ckj:
                continue
            ip, ineg = split_pos_neg(cik)
            jp, jneg = split_pos_neg(ckj)
            delta = ip * jp - ineg * jneg
            if delta:
                mutated[(i, j)] = mutated.get((i, j), ZERO) + delta
    for (i, j) in list(mutated):
        if arc in (i, j):
            mutated[(i, j)] = -entries.get((i, j), ZERO)

    pa_set, pb_set = set(pa_arcs), set(pb_arcs)
    new_arrows = {}
    new_comms = [
        c for c in T.comm_arrows if not (c[0] in scope and c[1] in scope)
    ]
    for i in scope:
        for j in scope:
            if i >= j:
                continue
            rho = mutated.get((i, j), ZERO) - external.get((i, j), ZERO)
            tpart, m = _split_comm(rho)
            mates = ({i, j} <= pa_set) or ({i, j} <= pb_set)
            if mates:
                if tpart == ONE:
                    new_arrows[(i, j)] = PARALLEL
                elif tpart == -ONE:
                    new_arrows[(j, i)] = PARALLEL
                elif tpart == EPS:
                    new_arrows[(i, j)] = CROSSING
                elif tpart == -EPS:
                    new_arrows[(j, i)] = CROSSING
                else:
                    raise Inadmissible(
                        f"mutation leaves no single arrow between {i} and {j}",
                        details={"kind": "not-tournament", "pair": (i, j)},
                    )
            elif tpart != ZERO:
                raise Inadmissible(
                    f"mutation creates a non-commutative entry between "
                    f"{i} and {j} across polygons",
                    details={"kind": "cross-polygon", "pair": (i, j)},
                )
            if m > 0:
                new_comms.append((i, j, int(m)))
            elif m < 0:
                new_comms.append((j, i, int(-m)))

    def rebuild(sides, mid_colors, arcs_ccw):
        n = len(arcs_ccw)
        index = {a: i for i, a in enumerate(arcs_ccw)}

        def adjacent_color(src_arc, dst_arc):
            """Color of the vertex between two neighboring sides: the color
            of the arrow target-to-source, flipped if it runs the other way."""
            if (src_arc, dst_arc) in new_arrows:
                return new_arrows[(src_arc, dst_arc)]
            return (new_arrows[(dst_arc, src_arc)] + 1) % 2

        # vertex 0 sits between the chord (side 0) and side 1; the last
        # vertex between the final side and the chord
        colors = (
            [adjacent_color(arcs_ccw[1], arc)]
            + list(mid_colors)
            + [adjacent_color(arc, arcs_ccw[-1])]
        )
        indicators = []
        for i, a in enumerate(arcs_ccw):
            ins = sorted(
                (index[s] - i) % n
                for (s, d) in new_arrows
                if d == a and s in index
            )
            if ins != list(range(1, len(ins) + 1)):
                raise Inadmissible(
                    f"new in-neighbors of {a} are not consecutive",
                    details={"kind": "local-transitivity", "arc": a},
                )
            indicators.append((i + len(ins)) % n)
        try:
            poly = DecoratedPolygon(tuple(sides), tuple(colors), tuple(indicators))
        except InvalidDecoration as exc:
            raise Inadmissible(
                f"flip produces an invalid decoration: {exc}",
                details={"kind": "decoration"},
            ) from exc
        got = {
            (arcs_ccw[s], arcs_ccw[d], c) for s, d, c in poly.iter_arrows()
        }
        want = {
            (s, d, c)
            for (s, d), c in new_arrows.items()
            if s in index and d in index
        }
        if got != want:
            raise Inadmissible(
                "flip surgery disagrees with the mutated exchange entries",
                details={"kind": "mismatch", "got": sorted(got), "want": sorted(want)},
            )
        return poly

    pa = rebuild(pa_sides, pa_mid, pa_arcs)
    pb = rebuild(pb_sides, pb_mid, pb_arcs)
    polygons = list(T.polygons)
    polygons[pf_idx] = pa
    polygons[pe_idx] = pb
    return DecoratedTiling(T.arcs, tuple(polygons), tuple(new_comms))


# ---------------------------------------------------------------------------
# angle skeleton, canonical labels, transition maps
# ---------------------------------------------------------------------------

_WEIGHT = {"side": 1, "crossing": 1, "parallel": 0}


@dataclass(frozen=True)
class SkeletonEdge:
    """Edge of the angle skeleton.  Side edges are oriented tail->head along
    the arc; angle edges connect neighboring arc-ends at a marked point."""

    kind: str
    ends: tuple
    arc: str = None
    polygon: int = None
    index: int = None

    @property
    def weight(self):
        return _WEIGHT[self.kind]


@dataclass(frozen=True)
class SkeletonStep:
    edge: SkeletonEdge
    forward: bool = True

    @property
    def start(self):
        return self.edge.ends[0 if self.forward else 1]

    @property
    def end(self):
        return self.edge.ends[1 if self.forward else 0]

    def reverse(self):
        return SkeletonStep(self.edge, not self.forward)


@dataclass(frozen=True)
class SkeletonPath:
    steps: tuple
    base: tuple = None  # start vertex, required for empty paths

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for s, t in zip(self.steps, self.steps[1:]):
            if s.end != t.start:
                raise PolyclusError("skeleton path steps do not chain")
        if self.steps and self.base is not None and self.base != self.steps[0].start:
            raise PolyclusError("path base does not match the first step")

    @property
    def start(self):
        return self.steps[0].start if self.steps else self.base

    @property
    def end(self):
        return self.steps[-1].end if self.steps else self.base

    def reverse(self):
        return SkeletonPath(
            tuple(s.reverse() for s in reversed(self.steps)), base=self.end
        )

    def concat(self, other):
        if self.end is not None and other.start is not None and self.end != other.start:
            raise PolyclusError("paths do not concatenate")
        return SkeletonPath(self.steps + other.steps, base=self.start)

    def __mul__(self, other):
        return self.concat(other)


def parity(path: SkeletonPath) -> int:
    """Sum of edge lengths mod 2 (sides and crossing angles count 1)."""
    return sum(s.edge.weight for s in path.steps) % 2


def canonical_label(path: SkeletonPath) -> NCExpr:
    """L(gamma): fold letters with L(gamma*e) = L(gamma) st^{l(gamma)}(L(e));
    a side along its arc reads st(A), against it tau(A), angles read 1."""
    label = NCExpr.scalar(1)
    ell = 0
    for step in path.steps:
        e = step.edge
        if e.kind == "side":
            letter = (
                NCExpr.gen(e.arc, 1, 1) if step.forward else NCExpr.gen(e.arc, 0, 1)
            )
            if ell % 2:
                letter = apply_sigma_tau(letter)
            label = label * letter
        ell += e.weight
    return label


def transition(path: SkeletonPath, x: NCExpr) -> NCExpr:
    """m_gamma(x) = (1/N(L)) st^{l}(tau(L) x st(L)) with L = L(gamma)."""
    L = canonical_label(path)
    expr = apply_tau(L) * x * apply_sigma_tau(L)
    if parity(path):
        expr = apply_sigma_tau(expr)
    return norm(L).inverse() * expr


class AngleSkeleton:
    """Vertices (arc, end) with one side edge per polygon incidence and one
    angle edge per polygon corner."""

    def __init__(self, tiling: DecoratedTiling):
        self.tiling = tiling
        self._side = {}
        self._angle = {}
        edges = []
        for p_idx, p in enumerate(tiling.polygons):
            n = p.n
            for i in range(n):
                a, rev = p.sides[i]
                e = SkeletonEdge("side", ((a, 0), (a, 1)), a, p_idx, i)
                self._side[(p_idx, i)] = e
                edges.append(e)
            for i in range(n):
                a_i, r_i = p.sides[i]
                a_j, r_j = p.sides[(i + 1) % n]
                ends = ((a_i, 0 if r_i else 1), (a_j, 1 if r_j else 0))
                kind = _COLOR_NAME[p.angle_colors[i]]
                e = SkeletonEdge(kind, ends, None, p_idx, i)
                self._angle[(p_idx, i)] = e
                edges.append(e)
        self.edges = tuple(edges)
        self.vertices = frozenset(
            (a, e) for a in tiling.arcs for e in (0, 1)
        )

    def side_edge(self, polygon, index):
        return self._side[(polygon, index % self.tiling.polygons[polygon].n)]

    def angle_edge(self, polygon, index):
        return self._angle[(polygon, index % self.tiling.polygons[polygon].n)]

    def polygon_loop(self, polygon, start=None, clockwise=True) -> SkeletonPath:
        """The boundary loop of a polygon, rotated to begin at ``start``."""
        p = self.tiling.polygons[polygon]
        steps = []
        for i in range(p.n):
            _a, rev = p.sides[i]
            steps.append(SkeletonStep(self.side_edge(polygon, i), not rev))
            steps.append(SkeletonStep(self.angle_edge(polygon, i), True))
        if clockwise:
            steps = [s.reverse() for s in reversed(steps)]
        if start is not None:
            for k, s in enumerate(steps):
                if s.start == start:
                    steps = steps[k:] + steps[:k]
                    break
            else:
                raise PolyclusError(f"vertex {start} is not on polygon {polygon}")
        return SkeletonPath(tuple(steps))


def angle_skeleton(T: DecoratedTiling) -> AngleSkeleton:
    return AngleSkeleton(T)


def canonical_angle(skel: AngleSkeleton, vertex, polygon) -> NCExpr:
    """<v>: canonical label of the clockwise loop around a polygon from v."""
    return canonical_label(skel.polygon_loop(polygon, start=vertex, clockwise=True))


def monodromy(skel: AngleSkeleton, vertex, polygon, x: NCExpr) -> NCExpr:
    """Transition along the clockwise polygon loop based at ``vertex``."""
    return transition(skel.polygon_loop(polygon, start=vertex, clockwise=True), x)


# ---------------------------------------------------------------------------
# once-punctured digon configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DigonFlipResult:
    tiling: DecoratedTiling
    arc: str
    rule: NCExpr


def punctured_digon(a="A", b="B", x="X", y="Y") -> DecoratedTiling:
    """Configuration (a): two triangles sharing the arcs ``x`` (puncture to
    the top marked point) and ``y`` (bottom marked point to the puncture),
    with boundary arcs ``a`` (all-parallel triangle) and ``b``."""
    left = DecoratedPolygon(
        ((x, False), (a, False), (y, False)),
        (PARALLEL, PARALLEL, PARALLEL),
        (1, 2, 0),
    )
    right = DecoratedPolygon(
        ((b, False), (x, True), (y, True)),
        (PARALLEL, CROSSING, CROSSING),
        (1, 2, 0),
    )
    return DecoratedTiling((a, b, x, y), (left, right))


def _digon_folded(a, b, z, f, kind) -> DecoratedTiling:
    """Configurations (b) and (c): outer triangle (a, b, loop z) plus a
    self-folded triangle (z, f, f)."""
    outer = DecoratedPolygon(
        ((b, False), (a, False), (z, False)),
        (PARALLEL, PARALLEL, PARALLEL),
        (1, 2, 0),
    )
    colors = (PARALLEL, CROSSING, CROSSING) if kind == "b" else (
        CROSSING,
        CROSSING,
        PARALLEL,
    )
    folded = DecoratedPolygon(
        ((z, True), (f, False), (f, True)), colors, (1, 2, 0)
    )
    return DecoratedTiling((a, b, z, f), (outer, folded))


def _classify_digon(T: DecoratedTiling):
    """Return ("a", a, b, x, y) or ("b"|"c", a, b, z, f), else None."""
    if len(T.polygons) != 2 or T.comm_arrows:
        return None
    p0, p1 = T.polygons
    folded = [p for p in (p0, p1) if len(set(p.arcs())) < p.n]
    if not folded:
        if p0.n != 3 or p1.n != 3:
            return None
        shared = set(p0.arcs()) & set(p1.arcs())
        if len(shared) != 2:
            return None
        lefts = [p for p in (p0, p1) if set(p.angle_colors) == {PARALLEL}]
        if len(lefts) != 1:
            return None
        left = lefts[0]
        right = p0 if left is p1 else p1
        (a_role,) = set(left.arcs()) - shared
        (b_role,) = set(right.arcs()) - shared
        arcs = left.arcs()
        idx = {arc: i for i, arc in enumerate(arcs)}
        s1, s2 = sorted(shared)
        src, dst, _c = left.pair_arrow(idx[s1], idx[s2])
        x_role, y_role = arcs[src], arcs[dst]
        if tilings_equivalent(T, punctured_digon(a_role, b_role, x_role, y_role)):
            return ("a", a_role, b_role, x_role, y_role)
        return None
    if len(folded) != 1:
        return None
    fold = folded[0]
    outer = p0 if fold is p1 else p1
    if fold.n != 3 or outer.n != 3:
        return None
    arcs = fold.arcs()
    rep = [a for a in set(arcs) if arcs.count(a) == 2]
    if len(rep) != 1:
        return None
    f_role = rep[0]
    (z_role,) = set(arcs) - {f_role}
    if z_role not in outer.arcs():
        return None
    others = [a for a in outer.arcs() if a != z_role]
    if len(others) != 2:
        return None
    for a_role in others:
        b_role = others[0] if a_role == others[1] else others[1]
        for kind in ("b", "c"):
            if tilings_equivalent(T, _digon_folded(a_role, b_role, z_role, f_role, kind)):
                return (kind, a_role, b_role, z_role, f_role)
    return None


def digon_flip(T: DecoratedTiling, arc) -> DigonFlipResult:
    """Flip inside a once-punctured digon configuration.

    (a) --flip x--> (b): the new loop variable is
    Z = sigma(A) X^{-1} tau(Y) + Y sigma(X)^{-1} B.
    (b) --flip folded--> (c): W = Y^{-1} (Z + tau(Z)).
    (c) --flip folded--> (b): the configuration is weaving/switching
    equivalent to (b) with folded variable tau(W), so the same rule reads
    tau(W)^{-1} (Z + tau(Z)), which recovers Y."""
    arc = str(arc)
    info = _classify_digon(T)
    if info is None:
        raise NotDigonConfiguration(
            "tiling is not a recognized once-punctured digon configuration"
        )
    kind = info[0]
    if kind == "a":
        _, a, b, x, y = info
        if arc != x:
            raise NotDigonConfiguration(
                f"only the arc {x} of this configuration supports the digon flip"
            )
        rule = (
            NCExpr.gen(a, sigma=1)
            * NCExpr.gen(x, inverted=True)
            * NCExpr.gen(y, tau=1)
            + NCExpr.gen(y)
            * NCExpr.gen(x, sigma=1, inverted=True)
            * NCExpr.gen(b)
        )
        return DigonFlipResult(_digon_folded(a, b, x, y, "b"), x, rule)
    _, a, b, z, f = info
    if arc != f:
        raise NotDigonConfiguration(
            f"only the folded arc {f} of this configuration supports the digon flip"
        )
    inv = NCExpr.gen(f, tau=(1 if kind == "c" else 0), inverted=True)
    rule = inv * NCExpr.gen(z) + inv * NCExpr.gen(z, tau=1)
    target = "c" if kind == "b" else "b"
    return DigonFlipResult(_digon_folded(a, b, z, f, target), f, rule)


# ---------------------------------------------------------------------------
# SVG export
# ---------------------------------------------------------------------------


def polygon_svg(p: DecoratedPolygon, size=220) -> str:
    """A small standalone SVG drawing: sides with orientation ticks, angle
    colors (open = parallel, filled = crossing) and angle indicators."""
    n = p.n
    cx = cy = size / 2
    radius = size * 0.4

    def vertex(i):
        theta = math.pi / 2 + 2 * math.pi * (i + 1) / n
        return (cx + radius * math.cos(theta), cy - radius * math.sin(theta))

    def midpoint(i):
        (x1, y1), (x2, y2) = vertex(i - 1), vertex(i)
        return ((x1 + x2) / 2, (y1 + y2) / 2)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    ]
    pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in (vertex(i) for i in range(n)))
    parts.append(
        f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>'
    )
    for i in range(n):
        (mx, my) = midpoint(i)
        (tx, ty) = vertex(p.indicators[i])
        parts.append(
            f'<line x1="{mx:.1f}" y1="{my:.1f}" x2="{tx:.1f}" y2="{ty:.1f}" '
            f'stroke="gray" stroke-width="0.8" stroke-dasharray="3,2"/>'
        )
        a, rev = p.sides[i]
        (x1, y1), (x2, y2) = vertex(i - 1), vertex(i)
        if rev:
            (x1, y1), (x2, y2) = (x2, y2), (x1, y1)
        ax, ay = (x1 + 0.6 * (x2 - x1), y1 + 0.6 * (y2 - y1))
        parts.append(
            f'<circle cx="{ax:.1f}" cy="{ay:.1f}" r="2.2" fill="black"/>'
        )
        lx, ly = (mx + (mx - cx) * 0.18, my + (my - cy) * 0.18)
        parts.append(
            f'<text x="{lx:.1f}" y="{ly:.1f}" font-size="10" '
            f'text-anchor="middle">{a}</text>'
        )
    for i in range(n):
        (vx, vy) = vertex(i)
        fill = "black" if p.angle_colors[i] == CROSSING else "white"
        parts.append(
            f'<circle cx="{vx:.1f}" cy="{vy:.1f}" r="4" fill="{fill}" '
            f'stroke="black" stroke-width="1"/>'
        )
    parts.append("</svg>")
    return "".join(parts)


def tiling_svg(T: DecoratedTiling, size=220) -> str:
    """All polygons of a tiling, side by side."""
    n = len(T.polygons)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size * n}" '
        f'height="{size}" viewBox="0 0 {size * n} {size}">'
    ]
    for k, p in enumerate(T.polygons):
        inner = polygon_svg(p, size)
        body = inner[inner.index(">") + 1 : -len("</svg>")]
        parts.append(f'<g transform="translate({k * size},0)">{body}</g>')
    parts.append("</svg>")
    return "".join(parts)
