"""Ordered 2-colored quivers: angles, ST-tiles, and admissible mutation.

An ordered quiver decorates a (mixed) 2-colored quiver with, for every big
node, a splitting of its pruned arrows into two sides ("empty" and "filled"),
each side carrying an ordered tuple of in-neighbors followed by an ordered
tuple of out-neighbors.  Nonempty sides assemble into ST-tiles: locally
transitive tournaments with a compatible cyclic node order and a parity
constraint on arrow colors.  Mutation rewrites the two tiles at the mutated
node and is only admissible when the rewritten tiles are again well-formed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .errors import Inadmissible, NotTwoTiles, PolyclusError
from .numbers import EPS
from .quiver import ColoredQuiver
from .symalg import NCExpr

EMPTY, FILLED = 0, 1
_COLOR_BIT = {"parallel": 0, "crossing": 1}


@dataclass(frozen=True)
class SideOrder:
    """Cyclic boundary order of one side of a big node.

    ``seq`` lists the pruned neighbors on this side, in-neighbors first, and
    ``n_in`` marks the boundary between the In and Out blocks.
    """

    seq: tuple = ()
    n_in: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seq", tuple(self.seq))
        if not 0 <= self.n_in <= len(self.seq):
            raise PolyclusError("In/Out split out of range")

    @property
    def ins(self):
        return self.seq[: self.n_in]

    @property
    def outs(self):
        return self.seq[self.n_in :]


@dataclass(frozen=True)
class STTile:
    nodes: frozenset
    cycle: tuple  # canonical rotation of the cyclic node order
    arrows: tuple  # (src, dst, color) triples, sorted
    sides: tuple  # (node, fill) pairs, sorted


def _canonical_rotation(cycle):
    pivot = cycle.index(min(cycle))
    return cycle[pivot:] + cycle[:pivot]


class OrderedQuiver:
    """A 2-colored mixed quiver with per-side ordered In/Out tuples."""

    def __init__(self, quiver: ColoredQuiver, order, self_symmetric=()):
        self.quiver = quiver
        self.order = {k: (s0, s1) for k, (s0, s1) in order.items()}
        self.self_symmetric = frozenset(self_symmetric)
        self._pruned_arrows = {}
        self._validate()

    # -- construction --------------------------------------------------------

    @classmethod
    def from_arrows(cls, nodes, arrows, sides, self_symmetric=()):
        """Build from node specs, colored arrows and per-node side data.

        ``sides`` maps node id -> ((in0, out0), (in1, out1)) with each entry a
        sequence of neighbor ids.  Arrows use the ColoredQuiver conventions
        plus color "comm" for a pair of parallel and crossing arrows.
        """
        expanded = []
        for src, dst, color, mult in arrows:
            if color == "comm":
                expanded.append((src, dst, "parallel", mult))
                expanded.append((src, dst, "crossing", mult))
            else:
                expanded.append((src, dst, color, mult))
        q = ColoredQuiver.from_arrows(nodes, expanded)
        order = {
            k: (
                SideOrder(tuple(i0) + tuple(o0), len(tuple(i0))),
                SideOrder(tuple(i1) + tuple(o1), len(tuple(i1))),
            )
            for k, ((i0, o0), (i1, o1)) in sides.items()
        }
        return cls(q, order, self_symmetric)

    def _validate(self):
        big = set(self.quiver.big_ids())
        if set(self.order) != big:
            raise PolyclusError("side data must cover exactly the big nodes")
        pruned = self.quiver.prune()
        for src, dst, color, mult in pruned.arrows():
            if mult != 1:
                raise PolyclusError(
                    f"pruned arrow {src}->{dst} has multiplicity {mult}; "
                    "ordered tuples require simple arrows"
                )
            self._pruned_arrows[(src, dst)] = _COLOR_BIT[color]
        ins = {k: set() for k in big}
        outs = {k: set() for k in big}
        for (src, dst), _ in self._pruned_arrows.items():
            outs[src].add(dst)
            ins[dst].add(src)
        for k, (s0, s1) in self.order.items():
            listed_in = s0.ins + s1.ins
            listed_out = s0.outs + s1.outs
            if len(set(listed_in)) != len(listed_in) or set(listed_in) != ins[k]:
                raise PolyclusError(
                    f"In tuples at {k} do not partition the pruned in-arrows"
                )
            if len(set(listed_out)) != len(listed_out) or set(listed_out) != outs[k]:
                raise PolyclusError(
                    f"Out tuples at {k} do not partition the pruned out-arrows"
                )

    # -- basic queries -------------------------------------------------------

    def side_of(self, i, j):
        """The side of (big) node ``i`` whose tuples contain ``j``.

        Raises Inadmissible when ``j`` appears on both sides of ``i`` (the two
        nodes then share both their tiles, as in a punctured digon, and no
        single facing side exists).
        """
        s0, s1 = self.order[i]
        if j in s0.seq and j in s1.seq:
            raise Inadmissible(
                f"nodes {i} and {j} share both tiles; no unique facing side",
                details={"kind": "shared-tiles", "pair": (i, j)},
            )
        if j in s0.seq:
            return EMPTY
        if j in s1.seq:
            return FILLED
        return None

    def side_matching(self, m, nodes):
        """The side of ``m`` facing the tile with node set ``nodes``, resolved
        by comparing whole side node sets (unambiguous even when two tiles
        share a pair of nodes); None when neither side matches."""
        for f in (EMPTY, FILLED):
            if frozenset(self.order[m][f].seq) | {m} == nodes:
                return f
        return None

    def arrow_color(self, i, j):
        return self._pruned_arrows[(i, j)]

    def has_arrow(self, i, j):
        return (i, j) in self._pruned_arrows

    def __eq__(self, other):
        if not isinstance(other, OrderedQuiver):
            return NotImplemented
        return (
            self.quiver == other.quiver
            and self.order == other.order
            and self.self_symmetric == other.self_symmetric
        )

    def __hash__(self):
        return hash(
            (
                self.quiver,
                tuple(sorted(self.order.items())),
                self.self_symmetric,
            )
        )

    def __repr__(self):
        return f"OrderedQuiver({self.quiver!r}, {self.order!r})"

    # -- exchange-expression protocol ---------------------------------------

    def check_admissible(self, k):
        node = self.quiver.node(k)
        if node.frozen:
            raise Inadmissible(f"node {k} is frozen", details={"node": k})
        if not node.big:
            raise Inadmissible(
                f"node {k} is small; its variable is central",
                details={"node": k},
            )
        s0, s1 = self.order[k]
        if (not s0.seq or not s1.seq) and k not in self.self_symmetric:
            raise NotTwoTiles(
                f"node {k} has an empty side and is not self-symmetric",
                details={"node": k},
            )

    def side_in(self, k, fill):
        for i in self.order[k][fill].ins:
            yield (i, self.side_of(i, k), self.arrow_color(i, k))

    def side_out(self, k, fill):
        for j in self.order[k][fill].outs:
            yield (j, self.side_of(j, k), self.arrow_color(k, j))

    def _central(self, k, incoming):
        big = set(self.quiver.big_ids())
        for i in sorted(self.quiver.ids()):
            if i == k:
                continue
            c = self.quiver.entry(i, k) if incoming else self.quiver.entry(k, i)
            if not c:
                continue
            if i in big and k in big:
                pairs = min(c.re, c.im)
                if pairs > 0:
                    yield ("N", i, pairs)
            elif i not in big and k in big:
                # small -> big entries are m(1+e), big -> small are real m;
                # either way the real part is the arrow count
                if c.re > 0:
                    yield ("x", i, c.re)

    def central_in(self, k):
        return self._central(k, True)

    def central_out(self, k):
        return self._central(k, False)

    # -- serialization -------------------------------------------------------

    def to_json(self):
        data = self.quiver.to_json()
        data["order"] = {
            k: {
                "fill_order": {"empty": list(s0.seq), "filled": list(s1.seq)},
                "in_out_split": {"empty": s0.n_in, "filled": s1.n_in},
            }
            for k, (s0, s1) in sorted(self.order.items())
        }
        if self.self_symmetric:
            data["self_symmetric"] = sorted(self.self_symmetric)
        return data

    @classmethod
    def from_json(cls, data):
        quiver = ColoredQuiver.from_json(data)
        order = {}
        for k, spec in data.get("order", {}).items():
            fo, split = spec["fill_order"], spec["in_out_split"]
            order[k] = (
                SideOrder(tuple(fo["empty"]), split["empty"]),
                SideOrder(tuple(fo["filled"]), split["filled"]),
            )
        return cls(quiver, order, data.get("self_symmetric", ()))


def dumps(q: OrderedQuiver) -> str:
    return json.dumps(q.to_json(), indent=2, sort_keys=True)


def loads(text: str) -> OrderedQuiver:
    return OrderedQuiver.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------


def _neighbor_letter(q, neighbor, k, color):
    facing = q.side_of(neighbor, k)
    return NCExpr.gen(neighbor, sigma=(facing + color + 1) % 2, tau=(color + 1) % 2)


def angles(q: OrderedQuiver, k):
    """The two angles (empty side, filled side) at big node ``k``."""
    result = []
    for g in (EMPTY, FILLED):
        side = q.order[k][g]
        expr = NCExpr.scalar(1)
        for i in side.ins:
            expr = expr * _neighbor_letter(q, i, k, q.arrow_color(i, k))
        expr = expr * NCExpr.gen(k, sigma=g)
        for j in side.outs:
            expr = expr * _neighbor_letter(q, j, k, q.arrow_color(k, j))
        result.append(expr)
    return tuple(result)


# ---------------------------------------------------------------------------
# ST-tiles and compatibility
# ---------------------------------------------------------------------------


def _tile_cycles(q):
    """Yield (anchor, fill, cycle) for every nonempty side, deduplicated."""
    seen = set()
    for k in sorted(q.order):
        for f in (EMPTY, FILLED):
            side = q.order[k][f]
            if not side.seq:
                continue
            cycle = _canonical_rotation(side.ins + (k,) + side.outs)
            if cycle in seen:
                continue
            seen.add(cycle)
            yield k, f, cycle


def st_tiles(q: OrderedQuiver):
    tiles = []
    for k, f, cycle in _tile_cycles(q):
        nodes = frozenset(cycle)
        arrows = tuple(
            sorted(
                (i, j, q.arrow_color(i, j))
                for i, j in itertools.permutations(cycle, 2)
                if q.has_arrow(i, j)
            )
        )
        sides = []
        for m in cycle:
            sides.append((m, q.side_matching(m, nodes)))
        tiles.append(STTile(nodes, cycle, arrows, tuple(sorted(sides))))
    return tiles


def _triple_parity_issue(q, triple):
    """Parity check for one 3-subset of a tile; returns a diagnostic or None."""
    pairs = list(itertools.combinations(triple, 2))
    arrows = []
    for a, b in pairs:
        if q.has_arrow(a, b):
            arrows.append((a, b))
        elif q.has_arrow(b, a):
            arrows.append((b, a))
        else:
            return {"kind": "not-tournament", "pair": (a, b)}
    indeg = {n: 0 for n in triple}
    crossings = 0
    for a, b in arrows:
        indeg[b] += 1
        crossings += q.arrow_color(a, b)
    is_cycle = all(d == 1 for d in indeg.values())
    expected = "even" if is_cycle else "odd"
    if crossings % 2 != (0 if is_cycle else 1):
        return {
            "kind": "parity",
            "triple": tuple(sorted(triple)),
            "shape": "3-cycle" if is_cycle else "transitive",
            "expected": expected,
            "found": crossings,
        }
    return None


def st_diagnostics(q: OrderedQuiver):
    """Structural ST-compatibility violations, as a list of diagnostics."""
    issues = []
    for k, f, cycle in _tile_cycles(q):
        nodes = frozenset(cycle)
        for m in cycle:
            if m == k:
                continue
            matching = [
                q.order[m][f]
                for f in (EMPTY, FILLED)
                if frozenset(q.order[m][f].seq) | {m} == nodes
            ]
            if not matching:
                issues.append(
                    {
                        "kind": "tile-mismatch",
                        "node": m,
                        "tile": tuple(sorted(nodes)),
                    }
                )
                continue
            if not any(
                _canonical_rotation(side.ins + (m,) + side.outs) == cycle
                for side in matching
            ):
                issues.append({"kind": "cyclic-order", "node": m, "tile": cycle})
        for triple in itertools.combinations(sorted(nodes), 3):
            issue = _triple_parity_issue(q, triple)
            if issue:
                issue.setdefault("tile", cycle)
                issues.append(issue)
    # deduplicate while preserving order
    unique = []
    for issue in issues:
        if issue not in unique:
            unique.append(issue)
    return unique


def is_st_compatible(q: OrderedQuiver):
    issues = st_diagnostics(q)
    return (not issues, issues)


# ---------------------------------------------------------------------------
# mutation
# ---------------------------------------------------------------------------


def _resplit(q2_arrows, cycle, m):
    """Re-derive the In/Out split of node ``m`` from a tile cyclic order.

    Out-neighbors must be consecutive immediately after ``m``, in-neighbors
    consecutive before it (local transitivity); raises Inadmissible otherwise.
    """
    idx = cycle.index(m)
    rot = cycle[idx + 1 :] + cycle[:idx]
    outs = []
    ins = []
    seen_in = False
    for v in rot:
        if (m, v) in q2_arrows and not seen_in:
            outs.append(v)
        elif (v, m) in q2_arrows:
            seen_in = True
            ins.append(v)
        else:
            kind = "local-transitivity" if (m, v) in q2_arrows else "not-tournament"
            raise Inadmissible(
                f"tile order broken at node {m}",
                details={"kind": kind, "node": m, "tile": cycle},
            )
    return SideOrder(tuple(ins) + tuple(outs), len(ins))


def _pruned_arrow_map(quiver):
    arrows = {}
    for src, dst, color, mult in quiver.prune().arrows():
        if mult != 1:
            raise Inadmissible(
                f"pruned arrow {src}->{dst} has multiplicity {mult}",
                details={"kind": "multiplicity", "pair": (src, dst)},
            )
        arrows[(src, dst)] = _COLOR_BIT[color]
    return arrows


def _finish(q2, order, self_symmetric):
    try:
        candidate = OrderedQuiver(q2, order, self_symmetric)
    except PolyclusError as exc:
        raise Inadmissible(str(exc), details={"kind": "structure"}) from exc
    ok, issues = is_st_compatible(candidate)
    if not ok:
        raise Inadmissible(
            "mutation produces an incompatible quiver",
            details={"kind": "st-compatibility", "issues": issues},
        )
    return candidate


def _mutate_small(q, k):
    q2 = q.quiver.mutate(k)
    arrows = _pruned_arrow_map(q2)
    order = {}
    for m, sides in q.order.items():
        new_sides = []
        for so in sides:
            if not so.seq:
                new_sides.append(so)
                continue
            cycle = so.ins + (m,) + so.outs
            new_sides.append(_resplit(arrows, cycle, m))
        order[m] = tuple(new_sides)
    return _finish(q2, order, q.self_symmetric)


def mutate_st(q: OrderedQuiver, k) -> OrderedQuiver:
    """Admissible mutation at ``k``; raises Inadmissible/NotTwoTiles."""
    node = q.quiver.node(k)
    if node.frozen:
        raise Inadmissible(f"node {k} is frozen", details={"node": k})
    if not node.big:
        return _mutate_small(q, k)
    q.check_admissible(k)
    s0, s1 = q.order[k]
    q2 = q.quiver.mutate(k)
    arrows = _pruned_arrow_map(q2)
    new_k = (
        SideOrder(s1.outs + s0.ins, len(s1.outs)),
        SideOrder(s0.outs + s1.ins, len(s0.outs)),
    )
    order = dict(q.order)
    order[k] = new_k
    for f in (EMPTY, FILLED):
        side = new_k[f]
        cycle = side.ins + (k,) + side.outs
        for m in side.seq:
            s_m = q.side_of(m, k)
            replaced = list(order[m]) if m in order else None
            if s_m is None or replaced is None:
                raise Inadmissible(
                    f"node {m} has no side facing {k}",
                    details={"kind": "structure", "node": m},
                )
            replaced[s_m] = _resplit(arrows, cycle, m)
            order[m] = tuple(replaced)
    return _finish(q2, order, q.self_symmetric)


def small_mutation_expr(q: OrderedQuiver, k) -> NCExpr:
    """Exchange relation for the central variable at a small node ``k``."""
    node = q.quiver.node(k)
    if node.big:
        raise PolyclusError(f"node {k} is big; use the noncommutative formula")

    def product(incoming):
        out = NCExpr.small_var(k, -1)
        big = set(q.quiver.big_ids())
        for i in sorted(q.quiver.ids()):
            if i == k:
                continue
            c = q.quiver.entry(i, k) if incoming else q.quiver.entry(k, i)
            if not c or c.re <= 0:
                continue
            if i in big:
                out = out * NCExpr.norm_symbol(i, c.re)
            else:
                # small-small entries are m(1+e)/2 with shadow m
                out = out * NCExpr.small_var(i, int(c.re + c.im))
        return out

    return product(True) + product(False)


# ---------------------------------------------------------------------------
# switch / weave / equivalence
# ---------------------------------------------------------------------------


def switch(q: OrderedQuiver, k) -> OrderedQuiver:
    s0, s1 = q.order[k]
    order = dict(q.order)
    order[k] = (s1, s0)
    return OrderedQuiver(q.quiver, order, q.self_symmetric)


def weave_ordered(q: OrderedQuiver, k) -> OrderedQuiver:
    return OrderedQuiver(q.quiver.weave(k), q.order, q.self_symmetric)


def _two_colorable(constraints, nodes):
    """Feasibility of x_i + x_j = d (mod 2) over GF(2)."""
    color = {}
    adj = {n: [] for n in nodes}
    for (i, j), d in constraints.items():
        adj[i].append((j, d))
        adj[j].append((i, d))
    for start in nodes:
        if start in color:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v, d in adj[u]:
                want = (color[u] + d) % 2
                if v in color:
                    if color[v] != want:
                        return False
                else:
                    color[v] = want
                    stack.append(v)
    return True


def _order_matches(q1, q2, phi, mode):
    for k, (s0, s1) in q1.order.items():
        mapped = (
            SideOrder(tuple(phi[n] for n in s0.seq), s0.n_in),
            SideOrder(tuple(phi[n] for n in s1.seq), s1.n_in),
        )
        target = q2.order[phi[k]]
        if mode == "iso":
            if mapped != target:
                return False
        else:
            if mapped != target and (mapped[1], mapped[0]) != target:
                return False
    return True


def _colors_match(q1, q2, phi, mode):
    big1 = set(q1.quiver.big_ids())
    constraints = {}
    for i in q1.quiver.ids():
        for j in q1.quiver.ids():
            if i == j:
                continue
            c1 = q1.quiver.entry(i, j)
            c2 = q2.quiver.entry(phi[i], phi[j])
            if i in big1 and j in big1 and mode == "weaving":
                if c1 == c2:
                    d = 0
                elif c1 * EPS == c2:
                    d = 1
                else:
                    return False
                if c1 != c1 * EPS:  # entry is color-sensitive
                    key = (min(i, j), max(i, j))
                    if constraints.setdefault(key, d) != d:
                        return False
            elif c1 != c2:
                return False
    if mode != "weaving":
        return True
    pair_constraints = {pair: d for pair, d in constraints.items()}
    return _two_colorable(pair_constraints, sorted(big1))


def equivalent(q1: OrderedQuiver, q2: OrderedQuiver, mode="iso") -> bool:
    """Existence of an isomorphism of the given strength (iso|switching|weaving)."""
    if mode not in ("iso", "switching", "weaving"):
        raise PolyclusError(f"unknown equivalence mode {mode}")
    n1, n2 = q1.quiver.nodes, q2.quiver.nodes
    if len(n1) != len(n2):
        return False

    def signature(q, node):
        degree = sum(
            1 for other in q.quiver.ids() if other != node.id and q.quiver.entry(node.id, other)
        )
        return (node.big, node.frozen, degree)

    groups1 = {}
    for node in n1:
        groups1.setdefault(signature(q1, node), []).append(node.id)
    groups2 = {}
    for node in n2:
        groups2.setdefault(signature(q2, node), []).append(node.id)
    if set(groups1) != set(groups2) or any(
        len(groups1[s]) != len(groups2[s]) for s in groups1
    ):
        return False

    sigs = sorted(groups1)
    ordering = [i for s in sigs for i in groups1[s]]
    pools = [groups2[s] for s in sigs for _ in groups1[s]]

    def extend(idx, phi, used):
        if idx == len(ordering):
            return _colors_match(q1, q2, phi, mode) and _order_matches(
                q1, q2, phi, mode
            )
        src = ordering[idx]
        for dst in pools[idx]:
            if dst in used:
                continue
            phi[src] = dst
            used.add(dst)
            if extend(idx + 1, phi, used):
                return True
            used.discard(dst)
            del phi[src]
        return False

    return extend(0, {}, set())
