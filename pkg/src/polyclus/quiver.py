"""2-colored and mixed quivers over the split-complex integers.

A mixed 2-colored quiver has big and small nodes.  Arrows between big nodes
carry a color (parallel, weight 1, or crossing, weight e); arrows touching
small nodes are plain.  The quiver is stored through its exchange matrix
C with entries in Z[e]/(e^2-1) (halves of (1+e) allowed between small
nodes), skew-symmetrized by D = diag(1+e on big, 1 on small):

    big-big     c_ij = (net parallel) + e (net crossing),  c_ji = -c_ij
    big->small  c_ij = m,              c_ji = -m(1+e)
    small-small c_ij = m(1+e)/2,       c_ji = -c_ij
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MixedTwoCycle, PolyclusError
from .numbers import (
    EPS,
    HALF_H,
    ONE,
    SplitComplexInt,
    eval_at_one,
    split_pos_neg,
    to_text,
)

Y = SplitComplexInt
ZERO = Y(0, 0)


@dataclass(frozen=True, slots=True)
class Node:
    id: str
    big: bool = True
    frozen: bool = False


class ColoredQuiver:
    """Immutable mixed 2-colored quiver."""

    __slots__ = ("nodes", "_index", "_m", "allow_mixed_two_cycles")

    def __init__(self, nodes, matrix, allow_mixed_two_cycles=False):
        self.nodes = tuple(nodes)
        self._index = {n.id: i for i, n in enumerate(self.nodes)}
        if len(self._index) != len(self.nodes):
            raise PolyclusError("duplicate node ids")
        self._m = {k: v for k, v in matrix.items() if v}
        self.allow_mixed_two_cycles = allow_mixed_two_cycles
        self._validate()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_arrows(cls, nodes, arrows, allow_mixed_two_cycles=False):
        """nodes: (id, big, frozen) triples or Node; arrows: (src, dst,
        color, mult) with color in {"parallel", "crossing", "plain"}."""
        node_objs = [n if isinstance(n, Node) else Node(*n) for n in nodes]
        big = {n.id for n in node_objs if n.big}
        m = {}

        def add(i, j, value):
            m[(i, j)] = m.get((i, j), ZERO) + value

        for src, dst, color, mult in arrows:
            mult = int(mult)
            if src == dst:
                raise PolyclusError("self-loops are not allowed")
            if src in big and dst in big:
                weight = ONE if color == "parallel" else EPS
                if color not in ("parallel", "crossing"):
                    raise PolyclusError(
                        f"arrow {src}->{dst} between big nodes needs a color"
                    )
                add(src, dst, weight * Y(mult, 0))
                add(dst, src, -weight * Y(mult, 0))
            elif src in big or dst in big:
                big_first = src in big
                add(src, dst, (ONE if big_first else ONE + EPS) * Y(mult, 0))
                add(dst, src, -(ONE + EPS if big_first else ONE) * Y(mult, 0))
            else:
                add(src, dst, HALF_H * Y(mult, 0))
                add(dst, src, -(HALF_H * Y(mult, 0)))
        return cls(node_objs, m, allow_mixed_two_cycles)

    # -- validation ---------------------------------------------------------

    def _validate(self):
        big = {n.id for n in self.nodes if n.big}
        for (i, j), c in self._m.items():
            if i == j:
                raise PolyclusError("self-loops are not allowed")
            if i not in self._index or j not in self._index:
                raise PolyclusError(f"entry references unknown node {i} or {j}")
            cji = self._m.get((j, i), ZERO)
            if i in big and j in big:
                if cji != -c:
                    raise PolyclusError(f"big-big entries not skew at ({i},{j})")
                if c.re * c.im < 0 and not self.allow_mixed_two_cycles:
                    raise MixedTwoCycle(
                        f"mixed-color 2-cycle between {i} and {j}",
                        details={"pair": (i, j), "entry": to_text(c)},
                    )
            elif i in big:
                if c.im != 0 or cji != -(ONE + EPS) * c:
                    raise PolyclusError(
                        f"big-small entries violate the (1+e) rule at ({i},{j})"
                    )
            elif j in big:
                pass  # checked from the big side
            else:
                if cji != -c or (c and 2 * c != (ONE + EPS) * Y(c.re + c.im, 0)):
                    raise PolyclusError(
                        f"small-small entry not a multiple of (1+e)/2 at ({i},{j})"
                    )

    # -- access -------------------------------------------------------------

    def node(self, i):
        return self.nodes[self._index[i]]

    def ids(self):
        return [n.id for n in self.nodes]

    def big_ids(self):
        return [n.id for n in self.nodes if n.big]

    def entry(self, i, j):
        return self._m.get((i, j), ZERO)

    def entries(self):
        return dict(self._m)

    def arrows(self):
        """Derived arrow list [(src, dst, color, mult)] (net arrows only)."""
        big = {n.id for n in self.nodes if n.big}
        out = []
        order = self._index
        for (i, j), c in sorted(self._m.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]])):
            if i in big and j in big:
                if c.re > 0:
                    out.append((i, j, "parallel", c.re))
                if c.im > 0:
                    out.append((i, j, "crossing", c.im))
            elif i in big:
                if c.re > 0:
                    out.append((i, j, "plain", c.re))
            elif j in big:
                if c.re > 0:  # small->big entry m(1+e): re = m
                    out.append((i, j, "plain", c.re))
            else:
                m = c.re + c.im  # entry m(1+e)/2
                if m > 0:
                    out.append((i, j, "plain", m))
        return out

    def __eq__(self, other):
        if not isinstance(other, ColoredQuiver):
            return NotImplemented
        return self.nodes == other.nodes and self._m == other._m

    def __hash__(self):
        return hash((self.nodes, frozenset(self._m.items())))

    def __repr__(self):
        return f"ColoredQuiver({self.ids()}, {self.arrows()})"

    # -- operations ---------------------------------------------------------

    def mutate(self, k):
        if k not in self._index:
            raise PolyclusError(f"unknown node {k}")
        if self.node(k).frozen:
            raise PolyclusError(f"node {k} is frozen")
        new = mutate_matrix_entries(self._m, k, self.ids())
        # Small nodes only see the shadow at e=1, so entries touching a small
        # node are determined by that shadow; rewrite them in normal form
        # (real for big->small, multiples of (1+e)/2 for small-small).
        big = set(self.big_ids())
        for (i, j), c in list(new.items()):
            if i in big and j in big:
                continue
            shadow = eval_at_one(c)
            new[(i, j)] = Y(shadow, 0) if i in big else HALF_H * Y(shadow, 0)
        return ColoredQuiver(self.nodes, new, self.allow_mixed_two_cycles)

    def weave(self, k):
        """Switch colors of all big-big arrows at k (multiply by e)."""
        if not self.node(k).big:
            raise PolyclusError("weaving is defined at big nodes")
        big = set(self.big_ids())
        new = {}
        for (i, j), c in self._m.items():
            if (i == k and j in big) or (j == k and i in big):
                c = c * EPS
            new[(i, j)] = c
        return ColoredQuiver(self.nodes, new, self.allow_mixed_two_cycles)

    def prune(self):
        """Drop small nodes, then cancel parallel/crossing pairs."""
        keep = [n for n in self.nodes if n.big]
        ids = {n.id for n in keep}
        new = {}
        for (i, j), c in self._m.items():
            if i not in ids or j not in ids:
                continue
            a, b = c.re, c.im
            if a * b > 0:
                m = min(abs(a), abs(b))
                sign = 1 if a > 0 else -1
                c = Y(a - sign * m, b - sign * m)
            new[(i, j)] = c
        return ColoredQuiver(keep, new, self.allow_mixed_two_cycles)

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return {
            "v": 1,
            "nodes": [
                {"id": n.id, "size": "big" if n.big else "small", "frozen": n.frozen}
                for n in self.nodes
            ],
            "arrows": [
                {"src": s, "dst": d, "color": c, "mult": m}
                for s, d, c, m in self.arrows()
            ],
        }

    @classmethod
    def from_json(cls, data, allow_mixed_two_cycles=False):
        nodes = [
            Node(n["id"], n.get("size", "big") == "big", bool(n.get("frozen")))
            for n in data["nodes"]
        ]
        arrows = [
            (a["src"], a["dst"], a.get("color", "plain"), a.get("mult", 1))
            for a in data["arrows"]
        ]
        return cls.from_arrows(nodes, arrows, allow_mixed_two_cycles)

    def to_dot(self):
        lines = ["digraph quiver {"]
        for n in self.nodes:
            shape = "doublecircle" if n.big else "circle"
            style = ', style="filled", fillcolor="lightgray"' if n.frozen else ""
            lines.append(f'  "{n.id}" [shape={shape}{style}];')
        colors = {"parallel": "black", "crossing": "blue", "plain": "gray30"}
        for s, d, c, m in self.arrows():
            label = f', label="{m}"' if m != 1 else ""
            lines.append(f'  "{s}" -> "{d}" [color={colors[c]}{label}];')
        lines.append("}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# matrix-level operations
# ---------------------------------------------------------------------------


def exchange_matrix(q: ColoredQuiver):
    """Dense matrix (list of lists of SplitComplexInt) in node order."""
    ids = q.ids()
    return [[q.entry(i, j) for j in ids] for i in ids]


def mutate_matrix_entries(m, k, ids):
    """Mutate a sparse {(i, j): Y} matrix at node k."""
    new = {}
    pairs = set(m)
    for i in ids:
        if i == k or (i, k) not in pairs:
            continue
        for j in ids:
            if j == k or (k, j) not in pairs:
                continue
            ik_p, ik_n = split_pos_neg(m[(i, k)])
            kj_p, kj_n = split_pos_neg(m[(k, j)])
            delta = ik_p * kj_p - ik_n * kj_n
            if delta:
                new[(i, j)] = new.get((i, j), ZERO) + delta
    for (i, j), c in m.items():
        if k in (i, j):
            c = -c
        new[(i, j)] = new.get((i, j), ZERO) + c
    return {key: v for key, v in new.items() if v}


def mutate_matrix(c, k):
    """Mutate a dense split-complex matrix (list of lists) at index k."""
    n = len(c)
    out = [row[:] for row in c]
    for i in range(n):
        for j in range(n):
            if k in (i, j):
                out[i][j] = -c[i][j]
            else:
                ik_p, ik_n = split_pos_neg(c[i][k])
                kj_p, kj_n = split_pos_neg(c[k][j])
                out[i][j] = c[i][j] + ik_p * kj_p - ik_n * kj_n
    return out


def mutate_colored(q: ColoredQuiver, k) -> ColoredQuiver:
    return q.mutate(k)


def weave(q: ColoredQuiver, k) -> ColoredQuiver:
    return q.weave(k)


def prune(q: ColoredQuiver) -> ColoredQuiver:
    return q.prune()


# ---------------------------------------------------------------------------
# unfolding
# ---------------------------------------------------------------------------


class UnfoldedQuiver:
    """Plain quiver on {i, i'} with folding groups."""

    __slots__ = ("ids", "groups", "b")

    def __init__(self, ids, groups, b):
        self.ids = list(ids)
        self.groups = dict(groups)  # base id -> tuple of unfolded ids
        self.b = {k: v for k, v in b.items() if v}

    def entry(self, i, j):
        return self.b.get((i, j), 0)

    def mutate(self, k):
        new = {}
        for i in self.ids:
            for j in self.ids:
                if i == j:
                    continue
                if k in (i, j):
                    v = -self.entry(i, j)
                else:
                    ik, kj = self.entry(i, k), self.entry(k, j)
                    v = self.entry(i, j) + max(ik, 0) * max(kj, 0) - min(
                        ik, 0
                    ) * min(kj, 0)
                if v:
                    new[(i, j)] = v
        return UnfoldedQuiver(self.ids, self.groups, new)

    def group_mutate(self, base):
        out = self
        for node in self.groups[base]:
            out = out.mutate(node)
        return out


def unfold(q: ColoredQuiver) -> UnfoldedQuiver:
    big = set(q.big_ids())
    ids, groups = [], {}
    for n in q.nodes:
        if n.big:
            groups[n.id] = (n.id, n.id + "'")
            ids += [n.id, n.id + "'"]
        else:
            groups[n.id] = (n.id,)
            ids.append(n.id)
    b = {}

    def add(i, j, m):
        if m:
            b[(i, j)] = b.get((i, j), 0) + m
            b[(j, i)] = b.get((j, i), 0) - m

    for (i, j), c in q.entries().items():
        if i in big and j in big:
            if c.re > 0:
                add(i, j, c.re)
                add(i + "'", j + "'", c.re)
            if c.im > 0:
                add(i, j + "'", c.im)
                add(i + "'", j, c.im)
        elif i in big:
            if c.re > 0:
                add(i, j, c.re)
                add(i + "'", j, c.re)
        elif j in big:
            if c.re > 0:  # small->big entry m(1+e)
                add(i, j, c.re)
                add(i, j + "'", c.re)
        else:
            m = c.re + c.im
            if m > 0:
                add(i, j, m)
    return UnfoldedQuiver(ids, groups, b)


def fold(uq: UnfoldedQuiver, template: ColoredQuiver) -> ColoredQuiver:
    """Refold an unfolded quiver using the groups of a template quiver."""
    big = set(template.big_ids())
    m = {}
    for i in template.ids():
        for j in template.ids():
            if i == j:
                continue
            if i in big and j in big:
                c = Y(uq.entry(i, j), uq.entry(i, j + "'"))
            elif i in big:
                c = Y(uq.entry(i, j), 0)
            elif j in big:
                c = Y(uq.entry(i, j), 0) * (ONE + EPS)
            else:
                c = HALF_H * Y(2 * uq.entry(i, j), 0)
            if c:
                m[(i, j)] = c
    return ColoredQuiver(template.nodes, m, template.allow_mixed_two_cycles)


# ---------------------------------------------------------------------------
# weaving equivalence and canonical form
# ---------------------------------------------------------------------------


def _weaving_canonical_entries(q: ColoredQuiver):
    """Entries with big-big colors normalized by a deterministic weaving.

    Weaving at k multiplies the big-big entries of row/column k by e; a
    consistent assignment x in {1, e}^big transforms c_ij -> x_i x_j c_ij.
    Entries with c = e*c impose no constraint.  We fix x by BFS over the
    constraint graph, choosing for each tree edge the orientation whose
    entry key is smaller; the result is independent of the representative.
    """
    big = sorted(q.big_ids())
    bigset = set(big)
    m = dict(q.entries())

    def key(c):
        return (c.re2, c.im2)

    x = {}
    for root in big:
        if root in x:
            continue
        x[root] = 0
        queue = [root]
        while queue:
            i = queue.pop(0)
            for j in big:
                if j in x or j == i:
                    continue
                c = m.get((i, j), ZERO)
                if not c or c == c * EPS:
                    continue
                # choose x_j so the (i, j) entry is minimal
                base = c if x[i] == 0 else c * EPS
                x[j] = 0 if key(base) <= key(base * EPS) else 1
                queue.append(j)
    new = {}
    for (i, j), c in m.items():
        if i in bigset and j in bigset and (x.get(i, 0) + x.get(j, 0)) % 2:
            c = c * EPS
        new[(i, j)] = c
    return new


def _node_signature(q: ColoredQuiver, i):
    node = q.node(i)
    shape = []
    for j in q.ids():
        if j == i:
            continue
        c = q.entry(i, j)
        if c:
            k = (c.re2, c.im2)
            ke = ((c * EPS).re2, (c * EPS).im2)
            shape.append(min(k, ke))
    return (node.big, node.frozen, tuple(sorted(shape)))


def canonical_form(q: ColoredQuiver):
    """Canonical key of q modulo node relabeling and weaving."""
    ids = q.ids()
    sigs = {i: _node_signature(q, i) for i in ids}
    best = [None]

    def serialize(order):
        perm = {old: new for new, old in enumerate(order)}
        renamed_nodes = sorted(
            (perm[n.id], n.big, n.frozen) for n in q.nodes
        )
        renum = ColoredQuiver(
            [Node(str(perm[n.id]), n.big, n.frozen) for n in q.nodes],
            {
                (str(perm[i]), str(perm[j])): c
                for (i, j), c in q.entries().items()
            },
            allow_mixed_two_cycles=True,
        )
        entries = _weaving_canonical_entries(renum)
        mat = tuple(
            sorted(
                ((int(i), int(j)), (c.re2, c.im2))
                for (i, j), c in entries.items()
                if c
            )
        )
        return (tuple(renamed_nodes), mat)

    # backtracking over permutations grouped by signature, keeping the best
    def extend(order, remaining):
        if not remaining:
            s = serialize(order)
            if best[0] is None or s < best[0]:
                best[0] = s
            return
        # candidates: one representative per signature won't do (entries
        # differ); try all remaining, ordered by signature for determinism
        for nxt in sorted(remaining, key=lambda i: (sigs[i], i)):
            extend(order + [nxt], [r for r in remaining if r != nxt])

    if len(ids) <= 8:
        extend([], ids)
    else:
        # larger quivers: refine by signature and only permute within classes
        classes = sorted(ids, key=lambda i: (sigs[i], i))
        _bounded_extend(q, sigs, classes, best, serialize)
    return best[0]


def _bounded_extend(q, sigs, ids, best, serialize):
    """Permutation search restricted to signature classes (n > 8)."""
    from itertools import permutations

    groups = {}
    for i in ids:
        groups.setdefault(sigs[i], []).append(i)
    orders = [None]

    def product(grouplist, prefix):
        if not grouplist:
            s = serialize(prefix)
            if best[0] is None or s < best[0]:
                best[0] = s
            return
        head, *rest = grouplist
        for p in permutations(head):
            product(rest, prefix + list(p))

    product([groups[k] for k in sorted(groups)], [])


def weaving_equivalent(q1: ColoredQuiver, q2: ColoredQuiver) -> bool:
    if len(q1.nodes) != len(q2.nodes):
        return False
    return canonical_form(q1) == canonical_form(q2)


# ---------------------------------------------------------------------------
# convenience
# ---------------------------------------------------------------------------


def dumps(q: ColoredQuiver) -> str:
    return json.dumps(q.to_json(), sort_keys=True)


def loads(text: str) -> ColoredQuiver:
    return ColoredQuiver.from_json(json.loads(text))
