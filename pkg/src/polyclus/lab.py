"""Seed catalog and experiment drivers.

This module collects ready-made seeds (decorated tilings and/or ordered
quivers), the Somos-4/5 matrix recurrences with their convention-fitting
protocol, the rank-2 finite-type verifier, a Laurent-phenomenon checker, and
the fruitfulness scanner for commutative shadows.
"""

from __future__ import annotations

import itertools
import os
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .clifford import Mat2, Mat2Ring, validate_point
from .errors import (
    BudgetExceeded,
    Inadmissible,
    NotInvertible,
    PolyclusError,
    UnknownSeed,
)
from .numbers import Poly, RatFun, poly_gcd
from .ordered import (
    OrderedQuiver,
    equivalent,
    is_st_compatible,
    mutate_st,
    small_mutation_expr,
    switch,
)
from .quiver import ColoredQuiver, canonical_form
from .symalg import NCExpr, evaluate, mutation_expr, to_text
from .tiling import (
    DecoratedPolygon,
    DecoratedTiling,
    punctured_digon,
    standard_polygon,
    tiling_to_quiver,
)
from .tiling import loads as tiling_loads
from .ordered import loads as ordered_loads


# ---------------------------------------------------------------------------
# seed catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    """A named seed: a decorated tiling (when one exists), the quiver, and a
    one-line description.  For mixed seeds the tiling covers the pruned big
    part of the quiver; purely matrix-level seeds carry no tiling."""

    name: str
    tiling: DecoratedTiling | None
    quiver: OrderedQuiver | ColoredQuiver
    note: str = ""


def _fan(n: int) -> CatalogEntry:
    """Fan triangulation of a disk with ``n`` boundary marked points: boundary
    arcs "1".."n" (side i joins corners i and i+1) and chords from corner 1,
    named "n+1", "n+2", ...  All tiles are plain decorated triangles."""
    if n < 4:
        raise UnknownSeed(f"fan({n}) needs at least 4 marked points")
    chord = {j: str(n + j - 2) for j in range(3, n)}  # corner-1 -- corner-j
    arcs = tuple(str(i) for i in range(1, n + 1)) + tuple(
        chord[j] for j in range(3, n)
    )
    used: dict[str, int] = {}

    def side(a):
        r = used.get(a, 0)
        used[a] = r + 1
        return (a, bool(r))

    polys = []
    for k in range(1, n - 1):
        left = "1" if k == 1 else chord[k + 1]
        bottom = str(k + 1)
        right = str(n) if k == n - 2 else chord[k + 2]
        polys.append(
            DecoratedPolygon(
                (side(left), side(bottom), side(right)), (0, 0, 0), (1, 2, 0)
            )
        )
    T = DecoratedTiling(arcs, tuple(polys))
    return CatalogEntry(f"fan({n})", T, tiling_to_quiver(T), "disk fan triangulation")


def _digon() -> CatalogEntry:
    T = punctured_digon()
    return CatalogEntry("digon", T, tiling_to_quiver(T), "once-punctured digon")


def _pentagon() -> CatalogEntry:
    arcs = ("1", "2", "3", "4", "5")
    T = DecoratedTiling(arcs, (standard_polygon(arcs),))
    return CatalogEntry(
        "pentagon", T, tiling_to_quiver(T), "single standard pentagon tile"
    )


def _delpezzo_p2() -> CatalogEntry:
    arcs = ("1", "2", "3")
    polys = (
        DecoratedPolygon((("1", False), ("2", True)), (1, 0), (0, 0)),
        DecoratedPolygon((("2", False), ("3", True)), (1, 0), (0, 0)),
        DecoratedPolygon((("3", False), ("1", True)), (1, 0), (0, 0)),
    )
    comm = (("1", "2", 1), ("2", "3", 1), ("3", "1", 1))
    T = DecoratedTiling(arcs, polys, comm_arrows=comm)
    return CatalogEntry(
        "delpezzo:P2", T, tiling_to_quiver(T), "three digons on a sphere"
    )


def _delpezzo_bl1p2() -> CatalogEntry:
    arcs = ("1", "2", "3", "4", "f1")
    polys = (
        DecoratedPolygon((("2", False), ("1", True)), (1, 0), (0, 0)),
        DecoratedPolygon((("3", False), ("2", True)), (1, 0), (0, 0)),
        DecoratedPolygon((("4", False), ("3", True)), (1, 0), (0, 0)),
        DecoratedPolygon(
            (("1", False), ("4", True), ("f1", False)), (0, 0, 0), (1, 2, 0)
        ),
    )
    comm = (("1", "3", 1), ("3", "2", 1), ("2", "4", 1))
    T = DecoratedTiling(arcs, polys, comm_arrows=comm)
    return CatalogEntry(
        "delpezzo:Bl1P2", T, tiling_to_quiver(T), "three digons and a triangle"
    )


def _delpezzo_cp1cp1() -> CatalogEntry:
    arcs = ("1", "2", "3", "4")
    polys = (
        DecoratedPolygon(
            (("1", False), ("2", False), ("3", False)), (0, 0, 0), (0, 0, 0)
        ),
        DecoratedPolygon(
            (("1", True), ("4", False), ("3", True)), (0, 0, 0), (2, 2, 2)
        ),
        DecoratedPolygon((("2", True), ("4", True)), (0, 1), (0, 0)),
    )
    comm = (("1", "2", 1), ("3", "2", 1), ("3", "4", 1), ("4", "1", 1))
    T = DecoratedTiling(arcs, polys, comm_arrows=comm)
    return CatalogEntry(
        "delpezzo:CP1xCP1",
        T,
        tiling_to_quiver(T),
        "two triangles and a digon on a once-punctured torus",
    )


def _delpezzo_somos5() -> CatalogEntry:
    arcs = ("1", "2", "3", "4", "5", "f")
    polys = (
        DecoratedPolygon(
            (("1", False), ("2", True), ("3", False), ("4", True)),
            (1, 0, 0, 0),
            (1, 3, 0, 0),
        ),
        DecoratedPolygon(
            (("5", False), ("f", True), ("1", True)), (0, 0, 0), (1, 2, 0)
        ),
        DecoratedPolygon((("2", False), ("5", True)), (1, 0), (1, 1)),
        DecoratedPolygon((("3", True), ("f", False)), (1, 0), (1, 1)),
    )
    comm = (("3", "2", 1), ("4", "3", 1))
    T = DecoratedTiling(arcs, polys, comm_arrows=comm)
    return CatalogEntry(
        "delpezzo:Somos5",
        T,
        tiling_to_quiver(T),
        "square, triangle and two digons on a torus with boundary",
    )


def _delpezzo_b2cp1cp1() -> CatalogEntry:
    arcs = ("1", "2", "3", "4", "5", "6", "f", "g")
    polys = (
        DecoratedPolygon(
            (("f", False), ("1", False), ("6", False)), (0, 0, 0), (1, 1, 1)
        ),
        DecoratedPolygon(
            (("2", False), ("3", False), ("5", False), ("1", True)),
            (0, 0, 0, 1),
            (1, 2, 0, 1),
        ),
        DecoratedPolygon(
            (("g", False), ("4", False), ("3", True)), (0, 0, 0), (1, 1, 1)
        ),
        DecoratedPolygon(
            (("5", True), ("6", True), ("2", True), ("4", True)),
            (0, 1, 0, 0),
            (1, 2, 0, 1),
        ),
    )
    T = DecoratedTiling(arcs, polys)
    return CatalogEntry(
        "delpezzo:B2CP1xCP1",
        T,
        tiling_to_quiver(T),
        "two triangles and two squares on a torus with two boundary components",
    )


_FG_B2_TILING = None


def _fg_b2_tiling() -> DecoratedTiling:
    polys = (
        DecoratedPolygon((("1", False), ("2", False)), (1, 0), (0, 0)),
        DecoratedPolygon(
            (("2", True), ("8", True), ("3", True)), (0, 0, 0), (1, 2, 0)
        ),
    )
    return DecoratedTiling(("1", "2", "3", "8"), polys)


def _fg_b2() -> CatalogEntry:
    nodes = [
        ("1", True, True),
        ("2", True, False),
        ("3", True, True),
        ("4", False, True),
        ("5", False, False),
        ("6", False, True),
        ("7", False, True),
        ("8", True, True),
    ]
    par = [("1", "2"), ("2", "3"), ("3", "8"), ("8", "2")]
    plain = [
        ("4", "5"),
        ("5", "6"),
        ("5", "1"),
        ("6", "2"),
        ("2", "5"),
        ("5", "7"),
        ("7", "4"),
    ]
    arrows = [(s, d, "parallel", 1) for s, d in par] + [
        (s, d, "plain", 1) for s, d in plain
    ]
    sides = {
        "1": (((), ()), ((), ("2",))),
        "2": ((("8",), ("3",)), (("1",), ())),
        "3": ((("2",), ("8",)), ((), ())),
        "8": ((("3",), ("2",)), ((), ())),
    }
    q = OrderedQuiver.from_arrows(nodes, arrows, sides)
    return CatalogEntry(
        "fg:B2", _fg_b2_tiling(), q, "rank-2 mixed quiver; digon plus triangle"
    )


def _fg_b3_tiling() -> DecoratedTiling:
    polys = (
        DecoratedPolygon((("A", False), ("B1", False)), (1, 0), (0, 0)),
        DecoratedPolygon((("B1", True), ("B2", False)), (1, 0), (0, 0)),
        DecoratedPolygon(
            (("B2", True), ("D", True), ("C", True)), (0, 0, 0), (1, 2, 0)
        ),
    )
    return DecoratedTiling(("A", "B1", "B2", "C", "D"), polys)


def _fg_b3() -> CatalogEntry:
    nodes = [
        ("A", True, True),
        ("B1", True, False),
        ("B2", True, False),
        ("C", True, True),
        ("D", True, True),
        ("a1", False, True),
        ("a2", False, True),
        ("b11", False, False),
        ("b12", False, False),
        ("b21", False, False),
        ("b22", False, False),
        ("c1", False, True),
        ("c2", False, True),
        ("d1", False, True),
        ("d2", False, True),
    ]
    par = [("A", "B1"), ("B1", "B2"), ("B2", "C"), ("C", "D"), ("D", "B2")]
    plain = [
        ("a1", "b11"),
        ("b11", "b21"),
        ("b21", "c1"),
        ("a2", "b12"),
        ("b12", "b22"),
        ("b22", "c2"),
        ("b12", "d1"),
        ("d1", "a2"),
        ("b22", "d2"),
        ("d2", "b12"),
        ("b11", "b12"),
        ("b21", "b22"),
        ("b12", "a1"),
        ("b22", "b11"),
        ("c2", "b21"),
        ("B1", "b11"),
        ("B2", "b21"),
        ("b11", "A"),
        ("b21", "B1"),
        ("c1", "B2"),
    ]
    arrows = [(s, d, "parallel", 1) for s, d in par] + [
        (s, d, "plain", 1) for s, d in plain
    ]
    sides = {
        "A": (((), ()), ((), ("B1",))),
        "B1": (((), ("B2",)), (("A",), ())),
        "B2": ((("D",), ("C",)), (("B1",), ())),
        "C": ((("B2",), ("D",)), ((), ())),
        "D": ((("C",), ("B2",)), ((), ())),
    }
    q = OrderedQuiver.from_arrows(nodes, arrows, sides)
    return CatalogEntry(
        "fg:B3", _fg_b3_tiling(), q, "rank-3 mixed quiver; two digons plus triangle"
    )


def _hex() -> CatalogEntry:
    """Six big nodes, a square tile glued to a triangle tile along node 6 --
    the only mutable node."""
    nodes = [
        ("1", True, True),
        ("2", True, True),
        ("3", True, True),
        ("4", True, True),
        ("5", True, True),
        ("6", True, False),
    ]
    arrows = [
        ("1", "6", "parallel", 1),
        ("1", "3", "parallel", 1),
        ("3", "2", "parallel", 1),
        ("2", "1", "parallel", 1),
        ("6", "2", "parallel", 1),
        ("6", "4", "parallel", 1),
        ("4", "5", "parallel", 1),
        ("5", "6", "parallel", 1),
        ("6", "3", "crossing", 1),
        ("4", "1", "comm", 1),
    ]
    sides = {
        "1": ((("2",), ("6", "3")), ((), ())),
        "2": ((("6", "3"), ("1",)), ((), ())),
        "3": ((("1", "6"), ("2",)), ((), ())),
        "4": ((("6",), ("5",)), ((), ())),
        "5": ((("4",), ("6",)), ((), ())),
        "6": ((("1",), ("3", "2")), (("5",), ("4",))),
    }
    q = OrderedQuiver.from_arrows(nodes, arrows, sides)
    return CatalogEntry(
        "hex", None, q, "square and triangle tile with one mutable node"
    )


def _nonex() -> CatalogEntry:
    """Heptagon cut by two chords, with two commutative arrows; two flips
    produce an inadmissible commutative-arrow configuration."""
    arcs = ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "A", "B")
    polys = (
        DecoratedPolygon(
            (("s1", False), ("B", False), ("s4", False), ("A", False)),
            (0, 0, 0, 1),
            (1, 3, 0, 0),
        ),
        DecoratedPolygon(
            (("s2", False), ("s3", False), ("B", True)), (0, 0, 0), (1, 2, 0)
        ),
        DecoratedPolygon(
            (("A", True), ("s5", False), ("s6", False), ("s7", False)),
            (0, 0, 0, 1),
            (2, 2, 3, 1),
        ),
    )
    comm = (("B", "s3", 1), ("s3", "A", 1))
    T = DecoratedTiling(arcs, polys, comm_arrows=comm)
    return CatalogEntry(
        "nonex",
        T,
        tiling_to_quiver(T),
        "heptagon with chords whose second flip is inadmissible",
    )


def _pseudocycle() -> CatalogEntry:
    nodes = [("1", True, False), ("2", True, False), ("3", True, False)]
    arrows = [
        ("1", "2", "parallel", 1),
        ("3", "2", "crossing", 1),
        ("3", "1", "parallel", 1),
    ]
    sides = {
        "1": ((("3",), ("2",)), ((), ())),
        "2": ((("3", "1"), ()), ((), ())),
        "3": (((), ("1", "2")), ((), ())),
    }
    q = OrderedQuiver.from_arrows(
        nodes, arrows, sides, self_symmetric=("1", "2", "3")
    )
    return CatalogEntry(
        "pseudocycle", None, q, "transitive triple with one crossing arrow"
    )


def _ffpex(n: int) -> CatalogEntry:
    """Fork on nodes A, B, C1..C(n-2) given by its split-complex exchange
    matrix; the point of return is A and the forkless part of the mutation
    class is empty."""
    if n < 3:
        raise UnknownSeed(f"ffpex({n}) needs at least 3 nodes")
    names = ["A", "B"] + [f"C{i}" for i in range(1, n - 1)]
    nodes = [(m, True, False) for m in names]
    arrows = []

    def arrow(s, d, par, cro):
        if par:
            arrows.append((s, d, "parallel", par))
        if cro:
            arrows.append((s, d, "crossing", cro))

    arrow("B", "A", 2, 1)
    for c in names[2:]:
        arrow("A", c, 3, 3)
        arrow(c, "B", 4, 5)
    for i in range(2, len(names)):
        for j in range(2, i):
            arrow(names[i], names[j], 1, 2)
    q = ColoredQuiver.from_arrows(nodes, arrows)
    return CatalogEntry(f"ffpex({n})", None, q, "abundant fork quiver")


_FIXED_BUILDERS = {
    "digon": _digon,
    "pentagon": _pentagon,
    "delpezzo:P2": _delpezzo_p2,
    "delpezzo:Bl1P2": _delpezzo_bl1p2,
    "delpezzo:CP1xCP1": _delpezzo_cp1cp1,
    "delpezzo:Somos5": _delpezzo_somos5,
    "delpezzo:B2CP1xCP1": _delpezzo_b2cp1cp1,
    "fg:B2": _fg_b2,
    "fg:B3": _fg_b3,
    "hex": _hex,
    "nonex": _nonex,
    "pseudocycle": _pseudocycle,
}

_ALIASES = {
    "delpezzo:Somos4": "delpezzo:Bl1P2",
    "delpezzo:Bl2": "delpezzo:B2CP1xCP1",
}

_FAN_RANGE = range(4, 15)


def catalog_names() -> list[str]:
    """Names of the built-in seeds, fans first."""
    return [f"fan({n})" for n in _FAN_RANGE] + list(_FIXED_BUILDERS) + ["ffpex(4)"]


def _user_seed(name: str) -> CatalogEntry | None:
    directory = os.environ.get("POLYCLUS_CATALOG_DIR")
    if not directory:
        return None
    fname = re.sub(r"[^A-Za-z0-9_.-]", "_", name) + ".json"
    path = os.path.join(directory, fname)
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        T = tiling_loads(text)
        return CatalogEntry(name, T, tiling_to_quiver(T), "user seed (tiling)")
    except Exception:
        pass
    try:
        q = ordered_loads(text)
        return CatalogEntry(name, None, q, "user seed (quiver)")
    except Exception as exc:
        raise UnknownSeed(f"user seed {name} is not a valid tiling/quiver: {exc}")


def catalog_entry(name: str) -> CatalogEntry:
    name = _ALIASES.get(name, name)
    m = re.fullmatch(r"fan\((\d+)\)", name)
    if m:
        return _fan(int(m.group(1)))
    m = re.fullmatch(r"ffpex\((\d+)\)", name)
    if m:
        return _ffpex(int(m.group(1)))
    if name in _FIXED_BUILDERS:
        return _FIXED_BUILDERS[name]()
    user = _user_seed(name)
    if user is not None:
        return user
    raise UnknownSeed(f"unknown seed {name!r}")


def seed(name: str):
    """The (tiling, quiver) pair registered under ``name``."""
    entry = catalog_entry(name)
    return entry.tiling, entry.quiver


def mutable_nodes(q: OrderedQuiver) -> list[str]:
    """Node ids where mutate_st succeeds."""
    out = []
    for node in q.quiver.nodes:
        if node.frozen:
            continue
        try:
            mutate_st(q, node.id)
        except PolyclusError:
            continue
        out.append(node.id)
    return out


# ---------------------------------------------------------------------------
# Somos drivers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SomosState:
    """Sliding window of the last 4 or 5 terms plus the frozen element."""

    values: tuple
    frozen: object
    ring: Mat2Ring
    step: int = 0


def _twist(ring, name):
    if name == "id":
        return lambda x: x
    if name == "s":
        return ring.sigma
    if name == "t":
        return ring.tau
    if name == "st":
        return lambda x: ring.sigma(ring.tau(x))
    raise PolyclusError(f"unknown twist {name}")


_TWIST_NAMES = ("id", "s", "t", "st")


def somos5_step(s: SomosState) -> SomosState:
    """One step of the Somos-5 window map::

        (a1..a5; f) -> (st(a2), a3, a4, a5, st(a2) a1^-1 a5 + st(a3) s(a4) s(a1)^-1 f; f)

    with s = transpose and t = adjugate, st their composition."""
    R = s.ring
    a1, a2, a3, a4, a5 = s.values
    st = lambda x: R.sigma(R.tau(x))
    new = st(a2) * R.inv(a1) * a5 + st(a3) * R.sigma(a4) * R.inv(R.sigma(a1)) * s.frozen
    return SomosState((st(a2), a3, a4, a5, new), s.frozen, R, s.step + 1)


def somos4_step(s: SomosState, convention=("id", "id", "id", "id", "id")) -> SomosState:
    """One step of the Somos-4 recurrence::

        a5 = a4 a1^-1 a2 + a3 t(a3) f s(a1)^-1

    then shift the window.  ``convention`` optionally twists the operands
    (a4, a1, a2, a3, f) by "id" / "s" / "t" / "st" to absorb the relabeling
    ambiguity of the window map; the default is the untwisted recurrence."""
    R = s.ring
    a1, a2, a3, a4 = s.values
    t4, t1, t2, t3, tf = (_twist(R, c) for c in convention)
    b4, b1, b2, b3, bf = t4(a4), t1(a1), t2(a2), t3(a3), tf(s.frozen)
    new = b4 * R.inv(b1) * b2 + b3 * R.tau(b3) * bf * R.inv(R.sigma(b1))
    return SomosState((a2, a3, a4, new), s.frozen, R, s.step + 1)


def somos_run(variant: int, state: SomosState, steps: int, convention=None):
    """Advance ``steps`` times; returns (final_state, list_of_new_values)."""
    out = []
    for _ in range(steps):
        if variant == 5:
            state = somos5_step(state)
        elif variant == 4:
            if convention is None:
                state = somos4_step(state)
            else:
                state = somos4_step(state, convention)
        else:
            raise PolyclusError(f"unknown Somos variant {variant}")
        out.append(state.values[-1])
    return state, out


def identity_somos_state(variant: int, ring=None) -> SomosState:
    ring = ring or Mat2Ring()
    n = 5 if variant == 5 else 4
    return SomosState(tuple(ring.one for _ in range(n)), ring.one, ring)


@dataclass
class ConventionReport:
    """Outcome of fitting the Somos-4 window convention against reference
    terms: the convention found (or None), how many terms matched, and a
    discrepancy record when no convention reproduces the references."""

    convention: tuple | None
    matched: int
    total: int
    discrepancy: dict | None = None

    @property
    def ok(self):
        return self.discrepancy is None


def fit_somos4_convention(state: SomosState, reference: list) -> ConventionReport:
    """Search twist conventions reproducing the reference continuation.

    Tries every assignment of {id, s, t, st} to the five operands of the
    recurrence, keeps those matching the first reference term, then verifies
    the remaining terms.  When nothing survives, the report documents the
    mismatch (reference vs. the untwisted value) instead of patching it."""
    total = len(reference)
    best = None
    for conv in itertools.product(_TWIST_NAMES, repeat=5):
        cur = state
        matched = 0
        for ref in reference:
            try:
                cur = somos4_step(cur, conv)
            except NotInvertible:
                break
            if cur.values[-1] != ref:
                break
            matched += 1
        if best is None or matched > best[1]:
            best = (conv, matched)
        if matched == total:
            return ConventionReport(conv, total, total)
    naive = state
    got = []
    for _ in reference:
        naive = somos4_step(naive)
        got.append(naive.values[-1])
    conv, matched = best
    return ConventionReport(
        None,
        matched,
        total,
        discrepancy={
            "best_convention": conv,
            "matched_terms": matched,
            "first_mismatch_index": matched,
            "expected": str(reference[matched]) if matched < total else None,
            "untwisted_value": str(got[matched]) if matched < total else None,
        },
    )


# ---------------------------------------------------------------------------
# rank-2 finite-type verifier
# ---------------------------------------------------------------------------


@dataclass
class B2Report:
    classes: int
    identities_ok: bool
    points_checked: int
    variables: list
    cycle_length: int


def _random_invertible_mat(ring, rng):
    while True:
        m = ring.matrix(
            [
                [Fraction(rng.randint(-4, 4)), Fraction(rng.randint(-4, 4))]
                for _ in range(2)
            ]
        )
        if m.det() != 0:
            return m


def _random_b2_point(tiling, ring, rng):
    """A random valid evaluation point for the rank-2 seed: invertible
    matrices on the big nodes (validated against the tiling), nonzero
    rationals on the small nodes."""
    while True:
        assignment = {a: _random_invertible_mat(ring, rng) for a in tiling.arcs}
        report = validate_point(tiling, assignment, ring, positivity=False)
        if not report["ok"]:
            continue
        point = dict(assignment)
        for small in ("4", "5", "6", "7"):
            c = Fraction(0)
            while c == 0:
                c = Fraction(rng.randint(-6, 6))
            point[small] = ring.scalar(c)
        return point


def b2_run(n_points=20, rng_seed=0) -> B2Report:
    """Enumerate the mutation class of the rank-2 seed under the alternating
    2/5 mutations, count equivalence classes, and verify the closing
    identities (third big exchange returns tau of the original variable, third
    small exchange returns the original value) at random matrix points."""
    tiling, q0 = seed("fg:B2")
    ring = Mat2Ring()
    rng = random.Random(rng_seed)

    # symbolic tour: mu_2, mu_5, mu_2, mu_5, mu_2, mu_5
    tour = ("2", "5", "2", "5", "2", "5")
    states = [q0]
    exprs = []
    cur = q0
    for node in tour:
        if node == "2":
            exprs.append(("2", mutation_expr(cur, node)))
        else:
            exprs.append(("5", small_mutation_expr(cur, node)))
        cur = mutate_st(cur, node)
        states.append(cur)

    classes: list[OrderedQuiver] = []
    for s in states[:-1]:
        if not any(equivalent(s, c, mode="weaving") for c in classes):
            classes.append(s)
    cycle = equivalent(states[-1], states[0], mode="weaving")

    ok = True
    checked = 0
    while checked < n_points:
        point = _random_b2_point(tiling, ring, rng)
        values = dict(point)
        try:
            for node, expr in exprs:
                values[node] = evaluate(expr, values, ring)
        except NotInvertible:
            continue
        if values["2"] != ring.tau(point["2"]):
            ok = False
        if values["5"] != point["5"]:
            ok = False
        checked += 1

    return B2Report(
        classes=len(classes),
        identities_ok=ok and cycle,
        points_checked=checked,
        variables=[(node, to_text(e)) for node, e in exprs],
        cycle_length=len(tour),
    )


# ---------------------------------------------------------------------------
# Laurent checker
# ---------------------------------------------------------------------------


def _t() -> RatFun:
    return RatFun(Poly((0, 1)))


def _rand_poly_entry(rng) -> RatFun:
    c0 = Fraction(rng.randint(-3, 3))
    c1 = Fraction(rng.choice((-1, 0, 0, 1, 2)))
    return RatFun(Poly((c0, c1)))


def _rand_poly_matrix(ring, rng):
    while True:
        m = ring.matrix(
            [[_rand_poly_entry(rng) for _ in range(2)] for _ in range(2)]
        )
        if m.det():
            return m


def _polygon_angle_exprs(T, skel, p_idx):
    """Distinct canonical-angle expressions of one polygon."""
    from .tiling import canonical_angle

    loop = skel.polygon_loop(p_idx, clockwise=True)
    seen_vertices = []
    for step in loop.steps:
        if step.start not in seen_vertices:
            seen_vertices.append(step.start)
    exprs, texts = [], set()
    for vertex in seen_vertices:
        e = canonical_angle(skel, vertex, p_idx)
        t = to_text(e)
        if t not in texts:
            texts.add(t)
            exprs.append(e)
    return exprs


def _ratfun_nullspace_vector(rows, rng):
    """A nonzero solution of the homogeneous 4-column system over RatFun, with
    free coordinates filled by small random rationals; None if only zero."""
    zero = RatFun(Poly((0,)))
    m = [list(r) for r in rows if any(r)]
    pivots = []  # (row, col)
    row = 0
    for col in range(4):
        pivot = next((r for r in range(row, len(m)) if m[r][col]), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col]
        m[row] = [v / inv for v in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col]:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        pivots.append((row, col))
        row += 1
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(4) if c not in pivot_cols]
    if not free:
        return None
    sol = [zero] * 4
    for c in free:
        sol[c] = RatFun(Poly((Fraction(rng.randint(-3, 3)),)))
    if not any(sol):
        sol[free[0]] = RatFun(Poly((1,)))
    for r, c in pivots:
        acc = zero
        for fc in free:
            acc = acc + m[r][fc] * sol[fc]
        sol[c] = zero - acc
    return sol


def _clear_denominators(ring, entries):
    """Scale a matrix-entry vector by the product of its denominators (a
    central scalar, harmless for the homogeneous angle conditions)."""
    scale = Poly((1,))
    for e in entries:
        if e.den.degree > 0 or e.den.coeffs[0] != 1:
            scale = scale * e.den
    s = RatFun(scale)
    return [e * s for e in entries]


def solve_valid_point(T, ring, rng, max_tries=60):
    """Sample an arc assignment over 2x2 matrices with polynomial entries
    satisfying every angle-symmetry condition of the tiling: polygons are
    processed in order, already-met arcs are reused, all but one new side get
    random polynomial matrices, and the last side is solved from the polygon's
    (linear homogeneous) symmetry conditions."""
    from .tiling import angle_skeleton

    skel = angle_skeleton(T)
    unit = RatFun(Poly((1,)))
    zero = RatFun(Poly((0,)))
    basis = [
        ring.matrix([[unit, zero], [zero, zero]]),
        ring.matrix([[zero, unit], [zero, zero]]),
        ring.matrix([[zero, zero], [unit, zero]]),
        ring.matrix([[zero, zero], [zero, unit]]),
    ]
    for _ in range(max_tries):
        assignment = {}
        ok = True
        for p_idx, poly in enumerate(T.polygons):
            arcs_here = []
            for side in poly.sides:
                if side[0] not in arcs_here:
                    arcs_here.append(side[0])
            exprs = _polygon_angle_exprs(T, skel, p_idx)
            unknown = [a for a in arcs_here if a not in assignment]
            while len(unknown) > 1:
                assignment[unknown.pop(0)] = _rand_poly_matrix(ring, rng)
            if unknown:
                u = unknown[0]
                rows = []
                for e in exprs:
                    row = []
                    for b in basis:
                        assignment[u] = b
                        v = evaluate(e, assignment, ring)
                        row.append(v.b - v.c)
                    rows.append(row)
                del assignment[u]
                sol = _ratfun_nullspace_vector(rows, rng)
                if sol is None:
                    ok = False
                    break
                a, b, c, d = _clear_denominators(ring, sol)
                m = ring.matrix([[a, b], [c, d]])
                if not m.det():
                    ok = False
                    break
                assignment[u] = m
            else:
                for e in exprs:
                    v = evaluate(e, assignment, ring)
                    if v.b - v.c:
                        ok = False
                        break
            if not ok:
                break
        if not ok:
            continue
        report = validate_point(T, assignment, ring, positivity=False)
        if report["ok"]:
            return assignment
    raise PolyclusError("could not sample a valid evaluation point")


def _central_factor(value) -> Poly | None:
    """Numerator polynomial of a central scalar / scalar matrix, if any."""
    if isinstance(value, Mat2):
        if not value.is_scalar():
            return None
        value = value.a
    if isinstance(value, RatFun):
        return value.num
    return None


def _denominator_allowed(e: RatFun, factors) -> bool:
    """True iff every irreducible factor of e's denominator divides one of the
    given central polynomials, i.e. the denominator is a monomial in them."""
    d = e.den
    while d.degree > 0:
        progressed = False
        for f in factors:
            g = poly_gcd(d, f)
            while g.degree > 0:
                d = d // g
                progressed = True
                g = poly_gcd(d, f)
        if not progressed:
            return False
    return True


def _laurent_entries(value, factors) -> bool:
    entries = (
        [value.a, value.b, value.c, value.d]
        if isinstance(value, Mat2)
        else [value]
    )
    return all(
        _denominator_allowed(e, factors)
        for e in entries
        if isinstance(e, RatFun)
    )


def laurent_check(seed_name: str, sequence, n_points=5, rng_seed=0) -> dict:
    """Evaluate the mutation sequence at random valid matrix points over
    rational-function scalars and check the noncommutative Laurent property:
    every computed cluster variable must be a matrix of polynomials divided by
    a central monomial in the initial norms and small variables.  Inadmissible
    sequences propagate their diagnostics."""
    entry = catalog_entry(seed_name)
    q0 = entry.quiver
    if not isinstance(q0, OrderedQuiver):
        raise PolyclusError(f"seed {seed_name} has no ordered quiver")
    if entry.tiling is None:
        raise PolyclusError(f"seed {seed_name} has no tiling to validate points on")
    ring = Mat2Ring(base_scalar=RatFun)
    rng = random.Random(rng_seed)
    sequence = [str(s) for s in sequence]

    big = set(q0.quiver.big_ids())
    report = {
        "seed": seed_name,
        "sequence": sequence,
        "variables": [],
        "violations": [],
        "points": n_points,
    }
    results = {node: True for node in sequence}
    exprs = {}
    for _ in range(n_points):
        point = dict(solve_valid_point(entry.tiling, ring, rng))
        for node in q0.quiver.ids():
            if node in point:
                continue
            if node in big:
                point[node] = _rand_poly_matrix(ring, rng)
            else:
                c = Fraction(0)
                while c == 0:
                    c = Fraction(rng.randint(-5, 5))
                coeffs = (c, Fraction(rng.choice((0, 0, 1))))
                point[node] = ring.scalar(RatFun(Poly(coeffs)))
        # central denominators Laurent monomials may involve: norms of the
        # initial big variables and the initial small variables
        factors = []
        for node, value in point.items():
            f = (
                _central_factor(value.det())
                if node in big
                else _central_factor(value)
            )
            if f is not None and f.degree > 0:
                factors.append(f)
        cur = q0
        try:
            for node in sequence:
                if node in big:
                    e = mutation_expr(cur, node)
                else:
                    e = small_mutation_expr(cur, node)
                exprs[node] = e
                value = evaluate(e, point, ring)
                point[node] = value
                cur = mutate_st(cur, node)
                if not _laurent_entries(value, factors):
                    results[node] = False
                    report["violations"].append(
                        {"node": node, "value": str(value)}
                    )
        except NotInvertible as exc:
            # a degenerate sample point; skip it rather than fail the check
            report["violations"].append({"sample_error": str(exc)})
            continue
    report["variables"] = [
        {"node": node, "expr": to_text(exprs[node]), "laurent": results[node]}
        for node in sequence
    ]
    report["ok"] = all(results.values()) and not any(
        "node" in v for v in report["violations"]
    )
    return report


# ---------------------------------------------------------------------------
# fruitfulness scanner
# ---------------------------------------------------------------------------


def shadow(q) -> ColoredQuiver:
    """Commutative shadow: the underlying colored quiver of an ordered or
    mixed quiver (small nodes dropped, orders forgotten)."""
    if isinstance(q, OrderedQuiver):
        q = q.quiver
    keep = [n for n in q.nodes if n.big]
    ids = {n.id for n in keep}
    entries = {
        (i, j): c for (i, j), c in q._m.items() if i in ids and j in ids
    }
    return ColoredQuiver(keep, entries, q.allow_mixed_two_cycles)


def _violations(q: ColoredQuiver):
    out = []
    seen = set()
    for (i, j), c in q._m.items():
        if (j, i) in seen:
            continue
        seen.add((i, j))
        if abs(c.re - c.im) > 1:
            out.append({"pair": (i, j), "entry": str(c), "kind": "imbalance"})
        if c.re * c.im < 0:
            out.append({"pair": (i, j), "entry": str(c), "kind": "mixed-signs"})
    return out


def is_fork(q: ColoredQuiver):
    """Detect an abundant fork; returns (True, point_of_return) or (False,
    None).  A fork is a complete quiver whose total arrow weights are all at
    least 2, with a node A splitting the rest into an acyclic in-set and
    out-set such that every weight through A is dominated by the direct
    weight from the out-set back to the in-set."""
    ids = list(q.ids())
    n = len(ids)
    if n < 3:
        return False, None

    def weight(i, j):
        # positive part of the skew entry: total multiplicity of i -> j arrows
        c = q.entry(i, j)
        return max(c.re, 0) + max(c.im, 0)

    def direction(i, j):
        w_ij, w_ji = weight(i, j), weight(j, i)
        if w_ij > 0 and w_ji == 0:
            return 1
        if w_ji > 0 and w_ij == 0:
            return -1
        return 0

    for i, j in itertools.combinations(ids, 2):
        if direction(i, j) == 0 or weight(i, j) + weight(j, i) < 2:
            return False, None

    def acyclic(sub):
        pend = {i: sum(1 for j in sub if direction(j, i) == 1) for i in sub}
        left = set(sub)
        while left:
            roots = [i for i in left if pend[i] == 0]
            if not roots:
                return False
            for r in roots:
                left.discard(r)
                for j in left:
                    if direction(r, j) == 1:
                        pend[j] -= 1
        return True

    for a in ids:
        ins = [i for i in ids if i != a and direction(i, a) == 1]
        outs = [i for i in ids if i != a and direction(a, i) == 1]
        if not ins or not outs:
            continue
        if not (acyclic(ins) and acyclic(outs)):
            continue
        dominated = all(
            weight(b, a) < weight(c, b) and weight(a, c) < weight(c, b)
            for b in ins
            for c in outs
            if direction(c, b) == 1
        )
        crossing_back = all(
            direction(c, b) == 1 for b in ins for c in outs
        )
        if dominated and crossing_back:
            return True, a
    return False, None


def fruitfulness_scan(
    q: ColoredQuiver, depth=None, exhaustive=False, max_states=20000
) -> dict:
    """BFS over the mutation class of a commutative shadow with canonical-form
    deduplication.  Flags states whose exchange-matrix entries have parallel /
    crossing counts differing by more than 1 or with mixed signs; fork states
    are only expanded at their point of return.  Raises BudgetExceeded (with
    the partial report) when the state budget runs out before the requested
    depth or exhaustion."""
    if isinstance(q, OrderedQuiver):
        q = shadow(q)
    if depth is None and not exhaustive:
        raise PolyclusError("pass depth=N or exhaustive=True")
    # mixed-sign entries are exactly what the scan is looking for, so states
    # containing them must be materialized rather than rejected
    if not q.allow_mixed_two_cycles:
        q = ColoredQuiver(list(q.nodes), q.entries(), True)

    start_key = canonical_form(q)
    seen = {start_key}
    layer = [(q, [])]
    report = {
        "states": 1,
        "violations": [],
        "forks": [],
        "forkless_states": 0,
        "depth_reached": 0,
        "exhausted": False,
    }

    def note(state, path):
        for v in _violations(state):
            v = dict(v)
            v["path"] = path
            report["violations"].append(v)
        fork, ret = is_fork(state)
        if fork:
            report["forks"].append({"path": path, "return": ret})
        else:
            report["forkless_states"] += 1
        return fork, ret

    fork0, _ = note(q, [])
    d = 0
    while layer:
        if depth is not None and d >= depth:
            break
        nxt = []
        for state, path in layer:
            fork, ret = is_fork(state)
            candidates = [ret] if fork else [n.id for n in state.nodes if not n.frozen]
            for node in candidates:
                try:
                    child = state.mutate(node)
                except PolyclusError:
                    continue
                key = canonical_form(child)
                if key in seen:
                    continue
                seen.add(key)
                report["states"] += 1
                if report["states"] > max_states:
                    report["frontier"] = len(nxt) + 1
                    raise BudgetExceeded("scan budget exhausted", report=report)
                note(child, path + [node])
                nxt.append((child, path + [node]))
        layer = nxt
        if layer:
            d += 1
    report["depth_reached"] = d
    report["exhausted"] = not layer
    if report["exhausted"]:
        report["class_size"] = report["states"]
    return report
