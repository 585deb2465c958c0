from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polyclus.clifford import (
    CliffordElem,
    CliffordRing,
    Mat2,
    Mat2Ring,
    cl_alpha,
    cl_inverse,
    cl_sigma_e,
    cl_transpose,
    gamma_membership,
    in_eV,
    in_eV_plus,
    mat2_positive_definite,
    norm_scalar,
    vector_q,
)
from polyclus.errors import CentralityViolated, NotInvertible
from polyclus.numbers import Poly, RatFun

P, Q = 1, 2  # Cl(1,2) throughout unless stated


def E(i):
    return CliffordElem.basis(P, Q, i)


def elems(max_coeff=4):
    coeff = st.integers(-max_coeff, max_coeff)
    return st.builds(
        lambda cs: CliffordElem(P, Q, dict(enumerate(cs))),
        st.lists(coeff, min_size=8, max_size=8),
    )


def vectors():
    coeff = st.integers(-4, 4)
    return st.builds(
        lambda cs: CliffordElem.vector(P, Q, cs),
        st.lists(coeff, min_size=3, max_size=3),
    )


# --- blade arithmetic --------------------------------------------------------


def test_generator_relations():
    assert E(0) * E(0) == 1
    assert E(1) * E(1) == -1
    assert E(2) * E(2) == -1
    assert E(0) * E(1) == -(E(1) * E(0))
    # e1e2 * e2 = q(e2) e1
    assert (E(0) * E(1)) * E(1) == -E(0)


def test_dimension():
    # products of distinct generators give 2^3 independent blades
    blades = set()
    for mask in range(8):
        x = CliffordElem.scalar(P, Q, 1)
        for i in range(3):
            if mask >> i & 1:
                x = x * E(i)
        (blade,) = x.coeffs
        blades.add(blade)
    assert len(blades) == 8


@given(elems(), elems(), elems())
def test_associativity_distributivity(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(vectors(), vectors())
def test_vector_anticommutator(v, w):
    s = v * w + w * v
    assert s.is_scalar()
    bilinear = vector_q(v + w) - vector_q(v) - vector_q(w)
    assert s.scalar_part() == bilinear


# --- involutions -------------------------------------------------------------


@given(elems(), elems())
def test_tau_anti_involution(x, y):
    assert cl_transpose(x * y) == cl_transpose(y) * cl_transpose(x)
    assert cl_transpose(cl_transpose(x)) == x


def test_tau_on_blades():
    e123 = E(0) * E(1) * E(2)
    assert cl_transpose(e123) == E(2) * E(1) * E(0)
    assert cl_transpose(E(0) * E(1)) == E(1) * E(0)


@given(elems(), elems())
def test_alpha_automorphism(x, y):
    assert cl_alpha(x * y) == cl_alpha(x) * cl_alpha(y)
    assert cl_alpha(cl_alpha(x)) == x


@given(elems())
def test_sigma_e_involution_commutes_with_tau(x):
    assert cl_sigma_e(cl_sigma_e(x)) == x
    assert cl_sigma_e(cl_transpose(x)) == cl_transpose(cl_sigma_e(x))


@given(elems(), elems())
def test_sigma_e_anti_homomorphism(x, y):
    assert cl_sigma_e(x * y) == cl_sigma_e(y) * cl_sigma_e(x)


# --- inverses ---------------------------------------------------------------


@given(elems(max_coeff=3))
def test_inverse(x):
    try:
        xi = cl_inverse(x)
    except NotInvertible:
        return
    assert x * xi == 1
    assert xi * x == 1


def test_zero_divisor_not_invertible():
    with pytest.raises(NotInvertible):
        cl_inverse(1 + E(0))  # (1+e1)(1-e1) = 0


# --- Clifford group and cone -------------------------------------------------


def test_vectors_in_gamma():
    v = CliffordElem.vector(P, Q, [1, 2, 0])
    assert vector_q(v) == -3
    assert gamma_membership(v)
    w = CliffordElem.vector(P, Q, [2, 1, 1])
    assert gamma_membership(v * w)


def test_gamma_negative():
    assert not gamma_membership(CliffordElem(P, Q, {0: Fraction(1), 1: Fraction(2)}))


def test_norm_scalar():
    v = CliffordElem.vector(P, Q, [1, 2, 0])
    assert norm_scalar(v) == -3
    with pytest.raises(CentralityViolated):
        norm_scalar(1 + E(0))


@given(vectors().filter(lambda v: vector_q(v) != 0),
       vectors().filter(lambda v: vector_q(v) != 0))
def test_norm_multiplicative_on_gamma(v, w):
    assert norm_scalar(v * w) == norm_scalar(v) * norm_scalar(w)


def test_eV_predicates():
    assert in_eV(CliffordElem.scalar(P, Q, 1))  # e*e = 1
    assert in_eV_plus(CliffordElem.scalar(P, Q, 1))
    # x = e*(e + 2 e2): in eV, but q(v) = 1 - 4 < 0
    v = CliffordElem.vector(P, Q, [1, 2, 0])
    x = E(0) * v
    assert gamma_membership(x)
    assert in_eV(x)
    assert not in_eV_plus(x)
    assert not in_eV(E(0) * E(1) * E(2))


def test_even_part_norm():
    # even part of Cl(1,2) is closed, 4-dimensional, N multiplicative
    even_basis = [
        CliffordElem.scalar(P, Q, 1),
        E(0) * E(1),
        E(0) * E(2),
        E(1) * E(2),
    ]
    x = sum((Fraction(k + 1) * b for k, b in enumerate(even_basis)),
            CliffordElem(P, Q))
    y = sum((Fraction(3 - k) * b for k, b in enumerate(even_basis)),
            CliffordElem(P, Q))
    assert all(g % 2 == 0 for g in (x * y).grades())
    assert norm_scalar(x * y) == norm_scalar(x) * norm_scalar(y)


def test_clifford_ring_centrality():
    ring = CliffordRing(P, Q)
    assert ring.is_central(ring.scalar(5))
    assert not ring.is_central(E(0))


# --- 2x2 matrix ring ---------------------------------------------------------


def mats():
    f = st.integers(-5, 5).map(Fraction)
    return st.builds(Mat2, f, f, f, f)


@given(mats())
def test_adjugate_law(m):
    ring = Mat2Ring()
    n = m * ring.tau(m)
    assert n == ring.scalar(m.det())
    assert ring.is_central(n)


@given(mats())
def test_sigma_tau_commute_mat2(m):
    ring = Mat2Ring()
    assert ring.sigma(ring.tau(m)) == ring.tau(ring.sigma(m))
    assert ring.sigma(ring.sigma(m)) == m
    assert ring.tau(ring.tau(m)) == m


@given(mats(), mats())
def test_mat2_anti_involutions(m, n):
    ring = Mat2Ring()
    assert ring.tau(m * n) == ring.tau(n) * ring.tau(m)
    assert ring.sigma(m * n) == ring.sigma(n) * ring.sigma(m)


def test_mat2_inverse():
    ring = Mat2Ring()
    m = ring.matrix([[1, 2], [3, 4]])
    assert ring.mul(m, ring.inv(m)) == ring.one
    with pytest.raises(NotInvertible):
        ring.inv(ring.matrix([[1, 2], [2, 4]]))


def test_mat2_positive_definite():
    ring = Mat2Ring()
    assert mat2_positive_definite(ring.matrix([[5, -2], [-2, 1]]))
    assert not mat2_positive_definite(ring.matrix([[1, 3], [3, 1]]))
    assert not mat2_positive_definite(ring.matrix([[1, 2], [3, 4]]))


def test_mat2_over_rational_functions():
    def base(c=0):
        return RatFun(Poly([Fraction(c)]))

    ring = Mat2Ring(base)
    t = RatFun(Poly.t())
    m = ring.matrix([[1, t], [t, t * t + 1]])
    n = m * ring.tau(m)
    assert ring.is_central(n)
    assert n.a == RatFun(Poly([Fraction(1)]))  # det = 1
    mi = ring.inv(m)
    assert m * mi == ring.one


# --- point validation and centrality relations -------------------------------

from collections import Counter

from polyclus.clifford import generate_centrality_relations, validate_point
from polyclus.errors import NotDisk
from polyclus.tiling import DecoratedPolygon, DecoratedTiling, punctured_digon

_F, _T = False, True


def triangle_tiling():
    tri = DecoratedPolygon(
        (("a", _F), ("b", _F), ("c", _F)), (0, 0, 0), (1, 2, 0)
    )
    return DecoratedTiling(("a", "b", "c"), (tri,))


def two_tile_disk():
    quad = DecoratedPolygon(
        (("A1", _T), ("A4", _T), ("A3", _T), ("A2", _T)), (0, 0, 0, 1), (1, 3, 0, 0)
    )
    tri = DecoratedPolygon(
        (("A6", _F), ("A5", _F), ("A2", _F)), (1, 0, 1), (1, 2, 0)
    )
    return DecoratedTiling(("A1", "A2", "A3", "A4", "A5", "A6"), (quad, tri))


def fan_tiling(n):
    """Fan triangulation of an n-gon: n-2 triangles chained along n-3
    diagonals, 2n-3 arcs in total."""
    tris = []
    arcs = []
    prev = None
    for k in range(n - 2):
        first = (f"b{k}", _F) if prev is None else (prev, _T)
        if k < n - 3:
            last = (f"d{k}", _F)
            prev = f"d{k}"
        else:
            last = (f"b{n-2}", _F)
        mid = (f"b{k + 1}", _F) if k < n - 3 else (f"b{n - 1}", _F)
        tris.append(DecoratedPolygon((first, mid, last), (0, 0, 0), (1, 2, 0)))
        for side in (first, mid, last):
            if side[0] not in arcs:
                arcs.append(side[0])
    return DecoratedTiling(tuple(arcs), tuple(tris))


def identity_point(tiling, ring):
    return {a: ring.one for a in tiling.arcs}


def test_single_triangle_checks():
    checks = generate_centrality_relations(triangle_tiling())
    assert Counter(c.kind for c in checks) == {"norm": 3, "sigma": 1}
    ring = Mat2Ring()
    report = validate_point(
        triangle_tiling(), identity_point(triangle_tiling(), ring), ring, checks
    )
    assert report["ok"] and report["positive"]
    assert all(c["ok"] for c in report["checks"])


def test_two_tile_disk_checks():
    tiling = two_tile_disk()
    checks = generate_centrality_relations(tiling)
    assert Counter(c.kind for c in checks) == {"norm": 6, "sigma": 2, "pair": 1}
    ring = Mat2Ring()
    report = validate_point(tiling, identity_point(tiling, ring), ring, checks)
    assert report["ok"] and report["positive"]


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_fan_check_counts(n):
    tiling = fan_tiling(n)
    assert len(tiling.arcs) == 2 * n - 3
    assert tiling.surface() == {
        "genus": 0,
        "boundaries": [{"marked": n}],
        "punctures": 0,
    }
    counts = Counter(c.kind for c in generate_centrality_relations(tiling))
    assert counts["norm"] == 2 * n - 3
    assert counts["pair"] == (n - 2) * (n - 3) // 2
    assert counts["sigma"] == n - 2
    # norm + pair conditions together number C(n, 2)
    assert counts["norm"] + counts["pair"] == n * (n - 1) // 2


def test_fan_identity_point_valid():
    tiling = fan_tiling(6)
    checks = generate_centrality_relations(tiling, basepoint=2)
    ring = Mat2Ring()
    report = validate_point(tiling, identity_point(tiling, ring), ring, checks)
    assert report["ok"] and report["positive"]


def test_not_disk_rejected():
    with pytest.raises(NotDisk):
        generate_centrality_relations(punctured_digon())


def test_validate_point_flags_problems():
    tiling = triangle_tiling()
    ring = Mat2Ring()
    point = identity_point(tiling, ring)

    missing = dict(point)
    del missing["a"]
    report = validate_point(tiling, missing, ring)
    assert not report["ok"] and report["missing"] == ["a"]

    singular = dict(point)
    singular["a"] = ring.matrix([[1, 0], [0, 0]])
    report = validate_point(tiling, singular, ring)
    assert not report["ok"]
    assert not report["arcs"]["a"]["invertible"]

    shear = dict(point)
    shear["a"] = ring.matrix([[1, 1], [0, 1]])
    report = validate_point(tiling, shear, ring)
    assert not report["ok"]
    assert report["arcs"]["a"]["invertible"]
    assert any(not a["ok"] for a in report["angles"])

    indefinite = dict(point)
    indefinite["a"] = ring.matrix([[-1, 0], [0, -1]])
    report = validate_point(tiling, indefinite, ring)
    assert report["ok"] and report["positive"] is False


def test_validate_point_clifford_ring():
    tiling = triangle_tiling()
    ring = CliffordRing(1, 2)
    report = validate_point(tiling, identity_point(tiling, ring), ring)
    assert report["ok"] and report["positive"]

    # e2 is in the Clifford group with central norm, but e*e2 is a bivector,
    # so the angles through it leave eV
    e2 = CliffordElem.basis(1, 2, 1)
    assert gamma_membership(e2)
    point = identity_point(tiling, ring)
    point["a"] = e2
    report = validate_point(tiling, point, ring)
    assert report["arcs"]["a"]["gamma"]
    assert not report["ok"]
    assert any(not a["ok"] for a in report["angles"])
