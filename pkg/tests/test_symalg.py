from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polyclus.errors import NonMonomial, NotInvertible
from polyclus.symalg import (
    FractionRing,
    Letter,
    NCExpr,
    angle_equivalent,
    apply_sigma,
    apply_sigma_tau,
    apply_tau,
    evaluate,
    from_text,
    mutation_expr,
    norm,
    pair_b,
    to_text,
)

X = NCExpr.gen


def letters():
    return st.builds(
        Letter,
        st.sampled_from(["A1", "A2", "A3", "B"]),
        st.integers(0, 1),
        st.integers(0, 1),
        st.booleans(),
    )


def words():
    return st.lists(letters(), max_size=4).map(tuple)


def centrals():
    keys = st.sampled_from([("N", "A1"), ("N", "B"), ("x", "x4")])
    return st.dictionaries(keys, st.integers(-2, 2).filter(bool), max_size=2).map(
        lambda d: tuple(sorted(d.items()))
    )


def exprs():
    fractions = st.builds(
        Fraction, st.integers(-9, 9), st.integers(1, 4)
    )
    term = st.tuples(words(), centrals(), fractions)
    return st.lists(term, max_size=3).map(
        lambda ts: sum(
            (NCExpr.word(w, c, ce) for w, ce, c in ts), NCExpr.zero()
        )
    )


# --- anti-automorphisms ------------------------------------------------------


def test_sigma_on_product():
    # sigma(X1 * tau(X2)) = sigma tau(X2) * sigma(X1)
    e = X("X1") * X("X2", tau=1)
    assert apply_sigma(e) == X("X2", 1, 1) * X("X1", 1, 0)


@given(exprs(), exprs())
def test_anti_homomorphism(a, b):
    assert apply_sigma(a * b) == apply_sigma(b) * apply_sigma(a)
    assert apply_tau(a * b) == apply_tau(b) * apply_tau(a)
    assert apply_sigma(a + b) == apply_sigma(a) + apply_sigma(b)


@given(exprs())
def test_involutions_commute(e):
    assert apply_sigma(apply_sigma(e)) == e
    assert apply_tau(apply_tau(e)) == e
    st_both = apply_sigma(apply_tau(e))
    assert st_both == apply_tau(apply_sigma(e))
    assert st_both == apply_sigma_tau(e)


def test_trivial_on_center():
    n = NCExpr.norm_symbol("X1") * NCExpr.small_var("x4", -2) * NCExpr.scalar(3)
    assert apply_tau(n) == n
    assert apply_sigma(n) == n


# --- norms and pairing -------------------------------------------------------


def test_norm_multiplicative_on_words():
    e = X("A1", 1, 1) * X("A3")
    assert norm(e) == NCExpr.norm_symbol("A1") * NCExpr.norm_symbol("A3")


def test_norm_of_inverse_and_central():
    e = NCExpr.word(
        (Letter("A1", inverted=True),), coeff=Fraction(2, 3),
        central=((("x", "x4"), 1),),
    )
    expected = (
        NCExpr.scalar(Fraction(4, 9))
        * NCExpr.norm_symbol("A1", -1)
        * NCExpr.small_var("x4", 2)
    )
    assert norm(e) == expected


def test_norm_rejects_sums():
    with pytest.raises(NonMonomial):
        norm(X("A1") + X("A2"))


@given(exprs(), exprs())
def test_pair_b_symmetric(u, v):
    assert pair_b(u, v) == pair_b(v, u)


def test_pair_b_diagonal():
    u = X("A1") * X("A2", tau=1)
    assert pair_b(u, u) == 2 * (u * apply_tau(u))


# --- local inverse cancellation ----------------------------------------------


def test_inverse_cancels():
    x = X("A1", 1, 0)
    assert x * x.inverse() == 1
    assert x.inverse() * x == 1
    assert (x * X("A2")) * X("A2").inverse() == x


def test_inverse_of_word_rejected():
    with pytest.raises(NonMonomial):
        (X("A1") * X("A2")).inverse()


# --- angle equivalence -------------------------------------------------------


def test_angle_equivalent_sigma_tau():
    e = X("A1") * X("A2", 0, 1)
    assert angle_equivalent(e, apply_sigma_tau(e))


def test_angle_equivalent_rotation():
    a, b = X("A1"), X("A2") * X("A3", 1, 1)
    assert angle_equivalent(a * b, apply_sigma_tau(b) * a)


def test_angle_equivalent_triangle_relation():
    # y_uv = tau(x_vu): y_jk x_ki y_ij  vs  y_ji x_ik y_kj
    ga, gb, gc = "Xjk", "Xki", "Xij"
    w1 = X(ga, 1, 1) * X(gb) * X(gc, 1, 1)
    w2 = X(gc, 0, 1) * X(gb, 1, 0) * X(ga, 0, 1)
    assert angle_equivalent(w1, w2)


def test_angle_equivalent_negative():
    assert not angle_equivalent(X("A1") * X("A2"), X("A2") * X("A1"))
    assert not angle_equivalent(X("A1") * X("A2"), X("A1") * X("A3"))


def test_angle_equivalent_rejects_inverses():
    with pytest.raises(NonMonomial):
        angle_equivalent(X("A1").inverse(), X("A1").inverse())


# --- mutation formula --------------------------------------------------------


class StubOrderedQuiver:
    """Minimal mutation-data provider: sides as (name, far_fill, color)."""

    def __init__(self, side_in, side_out, central_in=(), central_out=()):
        self._in, self._out = side_in, side_out
        self._cin, self._cout = central_in, central_out

    def side_in(self, k, fill):
        return self._in[fill]

    def side_out(self, k, fill):
        return self._out[fill]

    def central_in(self, k):
        return self._cin

    def central_out(self, k):
        return self._cout


def test_mutation_expr_two_triangle_tiling():
    # A2' = tau(A6) A2^-1 tau(A1) + A5 sigma(A2)^-1 A3 sigma tau(A4)
    q = StubOrderedQuiver(
        side_in={1: [("A6", 1, 1)], 0: [("A1", 0, 1)]},
        side_out={1: [("A5", 1, 0)], 0: [("A3", 0, 0), ("A4", 0, 1)]},
    )
    expected = (
        X("A6", 0, 1) * X("A2").inverse() * X("A1", 0, 1)
        + X("A5") * apply_sigma(X("A2")).inverse() * X("A3") * X("A4", 1, 1)
    )
    assert mutation_expr(q, "A2") == expected


def test_mutation_expr_rank2_seed():
    # X2' = x6 sigma(X1) X2^-1 sigma(X8) + x5 sigma(X2)^-1 X3
    q = StubOrderedQuiver(
        side_in={1: [("1", 1, 0)], 0: [("8", 0, 0)]},
        side_out={1: [], 0: [("3", 0, 0)]},
        central_in=[("x", "x6", 1)],
        central_out=[("x", "x5", 1)],
    )
    expected = (
        NCExpr.small_var("x6") * X("1", 1, 0) * X("2").inverse() * X("8", 1, 0)
        + NCExpr.small_var("x5") * apply_sigma(X("2")).inverse() * X("3")
    )
    assert mutation_expr(q, "2") == expected


# --- evaluation --------------------------------------------------------------


def test_evaluate_commutative():
    e = X("A6", 0, 1) * X("A2").inverse() * X("A1", 0, 1) + X("A5") * apply_sigma(
        X("A2")
    ).inverse() * X("A3") * X("A4", 1, 1)
    point = {
        "A1": Fraction(2),
        "A2": Fraction(3),
        "A3": Fraction(5),
        "A4": Fraction(7),
        "A5": Fraction(11),
        "A6": Fraction(13),
    }
    value = evaluate(e, point)
    assert value == Fraction(13 * 2 + 11 * 5 * 7, 3)


def test_evaluate_norm_and_small():
    e = NCExpr.norm_symbol("A1", 2) * NCExpr.small_var("x4", -1) * X("A1")
    value = evaluate(e, {"A1": Fraction(3), "x4": Fraction(2)})
    assert value == Fraction(81 * 3, 2)


def test_evaluate_errors():
    with pytest.raises(KeyError):
        evaluate(X("A1"), {})
    with pytest.raises(NotInvertible):
        evaluate(X("A1").inverse(), {"A1": Fraction(0)})


def test_evaluate_identity_point():
    e = X("A1", 1, 1) * X("A2") * X("A3", 0, 1)
    point = {g: Fraction(1) for g in ("A1", "A2", "A3")}
    assert evaluate(e, point, FractionRing) == 1


# --- text round trip ---------------------------------------------------------


def test_text_forms():
    assert to_text(X("X1", 1, 0)) == "s^1 (X1)"
    e = NCExpr.word(
        (Letter("X2", inverted=True),),
        coeff=Fraction(3, 2),
        central=((("N", "X1"), 2), (("x", "x4"), -1)),
    )
    assert to_text(e) == "[3/2 * N(X1)^2 * x4^-1] (X2)^-1"
    assert to_text(NCExpr.zero()) == "[0]"
    assert to_text(NCExpr.scalar(1)) == "[1]"


@given(exprs())
def test_text_round_trip(e):
    assert from_text(to_text(e)) == e
