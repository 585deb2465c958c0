"""Formal noncommutative expressions over a quiver algebra.

Elements are finite sums of terms

    (rational coefficient) x (central monomial) x (word of decorated letters)

where a letter is sigma^a tau^b (X_g) or its formal inverse, with a, b in
Z/2Z, and central monomials are products of norm symbols N(X_g) and small
(central) variables with integer exponents.  sigma and tau are commuting
anti-automorphisms that act trivially on the center.

No rewriting modulo centrality relations is performed; identities between
expressions are checked under evaluation homomorphisms (see `evaluate`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import CentralityViolated, Inadmissible, NonMonomial, NotInvertible

# ---------------------------------------------------------------------------
# letters, words, central monomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Letter:
    """sigma^sigma_pow tau^tau_pow (X_generator), optionally inverted."""

    generator: str
    sigma_pow: int = 0
    tau_pow: int = 0
    inverted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sigma_pow", self.sigma_pow % 2)
        object.__setattr__(self, "tau_pow", self.tau_pow % 2)

    def twist(self, sigma=0, tau=0):
        return Letter(
            self.generator,
            self.sigma_pow + sigma,
            self.tau_pow + tau,
            self.inverted,
        )

    def inverse(self):
        return Letter(self.generator, self.sigma_pow, self.tau_pow, not self.inverted)

    def _key(self):
        return (self.generator, self.sigma_pow, self.tau_pow, self.inverted)


def _cancels(a: Letter, b: Letter) -> bool:
    return (
        a.generator == b.generator
        and a.sigma_pow == b.sigma_pow
        and a.tau_pow == b.tau_pow
        and a.inverted != b.inverted
    )


def _concat(w1, w2):
    """Concatenate words, cancelling adjacent exact inverse pairs."""
    out = list(w1)
    for letter in w2:
        if out and _cancels(out[-1], letter):
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


# central monomial: sorted tuple of (("N"|"x", name), exponent)
_EMPTY_CENTRAL = ()


def _central_mul(c1, c2):
    exps = dict(c1)
    for key, e in c2:
        exps[key] = exps.get(key, 0) + e
        if exps[key] == 0:
            del exps[key]
    return tuple(sorted(exps.items()))


def _central_pow(c, n):
    return tuple(sorted((key, e * n) for key, e in c))


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------


class NCExpr:
    """Immutable sum of (coefficient, central monomial, word) terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for (word, central), coeff in (terms or {}).items():
            coeff = Fraction(coeff)
            if not coeff:
                continue
            key = (_concat((), word), tuple(central))
            clean[key] = clean.get(key, 0) + coeff
            if not clean[key]:
                del clean[key]
        self._terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def scalar(cls, q):
        return cls({((), _EMPTY_CENTRAL): Fraction(q)})

    @classmethod
    def gen(cls, name, sigma=0, tau=0, inverted=False):
        letter = Letter(str(name), sigma, tau, inverted)
        return cls({((letter,), _EMPTY_CENTRAL): Fraction(1)})

    @classmethod
    def word(cls, letters, coeff=1, central=_EMPTY_CENTRAL):
        return cls({(tuple(letters), tuple(central)): Fraction(coeff)})

    @classmethod
    def norm_symbol(cls, name, exp=1):
        return cls({((), ((("N", str(name)), exp),)): Fraction(1)})

    @classmethod
    def small_var(cls, name, exp=1):
        return cls({((), ((("x", str(name)), exp),)): Fraction(1)})

    # -- inspection ---------------------------------------------------------

    def terms(self):
        """Iterate (word, central, coefficient) deterministically."""
        def key(item):
            (word, central), _ = item
            return (len(word), tuple(l._key() for l in word), central)

        for (word, central), coeff in sorted(self._terms.items(), key=key):
            yield word, central, coeff

    def is_zero(self):
        return not self._terms

    def is_monomial(self):
        return len(self._terms) == 1

    def is_central(self):
        return all(not word for (word, _c) in self._terms)

    def single_term(self):
        if len(self._terms) != 1:
            raise NonMonomial(f"expected a single-word expression, got {self}")
        ((word, central), coeff), = self._terms.items()
        return word, central, coeff

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, 0) + coeff
        return NCExpr(terms)

    __radd__ = __add__

    def __neg__(self):
        return NCExpr({key: -coeff for key, coeff in self._terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        terms = {}
        for (w1, c1), q1 in self._terms.items():
            for (w2, c2), q2 in other._terms.items():
                key = (_concat(w1, w2), _central_mul(c1, c2))
                terms[key] = terms.get(key, 0) + q1 * q2
        return NCExpr(terms)

    def __rmul__(self, other):
        return _coerce(other) * self

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = NCExpr.scalar(other)
        if not isinstance(other, NCExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    def inverse(self):
        """Formal inverse of a single-letter monomial (coefficient/central
        parts invert exactly; norm symbols get negative exponents)."""
        word, central, coeff = self.single_term()
        if len(word) > 1:
            raise NonMonomial(
                "only single-letter words have a formal inverse; got "
                f"{self}"
            )
        inv_word = tuple(l.inverse() for l in word)
        return NCExpr({(inv_word, _central_pow(central, -1)): 1 / coeff})

    def __repr__(self):
        return f"NCExpr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)


def _coerce(x):
    if isinstance(x, NCExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return NCExpr.scalar(x)
    raise TypeError(f"cannot coerce {x!r} to NCExpr")


# ---------------------------------------------------------------------------
# anti-automorphisms
# ---------------------------------------------------------------------------


def _apply_anti(e: NCExpr, sigma: int, tau: int) -> NCExpr:
    terms = {}
    for (word, central), coeff in e._terms.items():
        new = tuple(l.twist(sigma, tau) for l in reversed(word))
        terms[(new, central)] = terms.get((new, central), 0) + coeff
    return NCExpr(terms)


def apply_sigma(e: NCExpr) -> NCExpr:
    """Anti-automorphism sigma: reverse words, toggle sigma powers."""
    return _apply_anti(e, 1, 0)


def apply_tau(e: NCExpr) -> NCExpr:
    """Anti-automorphism tau: reverse words, toggle tau powers."""
    return _apply_anti(e, 0, 1)


def apply_sigma_tau(e: NCExpr) -> NCExpr:
    """Automorphism sigma.tau (word order preserved, both powers toggle)."""
    terms = {}
    for (word, central), coeff in e._terms.items():
        new = tuple(l.twist(1, 1) for l in word)
        terms[(new, central)] = terms.get((new, central), 0) + coeff
    return NCExpr(terms)


# ---------------------------------------------------------------------------
# norms and the bilinear pairing
# ---------------------------------------------------------------------------


def norm(e: NCExpr) -> NCExpr:
    """Central norm of a monomial word: N(w) = w tau(w), which is the product
    of the letter norms N(X_g)^{+-1} times the square of the central part."""
    word, central, coeff = e.single_term()
    sym = _central_pow(central, 2)
    for letter in word:
        sym = _central_mul(
            sym, ((("N", letter.generator), -1 if letter.inverted else 1),)
        )
    return NCExpr({((), sym): coeff * coeff})


def pair_b(u: NCExpr, v: NCExpr) -> NCExpr:
    """b(u, v) = u tau(v) + v tau(u)."""
    return u * apply_tau(v) + v * apply_tau(u)


# ---------------------------------------------------------------------------
# angle equivalence
# ---------------------------------------------------------------------------


def angle_equivalent(e1: NCExpr, e2: NCExpr) -> bool:
    """True iff the symmetry relations w = sigma(w) of two inverse-free
    monomial words are equivalent: the words are related by a sequence of
    sigma.tau applications and twisted rotations A*B <-> sigma.tau(B)*A,
    possibly after replacing one word by its sigma-image (which leaves the
    relation unchanged)."""
    w1, c1, q1 = e1.single_term()
    w2, c2, q2 = e2.single_term()
    if any(l.inverted for l in w1 + w2):
        raise NonMonomial("angle equivalence requires inverse-free words")
    if (c1, q1) != (c2, q2):
        return False
    canon1 = _word_orbit_canon(w1)
    if canon1 == _word_orbit_canon(w2):
        return True
    flipped = tuple(l.twist(1, 0) for l in reversed(w2))
    return canon1 == _word_orbit_canon(flipped)


def _word_orbit_canon(word):
    seen = set()
    frontier = [tuple(word)]
    while frontier:
        nxt = []
        for w in frontier:
            if w in seen:
                continue
            seen.add(w)
            nxt.append(tuple(l.twist(1, 1) for l in w))
            if w:
                head, rest = w[0], w[1:]
                nxt.append(tuple(l.twist(1, 1) for l in rest) + (head,))
        frontier = nxt
    return min(tuple(l._key() for l in w) for w in seen)


# ---------------------------------------------------------------------------
# mutation formula
# ---------------------------------------------------------------------------


def _side_letter(name, far_fill, color, extra_sigma=0):
    return NCExpr.gen(name, sigma=far_fill + color + extra_sigma, tau=color)


def mutation_expr(q, k) -> NCExpr:
    """Exchange relation for the variable at node ``k`` of an ordered quiver.

    mu(X) = I . prod_{In_bullet} sigma^f st^t(A) . X^{-1}
              . prod_{In_circ reversed} sigma^{f+1} st^t(C)
          + O . prod_{Out_bullet reversed} sigma^{f+1} st^t(B) . sigma(X)^{-1}
              . prod_{Out_circ} sigma^f st^t(D)

    where st = sigma.tau, f is the far node's facing fill, t the arrow color,
    I and O collect norms of commutative in/out partners and small in/out
    variables.

    The quiver object must provide ``side_in(k, fill)`` / ``side_out(k, fill)``
    yielding (generator, far_fill, color) triples in tile order, and
    ``central_in(k)`` / ``central_out(k)`` yielding (kind, name, exponent)
    with kind in {"N", "x"}.
    """
    if hasattr(q, "check_admissible"):
        q.check_admissible(k)  # raises Inadmissible

    def central_product(items):
        out = NCExpr.scalar(1)
        for kind, name, exp in items:
            if kind == "N":
                out = out * NCExpr.norm_symbol(name, exp)
            else:
                out = out * NCExpr.small_var(name, exp)
        return out

    x = NCExpr.gen(k)
    term1 = central_product(q.central_in(k))
    for name, far_fill, color in q.side_in(k, 1):
        term1 = term1 * _side_letter(name, far_fill, color)
    term1 = term1 * x.inverse()
    for name, far_fill, color in reversed(list(q.side_in(k, 0))):
        term1 = term1 * _side_letter(name, far_fill, color, extra_sigma=1)

    term2 = central_product(q.central_out(k))
    for name, far_fill, color in reversed(list(q.side_out(k, 1))):
        term2 = term2 * _side_letter(name, far_fill, color, extra_sigma=1)
    term2 = term2 * apply_sigma(x).inverse()
    for name, far_fill, color in q.side_out(k, 0):
        term2 = term2 * _side_letter(name, far_fill, color)

    return term1 + term2


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


class FractionRing:
    """Commutative evaluation ring over Fraction (sigma = tau = id)."""

    one = Fraction(1)

    @staticmethod
    def scalar(q):
        return Fraction(q)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def sigma(a):
        return a

    @staticmethod
    def tau(a):
        return a

    @staticmethod
    def inv(a):
        if not a:
            raise NotInvertible("division by zero")
        return 1 / a

    @staticmethod
    def is_central(a):
        return True


def evaluate(e: NCExpr, point: dict, ring=FractionRing):
    """Evaluate an expression at a point assigning ring elements to
    generators and small variables.

    ``ring`` must provide one, scalar, add, mul, sigma, tau, inv and may
    provide is_central.  Norm symbols N(X_g) evaluate to x.tau(x); a
    non-central result raises CentralityViolated.
    """

    def letter_value(letter):
        try:
            v = point[letter.generator]
        except KeyError:
            raise KeyError(f"point assigns no value to generator {letter.generator}")
        for _ in range(letter.tau_pow):
            v = ring.tau(v)
        for _ in range(letter.sigma_pow):
            v = ring.sigma(v)
        if letter.inverted:
            v = ring.inv(v)
        return v

    def central_value(kind, name, exp):
        if kind == "N":
            try:
                x = point[name]
            except KeyError:
                raise KeyError(f"point assigns no value to generator {name}")
            v = ring.mul(x, ring.tau(x))
            if hasattr(ring, "is_central") and not ring.is_central(v):
                raise CentralityViolated(
                    f"N({name}) evaluates to a non-central element"
                )
        else:
            try:
                v = point[name]
            except KeyError:
                raise KeyError(f"point assigns no value to variable {name}")
            if not hasattr(v, "__mul__") or isinstance(v, (int, Fraction)):
                v = ring.scalar(v)
        if exp < 0:
            v = ring.inv(v)
            exp = -exp
        out = ring.one
        for _ in range(exp):
            out = ring.mul(out, v)
        return out

    total = None
    for word, central, coeff in e.terms():
        value = ring.scalar(coeff)
        for (kind, name), exp in central:
            value = ring.mul(value, central_value(kind, name, exp))
        for letter in word:
            value = ring.mul(value, letter_value(letter))
        total = value if total is None else ring.add(total, value)
    if total is None:
        total = ring.scalar(0)
    return total


# ---------------------------------------------------------------------------
# canonical text form
# ---------------------------------------------------------------------------


def _letter_text(letter):
    parts = []
    if letter.sigma_pow:
        parts.append("s^1")
    if letter.tau_pow:
        parts.append("t^1")
    parts.append(f"({letter.generator})" + ("^-1" if letter.inverted else ""))
    return " ".join(parts)


def _central_text(central, coeff):
    parts = [str(coeff)]
    for (kind, name), exp in central:
        sym = f"N({name})" if kind == "N" else name
        parts.append(sym if exp == 1 else f"{sym}^{exp}")
    return "[" + " * ".join(parts) + "]"


def to_text(e: NCExpr) -> str:
    if e.is_zero():
        return "[0]"
    chunks = []
    for word, central, coeff in e.terms():
        body = " * ".join(_letter_text(l) for l in word)
        if coeff != 1 or central or not word:
            prefix = _central_text(central, coeff)
            body = f"{prefix} {body}" if body else prefix
        chunks.append(body)
    return " + ".join(chunks)


_LETTER_RE = re.compile(
    r"^(?:s\^(\d+)\s+)?(?:t\^(\d+)\s+)?\(([^()]+)\)(\^-1)?$"
)
_CENTRAL_SYM_RE = re.compile(r"^(?:N\(([^()]+)\)|([^^\s*]+))(?:\^(-?\d+))?$")


def from_text(text: str) -> NCExpr:
    text = text.strip()
    if text == "[0]":
        return NCExpr.zero()
    result = NCExpr.zero()
    for term in text.split(" + "):
        term = term.strip()
        coeff, central = Fraction(1), _EMPTY_CENTRAL
        if term.startswith("["):
            close = term.index("]")
            inner = term[1:close]
            factors = [p.strip() for p in inner.split(" * ") if p.strip()]
            coeff = Fraction(factors[0])
            exps = {}
            for factor in factors[1:]:
                m = _CENTRAL_SYM_RE.match(factor)
                if not m:
                    raise ValueError(f"bad central factor {factor!r}")
                name, plain, exp = m.groups()
                key = ("N", name) if name is not None else ("x", plain)
                exps[key] = exps.get(key, 0) + int(exp or 1)
            central = tuple(sorted((k, v) for k, v in exps.items() if v))
            term = term[close + 1 :].lstrip(" *")
        letters = []
        if term:
            for piece in term.split(" * "):
                m = _LETTER_RE.match(piece.strip())
                if not m:
                    raise ValueError(f"bad letter {piece!r}")
                s, t, gen, inv = m.groups()
                letters.append(
                    Letter(gen, int(s or 0), int(t or 0), inv is not None)
                )
        result = result + NCExpr.word(letters, coeff, central)
    return result
