"""Exact scalars: split-complex integers, rationals, polynomials, rational functions.

The split-complex integers Y = Z[e]/(e^2 - 1) carry the two-colored exchange
matrices; the "half" variant (both coordinates in (1/2)Z with re = im mod 1)
appears for small-small arrows, e.g. the idempotent h = (1+e)/2.
"""

from __future__ import annotations

from fractions import Fraction


class SplitComplexInt:
    """a + b*e with e^2 = 1; coordinates in (1/2)Z with a = b (mod 1).

    Internally stores doubled coordinates so arithmetic stays in ints.
    """

    __slots__ = ("re2", "im2")

    def __init__(self, re=0, im=0):
        re2 = _doubled(re)
        im2 = _doubled(im)
        if (re2 - im2) % 2 != 0:
            raise ValueError("half-integer parts must match: re = im (mod 1)")
        object.__setattr__(self, "re2", re2)
        object.__setattr__(self, "im2", im2)

    @classmethod
    def _raw(cls, re2, im2):
        x = object.__new__(cls)
        object.__setattr__(x, "re2", re2)
        object.__setattr__(x, "im2", im2)
        if (re2 - im2) % 2 != 0:
            raise ValueError("half-integer parts must match: re = im (mod 1)")
        return x

    @property
    def re(self):
        return self.re2 // 2 if self.re2 % 2 == 0 else Fraction(self.re2, 2)

    @property
    def im(self):
        return self.im2 // 2 if self.im2 % 2 == 0 else Fraction(self.im2, 2)

    def is_integral(self):
        return self.re2 % 2 == 0 and self.im2 % 2 == 0

    def __setattr__(self, *a):
        raise AttributeError("SplitComplexInt is immutable")

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re2 == other.re2 and self.im2 == other.im2

    def __hash__(self):
        return hash((self.re2, self.im2))

    def __bool__(self):
        return self.re2 != 0 or self.im2 != 0

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return SplitComplexInt._raw(self.re2 + other.re2, self.im2 + other.im2)

    __radd__ = __add__

    def __neg__(self):
        return SplitComplexInt._raw(-self.re2, -self.im2)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return SplitComplexInt._raw(self.re2 - other.re2, self.im2 - other.im2)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        # (a+be)(c+de) = (ac+bd) + (ad+bc)e; doubled coords pick up a /2
        # which is exact because the parity invariant holds for both factors.
        re4 = self.re2 * other.re2 + self.im2 * other.im2
        im4 = self.re2 * other.im2 + self.im2 * other.re2
        assert re4 % 2 == 0 and im4 % 2 == 0
        return SplitComplexInt._raw(re4 // 2, im4 // 2)

    __rmul__ = __mul__

    def conj(self):
        """e -> -e."""
        return SplitComplexInt._raw(self.re2, -self.im2)

    def __repr__(self):
        return f"SplitComplexInt({self.re!r}, {self.im!r})"

    def __str__(self):
        return to_text(self)


def _doubled(v):
    if isinstance(v, SplitComplexInt):
        raise TypeError("coordinates must be scalar")
    if isinstance(v, int):
        return 2 * v
    f = Fraction(v)
    d = f * 2
    if d.denominator != 1:
        raise ValueError(f"coordinate {v} is not a half-integer")
    return d.numerator


def _coerce(v):
    if isinstance(v, SplitComplexInt):
        return v
    if isinstance(v, int):
        return SplitComplexInt(v, 0)
    if isinstance(v, Fraction):
        return SplitComplexInt(v, 0) if (2 * v).denominator == 1 else NotImplemented
    return NotImplemented


ZERO = SplitComplexInt(0, 0)
ONE = SplitComplexInt(1, 0)
EPS = SplitComplexInt(0, 1)
HALF_H = SplitComplexInt(Fraction(1, 2), Fraction(1, 2))  # h = (1+e)/2, h*h = h


def split_pos_neg(x):
    """Componentwise positive/negative parts: x = x_pos + x_neg.

    Defined on integral values and on half-values whose coordinates share a
    sign (the only halves exchange matrices produce: multiples of (1+e)/2);
    opposite-sign halves would split off a lone half-coordinate.
    """
    rp, rn = max(x.re2, 0), min(x.re2, 0)
    ip, in_ = max(x.im2, 0), min(x.im2, 0)
    if (rp - ip) % 2 != 0:
        raise ValueError(f"positive part of {x} leaves the half-integer lattice")
    return SplitComplexInt._raw(rp, ip), SplitComplexInt._raw(rn, in_)


def eval_at_one(x):
    """Ring homomorphism Y -> Z (or half-integers), e -> 1."""
    s = x.re2 + x.im2
    return s // 2 if s % 2 == 0 else Fraction(s, 2)


def is_positive(x):
    """Membership in Y_{>0} = {a + e*b != 0 | a, b >= 0}."""
    return bool(x) and x.re2 >= 0 and x.im2 >= 0


def to_text(x):
    """Textual form "a+b*e" used in JSON payloads."""
    def fmt(q):
        return str(q)
    if x.im2 == 0:
        return fmt(x.re)
    if x.re2 == 0:
        return f"{fmt(x.im)}*e"
    sign = "+" if x.im2 > 0 else "-"
    im = x.im if x.im2 > 0 else -x.im
    return f"{fmt(x.re)}{sign}{fmt(im)}*e"


def from_text(s):
    s = s.replace(" ", "")
    if "e" not in s:
        return SplitComplexInt(Fraction(s), 0)
    # split into real part and e-part
    body = s
    re = Fraction(0)
    # find the term ending in 'e'
    # forms: "b*e", "a+b*e", "a-b*e", "e", "-e", "a+e", "a-e"
    idx = body.index("e")
    head = body[:idx]
    if head.endswith("*"):
        head = head[:-1]
    # head now like "a+b", "b", "a+", "-"...
    cut = max(head.rfind("+", 1), head.rfind("-", 1))
    if cut == -1:
        re_s, im_s = "", head
    else:
        re_s, im_s = head[:cut], head[cut:]
        if im_s in ("+", "-"):
            im_s += "1"
    if im_s in ("", "+"):
        im_s = "1"
    elif im_s == "-":
        im_s = "-1"
    if re_s:
        re = Fraction(re_s)
    return SplitComplexInt(re, Fraction(im_s))


# ---------------------------------------------------------------------------
# Polynomials and rational functions over Q in one variable t.

class Poly:
    """Dense univariate polynomial over Q; coefficients constant-term first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def t(cls):
        return cls([0, 1])

    @property
    def degree(self):
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        other = _poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = _poly(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        for i, c in enumerate(other.coeffs):
            a[i] += c
        return Poly(a)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = _poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _poly(other) - self

    def __mul__(self, other):
        other = _poly(other)
        if other is NotImplemented:
            return NotImplemented
        if not self or not other:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def divmod(self, other):
        other = _poly(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        den = other.coeffs
        q = [Fraction(0)] * max(len(rem) - len(den) + 1, 0)
        while len(rem) >= len(den):
            c = rem[-1] / den[-1]
            k = len(rem) - len(den)
            q[k] = c
            for i, d in enumerate(den):
                rem[k + i] -= c * d
            while rem and rem[-1] == 0:
                rem.pop()
            if not rem:
                break
        return Poly(q), Poly(rem)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __call__(self, t):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def monic(self):
        if not self:
            return self
        lc = self.coeffs[-1]
        return Poly([c / lc for c in self.coeffs])

    def __str__(self):
        if not self:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append("t" if c == 1 else ("-t" if c == -1 else f"{c}*t"))
            else:
                parts.append(f"t^{i}" if c == 1 else (f"-t^{i}" if c == -1 else f"{c}*t^{i}"))
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    __repr__ = __str__


def _poly(v):
    if isinstance(v, Poly):
        return v
    if isinstance(v, (int, Fraction)):
        return Poly([v])
    return NotImplemented


def poly_gcd(a, b):
    while b:
        a, b = b, a % b
    return a.monic()


class RatFun:
    """Quotient of two Polys, reduced, with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _poly(num)
        den = Poly([1]) if den is None else _poly(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if num:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num // g
                den = den // g
        else:
            den = Poly([1])
        lc = den.coeffs[-1]
        if lc != 1:
            num = num * Fraction(1, 1) * Fraction(lc.denominator, lc.numerator)
            den = den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("RatFun is immutable")

    def is_polynomial(self):
        return self.den.degree == 0

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = _ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = _ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        other = _ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _ratfun(other) - self

    def __mul__(self, other):
        other = _ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError
        return RatFun(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _ratfun(other) / self

    def inv(self):
        return RatFun(self.den, self.num)

    def __call__(self, t):
        d = self.den(t)
        if d == 0:
            raise ZeroDivisionError(f"pole at t={t}")
        return self.num(t) / d

    def __str__(self):
        if self.is_polynomial():
            c = self.den.coeffs[0]
            return str(self.num) if c == 1 else str(self.num * Fraction(1) / c)
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def _ratfun(v):
    if isinstance(v, RatFun):
        return v
    if isinstance(v, Poly):
        return RatFun(v)
    if isinstance(v, (int, Fraction)):
        return RatFun(Poly([v]))
    return NotImplemented
