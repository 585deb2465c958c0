"""Exact Clifford algebras Cl(p,q) and 2x2 matrix evaluation rings.

Blades are bitmasks over n = p + q anticommuting generators with
e_i^2 = +1 for i < p and -1 otherwise; coefficients are exact rationals.
The distinguished vector e is the first basis vector (requires p >= 1,
so q(e) = +1 and sigma_e needs no division).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import CentralityViolated, NotInvertible

# ---------------------------------------------------------------------------
# blade arithmetic
# ---------------------------------------------------------------------------


def _reorder_sign(a: int, b: int) -> int:
    """Sign from moving the generators of blade b past those of blade a."""
    a >>= 1
    swaps = 0
    while a:
        swaps += (a & b).bit_count()
        a >>= 1
    return -1 if swaps & 1 else 1


class CliffordElem:
    """Element of Cl(p,q) as a sparse blade->Fraction map."""

    __slots__ = ("p", "q", "coeffs")

    def __init__(self, p, q, coeffs=None):
        self.p, self.q = int(p), int(q)
        clean = {}
        for mask, c in (coeffs or {}).items():
            c = _as_fraction(c)
            if c:
                clean[int(mask)] = c
        self.coeffs = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def scalar(cls, p, q, value):
        return cls(p, q, {0: _as_fraction(value)})

    @classmethod
    def vector(cls, p, q, comps):
        comps = list(comps)
        if len(comps) != p + q:
            raise ValueError("vector needs one component per generator")
        return cls(p, q, {1 << i: c for i, c in enumerate(comps)})

    @classmethod
    def basis(cls, p, q, i):
        return cls(p, q, {1 << i: Fraction(1)})

    # -- helpers ------------------------------------------------------------

    @property
    def n(self):
        return self.p + self.q

    def _check(self, other):
        if (self.p, self.q) != (other.p, other.q):
            raise ValueError("signature mismatch")

    def _square_sign(self, mask):
        """Product of q(e_i) over generators i in mask."""
        neg = (mask >> self.p).bit_count()
        return -1 if neg & 1 else 1

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return CliffordElem(self.p, self.q, out)

    __radd__ = __add__

    def __neg__(self):
        return CliffordElem(self.p, self.q, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                sign = _reorder_sign(m1, m2) * self._square_sign(m1 & m2)
                mask = m1 ^ m2
                out[mask] = out.get(mask, 0) + sign * c1 * c2
        return CliffordElem(self.p, self.q, out)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def _coerce(self, other):
        if isinstance(other, CliffordElem):
            return other
        return CliffordElem.scalar(self.p, self.q, other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CliffordElem.scalar(self.p, self.q, other)
        if not isinstance(other, CliffordElem):
            return NotImplemented
        return (self.p, self.q) == (other.p, other.q) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.q, frozenset(self.coeffs.items())))

    def __bool__(self):
        return bool(self.coeffs)

    # -- grading and involutions -------------------------------------------

    def grades(self):
        return {m.bit_count() for m in self.coeffs}

    def grade_part(self, k):
        return CliffordElem(
            self.p, self.q, {m: c for m, c in self.coeffs.items() if m.bit_count() == k}
        )

    def scalar_part(self):
        return self.coeffs.get(0, Fraction(0))

    def is_scalar(self):
        return self.grades() <= {0}

    def is_vector(self):
        return self.grades() <= {1}

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for mask in sorted(self.coeffs):
            c = self.coeffs[mask]
            blade = "*".join(f"e{i + 1}" for i in range(self.n) if mask >> i & 1)
            if not blade:
                parts.append(str(c))
            elif c == 1:
                parts.append(blade)
            elif c == -1:
                parts.append(f"-{blade}")
            else:
                parts.append(f"{c}*{blade}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def cl_mul(x: CliffordElem, y: CliffordElem) -> CliffordElem:
    return x * y


def cl_transpose(x: CliffordElem) -> CliffordElem:
    """Reversal anti-involution tau: sign (-1)^{k(k-1)/2} on grade k."""
    out = {}
    for m, c in x.coeffs.items():
        k = m.bit_count()
        sign = -1 if (k * (k - 1) // 2) & 1 else 1
        out[m] = sign * c
    return CliffordElem(x.p, x.q, out)


def cl_alpha(x: CliffordElem) -> CliffordElem:
    """Grade involution alpha: sign (-1)^k on grade k."""
    return CliffordElem(
        x.p, x.q, {m: -c if m.bit_count() & 1 else c for m, c in x.coeffs.items()}
    )


def cl_sigma_e(x: CliffordElem) -> CliffordElem:
    """sigma_e(x) = e tau(x) e with e the first basis vector (q(e) = +1)."""
    if x.p < 1:
        raise ValueError("sigma_e needs a +1 generator as e")
    e = CliffordElem.basis(x.p, x.q, 0)
    return e * cl_transpose(x) * e


def cl_inverse(x: CliffordElem) -> CliffordElem:
    """Exact inverse via a 2^n x 2^n linear solve in the blade basis."""
    n = x.n
    dim = 1 << n
    # column j of M = coordinates of x * blade_j
    cols = []
    for j in range(dim):
        prod = x * CliffordElem(x.p, x.q, {j: Fraction(1)})
        cols.append(prod.coeffs)
    # solve M y = delta_0 by Gaussian elimination over Fraction
    mat = [[cols[j].get(i, Fraction(0)) for j in range(dim)] for i in range(dim)]
    rhs = [Fraction(1 if i == 0 else 0) for i in range(dim)]
    for col in range(dim):
        pivot = next((r for r in range(col, dim) if mat[r][col]), None)
        if pivot is None:
            raise NotInvertible("element is not invertible")
        mat[col], mat[pivot] = mat[pivot], mat[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = 1 / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        rhs[col] *= inv
        for r in range(dim):
            if r != col and mat[r][col]:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[col])]
                rhs[r] -= f * rhs[col]
    return CliffordElem(x.p, x.q, {j: rhs[j] for j in range(dim)})


def norm_scalar(x: CliffordElem) -> Fraction:
    """N(x) = x tau(x); raises if the result is not a scalar."""
    n = x * cl_transpose(x)
    if not n.is_scalar():
        raise CentralityViolated(f"norm of {x} is not scalar: {n}")
    return n.scalar_part()


def gamma_membership(x: CliffordElem) -> bool:
    """Clifford-group test: alpha(x) v x^{-1} lies in V for all basis v."""
    try:
        xinv = cl_inverse(x)
    except NotInvertible:
        raise
    ax = cl_alpha(x)
    for i in range(x.n):
        v = CliffordElem.basis(x.p, x.q, i)
        if not (ax * v * xinv).is_vector():
            return False
    return True


def vector_q(v: CliffordElem) -> Fraction:
    """Quadratic form of a vector: q(v) = v*v (scalar)."""
    if not v.is_vector():
        raise ValueError("q is defined on vectors")
    return (v * v).scalar_part()


def in_eV(x: CliffordElem) -> bool:
    """True iff x = e*v for some vector v (e = first basis vector)."""
    e = CliffordElem.basis(x.p, x.q, 0)
    return (e * x).is_vector()


def in_eV_plus(x: CliffordElem) -> bool:
    """True iff x = e*v with q(v) > 0 and positive e-component (the proper
    cone of positive-norm vectors containing e)."""
    e = CliffordElem.basis(x.p, x.q, 0)
    v = e * x
    if not v.is_vector():
        return False
    return vector_q(v) > 0 and v.coeffs.get(1, Fraction(0)) > 0


# ---------------------------------------------------------------------------
# evaluation-ring adapters
# ---------------------------------------------------------------------------


class CliffordRing:
    """Evaluation ring over Cl(p,q) with sigma = sigma_e, tau = reversal."""

    def __init__(self, p, q):
        self.p, self.q = p, q
        self.one = CliffordElem.scalar(p, q, 1)

    def scalar(self, c):
        return CliffordElem.scalar(self.p, self.q, c)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def sigma(a):
        return cl_sigma_e(a)

    @staticmethod
    def tau(a):
        return cl_transpose(a)

    @staticmethod
    def inv(a):
        return cl_inverse(a)

    def is_central(self, a):
        for i in range(self.p + self.q):
            v = CliffordElem.basis(self.p, self.q, i)
            if a * v != v * a:
                return False
        return True

    @staticmethod
    def is_sigma_fixed(a):
        return cl_sigma_e(a) == a

    @staticmethod
    def gamma(a):
        return gamma_membership(a)

    @staticmethod
    def angle_ok(a):
        return in_eV(a)

    @staticmethod
    def angle_positive(a):
        return in_eV_plus(a)


class Mat2:
    """2x2 matrix over an exact commutative base (Fraction or RatFun)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_rows(cls, rows):
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    def __add__(self, other):
        return Mat2(
            self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d
        )

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Mat2):
            return Mat2(
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
        return Mat2(self.a * other, self.b * other, self.c * other, self.d * other)

    def __rmul__(self, other):
        return Mat2(other * self.a, other * self.b, other * self.c, other * self.d)

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return (
            self.a == other.a
            and self.b == other.b
            and self.c == other.c
            and self.d == other.d
        )

    def __hash__(self):
        return hash((Mat2, self.a, self.b, self.c, self.d))

    def transpose(self):
        return Mat2(self.a, self.c, self.b, self.d)

    def adjugate(self):
        return Mat2(self.d, -self.b, -self.c, self.a)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def is_scalar(self):
        return self.b == self.c and not _truthy(self.b) and self.a == self.d

    def is_symmetric(self):
        return self.b == self.c

    def __str__(self):
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"

    __repr__ = __str__


def _truthy(x):
    try:
        return bool(x)
    except TypeError:  # pragma: no cover
        return x != 0


class Mat2Ring:
    """Evaluation ring of 2x2 matrices; sigma = transpose, tau = adjugate,
    so x tau(x) = det(x) * identity is always central."""

    def __init__(self, base_scalar=Fraction):
        self._base = base_scalar
        zero, one = base_scalar(0), base_scalar(1)
        self.one = Mat2(one, zero, zero, one)

    def scalar(self, c):
        zero = self._base(0)
        if isinstance(c, Fraction) or isinstance(c, int):
            c = self._base(c)
        return Mat2(c, zero, zero, c)

    def matrix(self, rows):
        return Mat2.from_rows(
            [[self._coerce_entry(v) for v in row] for row in rows]
        )

    def _coerce_entry(self, v):
        if isinstance(v, (int, Fraction)):
            return self._base(v)
        return v

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def sigma(a):
        return a.transpose()

    @staticmethod
    def tau(a):
        return a.adjugate()

    @staticmethod
    def inv(a):
        d = a.det()
        if not _truthy(d):
            raise NotInvertible(f"matrix {a} has zero determinant")
        return a.adjugate() * _invert_base(d)

    @staticmethod
    def is_central(a):
        return a.is_scalar()

    @staticmethod
    def is_sigma_fixed(a):
        return a.is_symmetric()

    @staticmethod
    def gamma(a):
        return _truthy(a.det())

    @staticmethod
    def angle_ok(a):
        return a.is_symmetric()

    @staticmethod
    def angle_positive(a):
        try:
            return mat2_positive_definite(a)
        except TypeError:
            return None


def _invert_base(x):
    if isinstance(x, Fraction):
        return 1 / x
    return x.inv() if hasattr(x, "inv") else 1 / x


def mat2_positive_definite(m: Mat2) -> bool:
    """Sylvester criterion for a symmetric 2x2 matrix over an ordered base."""
    return m.is_symmetric() and m.a > 0 and m.det() > 0


# ---------------------------------------------------------------------------
# centrality relations on disk tilings
# ---------------------------------------------------------------------------


class CentralityCheck:
    """A single condition on an evaluation point: an expression that must be
    central and/or sigma-fixed in the target ring."""

    __slots__ = ("kind", "subject", "expr", "predicate")

    def __init__(self, kind, subject, expr, predicate):
        self.kind = kind
        self.subject = subject
        self.expr = expr
        self.predicate = predicate

    def __repr__(self):
        return f"CentralityCheck({self.kind!r}, {self.subject!r}, {self.predicate!r})"

    def holds(self, assignment, ring):
        from .symalg import evaluate

        try:
            value = evaluate(self.expr, assignment, ring)
        except (NotInvertible, CentralityViolated):
            return False
        if "central" in self.predicate and not ring.is_central(value):
            return False
        if "sigma" in self.predicate and ring.sigma(value) != value:
            return False
        return True


def _dual_tree(T):
    """Adjacency {polygon: [(neighbor, shared interior arc), ...]}; raises
    NotDisk unless the dual graph is a tree."""
    from .errors import NotDisk

    n = len(T.polygons)
    adj = {i: [] for i in range(n)}
    edges = 0
    for arc in T.arcs:
        inc = T.incidences(arc)
        if len(inc) != 2:
            continue
        (pi, _, _), (pj, _, _) = inc
        if pi == pj:
            raise NotDisk("tiling has a self-glued polygon")
        adj[pi].append((pj, arc))
        adj[pj].append((pi, arc))
        edges += 1
    seen = {0}
    stack = [0]
    while stack:
        for j, _ in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != n or edges != n - 1:
        raise NotDisk("dual graph of the tiling is not a tree")
    return adj


def generate_centrality_relations(T, basepoint=0):
    """Finite set of conditions cutting out the seed algebra of a disk
    tiling: central norm per arc, a sigma-fixed canonical angle per polygon,
    and a central pairing per pair of polygons after transporting the angles
    to the base polygon's vertex along the dual tree."""
    from .errors import NotDisk
    from .symalg import NCExpr, norm, pair_b
    from .tiling import SkeletonPath, angle_skeleton, canonical_angle, transition

    surf = T.surface()
    if surf["genus"] != 0 or surf["punctures"] != 0 or len(surf["boundaries"]) != 1:
        raise NotDisk(f"tiling is not a disk: {surf}")
    adj = _dual_tree(T)
    if not 0 <= basepoint < len(T.polygons):
        raise NotDisk(f"no polygon {basepoint} in the tiling")

    skel = angle_skeleton(T)
    loops = [skel.polygon_loop(i, clockwise=True) for i in range(len(T.polygons))]
    base_vertex = {i: loop.start for i, loop in enumerate(loops)}

    def within(p_idx, src, dst):
        """Clockwise boundary path of polygon p_idx from src to dst."""
        if src == dst:
            return SkeletonPath((), base=src)
        loop = skel.polygon_loop(p_idx, start=src, clockwise=True)
        for k, step in enumerate(loop.steps):
            if step.end == dst:
                return SkeletonPath(loop.steps[: k + 1])
        raise NotDisk(f"vertex {dst} not on polygon {p_idx}")

    # path from each polygon's base vertex to the basepoint, via the dual tree
    paths = {basepoint: SkeletonPath((), base=base_vertex[basepoint])}
    stack = [basepoint]
    while stack:
        j = stack.pop()
        for i, arc in adj[j]:
            if i in paths:
                continue
            shared = (arc, 0)
            paths[i] = (
                within(i, base_vertex[i], shared)
                .concat(within(j, shared, base_vertex[j]))
                .concat(paths[j])
            )
            stack.append(i)

    checks = []
    for arc in T.arcs:
        checks.append(
            CentralityCheck("norm", arc, norm(NCExpr.gen(arc)), "central")
        )
    angles = {
        i: canonical_angle(skel, base_vertex[i], i) for i in range(len(T.polygons))
    }
    for i in range(len(T.polygons)):
        checks.append(CentralityCheck("sigma", i, angles[i], "sigma_fixed"))
    moved = {i: transition(paths[i], angles[i]) for i in angles}
    for i in range(len(T.polygons)):
        for j in range(i + 1, len(T.polygons)):
            checks.append(
                CentralityCheck(
                    "pair", (i, j), pair_b(moved[i], moved[j]), "central_sigma"
                )
            )
    return checks


def validate_point(T, assignment, ring, checks=(), positivity=True):
    """Report whether an arc assignment gives a valid evaluation point of the
    tiling's seed algebra in the given ring: every arc value invertible with
    central norm and in the ring's Clifford group, every canonical angle in
    the ring's angle cone (sigma-fixed for 2x2 matrices, eV for Clifford
    rings), plus any extra centrality checks."""
    from .symalg import evaluate
    from .tiling import angle_skeleton, canonical_angle

    report = {"ok": True, "positive": None, "arcs": {}, "angles": [], "checks": []}
    missing = sorted(set(T.arcs) - set(assignment))
    if missing:
        report["ok"] = False
        report["missing"] = missing
        return report

    gamma_test = getattr(ring, "gamma", None)
    for arc in T.arcs:
        x = assignment[arc]
        entry = {}
        try:
            ring.inv(x)
            entry["invertible"] = True
        except NotInvertible:
            entry["invertible"] = False
        entry["norm_central"] = ring.is_central(ring.mul(x, ring.tau(x)))
        if gamma_test is not None and entry["invertible"]:
            entry["gamma"] = bool(gamma_test(x))
        else:
            entry["gamma"] = entry["invertible"]
        report["arcs"][arc] = entry
        if not (entry["invertible"] and entry["norm_central"] and entry["gamma"]):
            report["ok"] = False

    angle_ok = getattr(ring, "angle_ok", None)
    angle_positive = getattr(ring, "angle_positive", None)
    positives = []
    skel = angle_skeleton(T)
    for p_idx in range(len(T.polygons)):
        loop = skel.polygon_loop(p_idx, clockwise=True)
        seen = []
        for step in loop.steps:
            if step.start not in seen:
                seen.append(step.start)
        for vertex in seen:
            expr = canonical_angle(skel, vertex, p_idx)
            entry = {"polygon": p_idx, "vertex": vertex}
            try:
                value = evaluate(expr, assignment, ring)
            except (NotInvertible, CentralityViolated) as err:
                entry["ok"] = False
                entry["error"] = str(err)
                report["ok"] = False
                report["angles"].append(entry)
                continue
            ok = bool(angle_ok(value)) if angle_ok is not None else True
            entry["ok"] = ok
            if not ok:
                report["ok"] = False
            if positivity and angle_positive is not None:
                entry["positive"] = angle_positive(value)
                positives.append(entry["positive"])
            report["angles"].append(entry)
    if positives and all(p is not None for p in positives):
        report["positive"] = all(positives)

    for check in checks:
        ok = check.holds(assignment, ring)
        report["checks"].append(
            {"kind": check.kind, "subject": check.subject, "ok": ok}
        )
        if not ok:
            report["ok"] = False
    return report
