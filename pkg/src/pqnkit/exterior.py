"""Coordinate calculus of multivector fields, forms and (1,1)-tensors on R^n.

Index tuples are 0-based and strictly increasing.  A component ``I`` of a
degree-k field stands for ``d_{I[0]} ^ ... ^ d_{I[k-1]}`` (multivectors) or
``dx_{I[0]} ^ ... ^ dx_{I[k-1]}`` (forms); no 1/k! normalization, so
``alpha(d_i, d_j) = alpha[(i, j)]`` for ``i < j``.

Sign conventions (each fixed in exactly one place):

* ``sharp(pi, xi) = pi(xi, .)``                         (:func:`sharp`)
* ``flat(sigma, X) = sigma(X, .)``                     (:func:`flat`)
* interior products contract the first slot, so
  ``i_{X^Y} phi = phi(X, Y, .)``                       (:func:`interior`)
* Schouten bracket: ``[P, f] = P(df, ...)`` on functions, see
  :func:`schouten_bracket` for the full rule.
* ``sharp_extend`` applies pi^sharp factorwise in reverse order, so
  ``pi^sharp(dx1 ^ dx2) = pi^sharp(dx2) ^ pi^sharp(dx1)``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Mapping, Sequence

from .ratpoly import Polynomial, format_polynomial, polynomials_from

__all__ = [
    "MultiVectorField",
    "DifferentialForm",
    "EndomorphismField",
    "CotangentMap",
    "VectorValuedTwoForm",
    "SkewSymmetryError",
    "format_field",
    "wedge",
    "exterior_derivative",
    "schouten_bracket",
    "lie_bracket",
    "lie_derivative",
    "interior",
    "contract",
    "evaluate_form",
    "sharp",
    "sharp_extend",
    "flat",
    "transpose_apply",
    "i_N",
    "bracket_N",
    "d_N_direct",
    "d_N_cartan",
    "koszul_bracket",
    "koszul_bracket_graded",
    "nijenhuis_torsion",
    "torsion_on",
    "pi_N",
    "omega_N",
    "bundle_map_defect",
    "is_poisson",
]


# sign bookkeeping ------------------------------------------------------------


def sort_sign(indices: Sequence[int]):
    """Return (sign, sorted tuple) for an index sequence; sign 0 on repeats."""
    idx = list(indices)
    sign = 1
    # insertion sort, counting transpositions
    for a in range(1, len(idx)):
        b = a
        while b > 0 and idx[b - 1] > idx[b]:
            idx[b - 1], idx[b] = idx[b], idx[b - 1]
            sign = -sign
            b -= 1
    for a in range(1, len(idx)):
        if idx[a] == idx[a - 1]:
            return 0, None
    return sign, tuple(idx)


def _merge_sign(I, J):
    """Sign of the shuffle taking I + J (both increasing, disjoint) to sorted order."""
    inv = 0
    for i in I:
        for j in J:
            if i > j:
                inv += 1
    return -1 if inv & 1 else 1


def _acc(out, key, poly):
    if not poly:
        return
    v = out.get(key)
    if v is None:
        out[key] = poly
    else:
        v = v + poly
        if v:
            out[key] = v
        else:
            del out[key]


# superfunction helpers on raw component dicts -----------------------------------


def _wedge_comps(A, B):
    out = {}
    for I, a in A.items():
        sI = set(I)
        for J, b in B.items():
            if sI.intersection(J):
                continue
            sign = _merge_sign(I, J)
            prod = a * b
            _acc(out, tuple(sorted(I + J)), prod if sign > 0 else -prod)
    return out


def _odd_left(A, i):
    """Left derivative d/d(theta_i): theta_i moved to the front, then removed."""
    out = {}
    for I, a in A.items():
        if i in I:
            k = I.index(i)
            _acc(out, I[:k] + I[k + 1:], a if k % 2 == 0 else -a)
    return out


def _odd_right(A, i):
    """Right derivative: theta_i moved to the back, then removed."""
    out = {}
    for I, a in A.items():
        if i in I:
            k = I.index(i)
            _acc(out, I[:k] + I[k + 1:], a if (len(I) - 1 - k) % 2 == 0 else -a)
    return out


def _x_partial(A, i):
    out = {}
    for I, a in A.items():
        _acc(out, I, a.partial(i))
    return out


def _scale_comps(A, c):
    if isinstance(c, Polynomial):
        out = {}
        for I, a in A.items():
            _acc(out, I, a * c)
        return out
    c = Fraction(c)
    if not c:
        return {}
    return {I: a.scale(c) for I, a in A.items()}


def _add_comps(A, B, sign=1):
    out = dict(A)
    for I, b in B.items():
        _acc(out, I, b if sign > 0 else -b)
    return out


# tensor field types ---------------------------------------------------------------


class _Alternating:
    """Shared storage for antisymmetric fields (components keyed by index tuples)."""

    __slots__ = ("n", "degree", "_comps")
    _letter = "?"

    def __init__(self, n: int, degree: int, components: Mapping | None = None):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.n = n
        self.degree = degree
        comps = {}
        for idx, val in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(not 0 <= i < n for i in idx):
                raise IndexError(f"index {idx} out of range for n={n}")
            sign, key = sort_sign(idx)
            if not sign:
                continue
            (p,) = polynomials_from([val], n)
            _acc(comps, key, p if sign > 0 else -p)
        self._comps = comps

    @classmethod
    def _raw(cls, n, degree, comps):
        obj = object.__new__(cls)
        obj.n = n
        obj.degree = degree
        obj._comps = comps
        return obj

    @classmethod
    def zero(cls, n: int, degree: int):
        return cls._raw(n, degree, {})

    @classmethod
    def function(cls, f: Polynomial):
        return cls._raw(f.n, 0, {(): f} if f else {})

    @property
    def components(self) -> dict:
        return dict(self._comps)

    def items(self):
        return sorted(self._comps.items())

    def __getitem__(self, idx) -> Polynomial:
        sign, key = sort_sign(tuple(idx))
        if not sign or key not in self._comps:
            return Polynomial.zero(self.n)
        p = self._comps[key]
        return p if sign > 0 else -p

    def is_zero(self) -> bool:
        return not self._comps

    def __bool__(self):
        return bool(self._comps)

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.n != self.n or other.degree != self.degree:
            raise ValueError("dimension or degree mismatch")

    def __add__(self, other):
        if type(other) is type(self) and other.n == self.n and (not other or not self):
            # zero fields of any degree act as the identity (e.g. [f, g] = 0)
            return self if not other else other
        self._check(other)
        return type(self)._raw(self.n, self.degree, _add_comps(self._comps, other._comps))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return type(self)._raw(self.n, self.degree, {I: -a for I, a in self._comps.items()})

    def __mul__(self, c):
        if isinstance(c, Polynomial):
            if c.n != self.n:
                raise ValueError("dimension mismatch")
        elif not isinstance(c, (int, Rational)):
            return NotImplemented
        return type(self)._raw(self.n, self.degree, _scale_comps(self._comps, c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if not self._comps and not other._comps:
            # zero has no meaningful degree (brackets of functions vanish)
            return self.n == other.n
        return self.n == other.n and self.degree == other.degree and self._comps == other._comps

    def __hash__(self):
        if not self._comps:
            return hash((type(self).__name__, self.n))
        return hash((type(self).__name__, self.n, self.degree, frozenset(self._comps.items())))

    def function_part(self) -> Polynomial:
        if self.degree != 0:
            raise ValueError("not a degree-0 field")
        return self._comps.get((), Polynomial.zero(self.n))

    def __repr__(self):
        if not self._comps:
            return f"{type(self).__name__}(n={self.n}, degree={self.degree}, 0)"
        body = " + ".join(
            f"({a})" + ("" if not I else "*" + "^".join(f"{self._letter}{i + 1}" for i in I))
            for I, a in self.items()
        )
        return f"{type(self).__name__}(n={self.n}, degree={self.degree}, {body})"


class MultiVectorField(_Alternating):
    """Degree-k multivector field; degree 1 are vector fields, degree 0 functions."""

    __slots__ = ()
    _letter = "d"

    @classmethod
    def vector(cls, n: int, coefficients: Sequence):
        polys = polynomials_from(coefficients, n)
        if len(polys) != n:
            raise ValueError(f"expected {n} coefficients")
        return cls._raw(n, 1, {(i,): p for i, p in enumerate(polys) if p})

    @classmethod
    def basis(cls, n: int, *indices):
        """The coordinate multivector d_{i1} ^ ... ^ d_{ik}."""
        return cls(n, len(indices), {tuple(indices): 1})

    def coefficient(self, i: int) -> Polynomial:
        if self.degree != 1:
            raise ValueError("coefficient() needs a vector field")
        return self._comps.get((i,), Polynomial.zero(self.n))

    def coefficients(self) -> list:
        return [self.coefficient(i) for i in range(self.n)]

    def apply(self, f: Polynomial) -> Polynomial:
        """Directional derivative X(f)."""
        out = Polynomial.zero(self.n)
        for (i,), a in self._comps.items():
            out = out + a * f.partial(i)
        return out


class DifferentialForm(_Alternating):
    """Degree-p differential form; degree 0 forms are functions."""

    __slots__ = ()
    _letter = "dx"

    @classmethod
    def one_form(cls, n: int, coefficients: Sequence):
        polys = polynomials_from(coefficients, n)
        if len(polys) != n:
            raise ValueError(f"expected {n} coefficients")
        return cls._raw(n, 1, {(i,): p for i, p in enumerate(polys) if p})

    @classmethod
    def basis(cls, n: int, *indices):
        """The coordinate form dx_{i1} ^ ... ^ dx_{ik}."""
        return cls(n, len(indices), {tuple(indices): 1})

    def coefficient(self, i: int) -> Polynomial:
        if self.degree != 1:
            raise ValueError("coefficient() needs a 1-form")
        return self._comps.get((i,), Polynomial.zero(self.n))

    def coefficients(self) -> list:
        return [self.coefficient(i) for i in range(self.n)]

    def pair(self, X: MultiVectorField) -> Polynomial:
        """xi(X) for a 1-form and a vector field."""
        if self.degree != 1 or X.degree != 1:
            raise ValueError("pair() needs a 1-form and a vector field")
        out = Polynomial.zero(self.n)
        for (i,), a in self._comps.items():
            b = X._comps.get((i,))
            if b is not None:
                out = out + a * b
        return out


def _as_vector(obj, n=None):
    if isinstance(obj, MultiVectorField) and obj.degree == 1:
        return obj
    raise TypeError("expected a vector field (MultiVectorField of degree 1)")


def _as_one_form(obj):
    if isinstance(obj, DifferentialForm) and obj.degree == 1:
        return obj
    raise TypeError("expected a 1-form")


class EndomorphismField:
    """(1,1)-tensor N as an n x n polynomial matrix; column j holds N(d_j)."""

    __slots__ = ("n", "matrix")

    def __init__(self, n: int, matrix: Sequence[Sequence]):
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise ValueError(f"endomorphism matrix must be {n}x{n}")
        self.n = n
        self.matrix = tuple(tuple(polynomials_from(row, n)) for row in matrix)

    @classmethod
    def identity(cls, n: int):
        return cls.scalar(n, Polynomial.one(n))

    @classmethod
    def zero(cls, n: int):
        return cls(n, [[0] * n for _ in range(n)])

    @classmethod
    def scalar(cls, n: int, f):
        (f,) = polynomials_from([f], n)
        z = Polynomial.zero(n)
        return cls(n, [[f if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, n: int, columns: Sequence[MultiVectorField]):
        """Build N from the images N(d_0), ..., N(d_{n-1})."""
        cols = [_as_vector(c).coefficients() for c in columns]
        return cls(n, [[cols[j][i] for j in range(n)] for i in range(n)])

    def __getitem__(self, ij) -> Polynomial:
        i, j = ij
        return self.matrix[i][j]

    def column(self, j: int) -> MultiVectorField:
        return MultiVectorField.vector(self.n, [self.matrix[i][j] for i in range(self.n)])

    def apply(self, X: MultiVectorField) -> MultiVectorField:
        X = _as_vector(X)
        out = {}
        for (j,), a in X._comps.items():
            for i in range(self.n):
                m = self.matrix[i][j]
                if m:
                    _acc(out, (i,), m * a)
        return MultiVectorField._raw(self.n, 1, out)

    def transpose(self) -> "EndomorphismField":
        return EndomorphismField(self.n, [[self.matrix[j][i] for j in range(self.n)] for i in range(self.n)])

    def __matmul__(self, other: "EndomorphismField") -> "EndomorphismField":
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                s = Polynomial.zero(n)
                for k in range(n):
                    a, b = self.matrix[i][k], other.matrix[k][j]
                    if a and b:
                        s = s + a * b
                row.append(s)
            rows.append(row)
        return EndomorphismField(n, rows)

    def __add__(self, other):
        return EndomorphismField(self.n, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.matrix, other.matrix)])

    def __sub__(self, other):
        return EndomorphismField(self.n, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.matrix, other.matrix)])

    def __neg__(self):
        return EndomorphismField(self.n, [[-a for a in r] for r in self.matrix])

    def __mul__(self, c):
        return EndomorphismField(self.n, [[a * c for a in r] for r in self.matrix])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(not a for r in self.matrix for a in r)

    def __eq__(self, other):
        if not isinstance(other, EndomorphismField):
            return NotImplemented
        return self.n == other.n and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        rows = "; ".join(", ".join(str(a) for a in r) for r in self.matrix)
        return f"EndomorphismField(n={self.n}, [{rows}])"


class CotangentMap:
    """Bundle map B: T*M -> TM as a matrix; column i holds B(dx_i)."""

    __slots__ = ("n", "matrix")

    def __init__(self, n: int, matrix: Sequence[Sequence]):
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise ValueError(f"bundle map matrix must be {n}x{n}")
        self.n = n
        self.matrix = tuple(tuple(polynomials_from(row, n)) for row in matrix)

    @classmethod
    def of_bivector(cls, pi: MultiVectorField) -> "CotangentMap":
        """pi^sharp, with pi^sharp(dx_i) = pi(dx_i, .)."""
        _check_bivector(pi)
        n = pi.n
        return cls(n, [[pi[(i, j)] if i != j else 0 for i in range(n)] for j in range(n)])

    @classmethod
    def composed(cls, N: EndomorphismField, pi: MultiVectorField) -> "CotangentMap":
        """N o pi^sharp."""
        P = cls.of_bivector(pi)
        return cls(N.n, (EndomorphismField(N.n, N.matrix) @ EndomorphismField(N.n, P.matrix)).matrix)

    def apply(self, xi: DifferentialForm) -> MultiVectorField:
        xi = _as_one_form(xi)
        out = {}
        for (i,), a in xi._comps.items():
            for j in range(self.n):
                m = self.matrix[j][i]
                if m:
                    _acc(out, (j,), m * a)
        return MultiVectorField._raw(self.n, 1, out)

    def is_zero(self) -> bool:
        return all(not a for r in self.matrix for a in r)

    def __eq__(self, other):
        if not isinstance(other, CotangentMap):
            return NotImplemented
        return self.n == other.n and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __sub__(self, other):
        return CotangentMap(self.n, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.matrix, other.matrix)])


class VectorValuedTwoForm:
    """Antisymmetric TM-valued 2-form, stored on the frame: (i, j) -> T(d_i, d_j), i < j."""

    __slots__ = ("n", "_comps")

    def __init__(self, n: int, components: Mapping | None = None):
        self.n = n
        comps = {}
        for (i, j), v in (components or {}).items():
            v = _as_vector(v)
            if i == j:
                if v:
                    raise ValueError("diagonal component of an antisymmetric form must vanish")
                continue
            if i > j:
                i, j, v = j, i, -v
            if v:
                comps[(i, j)] = comps[(i, j)] + v if (i, j) in comps else v
                if not comps[(i, j)]:
                    del comps[(i, j)]
        self._comps = comps

    @property
    def components(self) -> dict:
        return dict(self._comps)

    def items(self):
        return sorted(self._comps.items())

    def __getitem__(self, ij) -> MultiVectorField:
        i, j = ij
        if i == j:
            return MultiVectorField.zero(self.n, 1)
        if i > j:
            return -self[(j, i)]
        return self._comps.get((i, j), MultiVectorField.zero(self.n, 1))

    def evaluate(self, X: MultiVectorField, Y: MultiVectorField) -> MultiVectorField:
        out = MultiVectorField.zero(self.n, 1)
        x, y = X.coefficients(), Y.coefficients()
        for (i, j), v in self._comps.items():
            c = x[i] * y[j] - x[j] * y[i]
            if c:
                out = out + v * c
        return out

    def is_zero(self) -> bool:
        return not self._comps

    def __sub__(self, other):
        comps = dict(self._comps)
        for k, v in other._comps.items():
            comps[k] = comps[k] - v if k in comps else -v
        return VectorValuedTwoForm(self.n, comps)

    def __eq__(self, other):
        if not isinstance(other, VectorValuedTwoForm):
            return NotImplemented
        return self.n == other.n and self._comps == other._comps

    def __repr__(self):
        return f"VectorValuedTwoForm(n={self.n}, {self.items()!r})"


def format_field(t) -> str:
    """Text form such as ``x1*dx2 - dx1^dx3`` or ``x3*d1^d2``; ``0`` for zero."""
    if not t._comps:
        return "0"
    letter = "dx" if isinstance(t, DifferentialForm) else "d"
    parts = []
    for I, a in t.items():
        basis = "^".join(f"{letter}{i + 1}" for i in I)
        if not basis:
            parts.append(format_polynomial(a))
            continue
        if a == 1:
            parts.append(basis)
        elif a == -1:
            parts.append("-" + basis)
        elif len(a) == 1:
            parts.append(f"{format_polynomial(a)}*{basis}")
        else:
            parts.append(f"({format_polynomial(a)})*{basis}")
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


class SkewSymmetryError(ValueError):
    """An operation needed an antisymmetric result and got a nonzero defect."""

    def __init__(self, msg, defect):
        super().__init__(msg)
        self.defect = defect


def _check_bivector(pi):
    if not isinstance(pi, MultiVectorField) or pi.degree != 2:
        raise TypeError("expected a bivector field")


def _same_kind(a, b):
    if type(a) is not type(b):
        raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


# exterior algebra -------------------------------------------------------------------


def wedge(a, b):
    _same_kind(a, b)
    return type(a)._raw(a.n, a.degree + b.degree, _wedge_comps(a._comps, b._comps))


def exterior_derivative(alpha: DifferentialForm) -> DifferentialForm:
    if not isinstance(alpha, DifferentialForm):
        raise TypeError("exterior_derivative needs a DifferentialForm")
    out = {}
    for I, a in alpha._comps.items():
        for j in range(alpha.n):
            if j in I:
                continue
            da = a.partial(j)
            if not da:
                continue
            sign, key = sort_sign((j,) + I)
            _acc(out, key, da if sign > 0 else -da)
    return DifferentialForm._raw(alpha.n, alpha.degree + 1, out)


def interior(X: MultiVectorField, alpha: DifferentialForm) -> DifferentialForm:
    """i_X alpha, contracting the first slot: (i_X alpha)(Y, ...) = alpha(X, Y, ...)."""
    X = _as_vector(X)
    if alpha.degree == 0:
        return DifferentialForm.zero(alpha.n, 0)
    return DifferentialForm._raw(alpha.n, alpha.degree - 1, _contract_first(X._comps, alpha._comps))


def contract(xi: DifferentialForm, P: MultiVectorField) -> MultiVectorField:
    """i_xi P for a 1-form, contracting the first slot: (i_xi P)(eta, ...) = P(xi, eta, ...)."""
    xi = _as_one_form(xi)
    if P.degree == 0:
        return MultiVectorField.zero(P.n, 0)
    return MultiVectorField._raw(P.n, P.degree - 1, _contract_first(xi._comps, P._comps))


def _contract_first(v, A):
    out = {}
    for (i,), c in v.items():
        for I, a in _odd_left(A, i).items():
            _acc(out, I, c * a)
    return out


def evaluate_form(alpha: DifferentialForm, *vectors: MultiVectorField) -> Polynomial:
    """alpha(X_1, ..., X_p) as a polynomial."""
    if len(vectors) != alpha.degree:
        raise ValueError(f"a {alpha.degree}-form takes {alpha.degree} arguments")
    for X in vectors:
        alpha = interior(X, alpha)
    return alpha.function_part()


def _form_on_frame(alpha, slots):
    """alpha evaluated on coordinate vectors d_{slots[0]}, ... ."""
    sign, key = sort_sign(slots)
    if not sign:
        return Polynomial.zero(alpha.n)
    a = alpha._comps.get(key)
    if a is None:
        return Polynomial.zero(alpha.n)
    return a if sign > 0 else -a


# Schouten and Lie brackets ----------------------------------------------------------


def schouten_bracket(P: MultiVectorField, Q: MultiVectorField) -> MultiVectorField:
    """Schouten bracket of multivector fields.

    Extends the Lie bracket of vector fields with [X, f] = X(f), and
    [P, f] = P(df, ...) for a multivector P.  In terms of odd coordinates
    theta_i ~ d_i and the left derivative d/dtheta_i,

        [P, Q] = sum_i  dP/dtheta_i ^ d_i Q  -  (-1)^((p-1)q) dQ/dtheta_i~ ^ d_i P

    where ~ marks the right derivative.  It satisfies
    [Q, P] = (-1)^(pq) [P, Q] and the Leibniz rule
    [P, Q ^ R] = [P, Q] ^ R + (-1)^((p-1)q) Q ^ [P, R].
    """
    if not isinstance(P, MultiVectorField) or not isinstance(Q, MultiVectorField):
        raise TypeError("schouten_bracket needs multivector fields")
    _same_kind(P, Q)
    p, q = P.degree, Q.degree
    deg = p + q - 1
    if deg < 0:
        return MultiVectorField.zero(P.n, 0)
    out = {}
    twist = -1 if ((p - 1) * q) % 2 else 1
    for i in range(P.n):
        dPt = _odd_left(P._comps, i)
        if dPt:
            dQx = _x_partial(Q._comps, i)
            if dQx:
                out = _add_comps(out, _wedge_comps(dPt, dQx))
        dQt = _odd_right(Q._comps, i)
        if dQt:
            dPx = _x_partial(P._comps, i)
            if dPx:
                out = _add_comps(out, _wedge_comps(dQt, dPx), -twist)
    return MultiVectorField._raw(P.n, deg, out)


def lie_bracket(X: MultiVectorField, Y: MultiVectorField) -> MultiVectorField:
    """[X, Y] of vector fields."""
    X, Y = _as_vector(X), _as_vector(Y)
    out = {}
    for j in range(X.n):
        c = X.apply(Y.coefficient(j)) - Y.apply(X.coefficient(j))
        if c:
            out[(j,)] = c
    return MultiVectorField._raw(X.n, 1, out)


def lie_derivative(X: MultiVectorField, alpha: DifferentialForm) -> DifferentialForm:
    """L_X alpha by the Cartan formula i_X d + d i_X."""
    X = _as_vector(X)
    if alpha.degree == 0:
        return DifferentialForm.function(X.apply(alpha.function_part()))
    return interior(X, exterior_derivative(alpha)) + exterior_derivative(interior(X, alpha))


# musical maps ------------------------------------------------------------------------


def sharp(pi: MultiVectorField, xi: DifferentialForm) -> MultiVectorField:
    """pi^sharp(xi) = pi(xi, .)."""
    _check_bivector(pi)
    xi = _as_one_form(xi)
    return contract(xi, pi)


def sharp_extend(pi: MultiVectorField, alpha: DifferentialForm) -> MultiVectorField:
    """Extension of pi^sharp to p-forms, taking factors in reverse order:
    pi^sharp(xi_1 ^ ... ^ xi_p) = pi^sharp(xi_p) ^ ... ^ pi^sharp(xi_1).

    Agrees with :func:`sharp` for p = 1 and is the identity on functions.
    With this ordering pi^sharp carries :func:`koszul_bracket_graded` to
    :func:`schouten_bracket`, and the torsion identity
    T(X, Y) = pi^sharp(phi(X, Y, .)) matches [pi_N, pi_N] = 2 pi^sharp(phi).
    """
    _check_bivector(pi)
    if alpha.degree == 0:
        return MultiVectorField.function(alpha.function_part())
    images = [sharp(pi, DifferentialForm.basis(pi.n, i))._comps for i in range(pi.n)]
    out = {}
    for I, a in alpha._comps.items():
        acc = {(): a}
        for i in reversed(I):
            acc = _wedge_comps(acc, images[i])
            if not acc:
                break
        out = _add_comps(out, acc)
    return MultiVectorField._raw(pi.n, alpha.degree, out)


def flat(sigma: DifferentialForm, X: MultiVectorField) -> DifferentialForm:
    """sigma_flat(X) = sigma(X, .)."""
    if sigma.degree != 2:
        raise ValueError("flat needs a 2-form")
    return interior(X, sigma)


def transpose_apply(N: EndomorphismField, xi: DifferentialForm) -> DifferentialForm:
    """N^T xi, defined by (N^T xi)(X) = xi(N X)."""
    xi = _as_one_form(xi)
    if N.n != xi.n:
        raise ValueError(f"dimension mismatch: {N.n} vs {xi.n}")
    out = {}
    for (i,), a in xi._comps.items():
        for j in range(N.n):
            m = N.matrix[i][j]
            if m:
                _acc(out, (j,), m * a)
    return DifferentialForm._raw(N.n, 1, out)


# Nijenhuis calculus ------------------------------------------------------------------


def i_N(N: EndomorphismField, alpha: DifferentialForm) -> DifferentialForm:
    """(i_N alpha)(X_1..X_p) = sum_k alpha(X_1, .., N X_k, .., X_p); zero on functions."""
    n = alpha.n
    if alpha.degree == 0:
        return DifferentialForm.zero(n, 0)
    out = {}
    for I in combinations(range(n), alpha.degree):
        total = Polynomial.zero(n)
        for k, ik in enumerate(I):
            for m in range(n):
                c = N.matrix[m][ik]
                if not c:
                    continue
                v = _form_on_frame(alpha, I[:k] + (m,) + I[k + 1:])
                if v:
                    total = total + c * v
        if total:
            out[I] = total
    return DifferentialForm._raw(n, alpha.degree, out)


def bracket_N(N: EndomorphismField, X: MultiVectorField, Y: MultiVectorField) -> MultiVectorField:
    """[X, Y]_N = [NX, Y] + [X, NY] - N[X, Y]."""
    return lie_bracket(N.apply(X), Y) + lie_bracket(X, N.apply(Y)) - N.apply(lie_bracket(X, Y))


def _form_with_vector_first(alpha, Z, slots):
    """alpha(Z, d_{slots...}) for a vector field Z."""
    total = Polynomial.zero(alpha.n)
    for (i,), c in Z._comps.items():
        v = _form_on_frame(alpha, (i,) + tuple(slots))
        if v:
            total = total + c * v
    return total


def d_N_direct(N: EndomorphismField, alpha: DifferentialForm) -> DifferentialForm:
    """d_N from the Lie-algebroid differential formula with anchor N and bracket [.,.]_N."""
    n = alpha.n
    p = alpha.degree
    frame = [MultiVectorField.basis(n, i) for i in range(n)]
    images = [N.column(i) for i in range(n)]
    brackets = {}
    out = {}
    for I in combinations(range(n), p + 1):
        total = Polynomial.zero(n)
        for k, ik in enumerate(I):
            rest = I[:k] + I[k + 1:]
            val = _form_on_frame(alpha, rest)
            if val:
                term = images[ik].apply(val)
                total = total + term if k % 2 == 0 else total - term
        for k in range(len(I)):
            for l in range(k + 1, len(I)):
                key = (I[k], I[l])
                if key not in brackets:
                    brackets[key] = bracket_N(N, frame[I[k]], frame[I[l]])
                Z = brackets[key]
                if not Z:
                    continue
                rest = I[:k] + I[k + 1:l] + I[l + 1:]
                term = _form_with_vector_first(alpha, Z, rest)
                total = total + term if (k + l) % 2 == 0 else total - term
        if total:
            out[I] = total
    return DifferentialForm._raw(n, p + 1, out)


def d_N_cartan(N: EndomorphismField, alpha: DifferentialForm) -> DifferentialForm:
    """d_N = i_N o d - d o i_N."""
    return i_N(N, exterior_derivative(alpha)) - exterior_derivative(i_N(N, alpha))


def nijenhuis_torsion(N: EndomorphismField) -> VectorValuedTwoForm:
    """Frame components T(d_i, d_j) = [N d_i, N d_j] - N([N d_i, d_j] + [d_i, N d_j])."""
    n = N.n
    frame = [MultiVectorField.basis(n, i) for i in range(n)]
    comps = {}
    for i, j in combinations(range(n), 2):
        t = torsion_on(N, frame[i], frame[j])
        if t:
            comps[(i, j)] = t
    return VectorValuedTwoForm(n, comps)


def torsion_on(N: EndomorphismField, X: MultiVectorField, Y: MultiVectorField) -> MultiVectorField:
    """The torsion expression evaluated on arbitrary vector fields, straight from brackets."""
    NX, NY = N.apply(X), N.apply(Y)
    inner = lie_bracket(NX, Y) + lie_bracket(X, NY) - N.apply(lie_bracket(X, Y))
    return lie_bracket(NX, NY) - N.apply(inner)


# Koszul brackets -------------------------------------------------------------------


def koszul_bracket(B, alpha: DifferentialForm, beta: DifferentialForm) -> DifferentialForm:
    """[alpha, beta]_B = L_{B alpha} beta - L_{B beta} alpha - d(beta(B alpha)).

    ``B`` is a bivector (meaning pi^sharp) or a :class:`CotangentMap`.
    """
    if isinstance(B, MultiVectorField):
        B = CotangentMap.of_bivector(B)
    alpha, beta = _as_one_form(alpha), _as_one_form(beta)
    Ba, Bb = B.apply(alpha), B.apply(beta)
    return (
        lie_derivative(Ba, beta)
        - lie_derivative(Bb, alpha)
        - exterior_derivative(DifferentialForm.function(beta.pair(Ba)))
    )


def _poisson_matrix(pi):
    n = pi.n
    z = Polynomial.zero(n)
    return [[pi[(i, j)] if i != j else z for j in range(n)] for i in range(n)]


def koszul_bracket_graded(pi: MultiVectorField, alpha: DifferentialForm, beta: DifferentialForm,
                          check: bool = True) -> DifferentialForm:
    """Bracket of forms of any degree induced by a Poisson bivector.

    Generated by [alpha, f] = (pi^sharp alpha)(f) and the 1-form Koszul bracket.
    Sign rules: [beta, alpha] = (-1)^(pq) [alpha, beta] and
    [alpha, beta ^ gamma] = (-1)^((p-1)r) [alpha, beta] ^ gamma + beta ^ [alpha, gamma]
    for gamma of degree r; these are the rules for which ``sharp_extend`` is a
    bracket morphism onto :func:`schouten_bracket`.
    """
    _check_bivector(pi)
    if not isinstance(alpha, DifferentialForm) or not isinstance(beta, DifferentialForm):
        raise TypeError("koszul_bracket_graded needs differential forms")
    _same_kind(alpha, beta)
    if check and not is_poisson(pi):
        raise ValueError("graded Koszul bracket requires a Poisson bivector ([pi, pi] != 0)")
    n = pi.n
    p, q = alpha.degree, beta.degree
    deg = p + q - 1
    if deg < 0:
        return DifferentialForm.zero(n, 0)
    P = _poisson_matrix(pi)
    A, B = alpha._comps, beta._comps
    twist = -1 if ((p - 1) * q) % 2 else 1
    out = {}
    dA_left = {i: _odd_left(A, i) for i in range(n)}
    dB_left = {i: _odd_left(B, i) for i in range(n)}
    dB_right = {i: _odd_right(B, i) for i in range(n)}
    dAx = {l: _x_partial(A, l) for l in range(n)}
    dBx = {l: _x_partial(B, l) for l in range(n)}
    for i in range(n):
        for l in range(n):
            c = P[i][l]
            if not c:
                continue
            # [zeta_i, x_l] = pi^{il}
            if dA_left[i] and dBx[l]:
                out = _add_comps(out, _scale_comps(_wedge_comps(dA_left[i], dBx[l]), c))
            if dB_right[i] and dAx[l]:
                out = _add_comps(out, _scale_comps(_wedge_comps(dB_right[i], dAx[l]), c), -twist)
    # [zeta_i, zeta_j] = d pi^{ij}
    for i in range(n):
        if not dA_left[i]:
            continue
        for j in range(n):
            if not dB_left[j] or not P[i][j]:
                continue
            dpi = {(k,): P[i][j].partial(k) for k in range(n) if P[i][j].partial(k)}
            if not dpi:
                continue
            out = _add_comps(out, _wedge_comps(_wedge_comps(dA_left[i], dpi), dB_left[j]))
    if ((p - 1) * (q - 1)) % 2:
        out = {I: -a for I, a in out.items()}
    return DifferentialForm._raw(n, deg, out)


# compatibility and deformed tensors -------------------------------------------------


def is_poisson(pi: MultiVectorField) -> bool:
    return schouten_bracket(pi, pi).is_zero()


def bundle_map_defect(pi: MultiVectorField, N: EndomorphismField) -> CotangentMap:
    """N o pi^sharp - pi^sharp o N^T, column i evaluated on dx_i."""
    n = pi.n
    cols = []
    for i in range(n):
        dxi = DifferentialForm.basis(n, i)
        v = N.apply(sharp(pi, dxi)) - sharp(pi, transpose_apply(N, dxi))
        cols.append(v.coefficients())
    return CotangentMap(n, [[cols[i][j] for i in range(n)] for j in range(n)])


def pi_N(pi: MultiVectorField, N: EndomorphismField) -> MultiVectorField:
    """The bivector with pi_N^sharp = N o pi^sharp; raises if that map is not skew."""
    defect = bundle_map_defect(pi, N)
    if not defect.is_zero():
        raise SkewSymmetryError("N o pi^sharp != pi^sharp o N^T", defect)
    n = pi.n
    comps = {}
    for i in range(n):
        img = N.apply(sharp(pi, DifferentialForm.basis(n, i)))
        for j in range(i + 1, n):
            c = img.coefficient(j)
            if c:
                comps[(i, j)] = c
    return MultiVectorField._raw(n, 2, comps)


def omega_N(omega: DifferentialForm, N: EndomorphismField) -> DifferentialForm:
    """omega_N(X, Y) = omega(N X, Y); raises if the result is not antisymmetric."""
    if omega.degree != 2:
        raise ValueError("omega_N needs a 2-form")
    n = omega.n
    vals = {}
    for i in range(n):
        Ni = N.column(i)
        for j in range(n):
            vals[(i, j)] = _form_with_vector_first(omega, Ni, (j,))
    defect = {}
    for i in range(n):
        for j in range(i, n):
            s = vals[(i, j)] + vals[(j, i)]
            if s:
                defect[(i, j)] = s
    if defect:
        raise SkewSymmetryError("omega(NX, Y) is not antisymmetric", defect)
    return DifferentialForm._raw(n, 2, {(i, j): vals[(i, j)] for i, j in combinations(range(n), 2) if vals[(i, j)]})
