"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` lives in a fixed ambient dimension ``n`` with
coordinates ``x1..xn`` (0-based index ``i`` in the API is the variable
``x{i+1}`` in text).  Instances are immutable and always canonical: no
stored coefficient is zero, so a polynomial is zero iff it has no terms.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Polynomial",
    "PolynomialParseError",
    "parse_polynomial",
    "format_polynomial",
    "poly_add",
    "poly_mul",
    "poly_partial",
    "poly_eval",
]


def _grlex_key(exps):
    return (sum(exps), exps)


class Polynomial:
    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Sequence[int], object] | None = None):
        if n < 0:
            raise ValueError("dimension must be non-negative")
        self.n = n
        self._hash = None
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise ValueError(f"monomial {exps} does not have length {n}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = Fraction(c)
                if c:
                    clean[exps] = clean.get(exps, 0) + c
                    if not clean[exps]:
                        del clean[exps]
        self._terms = clean

    @classmethod
    def _raw(cls, n, terms):
        # trusted constructor: terms already canonical
        p = object.__new__(cls)
        p.n = n
        p._terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls._raw(n, {})

    @classmethod
    def constant(cls, n: int, c) -> "Polynomial":
        c = Fraction(c)
        return cls._raw(n, {(0,) * n: c} if c else {})

    @classmethod
    def one(cls, n: int) -> "Polynomial":
        return cls.constant(n, 1)

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        """The coordinate function x_{i+1}."""
        if not 0 <= i < n:
            raise IndexError(f"coordinate index {i} out of range for n={n}")
        exps = [0] * n
        exps[i] = 1
        return cls._raw(n, {tuple(exps): Fraction(1)})

    @classmethod
    def parse(cls, text: str, n: int) -> "Polynomial":
        return parse_polynomial(text, n)

    # inspection
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in canonical (descending graded-lex) order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and (0,) * self.n in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.n, Fraction(0))

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.n == other.n and self._terms == other._terms
        if isinstance(other, (int, Rational)):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self.n}, {format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, Rational)):
            return Polynomial.constant(self.n, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v += c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Polynomial._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(self.n)
        if c == 1:
            return self
        return Polynomial._raw(self.n, {m: v * c for m, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Polynomial):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self._terms or not other._terms:
            return Polynomial.zero(self.n)
        out = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = out.get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
        return Polynomial._raw(self.n, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.one(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def partial(self, i: int) -> "Polynomial":
        """Exact partial derivative with respect to x_{i+1}."""
        if not 0 <= i < self.n:
            raise IndexError(f"coordinate index {i} out of range for n={self.n}")
        out = {}
        for m, c in self._terms.items():
            e = m[i]
            if e:
                out[m[:i] + (e - 1,) + m[i + 1:]] = c * e
        return Polynomial._raw(self.n, out)

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.n:
            raise ValueError(f"point has length {len(point)}, expected {self.n}")
        pt = [Fraction(v) for v in point]
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for v, e in zip(pt, m):
                if e:
                    t *= v ** e
            total += t
        return total

    def __call__(self, *point):
        return self.evaluate(point)


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    return p * q


def poly_partial(p: Polynomial, i: int) -> Polynomial:
    return p.partial(i)


def poly_eval(p: Polynomial, point: Sequence) -> Fraction:
    return p.evaluate(point)


# text form -----------------------------------------------------------------


def _format_monomial(exps) -> str:
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(f"x{i + 1}")
        elif e > 1:
            parts.append(f"x{i + 1}^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    """Canonical text, terms in descending graded-lex order.

    >>> format_polynomial(Polynomial(2, {(2, 0): Fraction(3, 2), (0, 0): -1}))
    '3/2*x1^2 - 1'
    """
    if p.is_zero():
        return "0"
    out = []
    for k, (m, c) in enumerate(p.items()):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        mono = _format_monomial(m)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if k == 0:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


class PolynomialParseError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        self.msg = msg
        self.text = text
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {self.line}, column {self.column}")


class _Parser:
    """Recursive descent over the grammar

        expr   := ['-'] term (('+'|'-') term)*
        term   := factor ('*' factor)*
        factor := atom ('^' nat)*
        atom   := rational | var | '(' expr ')'
    """

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.pos = 0

    def error(self, msg, pos=None):
        raise PolynomialParseError(msg, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def nat(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def parse(self) -> Polynomial:
        p = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return p

    def expr(self):
        if self.peek() == "-":
            self.pos += 1
            acc = -self.term()
        else:
            acc = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.factor()
        while self.peek() == "*":
            self.pos += 1
            acc = acc * self.factor()
        return acc

    def factor(self):
        acc = self.atom()
        while self.peek() == "^":
            self.pos += 1
            acc = acc ** self.nat()
        return acc

    def atom(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            p = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return p
        if c == "x":
            start = self.pos
            self.pos += 1
            if not (self.pos < len(self.text) and self.text[self.pos].isdigit()):
                self.error("expected variable index after 'x'")
            k = self.nat()
            if not 1 <= k <= self.n:
                self.error(f"variable x{k} out of range for dimension {self.n}", start)
            return Polynomial.variable(self.n, k - 1)
        if c.isdigit():
            num = self.nat()
            if self.peek() == "/":
                self.pos += 1
                pos = self.pos
                den = self.nat()
                if den == 0:
                    self.error("zero denominator", pos)
                return Polynomial.constant(self.n, Fraction(num, den))
            return Polynomial.constant(self.n, num)
        if not c:
            self.error("unexpected end of input")
        self.error(f"unexpected character {c!r}")


def parse_polynomial(text: str, n: int) -> Polynomial:
    """Parse polynomial text in variables x1..xn.

    >>> str(parse_polynomial("(x1 + x2)*(x1 - x2)", 2))
    'x1^2 - x2^2'
    """
    return _Parser(text, n).parse()


def polynomials_from(values: Iterable, n: int) -> list:
    """Coerce ints, Fractions, strings or Polynomials into Polynomials of dimension n."""
    out = []
    for v in values:
        if isinstance(v, Polynomial):
            if v.n != n:
                raise ValueError(f"dimension mismatch: {v.n} vs {n}")
            out.append(v)
        elif isinstance(v, str):
            out.append(parse_polynomial(v, n))
        else:
            out.append(Polynomial.constant(n, v))
    return out
