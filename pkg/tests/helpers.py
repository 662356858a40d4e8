"""Seeded generators and sympy-based reference computations for the tests."""

import random
from itertools import combinations, product

import sympy

from pqnkit.exterior import DifferentialForm, EndomorphismField, MultiVectorField
from pqnkit.ratpoly import Polynomial


def rpoly(rng, n, degree=2, density=0.4, coeffs=(-2, -1, 1, 2)):
    terms = {}
    for e in product(range(degree + 1), repeat=n):
        if sum(e) <= degree and rng.random() < density:
            terms[e] = rng.choice(coeffs)
    return Polynomial(n, terms)


def rfield(rng, n, k, cls=MultiVectorField, degree=2, density=0.4):
    return cls(n, k, {I: rpoly(rng, n, degree, density) for I in combinations(range(n), k)})


def rendo(rng, n, degree=1, density=0.4):
    return EndomorphismField(n, [[rpoly(rng, n, degree, density) for _ in range(n)] for _ in range(n)])


def symbols(n):
    return sympy.symbols(f"x1:{n + 1}")


def to_sympy(p):
    xs = symbols(p.n)
    return sympy.Add(*[sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*[x**e for x, e in zip(xs, m)])
                       for m, c in p.terms.items()])


def from_sympy(expr, n):
    xs = symbols(n)
    poly = sympy.Poly(sympy.expand(expr), *xs)
    return Polynomial(n, {m: sympy.Rational(c) for m, c in poly.terms()}) if expr != 0 else Polynomial.zero(n)


def ref_d(alpha):
    """(d alpha)_{i0..ip} = sum_k (-1)^k d_{ik} alpha_{i0..^ik..ip}, componentwise in sympy."""
    n, p = alpha.n, alpha.degree
    xs = symbols(n)
    comps = {}
    for I in combinations(range(n), p + 1):
        s = 0
        for k, i in enumerate(I):
            rest = I[:k] + I[k + 1:]
            s += (-1) ** k * sympy.diff(to_sympy(alpha[rest]), xs[i])
        comps[I] = s
    return comps


def ref_jacobiator(pi, i, j, k):
    """{x_i,{x_j,x_k}} + cyclic for {f,g} = sum pi^{ab} d_a f d_b g."""
    n = pi.n
    xs = symbols(n)
    P = [[to_sympy(pi[(a, b)]) if a != b else 0 for b in range(n)] for a in range(n)]

    def br(f, g):
        return sum(P[a][b] * sympy.diff(f, xs[a]) * sympy.diff(g, xs[b]) for a in range(n) for b in range(n))

    x = xs
    return sympy.expand(br(x[i], br(x[j], x[k])) + br(x[j], br(x[k], x[i])) + br(x[k], br(x[i], x[j])))


def ref_lie_derivative_1form(X, alpha):
    """(L_X alpha)_j = X(alpha_j) + sum_i alpha_i d_j X^i."""
    n = X.n
    xs = symbols(n)
    Xs = [to_sympy(c) for c in X.coefficients()]
    a = [to_sympy(c) for c in alpha.coefficients()]
    return [sympy.expand(sum(Xs[i] * sympy.diff(a[j], xs[i]) + a[i] * sympy.diff(Xs[i], xs[j]) for i in range(n)))
            for j in range(n)]


def seeded(seed):
    return random.Random(seed)


__all__ = ["rpoly", "rfield", "rendo", "to_sympy", "from_sympy", "ref_d", "ref_jacobiator",
           "ref_lie_derivative_1form", "symbols", "seeded", "DifferentialForm"]
