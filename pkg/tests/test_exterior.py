from itertools import combinations

import pytest

from pqnkit.exterior import (
    CotangentMap,
    DifferentialForm,
    EndomorphismField,
    MultiVectorField,
    SkewSymmetryError,
    bracket_N,
    contract,
    d_N_cartan,
    d_N_direct,
    evaluate_form,
    exterior_derivative,
    flat,
    format_field,
    i_N,
    interior,
    koszul_bracket,
    koszul_bracket_graded,
    lie_bracket,
    lie_derivative,
    nijenhuis_torsion,
    omega_N,
    pi_N,
    schouten_bracket,
    sharp,
    sharp_extend,
    torsion_on,
    transpose_apply,
    wedge,
)
from pqnkit.ratpoly import Polynomial

from .helpers import from_sympy, ref_d, ref_jacobiator, ref_lie_derivative_1form, rendo, rfield, rpoly, seeded


def F(n, deg, comps):
    return DifferentialForm(n, deg, comps)


def V(n, deg, comps):
    return MultiVectorField(n, deg, comps)


def dx(n, *i):
    return DifferentialForm.basis(n, *i)


def d(n, *i):
    return MultiVectorField.basis(n, *i)


def x(n, i):
    return Polynomial.variable(n, i)


PI2 = V(2, 2, {(0, 1): 1})
COMPLEX2 = EndomorphismField(2, [[0, -1], [1, 0]])
NX2 = EndomorphismField(2, [["x2", 0], [0, 0]])


# construction and normalization


def test_components_are_normalized():
    a = F(3, 2, {(1, 0): "x1", (0, 2): 0})
    assert a.components == {(0, 1): Polynomial.parse("-x1", 3)}
    assert F(3, 2, {(1, 1): 5}).is_zero()
    assert F(2, 3, {}).is_zero()


def test_format_field():
    assert format_field(F(3, 1, {(0,): "x1 + 1", (1,): -1})) == "(x1 + 1)*dx1 - dx2"
    assert format_field(V(3, 2, {(0, 1): "-x3"})) == "-x3*d1^d2"
    assert format_field(F(2, 2, {})) == "0"


# wedge and d


def test_wedge_examples():
    assert wedge(dx(2, 0), dx(2, 1))[(0, 1)] == 1
    assert wedge(dx(2, 0), dx(2, 0)).is_zero()
    assert wedge(dx(2, 0) * x(2, 0), dx(2, 1)) == F(2, 2, {(0, 1): "x1"})


def test_wedge_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        wedge(dx(2, 0), d(2, 1))


def test_wedge_graded_commutative():
    rng = seeded(1)
    for _ in range(30):
        n = rng.randint(2, 4)
        p, q = rng.randint(0, n), rng.randint(0, n)
        a, b = rfield(rng, n, p, DifferentialForm), rfield(rng, n, q, DifferentialForm)
        sign = -1 if (p * q) % 2 else 1
        assert wedge(a, b) == wedge(b, a) * sign


def test_d_examples():
    assert exterior_derivative(DifferentialForm.function(x(2, 0))) == dx(2, 0)
    assert exterior_derivative(dx(2, 1) * x(2, 0)) == dx(2, 0, 1)
    assert exterior_derivative(dx(2, 0) * x(2, 1)) == -dx(2, 0, 1)
    assert exterior_derivative(dx(2, 0, 1) * x(2, 0)).is_zero()


def test_d_matches_reference_and_squares_to_zero():
    rng = seeded(2)
    for _ in range(40):
        n = rng.randint(1, 4)
        p = rng.randint(0, n - 1)
        a = rfield(rng, n, p, DifferentialForm, degree=3)
        da = exterior_derivative(a)
        ref = ref_d(a)
        for I in combinations(range(n), p + 1):
            assert da[I] == from_sympy(ref[I], n)
        assert exterior_derivative(da).is_zero()


def test_d_is_a_graded_derivation():
    rng = seeded(3)
    for _ in range(30):
        n = rng.randint(2, 4)
        p, q = rng.randint(0, 2), rng.randint(0, 2)
        a, b = rfield(rng, n, p, DifferentialForm), rfield(rng, n, q, DifferentialForm)
        sign = -1 if p % 2 else 1
        lhs = exterior_derivative(wedge(a, b))
        rhs = wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)) * sign
        assert lhs == rhs


# Schouten bracket


def test_schouten_examples():
    assert schouten_bracket(d(2, 0), d(2, 1) * x(2, 0)) == d(2, 1)
    h = V(3, 2, {(0, 1): "x3"})
    assert schouten_bracket(h, h).is_zero()
    pi = V(4, 2, {(0, 1): 1, (2, 3): "x1"})
    s = schouten_bracket(pi, pi)
    assert s.components == {(1, 2, 3): Polynomial.constant(4, 2)}


def test_schouten_on_functions():
    f = Polynomial.parse("x1^2*x2", 2)
    assert schouten_bracket(PI2, MultiVectorField.function(f)) == sharp(PI2, exterior_derivative(DifferentialForm.function(f)))


def test_poisson_defect_is_twice_the_jacobiator():
    rng = seeded(4)
    for _ in range(15):
        n = rng.randint(3, 4)
        pi = rfield(rng, n, 2, degree=2, density=0.3)
        s = schouten_bracket(pi, pi)
        for i, j, k in combinations(range(n), 3):
            assert s[(i, j, k)] == from_sympy(-2 * ref_jacobiator(pi, i, j, k), n)


def _S(P, Q):
    return schouten_bracket(P, Q) * (-1 if (P.degree - 1) % 2 else 1)


def test_schouten_graded_antisymmetry_leibniz_jacobi():
    rng = seeded(5)
    for _ in range(25):
        n = rng.randint(2, 4)
        p, q, r = (rng.randint(0, 3) for _ in range(3))
        P, Q, R = (rfield(rng, n, k, degree=2, density=0.3) for k in (p, q, r))
        assert schouten_bracket(Q, P) == schouten_bracket(P, Q) * (-1 if (p * q) % 2 else 1)
        lhs = schouten_bracket(P, wedge(Q, R))
        rhs = wedge(schouten_bracket(P, Q), R) + wedge(Q, schouten_bracket(P, R)) * (-1 if ((p - 1) * q) % 2 else 1)
        assert lhs == rhs
        jac = _S(P, _S(Q, R)) - _S(_S(P, Q), R) - _S(Q, _S(P, R)) * (-1 if ((p - 1) * (q - 1)) % 2 else 1)
        assert jac.is_zero()


# Lie derivative and musical maps


def test_lie_derivative_examples():
    assert lie_derivative(d(2, 0), dx(2, 1) * x(2, 0)) == dx(2, 1)
    f = DifferentialForm.function(Polynomial.parse("x1*x2", 2))
    assert lie_derivative(d(2, 1), f) == DifferentialForm.function(x(2, 0))
    assert lie_derivative(d(2, 1) * x(2, 0), dx(2, 1)) == dx(2, 0)


def test_lie_derivative_matches_coordinate_formula():
    rng = seeded(6)
    for _ in range(20):
        n = rng.randint(1, 3)
        X, a = rfield(rng, n, 1), rfield(rng, n, 1, DifferentialForm)
        ref = ref_lie_derivative_1form(X, a)
        assert lie_derivative(X, a).coefficients() == [from_sympy(c, n) for c in ref]


def test_sharp_examples():
    assert sharp(PI2, dx(2, 0)) == d(2, 1)
    assert sharp(PI2, dx(2, 1)) == -d(2, 0)
    assert sharp(PI2, dx(2, 0) * x(2, 1)) == d(2, 1) * x(2, 1)


def test_sharp_is_pi_of_xi_first():
    rng = seeded(7)
    for _ in range(10):
        n = 3
        pi, xi, eta = rfield(rng, n, 2), rfield(rng, n, 1, DifferentialForm), rfield(rng, n, 1, DifferentialForm)
        # pi(xi, eta) computed from components
        val = sum((pi[(i, j)] * (xi.coefficient(i) * eta.coefficient(j)) for i in range(n) for j in range(n) if i != j),
                  Polynomial.zero(n))
        assert eta.pair(sharp(pi, xi)) == val


def test_sharp_extend_examples():
    f = Polynomial.parse("x1 + 3", 2)
    assert sharp_extend(PI2, DifferentialForm.function(f)) == MultiVectorField.function(f)
    assert sharp_extend(PI2, dx(2, 0, 1)) == -d(2, 0, 1)
    assert sharp_extend(MultiVectorField.zero(3, 2), dx(3, 0, 2)).is_zero()


def test_sharp_extend_reverses_factor_order():
    rng = seeded(8)
    for _ in range(10):
        n = 3
        pi = rfield(rng, n, 2)
        a, b = rfield(rng, n, 1, DifferentialForm), rfield(rng, n, 1, DifferentialForm)
        assert sharp_extend(pi, wedge(a, b)) == wedge(sharp(pi, b), sharp(pi, a))


def test_flat_and_interior():
    sigma = dx(2, 0, 1)
    assert flat(sigma, d(2, 0)) == dx(2, 1)
    phi = dx(3, 0, 1, 2)
    assert interior(d(3, 1), interior(d(3, 0), phi)) == dx(3, 2)
    assert evaluate_form(phi, d(3, 0), d(3, 1), d(3, 2)) == 1
    assert contract(dx(2, 0), PI2) == d(2, 1)


# N-operations


def test_transpose_apply_examples():
    assert transpose_apply(EndomorphismField.identity(2), dx(2, 0)) == dx(2, 0)
    assert transpose_apply(COMPLEX2, dx(2, 0)) == -dx(2, 1)
    assert transpose_apply(EndomorphismField.zero(2), dx(2, 0) * x(2, 1)).is_zero()


def test_i_N_examples():
    f = DifferentialForm.function(x(2, 0))
    assert i_N(NX2, f).is_zero()
    assert i_N(EndomorphismField.identity(2), dx(2, 0, 1)) == dx(2, 0, 1) * 2
    assert i_N(COMPLEX2, dx(2, 0)) == -dx(2, 1)


def test_bracket_N_examples():
    assert bracket_N(EndomorphismField.identity(2), d(2, 0), d(2, 1) * x(2, 0)) == d(2, 1)
    assert bracket_N(NX2, d(2, 0), d(2, 1)) == -d(2, 0)
    assert bracket_N(EndomorphismField.zero(2), d(2, 0) * x(2, 1), d(2, 1)).is_zero()


@pytest.mark.parametrize("dN", [d_N_direct, d_N_cartan])
def test_d_N_examples(dN):
    ident = EndomorphismField.identity(2)
    assert dN(ident, dx(2, 1) * x(2, 0)) == dx(2, 0, 1)
    assert dN(NX2, DifferentialForm.function(x(2, 0))) == dx(2, 0) * x(2, 1)
    assert dN(NX2, dx(2, 0) * x(2, 1)) == dx(2, 0, 1) * x(2, 1)
    assert dN(EndomorphismField.zero(2), dx(2, 0) * x(2, 1)).is_zero()


def test_d_N_on_closed_form():
    rng = seeded(9)
    for _ in range(10):
        n = 3
        N = rendo(rng, n)
        a = exterior_derivative(rfield(rng, n, 1, DifferentialForm))
        assert d_N_cartan(N, a) == -exterior_derivative(i_N(N, a))


def test_d_N_direct_equals_cartan():
    rng = seeded(10)
    for _ in range(40):
        n = rng.randint(1, 3)
        N = rendo(rng, n, degree=2)
        a = rfield(rng, n, rng.randint(0, n), DifferentialForm)
        assert d_N_direct(N, a) == d_N_cartan(N, a)


# torsion


def test_torsion_examples():
    assert nijenhuis_torsion(COMPLEX2).is_zero()
    assert nijenhuis_torsion(EndomorphismField.scalar(2, x(2, 0))).is_zero()
    T = nijenhuis_torsion(NX2)
    assert T[(0, 1)] == d(2, 0) * x(2, 1)
    assert T[(1, 0)] == -(d(2, 0) * x(2, 1))


def test_torsion_is_tensorial():
    rng = seeded(11)
    for _ in range(10):
        n = 3
        N = rendo(rng, n)
        X, Y = rfield(rng, n, 1, degree=1), rfield(rng, n, 1, degree=1)
        f = rpoly(rng, n, 1)
        T = nijenhuis_torsion(N)
        assert torsion_on(N, X, Y) == T.evaluate(X, Y)
        assert torsion_on(N, X * f, Y) == torsion_on(N, X, Y) * f


# Koszul brackets


def test_koszul_examples():
    assert koszul_bracket(PI2, dx(2, 0), dx(2, 1)).is_zero()
    assert koszul_bracket(PI2, dx(2, 0) * x(2, 0), dx(2, 1)) == dx(2, 0)
    assert koszul_bracket(MultiVectorField.zero(2, 2), dx(2, 0) * x(2, 1), dx(2, 1)).is_zero()
    assert koszul_bracket(CotangentMap.of_bivector(PI2), dx(2, 0) * x(2, 0), dx(2, 1)) == dx(2, 0)


def test_graded_koszul_on_functions_and_generators():
    f = DifferentialForm.function(x(2, 0))
    g = DifferentialForm.function(Polynomial.parse("x1*x2", 2))
    assert koszul_bracket_graded(PI2, f, g).is_zero()
    assert koszul_bracket_graded(PI2, dx(2, 0), g) == DifferentialForm.function(sharp(PI2, dx(2, 0)).apply(g.function_part()))


def test_graded_koszul_leibniz_expansion():
    # [a, b ^ c] for 1-forms a, b, c reduces to 1-form brackets
    rng = seeded(12)
    pis = [PI2, V(2, 2, {(0, 1): "x1*x2 + 1"})]
    for pi in pis:
        for _ in range(5):
            a, b, c = (rfield(rng, 2, 1, DifferentialForm) for _ in range(3))
            lhs = koszul_bracket_graded(pi, a, wedge(b, c))
            rhs = wedge(koszul_bracket(pi, a, b), c) + wedge(b, koszul_bracket(pi, a, c))
            assert lhs == rhs
    lhs = koszul_bracket_graded(PI2, dx(2, 0), dx(2, 0, 1) * x(2, 0))
    rhs = wedge(koszul_bracket(PI2, dx(2, 0), dx(2, 0) * x(2, 0)), dx(2, 1)) + wedge(
        dx(2, 0) * x(2, 0), koszul_bracket(PI2, dx(2, 0), dx(2, 1)))
    assert lhs == rhs


def test_graded_koszul_symmetry_and_sharp_morphism():
    rng = seeded(13)
    pi = V(3, 2, {(0, 1): "x3"})
    for _ in range(10):
        p, q = rng.randint(0, 2), rng.randint(0, 2)
        a, b = rfield(rng, 3, p, DifferentialForm), rfield(rng, 3, q, DifferentialForm)
        ab = koszul_bracket_graded(pi, a, b)
        assert koszul_bracket_graded(pi, b, a) == ab * (-1 if (p * q) % 2 else 1)
        assert sharp_extend(pi, ab) == schouten_bracket(sharp_extend(pi, a), sharp_extend(pi, b))


def test_graded_koszul_rejects_non_poisson():
    pi = V(4, 2, {(0, 1): 1, (2, 3): "x1"})
    with pytest.raises(ValueError, match="Poisson"):
        koszul_bracket_graded(pi, dx(4, 0), dx(4, 1))


# deformed tensors


def test_pi_N_examples():
    assert pi_N(PI2, EndomorphismField.identity(2)) == PI2
    assert pi_N(PI2, EndomorphismField.scalar(2, x(2, 0))) == PI2 * x(2, 0)
    with pytest.raises(SkewSymmetryError) as exc:
        pi_N(PI2, COMPLEX2)
    assert not exc.value.defect.is_zero()


def test_omega_N_examples():
    om = dx(2, 0, 1)
    assert omega_N(om, EndomorphismField.identity(2)) == om
    assert omega_N(om, EndomorphismField.scalar(2, x(2, 0))) == om * x(2, 0)
    assert omega_N(om, EndomorphismField.zero(2)).is_zero()
    with pytest.raises(SkewSymmetryError):
        omega_N(dx(3, 0, 1), EndomorphismField(3, [[0, 0, 1], [0, 0, 0], [0, 0, 0]]))


def test_lie_bracket_antisymmetric():
    rng = seeded(14)
    X, Y = rfield(rng, 3, 1), rfield(rng, 3, 1)
    assert lie_bracket(X, Y) == -lie_bracket(Y, X)
    assert lie_bracket(X, Y) == schouten_bracket(X, Y)
