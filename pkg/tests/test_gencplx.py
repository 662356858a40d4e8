from fractions import Fraction
from itertools import combinations

import pytest

from pqnkit.exterior import (
    DifferentialForm,
    EndomorphismField,
    MultiVectorField,
    nijenhuis_torsion,
)
from pqnkit.gencplx import (
    AlgebraicConditionError,
    CourantStructure,
    D_operator,
    GeneralizedEndomorphism,
    GeneralizedSection,
    algebraic_defects,
    b_transform,
    build_J,
    constant_complex_structure,
    courant_axiom_defects,
    deformed_bracket,
    double_bracket,
    double_to_standard_defects,
    find_nonintegrable_complex_structure,
    integrability_defect,
    lemma74_closed_forms,
    lemma74_defects,
    pairing,
    prop75_equivalence,
    random_generalized_complex,
    random_polynomial,
    random_section,
    std_bracket,
    verify_theorem_d,
)
from pqnkit.ratpoly import Polynomial

from .helpers import rendo, rfield, seeded


def x(n, i):
    return Polynomial.variable(n, i)


def vec(n, i, f=1):
    return GeneralizedSection.of_vector(MultiVectorField.basis(n, i) * f)


def form(n, i, f=1):
    return GeneralizedSection.of_form(DifferentialForm.basis(n, i) * f)


PI2 = MultiVectorField(2, 2, {(0, 1): 1})
SIGMA2 = DifferentialForm(2, 2, {(0, 1): 1})
Z2 = MultiVectorField.zero(2, 2)
ZS2 = DifferentialForm.zero(2, 2)
SYMPLECTIC = (PI2, EndomorphismField.zero(2), SIGMA2)
COMPLEX = (Z2, constant_complex_structure(2), ZS2)


def test_pairing_examples():
    v = vec(2, 0) + form(2, 0)
    assert pairing(v, v) == 1
    assert pairing(vec(2, 0), form(2, 1)).is_zero()
    assert pairing(vec(2, 1), form(2, 1, x(2, 1))) == x(2, 1) * Fraction(1, 2)


def test_pairing_symmetric():
    rng = seeded(1)
    for _ in range(5):
        v, w = random_section(rng, 3), random_section(rng, 3)
        assert pairing(v, w) == pairing(w, v)


def test_std_bracket_examples():
    assert std_bracket(vec(2, 0), vec(2, 1)).is_zero()
    assert std_bracket(vec(2, 0), form(2, 1, x(2, 0))) == form(2, 1)
    assert std_bracket(vec(2, 0, x(2, 1)), form(2, 0)) == form(2, 1) * Fraction(1, 2)


def test_std_bracket_antisymmetric():
    rng = seeded(2)
    for _ in range(5):
        v, w = random_section(rng, 3), random_section(rng, 3)
        assert std_bracket(v, w) == -std_bracket(w, v)
        assert std_bracket(v, w).vector == std_bracket(GeneralizedSection.of_vector(v.vector),
                                                        GeneralizedSection.of_vector(w.vector)).vector


def test_D_examples():
    assert D_operator(x(2, 0)) == form(2, 0)
    assert D_operator(Polynomial.constant(2, 5)).is_zero()
    assert D_operator(x(2, 0) * x(2, 1)) == form(2, 0, x(2, 1)) + form(2, 1, x(2, 0))


def _structures():
    pi = MultiVectorField(3, 2, {(0, 1): "x3"})
    J = random_generalized_complex(seeded(3), 2)
    return [
        CourantStructure.standard(2),
        CourantStructure.double(PI2, EndomorphismField.zero(2)),
        CourantStructure.double(pi, EndomorphismField.identity(3)),
        CourantStructure.deformed(J),
    ]


@pytest.mark.parametrize("S", _structures(), ids=lambda S: S.kind)
def test_D_defining_property(S):
    rng = seeded(4)
    f = random_polynomial(rng, S.n, 2)
    for e in GeneralizedSection.frame(S.n):
        assert S.pairing(S.D(f), e) == S.anchor(e).apply(f) * Fraction(1, 2)


def test_courant_axioms_curated_lists():
    sections = [vec(2, 0), vec(2, 1, x(2, 0)), form(2, 0)]
    functions = [x(2, 0), x(2, 1)]
    std = courant_axiom_defects(CourantStructure.standard(2), sections, functions)
    assert std.verdict
    assert std["<Df,Dg>"].is_zero
    dbl = CourantStructure.double(PI2, EndomorphismField.zero(2))
    assert courant_axiom_defects(dbl, sections, functions).verdict


def test_courant_axioms_need_enough_inputs():
    with pytest.raises(ValueError):
        courant_axiom_defects(CourantStructure.standard(2), [vec(2, 0)] * 2, [x(2, 0)] * 2)


@pytest.mark.parametrize("S", _structures(), ids=lambda S: S.kind)
def test_courant_axioms_random(S):
    rng = seeded(5)
    if S.kind == "deformed":
        # the deformed bracket is Courant exactly when J is integrable
        J = build_J(*SYMPLECTIC)
        S = CourantStructure.deformed(J)
    sections = [random_section(rng, S.n) for _ in range(3)]
    functions = [random_polynomial(rng, S.n) for _ in range(2)]
    assert courant_axiom_defects(S, sections, functions).verdict


def test_courant_axioms_detect_non_poisson_double():
    pi = MultiVectorField(4, 2, {(0, 1): 1, (2, 3): "x1"})
    S = CourantStructure.double(pi, EndomorphismField.identity(4))
    sections = [form(4, 1, x(4, 1)), form(4, 2), form(4, 3)]
    rep = courant_axiom_defects(S, sections, [x(4, 0), x(4, 2)])
    assert not rep["rho[[A,B]] - [rho A, rho B]"].is_zero
    assert not rep["Jacobiator - D(cyclic pairing)/3"].is_zero


def test_build_J_shapes():
    J = build_J(*COMPLEX)
    M = J.matrix()
    assert all(not M[a][b] for a in range(2) for b in range(2, 4))
    assert all(not M[a][b] for a in range(2, 4) for b in range(2))
    J = build_J(*SYMPLECTIC)
    M = J.matrix()
    assert all(not M[a][b] for a in range(2) for b in range(2))
    assert build_J(Z2, EndomorphismField.zero(2), ZS2).matrix() == [[Polynomial.zero(2)] * 4] * 4
    with pytest.raises(ValueError):
        build_J(MultiVectorField.zero(3, 2), EndomorphismField.zero(2), ZS2)


def test_from_matrix_round_trip():
    J = random_generalized_complex(seeded(6), 4)
    K = GeneralizedEndomorphism.from_matrix(4, J.matrix())
    assert K.matrix() == J.matrix()
    M = [row[:] for row in J.matrix()]
    M[0][2] = M[0][2] + 1
    with pytest.raises(ValueError):
        GeneralizedEndomorphism.from_matrix(4, M)


def test_algebraic_examples():
    assert algebraic_defects(build_J(*SYMPLECTIC)).verdict
    assert algebraic_defects(build_J(*COMPLEX)).verdict
    rep = algebraic_defects(build_J(Z2, EndomorphismField.zero(2), ZS2))
    assert not rep["J^2 + I"].is_zero
    assert set(rep["J^2 + I"].defect) == {(1, 1), (2, 2), (3, 3), (4, 4)}


def test_random_generalized_complex_is_algebraic():
    rng = seeded(7)
    for _ in range(6):
        assert algebraic_defects(random_generalized_complex(rng, rng.choice((2, 4)))).verdict


def test_deformed_bracket_examples():
    Js = build_J(*SYMPLECTIC)
    assert deformed_bracket(Js, form(2, 0), form(2, 1)).is_zero()
    Jc = build_J(*COMPLEX)
    assert deformed_bracket(Jc, vec(2, 0), vec(2, 1)).is_zero()
    rng = seeded(8)
    J = build_J(rfield(rng, 3, 2), rendo(rng, 3), rfield(rng, 3, 2, DifferentialForm))
    v = random_section(rng, 3)
    assert deformed_bracket(J, v, v).is_zero()


def test_lemma74_on_frames_and_random_blocks():
    rng = seeded(9)
    for _ in range(5):
        n = rng.choice((2, 3))
        J = build_J(rfield(rng, n, 2), rendo(rng, n, 2), rfield(rng, n, 2, DifferentialForm))
        for i, j in combinations(range(n), 2):
            for v, w in ((form(n, i), form(n, j)), (vec(n, i), vec(n, j)), (vec(n, i), form(n, j))):
                assert deformed_bracket(J, v, w) == lemma74_closed_forms(J, v, w)
        assert lemma74_defects(J, trials=2, seed=rng.randrange(100)).verdict


def test_lemma74_symplectic_pair():
    J = build_J(*SYMPLECTIC)
    v, w = vec(2, 0, x(2, 1)), form(2, 0)
    assert deformed_bracket(J, v, w) == lemma74_closed_forms(J, v, w)


def test_double_bracket_examples():
    z3 = DifferentialForm.zero(2, 3)
    assert double_bracket(PI2, EndomorphismField.zero(2), z3, vec(2, 0), vec(2, 1)).is_zero()
    ident = EndomorphismField.identity(2)
    assert double_bracket(PI2, ident, z3, form(2, 0), form(2, 1)).is_zero()
    assert double_bracket(PI2, ident, z3, vec(2, 0), form(2, 1, x(2, 0))) == form(2, 1)
    bad = MultiVectorField(4, 2, {(0, 1): 1, (2, 3): "x1"})
    with pytest.raises(ValueError, match="Poisson"):
        double_bracket(bad, EndomorphismField.identity(4), DifferentialForm.zero(4, 3), vec(4, 0), vec(4, 1))


def test_double_of_poisson_is_standard_up_to_beta_transform():
    pi = MultiVectorField(3, 2, {(0, 1): "x3"})
    assert double_to_standard_defects(pi, trials=4, seed=1).verdict
    # the double itself differs from the standard bracket for nonconstant pi
    S = CourantStructure.double(pi, EndomorphismField.identity(3))
    v, w = form(3, 0), form(3, 1)
    assert S.bracket(v, w) != std_bracket(v, w)


def test_integrability_examples():
    assert integrability_defect(build_J(*SYMPLECTIC)).verdict
    assert integrability_defect(build_J(*COMPLEX)).verdict
    bent = DifferentialForm(2, 2, {(0, 1): "1 + x1^2"})
    with pytest.raises(AlgebraicConditionError) as exc:
        integrability_defect(build_J(PI2, EndomorphismField.zero(2), bent))
    assert "N^2 + pi# sigma_flat + Id" in exc.value.report.failing()


def test_gcs_equivalence_positive_instances():
    for blocks in (SYMPLECTIC, COMPLEX):
        v = verify_theorem_d(*blocks)
        assert (v.left, v.right) == (True, True)
        assert prop75_equivalence(*blocks, trials=5, seed=2).verdict


def test_nonintegrable_search():
    N = find_nonintegrable_complex_structure(4)
    assert N @ N == -EndomorphismField.identity(4)
    assert not nijenhuis_torsion(N).is_zero()
    assert max(a.degree for row in N.matrix for a in row if a) <= 1
    v = verify_theorem_d(MultiVectorField.zero(4, 2), N, DifferentialForm.zero(4, 2))
    assert (v.left, v.right) == (False, False)
    with pytest.raises(ValueError):
        find_nonintegrable_complex_structure(2)


def test_gcs_equivalence_under_b_field_transforms():
    # on R^2 every 2-form is closed, so e^B preserves integrability
    J = b_transform(build_J(*COMPLEX), DifferentialForm(2, 2, {(0, 1): "x1*x2"}))
    assert algebraic_defects(J).verdict
    v = verify_theorem_d(J.pi, J.N, J.sigma)
    assert (v.left, v.right) == (True, True)
    J = b_transform(build_J(MultiVectorField.zero(4, 2), constant_complex_structure(4), DifferentialForm.zero(4, 2)),
                    DifferentialForm(4, 2, {(0, 1): "x3"}))
    assert algebraic_defects(J).verdict
    assert verify_theorem_d(J.pi, J.N, J.sigma).agree


def test_gcs_equivalence_on_random_algebraic_structures():
    rng = seeded(12)
    for _ in range(25):
        J = random_generalized_complex(rng, 2)
        assert algebraic_defects(J).verdict
        assert verify_theorem_d(J.pi, J.N, J.sigma).agree


def test_prop75_requires_pqn():
    N = find_nonintegrable_complex_structure(4)
    with pytest.raises(ValueError, match="quasi-Nijenhuis"):
        prop75_equivalence(MultiVectorField.zero(4, 2), N, DifferentialForm.zero(4, 2), trials=1)


def test_prop75_lie_bialgebroid_case():
    # brackets and anchors agree; J^2 = 0 here, so <J., J.> cannot match the pairing
    rep = prop75_equivalence(PI2, EndomorphismField.zero(2), ZS2, trials=5, seed=3)
    assert rep["[[v,w]]_J - [[v,w]]_double"].is_zero
    assert rep["rho(Jv) - (N X + pi# xi)"].is_zero
    assert rep.failing() == ["<Jv,Jw> - <v,w>"]
