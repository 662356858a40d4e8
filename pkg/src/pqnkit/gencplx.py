"""The generalized tangent bundle TM + T*M and its Courant structures.

Sections are pairs X + xi.  The standard structure uses the pairing
<X+xi, Y+eta> = (xi(Y) + eta(X)) / 2, the anchor X + xi -> X and the bracket

    [[X+xi, Y+eta]] = [X,Y] + L_X eta - L_Y xi + d(xi(Y) - eta(X)) / 2.

A block endomorphism J = [[N, pi#], [sigma_flat, -N^T]] deforms it, and the
double of ((T*M)_pi, d_N, phi) gives a third structure on the same bundle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .exterior import (
    DifferentialForm,
    EndomorphismField,
    MultiVectorField,
    contract,
    d_N_cartan,
    exterior_derivative,
    flat,
    interior,
    is_poisson,
    koszul_bracket,
    lie_bracket,
    lie_derivative,
    nijenhuis_torsion,
    schouten_bracket,
    sharp,
    transpose_apply,
    bracket_N,
)
from .ratpoly import Polynomial
from .structures import DefectReport, StructureData, PairedVerdicts, check_pqn

__all__ = [
    "GeneralizedSection",
    "GeneralizedEndomorphism",
    "CourantStructure",
    "AlgebraicConditionError",
    "pairing",
    "std_bracket",
    "D_operator",
    "courant_axiom_defects",
    "build_J",
    "algebraic_defects",
    "deformed_bracket",
    "lemma74_closed_forms",
    "lemma74_defects",
    "double_bracket",
    "integrability_defect",
    "isomorphism_defects",
    "double_to_standard_defects",
    "verify_theorem_d",
    "prop75_equivalence",
    "random_polynomial",
    "random_section",
    "constant_complex_structure",
    "find_nonintegrable_complex_structure",
    "random_generalized_complex",
    "b_transform",
]

HALF = Fraction(1, 2)


class GeneralizedSection:
    """X + xi with X a vector field and xi a 1-form."""

    __slots__ = ("vector", "form")

    def __init__(self, vector: MultiVectorField, form: DifferentialForm):
        if vector.n != form.n:
            raise ValueError("vector and form parts must share the dimension")
        if vector.degree != 1 and vector:
            raise ValueError("vector part must be a vector field")
        if form.degree != 1 and form:
            raise ValueError("form part must be a 1-form")
        self.vector = vector if vector.degree == 1 else MultiVectorField.zero(vector.n, 1)
        self.form = form if form.degree == 1 else DifferentialForm.zero(form.n, 1)

    @property
    def n(self) -> int:
        return self.vector.n

    @classmethod
    def zero(cls, n):
        return cls(MultiVectorField.zero(n, 1), DifferentialForm.zero(n, 1))

    @classmethod
    def of_vector(cls, X: MultiVectorField):
        return cls(X, DifferentialForm.zero(X.n, 1))

    @classmethod
    def of_form(cls, xi: DifferentialForm):
        return cls(MultiVectorField.zero(xi.n, 1), xi)

    @classmethod
    def frame(cls, n: int) -> list:
        """d_1, ..., d_n, dx_1, ..., dx_n."""
        return [cls.of_vector(MultiVectorField.basis(n, i)) for i in range(n)] + [
            cls.of_form(DifferentialForm.basis(n, i)) for i in range(n)
        ]

    def __add__(self, other):
        return GeneralizedSection(self.vector + other.vector, self.form + other.form)

    def __sub__(self, other):
        return GeneralizedSection(self.vector - other.vector, self.form - other.form)

    def __neg__(self):
        return GeneralizedSection(-self.vector, -self.form)

    def __mul__(self, c):
        return GeneralizedSection(self.vector * c, self.form * c)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.vector.is_zero() and self.form.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, GeneralizedSection):
            return NotImplemented
        return self.vector == other.vector and self.form == other.form

    def __hash__(self):
        return hash((self.vector, self.form))

    def __repr__(self):
        from .exterior import format_field

        return f"GeneralizedSection({format_field(self.vector)} + {format_field(self.form)})"


def _fn(f: Polynomial) -> DifferentialForm:
    return DifferentialForm.function(f)


def _d(f: Polynomial) -> DifferentialForm:
    return exterior_derivative(DifferentialForm.function(f))


# standard structure -------------------------------------------------------------------


def pairing(v: GeneralizedSection, w: GeneralizedSection) -> Polynomial:
    """<X+xi, Y+eta> = (xi(Y) + eta(X)) / 2."""
    return (v.form.pair(w.vector) + w.form.pair(v.vector)).scale(HALF)


def std_bracket(v: GeneralizedSection, w: GeneralizedSection) -> GeneralizedSection:
    X, xi, Y, eta = v.vector, v.form, w.vector, w.form
    corr = _d(xi.pair(Y) - eta.pair(X)) * HALF
    return GeneralizedSection(
        lie_bracket(X, Y),
        lie_derivative(X, eta) - lie_derivative(Y, xi) + corr,
    )


def D_operator(f: Polynomial, structure: "CourantStructure | None" = None) -> GeneralizedSection:
    """The section D f with <D f, A> = rho(A) f / 2 for the given structure (standard by default)."""
    if structure is None:
        return GeneralizedSection.of_form(_d(f))
    return structure.D(f)


# block endomorphisms ------------------------------------------------------------------


class GeneralizedEndomorphism:
    """J(X + xi) = (N X + pi# xi) + (sigma_flat X - N^T xi)."""

    __slots__ = ("N", "pi", "sigma", "n")

    def __init__(self, N: EndomorphismField, pi: MultiVectorField, sigma: DifferentialForm):
        if not (N.n == pi.n == sigma.n):
            raise ValueError("blocks of J must share the dimension")
        if pi.degree != 2 and pi:
            raise ValueError("pi must be a bivector")
        if sigma.degree != 2 and sigma:
            raise ValueError("sigma must be a 2-form")
        self.n = N.n
        self.N = N
        self.pi = pi if pi.degree == 2 else MultiVectorField.zero(self.n, 2)
        self.sigma = sigma if sigma.degree == 2 else DifferentialForm.zero(self.n, 2)

    def apply(self, v: GeneralizedSection) -> GeneralizedSection:
        X, xi = v.vector, v.form
        return GeneralizedSection(
            self.N.apply(X) + sharp(self.pi, xi),
            flat(self.sigma, X) - transpose_apply(self.N, xi),
        )

    __call__ = apply

    def matrix(self) -> list:
        """2n x 2n matrix on the frame d_1..d_n, dx_1..dx_n; column a holds J(e_a)."""
        cols = [_coords(self.apply(e)) for e in GeneralizedSection.frame(self.n)]
        m = 2 * self.n
        return [[cols[b][a] for b in range(m)] for a in range(m)]

    @classmethod
    def from_matrix(cls, n: int, M) -> "GeneralizedEndomorphism":
        """Read off (N, pi, sigma) from a 2n x 2n matrix, which must have the block shape."""
        z = Polynomial.zero(n)
        N = EndomorphismField(n, [[M[i][j] for j in range(n)] for i in range(n)])
        pi = MultiVectorField(n, 2, {(i, j): M[j][n + i] for i, j in combinations(range(n), 2)})
        sigma = DifferentialForm(n, 2, {(i, j): M[n + j][i] for i, j in combinations(range(n), 2)})
        J = cls(N, pi, sigma)
        if J.matrix() != [[M[a][b] if M[a][b] else z for b in range(2 * n)] for a in range(2 * n)]:
            raise ValueError("matrix is not of the block form [[N, pi#], [sigma_flat, -N^T]]")
        return J

    def __repr__(self):
        return f"GeneralizedEndomorphism(N={self.N!r}, pi={self.pi!r}, sigma={self.sigma!r})"


def _coords(v: GeneralizedSection) -> list:
    return v.vector.coefficients() + v.form.coefficients()


def _matmul(A, B):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            s = Polynomial.zero(A[0][0].n)
            for k in range(n):
                if A[i][k] and B[k][j]:
                    s = s + A[i][k] * B[k][j]
            row.append(s)
        out.append(row)
    return out


def build_J(pi: MultiVectorField, N: EndomorphismField, sigma: DifferentialForm) -> GeneralizedEndomorphism:
    return GeneralizedEndomorphism(N, pi, sigma)


class AlgebraicConditionError(ValueError):
    """J fails J^2 = -I or pairing orthogonality."""

    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


def algebraic_defects(J: GeneralizedEndomorphism) -> DefectReport:
    """J^2 + I on the frame, <Je_a, Je_b> - <e_a, e_b>, and N^2 + pi# sigma_flat + Id."""
    n = J.n
    M = J.matrix()
    M2 = _matmul(M, M)
    sq = {}
    for a in range(2 * n):
        for b in range(2 * n):
            v = M2[a][b] + (1 if a == b else 0)
            if v:
                sq[(a + 1, b + 1)] = v
    frame = GeneralizedSection.frame(n)
    images = [J.apply(e) for e in frame]
    orth = {}
    for a in range(2 * n):
        for b in range(a, 2 * n):
            v = pairing(images[a], images[b]) - pairing(frame[a], frame[b])
            if v:
                orth[(a + 1, b + 1)] = v
    blk = {}
    N = J.N
    for j in range(n):
        e = MultiVectorField.basis(n, j)
        v = N.apply(N.apply(e)) + sharp(J.pi, flat(J.sigma, e)) + e
        if v:
            blk[f"column {j + 1}"] = v
    return DefectReport.of(
        ("J^2 + I", sq),
        ("<Jv,Jw> - <v,w>", orth),
        ("N^2 + pi# sigma_flat + Id", blk),
    )


def deformed_bracket(J: GeneralizedEndomorphism, v: GeneralizedSection, w: GeneralizedSection,
                     bracket=std_bracket) -> GeneralizedSection:
    """[[v, w]]_J = [[Jv, w]] + [[v, Jw]] - J[[v, w]]."""
    return bracket(J(v), w) + bracket(v, J(w)) - J(bracket(v, w))


# Courant structures -------------------------------------------------------------------


@dataclass(frozen=True)
class CourantStructure:
    """One of three Courant structures on TM + T*M.

    ``standard``: as in the module docstring.
    ``deformed``: pairing <J., J.>, anchor rho o J, bracket [[., .]]_J (D = -J D_std,
    which is the defining property of D when J^2 = -I).
    ``double``: the double of ((T*M)_pi, d_N, phi): standard pairing, anchor
    X + xi -> N X + pi# xi, bracket :func:`double_bracket`.
    """

    kind: str
    n: int
    J: GeneralizedEndomorphism | None = None
    pi: MultiVectorField | None = None
    N: EndomorphismField | None = None
    phi: DifferentialForm | None = None

    @classmethod
    def standard(cls, n: int):
        return cls("standard", n)

    @classmethod
    def deformed(cls, J: GeneralizedEndomorphism):
        return cls("deformed", J.n, J=J)

    @classmethod
    def double(cls, pi: MultiVectorField, N: EndomorphismField, phi: DifferentialForm | None = None):
        if phi is None:
            phi = DifferentialForm.zero(pi.n, 3)
        if phi.degree != 3 and phi:
            raise ValueError("phi must be a 3-form")
        return cls("double", pi.n, pi=pi, N=N, phi=phi)

    def pairing(self, v, w) -> Polynomial:
        if self.kind == "deformed":
            return pairing(self.J(v), self.J(w))
        return pairing(v, w)

    def anchor(self, v: GeneralizedSection) -> MultiVectorField:
        if self.kind == "standard":
            return v.vector
        if self.kind == "deformed":
            return self.J(v).vector
        return self.N.apply(v.vector) + sharp(self.pi, v.form)

    def bracket(self, v, w) -> GeneralizedSection:
        if self.kind == "standard":
            return std_bracket(v, w)
        if self.kind == "deformed":
            return deformed_bracket(self.J, v, w)
        return double_bracket(self.pi, self.N, self.phi, v, w, check=False)

    def D(self, f: Polynomial) -> GeneralizedSection:
        df = _d(f)
        if self.kind == "standard":
            return GeneralizedSection.of_form(df)
        if self.kind == "deformed":
            return -self.J(GeneralizedSection.of_form(df))
        return GeneralizedSection(-sharp(self.pi, df), transpose_apply(self.N, df))


def courant_axiom_defects(S: CourantStructure, sections: list, functions: list) -> DefectReport:
    """The five Courant algebroid axioms evaluated on every pair/triple of the given sections."""
    if len(sections) < 3 or len(functions) < 2:
        raise ValueError("need at least 3 sections and 2 functions")
    br, ip, rho, D = S.bracket, S.pairing, S.anchor, S.D
    idx = range(len(sections))
    anchor, jacobi, leibniz, rhoD, invariance = {}, {}, {}, {}, {}
    brackets = {(a, b): br(sections[a], sections[b]) for a in idx for b in idx}
    for a, b in product(idx, idx):
        A, B = sections[a], sections[b]
        anchor[(a, b)] = rho(brackets[(a, b)]) - lie_bracket(rho(A), rho(B))
        for k, f in enumerate(functions):
            lhs = br(A, B * f)
            rhs = brackets[(a, b)] * f + B * rho(A).apply(f) - D(f) * ip(A, B)
            leibniz[(a, b, k)] = lhs - rhs
    for a, b, c in combinations(idx, 3):
        A, B, C = sections[a], sections[b], sections[c]
        jac = br(brackets[(a, b)], C) + br(brackets[(b, c)], A) + br(brackets[(c, a)], B)
        cyc = ip(brackets[(a, b)], C) + ip(brackets[(b, c)], A) + ip(brackets[(c, a)], B)
        jacobi[(a, b, c)] = jac - D(cyc) * Fraction(1, 3)
    for a, b, c in product(idx, idx, idx):
        if b > c:
            continue
        A, B, C = sections[a], sections[b], sections[c]
        lhs = rho(A).apply(ip(B, C))
        rhs = ip(brackets[(a, b)] + D(ip(A, B)), C) + ip(B, brackets[(a, c)] + D(ip(A, C)))
        invariance[(a, b, c)] = lhs - rhs
    for k, l in combinations(range(len(functions)), 2):
        rhoD[(k, l)] = ip(D(functions[k]), D(functions[l]))
    for k in range(len(functions)):
        rhoD[(k, k)] = ip(D(functions[k]), D(functions[k]))
    return DefectReport.of(
        ("rho[[A,B]] - [rho A, rho B]", anchor),
        ("Jacobiator - D(cyclic pairing)/3", jacobi),
        ("[[A,fB]] - f[[A,B]] - (rho(A)f)B + <A,B>Df", leibniz),
        ("<Df,Dg>", rhoD),
        ("rho(A)<B,C> - <[[A,B]] + D<A,B>, C> - <B, [[A,C]] + D<A,C>>", invariance),
    )


# closed formulas for the deformed bracket ---------------------------------------------


def lemma74_closed_forms(J: GeneralizedEndomorphism, v: GeneralizedSection, w: GeneralizedSection) -> GeneralizedSection:
    """[[v, w]]_J assembled from its pure-type pieces:

        [[xi, eta]]_J = [xi, eta]_pi
        [[X, Y]]_J    = [X, Y]_N + d sigma(X, Y, .)
        [[X, xi]]_J   = ([X, pi# xi] - pi#(L_X xi - d(xi(X))/2))
                        + (L_{NX} xi - L_X(N^T xi) + N^T(L_X xi - d(xi(X))/2))
    """
    N, pi, dsigma = J.N, J.pi, exterior_derivative(J.sigma)

    def ff(a, b):
        return GeneralizedSection.of_form(koszul_bracket(pi, a, b))

    def vv(X, Y):
        return GeneralizedSection(bracket_N(N, X, Y), interior(Y, interior(X, dsigma)))

    def vf(X, xi):
        inner = lie_derivative(X, xi) - _d(xi.pair(X)) * HALF
        return GeneralizedSection(
            lie_bracket(X, sharp(pi, xi)) - sharp(pi, inner),
            lie_derivative(N.apply(X), xi) - lie_derivative(X, transpose_apply(N, xi)) + transpose_apply(N, inner),
        )

    X, xi, Y, eta = v.vector, v.form, w.vector, w.form
    return vv(X, Y) + vf(X, eta) - vf(Y, xi) + ff(xi, eta)


def random_polynomial(rng: random.Random, n: int, degree: int = 2, density: float = 0.4,
                      coeffs=(-2, -1, 0, 1, 2)) -> Polynomial:
    """Sparse random polynomial, coefficients drawn from ``coeffs``, total degree <= degree."""
    terms = {}
    for exps in product(range(degree + 1), repeat=n):
        if sum(exps) <= degree and rng.random() < density:
            terms[exps] = rng.choice(coeffs)
    return Polynomial(n, terms)


def random_section(rng: random.Random, n: int, degree: int = 2, density: float = 0.4) -> GeneralizedSection:
    """Random X + xi with coefficients in {-2..2} and degree <= degree."""
    return GeneralizedSection(
        MultiVectorField.vector(n, [random_polynomial(rng, n, degree, density) for _ in range(n)]),
        DifferentialForm.one_form(n, [random_polynomial(rng, n, degree, density) for _ in range(n)]),
    )


def lemma74_defects(J: GeneralizedEndomorphism, trials: int = 5, seed: int = 0, degree: int = 2) -> DefectReport:
    """Deformed bracket minus the closed formulas on random pure-type pairs."""
    rng = random.Random(seed)
    n = J.n
    ff, vv, vf = [], [], []
    for _ in range(trials):
        a, b = random_section(rng, n, degree), random_section(rng, n, degree)
        for kind, v, w in (
            (ff, GeneralizedSection.of_form(a.form), GeneralizedSection.of_form(b.form)),
            (vv, GeneralizedSection.of_vector(a.vector), GeneralizedSection.of_vector(b.vector)),
            (vf, GeneralizedSection.of_vector(a.vector), GeneralizedSection.of_form(b.form)),
        ):
            kind.append(deformed_bracket(J, v, w) - lemma74_closed_forms(J, v, w))
    return DefectReport.of(
        ("[[xi,eta]]_J - [xi,eta]_pi", ff),
        ("[[X,Y]]_J - [X,Y]_N - d sigma(X,Y,.)", vv),
        ("[[X,xi]]_J - closed form", vf),
    )


# the double of ((T*M)_pi, d_N, phi) ---------------------------------------------------


def double_bracket(pi: MultiVectorField, N: EndomorphismField, phi: DifferentialForm,
                   v: GeneralizedSection, w: GeneralizedSection, check: bool = True) -> GeneralizedSection:
    """Bracket of the double, extended from the pure-type pieces by skew-symmetry:

        [[xi, eta]] = [xi, eta]_pi
        [[X, Y]]    = [X, Y]_N + phi(X, Y, .)
        [[X, xi]]   = (i_X d_N xi + d_N(xi(X))/2) - (i_xi [pi, X] + [pi, xi(X)]/2)
    """
    if check and not is_poisson(pi):
        raise ValueError("the double needs a Poisson bivector ([pi, pi] != 0)")
    if phi.degree != 3 and phi:
        raise ValueError("phi must be a 3-form")
    n = pi.n

    def vf(X, xi):
        f = DifferentialForm.function(xi.pair(X))
        form = interior(X, d_N_cartan(N, xi)) + d_N_cartan(N, f) * HALF
        vec = contract(xi, schouten_bracket(pi, X)) + schouten_bracket(pi, f_mv(f)) * HALF
        return GeneralizedSection(vec, form)

    def f_mv(f):
        return MultiVectorField.function(f.function_part())

    X, xi, Y, eta = v.vector, v.form, w.vector, w.form
    out = GeneralizedSection(bracket_N(N, X, Y), interior(Y, interior(X, phi)) if phi else DifferentialForm.zero(n, 1))
    out = out + vf(X, eta) - vf(Y, xi)
    return out + GeneralizedSection.of_form(koszul_bracket(pi, xi, eta))


# integrability and the PqN equivalence ------------------------------------------------


def _test_pairs(n):
    """Frame pairs (d_i, d_j), (d_i, dx_j), (dx_i, dx_j) and witnesses (x_k d_i, dx_j)."""
    vec = [GeneralizedSection.of_vector(MultiVectorField.basis(n, i)) for i in range(n)]
    frm = [GeneralizedSection.of_form(DifferentialForm.basis(n, i)) for i in range(n)]
    pairs = []
    for i, j in combinations(range(n), 2):
        pairs.append((f"d{i + 1}, d{j + 1}", vec[i], vec[j]))
    for i in range(n):
        for j in range(n):
            pairs.append((f"d{i + 1}, dx{j + 1}", vec[i], frm[j]))
    for i, j in combinations(range(n), 2):
        pairs.append((f"dx{i + 1}, dx{j + 1}", frm[i], frm[j]))
    for k in range(n):
        xk = Polynomial.variable(n, k)
        for i in range(n):
            for j in range(n):
                pairs.append((f"x{k + 1}*d{i + 1}, dx{j + 1}", vec[i] * xk, frm[j]))
    return pairs


def _require_algebraic(J):
    rep = algebraic_defects(J)
    if not rep.verdict:
        raise AlgebraicConditionError(
            "J fails the algebraic conditions (" + ", ".join(rep.failing()) + ")", rep
        )


def integrability_defect(J: GeneralizedEndomorphism) -> DefectReport:
    """[[Jv,Jw]] - [[v,w]] - J([[Jv,w]] + [[v,Jw]]) on frame and witness pairs.

    Raises :class:`AlgebraicConditionError` unless J^2 = -I and J preserves the pairing.
    """
    _require_algebraic(J)
    out = {}
    for label, v, w in _test_pairs(J.n):
        Jv, Jw = J(v), J(w)
        out[label] = std_bracket(Jv, Jw) - std_bracket(v, w) - J(std_bracket(Jv, w) + std_bracket(v, Jw))
    return DefectReport.of(("[[Jv,Jw]] - [[v,w]] - J([[Jv,w]] + [[v,Jw]])", out))


def isomorphism_defects(pi, N, sigma) -> DefectReport:
    """J as a map from the double of ((T*M)_pi, d_N, d sigma) to the standard structure:
    J[[v,w]]_double - [[Jv,Jw]], <Jv,Jw> - <v,w> and rho(Jv) - rho_double(v)."""
    J = build_J(pi, N, sigma)
    phi = exterior_derivative(sigma)
    dbl = CourantStructure.double(pi, N, phi)
    br, ip, anc = {}, {}, {}
    for label, v, w in _test_pairs(J.n):
        br[label] = J(double_bracket(pi, N, phi, v, w, check=False)) - std_bracket(J(v), J(w))
    frame = GeneralizedSection.frame(J.n)
    for a, b in combinations(range(len(frame)), 2):
        ip[(a + 1, b + 1)] = pairing(J(frame[a]), J(frame[b])) - pairing(frame[a], frame[b])
    for a, e in enumerate(frame):
        anc[a + 1] = J(e).vector - dbl.anchor(e)
    return DefectReport.of(
        ("J[[v,w]]_double - [[Jv,Jw]]", br),
        ("<Jv,Jw> - <v,w>", ip),
        ("rho(Jv) - rho_double(v)", anc),
    )


def double_to_standard_defects(pi: MultiVectorField, trials: int = 10, seed: int = 0,
                               degree: int = 2) -> DefectReport:
    """Phi(X + xi) = (X + pi# xi) + xi maps the double of ((T*M)_pi, d, 0) onto the standard
    structure when pi is Poisson; the double itself differs from the standard bracket
    unless pi is constant."""
    n = pi.n
    dbl = CourantStructure.double(pi, EndomorphismField.identity(n))

    def Phi(v):
        return GeneralizedSection(v.vector + sharp(pi, v.form), v.form)

    rng = random.Random(seed)
    br = []
    for _ in range(trials):
        v, w = random_section(rng, n, degree), random_section(rng, n, degree)
        br.append(Phi(dbl.bracket(v, w)) - std_bracket(Phi(v), Phi(w)))
    frame = GeneralizedSection.frame(n)
    ip = {}
    for a, b in combinations(range(len(frame)), 2):
        ip[(a + 1, b + 1)] = pairing(Phi(frame[a]), Phi(frame[b])) - dbl.pairing(frame[a], frame[b])
    anc = {a + 1: Phi(e).vector - dbl.anchor(e) for a, e in enumerate(frame)}
    return DefectReport.of(
        ("Phi[[v,w]]_double - [[Phi v, Phi w]]", br),
        ("<Phi v, Phi w> - <v,w>", ip),
        ("rho(Phi v) - rho_double(v)", anc),
    )


def verify_theorem_d(pi: MultiVectorField, N: EndomorphismField, sigma: DifferentialForm) -> PairedVerdicts:
    """J is generalized complex  <=>  (pi, N, d sigma) is PqN and J is a Courant isomorphism
    from the double of ((T*M)_pi, d_N, d sigma) to the standard structure."""
    J = build_J(pi, N, sigma)
    left = integrability_defect(J)
    pqn = check_pqn(StructureData(pi.n, pi=pi, N=N, phi=exterior_derivative(sigma)))
    right = DefectReport.of(*((f"PqN: {e.name}", e.defect) for e in pqn))
    if pqn["[pi,pi]"].is_zero:
        right = right + isomorphism_defects(pi, N, sigma)
    return PairedVerdicts(left.verdict, right.verdict, left, right)


def prop75_equivalence(pi: MultiVectorField, N: EndomorphismField, sigma: DifferentialForm,
                       trials: int = 25, seed: int = 0, degree: int = 2) -> DefectReport:
    """Deformed bracket of J(pi, N, sigma) against the double of ((T*M)_pi, d_N, d sigma).

    Needs (pi, N, d sigma) to be PqN.  Also compares pairings <J.,J.> vs <.,.> and
    anchors rho o J vs N X + pi# xi on the frame.
    """
    phi = exterior_derivative(sigma)
    pqn = check_pqn(StructureData(pi.n, pi=pi, N=N, phi=phi))
    if not pqn.verdict:
        raise ValueError("(pi, N, d sigma) is not Poisson quasi-Nijenhuis: " + ", ".join(pqn.failing()))
    J = build_J(pi, N, sigma)
    deformed = CourantStructure.deformed(J)
    dbl = CourantStructure.double(pi, N, phi)
    rng = random.Random(seed)
    br = []
    for _ in range(trials):
        v, w = random_section(rng, pi.n, degree), random_section(rng, pi.n, degree)
        br.append(deformed.bracket(v, w) - dbl.bracket(v, w))
    frame = GeneralizedSection.frame(pi.n)
    ip = {}
    for a, b in combinations(range(len(frame)), 2):
        ip[(a + 1, b + 1)] = deformed.pairing(frame[a], frame[b]) - dbl.pairing(frame[a], frame[b])
    anc = {a + 1: deformed.anchor(e) - dbl.anchor(e) for a, e in enumerate(frame)}
    return DefectReport.of(
        ("[[v,w]]_J - [[v,w]]_double", br),
        ("<Jv,Jw> - <v,w>", ip),
        ("rho(Jv) - (N X + pi# xi)", anc),
    )


# search oracles -----------------------------------------------------------------------


def _unipotent_conjugate(J0: EndomorphismField, i, j, f) -> EndomorphismField:
    """P J0 P^(-1) with P = Id + f e_ij (i != j), so P^(-1) = Id - f e_ij."""
    n = J0.n
    E = EndomorphismField(n, [[f if (r, c) == (i, j) else 0 for c in range(n)] for r in range(n)])
    P = EndomorphismField.identity(n) + E
    Pinv = EndomorphismField.identity(n) - E
    return P @ J0 @ Pinv


def find_nonintegrable_complex_structure(n: int = 4):
    """Enumerate N = P J0 P^(-1) with J0 the constant complex structure and P = Id + x_k e_ij,
    keeping entries of degree <= 1; return the first N with N^2 = -Id and nonzero torsion.

    No such N exists on R^2 (every almost complex structure on a surface is integrable),
    so n must be even and at least 4.
    """
    if n % 2 or n < 4:
        raise ValueError("need an even dimension >= 4")
    J0 = constant_complex_structure(n)
    minus_id = -EndomorphismField.identity(n)
    for k, i, j in product(range(n), range(n), range(n)):
        if i == j:
            continue
        N = _unipotent_conjugate(J0, i, j, Polynomial.variable(n, k))
        if any(a.degree > 1 for row in N.matrix for a in row if a):
            continue
        if N @ N != minus_id:
            continue
        if not nijenhuis_torsion(N).is_zero():
            return N
    raise LookupError("no candidate found")


def constant_complex_structure(n: int) -> EndomorphismField:
    """N(d_{2k}) = d_{2k+1}, N(d_{2k+1}) = -d_{2k} (0-based)."""
    return EndomorphismField(n, [[(-1 if c == r + 1 and r % 2 == 0 else 1 if r == c + 1 and c % 2 == 0 else 0)
                                  for c in range(n)] for r in range(n)])


def random_generalized_complex(rng: random.Random, n: int, degree: int = 1) -> GeneralizedEndomorphism:
    """A J satisfying the algebraic conditions, built by transforming a constant one.

    Starts from the complex (N = J0) or symplectic (pi, sigma) block form and conjugates by
    a B-field exp(B), a beta-field exp(beta) and a unipotent change of frame, each with random
    polynomial entries; all three preserve J^2 = -I and the pairing.
    """
    if n % 2:
        raise ValueError("generalized complex structures need even dimension")
    zero_pi, zero_sigma = MultiVectorField.zero(n, 2), DifferentialForm.zero(n, 2)
    if rng.random() < 0.5:
        J = GeneralizedEndomorphism(constant_complex_structure(n), zero_pi, zero_sigma)
    else:
        pi = MultiVectorField(n, 2, {(2 * k, 2 * k + 1): 1 for k in range(n // 2)})
        sigma = DifferentialForm(n, 2, {(2 * k, 2 * k + 1): 1 for k in range(n // 2)})
        J = GeneralizedEndomorphism(EndomorphismField.zero(n), pi, sigma)
    if rng.random() < 0.6:
        J = b_transform(J, DifferentialForm(n, 2, {I: _rp(rng, n, degree) for I in combinations(range(n), 2)}))
    if rng.random() < 0.4:
        beta = MultiVectorField(n, 2, {I: _rp(rng, n, degree) for I in combinations(range(n), 2)})
        E, Einv = _identity(n), _identity(n)
        for a in range(n):
            col = sharp(beta, DifferentialForm.basis(n, a)).coefficients()
            for b in range(n):
                E[b][n + a] = col[b]
                Einv[b][n + a] = -col[b]
        J = _conjugate(J, E, Einv)
    if rng.random() < 0.5:
        i, j = rng.sample(range(n), 2)
        f = _rp(rng, n, degree) or Polynomial.variable(n, rng.randrange(n))
        # X -> (Id + f e_ij) X on vectors, xi -> (Id - f e_ji) xi on forms keeps the pairing
        E, Einv = _identity(n), _identity(n)
        E[i][j] = f
        Einv[i][j] = -f
        E[n + j][n + i] = -f
        Einv[n + j][n + i] = f
        J = _conjugate(J, E, Einv)
    return J


def _rp(rng, n, degree):
    return random_polynomial(rng, n, degree, density=0.3, coeffs=(-1, 1))


def _identity(n):
    one, zero = Polynomial.one(n), Polynomial.zero(n)
    return [[one if a == b else zero for b in range(2 * n)] for a in range(2 * n)]


def _conjugate(J, E, Einv):
    return GeneralizedEndomorphism.from_matrix(J.n, _matmul(_matmul(E, J.matrix()), Einv))


def b_transform(J: GeneralizedEndomorphism, B: DifferentialForm) -> GeneralizedEndomorphism:
    """e^B J e^(-B) with e^B(X + xi) = X + xi + B(X, .).

    e^B is an automorphism of the standard structure when dB = 0, so it then
    preserves integrability.
    """
    n = J.n
    E, Einv = _identity(n), _identity(n)
    for a in range(n):
        col = flat(B, MultiVectorField.basis(n, a)).coefficients()
        for b in range(n):
            E[n + b][a] = col[b]
            Einv[n + b][a] = -col[b]
    return _conjugate(J, E, Einv)
