"""Defect reports for Poisson, Poisson-Nijenhuis and Poisson quasi-Nijenhuis data.

Every check returns a :class:`DefectReport` whose entries hold the actual
defect tensors; an identity holds iff its defect is exactly zero.  Reports
are never short-circuited, so a failing instance shows every defect.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from fractions import Fraction
from typing import NamedTuple

from .exterior import (
    CotangentMap,
    DifferentialForm,
    EndomorphismField,
    MultiVectorField,
    SkewSymmetryError,
    VectorValuedTwoForm,
    bundle_map_defect,
    d_N_cartan,
    evaluate_form,
    exterior_derivative,
    flat,
    format_field,
    i_N,
    interior,
    is_poisson,
    koszul_bracket,
    koszul_bracket_graded,
    nijenhuis_torsion,
    omega_N,
    pi_N,
    schouten_bracket,
    sharp,
    sharp_extend,
    transpose_apply,
)
from .ratpoly import Polynomial

__all__ = [
    "StructureData",
    "DefectEntry",
    "DefectReport",
    "ConcomitantCN",
    "PairedVerdicts",
    "is_zero_defect",
    "poisson_defect",
    "concomitant",
    "compatibility_defects",
    "quasi_torsion_defect",
    "check_pqn",
    "check_pn",
    "dN_square_defect",
    "bihamiltonian_checks",
    "symplectic_quasi_check",
    "invert_symplectic",
    "symplectic_quasi_data",
    "diagram_defects",
    "derivation_defects",
    "verify_theorem_a",
    "generator_forms",
    "random_structure",
]


def is_zero_defect(obj) -> bool:
    """Zero test for any defect payload: tensors, polynomials, or dicts/lists of them."""
    if isinstance(obj, dict):
        return all(is_zero_defect(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return all(is_zero_defect(v) for v in obj)
    if isinstance(obj, Polynomial):
        return obj.is_zero()
    return obj.is_zero()


@dataclass(frozen=True)
class DefectEntry:
    name: str
    defect: object
    is_zero: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "is_zero", is_zero_defect(self.defect))


@dataclass(frozen=True)
class DefectReport:
    entries: tuple

    @classmethod
    def of(cls, *pairs):
        return cls(tuple(DefectEntry(name, d) for name, d in pairs))

    @property
    def verdict(self) -> bool:
        return all(e.is_zero for e in self.entries)

    def __getitem__(self, name) -> DefectEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def names(self) -> list:
        return [e.name for e in self.entries]

    def failing(self) -> list:
        return [e.name for e in self.entries if not e.is_zero]

    def __add__(self, other: "DefectReport") -> "DefectReport":
        return DefectReport(self.entries + other.entries)


@dataclass(frozen=True)
class StructureData:
    n: int
    pi: MultiVectorField | None = None
    N: EndomorphismField | None = None
    phi: DifferentialForm | None = None
    sigma: DifferentialForm | None = None
    omega: DifferentialForm | None = None

    def __post_init__(self):
        for name in ("pi", "N", "phi", "sigma", "omega"):
            v = getattr(self, name)
            if v is not None and v.n != self.n:
                raise ValueError(f"{name} has dimension {v.n}, expected {self.n}")
        if self.pi is not None and self.pi.degree != 2:
            raise ValueError("pi must be a bivector")
        if self.phi is not None and self.phi.degree != 3:
            raise ValueError("phi must be a 3-form")
        for name in ("sigma", "omega"):
            v = getattr(self, name)
            if v is not None and v.degree != 2:
                raise ValueError(f"{name} must be a 2-form")
        if self.phi is not None and self.sigma is not None:
            raise ValueError("give phi or sigma (phi = d sigma), not both")

    def require(self, *names):
        missing = [m for m in names if getattr(self, m) is None]
        if missing:
            raise ValueError(f"missing structure members: {', '.join(missing)}")

    def phi_or_zero(self) -> DifferentialForm:
        if self.phi is not None:
            return self.phi
        if self.sigma is not None:
            return exterior_derivative(self.sigma)
        return DifferentialForm.zero(self.n, 3)


@dataclass(frozen=True)
class ConcomitantCN:
    """C^N on the coordinate coframe, (i, j) -> C^N(dx_i, dx_j) for i < j, plus
    the function-linearity witnesses (k, i, j) -> C^N(x_k dx_i, dx_j) - x_k C^N(dx_i, dx_j)."""

    n: int
    components: dict
    witnesses: dict

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.components.values()) and all(
            v.is_zero() for v in self.witnesses.values()
        )

    def __getitem__(self, ij) -> DifferentialForm:
        i, j = ij
        if i > j:
            return -self[(j, i)]
        if i == j:
            return DifferentialForm.zero(self.n, 1)
        return self.components.get((i, j), DifferentialForm.zero(self.n, 1))


class PairedVerdicts(NamedTuple):
    left: bool
    right: bool
    left_report: DefectReport
    right_report: DefectReport

    @property
    def agree(self) -> bool:
        return self.left == self.right


# building blocks ----------------------------------------------------------------------


def poisson_defect(pi: MultiVectorField) -> MultiVectorField:
    """[pi, pi]; pi is Poisson iff this vanishes."""
    return schouten_bracket(pi, pi)


def _cn(pi, N, alpha, beta, npi):
    NT = lambda xi: transpose_apply(N, xi)
    ab = koszul_bracket(pi, alpha, beta)
    return koszul_bracket(npi, alpha, beta) - (
        koszul_bracket(pi, NT(alpha), beta) + koszul_bracket(pi, alpha, NT(beta)) - NT(ab)
    )


def concomitant(pi: MultiVectorField, N: EndomorphismField) -> ConcomitantCN:
    """C^N(a, b) = [a, b]_{N pi#} - ([N^T a, b]_pi + [a, N^T b]_pi - N^T [a, b]_pi) on the coframe."""
    n = pi.n
    npi = CotangentMap.composed(N, pi)
    dx = [DifferentialForm.basis(n, i) for i in range(n)]
    comps = {}
    for i, j in combinations(range(n), 2):
        v = _cn(pi, N, dx[i], dx[j], npi)
        if v:
            comps[(i, j)] = v
    witnesses = {}
    for k in range(n):
        xk = Polynomial.variable(n, k)
        for i, j in combinations(range(n), 2):
            base = _cn(pi, N, dx[i], dx[j], npi)
            v = _cn(pi, N, dx[i] * xk, dx[j], npi) - base * xk
            if v:
                witnesses[(k, i, j)] = v
    return ConcomitantCN(n, comps, witnesses)


def _require_poisson(pi):
    if not is_poisson(pi):
        raise ValueError("pi is not Poisson: [pi, pi] != 0")


def compatibility_defects(pi: MultiVectorField, N: EndomorphismField) -> DefectReport:
    """The two compatibility conditions: N pi# = pi# N^T and C^N = 0."""
    _require_poisson(pi)
    return _compatibility(pi, N)


def _compatibility(pi, N):
    return DefectReport.of(
        ("N pi# - pi# N^T", bundle_map_defect(pi, N)),
        ("C^N", concomitant(pi, N)),
    )


def quasi_torsion_defect(pi: MultiVectorField, N: EndomorphismField,
                         phi: DifferentialForm) -> VectorValuedTwoForm:
    """T_N(d_i, d_j) - pi#(phi(d_i, d_j, .)) on the frame."""
    n = N.n
    T = nijenhuis_torsion(N)
    frame = [MultiVectorField.basis(n, i) for i in range(n)]
    comps = {}
    for i, j in combinations(range(n), 2):
        v = T[(i, j)] - sharp(pi, interior(frame[j], interior(frame[i], phi)))
        if v:
            comps[(i, j)] = v
    return VectorValuedTwoForm(n, comps)


# structure checks ---------------------------------------------------------------------


def check_pqn(data: StructureData) -> DefectReport:
    """The five defining conditions of a Poisson quasi-Nijenhuis structure."""
    data.require("pi", "N")
    pi, N = data.pi, data.N
    phi = data.phi_or_zero()
    compat = _compatibility(pi, N)
    return DefectReport.of(
        ("[pi,pi]", poisson_defect(pi)),
        ("compatibility", {e.name: e.defect for e in compat}),
        ("T_N - pi#(i_{X^Y} phi)", quasi_torsion_defect(pi, N, phi)),
        ("d phi", exterior_derivative(phi)),
        ("d(i_N phi)", exterior_derivative(i_N(N, phi))),
    )


def check_pn(pi: MultiVectorField, N: EndomorphismField) -> DefectReport:
    """Poisson-Nijenhuis: the Poisson, compatibility and torsion entries with phi = 0."""
    full = check_pqn(StructureData(pi.n, pi=pi, N=N))
    return DefectReport(full.entries[:3])


def generator_forms(n: int) -> list:
    """The family x_i, dx_i, x_j dx_i used to test first-order identities."""
    out = [DifferentialForm.function(Polynomial.variable(n, i)) for i in range(n)]
    out += [DifferentialForm.basis(n, i) for i in range(n)]
    out += [DifferentialForm.basis(n, i) * Polynomial.variable(n, j) for i in range(n) for j in range(n)]
    return out


def _label(alpha) -> str:
    return format_field(alpha)


def dN_square_defect(pi: MultiVectorField, N: EndomorphismField, phi: DifferentialForm) -> DefectReport:
    """d_N^2 - [phi, .] on x_i and dx_i, and pi# o (d phi)_flat on the 3-frame."""
    _require_poisson(pi)
    n = pi.n
    dN = lambda a: d_N_cartan(N, a)
    fun = {}
    one = {}
    for i in range(n):
        xi = DifferentialForm.function(Polynomial.variable(n, i))
        fun[f"x{i + 1}"] = dN(dN(xi)) - koszul_bracket_graded(pi, phi, xi, check=False)
        dxi = DifferentialForm.basis(n, i)
        one[f"dx{i + 1}"] = dN(dN(dxi)) - koszul_bracket_graded(pi, phi, dxi, check=False)
    dphi = exterior_derivative(phi)
    frame = [MultiVectorField.basis(n, i) for i in range(n)]
    comp = {}
    for I in combinations(range(n), 3):
        form = dphi
        for k in I:
            form = interior(frame[k], form)
        v = sharp(pi, form)
        if v:
            comp[tuple(k + 1 for k in I)] = v
    return DefectReport.of(
        ("d_N^2 f - [phi,f]", fun),
        ("d_N^2 dx - [phi,dx]", one),
        ("pi# o (d phi)_flat", comp),
    )


def diagram_defects(pi: MultiVectorField, N: EndomorphismField) -> dict:
    """pi#(d_N a) - (-1)^p [pi_N, pi# a] over the generator family.

    The sign (-1)^p comes from the reversed-order extension of pi#; at p = 0
    it reads pi# d_N f = [pi_N, f].
    """
    piN = pi_N(pi, N)
    out = {}
    for a in generator_forms(pi.n):
        lhs = sharp_extend(pi, d_N_cartan(N, a))
        rhs = schouten_bracket(piN, sharp_extend(pi, a))
        v = lhs - rhs if a.degree % 2 == 0 else lhs + rhs
        out[_label(a)] = v
    return out


def bihamiltonian_checks(pi: MultiVectorField, N: EndomorphismField, phi: DifferentialForm) -> DefectReport:
    """[pi, pi_N], [pi_N, pi_N] - 2 pi#(phi), and the pi#-diagram defects.

    Raises :class:`SkewSymmetryError` when pi_N is not a bivector.
    """
    piN = pi_N(pi, N)
    return DefectReport.of(
        ("[pi,pi_N]", schouten_bracket(pi, piN)),
        ("[pi_N,pi_N] - 2 pi#(phi)", schouten_bracket(piN, piN) - sharp_extend(pi, phi) * 2),
        ("pi# d_N - [pi_N, pi# .]", diagram_defects(pi, N)),
    )


# symplectic case ----------------------------------------------------------------------


def _det(M):
    """Determinant of a small square matrix of polynomials by cofactor expansion over column subsets."""
    n = len(M)
    if n == 0:
        return 1
    memo = {}

    def minor(row, cols):
        if row == n:
            return Polynomial.one(M[0][0].n)
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = Polynomial.zero(M[0][0].n)
        sign = 1
        for c in range(n):
            if cols >> c & 1:
                continue
            a = M[row][c]
            if a:
                term = a * minor(row + 1, cols | (1 << c))
                # sign = (-1)^(number of unused columns before c)
                total = total + term if sign > 0 else total - term
            sign = -sign
        memo[key] = total
        return total

    return minor(0, 0)


def invert_symplectic(omega: DifferentialForm) -> MultiVectorField:
    """The bivector pi with pi# = (omega_flat)^(-1).

    Requires det(omega_flat) to be a nonzero constant, so the inverse stays polynomial.
    """
    if omega.degree != 2:
        raise ValueError("omega must be a 2-form")
    n = omega.n
    frame = [MultiVectorField.basis(n, i) for i in range(n)]
    # W[j][i] = omega(d_i, d_j): column i is omega_flat(d_i)
    W = [[evaluate_form(omega, frame[i], frame[j]) for i in range(n)] for j in range(n)]
    det = _det(W)
    if not det.is_constant() or det.is_zero():
        raise ValueError(f"omega_flat must have a nonzero constant determinant, got {det}")
    d = det.constant_term()
    comps = {}
    # inverse via cofactors: inv[i][j] = (-1)^(i+j) det(W without row j, col i) / det
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[W[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = _det(sub) if sub else Polynomial.one(omega.n)
            cof = cof.scale(1 / d)
            inv[i][j] = cof if (i + j) % 2 == 0 else -cof
    # inv column i = pi#(dx_i) so pi(dx_i, dx_j) = inv[j][i]
    for i, j in combinations(range(n), 2):
        if inv[j][i]:
            comps[(i, j)] = inv[j][i]
    return MultiVectorField(n, 2, comps)


def symplectic_quasi_check(omega: DifferentialForm, N: EndomorphismField, phi: DifferentialForm) -> DefectReport:
    """d omega_N = 0 and [omega_N, omega_N] = 2 phi with the Koszul bracket of omega^(-1).

    Also reports the antisymmetry defect of omega(N., .) and d phi, the
    standing assumptions under which the two identities characterize the
    symplectic quasi-Nijenhuis case.
    """
    pi = invert_symplectic(omega)
    try:
        oN = omega_N(omega, N)
        skew = {}
    except SkewSymmetryError as exc:
        skew = {f"({i + 1},{j + 1})": v for (i, j), v in sorted(exc.defect.items())}
        oN = None
    if oN is None:
        closed = DifferentialForm.zero(omega.n, 3)
        bracket = DifferentialForm.zero(omega.n, 3)
    else:
        closed = exterior_derivative(oN)
        bracket = koszul_bracket_graded(pi, oN, oN, check=False) - phi * 2
    return DefectReport.of(
        ("omega(N.,.) antisymmetric", skew),
        ("d omega_N", closed),
        ("[omega_N,omega_N] - 2 phi", bracket),
        ("d phi", exterior_derivative(phi)),
    )


def symplectic_quasi_data(omega: DifferentialForm, omega_N_form: DifferentialForm) -> StructureData:
    """The data determined by a symplectic omega and a 2-form omega_N:
    pi = omega^(-1), N = pi# o (omega_N)_flat and phi = [omega_N, omega_N]_pi / 2."""
    n = omega.n
    pi = invert_symplectic(omega)
    N = EndomorphismField.from_columns(
        n, [sharp(pi, flat(omega_N_form, MultiVectorField.basis(n, i))) for i in range(n)]
    )
    phi = koszul_bracket_graded(pi, omega_N_form, omega_N_form) * Fraction(1, 2)
    return StructureData(n, pi=pi, N=N, phi=phi, omega=omega)


# PqN <=> quasi-Lie bialgebroid --------------------------------------------------------


def derivation_defects(pi: MultiVectorField, N: EndomorphismField) -> dict:
    """d_N[a, b] - (-1)^q [d_N a, b] - [a, d_N b] over unordered generator pairs (q = deg b).

    This is the derivation rule matching the sign conventions of
    :func:`koszul_bracket_graded`.
    """
    gens = generator_forms(pi.n)
    dN = {id(a): d_N_cartan(N, a) for a in gens}
    labels = [_label(a) for a in gens]
    out = {}
    for ia, ib in combinations_with_replacement(range(len(gens)), 2):
        a, b = gens[ia], gens[ib]
        K = lambda u, v: koszul_bracket_graded(pi, u, v, check=False)
        lhs = d_N_cartan(N, K(a, b))
        first = K(dN[id(a)], b)
        rhs = (first if b.degree % 2 == 0 else -first) + K(a, dN[id(b)])
        v = lhs - rhs
        if v:
            out[f"{labels[ia]}, {labels[ib]}"] = v
    return out


def verify_theorem_a(data: StructureData) -> PairedVerdicts:
    """Both sides of: (pi, N, phi) is PqN  <=>  ((T*M)_pi, d_N, phi) is a quasi-Lie bialgebroid
    with phi closed.

    The right side is computed without the torsion or compatibility
    definitions: pi Poisson, d_N a derivation of the Koszul bracket on the
    generator family, d_N^2 = [phi, .], d_N phi = 0 and d phi = 0.
    """
    data.require("pi", "N")
    pi, N = data.pi, data.N
    phi = data.phi_or_zero()
    left = check_pqn(data)
    poisson = poisson_defect(pi)
    if poisson.is_zero():
        deriv = derivation_defects(pi, N)
        sq = dN_square_defect(pi, N, phi)
        square = {e.name: e.defect for e in sq}
    else:
        # the Koszul bracket on forms of all degrees only exists for Poisson pi
        deriv = {}
        square = {}
    right = DefectReport.of(
        ("[pi,pi]", poisson),
        ("d_N derivation of [.,.]_pi", deriv),
        ("d_N^2 - [phi,.]", square),
        ("d_N phi", d_N_cartan(N, phi)),
        ("d phi", exterior_derivative(phi)),
    )
    return PairedVerdicts(left.verdict, right.verdict, left, right)


# random instances ---------------------------------------------------------------------


def _random_poly(rng, n, degree, density=0.5, coeffs=(-2, -1, 1, 2)):
    terms = {}
    for exps in product(range(degree + 1), repeat=n):
        if sum(exps) <= degree and rng.random() < density:
            terms[exps] = rng.choice(coeffs)
    return Polynomial(n, terms)


def random_structure(rng: random.Random, n: int, degree: int = 2, density: float = 0.3) -> StructureData:
    """A random (pi, N, phi) with sparse integer polynomial coefficients.

    Half of the draws use structured members (constant pi, scalar or constant N,
    closed phi) so that positive instances occur with reasonable frequency.
    """
    def poly(d=degree):
        return _random_poly(rng, n, d, density)

    structured = rng.random() < 0.5
    if structured:
        pi = MultiVectorField(n, 2, {I: rng.choice((-1, 0, 1)) for I in combinations(range(n), 2)})
        kind = rng.choice(("zero", "identity", "scalar", "constant"))
        if kind == "zero":
            N = EndomorphismField.zero(n)
        elif kind == "identity":
            N = EndomorphismField.identity(n)
        elif kind == "scalar":
            N = EndomorphismField.scalar(n, poly(1))
        else:
            N = EndomorphismField(n, [[rng.choice((-1, 0, 0, 1)) for _ in range(n)] for _ in range(n)])
        phi = exterior_derivative(DifferentialForm(n, 2, {I: poly() for I in combinations(range(n), 2)})) \
            if rng.random() < 0.3 else DifferentialForm.zero(n, 3)
    else:
        pi = MultiVectorField(n, 2, {I: poly() for I in combinations(range(n), 2)})
        N = EndomorphismField(n, [[poly(1) for _ in range(n)] for _ in range(n)])
        phi = DifferentialForm(n, 3, {I: poly() for I in combinations(range(n), 3)})
    return StructureData(n, pi=pi, N=N, phi=phi)
