"""Nijenhuis endomorphisms, deformed structures and recursion operators."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, ZERO, ONE, ExprError, div_exact
from .algebroid import CheckReport, KForm, LieAlgebroid, Section, d_A
from .poisson import (
    Bivector,
    DegenerateBivector,
    are_compatible,
    is_poisson,
    koszul_bracket,
)
from . import linalg


@dataclass(frozen=True)
class Endo:
    """Bundle endomorphism: (N X)^a = N^a_b X^b, mat[a][b] = N^a_b."""

    algebroid: LieAlgebroid
    mat: tuple[tuple[Expr, ...], ...]

    def __post_init__(self):
        r = self.algebroid.rank
        if len(self.mat) != r or any(len(row) != r for row in self.mat):
            raise ValueError("endomorphism matrix must be rank x rank")

    @staticmethod
    def identity(A: LieAlgebroid) -> "Endo":
        return Endo(A, tuple(tuple(linalg.mat_identity(A.rank)[i]) for i in range(A.rank)))

    @staticmethod
    def from_matrix(A: LieAlgebroid, mat) -> "Endo":
        return Endo(A, tuple(tuple(row) for row in mat))

    def apply(self, X: Section) -> Section:
        r = self.algebroid.rank
        comps = [
            sum((self.mat[a][b] * X.comps[b] for b in range(r)), ZERO) for a in range(r)
        ]
        return Section(self.algebroid, tuple(comps))

    def dual_apply(self, alpha: KForm) -> KForm:
        """Transpose action on one-forms: (N* a)_b = a_c N^c_b."""
        if alpha.degree != 1:
            raise ValueError("dual endomorphism acts on one-forms")
        r = self.algebroid.rank
        comps = [ZERO] * r
        for (c,), v in alpha.comps.items():
            for b in range(r):
                if not self.mat[c][b].is_zero():
                    comps[b] = comps[b] + v * self.mat[c][b]
        return self.algebroid.one_form(comps)

    def compose(self, other: "Endo") -> "Endo":
        return Endo.from_matrix(
            self.algebroid,
            linalg.mat_mul([list(r) for r in self.mat], [list(r) for r in other.mat]),
        )

    def power(self, k: int) -> "Endo":
        out = Endo.identity(self.algebroid)
        for _ in range(k):
            out = out.compose(self)
        return out

    def __add__(self, other: "Endo") -> "Endo":
        return Endo.from_matrix(
            self.algebroid,
            [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(self.mat, other.mat)],
        )

    def __sub__(self, other: "Endo") -> "Endo":
        return Endo.from_matrix(
            self.algebroid,
            [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(self.mat, other.mat)],
        )

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.mat for x in row)

    def push_bivector(self, P: Bivector) -> Bivector:
        """The contracted bivector (N P)^{ab} = N^a_c P^{cb}.

        Requires N o P# = P# o N* (antisymmetry of the result); raises
        otherwise."""
        r = self.algebroid.rank
        m = linalg.mat_mul([list(row) for row in self.mat], [list(row) for row in P.mat])
        for a in range(r):
            for b in range(a, r):
                if not (m[a][b] + m[b][a]).is_zero():
                    raise ExprError(
                        "N P is not antisymmetric: N does not commute with the sharp map"
                    )
        return Bivector(self.algebroid, tuple(tuple(row) for row in m))


@dataclass
class FracEndo:
    """Endomorphism numerator over a scalar denominator."""

    num: Endo
    den: Expr

    def exact(self) -> Endo:
        if self.den == ONE:
            return self.num
        A = self.num.algebroid
        return Endo.from_matrix(
            A, [[div_exact(x, self.den) for x in row] for row in self.num.mat]
        )


def deformed_bracket(N: Endo, X: Section, Y: Section) -> Section:
    """[X, Y]_N = [N X, Y] + [X, N Y] - N [X, Y]."""
    A = N.algebroid
    return (
        A.bracket(N.apply(X), Y)
        + A.bracket(X, N.apply(Y))
        - N.apply(A.bracket(X, Y))
    )


def torsion(N: Endo, X: Section, Y: Section) -> Section:
    """Nijenhuis torsion T_N(X, Y) = [N X, N Y] - N [X, Y]_N."""
    A = N.algebroid
    return A.bracket(N.apply(X), N.apply(Y)) - N.apply(deformed_bracket(N, X, Y))


def torsion_check(N: Endo) -> CheckReport:
    """Vanishing of the torsion on all frame pairs (tensoriality makes this
    sufficient)."""
    A = N.algebroid
    failures = []
    for a in range(A.rank):
        for b in range(a + 1, A.rank):
            T = torsion(N, A.frame_section(a), A.frame_section(b))
            for g, c in enumerate(T.comps):
                if not c.is_zero():
                    failures.append(
                        (
                            f"torsion nonzero on ({A.frame[a]}, {A.frame[b]}) "
                            f"component {A.frame[g]}",
                            c,
                        )
                    )
    return CheckReport(not failures, failures)


def deformed_algebroid(N: Endo, frame_prefix: str = "n_") -> LieAlgebroid:
    """Deformed structure (A, [.,.]_N, rho o N); a Lie algebroid when the
    torsion of N vanishes (checked)."""
    rep = torsion_check(N)
    if not rep.ok:
        raise ExprError(f"cannot deform: {rep.witness()}")
    A = N.algebroid
    r = A.rank
    anchor = [
        [
            sum((N.mat[b][a] * A.anchor[b][i] for b in range(r)), ZERO)
            for i in range(A.dim)
        ]
        for a in range(r)
    ]
    structure: dict[tuple[int, int], dict[int, Expr]] = {}
    for a in range(r):
        for b in range(a + 1, r):
            br = deformed_bracket(N, A.frame_section(a), A.frame_section(b))
            row = {g: c for g, c in enumerate(br.comps) if not c.is_zero()}
            if row:
                structure[(a, b)] = row
    return LieAlgebroid.from_tables(
        list(A.base_vars), [frame_prefix + f for f in A.frame], anchor, structure
    )


def sharp_commutes(P: Bivector, N: Endo) -> CheckReport:
    """N o P# = P# o N*, equivalently N P antisymmetric."""
    r = P.algebroid.rank
    m = linalg.mat_mul([list(row) for row in N.mat], [list(row) for row in P.mat])
    failures = []
    for a in range(r):
        for b in range(a, r):
            e = m[a][b] + m[b][a]
            if not e.is_zero():
                failures.append(
                    (
                        f"N P# != P# N* on dual pair "
                        f"({P.algebroid.frame[a]}, {P.algebroid.frame[b]})",
                        e,
                    )
                )
    return CheckReport(not failures, failures)


def concomitant(P: Bivector, N: Endo, alpha: KForm, beta: KForm) -> KForm:
    """Magri-Morosi compatibility defect of (P, N) on one-forms:
    C(P, N)(a, b) = [a, b]_{NP} - ([N* a, b]_P + [a, N* b]_P - N*[a, b]_P)."""
    NP = N.push_bivector(P)
    lhs = koszul_bracket(NP, alpha, beta)
    rhs = (
        koszul_bracket(P, N.dual_apply(alpha), beta)
        + koszul_bracket(P, alpha, N.dual_apply(beta))
        - N.dual_apply(koszul_bracket(P, alpha, beta))
    )
    return lhs - rhs


def concomitant_check(P: Bivector, N: Endo) -> CheckReport:
    A = P.algebroid
    r = A.rank
    failures = []
    for a in range(r):
        for b in range(a + 1, r):
            c = concomitant(P, N, A.dual_frame_form(a), A.dual_frame_form(b))
            for (g,), v in c.comps.items():
                if not v.is_zero():
                    failures.append(
                        (
                            f"concomitant nonzero on dual pair "
                            f"({A.frame[a]}, {A.frame[b]}) component {A.frame[g]}",
                            v,
                        )
                    )
    return CheckReport(not failures, failures)


@dataclass
class PNReport:
    poisson: CheckReport
    torsion: CheckReport
    compatible: CheckReport
    concomitant: CheckReport
    nondegenerate: bool
    determinant: Expr

    @property
    def ok(self) -> bool:
        return (
            self.poisson.ok
            and self.torsion.ok
            and self.compatible.ok
            and self.concomitant.ok
        )

    @property
    def sn(self) -> bool:
        """Symplectic-Nijenhuis: a PN pair with nondegenerate bivector."""
        return self.ok and self.nondegenerate

    def witness(self) -> str | None:
        for name, rep in (
            ("poisson", self.poisson),
            ("torsion", self.torsion),
            ("sharp-compatibility", self.compatible),
            ("concomitant", self.concomitant),
        ):
            if not rep.ok:
                return f"[{name}] {rep.witness()}"
        return None


def pn_check(P: Bivector, N: Endo) -> PNReport:
    """Full Poisson-Nijenhuis verdict for the pair (P, N)."""
    poisson = is_poisson(P)
    tors = torsion_check(N)
    comm = sharp_commutes(P, N)
    if comm.ok:
        conc = concomitant_check(P, N)
    else:
        conc = CheckReport(False, [("skipped: sharp maps do not commute", ZERO)])
    d = P.determinant()
    return PNReport(poisson, tors, comm, conc, not d.is_zero(), d)


def recursion_operator(P0: Bivector, P1: Bivector) -> FracEndo:
    """The unique N with N o P0# = P1#, as numerator / det(P0).

    Raises :class:`DegenerateBivector` with a kernel covector witness when
    P0 is degenerate."""
    A = P0.algebroid
    m0 = [list(row) for row in P0.mat]
    d = linalg.det(m0)
    if d.is_zero():
        kernel = linalg.symbolic_nullspace(m0)
        witness = kernel[0] if kernel else None
        text = "none"
        if witness is not None:
            parts = [
                f"({c})*th_{A.frame[a]}" for a, c in enumerate(witness) if not c.is_zero()
            ]
            text = " + ".join(parts)
        raise DegenerateBivector(
            "first bivector is degenerate; kernel covector witness: " + text, witness
        )
    m0t = linalg.mat_transpose(m0)
    m1t = linalg.mat_transpose([list(row) for row in P1.mat])
    num = linalg.mat_mul(m1t, linalg.adjugate(m0t))
    return FracEndo(Endo.from_matrix(A, num), linalg.det(m0t))


def hierarchy(P: Bivector, N: Endo, depth: int) -> list[tuple[int, Bivector]]:
    """The bivectors N^l P for l = 0..depth (depth capped at the rank)."""
    depth = min(depth, P.algebroid.rank)
    out = [(0, P)]
    current = P
    for l in range(1, depth + 1):
        current = N.push_bivector(current)
        out.append((l, current))
    return out


@dataclass
class HierarchyReport:
    levels: list[tuple[int, CheckReport]]
    pairwise: list[tuple[int, int, CheckReport]]

    @property
    def ok(self) -> bool:
        return all(r.ok for _, r in self.levels) and all(
            r.ok for _, _, r in self.pairwise
        )


def hierarchy_check(P: Bivector, N: Endo, depth: int) -> HierarchyReport:
    """All N^l P Poisson and pairwise compatible up to the requested depth."""
    chain = hierarchy(P, N, depth)
    levels = [(l, is_poisson(Q)) for l, Q in chain]
    pairwise = []
    for i in range(len(chain)):
        for j in range(i + 1, len(chain)):
            li, Qi = chain[i]
            lj, Qj = chain[j]
            pairwise.append((li, lj, is_poisson(Qi + Qj)))
    return HierarchyReport(levels, pairwise)


def bihamiltonian_check(
    P0: Bivector, P1: Bivector, H0: Expr, H1: Expr
) -> CheckReport:
    """The defining recursion of a bihamiltonian pair:
    P0#(d H1) = P1#(d H0)."""
    A = P0.algebroid
    X = P0.sharp(d_A(A, H1)) - P1.sharp(d_A(A, H0))
    failures = [
        (f"bihamiltonian identity fails in component {A.frame[g]}", c)
        for g, c in enumerate(X.comps)
        if not c.is_zero()
    ]
    return CheckReport(not failures, failures)
