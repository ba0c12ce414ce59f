"""Self-consistency of the built-in fixtures across presentations."""

from fractions import Fraction

import pytest

from pnalgebroid.expr import Expr, parse, ZERO, ONE
from pnalgebroid.poisson import is_poisson, are_compatible, symplectic_check
from pnalgebroid.nijenhuis import recursion_operator
from pnalgebroid.fixtures import (
    build_toda, build_semidirect, build_aff1,
)


@pytest.fixture(scope="module")
def toda2():
    return build_toda(2)


def test_toda_needs_two_sites():
    with pytest.raises(ValueError):
        build_toda(1)


def test_toda_canonical_pair(toda2):
    assert is_poisson(toda2.lam0).ok
    assert is_poisson(toda2.lam1).ok
    assert are_compatible(toda2.lam0, toda2.lam1).ok


def test_toda_closed_form_recursion_action(toda2):
    # N(d/dp2) = p2 d/dp2 + d/dq1 for two sites
    A = toda2.tangent
    got = toda2.N.apply(A.frame_section(3))
    want = A.section([ONE, ZERO, ZERO, parse("p2")])
    assert (got - want).is_zero()


def test_toda_three_presentations_are_algebroids(toda2):
    for A in (toda2.tangent, toda2.flaschka, toda2.atiyah):
        assert A.check_algebroid().ok


def test_flaschka_pair_is_poisson(toda2):
    assert is_poisson(toda2.lam0_bar).ok
    assert is_poisson(toda2.lam1_bar).ok
    assert are_compatible(toda2.lam0_bar, toda2.lam1_bar).ok


def test_invariant_frame_pair_is_poisson(toda2):
    assert is_poisson(toda2.pi0).ok
    assert is_poisson(toda2.pi1).ok
    assert are_compatible(toda2.pi0, toda2.pi1).ok


def test_hamiltonians_project(toda2):
    from pnalgebroid.reduction import rewrite_basic

    assert (rewrite_basic(toda2.epi_flaschka, toda2.H0) - toda2.H0_bar).is_zero()
    assert (rewrite_basic(toda2.epi_flaschka, toda2.H1) - toda2.H1_bar).is_zero()


def test_toda3_flaschka_bivector_shape():
    t = build_toda(3)
    # lam0_bar = sum a_i da_i ^ (db_i - db_{i+1})
    a1, a2 = parse("a1"), parse("a2")
    assert (t.lam0_bar.mat[0][2] - a1).is_zero()
    assert (t.lam0_bar.mat[0][3] + a1).is_zero()
    assert (t.lam0_bar.mat[1][3] - a2).is_zero()
    assert (t.lam0_bar.mat[1][4] + a2).is_zero()
    assert t.lam0_bar.mat[0][1].is_zero()


def test_aff1_fixture():
    a = build_aff1()
    assert a.algebroid.check_algebroid().ok
    rep = symplectic_check(a.omega)
    assert rep.ok and (rep.determinant - ONE).is_zero()
    # projector property and the advertised kernel span
    assert (a.N.compose(a.N) - a.N).is_zero()
    assert len(a.kernel_basis) == 2
    for X in a.kernel_basis:
        assert a.N.apply(X).is_zero()


def test_aff1_kernel_span_matches_hand_solution():
    from pnalgebroid import linalg

    a = build_aff1()
    # hand solution of the orthogonality conditions: {xi2 - mu2 eps1, eps2}
    hand = [
        [ZERO, ONE, parse("-mu2"), ZERO],
        [ZERO, ZERO, ZERO, ONE],
    ]
    rows = [list(X.comps) for X in a.kernel_basis] + hand
    assert linalg.symbolic_rank(rows) == 2


def test_semidirect_splitting_validation():
    # complement of the chosen subalgebra must be an ideal
    with pytest.raises(ValueError):
        build_semidirect(2, {(0, 1): {1: Fraction(1)}}, [1])
    # abelian algebra: any choice works and the projector is constant
    f = build_semidirect(2, {}, [0])
    assert (f.N.compose(f.N) - f.N).is_zero()
    from pnalgebroid.nijenhuis import torsion_check

    assert torsion_check(f.N).ok
