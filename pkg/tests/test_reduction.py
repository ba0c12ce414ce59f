"""Projection along bundle epimorphisms, leaf restriction, pointwise
stable-kernel reduction and the subalgebroid verdicts."""

import os

import pytest

from pnalgebroid.expr import Expr, parse, ZERO, ONE
from pnalgebroid.algebroid import LieAlgebroid, KForm
from pnalgebroid.poisson import Bivector, symplectic_check
from pnalgebroid.nijenhuis import Endo
from pnalgebroid.reduction import (
    EpimorphismSpec, NotBasic, LeafSpec, default_tolerance, rewrite_basic,
    projectable_section_check, projectable_bivector_check,
    projectable_endo_check, project_section, project_bivector, project_endo,
    characteristic_rank, restrict_to_leaf, riesz_report, sample_points,
    fiberwise_reduce, symbolic_riesz_index, kernel_subalgebroid_check,
    condition_fb_check,
)
from pnalgebroid.fixtures import build_toda, build_aff1


@pytest.fixture(scope="module")
def toda2():
    return build_toda(2)


@pytest.fixture(scope="module")
def aff1():
    return build_aff1()


# -- rewriting through the epimorphism --------------------------------------

def test_rewrite_basic_handles_exponential_images(toda2):
    epi = toda2.epi_flaschka
    e = parse("p1*exp(q1 - q2) + exp(2*q1 - 2*q2)")
    out = rewrite_basic(epi, e)
    assert (out - parse("b1*a1 + a1^2")).is_zero()


def test_rewrite_basic_rejects_nonbasic_with_witness(toda2):
    with pytest.raises(NotBasic):
        rewrite_basic(toda2.epi_flaschka, parse("q1"))
    with pytest.raises(NotBasic):
        # exp(q1 - q2) to a fractional power has no preimage
        rewrite_basic(toda2.epi_flaschka, parse("exp(3*q1 - q2)"))


def test_epimorphism_validation(toda2):
    assert toda2.epi_flaschka.validate().ok
    assert toda2.epi_atiyah.validate().ok


def test_kernel_frame_spans_anchor_kernel(toda2):
    kf = toda2.epi_flaschka.kernel_frame()
    assert len(kf) == 1
    # the kernel section is killed by the fiber map
    for row in toda2.epi_flaschka.fiber_map:
        resid = sum((c * v for c, v in zip(row, kf[0].comps)), ZERO)
        assert resid.is_zero()


# -- projectability and projection -------------------------------------------

def test_project_bivectors_to_flaschka(toda2):
    assert (project_bivector(toda2.epi_flaschka, toda2.lam0) - toda2.lam0_bar).is_zero()
    assert (project_bivector(toda2.epi_flaschka, toda2.lam1) - toda2.lam1_bar).is_zero()


def test_project_bivectors_to_invariant_frame(toda2):
    assert (project_bivector(toda2.epi_atiyah, toda2.lam0) - toda2.pi0).is_zero()
    assert (project_bivector(toda2.epi_atiyah, toda2.lam1) - toda2.pi1).is_zero()


def test_toda_recursion_endo_not_projectable_to_flaschka(toda2):
    rep = projectable_endo_check(toda2.epi_flaschka, toda2.N)
    assert not rep.ok
    assert "kernel" in rep.witness()


def test_toda_recursion_endo_projects_to_invariant_frame(toda2):
    rep = projectable_endo_check(toda2.epi_atiyah, toda2.N)
    assert rep.ok, rep.witness()
    got = project_endo(toda2.epi_atiyah, toda2.N)
    want = toda2.recursion_atiyah().exact()
    assert (got - want).is_zero()


def test_projectable_section_check(toda2):
    A = toda2.tangent
    # d/dp1 is projectable, d/dq1 is not (it sees the kernel direction)
    assert projectable_section_check(toda2.epi_flaschka, A.frame_section(2)).ok
    X = A.section([parse("q1"), ZERO, ZERO, ZERO])
    assert not projectable_section_check(toda2.epi_flaschka, X).ok


def test_characteristic_rank(toda2):
    pts = sample_points(["q1", "q2", "p1", "p2"], 5, 2)
    assert all(r.rank == 4 for r in characteristic_rank(toda2.lam0, pts))
    pts_bar = sample_points(["a1", "b1", "b2"], 5, 2, {"a1": (0.5, 2.0)})
    # an odd-dimensional antisymmetric matrix has rank at most 2 here
    assert all(r.rank == 2 for r in characteristic_rank(toda2.lam0_bar, pts_bar))


# -- leaf restriction ---------------------------------------------------------

def test_full_rank_leaf_restriction_sign(toda2):
    res = restrict_to_leaf(toda2.pi0, None, LeafSpec(full_rank=True))
    assert res.report.ok
    assert res.flat_sign == -1
    assert symplectic_check(res.omega).ok


def test_rank_deficient_leaf_restriction():
    # canonical plane bivector sitting inside a 4-dimensional base
    A = LieAlgebroid.tangent(["x", "y", "z", "w"])
    P = Bivector.from_entries(A, {(0, 1): ONE})
    leaf = LeafSpec(
        leaf_vars=["x", "y"],
        embedding={
            "x": Expr.var("x"), "y": Expr.var("y"),
            "z": parse("1"), "w": parse("2"),
        },
        covectors=[A.dual_frame_form(0), A.dual_frame_form(1)],
        frame_names=["E1", "E2"],
    )
    res = restrict_to_leaf(P, Endo.identity(A), leaf)
    assert res.report.ok
    assert res.flat_sign == -1
    assert res.algebroid.check_algebroid().ok
    rep = symplectic_check(res.omega)
    assert rep.ok
    assert (rep.determinant - ONE).is_zero()
    # the restricted endomorphism of the identity is the identity
    assert (res.endo - Endo.identity(res.algebroid)).is_zero()


# -- pointwise stable-kernel reduction ---------------------------------------

def test_riesz_reports_on_aff1(aff1):
    pts = sample_points(["mu1", "mu2"], 40, 11, {"mu1": (-2, 2), "mu2": (-2, 2)})
    reports = riesz_report(aff1.N, pts)
    assert all(r.index == 1 for r in reports)
    assert all(r.dim_kernel == 2 for r in reports)
    assert all(r.direct_sum_ok for r in reports)


def test_riesz_index_zero_for_invertible(toda2):
    pts = sample_points(
        ["a1", "b1", "b2"], 10, 5, {"a1": (0.5, 2.0)}
    )
    N = toda2.recursion_atiyah().exact()
    reports = riesz_report(N, pts)
    assert all(r.index == 0 for r in reports)


def test_fiberwise_reduce_aff1(aff1):
    import numpy as np

    pts = sample_points(["mu1", "mu2"], 30, 13, {"mu1": (-2, 2), "mu2": (-2, 2)})
    reports = fiberwise_reduce(aff1.P, aff1.N, pts)
    for r in reports:
        assert r.dim_quotient == 2
        assert r.p_nondegenerate and r.n_invertible
        # the projector restricts to the identity on its image
        assert np.allclose(r.n_tilde, np.eye(2), atol=1e-9)


def test_sample_points_reproducible():
    a = sample_points(["x", "y"], 5, 42)
    b = sample_points(["x", "y"], 5, 42)
    assert a == b
    assert a != sample_points(["x", "y"], 5, 43)


def test_tolerance_env_override(monkeypatch):
    monkeypatch.setenv("PNALGEBROID_TOL", "1e-6")
    assert default_tolerance() == 1e-6


# -- symbolic subalgebroid verdicts ------------------------------------------

def test_symbolic_riesz_index(aff1):
    assert symbolic_riesz_index(aff1.N) == 1


def test_kernel_subalgebroid_verdicts_on_aff1(aff1):
    rep = kernel_subalgebroid_check(aff1.N)
    assert rep.index == 1
    assert len(rep.kernel_frame) == 2
    assert rep.decomposition_ok
    assert rep.image_closed.ok
    # the honest verdict: the stable kernel of this projector is NOT closed
    # under the bracket (its torsion is nonzero, so closure is not implied)
    assert not rep.kernel_closed.ok
    assert rep.kernel_closed.witness() is not None


def test_kernel_subalgebroid_closed_for_torsion_free(toda2):
    # constant diagonal projector on the plane: torsion-free, kernel and
    # image both close trivially
    A = LieAlgebroid.tangent(["x", "y"])
    N = Endo.from_matrix(A, [[ONE, ZERO], [ZERO, ZERO]])
    rep = kernel_subalgebroid_check(N)
    assert rep.index == 1
    assert rep.kernel_closed.ok and rep.image_closed.ok
    assert rep.decomposition_ok and rep.ok


def test_rank_drop_of_anchor_image_on_kernel(aff1):
    """The anchor image of the stable kernel drops rank on the locus mu2=0,
    so the regularity hypotheses are genuinely open conditions."""
    import numpy as np
    from pnalgebroid import linalg
    from pnalgebroid.expr import Point

    A = aff1.algebroid
    kernel = aff1.kernel_basis
    def rho_rank(values):
        pt = Point(values)
        rows = [
            [
                sum(
                    X.comps[a].evaluate(pt) * A.anchor[a][i].evaluate(pt)
                    for a in range(A.rank)
                )
                for i in range(A.dim)
            ]
            for X in kernel
        ]
        return linalg.numeric_rank(np.array(rows)).rank

    assert rho_rank({"mu1": 0.7, "mu2": 1.3}) == 2
    assert rho_rank({"mu1": 0.7, "mu2": 0.0}) == 1


def test_condition_fb_dimension_count(aff1):
    pts = sample_points(["mu1", "mu2"], 10, 3, {"mu1": (-2, 2), "mu2": (-2, 2)})
    reports = condition_fb_check(aff1.algebroid, aff1.kernel_basis, pts, seed=4)
    assert all(r.consistent for r in reports)
    assert all(r.rank_subbundle == 2 for r in reports)
