from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import torus_elements
from oracles import curved_metric_factors, solve_connection_form
from lcw import catalog, oracle
from lcw.algebra import FuzzyAlgebra
from lcw.connection import (
    Connection,
    DagConcordanceError,
    HypothesisError,
    bimodule_correction,
    certify,
    compare_mod_sym3,
    compute_W,
    concordance_defect,
    connection_form_closed,
    connection_form_series,
    curvature,
    cyclicity_residual,
    frame_change_tensor,
    grassmann,
    hermitian_pairing_defect,
    hermitian_residual,
    levi_civita,
    projection_report,
    torsion_residuals,
    torsion_tensor,
)
from lcw.geometry import Geometry
from lcw.projections import geometric_decay_residuals
from lcw.tensors import ModuleOperator, TensorElement, dense_representation, tensor_dagger, tensor_dense

EXACT = {
    "flat-1/5": lambda: catalog.flat_torus(Fraction(1, 5)),
    "positive-1/5": lambda: catalog.positive_frame(Fraction(1, 5), "laurent"),
    "mixed-1/5": lambda: catalog.mixed_frame(Fraction(1, 5), "laurent"),
    "mixed-fuzzy-1/5": lambda: catalog.mixed_frame(Fraction(1, 5), "fuzzy"),
    "twisted-1/5": lambda: catalog.twisted_frame(Fraction(1, 5), "laurent"),
    "twisted-fuzzy-1/3": lambda: catalog.twisted_frame(Fraction(1, 3), "fuzzy"),
}
_cache: dict = {}


def geom(name) -> Geometry:
    if name not in _cache:
        _cache[name] = EXACT[name]()
    return _cache[name]


def lc(name) -> Connection:
    key = ("lc", name)
    if key not in _cache:
        _cache[key] = levi_civita(geom(name), "series")
    return _cache[key]


# -- Grassmann connection and W ---------------------------------------------------------
def test_grassmann_examples():
    g = catalog.flat_torus(Fraction(0))
    nabla = grassmann(g)
    assert nabla(g.basis(0)).is_zero()
    u = g.algebra.monomial((1, 0))
    assert nabla(g.basis(0).right_mul(u)) == g.basis(0).otimes(g.differential0(u))


@pytest.mark.parametrize("name", sorted(EXACT))
def test_grassmann_is_hermitian(name):
    g = geom(name)
    nabla = grassmann(g)
    assert hermitian_residual(nabla).is_zero()
    for b in g.test_elements(3, seed=5):
        x, y = g.basis(0).right_mul(b), g.basis(g.N - 1)
        assert hermitian_pairing_defect(nabla, x, y).is_zero()


def test_W_vanishes_on_closed_frames():
    W, Wd = compute_W(geom("flat-1/5"))
    assert W.is_zero() and Wd.is_zero()


def test_W_curved_t3_coordinates():
    g = catalog.diagonal_metric_geometry((4, 4, 32), catalog.CURVED_T3_METRIC)
    W, _ = compute_W(g)
    comps = g.coordinate_components(W)
    z = np.broadcast_to(g.algebra.coordinates()[2], g.algebra.shape)
    f, fp, h, hp = curved_metric_factors(z)
    expected = {(2, 0, 0): -0.5 * f * fp, (0, 2, 0): 0.5 * f * fp,
                (2, 1, 1): -0.5 * h * hp, (1, 2, 1): 0.5 * h * hp}
    for key in set(comps) | set(expected):
        got = np.broadcast_to(comps[key].data, z.shape) if key in comps else 0.0
        np.testing.assert_allclose(got, expected.get(key, 0.0), atol=1e-12)


@pytest.mark.parametrize("name", ["mixed-1/5", "twisted-1/5", "positive-1/5"])
def test_torsion_of_grassmann_is_W(name):
    g = geom(name)
    W, _ = compute_W(g)
    T = torsion_tensor(grassmann(g))
    assert T == W - g.P.apply(W)


def test_certify_grassmann_on_curved_frame():
    rep = certify(grassmann(geom("mixed-1/5")))
    assert rep.hermitian and not rep.torsion_free
    assert not rep.passed
    assert rep.residuals["torsion_free"] > 0


# -- connection forms ------------------------------------------------------------------
def test_series_gives_zero_form_when_W_vanishes():
    g = geom("flat-1/5")
    assert connection_form_series(g).is_zero()


def test_positive_frame_W_cancels():
    W, _ = compute_W(geom("positive-1/5"))
    assert W.is_zero()


@pytest.mark.parametrize("name", sorted(EXACT))
def test_series_certifies(name):
    rep = certify(lc(name))
    assert rep.passed or not rep.bimodule, rep.to_dict()
    assert rep.hermitian and rep.torsion_free and rep.dag_concordant and rep.metric_compatible


@pytest.mark.parametrize("name", ["mixed-1/5", "mixed-fuzzy-1/5"])
def test_series_equals_closed_form(name):
    g = geom(name)
    A = connection_form_series(g)
    assert not A.is_zero()
    assert A == connection_form_closed(g)
    Pi = projection_report(g).pi
    assert compare_mod_sym3(levi_civita(g, "closed"), lc(name), Pi).equivalent


def test_closed_form_on_curved_grid():
    g = catalog.curved_t3(8)
    s = levi_civita(g, "series")
    c = levi_civita(g, "closed")
    assert (s.A - c.A).norm() < 1e-12


@pytest.mark.parametrize("name", ["twisted-1/5", "twisted-fuzzy-1/3"])
def test_closed_form_requires_cyclic_W(name):
    g = geom(name)
    assert not cyclicity_residual(g).is_zero()
    with pytest.raises(HypothesisError) as info:
        connection_form_closed(g)
    assert info.value.residual > 0
    assert levi_civita(g, "auto").label == "series"


@pytest.mark.parametrize("make", [
    lambda: catalog.twisted_frame(Fraction(1, 3), "fuzzy", exact=False),
    lambda: catalog.mixed_frame(Fraction(1, 5), "fuzzy", exact=False),
], ids=["twisted-q3", "mixed-q5"])
def test_series_matches_dense_solve(make):
    g = make()
    rep = projection_report(g)
    W, Wd = compute_W(g)
    x, residual, rank = solve_connection_form(
        dense_representation(g.P), dense_representation(g.Q), dense_representation(rep.pi),
        tensor_dense(W), tensor_dense(Wd),
    )
    assert residual < 1e-10
    assert rank == x.shape[0]
    A = levi_civita(g, "series").A
    np.testing.assert_allclose(tensor_dense(A), x, atol=1e-10)


def test_dag_concordance_failure_is_reported():
    g = geom("mixed-1/5")
    bare = Geometry(g.frame, ModuleOperator.zero(g.frame, 2), g.frame_differentials,
                    g.coordinate_differentials, g.lift_corrections, g.coordinate_frame, name="psi-zero")
    with pytest.raises(DagConcordanceError) as info:
        connection_form_series(bare)
    assert info.value.residual > 0
    assert not info.value.defect.is_zero()


def test_unknown_method():
    with pytest.raises(ValueError):
        levi_civita(geom("flat-1/5"), "magic")


# -- invariants of the certified connection ----------------------------------------------
@pytest.mark.parametrize("name", sorted(EXACT))
def test_hermitian_sum_is_self_dagger(name):
    g = geom(name)
    nabla = lc(name)
    fr = nabla.frame
    lhs = TensorElement.zero(fr, 3)
    rhs = TensorElement.zero(fr, 3)
    for j in range(g.N):
        lhs = lhs + nabla.on_frame(j).otimes(fr.dagger_vector(j))
        rhs = rhs + g.basis(j).otimes(tensor_dagger(nabla.on_frame(j)))
    assert lhs == rhs
    assert lhs == tensor_dagger(lhs)


@pytest.mark.parametrize("name", sorted(EXACT))
def test_connection_form_equations(name):
    g = geom(name)
    A = lc(name).A
    W, Wd = compute_W(g)
    assert A - g.P.apply(A) == -W
    assert A - g.Q.apply(A) == -Wd
    assert tensor_dagger(A) == A
    tp, tq = torsion_residuals(lc(name))
    assert tp.is_zero() and tq.is_zero()


@pytest.mark.parametrize("name", sorted(EXACT))
def test_partial_sums(name):
    g = geom(name)
    A = lc(name).A
    W, Wd = compute_W(g)
    PQ = g.P @ g.Q
    t = W + g.P.apply(Wd)
    power = A
    partial = TensorElement.zero(g.frame, 3)
    term = t
    for _ in range(4):
        power = PQ.apply(power)
        partial = partial + term
        term = PQ.apply(term)
        # (1 - (PQ)^n) A = -sum_{k<n} (PQ)^k t
        assert A - power == -partial


@pytest.mark.parametrize("name", ["mixed-1/5", "mixed-fuzzy-1/5"])
def test_geometric_decay_on_W(name):
    g = geom(name)
    W, _ = compute_W(g)
    assert all(r.is_zero() for r in geometric_decay_residuals(g.P, g.Q, W, 4))


def test_concordance_defect_vanishes_in_every_frame():
    alg = catalog.make_algebra("laurent", Fraction(1, 5))
    frames = [catalog.flat_torus(Fraction(1, 5), algebra=alg),
              catalog.scaled_flat_frame("laurent", Fraction(1, 5), algebra=alg),
              catalog.positive_frame(Fraction(1, 5), "laurent", algebra=alg),
              catalog.mixed_frame(Fraction(1, 5), "laurent", algebra=alg)]
    for g in frames:
        assert concordance_defect(g).is_zero()


@pytest.mark.parametrize("name", ["flat-1/5", "mixed-1/5", "mixed-fuzzy-1/5"])
@given(data=st.data())
def test_real_forms_map_to_sigma_real_tensors(name, data):
    g = geom(name)
    nabla = lc(name)
    alg = g.algebra
    band = (alg.q // 2) // 2 if isinstance(alg, FuzzyAlgebra) else 1
    b = data.draw(torus_elements(alg, bound=band))
    eta = g.basis(data.draw(st.integers(0, g.N - 1))).right_mul(b)
    real = eta - tensor_dagger(eta)
    out = nabla(real)
    assert tensor_dagger(g.sigma.apply(out)) == out


@pytest.mark.parametrize("name", ["mixed-1/5", "twisted-1/5", "mixed-fuzzy-1/5"])
@given(data=st.data())
def test_connection_leibniz(name, data):
    g = geom(name)
    nabla = lc(name)
    alg = g.algebra
    band = (alg.q // 2) // 2 if isinstance(alg, FuzzyAlgebra) else 1
    b = data.draw(torus_elements(alg, bound=band))
    eta = g.basis(data.draw(st.integers(0, g.N - 1)))
    assert nabla(eta.right_mul(b)) == nabla(eta).right_mul(b) + eta.otimes(g.differential0(b))


# -- uniqueness -------------------------------------------------------------------------
@pytest.mark.parametrize("name", ["mixed-1/5", "mixed-fuzzy-1/5", "positive-1/5"])
def test_symmetric_perturbation_keeps_certification(name):
    g = geom(name)
    c = lc(name)
    Pi = projection_report(g).pi
    t = g.basis(0, 0, 1).right_mul(g.algebra.monomial((1, 0))) + g.basis(1, 1, 1)
    s = Pi.apply(t + tensor_dagger(t))
    assert not s.is_zero() and tensor_dagger(s) == s
    c2 = c.perturbed(s)
    rep = certify(c2)
    assert rep.hermitian and rep.torsion_free
    cmp = compare_mod_sym3(c, c2, Pi)
    assert cmp.equivalent and c2.A != c.A


@pytest.mark.parametrize("name", ["mixed-1/5", "flat-1/5"])
def test_non_symmetric_perturbation_breaks_torsion(name):
    g = geom(name)
    c = lc(name)
    Pi = projection_report(g).pi
    t = g.basis(0, 1, 1)
    s = t + tensor_dagger(t)
    assert not (s - Pi.apply(s)).is_zero()
    c2 = c.perturbed(s)
    assert not certify(c2).torsion_free
    assert not compare_mod_sym3(c, c2, Pi).equivalent


# -- curvature ----------------------------------------------------------------------------
def test_flat_curvature_vanishes():
    g = geom("flat-1/5")
    c = lc("flat-1/5")
    for j in range(g.N):
        assert curvature(c, g.basis(j)).is_zero()


def test_curved_t3_curvature_matches_riemann():
    g = catalog.diagonal_metric_geometry((4, 4, 64), catalog.CURVED_T3_METRIC)
    c = levi_civita(g, "series")
    alg = g.algebra
    pts = np.stack([np.broadcast_to(x, alg.shape).reshape(-1) for x in alg.coordinates()], axis=1)
    gg, dg, ddg = oracle.metric_jets(oracle.diagonal_entries(catalog.CURVED_T3_METRIC), 3, pts)
    K = oracle.curvature_on_coordinate_forms(oracle.riemann(gg, dg, ddg))
    assert np.max(np.abs(K)) > 0.5
    for nu in range(3):
        comps = g.coordinate_components(curvature(c, g.coordinate_one_form(nu)))
        for b, a, m in np.ndindex(3, 3, 3):
            v = comps.get((b, a, m))
            got = 0.0 if v is None else np.broadcast_to(v.data, alg.shape).reshape(-1)
            np.testing.assert_allclose(got, K[:, nu, b, a, m], atol=1e-8)


# -- change of frame -----------------------------------------------------------------------
@pytest.mark.parametrize("theta", [Fraction(0), Fraction(1, 5)])
def test_frame_change_tensor_routes_agree(theta):
    alg = catalog.make_algebra("laurent", theta)
    flat = catalog.flat_torus(theta, algebra=alg)
    for other in (catalog.scaled_flat_frame("laurent", theta, algebra=alg),
                  catalog.positive_frame(theta, "laurent", algebra=alg),
                  catalog.mixed_frame(theta, "laurent", algebra=alg)):
        direct, via = frame_change_tensor(flat, other)
        assert direct == via
        assert tensor_dagger(direct) == direct
    direct, via = frame_change_tensor(flat, flat)
    assert direct.is_zero() and via.is_zero()


# -- bimodule correction -------------------------------------------------------------------
@pytest.mark.parametrize("name", sorted(catalog.SHIPPED))
def test_bimodule_correction_vanishes_on_shipped(name, shipped):
    g = shipped(name)
    rep = bimodule_correction(levi_civita(g))
    assert rep.solved and rep.is_zero, rep.to_dict()


def test_bimodule_correction_on_synthetic_twisted_frame():
    g = catalog.SYNTHETIC["twisted-nc-torus-1-5"]()
    c0 = levi_civita(g, "series")
    assert not certify(c0).bimodule
    rep = bimodule_correction(c0)
    assert rep.solved and not rep.is_zero
    fixed = certify(c0.perturbed(rep.B))
    assert fixed.bimodule and fixed.passed


def test_bimodule_correction_inconsistent_braiding():
    g = geom("mixed-1/5")
    rep = bimodule_correction(lc("mixed-1/5"), ModuleOperator.identity(g.frame, 2))
    assert not rep.solved and rep.B is None
    assert "no solution" in rep.detail


def test_bimodule_correction_singular_braiding():
    g = geom("mixed-1/5")
    rep = bimodule_correction(lc("mixed-1/5"), ModuleOperator.zero(g.frame, 2))
    assert not rep.solved
    assert rep.detail.startswith("braiding not invertible")
