from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import degrees, homogeneous_elements, torus_elements
from lcw import catalog
from lcw.algebra import LaurentAlgebra
from lcw.tensors import (
    Frame,
    ModuleOperator,
    TensorElement,
    alpha_left,
    alpha_left_inv,
    alpha_right,
    alpha_right_inv,
    build_PQ,
    build_sigma_theta,
    dense_representation,
    extend_left,
    inner_product,
    is_central,
    operator_from_dense,
    tensor_dagger,
)

GEOMETRIES = {
    "flat-1/5": catalog.flat_torus(Fraction(1, 5)),
    "flat-1/5-self-dagger": catalog.flat_torus(Fraction(1, 5), self_dagger=True),
    "twisted-1/5": catalog.twisted_frame(Fraction(1, 5), "laurent"),
    "positive-1/5": catalog.positive_frame(Fraction(1, 5), "laurent"),
    "positive-fuzzy-1/5": catalog.positive_frame(Fraction(1, 5), "fuzzy"),
    "mixed-1/5": catalog.mixed_frame(Fraction(1, 5), "laurent"),
    "mixed-fuzzy-1/5": catalog.mixed_frame(Fraction(1, 5), "fuzzy"),
}
NAMES = sorted(GEOMETRIES)


@st.composite
def tensors(draw, frame, k, max_terms=3):
    n = draw(st.integers(0, max_terms))
    coeffs = {}
    for _ in range(n):
        I = tuple(draw(st.integers(0, frame.N - 1)) for _ in range(k))
        coeffs[I] = draw(torus_elements(frame.algebra, max_terms=2, bound=1))
    return TensorElement(frame, k, coeffs)


# -- dagger ------------------------------------------------------------------
def test_dagger_example_swaps_and_cancels_signs():
    g = GEOMETRIES["flat-1/5"]
    w1, w2 = g.basis(0), g.basis(1)
    assert tensor_dagger(w1) == -w1
    assert tensor_dagger(w1.otimes(w2)) == w2.otimes(w1)


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data(), k=st.integers(1, 3))
def test_dagger_is_an_antilinear_involution(name, data, k):
    fr = GEOMETRIES[name].frame
    t = data.draw(tensors(fr, k))
    s = data.draw(tensors(fr, k))
    b = data.draw(torus_elements(fr.algebra, bound=1))
    assert tensor_dagger(tensor_dagger(t)) == t
    assert tensor_dagger(t + s) == tensor_dagger(t) + tensor_dagger(s)
    # (t b)^dag = b^* t^dag
    assert tensor_dagger(t.right_mul(b)) == tensor_dagger(t).left_mul(b.adjoint())


@pytest.mark.parametrize("name", NAMES)
def test_quantum_metric_is_self_dagger(name):
    G = GEOMETRIES[name].quantum_metric()
    assert tensor_dagger(G) == G


# -- inner products -----------------------------------------------------------
@pytest.mark.parametrize("name", ["flat-1/5", "twisted-1/5"])
def test_orthonormal_inner_products(name):
    g = GEOMETRIES[name]
    alg = g.algebra
    for i, j in itertools.product(range(g.N), repeat=2):
        expected = alg.one() if i == j else alg.zero()
        assert inner_product(g.basis(i), g.basis(j)) == expected


def test_deformed_inner_product_example():
    g = GEOMETRIES["flat-1/5"]
    alg = g.algebra
    e11 = alg.monomial((1, 1))
    omega = g.basis(0).right_mul(e11)
    eta = g.basis(0)
    # the undeformed adjoint would give e_(-1,-1); the deformation contributes lambda
    assert inner_product(omega, eta) == alg.monomial((-1, -1), alg.scalars.lam(1))


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_inner_product_degree_law(name, data):
    g = GEOMETRIES[name]
    alg = g.algebra
    a = data.draw(homogeneous_elements(alg, bound=2))
    b = data.draw(homogeneous_elements(alg, bound=2))
    i = data.draw(st.integers(0, g.N - 1))
    j = data.draw(st.integers(0, g.N - 1))
    omega, eta = g.basis(i).right_mul(a), g.basis(j).right_mul(b)
    ip = inner_product(omega, eta)
    if ip.is_zero():
        return
    deg = lambda t: alg.add_degrees(g.frame.degrees[t[0]], t[1].degree())
    want = alg.add_degrees(deg((j, b)), alg.neg_degree(deg((i, a))))
    assert ip.degrees() == [want]


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_inner_product_hermitian_and_right_linear(name, data):
    fr = GEOMETRIES[name].frame
    s = data.draw(tensors(fr, 2))
    t = data.draw(tensors(fr, 2))
    b = data.draw(torus_elements(fr.algebra, bound=1))
    assert inner_product(s, t).adjoint() == inner_product(t, s)
    assert inner_product(s, t.right_mul(b)) == inner_product(s, t) * b


# -- alpha maps -------------------------------------------------------------------
def test_alpha_example_orthonormal():
    g = GEOMETRIES["flat-1/5"]
    w1, w2 = g.basis(0), g.basis(1)
    A = w1.otimes(w2).otimes(tensor_dagger(w1))
    assert alpha_right(A)(w1) == w1.otimes(w2)
    assert alpha_right(A)(w2).is_zero()


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_alpha_of_metric_is_identity(name, data):
    g = GEOMETRIES[name]
    eta = data.draw(tensors(g.frame, 1))
    assert alpha_right(g.quantum_metric())(eta) == eta


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_alpha_round_trip(name, data):
    fr = GEOMETRIES[name].frame
    A = data.draw(tensors(fr, 3))
    assert alpha_right_inv(alpha_right(A), fr) == A
    assert alpha_left_inv(alpha_left(A), fr) == A


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_alpha_right_is_right_linear(name, data):
    fr = GEOMETRIES[name].frame
    A = data.draw(tensors(fr, 3))
    w = data.draw(tensors(fr, 1))
    b = data.draw(torus_elements(fr.algebra, bound=1))
    assert alpha_right(A)(w.right_mul(b)) == alpha_right(A)(w).right_mul(b)


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_alpha_intertwines_dagger(name, data):
    fr = GEOMETRIES[name].frame
    A = data.draw(tensors(fr, 2))
    x = data.draw(tensors(fr, 1))
    y = data.draw(tensors(fr, 1))
    assert inner_product(x, alpha_right(A)(y)) == inner_product(alpha_right(tensor_dagger(A))(x), y)


# -- braiding and P, Q ------------------------------------------------------------------
def test_sigma_theta_synthetic_degrees():
    alg = LaurentAlgebra(Fraction(1, 5))
    one, zero = alg.one(), alg.zero()
    fr = Frame(alg, [(1, 0), (0, 1)], [[one, zero], [zero, one]], [[zero, zero], [zero, zero]])
    sigma = build_sigma_theta(fr)
    w12 = TensorElement.basis(fr, (0, 1))
    assert sigma.apply(w12) == TensorElement.basis(fr, (1, 0), alg.scalars.lam(-1))


def test_sigma_theta_on_central_frame_is_flip():
    g = GEOMETRIES["flat-1/5"]
    sigma = build_sigma_theta(g.frame)
    for a, b in itertools.product(range(g.N), repeat=2):
        assert sigma.apply(g.basis(a, b)) == g.basis(b, a)


@pytest.mark.parametrize("name", NAMES)
def test_braid_relation_on_all_basis_three_tensors(name):
    g = GEOMETRIES[name]
    s1 = extend_left(g.sigma)
    s2 = build_PQ(g.sigma)[1]
    lhs, rhs = s1 @ s2 @ s1, s2 @ s1 @ s2
    for I in g.frame.labels(3):
        e = TensorElement.basis(g.frame, I)
        assert lhs.apply(e) == rhs.apply(e)


def test_PQ_block_structure_for_symmetrizer():
    g = GEOMETRIES["flat-1/5"]
    P, Q = build_PQ(g.psi)
    half = g.algebra.scalars.coerce(Fraction(1, 2))
    for a, b, c in itertools.product(range(2), repeat=3):
        e = g.basis(a, b, c)
        assert P.apply(e) == (g.basis(a, b, c) + g.basis(b, a, c)).scale(half)
        assert Q.apply(e) == (g.basis(a, b, c) + g.basis(a, c, b)).scale(half)


def test_PQ_of_identity_is_identity():
    g = GEOMETRIES["flat-1/5"]
    one = ModuleOperator.identity(g.frame, 2)
    P, Q = build_PQ(one)
    assert P.equals(ModuleOperator.identity(g.frame, 3))
    assert Q.equals(ModuleOperator.identity(g.frame, 3))


@pytest.mark.parametrize("name", NAMES)
def test_P_kills_two_forms_tensor_one_forms(name):
    g = GEOMETRIES[name]
    anti = g.antisymmetrizer
    P, _ = build_PQ(g.psi)
    for I in g.frame.labels(3):
        e = g.basis(*I)
        assert P.apply(extend_left(anti).apply(e)).is_zero()


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_dagger_swaps_P_and_Q(name, data):
    g = GEOMETRIES[name]
    t = data.draw(tensors(g.frame, 3))
    assert tensor_dagger(g.P.apply(t)) == g.Q.apply(tensor_dagger(t))


# -- centre -------------------------------------------------------------------------
@pytest.mark.parametrize("theta", [Fraction(1, 3), Fraction(1, 5)])
@given(n=degrees(2))
def test_centre_characterisation(theta, n):
    g = catalog.flat_torus(theta)
    alg = g.algebra
    t = g.basis(0, 1).right_mul(alg.monomial(n))
    gens = [alg.monomial((1, 0)), alg.monomial((0, 1))]
    fixed = all(alg.theta_phase(m.degree(), alg.reduce_degree(n)) == alg.scalars.one for m in gens)
    assert is_central(t, gens) == fixed


@pytest.mark.parametrize("name", NAMES)
def test_quantum_metric_central(name):
    g = GEOMETRIES[name]
    gens = [g.algebra.monomial((1, 0)), g.algebra.monomial((0, 1))]
    assert is_central(g.quantum_metric(), gens)


# -- dense representation -------------------------------------------------------------
def test_dense_representation_round_trip_fuzzy():
    g = GEOMETRIES["positive-fuzzy-1/5"]
    mat = dense_representation(g.P)
    back = operator_from_dense(g.frame, 3, mat)
    np.testing.assert_allclose(dense_representation(back), mat, atol=1e-12)
    # the faithful representation is multiplicative
    np.testing.assert_allclose(dense_representation(g.P @ g.Q), mat @ dense_representation(g.Q), atol=1e-12)
