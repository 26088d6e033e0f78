from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import THETAS, degrees, homogeneous_elements, torus_elements
from oracles import fuzzy_parts, theta_phase_complex
from lcw.algebra import (
    BackendMismatchError,
    BandLimitError,
    FuzzyAlgebra,
    GridAlgebra,
    LaurentAlgebra,
    derivation,
    homogeneous_parts,
    star_adjoint,
    star_mul,
    theta_phase,
)

ALGEBRAS = [LaurentAlgebra(t) for t in THETAS] + [FuzzyAlgebra(Fraction(1, 3)), FuzzyAlgebra(Fraction(1, 5))]
IDS = [repr(a) for a in ALGEBRAS]


# -- theta phase -----------------------------------------------------------------
def test_theta_phase_example_fifth(laurent15):
    lam = laurent15.scalars.lam
    assert theta_phase(laurent15, (1, 0), (0, 1)) == lam(-1)
    assert theta_phase(laurent15, (1, 0), (0, 1)) == lam(4)


def test_theta_phase_example_third():
    alg = LaurentAlgebra(Fraction(1, 3))
    value = theta_phase(alg, (2, 1), (1, 2))
    assert value == alg.scalars.one
    assert complex(value) == pytest.approx(theta_phase_complex(Fraction(1, 3), (2, 1), (1, 2)), abs=1e-12)


@pytest.mark.parametrize("alg", ALGEBRAS, ids=IDS)
@given(m=degrees(), n=degrees(), k=degrees())
def test_theta_phase_bicharacter(alg, m, n, k):
    th = lambda a, b: theta_phase(alg, a, b)
    mk = (m[0] + k[0], m[1] + k[1])
    assert th(m, m) == alg.scalars.one
    assert th(n, m) == th(m, n).conjugate()
    assert th(n, m) == th(m, n).inverse()
    assert th(mk, n) == th(m, n) * th(k, n)
    assert complex(th(m, n)) == pytest.approx(theta_phase_complex(alg.theta, m, n), abs=1e-12)


# -- deformed product ------------------------------------------------------------------
def test_star_mul_examples(laurent15):
    a = laurent15.monomial((1, 0))
    b = laurent15.monomial((0, 1))
    ab = star_mul(a, b)
    ba = star_mul(b, a)
    assert ab == laurent15.monomial((1, 1))
    assert ba == laurent15.monomial((1, 1), laurent15.scalars.lam(1))
    assert ab == ba.scale(theta_phase(laurent15, (1, 0), (0, 1)))
    assert star_mul(laurent15.one(), b) == b


@pytest.mark.parametrize("alg", ALGEBRAS, ids=IDS)
@given(data=st.data())
def test_commutation_rule(alg, data):
    a = data.draw(homogeneous_elements(alg))
    b = data.draw(homogeneous_elements(alg))
    assert a * b == (b * a).scale(theta_phase(alg, a.degree(), b.degree()))
    assert (a * b).degree() == alg.add_degrees(a.degree(), b.degree())


@pytest.mark.parametrize("alg", ALGEBRAS, ids=IDS)
@given(data=st.data())
def test_product_associative_and_adjoint_antimultiplicative(alg, data):
    a, b, c = (data.draw(torus_elements(alg)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert star_adjoint(a * b) == star_adjoint(b) * star_adjoint(a)
    assert star_adjoint(star_adjoint(a)) == a
    assert (a + b) * c == a * c + b * c


@pytest.mark.parametrize("theta", [Fraction(1, 3), Fraction(1, 5), Fraction(2, 5)])
@given(data=st.data())
def test_fuzzy_matches_clock_shift_matrices(theta, data):
    alg = FuzzyAlgebra(theta)
    a = data.draw(torus_elements(alg))
    b = data.draw(torus_elements(alg))
    np.testing.assert_allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-10)
    np.testing.assert_allclose(a.adjoint().to_matrix(), a.to_matrix().conj().T, atol=1e-10)


@pytest.mark.parametrize("theta", [Fraction(1, 5), Fraction(2, 5)])
@given(data=st.data())
def test_exact_and_approx_agree(theta, data):
    alg = LaurentAlgebra(theta)
    twin = alg.approx_twin()
    a = data.draw(torus_elements(alg))
    b = data.draw(torus_elements(alg))
    lhs = (a * b).to_approx(twin)
    rhs = a.to_approx(twin) * b.to_approx(twin)
    assert (lhs - rhs).norm() < 1e-12
    assert (a.adjoint().to_approx(twin) - a.to_approx(twin).adjoint()).norm() < 1e-12


# -- adjoint -------------------------------------------------------------------
def test_adjoint_examples(laurent15):
    e11 = laurent15.monomial((1, 1))
    assert star_adjoint(e11) == laurent15.monomial((-1, -1), laurent15.scalars.lam(1))
    assert star_adjoint(star_adjoint(e11)) == e11
    assert star_adjoint(laurent15.monomial((1, 0))) == laurent15.monomial((-1, 0))


def test_adjoint_is_antilinear(laurent15):
    i = laurent15.scalars.i
    a = laurent15.monomial((2, 1))
    assert star_adjoint(a.scale(i)) == star_adjoint(a).scale(-i)


# -- derivations -----------------------------------------------------------------
def test_derivation_examples(laurent15):
    i = laurent15.scalars.i
    assert derivation(0, laurent15.one()).is_zero()
    u = laurent15.monomial((1, 0))
    assert derivation(0, u) == u.scale(i)
    assert derivation(1, u).is_zero()


@pytest.mark.parametrize("alg", ALGEBRAS[:4], ids=IDS[:4])
@given(data=st.data(), j=st.integers(0, 1))
def test_derivation_leibniz(alg, data, j):
    a = data.draw(torus_elements(alg))
    b = data.draw(torus_elements(alg))
    assert derivation(j, a * b) == derivation(j, a) * b + a * derivation(j, b)
    # derivations are *-derivations
    assert derivation(j, a.adjoint()) == derivation(j, a).adjoint()


def test_fuzzy_leibniz_within_band():
    alg = FuzzyAlgebra(Fraction(1, 5))
    a = alg.from_terms([((1, 0), 1), ((0, 1), 2)])
    b = alg.from_terms([((1, 1), 1), ((-1, 0), 3)])
    for j in range(2):
        assert derivation(j, a * b) == derivation(j, a) * b + a * derivation(j, b)


# -- homogeneous parts -----------------------------------------------------------
def test_homogeneous_parts_examples(laurent15):
    one = laurent15.one()
    assert homogeneous_parts(one) == [((0, 0), one)]
    s = laurent15.monomial((1, 0)) + laurent15.monomial((0, 2), 3)
    parts = homogeneous_parts(s)
    assert [d for d, _ in parts] == [(0, 2), (1, 0)]


def test_fuzzy_clock_plus_shift_parts():
    alg = FuzzyAlgebra(Fraction(1, 3))
    C = alg.monomial((1, 0)).to_matrix()
    S = alg.monomial((0, 1)).to_matrix()
    elem = alg.from_matrix(C + S)
    assert sorted(d for d, _ in homogeneous_parts(elem)) == [(0, 1), (1, 0)]
    expected = fuzzy_parts(C + S, Fraction(1, 3))
    assert sorted(expected) == [(0, 1), (1, 0)]
    for d, part in homogeneous_parts(elem):
        assert complex(part.coefficient(d)) == pytest.approx(expected[d], abs=1e-12)


@pytest.mark.parametrize("alg", ALGEBRAS, ids=IDS)
@given(data=st.data())
def test_homogeneous_parts_recombine(alg, data):
    a = data.draw(torus_elements(alg))
    parts = homogeneous_parts(a)
    total = alg.zero()
    for d, p in parts:
        assert p.is_homogeneous() and p.degree() == d
        total = total + p
    assert total == a
    assert len({d for d, _ in parts}) == len(parts)


def test_backend_mismatch():
    a = LaurentAlgebra(Fraction(1, 5)).monomial((1, 0))
    b = LaurentAlgebra(Fraction(1, 3)).monomial((1, 0))
    with pytest.raises(BackendMismatchError):
        star_mul(a, b)


# -- grid backend ------------------------------------------------------------------
def test_grid_spectral_derivative_matches_classical():
    alg = GridAlgebra((32, 32))
    x, y = np.broadcast_arrays(*alg.coordinates())
    f = alg.from_array(np.exp(np.cos(x)) * np.sin(2 * y))
    np.testing.assert_allclose(f.derivation(0).values(), -np.sin(x) * np.exp(np.cos(x)) * np.sin(2 * y), atol=1e-10)
    np.testing.assert_allclose(f.derivation(1).values(), 2 * np.exp(np.cos(x)) * np.cos(2 * y), atol=1e-10)


def test_grid_trig_poly_derivatives_are_exact():
    alg = GridAlgebra((8, 8, 16))
    f = alg.trig_poly([((0, 0, 3), 1.0), ((1, 0, 0), 2.0)])
    x, _, z = np.broadcast_arrays(*alg.coordinates())
    np.testing.assert_allclose(f.derivation(2).derivation(2).values(), -9 * np.exp(3j * z), atol=1e-12)
    np.testing.assert_allclose(f.derivation(0).values(), 2j * np.exp(1j * x), atol=1e-12)


def test_grid_band_limit_is_an_error():
    alg = GridAlgebra((8, 8))
    f = alg.monomial((2, 0))
    with pytest.raises(BandLimitError):
        f * f
    with pytest.raises(BandLimitError):
        alg.monomial((4, 0))


def test_grid_per_axis_band_limit():
    alg = GridAlgebra((4, 4, 64))
    assert alg.band_limit == (1, 1, 31)
    alg.monomial((0, 0, 20))


@given(k1=st.integers(-3, 3), k2=st.integers(-3, 3), j=st.integers(0, 1))
def test_grid_leibniz(k1, k2, j):
    alg = GridAlgebra((16, 16))
    a = alg.trig_poly([((k1, 1), 1.0), ((0, 0), 0.5)])
    b = alg.trig_poly([((1, k2), 2.0 - 1j)])
    lhs = (a * b).derivation(j)
    rhs = a.derivation(j) * b + a * b.derivation(j)
    assert (lhs - rhs).norm() < 1e-10


def test_grid_homogeneous_parts_single():
    alg = GridAlgebra((8, 8))
    f = alg.monomial((1, 1))
    assert homogeneous_parts(f) == [((0, 0), f)]
