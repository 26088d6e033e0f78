from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lcw import catalog
from lcw.algebra import FuzzyAlgebra, LaurentAlgebra

settings.register_profile(
    "lcw",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lcw")

THETAS = [Fraction(0), Fraction(1, 3), Fraction(1, 5), Fraction(2, 5)]


@st.composite
def degrees(draw, bound: int = 3):
    return (draw(st.integers(-bound, bound)), draw(st.integers(-bound, bound)))


@st.composite
def exact_scalars(draw, algebra):
    """Gaussian-rational scalars, optionally times a power of lambda."""
    sc = algebra.scalars
    re = Fraction(draw(st.integers(-4, 4)), draw(st.integers(1, 3)))
    im = Fraction(draw(st.integers(-4, 4)), draw(st.integers(1, 3)))
    c = sc.coerce(re) + sc.i * sc.coerce(im)
    return c * sc.lam(draw(st.integers(0, 9)))


@st.composite
def torus_elements(draw, algebra, max_terms: int = 3, bound: int = 2):
    n = draw(st.integers(0, max_terms))
    terms = [(draw(degrees(bound)), draw(exact_scalars(algebra))) for _ in range(n)]
    return algebra.from_terms(terms)


@st.composite
def homogeneous_elements(draw, algebra, bound: int = 3):
    c = draw(exact_scalars(algebra).filter(bool))
    return algebra.monomial(draw(degrees(bound)), c)


@pytest.fixture(scope="session")
def shipped():
    cache: dict = {}

    def get(name):
        if name not in cache:
            cache[name] = catalog.SHIPPED[name]()
        return cache[name]

    return get


@pytest.fixture(scope="session")
def synthetic():
    cache: dict = {}

    def get(name):
        if name not in cache:
            cache[name] = catalog.SYNTHETIC[name]()
        return cache[name]

    return get


@pytest.fixture(scope="session")
def laurent15():
    return LaurentAlgebra(Fraction(1, 5))


@pytest.fixture(scope="session")
def fuzzy5():
    return FuzzyAlgebra(Fraction(1, 5))


# acceptance results, filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'}")
