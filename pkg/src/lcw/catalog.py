"""Ready-made geometries used by the tests, the CLI and the shipped documents."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .algebra import FuzzyAlgebra, GridAlgebra, LaurentAlgebra
from .geometry import Geometry, from_coordinate_frame

# (2 + cos z)^2 and (2 + sin(z)/2)^2 as trigonometric polynomials in z
CURVED_T3_METRIC = (
    [((0, 0, 0), 4.5), ((0, 0, 1), 2.0), ((0, 0, -1), 2.0), ((0, 0, 2), 0.25), ((0, 0, -2), 0.25)],
    [((0, 0, 0), 4.125), ((0, 0, 1), -1.0j), ((0, 0, -1), 1.0j), ((0, 0, 2), -0.0625), ((0, 0, -2), -0.0625)],
    [((0, 0, 0), 1.0)],
)


def make_algebra(backend: str, theta=Fraction(0), exact: bool = True, shape: Sequence[int] | None = None,
                 band_limit: int | None = None):
    """Algebra for a backend name ``laurent``, ``fuzzy`` or ``grid``."""
    if backend == "laurent":
        return LaurentAlgebra(theta, exact=exact)
    if backend == "fuzzy":
        return FuzzyAlgebra(theta, exact=exact)
    if backend == "grid":
        return GridAlgebra(shape or (16, 16), band_limit=band_limit)
    raise ValueError(f"unknown backend {backend!r}")


def flat_torus(theta=Fraction(0), backend: str = "laurent", exact: bool = True, self_dagger: bool = False,
               shape: Sequence[int] | None = None, algebra=None) -> Geometry:
    """Coordinate frame {dx, dy} (or {i dx, i dy}) on the flat (noncommutative) torus."""
    alg = algebra or make_algebra(backend, theta, exact, shape)
    dim = alg.dim
    scale = alg.scalars.i if self_dagger else 1
    F = [[alg.scalar(scale) if m == n else alg.zero() for n in range(dim)] for m in range(dim)]
    name = f"flat-{backend}-theta-{theta}" + ("-self-dagger" if self_dagger else "")
    return from_coordinate_frame(alg, F, [(0, 0)] * dim, name=name,
                                 metadata={"kind": "flat", "self_dagger": self_dagger})


def twisted_frame(theta=Fraction(1, 3), backend: str = "fuzzy", exact: bool = True, algebra=None) -> Geometry:
    """Orthonormal non-closed frame {dx u, dy v} with u = e_(0,1), v = e_(1,0)."""
    alg = algebra or make_algebra(backend, theta, exact)
    u = alg.monomial((0, 1))
    v = alg.monomial((1, 0))
    F = [[u, alg.zero()], [alg.zero(), v]]
    return from_coordinate_frame(alg, F, [(0, 1), (1, 0)], name=f"twisted-{backend}-theta-{theta}",
                                 metadata={"kind": "twisted"})


def positive_frame(theta=Fraction(1, 5), backend: str = "fuzzy", exact: bool = True, algebra=None) -> Geometry:
    """Dagger-invariant frame of four homogeneous one-forms with a rank-two Gram projection.

    w1 = a dx u, w2 = -conj(a) dx u^dag, w3 = a dy v, w4 = -conj(a) dy v^dag with
    a = (1 + i)/2, so that w1^dag = w2 and w3^dag = w4.
    """
    alg = algebra or make_algebra(backend, theta, exact)
    sc = alg.scalars
    half = sc.coerce(Fraction(1, 2)) if alg.exact else 0.5
    a = (sc.one + sc.i) * half
    abar = a.conjugate()
    u = alg.monomial((0, 1))
    v = alg.monomial((1, 0))
    z = alg.zero()
    F = [
        [u.scale(a), u.adjoint().scale(-abar), z, z],
        [z, z, v.scale(a), v.adjoint().scale(-abar)],
    ]
    degrees = [(0, 1), (0, -1), (1, 0), (-1, 0)]
    return from_coordinate_frame(alg, F, degrees, name=f"positive-{backend}-theta-{theta}",
                                 metadata={"kind": "positive"})


def mixed_frame(theta=Fraction(1, 5), backend: str = "fuzzy", exact: bool = True, algebra=None) -> Geometry:
    """Dagger-invariant frame whose elements mix dx and dy with a relative phase.

    w1 = (dx + i dy) u / 2, w3 = (dx - i dy) v / 2 and their dagger partners.
    Unlike :func:`positive_frame` the contributions to W do not cancel, so the
    connection form is nonzero.
    """
    alg = algebra or make_algebra(backend, theta, exact)
    sc = alg.scalars
    half = sc.coerce(Fraction(1, 2)) if alg.exact else 0.5
    i = sc.i
    u = alg.monomial((0, 1))
    v = alg.monomial((1, 0))
    cols = []
    for e, (a, b) in ((u, (half, i * half)), (v, (half, -i * half))):
        cols.append([e.scale(a), e.scale(b)])
        cols.append([e.adjoint().scale(-a.conjugate()), e.adjoint().scale(-b.conjugate())])
    F = [[c[m] for c in cols] for m in range(2)]
    degrees = [(0, 1), (0, -1), (1, 0), (-1, 0)]
    return from_coordinate_frame(alg, F, degrees, name=f"mixed-{backend}-theta-{theta}",
                                 metadata={"kind": "mixed"})


def scaled_flat_frame(backend: str = "laurent", theta=Fraction(0), exact: bool = True, algebra=None) -> Geometry:
    """Frame {dx u, dy u} of the flat torus with a unitary monomial u = e_(1,0)."""
    alg = algebra or make_algebra(backend, theta, exact)
    u = alg.monomial((1, 0))
    F = [[u, alg.zero()], [alg.zero(), u]]
    return from_coordinate_frame(alg, F, [(1, 0), (1, 0)], name=f"scaled-{backend}-theta-{theta}",
                                 metadata={"kind": "scaled"})


def diagonal_metric_geometry(shape: Sequence[int], diagonal: Sequence, band_limit: int | None = None,
                             name: str = "curved-grid") -> Geometry:
    """Orthonormal frame w_mu = sqrt(g_mu) dx^mu of a diagonal metric on a grid torus.

    ``diagonal[mu]`` is a list of ``(wave_vector, coefficient)`` pairs giving g_mu.
    """
    alg = GridAlgebra(shape, band_limit=band_limit)
    dim = alg.dim
    if len(diagonal) != dim:
        raise ValueError("need one diagonal metric entry per grid axis")
    g = [alg.trig_poly(terms) for terms in diagonal]
    for mu, gm in enumerate(g):
        vals = gm.values()
        if abs(vals.imag).max() > 1e-12 or vals.real.min() <= 0:
            raise ValueError(f"metric entry {mu} is not real and positive on the grid")
    f = [gm.sqrt() for gm in g]
    F = [[f[m] if m == n else alg.zero() for n in range(dim)] for m in range(dim)]
    ginv = [[g[m].reciprocal() if m == n else alg.zero() for n in range(dim)] for m in range(dim)]
    meta = {"kind": "diagonal-metric", "metric": [list(t) for t in diagonal]}
    return from_coordinate_frame(alg, F, [(0, 0)] * dim, inverse_metric=ginv, name=name,
                                 orthonormal=True, metadata=meta)


def curved_t3(n: int = 32) -> Geometry:
    """T^3 with metric diag((2 + cos z)^2, (2 + sin(z)/2)^2, 1) on an n^3 grid."""
    return diagonal_metric_geometry((n, n, n), CURVED_T3_METRIC, name=f"curved-t3-{n}")


def flat_grid(shape: Sequence[int] = (16, 16)) -> Geometry:
    """Flat coordinate frame on a grid torus."""
    dim = len(shape)
    diag = [[((0,) * dim, 1.0)] for _ in range(dim)]
    return diagonal_metric_geometry(shape, diag, name="flat-grid")


SHIPPED = {
    "flat-t2": lambda: flat_torus(Fraction(0), "laurent"),
    "flat-nc-torus-1-3": lambda: flat_torus(Fraction(1, 3), "laurent"),
    "flat-nc-torus-1-5": lambda: flat_torus(Fraction(1, 5), "laurent"),
    "flat-nc-torus-1-5-self-dagger": lambda: flat_torus(Fraction(1, 5), "laurent", self_dagger=True),
    "fuzzy-q5-positive": lambda: positive_frame(Fraction(1, 5), "fuzzy"),
    "laurent-positive-1-5": lambda: positive_frame(Fraction(1, 5), "laurent"),
    "fuzzy-q5-mixed": lambda: mixed_frame(Fraction(1, 5), "fuzzy"),
    "laurent-mixed-1-5": lambda: mixed_frame(Fraction(1, 5), "laurent"),
    "curved-t3": lambda: curved_t3(32),
    "flat-grid-t2": lambda: flat_grid((16, 16)),
}

# frames that are not dagger-invariant: Hermitian torsion-free connections
# exist but the one with Pi A = 0 is not a bimodule connection
SYNTHETIC = {
    "twisted-nc-torus-1-5": lambda: twisted_frame(Fraction(1, 5), "laurent"),
    "fuzzy-q3-twisted": lambda: twisted_frame(Fraction(1, 3), "fuzzy"),
    "fuzzy-q3-twisted-approx": lambda: twisted_frame(Fraction(1, 3), "fuzzy", exact=False),
}
