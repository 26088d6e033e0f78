"""Graded *-algebras with the bicharacter deformation.

Three backends share one interface:

* ``LaurentAlgebra``: finitely supported Laurent series on Z^2 with the
  deformed product e_m * e_n = lam^(m2 n1) e_(m+n).
* ``FuzzyAlgebra``: the q x q matrix algebra spanned by clock/shift monomials,
  graded by (Z/q)^2 and stored in the same monomial basis.
* ``GridAlgebra``: commutative functions sampled on a uniform d-torus grid
  (theta = 0, everything has degree 0).

Monomials e_n of the torus backends are normalised so that
(c e_n)^dag = conj(c) lam^(n1 n2) e_(-n).
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .scalars import Cyclotomic, CyclotomicField, field_order_for

Degree = tuple


class BackendMismatchError(TypeError):
    """Raised when elements from different algebras are combined."""


class BandLimitError(ValueError):
    """Raised when a grid product would exceed the representable bandwidth."""


# ---------------------------------------------------------------------------
# scalar domains
# ---------------------------------------------------------------------------
class ScalarDomain:
    """Scalars of an algebra: an exact cyclotomic field or complex doubles."""

    def __init__(self, theta, exact: bool):
        self.exact = bool(exact)
        if self.exact:
            self.theta = Fraction(theta)
            self.field = CyclotomicField(field_order_for(self.theta))
            m = self.field.order
            q = self.theta.denominator
            self._lam_step = (m // q) * self.theta.numerator
            self.i = self.field.zeta(m // 4)
            self.zero = self.field.zero
            self.one = self.field.one
        else:
            self.theta = theta if isinstance(theta, Fraction) else float(theta)
            self.field = None
            self.i = 1j
            self.zero = 0j
            self.one = 1 + 0j
        self._lam_cache: dict[int, object] = {}

    def lam(self, k: int = 1):
        """lam^k with lam = exp(2 pi i theta)."""
        v = self._lam_cache.get(k)
        if v is None:
            if self.exact:
                v = self.field.zeta(self._lam_step * k)
            else:
                t = float(self.theta)
                if isinstance(self.theta, Fraction):
                    # reduce the exponent first so rational theta stays accurate
                    q = self.theta.denominator
                    r = (self.theta.numerator * k) % q
                    v = cmath.exp(2j * math.pi * r / q)
                else:
                    v = cmath.exp(2j * math.pi * t * k)
            self._lam_cache[k] = v
        return v

    def coerce(self, value):
        if self.exact:
            return self.field.coerce(value)
        if isinstance(value, Cyclotomic):
            return complex(value)
        return complex(value)

    def conj(self, value):
        return value.conjugate()

    def is_zero(self, value, tol: float = 0.0) -> bool:
        if self.exact:
            return not value
        return abs(value) <= tol

    def to_complex(self, value) -> complex:
        return complex(value)

    def magnitude(self, value) -> float:
        if self.exact:
            return abs(complex(value))
        return abs(value)


def _is_scalar(value) -> bool:
    return isinstance(value, (int, float, complex, Fraction, Cyclotomic, np.number))


# ---------------------------------------------------------------------------
# torus backends (Laurent and fuzzy)
# ---------------------------------------------------------------------------
class TorusAlgebra:
    """Common machinery of the two Z^2-type graded backends."""

    kind = "torus"
    dim = 2

    def __init__(self, theta, exact: bool = True, tol: float = 1e-10):
        self.scalars = ScalarDomain(theta, exact)
        self.theta = self.scalars.theta
        self.exact = self.scalars.exact
        self.tol = tol
        self._twin = None

    # degree arithmetic ----------------------------------------------------
    def reduce_degree(self, n: Sequence[int]) -> Degree:
        return (int(n[0]), int(n[1]))

    def add_degrees(self, m: Degree, n: Degree) -> Degree:
        return self.reduce_degree((m[0] + n[0], m[1] + n[1]))

    def neg_degree(self, n: Degree) -> Degree:
        return self.reduce_degree((-n[0], -n[1]))

    @property
    def zero_degree(self) -> Degree:
        return (0, 0)

    def theta_exponent(self, m: Degree, n: Degree) -> int:
        return m[1] * n[0] - n[1] * m[0]

    def theta_phase(self, m: Degree, n: Degree):
        """Bicharacter lam^(m2 n1 - n2 m1)."""
        return self.scalars.lam(self.theta_exponent(m, n))

    # constructors ----------------------------------------------------------
    def zero(self) -> "TorusElement":
        return TorusElement(self, {})

    def one(self) -> "TorusElement":
        return TorusElement(self, {self.zero_degree: self.scalars.one})

    def scalar(self, c) -> "TorusElement":
        return self.monomial(self.zero_degree, c)

    def monomial(self, n: Sequence[int], coeff=1) -> "TorusElement":
        c = self.scalars.coerce(coeff)
        return TorusElement(self, {self.reduce_degree(n): c})

    def from_terms(self, terms) -> "TorusElement":
        """Element from ``{degree: coeff}`` or an iterable of pairs."""
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict = {}
        for n, c in items:
            n = self.reduce_degree(n)
            c = self.scalars.coerce(c)
            acc[n] = acc[n] + c if n in acc else c
        return TorusElement(self, acc)

    def coerce(self, value) -> "TorusElement":
        if isinstance(value, TorusElement):
            if value.algebra is not self:
                raise BackendMismatchError("element belongs to a different algebra")
            return value
        if _is_scalar(value):
            return self.scalar(value)
        raise BackendMismatchError(f"cannot use {type(value).__name__} as an algebra element")

    def derivation_factor(self, n: Degree, j: int):
        return n[j]

    def approx_twin(self) -> "TorusAlgebra":
        raise NotImplementedError

    def signature(self) -> tuple:
        return (self.kind, self.theta, self.exact)


class LaurentAlgebra(TorusAlgebra):
    """Smooth noncommutative torus, truncated to finite Laurent support."""

    kind = "laurent"

    def __init__(self, theta, exact: bool = True, tol: float = 1e-10):
        super().__init__(theta, exact, tol)

    def __repr__(self) -> str:
        return f"LaurentAlgebra(theta={self.theta}, exact={self.exact})"

    def approx_twin(self) -> "LaurentAlgebra":
        if not self.exact:
            return self
        if self._twin is None:
            self._twin = LaurentAlgebra(self.theta, exact=False, tol=self.tol)
        return self._twin


class FuzzyAlgebra(TorusAlgebra):
    """The q x q matrix algebra generated by clock C and shift S with SC = lam CS.

    The monomial e_n is represented by C^n1 S^n2; degrees live in (Z/q)^2.
    """

    kind = "fuzzy"

    def __init__(self, theta, exact: bool = True, tol: float = 1e-10):
        theta = Fraction(theta)
        super().__init__(theta, exact, tol)
        self.q = theta.denominator
        if math.gcd(theta.numerator, self.q) != 1 or self.q < 2:
            raise ValueError("fuzzy torus needs theta = p/q in lowest terms with q >= 2")
        self._clock = None
        self._shift = None
        self._basis_cache: dict = {}

    def __repr__(self) -> str:
        return f"FuzzyAlgebra(theta={self.theta}, exact={self.exact})"

    def reduce_degree(self, n: Sequence[int]) -> Degree:
        return (int(n[0]) % self.q, int(n[1]) % self.q)

    def signed(self, k: int) -> int:
        """Representative of k mod q in (-q/2, q/2]."""
        k %= self.q
        return k - self.q if k > self.q // 2 else k

    def derivation_factor(self, n: Degree, j: int):
        return self.signed(n[j])

    def approx_twin(self) -> "FuzzyAlgebra":
        if not self.exact:
            return self
        if self._twin is None:
            self._twin = FuzzyAlgebra(self.theta, exact=False, tol=self.tol)
        return self._twin

    # faithful representation -------------------------------------------
    def clock(self) -> np.ndarray:
        if self._clock is None:
            lam = complex(self.scalars.lam(1))
            self._clock = np.diag([lam**k for k in range(self.q)]).astype(complex)
        return self._clock

    def shift(self) -> np.ndarray:
        if self._shift is None:
            s = np.zeros((self.q, self.q), dtype=complex)
            for k in range(self.q):
                s[(k - 1) % self.q, k] = 1.0
            self._shift = s
        return self._shift

    def basis_matrix(self, n: Degree) -> np.ndarray:
        n = self.reduce_degree(n)
        m = self._basis_cache.get(n)
        if m is None:
            m = np.linalg.matrix_power(self.clock(), n[0]) @ np.linalg.matrix_power(self.shift(), n[1])
            self._basis_cache[n] = m
        return m

    def from_matrix(self, mat: np.ndarray) -> "TorusElement":
        """Decompose a q x q complex matrix into clock/shift monomials (approx)."""
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (self.q, self.q):
            raise ValueError("matrix has the wrong size")
        terms = {}
        floor = 1e-15 * max(1.0, float(np.max(np.abs(mat))) if mat.size else 0.0)
        for a in range(self.q):
            for b in range(self.q):
                basis = self.basis_matrix((a, b))
                c = np.trace(basis.conj().T @ mat) / self.q
                if abs(c) > floor:
                    terms[(a, b)] = complex(c)
        twin = self.approx_twin()
        return TorusElement(twin, terms)


class TorusElement:
    """Finitely supported element sum_n c_n e_n of a torus-type algebra."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: TorusAlgebra, terms: dict):
        self.algebra = algebra
        sc = algebra.scalars
        if sc.exact:
            self.terms = {n: c for n, c in terms.items() if c}
        else:
            self.terms = {n: c for n, c in terms.items() if c != 0}

    # -- protocol ---------------------------------------------------------
    def __repr__(self) -> str:
        if not self.terms:
            return f"{self.algebra.kind}(0)"
        parts = [f"{c}*e{n}" for n, c in sorted(self.terms.items())]
        return f"{self.algebra.kind}(" + " + ".join(parts) + ")"

    __hash__ = None

    def _other(self, other) -> "TorusElement":
        return self.algebra.coerce(other)

    def __eq__(self, other) -> bool:
        try:
            o = self._other(other)
        except BackendMismatchError:
            return NotImplemented
        return (self - o).is_zero()

    def is_zero(self, tol: float | None = None) -> bool:
        if self.algebra.exact:
            return not self.terms
        tol = self.algebra.tol if tol is None else tol
        return all(abs(c) <= tol for c in self.terms.values())

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- linear structure ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TorusElement) and not _is_scalar(other):
            return NotImplemented
        o = self._other(other)
        out = dict(self.terms)
        for n, c in o.terms.items():
            out[n] = out[n] + c if n in out else c
        return TorusElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self) -> "TorusElement":
        return TorusElement(self.algebra, {n: -c for n, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, TorusElement) and not _is_scalar(other):
            return NotImplemented
        return self + (-self._other(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TorusElement":
        c = self.algebra.scalars.coerce(c)
        return TorusElement(self.algebra, {n: c * v for n, v in self.terms.items()})

    # -- deformed product ---------------------------------------------------
    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if not isinstance(other, TorusElement):
            return NotImplemented
        if other.algebra is not self.algebra:
            raise BackendMismatchError("elements belong to different algebras")
        alg = self.algebra
        lam = alg.scalars.lam
        out: dict = {}
        for m, a in self.terms.items():
            for n, b in other.terms.items():
                d = alg.add_degrees(m, n)
                v = a * b
                e = m[1] * n[0]
                if e:
                    v = v * lam(e)
                out[d] = out[d] + v if d in out else v
        return TorusElement(alg, out)

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        return NotImplemented

    def adjoint(self) -> "TorusElement":
        """Deformed adjoint: (c e_n)^dag = conj(c) lam^(n1 n2) e_(-n)."""
        alg = self.algebra
        lam = alg.scalars.lam
        out = {}
        for n, c in self.terms.items():
            v = c.conjugate()
            e = n[0] * n[1]
            if e:
                v = v * lam(e)
            out[alg.neg_degree(n)] = v
        return TorusElement(alg, out)

    dag = adjoint

    def twist(self, degree: Degree) -> "TorusElement":
        """sum_n Theta(n, degree) b_n, i.e. b * x = x * twist(b) for x of that degree."""
        alg = self.algebra
        if degree == alg.zero_degree or all(v == 0 for v in degree):
            return self
        lam = alg.scalars.lam
        out = {}
        for n, c in self.terms.items():
            e = alg.theta_exponent(n, degree)
            out[n] = c * lam(e) if e else c
        return TorusElement(alg, out)

    def untwist(self, degree: Degree) -> "TorusElement":
        return self.twist(self.algebra.neg_degree(degree))

    def derivation(self, j: int) -> "TorusElement":
        """delta_j(e_n) = i n_j e_n (symmetric representative of n_j on the fuzzy torus)."""
        alg = self.algebra
        if not 0 <= j < alg.dim:
            raise IndexError(f"derivation index {j} out of range")
        unit = alg.scalars.i
        out = {}
        for n, c in self.terms.items():
            f = alg.derivation_factor(n, j)
            if f:
                out[n] = c * unit * f
        return TorusElement(alg, out)

    def homogeneous_parts(self) -> list:
        return [(n, TorusElement(self.algebra, {n: c})) for n, c in sorted(self.terms.items())]

    def degrees(self) -> list:
        return sorted(self.terms)

    def is_homogeneous(self) -> bool:
        return len(self.terms) <= 1

    def degree(self) -> Degree:
        if len(self.terms) != 1:
            raise ValueError("element is not a nonzero homogeneous element")
        return next(iter(self.terms))

    def coefficient(self, n: Sequence[int]):
        return self.terms.get(self.algebra.reduce_degree(n), self.algebra.scalars.zero)

    # -- numerics -------------------------------------------------------------
    def norm(self) -> float:
        """Residual size: l1 coefficient norm (Laurent) or spectral norm (fuzzy)."""
        if isinstance(self.algebra, FuzzyAlgebra):
            if not self.terms:
                return 0.0
            return float(np.linalg.norm(self.to_matrix(), ord=2))
        if self.algebra.exact:
            return float(sum(c.abs_bound() for c in self.terms.values()))
        return float(sum(abs(c) for c in self.terms.values()))

    def to_matrix(self) -> np.ndarray:
        alg = self.algebra
        if not isinstance(alg, FuzzyAlgebra):
            raise TypeError("only fuzzy elements have a matrix representation")
        out = np.zeros((alg.q, alg.q), dtype=complex)
        for n, c in self.terms.items():
            out += complex(c) * alg.basis_matrix(n)
        return out

    def to_approx(self, twin: TorusAlgebra | None = None) -> "TorusElement":
        twin = twin or self.algebra.approx_twin()
        return TorusElement(twin, {n: complex(c) for n, c in self.terms.items()})

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Commutative evaluation sum c_n exp(i n.x) (meaningful for theta = 0)."""
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for n, c in self.terms.items():
            out += complex(c) * np.exp(1j * (n[0] * x + n[1] * y))
        return out


# ---------------------------------------------------------------------------
# grid backend
# ---------------------------------------------------------------------------
class GridAlgebra:
    """Commutative smooth functions sampled on a uniform grid of the d-torus.

    Elements may carry an exact first-derivative jet; ``derivation`` uses it
    when present and falls back to spectral differentiation otherwise.
    """

    kind = "grid"
    exact = False

    def __init__(self, shape: Sequence[int], band_limit: int | Sequence[int] | None = None, tol: float = 1e-10):
        self.shape = tuple(int(s) for s in shape)
        if any(s < 2 for s in self.shape):
            raise ValueError("grid sizes must be at least 2")
        self.dim = len(self.shape)
        # per-axis largest mode resolved without touching the Nyquist frequency
        nyquist = tuple((s - 1) // 2 for s in self.shape)
        if band_limit is None:
            self.band_limit = nyquist
        else:
            limits = (band_limit,) * self.dim if np.isscalar(band_limit) else tuple(band_limit)
            self.band_limit = tuple(min(int(b), n) for b, n in zip(limits, nyquist))
        self.theta = Fraction(0)
        self.scalars = ScalarDomain(0.0, exact=False)
        self.tol = tol
        self._coords = None
        self._wavenumbers = None

    def __repr__(self) -> str:
        return f"GridAlgebra(shape={self.shape})"

    def signature(self) -> tuple:
        return (self.kind, self.shape, self.band_limit)

    # degree stubs (everything is degree 0)
    zero_degree = (0, 0)

    def reduce_degree(self, n):
        return (0, 0)

    def add_degrees(self, m, n):
        return (0, 0)

    def neg_degree(self, n):
        return (0, 0)

    def theta_phase(self, m, n):
        return 1.0 + 0j

    def approx_twin(self) -> "GridAlgebra":
        return self

    # coordinates -----------------------------------------------------------
    def coordinates(self) -> tuple:
        """Open-grid coordinate arrays x_mu = 2 pi k / n_mu, broadcastable to the grid."""
        if self._coords is None:
            axes = []
            for mu, n in enumerate(self.shape):
                x = 2 * np.pi * np.arange(n) / n
                shape = [1] * self.dim
                shape[mu] = n
                axes.append(x.reshape(shape))
            self._coords = tuple(axes)
        return self._coords

    def wavenumbers(self, mu: int) -> np.ndarray:
        if self._wavenumbers is None:
            self._wavenumbers = tuple(np.fft.fftfreq(n, d=1.0 / n) for n in self.shape)
        k = self._wavenumbers[mu].copy()
        n = self.shape[mu]
        if n % 2 == 0:
            k[n // 2] = 0.0  # odd derivative of the Nyquist mode is dropped
        shape = [1] * self.dim
        shape[mu] = n
        return k.reshape(shape)

    # constructors ------------------------------------------------------------
    def zero(self) -> "GridElement":
        return GridElement(self, np.asarray(0j))

    def one(self) -> "GridElement":
        return GridElement(self, np.asarray(1 + 0j))

    def scalar(self, c) -> "GridElement":
        return GridElement(self, np.asarray(complex(c)))

    def monomial(self, n, coeff=1) -> "GridElement":
        """Fourier mode coeff * exp(i k.x) for an integer wave vector k."""
        return self.trig_poly([(n, coeff)])

    def trig_poly(self, terms: Iterable) -> "GridElement":
        """Element sum_k c_k exp(i k.x) with its exact derivative jet."""
        terms = list(terms)
        xs = self.coordinates()
        data = np.zeros(self.shape, dtype=complex)
        jet = [np.zeros(self.shape, dtype=complex) for _ in range(self.dim)]
        band = (0,) * self.dim
        for k, c in terms:
            k = tuple(int(v) for v in k)
            if len(k) != self.dim:
                raise ValueError("wave vector has the wrong length")
            phase = sum(kk * x for kk, x in zip(k, xs))
            mode = complex(c) * np.exp(1j * phase) * np.ones(self.shape)
            data += mode
            for mu in range(self.dim):
                if k[mu]:
                    jet[mu] += 1j * k[mu] * mode
            band = tuple(max(b, abs(v)) for b, v in zip(band, k))
        if _exceeds(band, self.band_limit):
            raise BandLimitError(f"mode {band} exceeds the band limit {self.band_limit}")
        return GridElement(self, data, band=band, jet=tuple(jet), poly=tuple((tuple(int(v) for v in k), complex(c)) for k, c in terms))

    def from_array(self, values, band: tuple | None = None, jet=None) -> "GridElement":
        values = np.asarray(values, dtype=complex)
        if values.ndim and values.shape != self.shape:
            raise ValueError("array does not match the grid shape")
        return GridElement(self, values, band=band, jet=jet)

    def coerce(self, value) -> "GridElement":
        if isinstance(value, GridElement):
            if value.algebra is not self:
                raise BackendMismatchError("element belongs to a different grid")
            return value
        if _is_scalar(value):
            return self.scalar(value)
        raise BackendMismatchError(f"cannot use {type(value).__name__} as a grid element")


def _exceeds(band: tuple, limit: tuple) -> bool:
    return any(b > m for b, m in zip(band, limit))


def _jet_is_zero(e: "GridElement") -> bool:
    return e.data.ndim == 0


class GridElement:
    """Sampled function with optional band limit and exact first-derivative jet."""

    __slots__ = ("algebra", "data", "band", "jet", "poly")

    def __init__(self, algebra: GridAlgebra, data: np.ndarray, band: tuple | None = None, jet=None, poly=None):
        self.algebra = algebra
        self.data = data
        self.band = band
        if data.ndim == 0:
            jet = None
            poly = None
            self.band = (0,) * algebra.dim
        self.jet = jet
        # trigonometric-polynomial terms, kept so derivatives of every order stay exact
        self.poly = poly

    def __repr__(self) -> str:
        if self.data.ndim == 0:
            return f"grid({complex(self.data)})"
        return f"grid(max|f|={float(np.max(np.abs(self.data))):.3g}, band={self.band})"

    __hash__ = None

    # jets -------------------------------------------------------------------
    def _jet_or_none(self):
        """Derivative arrays if known exactly, zeros for constants, else None."""
        if self.data.ndim == 0:
            return tuple(np.asarray(0j) for _ in range(self.algebra.dim))
        return self.jet

    def is_constant(self) -> bool:
        return self.data.ndim == 0

    def _other(self, other) -> "GridElement":
        return self.algebra.coerce(other)

    def __eq__(self, other) -> bool:
        try:
            o = self._other(other)
        except BackendMismatchError:
            return NotImplemented
        return (self - o).is_zero()

    def is_zero(self, tol: float | None = None) -> bool:
        tol = self.algebra.tol if tol is None else tol
        return self.norm() <= tol

    def __bool__(self) -> bool:
        return bool(np.any(self.data != 0))

    # linear structure ---------------------------------------------------------
    def _combine_band(self, o: "GridElement"):
        if self.band is None or o.band is None:
            return None
        return tuple(max(a, b) for a, b in zip(self.band, o.band))

    def __add__(self, other):
        if not isinstance(other, GridElement) and not _is_scalar(other):
            return NotImplemented
        o = self._other(other)
        ja, jb = self._jet_or_none(), o._jet_or_none()
        jet = None if ja is None or jb is None else tuple(a + b for a, b in zip(ja, jb))
        return GridElement(self.algebra, self.data + o.data, band=self._combine_band(o), jet=jet)

    __radd__ = __add__

    def __neg__(self) -> "GridElement":
        jet = None if self.jet is None else tuple(-a for a in self.jet)
        return GridElement(self.algebra, -self.data, band=self.band, jet=jet)

    def __sub__(self, other):
        if not isinstance(other, GridElement) and not _is_scalar(other):
            return NotImplemented
        return self + (-self._other(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "GridElement":
        c = complex(c)
        jet = None if self.jet is None else tuple(c * a for a in self.jet)
        return GridElement(self.algebra, c * self.data, band=self.band, jet=jet)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if not isinstance(other, GridElement):
            return NotImplemented
        if other.algebra is not self.algebra:
            raise BackendMismatchError("elements belong to different grids")
        if self.data.ndim == 0:
            return other.scale(complex(self.data))
        if other.data.ndim == 0:
            return self.scale(complex(other.data))
        if self.band is None or other.band is None:
            band = None
        else:
            band = tuple(a + b for a, b in zip(self.band, other.band))
            if _exceeds(band, self.algebra.band_limit):
                raise BandLimitError(
                    f"product bandwidth {band} exceeds the grid limit {self.algebra.band_limit}"
                )
        ja, jb = self._jet_or_none(), other._jet_or_none()
        jet = None
        if ja is not None and jb is not None:
            jet = tuple(a * other.data + self.data * b for a, b in zip(ja, jb))
        return GridElement(self.algebra, self.data * other.data, band=band, jet=jet)

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        return NotImplemented

    def adjoint(self) -> "GridElement":
        jet = None if self.jet is None else tuple(np.conj(a) for a in self.jet)
        return GridElement(self.algebra, np.conj(self.data), band=self.band, jet=jet)

    dag = adjoint

    def twist(self, degree) -> "GridElement":
        return self

    def untwist(self, degree) -> "GridElement":
        return self

    # pointwise nonlinear maps --------------------------------------------------
    def reciprocal(self) -> "GridElement":
        if np.any(self.data == 0):
            raise ZeroDivisionError("reciprocal of a function with zeros")
        inv = 1.0 / self.data
        jet = None if self.jet is None else tuple(-a * inv * inv for a in self.jet)
        return GridElement(self.algebra, inv, band=None, jet=jet)

    def sqrt(self) -> "GridElement":
        root = np.sqrt(self.data)
        jet = None
        if self.jet is not None:
            jet = tuple(a / (2.0 * root) for a in self.jet)
        return GridElement(self.algebra, root, band=None, jet=jet)

    # calculus -----------------------------------------------------------------
    def derivation(self, j: int) -> "GridElement":
        """Partial derivative along axis j (exact jet if known, spectral otherwise)."""
        alg = self.algebra
        if not 0 <= j < alg.dim:
            raise IndexError(f"derivation index {j} out of range")
        if self.data.ndim == 0:
            return alg.zero()
        if self.poly is not None:
            terms = [(k, c * 1j * k[j]) for k, c in self.poly if k[j]]
            return alg.trig_poly(terms) if terms else alg.zero()
        if self.jet is not None:
            return GridElement(alg, self.jet[j], band=self.band)
        spec = np.fft.fft(self.data, axis=j)
        spec *= 1j * alg.wavenumbers(j)
        return GridElement(alg, np.fft.ifft(spec, axis=j), band=self.band)

    def homogeneous_parts(self) -> list:
        return [((0, 0), self)]

    def degrees(self) -> list:
        return [(0, 0)] if bool(self) else []

    def is_homogeneous(self) -> bool:
        return True

    def degree(self):
        return (0, 0)

    # numerics -------------------------------------------------------------------
    def norm(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def values(self) -> np.ndarray:
        return np.broadcast_to(self.data, self.algebra.shape)

    def to_approx(self, twin=None) -> "GridElement":
        return self

    def compress(self, tol: float = 0.0) -> "GridElement":
        """Collapse to a constant when the samples do not vary."""
        if self.data.ndim == 0:
            return self
        first = self.data.flat[0]
        if np.max(np.abs(self.data - first)) <= tol:
            return GridElement(self.algebra, np.asarray(complex(first)))
        return self


AlgebraElement = (TorusElement, GridElement)


# ---------------------------------------------------------------------------
# free functions mirroring the operation names
# ---------------------------------------------------------------------------
def theta_phase(algebra, m: Degree, n: Degree):
    """Bicharacter Theta(m, n) = lam^(m2 n1 - n2 m1)."""
    return algebra.theta_phase(m, n)


def star_mul(a, b):
    """Deformed product of two elements of the same algebra."""
    if a.algebra is not b.algebra:
        raise BackendMismatchError("elements belong to different algebras")
    return a * b


def star_adjoint(a):
    return a.adjoint()


def derivation(j: int, a):
    return a.derivation(j)


def homogeneous_parts(a) -> list:
    return a.homogeneous_parts()
