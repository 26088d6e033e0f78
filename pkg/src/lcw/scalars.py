"""Exact arithmetic in cyclotomic fields and scalar helpers.

An element of Q(zeta_M) is stored as an integer numerator vector in the power
basis 1, zeta, ..., zeta^(phi(M)-1) together with a positive common
denominator.  Reduction by the M-th cyclotomic polynomial is done once per
product through a precomputed table of reduced powers, so equal values always
have equal representations.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence


@lru_cache(maxsize=None)
def _cyclotomic_coeffs(m: int) -> tuple[int, ...]:
    """Coefficients of the m-th cyclotomic polynomial, lowest degree first."""
    from sympy import Poly, Symbol, cyclotomic_poly

    x = Symbol("x")
    coeffs = Poly(cyclotomic_poly(m, x), x).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


class CyclotomicField:
    """The field Q(zeta_M) with zeta_M = exp(2 pi i / M)."""

    _cache: dict[int, "CyclotomicField"] = {}

    def __new__(cls, order: int) -> "CyclotomicField":
        if order < 1:
            raise ValueError("cyclotomic order must be positive")
        field = cls._cache.get(order)
        if field is None:
            field = super().__new__(cls)
            field._setup(order)
            cls._cache[order] = field
        return field

    def _setup(self, order: int) -> None:
        self.order = order
        phi = _cyclotomic_coeffs(order)
        self.degree = len(phi) - 1
        n = self.degree
        # powers[k] = zeta^k reduced to the power basis, for 0 <= k < max(order, 2n)
        span = max(order, 2 * n)
        powers: list[tuple[int, ...]] = []
        current = [0] * n
        current[0] = 1
        for _ in range(span):
            powers.append(tuple(current))
            # multiply by zeta: shift up, reduce the overflow with phi (monic)
            top = current[-1]
            shifted = [0] + current[:-1]
            if top:
                for j in range(n):
                    shifted[j] -= top * phi[j]
            current = shifted
        self._powers = powers
        self._zero = Cyclotomic._raw(self, (0,) * n, 1)
        self._one = Cyclotomic._raw(self, powers[0], 1)

    def __repr__(self) -> str:
        return f"CyclotomicField({self.order})"

    def __reduce__(self):
        return (CyclotomicField, (self.order,))

    @property
    def zero(self) -> "Cyclotomic":
        return self._zero

    @property
    def one(self) -> "Cyclotomic":
        return self._one

    def zeta(self, k: int = 1) -> "Cyclotomic":
        """zeta^k for any integer k."""
        return Cyclotomic._raw(self, self._powers[k % self.order], 1)

    def from_rational(self, value) -> "Cyclotomic":
        q = Fraction(value)
        nums = [0] * self.degree
        nums[0] = q.numerator
        return Cyclotomic._raw(self, tuple(nums), q.denominator)

    def from_coefficients(self, coeffs: Sequence) -> "Cyclotomic":
        """Element with the given rational coefficients on 1, zeta, zeta^2, ..."""
        fracs = [Fraction(c) for c in coeffs]
        if len(fracs) > self.order:
            raise ValueError("too many coefficients for this field")
        acc = [Fraction(0)] * self.degree
        for k, c in enumerate(fracs):
            if c:
                for j, v in enumerate(self._powers[k]):
                    if v:
                        acc[j] += c * v
        return Cyclotomic._from_fractions(self, acc)

    def coerce(self, value) -> "Cyclotomic":
        if isinstance(value, Cyclotomic):
            if value.field is self:
                return value
            return value.lift(self)
        if isinstance(value, (int, Rational)):
            return self.from_rational(value)
        if isinstance(value, complex) or isinstance(value, float):
            raise TypeError("cannot coerce a floating value into an exact field")
        raise TypeError(f"cannot coerce {type(value).__name__} into {self!r}")


class Cyclotomic:
    """Immutable element of a cyclotomic field."""

    __slots__ = ("field", "num", "den", "_hash")

    @classmethod
    def _raw(cls, field: CyclotomicField, num: tuple[int, ...], den: int) -> "Cyclotomic":
        obj = object.__new__(cls)
        g = den
        for v in num:
            if v:
                g = math.gcd(g, v)
                if g == 1:
                    break
        if g != 1 and g != 0:
            num = tuple(v // g for v in num)
            den //= g
        if not any(num):
            den = 1
        obj.field = field
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def _from_fractions(cls, field: CyclotomicField, coeffs: Iterable[Fraction]) -> "Cyclotomic":
        coeffs = list(coeffs)
        den = 1
        for c in coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        num = tuple(int(c * den) for c in coeffs)
        return cls._raw(field, num, den)

    # -- basic protocol -------------------------------------------------
    def __repr__(self) -> str:
        terms = []
        for k, v in enumerate(self.num):
            if v:
                c = Fraction(v, self.den)
                terms.append(f"{c}*z^{k}" if k else f"{c}")
        body = " + ".join(terms) if terms else "0"
        return f"<{body} in Q(z{self.field.order})>"

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(Fraction(self.num[0], self.den))
            else:
                self._hash = hash((self.field.order, self.num, self.den))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Cyclotomic):
            if other.field is not self.field:
                return self - other == 0
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Rational)):
            return self.is_rational() and Fraction(self.num[0], self.den) == other
        return NotImplemented

    def __bool__(self) -> bool:
        return any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.den) for v in self.num)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "Cyclotomic":
        return self.field.coerce(other)

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            num = tuple(a + b for a, b in zip(self.num, o.num))
            return Cyclotomic._raw(self.field, num, self.den)
        num = tuple(a * o.den + b * self.den for a, b in zip(self.num, o.num))
        return Cyclotomic._raw(self.field, num, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic._raw(self.field, tuple(-a for a in self.num), self.den)

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return Cyclotomic._raw(self.field, tuple(a * other for a in self.num), self.den)
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        n = self.field.degree
        conv = [0] * (2 * n - 1)
        for i, a in enumerate(self.num):
            if a:
                for j, b in enumerate(o.num):
                    if b:
                        conv[i + j] += a * b
        out = conv[:n]
        powers = self.field._powers
        for d in range(n, 2 * n - 1):
            c = conv[d]
            if c:
                for j, v in enumerate(powers[d]):
                    if v:
                        out[j] += c * v
        return Cyclotomic._raw(self.field, tuple(out), self.den * o.den)

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclotomic":
        """Complex conjugate: zeta^k -> zeta^(-k)."""
        n = self.field.degree
        out = [0] * n
        powers = self.field._powers
        m = self.field.order
        for k, a in enumerate(self.num):
            if a:
                for j, v in enumerate(powers[(-k) % m]):
                    if v:
                        out[j] += a * v
        return Cyclotomic._raw(self.field, tuple(out), self.den)

    def inverse(self) -> "Cyclotomic":
        """Multiplicative inverse by solving the multiplication-matrix system."""
        if not self:
            raise ZeroDivisionError("inverse of zero")
        n = self.field.degree
        basis = [Cyclotomic._raw(self.field, tuple(1 if j == k else 0 for j in range(n)), 1) for k in range(n)]
        cols = [(self * b).coefficients() for b in basis]
        # augmented matrix rows: sum_k cols[k][r] x_k = delta_{r,0}
        rows = [[cols[k][r] for k in range(n)] + [Fraction(int(r == 0))] for r in range(n)]
        for c in range(n):
            pivot = next(r for r in range(c, n) if rows[r][c] != 0)
            rows[c], rows[pivot] = rows[pivot], rows[c]
            inv = 1 / rows[c][c]
            rows[c] = [v * inv for v in rows[c]]
            for r in range(n):
                if r != c and rows[r][c] != 0:
                    f = rows[r][c]
                    rows[r] = [a - f * b for a, b in zip(rows[r], rows[c])]
        return Cyclotomic._from_fractions(self.field, (rows[r][n] for r in range(n)))

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return self * self.field.from_rational(1 / q)
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "Cyclotomic":
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def lift(self, field: CyclotomicField) -> "Cyclotomic":
        """Embed into a field whose order is a multiple of this one."""
        if field.order % self.field.order:
            raise ValueError("target field does not contain this one")
        step = field.order // self.field.order
        acc = field.zero
        for k, v in enumerate(self.num):
            if v:
                acc = acc + field.zeta(k * step) * Fraction(v, self.den)
        return acc

    def __complex__(self) -> complex:
        m = self.field.order
        total = 0j
        for k, v in enumerate(self.num):
            if v:
                total += v * cmath.exp(2j * math.pi * k / m)
        return total / self.den

    def to_complex(self) -> complex:
        return complex(self)

    def abs_bound(self) -> float:
        """Upper bound for |value| (sum of absolute coefficients)."""
        return sum(abs(v) for v in self.num) / self.den


def to_complex(value) -> complex:
    """Embed an exact or floating scalar into the complex numbers."""
    if isinstance(value, Cyclotomic):
        return complex(value)
    return complex(value)


def conj(value):
    """Complex conjugation for both scalar kinds."""
    if isinstance(value, Cyclotomic):
        return value.conjugate()
    if isinstance(value, (int, Rational)):
        return value
    return value.conjugate()


def field_order_for(theta: Fraction) -> int:
    """Order M = lcm(4, q) of the field holding lambda = exp(2 pi i p/q) and i."""
    q = Fraction(theta).denominator
    return 4 * q // math.gcd(4, q)
