"""Right-frame coordinate calculus on tensor powers of the one-forms.

A tensor ``t`` in T^k is stored by its right coefficients, ``t = sum_I w_I t_I``
with ``w_I = w_i1 (x) ... (x) w_ik``.  Coordinates are kept canonical, meaning
``t_I = <w_I, t>``; for a non-orthonormal frame this fixes the otherwise
ambiguous representation and makes equality a literal comparison.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import FuzzyAlgebra, GridAlgebra, GridElement, LaurentAlgebra, TorusElement


class NonHomogeneousFrameError(ValueError):
    """Raised when frame data is incompatible with the declared degrees."""


class UnsupportedNormError(NotImplementedError):
    """Raised when an operator norm is requested on a backend without one."""


def _elem_zero(e, tol=None) -> bool:
    return e.is_zero(tol) if tol is not None else e.is_zero()


# ---------------------------------------------------------------------------
# frame
# ---------------------------------------------------------------------------
class Frame:
    """A finite right frame (w_j) of the one-forms.

    Parameters
    ----------
    algebra
        Coefficient algebra.
    degrees
        Degree of each frame element.
    gram
        N x N matrix with entries <w_i, w_j>; must be a projection.
    dagger
        N x N matrix D with w_j^dag = sum_i w_i D_ij.
    """

    def __init__(self, algebra, degrees: Sequence, gram: Sequence[Sequence], dagger: Sequence[Sequence]):
        self.algebra = algebra
        self.degrees = tuple(algebra.reduce_degree(d) for d in degrees)
        self.N = len(self.degrees)
        self.gram = [[algebra.coerce(g) for g in row] for row in gram]
        self.dagger = [[algebra.coerce(g) for g in row] for row in dagger]
        for name, mat in (("gram", self.gram), ("dagger", self.dagger)):
            if len(mat) != self.N or any(len(row) != self.N for row in mat):
                raise ValueError(f"{name} matrix must be {self.N} x {self.N}")
        one, zero = algebra.one(), algebra.zero()
        self.orthonormal = all(
            (self.gram[i][j] - (one if i == j else zero)).is_zero(0.0)
            for i in range(self.N)
            for j in range(self.N)
        )
        self._gram_ops: dict = {}
        self._degree_cache: dict = {}
        self._dagger_vectors = None
        self._kmatrix = None
        self._twin = None

    def __repr__(self) -> str:
        return f"Frame(N={self.N}, degrees={self.degrees}, orthonormal={self.orthonormal})"

    # labels and degrees -------------------------------------------------
    def labels(self, k: int) -> list:
        return list(itertools.product(range(self.N), repeat=k))

    def degree_of(self, index: Sequence[int]):
        index = tuple(index)
        d = self._degree_cache.get(index)
        if d is None:
            d = self.algebra.zero_degree
            for i in index:
                d = self.algebra.add_degrees(d, self.degrees[i])
            self._degree_cache[index] = d
        return d

    def twist(self, b, index: Sequence[int]):
        """Coefficient c with b * w_I = w_I * c."""
        if not index:
            return b
        return b.twist(self.degree_of(index))

    # gram powers --------------------------------------------------------
    def gram_operator(self, k: int) -> "ModuleOperator":
        """Inner-product matrix p_k on T^k; it is the canonical projection."""
        op = self._gram_ops.get(k)
        if op is not None:
            return op
        if self.orthonormal:
            op = ModuleOperator.identity(self, k)
        elif k == 1:
            op = ModuleOperator(self, 1, {
                (i,): {(j,): self.gram[i][j] for j in range(self.N) if not self.gram[i][j].is_zero(0.0)}
                for i in range(self.N)
            })
        else:
            prev = self.gram_operator(k - 1)
            rows: dict = {}
            for I, prow in prev.rows.items():
                for a in range(self.N):
                    row = rows.setdefault(I + (a,), {})
                    for b in range(self.N):
                        pab = self.gram[a][b]
                        if pab.is_zero(0.0):
                            continue
                        for J, v in prow.items():
                            row[J + (b,)] = pab * v.twist(self.degrees[b])
            op = ModuleOperator(self, k, rows)
        self._gram_ops[k] = op
        return op

    def dagger_vector(self, j: int) -> "TensorElement":
        """w_j^dag as a canonical one-tensor."""
        if self._dagger_vectors is None:
            vecs = []
            for col in range(self.N):
                coeffs = {(i,): self.dagger[i][col] for i in range(self.N)}
                vecs.append(TensorElement(self, 1, coeffs))
            self._dagger_vectors = vecs
        return self._dagger_vectors[j]

    def dagger_pairing(self) -> list:
        """K_ab = <w_a^dag, w_b>."""
        if self._kmatrix is None:
            K = []
            for a in range(self.N):
                row = []
                for b in range(self.N):
                    acc = self.algebra.zero()
                    for c in range(self.N):
                        acc = acc + self.dagger[c][a].adjoint() * self.gram[c][b]
                    row.append(acc)
                K.append(row)
            self._kmatrix = K
        return self._kmatrix

    def approx_twin(self) -> "Frame":
        twin = self.algebra.approx_twin()
        if twin is self.algebra:
            return self
        if self._twin is None:
            conv = lambda m: [[e.to_approx(twin) for e in row] for row in m]
            self._twin = Frame(twin, self.degrees, conv(self.gram), conv(self.dagger))
        return self._twin

    def check_degrees(self) -> None:
        """Raise unless gram and dagger entries are homogeneous of the implied degrees."""
        alg = self.algebra
        for i in range(self.N):
            for j in range(self.N):
                want_g = alg.add_degrees(self.degrees[j], alg.neg_degree(self.degrees[i]))
                want_d = alg.neg_degree(alg.add_degrees(self.degrees[i], self.degrees[j]))
                for name, e, want in (("gram", self.gram[i][j], want_g), ("dagger", self.dagger[i][j], want_d)):
                    bad = [n for n in e.degrees() if n != want]
                    if bad:
                        raise NonHomogeneousFrameError(
                            f"{name}[{i}][{j}] has degree {bad[0]}, expected {want}"
                        )


# ---------------------------------------------------------------------------
# tensors
# ---------------------------------------------------------------------------
class TensorElement:
    """Element of T^k stored by canonical right coordinates."""

    __slots__ = ("frame", "k", "coeffs")

    def __init__(self, frame: Frame, k: int, coeffs: dict, canonical: bool = False):
        self.frame = frame
        self.k = k
        alg = frame.algebra
        clean = {}
        for I, c in coeffs.items():
            I = tuple(I)
            if len(I) != k:
                raise ValueError(f"index {I} does not have length {k}")
            c = alg.coerce(c)
            if not c.is_zero(0.0):
                clean[I] = c
        self.coeffs = clean
        if not canonical and not frame.orthonormal and clean:
            self.coeffs = frame.gram_operator(k)._apply_raw(clean)

    @classmethod
    def zero(cls, frame: Frame, k: int) -> "TensorElement":
        return cls(frame, k, {}, canonical=True)

    @classmethod
    def basis(cls, frame: Frame, index: Sequence[int], coeff=None) -> "TensorElement":
        alg = frame.algebra
        c = alg.one() if coeff is None else alg.coerce(coeff)
        return cls(frame, len(index), {tuple(index): c})

    def __repr__(self) -> str:
        return f"TensorElement(k={self.k}, nnz={len(self.coeffs)})"

    __hash__ = None

    def _new(self, coeffs: dict) -> "TensorElement":
        return TensorElement(self.frame, self.k, coeffs, canonical=True)

    def coefficient(self, index: Sequence[int]):
        return self.coeffs.get(tuple(index), self.frame.algebra.zero())

    def items(self) -> list:
        return sorted(self.coeffs.items())

    # linear structure -----------------------------------------------------
    def _check(self, other: "TensorElement") -> None:
        if not isinstance(other, TensorElement):
            raise TypeError("expected a TensorElement")
        if other.frame is not self.frame or other.k != self.k:
            raise ValueError("tensors live in different spaces")

    def __add__(self, other: "TensorElement") -> "TensorElement":
        self._check(other)
        out = dict(self.coeffs)
        for I, c in other.coeffs.items():
            out[I] = out[I] + c if I in out else c
        return self._new(out)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        self._check(other)
        out = dict(self.coeffs)
        for I, c in other.coeffs.items():
            out[I] = out[I] - c if I in out else -c
        return self._new(out)

    def __neg__(self) -> "TensorElement":
        return self._new({I: -c for I, c in self.coeffs.items()})

    def scale(self, c) -> "TensorElement":
        return self._new({I: v.scale(c) for I, v in self.coeffs.items()})

    def __mul__(self, c) -> "TensorElement":
        if isinstance(c, (TorusElement, GridElement)):
            return self.right_mul(c)
        return self.scale(c)

    def __rmul__(self, c) -> "TensorElement":
        if isinstance(c, (TorusElement, GridElement)):
            return self.left_mul(c)
        return self.scale(c)

    def right_mul(self, b) -> "TensorElement":
        b = self.frame.algebra.coerce(b)
        return self._new({I: c * b for I, c in self.coeffs.items()})

    def left_mul(self, b) -> "TensorElement":
        """b . t, with b pushed through the frame elements."""
        b = self.frame.algebra.coerce(b)
        fr = self.frame
        return self._new({I: fr.twist(b, I) * c for I, c in self.coeffs.items()})

    def otimes(self, other: "TensorElement") -> "TensorElement":
        """Balanced tensor product self (x) other."""
        if other.frame is not self.frame:
            raise ValueError("tensors use different frames")
        fr = self.frame
        out = {}
        for J, b in other.coeffs.items():
            for I, a in self.coeffs.items():
                out[I + J] = fr.twist(a, J) * b
        return TensorElement(fr, self.k + other.k, out, canonical=True)

    def dagger(self) -> "TensorElement":
        return tensor_dagger(self)

    def inner(self, other: "TensorElement"):
        return inner_product(self, other)

    # comparisons --------------------------------------------------------------
    def is_zero(self, tol: float | None = None) -> bool:
        return all(c.is_zero(tol) for c in self.coeffs.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorElement):
            return NotImplemented
        return (self - other).is_zero()

    def norm(self) -> float:
        return tensor_norm(self)

    def to_approx(self, frame: Frame) -> "TensorElement":
        twin = frame.algebra
        return TensorElement(frame, self.k, {I: c.to_approx(twin) for I, c in self.coeffs.items()}, canonical=True)


def tensor_zero_like(t: TensorElement) -> TensorElement:
    return TensorElement.zero(t.frame, t.k)


def tensor_dagger(t: TensorElement) -> TensorElement:
    """Antilinear order-reversing involution on T^k."""
    fr = t.frame
    total = TensorElement.zero(fr, t.k)
    cache: dict = {}
    for I, c in t.coeffs.items():
        rev = tuple(reversed(I))
        base = cache.get(rev)
        if base is None:
            base = fr.dagger_vector(rev[0])
            for i in rev[1:]:
                base = base.otimes(fr.dagger_vector(i))
            cache[rev] = base
        total = total + base.left_mul(c.adjoint())
    return total


def inner_product(s: TensorElement, t: TensorElement):
    """Right inner product <s, t> = sum_I s_I^dag (p_k t)_I."""
    s._check(t)
    alg = s.frame.algebra
    acc = alg.zero()
    for I, a in s.coeffs.items():
        b = t.coeffs.get(I)
        if b is not None:
            acc = acc + a.adjoint() * b
    return acc


def pair_first(x: TensorElement, Y: TensorElement) -> TensorElement:
    """<x, Y> contracting x against the first slot of Y."""
    if x.k != 1:
        raise ValueError("left argument must be a one-tensor")
    fr = x.frame
    inner = [inner_product(x, TensorElement.basis(fr, (a,))) for a in range(fr.N)]
    out: dict = {}
    for I, c in Y.coeffs.items():
        a, J = I[0], I[1:]
        if inner[a].is_zero(0.0):
            continue
        v = fr.twist(inner[a], J) * c
        out[J] = out[J] + v if J in out else v
    return TensorElement(fr, Y.k - 1, out)


def tensor_norm(t: TensorElement) -> float:
    """Residual size in the backend's faithful representation."""
    alg = t.frame.algebra
    if not t.coeffs:
        return 0.0
    if isinstance(alg, FuzzyAlgebra):
        labels = t.frame.labels(t.k)
        stack = np.vstack([t.coefficient(I).to_matrix() for I in labels])
        return float(np.linalg.norm(stack, ord=2))
    if isinstance(alg, GridAlgebra):
        total = 0.0
        for c in t.coeffs.values():
            total = total + np.abs(c.data) ** 2
        return float(np.sqrt(np.max(total)))
    return float(sum(c.norm() for c in t.coeffs.values()))


# ---------------------------------------------------------------------------
# raising / lowering isomorphisms
# ---------------------------------------------------------------------------
def alpha_right_columns(A: TensorElement) -> list:
    """Values alpha(A)(w_b) for every frame label b."""
    fr = A.frame
    K = fr.dagger_pairing()
    cols = []
    for b in range(fr.N):
        out: dict = {}
        for I, c in A.coeffs.items():
            head, a = I[:-1], I[-1]
            kab = K[a][b]
            if kab.is_zero(0.0):
                continue
            v = c.untwist(fr.degrees[a]) * kab
            out[head] = out[head] + v if head in out else v
        cols.append(TensorElement(fr, A.k - 1, out))
    return cols


def alpha_right(A: TensorElement) -> Callable[[TensorElement], TensorElement]:
    """alpha(y (x) x)(w) = y <x^dag, w>, as a right-linear map T^1 -> T^(k)."""
    cols = alpha_right_columns(A)
    fr = A.frame

    def apply(w: TensorElement) -> TensorElement:
        if w.k != 1:
            raise ValueError("argument must be a one-tensor")
        total = TensorElement.zero(fr, A.k - 1)
        for (b,), wb in w.coeffs.items():
            total = total + cols[b].right_mul(wb)
        return total

    return apply


def alpha_right_inv(T: Callable[[TensorElement], TensorElement], frame: Frame) -> TensorElement:
    """Inverse of alpha: sum_j T(w_j) (x) w_j^dag."""
    total = None
    for j in range(frame.N):
        term = T(TensorElement.basis(frame, (j,))).otimes(frame.dagger_vector(j))
        total = term if total is None else total + term
    return total


def alpha_left(A: TensorElement) -> Callable[[TensorElement], TensorElement]:
    """Left version: alpha(x (x) y)(w) = <w^dag, x> y, a left-linear map."""
    fr = A.frame
    tails: dict = {}
    for I, c in A.coeffs.items():
        a, J = I[0], I[1:]
        tails.setdefault(a, {})[J] = c
    tails = {a: TensorElement(fr, A.k - 1, d, canonical=True) for a, d in tails.items()}

    def apply(w: TensorElement) -> TensorElement:
        wd = tensor_dagger(w)
        total = TensorElement.zero(fr, A.k - 1)
        for a, y in tails.items():
            coef = inner_product(wd, TensorElement.basis(fr, (a,)))
            if not coef.is_zero(0.0):
                total = total + y.left_mul(coef)
        return total

    return apply


def alpha_left_inv(T: Callable[[TensorElement], TensorElement], frame: Frame) -> TensorElement:
    """Inverse of the left alpha: sum_j w_j (x) T(w_j^dag)."""
    total = None
    for j in range(frame.N):
        term = TensorElement.basis(frame, (j,)).otimes(T(frame.dagger_vector(j)))
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# module operators
# ---------------------------------------------------------------------------
class ModuleOperator:
    """Right-module endomorphism of T^k given by a sparse matrix of algebra elements.

    The stored matrix commutes with the canonical projection p_k, so applying
    it to canonical coordinates yields canonical coordinates.
    """

    __slots__ = ("frame", "k", "rows")

    def __init__(self, frame: Frame, k: int, rows: dict):
        self.frame = frame
        self.k = k
        clean = {}
        for I, row in rows.items():
            r = {tuple(J): v for J, v in row.items() if not v.is_zero(0.0)}
            if r:
                clean[tuple(I)] = r
        self.rows = clean

    def __repr__(self) -> str:
        nnz = sum(len(r) for r in self.rows.values())
        return f"ModuleOperator(k={self.k}, nnz={nnz})"

    __hash__ = None

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls, frame: Frame, k: int) -> "ModuleOperator":
        one = frame.algebra.one()
        return cls(frame, k, {I: {I: one} for I in frame.labels(k)})

    @classmethod
    def zero(cls, frame: Frame, k: int) -> "ModuleOperator":
        return cls(frame, k, {})

    @classmethod
    def from_matrix(cls, frame: Frame, k: int, matrix: Sequence[Sequence]) -> "ModuleOperator":
        """Operator from a dense N^k x N^k matrix, sandwiched by p_k."""
        labels = frame.labels(k)
        alg = frame.algebra
        rows = {I: {J: alg.coerce(matrix[r][c]) for c, J in enumerate(labels)} for r, I in enumerate(labels)}
        op = cls(frame, k, rows)
        if frame.orthonormal:
            return op
        p = frame.gram_operator(k)
        return p @ op @ p

    def entry(self, I, J):
        return self.rows.get(tuple(I), {}).get(tuple(J), self.frame.algebra.zero())

    def dense_entries(self) -> list:
        labels = self.frame.labels(self.k)
        return [[self.entry(I, J) for J in labels] for I in labels]

    # algebra ----------------------------------------------------------------
    def _apply_raw(self, coeffs: dict) -> dict:
        out: dict = {}
        for I, row in self.rows.items():
            acc = None
            for J, m in row.items():
                c = coeffs.get(J)
                if c is None:
                    continue
                v = m * c
                acc = v if acc is None else acc + v
            if acc is not None and not acc.is_zero(0.0):
                out[I] = acc
        return out

    def apply(self, t: TensorElement) -> TensorElement:
        if t.k != self.k or t.frame is not self.frame:
            raise ValueError("operator and tensor live in different spaces")
        return TensorElement(self.frame, self.k, self._apply_raw(t.coeffs), canonical=True)

    __call__ = apply

    def __matmul__(self, other: "ModuleOperator") -> "ModuleOperator":
        if other.k != self.k or other.frame is not self.frame:
            raise ValueError("operators live in different spaces")
        out: dict = {}
        for I, row in self.rows.items():
            acc: dict = {}
            for J, a in row.items():
                orow = other.rows.get(J)
                if not orow:
                    continue
                for K, b in orow.items():
                    v = a * b
                    acc[K] = acc[K] + v if K in acc else v
            out[I] = acc
        return ModuleOperator(self.frame, self.k, out)

    def _combine(self, other: "ModuleOperator", sign: int) -> "ModuleOperator":
        out = {I: dict(r) for I, r in self.rows.items()}
        for I, row in other.rows.items():
            tgt = out.setdefault(I, {})
            for J, v in row.items():
                v = v if sign > 0 else -v
                tgt[J] = tgt[J] + v if J in tgt else v
        return ModuleOperator(self.frame, self.k, out)

    def __add__(self, other: "ModuleOperator") -> "ModuleOperator":
        return self._combine(other, 1)

    def __sub__(self, other: "ModuleOperator") -> "ModuleOperator":
        return self._combine(other, -1)

    def __neg__(self) -> "ModuleOperator":
        return self.scale(-1)

    def scale(self, c) -> "ModuleOperator":
        return ModuleOperator(self.frame, self.k, {I: {J: v.scale(c) for J, v in r.items()} for I, r in self.rows.items()})

    def adjoint(self) -> "ModuleOperator":
        """Adjoint for the T^k inner product: conj-transpose followed by p_k."""
        out: dict = {}
        for I, row in self.rows.items():
            for J, v in row.items():
                out.setdefault(J, {})[I] = v.adjoint()
        op = ModuleOperator(self.frame, self.k, out)
        if self.frame.orthonormal:
            return op
        return op @ self.frame.gram_operator(self.k)

    def on_canonical(self) -> "ModuleOperator":
        """The operator restricted to canonical coordinates (M p_k)."""
        if self.frame.orthonormal:
            return self
        return self @ self.frame.gram_operator(self.k)

    def difference_norm(self, other: "ModuleOperator") -> float:
        return operator_norm(self - other)

    def equals(self, other: "ModuleOperator", tol: float | None = None) -> bool:
        diff = (self - other).on_canonical()
        return all(v.is_zero(tol) for r in diff.rows.values() for v in r.values())

    def is_zero(self, tol: float | None = None) -> bool:
        return self.equals(ModuleOperator.zero(self.frame, self.k), tol)

    def to_approx(self, frame: Frame) -> "ModuleOperator":
        twin = frame.algebra
        return ModuleOperator(frame, self.k, {I: {J: v.to_approx(twin) for J, v in r.items()} for I, r in self.rows.items()})


def operator_identity(frame: Frame, k: int) -> ModuleOperator:
    return ModuleOperator.identity(frame, k)


# ---------------------------------------------------------------------------
# faithful dense representations
# ---------------------------------------------------------------------------
def dense_representation(op: ModuleOperator, restrict: bool = True) -> np.ndarray:
    """Finite-dimensional faithful matrix of an operator.

    fuzzy: a (q N^k) x (q N^k) block matrix.  grid: an array of shape
    (points, N^k, N^k), or (1, N^k, N^k) when every entry is constant.
    With ``restrict`` the canonical projection is applied on the right.
    """
    fr = op.frame
    alg = fr.algebra
    if restrict and not fr.orthonormal:
        op = op.on_canonical()
    labels = fr.labels(op.k)
    index = {I: r for r, I in enumerate(labels)}
    n = len(labels)
    if isinstance(alg, FuzzyAlgebra):
        q = alg.q
        out = np.zeros((n * q, n * q), dtype=complex)
        for I, row in op.rows.items():
            r = index[I]
            for J, v in row.items():
                c = index[J]
                out[r * q:(r + 1) * q, c * q:(c + 1) * q] = v.to_matrix()
        return out
    if isinstance(alg, GridAlgebra):
        const = all(v.is_constant() for row in op.rows.values() for v in row.values())
        pts = 1 if const else int(np.prod(alg.shape))
        out = np.zeros((pts, n, n), dtype=complex)
        for I, row in op.rows.items():
            r = index[I]
            for J, v in row.items():
                c = index[J]
                if const:
                    out[0, r, c] = complex(v.data)
                else:
                    out[:, r, c] = np.broadcast_to(v.data, alg.shape).reshape(-1)
        return out
    raise UnsupportedNormError("the Laurent backend has no finite faithful representation")


def operator_from_dense(frame: Frame, k: int, mat: np.ndarray) -> ModuleOperator:
    """Inverse of :func:`dense_representation` (approximate entries)."""
    alg = frame.algebra
    labels = frame.labels(k)
    rows: dict = {}
    if isinstance(alg, FuzzyAlgebra):
        q = alg.q
        for r, I in enumerate(labels):
            row = {}
            for c, J in enumerate(labels):
                block = mat[r * q:(r + 1) * q, c * q:(c + 1) * q]
                if np.any(block != 0):
                    row[J] = alg.from_matrix(block)
            rows[I] = row
        twin = alg.approx_twin()
        target = frame if twin is alg else frame.approx_twin()
        return ModuleOperator(target, k, rows)
    if isinstance(alg, GridAlgebra):
        for r, I in enumerate(labels):
            row = {}
            for c, J in enumerate(labels):
                vals = mat[:, r, c]
                if np.any(vals != 0):
                    if mat.shape[0] == 1:
                        row[J] = alg.scalar(vals[0])
                    else:
                        row[J] = alg.from_array(vals.reshape(alg.shape))
            rows[I] = row
        return ModuleOperator(frame, k, rows)
    raise UnsupportedNormError("the Laurent backend has no finite faithful representation")


def operator_norm(op: ModuleOperator) -> float:
    """Spectral norm in the faithful representation (max over grid points)."""
    alg = op.frame.algebra
    if isinstance(alg, LaurentAlgebra):
        if alg.exact:
            return 0.0 if op.is_zero() else float("nan")
        raise UnsupportedNormError("the Laurent backend has no operator norm")
    mat = dense_representation(op)
    if isinstance(alg, FuzzyAlgebra):
        return float(np.linalg.norm(mat, ord=2)) if mat.size else 0.0
    return float(np.max(np.linalg.norm(mat, ord=2, axis=(1, 2)))) if mat.size else 0.0


def tensor_dense(t: TensorElement) -> np.ndarray:
    """Faithful column representation: (q N^k, q) for fuzzy, (points, N^k) for grid."""
    fr = t.frame
    alg = fr.algebra
    labels = fr.labels(t.k)
    if isinstance(alg, FuzzyAlgebra):
        return np.vstack([t.coefficient(I).to_matrix() for I in labels])
    if isinstance(alg, GridAlgebra):
        pts = int(np.prod(alg.shape))
        out = np.zeros((pts, len(labels)), dtype=complex)
        for r, I in enumerate(labels):
            c = t.coeffs.get(I)
            if c is not None:
                out[:, r] = np.broadcast_to(c.data, alg.shape).reshape(-1)
        return out
    raise UnsupportedNormError("the Laurent backend has no finite faithful representation")


def tensor_from_dense(frame: Frame, k: int, mat: np.ndarray) -> TensorElement:
    alg = frame.algebra
    labels = frame.labels(k)
    coeffs = {}
    if isinstance(alg, FuzzyAlgebra):
        q = alg.q
        twin_frame = frame.approx_twin()
        for r, I in enumerate(labels):
            coeffs[I] = alg.from_matrix(mat[r * q:(r + 1) * q, :])
        return TensorElement(twin_frame, k, coeffs, canonical=True)
    if isinstance(alg, GridAlgebra):
        for r, I in enumerate(labels):
            coeffs[I] = alg.from_array(mat[:, r].reshape(alg.shape))
        return TensorElement(frame, k, coeffs, canonical=True)
    raise UnsupportedNormError("the Laurent backend has no finite faithful representation")


# ---------------------------------------------------------------------------
# braiding and the projections P, Q
# ---------------------------------------------------------------------------
def build_sigma_theta(frame: Frame) -> ModuleOperator:
    """Twisted flip w_a (x) w_b -> Theta(d_a, d_b) w_b (x) w_a."""
    frame.check_degrees()
    alg = frame.algebra
    rows: dict = {}
    for a in range(frame.N):
        for b in range(frame.N):
            phase = alg.theta_phase(frame.degrees[a], frame.degrees[b])
            rows.setdefault((b, a), {})[(a, b)] = alg.scalar(phase)
    return ModuleOperator(frame, 2, rows)


def extend_left(op: ModuleOperator) -> ModuleOperator:
    """op (x) 1 on T^(k+1)."""
    fr = op.frame
    rows: dict = {}
    for c in range(fr.N):
        deg = fr.degrees[c]
        for I, row in op.rows.items():
            rows[I + (c,)] = {J + (c,): v.twist(deg) for J, v in row.items()}
    return ModuleOperator(fr, op.k + 1, rows)


def extend_right(op: ModuleOperator) -> ModuleOperator:
    """1 (x) op on T^(k+1)."""
    fr = op.frame
    rows: dict = {}
    for a in range(fr.N):
        for I, row in op.rows.items():
            rows[(a,) + I] = {(a,) + J: v for J, v in row.items()}
    return ModuleOperator(fr, op.k + 1, rows)


def build_PQ(psi: ModuleOperator) -> tuple:
    """P = psi (x) 1 and Q = 1 (x) psi on three-tensors."""
    if psi.k != 2:
        raise ValueError("psi must act on two-tensors")
    return extend_left(psi), extend_right(psi)


def is_central(t: TensorElement, generators: Iterable) -> bool:
    """Whether b t = t b for every test element b."""
    return all((t.left_mul(b) - t.right_mul(b)).is_zero() for b in generators)
