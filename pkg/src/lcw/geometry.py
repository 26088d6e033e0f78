"""Hermitian differential structures presented by a finite frame.

A :class:`Geometry` bundles the coefficient algebra, a frame with its Gram
and dagger matrices, the junk projection ``psi`` on two-tensors, the frame
differentials ``d(w_j)`` and, optionally, the lift corrections ``T_j`` used
to produce junk tensors.  The first-order differential ``d`` on the algebra
is encoded by ``coordinate_differentials``: ``E[j][mu] = <w_j, dx^mu>``, so
``d(b) = sum_j w_j sum_mu E[j][mu] delta_mu(b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import FuzzyAlgebra, GridAlgebra
from .tensors import (
    Frame,
    ModuleOperator,
    NonHomogeneousFrameError,
    TensorElement,
    build_PQ,
    build_sigma_theta,
    inner_product,
    tensor_dagger,
)


class MissingLiftError(ValueError):
    """Raised when junk tensors are requested for a non-closed frame without lifts."""


@dataclass
class CheckResult:
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    """Named pass/fail checks with residuals."""

    checks: dict = field(default_factory=dict)
    exact: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list:
        return [name for name, c in self.checks.items() if not c.passed]

    def add(self, name: str, passed: bool, residual: float, detail: str = "") -> None:
        self.checks[name] = CheckResult(bool(passed), float(residual), detail)

    def to_dict(self) -> dict:
        return {
            name: {"passed": c.passed, "residual": c.residual, **({"detail": c.detail} if c.detail else {})}
            for name, c in self.checks.items()
        }


class Geometry:
    """A validated-on-demand Hermitian differential structure."""

    def __init__(
        self,
        frame: Frame,
        psi: ModuleOperator,
        frame_differentials: Sequence[TensorElement],
        coordinate_differentials: Sequence[Sequence] | None = None,
        lift_corrections: Sequence[TensorElement] | None = None,
        coordinate_frame: Sequence[Sequence] | None = None,
        name: str = "geometry",
        metadata: dict | None = None,
    ):
        self.frame = frame
        self.algebra = frame.algebra
        self.N = frame.N
        self.psi = psi
        self.frame_differentials = list(frame_differentials)
        if len(self.frame_differentials) != self.N:
            raise ValueError("one frame differential per frame element is required")
        alg = self.algebra
        self.coordinate_differentials = (
            None if coordinate_differentials is None
            else [[alg.coerce(e) for e in row] for row in coordinate_differentials]
        )
        if self.coordinate_differentials is None and self.N != alg.dim:
            raise ValueError("coordinate differentials are required unless the frame is the coordinate frame")
        if self.coordinate_differentials is not None:
            if len(self.coordinate_differentials) != self.N or any(
                len(r) != alg.dim for r in self.coordinate_differentials
            ):
                raise ValueError(f"coordinate differentials must be {self.N} x {alg.dim}")
        self.lift_corrections = None if lift_corrections is None else list(lift_corrections)
        self.coordinate_frame = (
            None if coordinate_frame is None else [[alg.coerce(e) for e in row] for row in coordinate_frame]
        )
        self.name = name
        self.metadata = dict(metadata or {})
        self._cache: dict = {}

    def __repr__(self) -> str:
        return f"Geometry({self.name!r}, {self.algebra!r}, N={self.N})"

    @property
    def theta(self):
        return self.algebra.theta

    @property
    def exact(self) -> bool:
        return bool(getattr(self.algebra, "exact", False))

    # cached operators -------------------------------------------------------
    def _cached(self, key, build):
        v = self._cache.get(key)
        if v is None:
            v = build()
            self._cache[key] = v
        return v

    @property
    def sigma(self) -> ModuleOperator:
        """Braiding 2 psi - 1."""
        return self._cached("sigma", lambda: self.psi.scale(2) - ModuleOperator.identity(self.frame, 2))

    @property
    def P(self) -> ModuleOperator:
        return self._cached("PQ", lambda: build_PQ(self.psi))[0]

    @property
    def Q(self) -> ModuleOperator:
        return self._cached("PQ", lambda: build_PQ(self.psi))[1]

    @property
    def antisymmetrizer(self) -> ModuleOperator:
        return self._cached("one_minus_psi", lambda: ModuleOperator.identity(self.frame, 2) - self.psi)

    def is_closed(self) -> bool:
        return all(t.is_zero() for t in self.frame_differentials)

    # elements -----------------------------------------------------------------
    def one_form(self, coeffs: dict) -> TensorElement:
        return TensorElement(self.frame, 1, {(j,): c for j, c in coeffs.items()})

    def basis(self, *index: int) -> TensorElement:
        return TensorElement.basis(self.frame, index)

    def coordinate_one_form(self, mu: int) -> TensorElement:
        """dx^mu in frame coordinates."""
        if self.coordinate_differentials is None:
            return self.basis(mu)
        return TensorElement(self.frame, 1, {(j,): self.coordinate_differentials[j][mu] for j in range(self.N)})

    def coordinate_components(self, t: TensorElement) -> dict:
        """Coefficients of t on dx^mu1 (x) ... (x) dx^muk (central coordinate forms)."""
        if self.coordinate_frame is None:
            return dict(t.coeffs)
        F = self.coordinate_frame
        alg = self.algebra
        out: dict = {}
        for I, c in t.coeffs.items():
            for mus in itertools.product(range(alg.dim), repeat=t.k):
                v = None
                for mu, a in zip(mus, I):
                    f = F[mu][a]
                    if f.is_zero(0.0):
                        v = None
                        break
                    v = f if v is None else v * f
                else:
                    v = v * c
                if v is None:
                    continue
                out[mus] = out[mus] + v if mus in out else v
        return out

    def test_elements(self, count: int | None = None, seed: int = 0) -> list:
        """Deterministic band-limited sample of algebra elements.

        On the fuzzy torus the band is chosen so that products with the frame
        data do not wrap around, which is where the derivations obey Leibniz.
        """
        band = 1
        if isinstance(self.algebra, FuzzyAlgebra):
            band = max(0, self.algebra.q // 2 - 1)
        return sample_elements(self.algebra, count or 6, seed=seed, band=band)

    # calculus -------------------------------------------------------------------
    def differential0(self, b) -> TensorElement:
        """d(b) = sum_j w_j sum_mu E[j][mu] delta_mu(b)."""
        alg = self.algebra
        b = alg.coerce(b)
        partials = [b.derivation(mu) for mu in range(alg.dim)]
        coeffs = {}
        if self.coordinate_differentials is None:
            for j in range(self.N):
                coeffs[(j,)] = partials[j]
        else:
            for j in range(self.N):
                acc = alg.zero()
                for mu, e in enumerate(self.coordinate_differentials[j]):
                    if not e.is_zero(0.0) and not partials[mu].is_zero(0.0):
                        acc = acc + e * partials[mu]
                coeffs[(j,)] = acc
        return TensorElement(self.frame, 1, coeffs, canonical=self.coordinate_differentials is not None)

    def exterior_d(self, eta: TensorElement) -> TensorElement:
        """Lifted differential on one-forms with values in (1 - psi) T^2."""
        if eta.k != 1:
            raise ValueError("exterior_d acts on one-tensors")
        fr = self.frame
        first = TensorElement.zero(fr, 2)
        second = TensorElement.zero(fr, 2)
        for (j,), c in eta.coeffs.items():
            first = first + self.frame_differentials[j].right_mul(c)
            second = second + self.basis(j).otimes(self.differential0(c))
        return first - self.antisymmetrizer.apply(second)

    def quantum_metric(self) -> TensorElement:
        """G = sum_j w_j (x) w_j^dag."""
        def build():
            total = TensorElement.zero(self.frame, 2)
            for j in range(self.N):
                total = total + self.basis(j).otimes(self.frame.dagger_vector(j))
            return total
        return self._cached("G", build)

    def grassmann(self, eta: TensorElement) -> TensorElement:
        """Grassmann connection sum_j w_j (x) d<w_j, eta>."""
        total = TensorElement.zero(self.frame, 2)
        for (j,), c in eta.coeffs.items():
            total = total + self.basis(j).otimes(self.differential0(c))
        return total

    def junk_from_connection(self, b_list: Iterable) -> list:
        """Junk tensors grad_T(d b) = grad^v(d b) - sum_j T_j <w_j, d b>."""
        lifts = self.lift_corrections
        if lifts is None:
            if not self.is_closed():
                raise MissingLiftError("a non-closed frame needs lift corrections to produce junk")
            lifts = [TensorElement.zero(self.frame, 2)] * self.N
        out = []
        for b in b_list:
            db = self.differential0(b)
            t = self.grassmann(db)
            for (j,), c in db.coeffs.items():
                t = t - lifts[j].right_mul(c)
            out.append(t)
        return out

    # twins --------------------------------------------------------------------------
    def approx_twin(self) -> "Geometry":
        """The same geometry over complex doubles."""
        if not self.exact:
            return self

        def build():
            fr = self.frame.approx_twin()
            twin = fr.algebra
            conv_t = lambda t: t.to_approx(fr)
            conv_m = lambda m: None if m is None else [[e.to_approx(twin) for e in row] for row in m]
            return Geometry(
                fr,
                self.psi.to_approx(fr),
                [conv_t(t) for t in self.frame_differentials],
                conv_m(self.coordinate_differentials),
                None if self.lift_corrections is None else [conv_t(t) for t in self.lift_corrections],
                conv_m(self.coordinate_frame),
                name=self.name,
                metadata=self.metadata,
            )

        return self._cached("twin", build)

    # validation ------------------------------------------------------------------------
    def validate(self, test_elements: Sequence | None = None, tol: float | None = None) -> ValidationReport:
        return validate(self, test_elements, tol)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------
def _residual(t: TensorElement) -> float:
    return t.norm()


def validate(geometry: Geometry, test_elements: Sequence | None = None, tol: float | None = None) -> ValidationReport:
    """Check the structural axioms; exact backends are compared literally."""
    g = geometry
    fr = g.frame
    alg = g.algebra
    exact = g.exact
    tol = alg.tol if tol is None else tol
    report = ValidationReport(exact=exact)
    N = g.N
    elems = list(test_elements) if test_elements is not None else g.test_elements()

    def verdict(residual_tensors) -> tuple:
        res = 0.0
        ok = True
        for t in residual_tensors:
            if exact:
                ok = ok and t.is_zero()
            res = max(res, _residual(t))
        if not exact:
            ok = res <= tol
        return ok, res

    def elem_verdict(elements) -> tuple:
        res = 0.0
        ok = True
        for e in elements:
            if exact:
                ok = ok and e.is_zero()
            res = max(res, e.norm())
        if not exact:
            ok = res <= tol
        return ok, res

    # structural shape and degrees
    try:
        fr.check_degrees()
        report.add("homogeneous degrees", True, 0.0)
    except NonHomogeneousFrameError as exc:
        report.add("homogeneous degrees", False, float("inf"), str(exc))

    # gram: idempotent and self-adjoint
    p = fr.gram
    diffs = []
    for i in range(N):
        for j in range(N):
            acc = alg.zero()
            for k in range(N):
                acc = acc + p[i][k] * p[k][j]
            diffs.append(acc - p[i][j])
            diffs.append(p[i][j] - p[j][i].adjoint())
    ok, res = elem_verdict(diffs)
    report.add("frame projection", ok, res)

    # frame relation on the coordinate one-forms
    rel = []
    if g.coordinate_differentials is not None:
        for mu in range(alg.dim):
            raw = {(j,): g.coordinate_differentials[j][mu] for j in range(N)}
            v = TensorElement(fr, 1, raw, canonical=True)
            rel.append(TensorElement(fr, 1, raw) - v)
        if g.coordinate_frame is not None:
            F, E = g.coordinate_frame, g.coordinate_differentials
            for nu in range(alg.dim):
                for mu in range(alg.dim):
                    acc = alg.zero()
                    for j in range(N):
                        acc = acc + F[nu][j] * E[j][mu]
                    if nu == mu:
                        acc = acc - alg.one()
                    rel.append(TensorElement(fr, 1, {(0,): acc}, canonical=True))
    ok, res = verdict(rel)
    report.add("frame relation", ok, res)

    # dagger involution
    invol = []
    for j in range(N):
        w = g.basis(j)
        invol.append(tensor_dagger(tensor_dagger(w)) - w)
    ok, res = verdict(invol)
    report.add("dagger involution", ok, res)

    # psi: idempotent, dagger-commuting, self-adjoint
    basis2 = [TensorElement.basis(fr, I) for I in fr.labels(2)]
    psi = g.psi
    ok, res = verdict([psi.apply(psi.apply(t)) - psi.apply(t) for t in basis2])
    report.add("psi idempotent", ok, res)
    ok, res = verdict([psi.apply(tensor_dagger(t)) - tensor_dagger(psi.apply(t)) for t in basis2])
    report.add("psi dagger commuting", ok, res)
    adj = psi.adjoint()
    ok, res = verdict([adj.apply(t) - psi.apply(t) for t in basis2])
    report.add("psi self-adjoint", ok, res)

    # frame differentials are two-forms; lifts reproduce them
    anti = g.antisymmetrizer
    ok, res = verdict([anti.apply(t) - t for t in g.frame_differentials])
    report.add("differentials are two-forms", ok, res)
    if g.lift_corrections is not None:
        ok, res = verdict([anti.apply(T) - dw for T, dw in zip(g.lift_corrections, g.frame_differentials)])
        report.add("lift corrections", ok, res)

    # d on the algebra: reality and d o d = 0
    real, dd = [], []
    for b in elems:
        real.append(g.differential0(b.adjoint()) + tensor_dagger(g.differential0(b)))
        dd.append(g.exterior_d(g.differential0(b)))
    ok, res = verdict(real)
    report.add("differential reality", ok, res)
    ok, res = verdict(dd)
    report.add("d squared zero", ok, res)

    # quantum metric: centrality and the real inner product identity
    G = g.quantum_metric()
    ok, res = verdict([G.left_mul(b) - G.right_mul(b) for b in elems])
    report.add("metric central", ok, res)
    ips = []
    basis1 = [g.basis(j) for j in range(N)]
    for x in basis1:
        for y in basis1:
            ips.append(inner_product(G, x.otimes(y)) - inner_product(tensor_dagger(x), y))
    ok, res = elem_verdict(ips)
    report.add("metric inner product", ok, res)
    return report


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------
def sample_elements(algebra, count: int, seed: int = 0, band: int = 1) -> list:
    """Reproducible band-limited algebra elements with small integer coefficients."""
    rng = np.random.default_rng(seed)
    out = []
    if isinstance(algebra, GridAlgebra):
        for _ in range(count):
            terms = []
            for _ in range(3):
                k = tuple(int(v) for v in rng.integers(-band, band + 1, size=algebra.dim))
                c = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
                terms.append((k, c))
            out.append(algebra.trig_poly(terms))
        return out
    i = algebra.scalars.i
    for _ in range(count):
        terms = {}
        for _ in range(3):
            n = tuple(int(v) for v in rng.integers(-band, band + 1, size=2))
            re, im = int(rng.integers(-3, 4)), int(rng.integers(-3, 4))
            c = algebra.scalars.coerce(re) + i * im
            terms[n] = terms.get(n, algebra.scalars.zero) + c
        out.append(algebra.from_terms(terms))
    return out


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------
def _build_psi(frame: Frame, psi) -> ModuleOperator:
    if psi is None or (isinstance(psi, str) and psi == "sigma-theta"):
        sigma = build_sigma_theta(frame)
        one = ModuleOperator.identity(frame, 2)
        return (one + sigma).scale(_half(frame.algebra))
    if isinstance(psi, ModuleOperator):
        return psi
    return ModuleOperator.from_matrix(frame, 2, psi)


def _half(algebra):
    from fractions import Fraction

    if getattr(algebra, "exact", False):
        return algebra.scalars.coerce(Fraction(1, 2))
    return 0.5


def coordinate_tensor(frame: Frame, E: Sequence[Sequence], mu: int, rho: int) -> TensorElement:
    """dx^mu (x) dx^rho in frame coordinates."""
    N = frame.N
    out = {}
    for a in range(N):
        ea = E[a][mu]
        if ea.is_zero(0.0):
            continue
        for b in range(N):
            eb = E[b][rho]
            if eb.is_zero(0.0):
                continue
            out[(a, b)] = ea.twist(frame.degrees[b]) * eb
    return TensorElement(frame, 2, out, canonical=True)


def from_coordinate_frame(
    algebra,
    F: Sequence[Sequence],
    degrees: Sequence,
    inverse_metric: Sequence[Sequence] | None = None,
    psi="sigma-theta",
    name: str = "geometry",
    orthonormal: bool = False,
    metadata: dict | None = None,
) -> Geometry:
    """Geometry for the frame w_j = sum_mu dx^mu F[mu][j].

    The coordinate one-forms dx^mu are central, of degree 0 and satisfy
    (dx^mu)^dag = -dx^mu with <dx^mu, dx^nu> = inverse_metric[mu][nu].

    Parameters
    ----------
    orthonormal
        Declare the Gram matrix to be exactly the identity and the dagger
        matrix to be -1 (valid for real diagonal rescalings of the coordinate
        frame); avoids round-off in the Gram matrix on floating backends.
    """
    alg = algebra
    dim = alg.dim
    F = [[alg.coerce(e) for e in row] for row in F]
    if len(F) != dim:
        raise ValueError(f"coordinate frame must have {dim} rows")
    N = len(F[0])
    zero, one = alg.zero(), alg.one()
    ginv = (
        [[one if m == n else zero for n in range(dim)] for m in range(dim)]
        if inverse_metric is None
        else [[alg.coerce(e) for e in row] for row in inverse_metric]
    )
    # E[j][mu] = <w_j, dx^mu> = sum_nu F[nu][j]^dag ginv[nu][mu]
    E = []
    for j in range(N):
        row = []
        for mu in range(dim):
            acc = alg.zero()
            for nu in range(dim):
                if not F[nu][j].is_zero(0.0) and not ginv[nu][mu].is_zero(0.0):
                    acc = acc + F[nu][j].adjoint() * ginv[nu][mu]
            row.append(acc)
        E.append(row)
    if orthonormal:
        gram = [[one if i == j else zero for j in range(N)] for i in range(N)]
        dagger = [[-one if i == j else zero for j in range(N)] for i in range(N)]
    else:
        gram = _gram_from(F, ginv, alg, N, dim)
        dagger = [[-_sum(alg, (E[i][mu] * F[mu][j].adjoint() for mu in range(dim))) for j in range(N)] for i in range(N)]
    frame = Frame(alg, degrees, gram, dagger)
    psi_op = _build_psi(frame, psi)
    anti = ModuleOperator.identity(frame, 2) - psi_op
    diffs, lifts = [], []
    for j in range(N):
        S = TensorElement.zero(frame, 2)
        for mu in range(dim):
            if F[mu][j].is_zero(0.0):
                continue
            for rho in range(dim):
                dF = F[mu][j].derivation(rho)
                if dF.is_zero(0.0):
                    continue
                S = S + coordinate_tensor(frame, E, mu, rho).right_mul(dF)
        diffs.append(-anti.apply(S))
        lifts.append(-S)
    return Geometry(
        frame,
        psi_op,
        diffs,
        coordinate_differentials=E,
        lift_corrections=lifts,
        coordinate_frame=F,
        name=name,
        metadata=metadata,
    )


def _sum(alg, items):
    acc = alg.zero()
    for x in items:
        acc = acc + x
    return acc


def _gram_from(F, ginv, alg, N, dim):
    """<w_i, w_j> = sum F[mu][i]^dag ginv[mu][nu] F[nu][j]."""
    gram = []
    for i in range(N):
        row = []
        for j in range(N):
            acc = alg.zero()
            for mu in range(dim):
                if F[mu][i].is_zero(0.0):
                    continue
                left = F[mu][i].adjoint()
                for nu in range(dim):
                    if ginv[mu][nu].is_zero(0.0) or F[nu][j].is_zero(0.0):
                        continue
                    acc = acc + left * ginv[mu][nu] * F[nu][j]
            row.append(acc)
        gram.append(row)
    return gram
