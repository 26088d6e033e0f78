"""Hermitian torsion-free connections presented by connection forms.

A right connection is stored as a three-tensor A with
``grad = grad^v + alpha(A)``, where ``grad^v`` is the Grassmann connection of
the geometry's frame.  The torsion equations (1 - P)A = -W and
(1 - Q)A = -W^dag are solved by the Neumann series of PQ, or, when P and Q
generate an S_3 action and W is cyclic, by the closed form A = -(1 + 4PQ)W.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import GridAlgebra
from .geometry import Geometry
from .projections import (
    TwoProjectionReport,
    braid_holds,
    limit_projection,
    neumann_inverse,
    reflections,
)
from .tensors import (
    ModuleOperator,
    TensorElement,
    alpha_left,
    alpha_right,
    dense_representation,
    extend_right,
    operator_from_dense,
    pair_first,
    tensor_dagger,
)


class DagConcordanceError(ValueError):
    """The two Neumann-resummed source terms disagree; ``defect`` holds the mismatch."""

    def __init__(self, message: str, defect: TensorElement, residual: float):
        super().__init__(message)
        self.defect = defect
        self.residual = residual


class HypothesisError(ValueError):
    """A precondition of the closed-form construction fails."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _is_exact(frame) -> bool:
    return bool(getattr(frame.algebra, "exact", False))


def _vanishes(t: TensorElement, tol: float) -> bool:
    return t.is_zero() if _is_exact(t.frame) else t.norm() <= tol


def _one(frame, k: int) -> ModuleOperator:
    return ModuleOperator.identity(frame, k)


def _on(geometry: Geometry, frame) -> Geometry:
    """The geometry (or its approximate twin) whose frame is ``frame``."""
    if frame is geometry.frame:
        return geometry
    twin = geometry.approx_twin()
    if twin.frame is not frame:
        raise ValueError("tensor does not belong to this geometry")
    return twin


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------
class Connection:
    """Right connection grad = grad^v + alpha(A) on the geometry's one-forms."""

    def __init__(self, geometry: Geometry, A: TensorElement | None = None, label: str = "connection"):
        if A is None:
            A = TensorElement.zero(geometry.frame, 3)
        if A.k != 3:
            raise ValueError("a connection form is a three-tensor")
        self.geometry = _on(geometry, A.frame)
        self.A = A
        self.label = label
        self._alpha = alpha_right(A)
        self._columns: dict = {}

    def __repr__(self) -> str:
        return f"Connection({self.label!r}, {self.geometry.name!r})"

    @property
    def frame(self):
        return self.A.frame

    def __call__(self, eta: TensorElement) -> TensorElement:
        if eta.frame is not self.frame:
            eta = eta.to_approx(self.frame)
        return self.geometry.grassmann(eta) + self._alpha(eta)

    def on_frame(self, j: int) -> TensorElement:
        """grad(w_j), cached."""
        v = self._columns.get(j)
        if v is None:
            v = self(self.geometry.basis(j))
            self._columns[j] = v
        return v

    def conjugate(self, eta: TensorElement) -> TensorElement:
        """Conjugate connection -(grad(eta^dag))^dag."""
        return -tensor_dagger(self(tensor_dagger(eta)))

    def perturbed(self, s: TensorElement, label: str | None = None) -> "Connection":
        """grad + alpha(s)."""
        label = label or f"{self.label}+s"
        if s.frame is not self.frame:
            if _is_exact(self.frame) and not _is_exact(s.frame):
                # approximate corrections move the connection onto the twin frame
                g = _on(self.geometry, s.frame)
                return Connection(g, self.A.to_approx(g.frame) + s, label)
            s = s.to_approx(self.frame)
        return Connection(self.geometry, self.A + s, label)


def grassmann(geometry: Geometry) -> Connection:
    return Connection(geometry, None, "grassmann")


def compute_W(geometry: Geometry) -> tuple:
    """W = sum_j d(w_j) (x) w_j^dag and its dagger."""
    fr = geometry.frame
    W = TensorElement.zero(fr, 3)
    for j, dw in enumerate(geometry.frame_differentials):
        if dw.coeffs:
            W = W + dw.otimes(fr.dagger_vector(j))
    return W, tensor_dagger(W)


def projection_report(geometry: Geometry, tol: float = 1e-12, max_iter: int = 10_000,
                      method: str = "auto") -> TwoProjectionReport:
    """Limit projection report for the geometry's P and Q, cached per method."""
    key = ("projections", method, tol, max_iter)
    return geometry._cached(key, lambda: limit_projection(geometry.P, geometry.Q, tol, max_iter, method))


def _pq_on(geometry: Geometry, frame) -> tuple:
    g = _on(geometry, frame)
    return g.P, g.Q


def concordance_defect(geometry: Geometry, report: TwoProjectionReport | None = None,
                       tol: float = 1e-12) -> TensorElement:
    """X - X^dag with X = (1 + Pi - PQ)^(-1)(W + P W^dag).

    The connection form of a Hermitian torsion-free connection is -X, so the
    defect vanishes exactly when that connection exists.
    """
    report = report or projection_report(geometry, tol)
    Pi = report.pi
    P, Q = _pq_on(geometry, Pi.frame)
    W, Wd = compute_W(_on(geometry, Pi.frame))
    X = neumann_inverse(P, Q, Pi, W + P.apply(Wd), tol)
    return X - tensor_dagger(X)


def connection_form_series(geometry: Geometry, report: TwoProjectionReport | None = None,
                           tol: float = 1e-12, check: bool = True) -> TensorElement:
    """A = -sum_k (PQ)^k (W + P W^dag), checked for A = A^dag."""
    report = report or projection_report(geometry, tol)
    if not report.concordant:
        raise HypothesisError("P and Q are not concordant", report.friedrichs_angle)
    Pi = report.pi
    g = _on(geometry, Pi.frame)
    P, Q = g.P, g.Q
    W, Wd = compute_W(g)
    X = neumann_inverse(P, Q, Pi, W + P.apply(Wd), tol)
    A = -X
    if check:
        defect = A - tensor_dagger(A)
        if not _vanishes(defect, max(tol, g.algebra.tol)):
            raise DagConcordanceError("the series solution is not self-adjoint", defect, defect.norm())
    return A


def cyclicity_residual(geometry: Geometry) -> TensorElement:
    """W^dag - (2P - 1)(2Q - 1) W."""
    U, V = reflections(geometry.P, geometry.Q)
    W, Wd = compute_W(geometry)
    return Wd - U.apply(V.apply(W))


def connection_form_closed(geometry: Geometry, tol: float = 1e-10) -> TensorElement:
    """A = -(W + 4 PQ W), valid for an S_3 pair with W^dag = (2P - 1)(2Q - 1) W."""
    P, Q = geometry.P, geometry.Q
    exact = geometry.exact
    if not braid_holds(P, Q, 0.0 if exact else tol):
        raise HypothesisError("the braid relation fails for P and Q", float("nan"))
    res = cyclicity_residual(geometry)
    if not _vanishes(res, tol):
        raise HypothesisError(f"W is not cyclic (residual {res.norm():.3e})", res.norm())
    W, _ = compute_W(geometry)
    PQW = P.apply(Q.apply(W))
    return -(W + PQW.scale(4))


def levi_civita(geometry: Geometry, method: str = "auto", tol: float = 1e-12) -> Connection:
    """Hermitian torsion-free connection by ``series``, ``closed`` or ``auto``."""
    if method == "closed":
        return Connection(geometry, connection_form_closed(geometry), "closed")
    if method == "series":
        return Connection(geometry, connection_form_series(geometry, tol=tol), "series")
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    try:
        return Connection(geometry, connection_form_closed(geometry), "closed")
    except HypothesisError:
        return Connection(geometry, connection_form_series(geometry, tol=tol), "series")


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------
@dataclass
class CertificationReport:
    hermitian: bool
    torsion_free: bool
    dag_concordant: bool
    bimodule: bool
    metric_compatible: bool
    residuals: dict = field(default_factory=dict)

    CHECKS = ("hermitian", "torsion_free", "dag_concordant", "bimodule", "metric_compatible")

    @property
    def passed(self) -> bool:
        return all(getattr(self, c) for c in self.CHECKS)

    def to_dict(self) -> dict:
        out = {c: getattr(self, c) for c in self.CHECKS}
        out["residuals"] = dict(self.residuals)
        return out


def _sum_tensors(items, frame, k):
    total = TensorElement.zero(frame, k)
    for t in items:
        total = total + t
    return total


def hermitian_residual(conn: Connection) -> TensorElement:
    return conn.A - tensor_dagger(conn.A)


def torsion_residuals(conn: Connection) -> tuple:
    """(1 - P)A + W and (1 - Q)A + W^dag."""
    g = conn.geometry
    W, Wd = compute_W(g)
    A = conn.A
    return A - g.P.apply(A) + W, A - g.Q.apply(A) + Wd


def bimodule_residuals(conn: Connection, sigma: ModuleOperator | None = None) -> list:
    """sigma(grad(w_b)) - conj grad(w_b) for every frame label b."""
    g = conn.geometry
    sigma = g.sigma if sigma is None else sigma
    return [sigma.apply(conn.on_frame(b)) - conn.conjugate(g.basis(b)) for b in range(g.N)]


def metric_residual(conn: Connection) -> TensorElement:
    """(grad (x) 1 + 1 (x) conj grad)(G) = sum_j grad(w_j) (x) w_j^dag - w_j (x) grad(w_j)^dag."""
    g = conn.geometry
    fr = conn.frame
    terms = []
    for j in range(g.N):
        gw = conn.on_frame(j)
        terms.append(gw.otimes(fr.dagger_vector(j)))
        terms.append(-g.basis(j).otimes(tensor_dagger(gw)))
    return _sum_tensors(terms, fr, 3)


def hermitian_pairing_defect(conn: Connection, x: TensorElement, y: TensorElement) -> TensorElement:
    """d<x, y> - <x, grad y> + <grad x, y>, with <T, y> = <y, T>^dag."""
    g = conn.geometry
    lhs = g.differential0(x.inner(y))
    return lhs - pair_first(x, conn(y)) + tensor_dagger(pair_first(y, conn(x)))


def certify(conn: Connection, tol: float = 1e-10, report: TwoProjectionReport | None = None) -> CertificationReport:
    """Evaluate the five defining identities on the frame basis."""
    g = conn.geometry
    exact = _is_exact(conn.frame)

    def judge(tensors) -> tuple:
        tensors = list(tensors)
        res = max((t.norm() for t in tensors), default=0.0)
        ok = all(t.is_zero() for t in tensors) if exact else res <= tol
        return ok, res

    herm, r_herm = judge([hermitian_residual(conn)])
    tp, tq = torsion_residuals(conn)
    tf, r_tf = judge([tp])
    tfq, r_tfq = judge([tq])
    bim, r_bim = judge(bimodule_residuals(conn))
    met, r_met = judge([metric_residual(conn)])
    try:
        defect = concordance_defect(g, report)
        conc, r_conc = judge([defect])
    except Exception as exc:  # unsupported norm or non-convergence
        conc, r_conc = False, float("nan")
        g.metadata.setdefault("notes", []).append(f"concordance not decided: {exc}")
    residuals = {
        "hermitian": r_herm,
        "torsion_free": r_tf,
        "torsion_free_conjugate": r_tfq,
        "dag_concordant": r_conc,
        "bimodule": r_bim,
        "metric_compatible": r_met,
    }
    return CertificationReport(herm, tf and tfq, conc, bim, met, residuals)


# ---------------------------------------------------------------------------
# torsion and curvature
# ---------------------------------------------------------------------------
def torsion_tensor(conn: Connection) -> TensorElement:
    """sum_j (1 - P)(grad(w_j) (x) w_j^dag + d(w_j) (x) w_j^dag)."""
    g = conn.geometry
    fr = conn.frame
    total = _sum_tensors(
        ((conn.on_frame(j) + g.frame_differentials[j]).otimes(fr.dagger_vector(j)) for j in range(g.N)), fr, 3
    )
    return total - g.P.apply(total)


def curvature(conn: Connection, eta: TensorElement) -> TensorElement:
    """R(eta) = (1 (x) (1 - psi))(grad (x) 1 + 1 (x) d) grad(eta)."""
    g = conn.geometry
    fr = conn.frame
    if eta.frame is not fr:
        eta = eta.to_approx(fr)
    first = conn(eta)
    tails: dict = {}
    for (a, b), c in first.coeffs.items():
        tails.setdefault(a, {})[(b,)] = c
    total = TensorElement.zero(fr, 3)
    for a, coeffs in sorted(tails.items()):
        y = TensorElement(fr, 1, coeffs, canonical=True)
        total = total + conn.on_frame(a).otimes(y) + g.basis(a).otimes(g.exterior_d(y))
    return g._cached("one_x_antisym", lambda: extend_right(g.antisymmetrizer)).apply(total)


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------
@dataclass
class ComparisonReport:
    difference: TensorElement
    equivalent: bool
    residual: float

    def to_dict(self) -> dict:
        return {"equivalent": self.equivalent, "residual": self.residual}


def compare_mod_sym3(c1: Connection, c2: Connection, Pi: ModuleOperator, tol: float = 1e-10) -> ComparisonReport:
    """(1 - Pi)(A1 - A2) and whether it vanishes."""
    frame = Pi.frame
    A1 = c1.A if c1.frame is frame else c1.A.to_approx(frame)
    A2 = c2.A if c2.frame is frame else c2.A.to_approx(frame)
    D = A1 - A2
    D = D - Pi.apply(D)
    return ComparisonReport(D, _vanishes(D, tol), D.norm())


def transition_matrix(v: Geometry, w: Geometry) -> list:
    """X[a][i] = <v_a, w_i> for two coordinate-built geometries on one algebra."""
    if v.algebra is not w.algebra:
        raise ValueError("frames live over different algebras")
    if v.coordinate_differentials is None or w.coordinate_frame is None:
        raise ValueError("both geometries need coordinate data")
    alg = v.algebra
    E, F = v.coordinate_differentials, w.coordinate_frame
    X = []
    for a in range(v.N):
        row = []
        for i in range(w.N):
            acc = alg.zero()
            for mu in range(alg.dim):
                if not E[a][mu].is_zero(0.0) and not F[mu][i].is_zero(0.0):
                    acc = acc + E[a][mu] * F[mu][i]
            row.append(acc)
        X.append(row)
    return X


def convert_tensor(t: TensorElement, target: Geometry, X: list) -> TensorElement:
    """Re-express t (in a frame w) in the frame of ``target`` using X[a][i] = <v_a, w_i>."""
    fr = target.frame
    cur = {I: c for I, c in t.coeffs.items()}
    # contract one slot at a time from the right: <v_b, w_j c> = X[b][j] c
    k = t.k
    for slot in range(k - 1, -1, -1):
        nxt: dict = {}
        for I, c in cur.items():
            head, j, tail = I[:slot], I[slot], I[slot + 1:]
            for b in range(fr.N):
                x = X[b][j]
                if x.is_zero(0.0):
                    continue
                v = fr.twist(x, tail) * c
                key = head + (b,) + tail
                nxt[key] = nxt[key] + v if key in nxt else v
        cur = nxt
    return TensorElement(fr, k, cur)


def frame_change_tensor(v: Geometry, w: Geometry) -> tuple:
    """B = sum x_i (x) d<x_i, y_j> (x) y_j^dag and alpha^(-1)(grad^v - grad^w).

    Both are returned in the frame of ``v``; they agree when the frames
    present the same module.
    """
    Xvw = transition_matrix(v, w)
    Xwv = transition_matrix(w, v)
    fr = v.frame
    direct = TensorElement.zero(fr, 3)
    for j in range(w.N):
        ydag = convert_tensor(w.frame.dagger_vector(j), v, Xvw)
        for i in range(v.N):
            dx = v.differential0(Xvw[i][j])
            if not dx.coeffs:
                continue
            direct = direct + v.basis(i).otimes(dx).otimes(ydag)
    via = TensorElement.zero(fr, 3)
    for b in range(v.N):
        xb_w = convert_tensor(v.basis(b), w, Xwv)
        diff = v.grassmann(v.basis(b)) - convert_tensor(w.grassmann(xb_w), v, Xvw)
        via = via + diff.otimes(fr.dagger_vector(b))
    return direct, via


# ---------------------------------------------------------------------------
# bimodule correction
# ---------------------------------------------------------------------------
@dataclass
class CorrectionReport:
    solved: bool
    B: TensorElement | None
    residual: float
    unknowns: int
    detail: str = ""

    @property
    def is_zero(self) -> bool:
        return self.B is not None and not self.B.coeffs

    def to_dict(self) -> dict:
        out = {"solved": self.solved, "residual": self.residual, "unknowns": self.unknowns}
        if self.B is not None:
            out["B_norm"] = self.B.norm()
        if self.detail:
            out["detail"] = self.detail
        return out


def _inverse_braiding(g: Geometry, sigma: ModuleOperator) -> ModuleOperator:
    one = _one(sigma.frame, 2)
    sq = sigma @ sigma
    if sq.equals(one) if g.exact else sq.equals(one, g.algebra.tol):
        return sigma
    try:
        dense = dense_representation(sigma, restrict=False)
    except NotImplementedError as exc:
        raise ValueError("cannot invert a braiding with sigma^2 != 1 on this backend") from exc
    return operator_from_dense(sigma.frame, 2, np.linalg.inv(dense))


def _correction_map(g: Geometry, sigma_inv: ModuleOperator):
    def L(B: TensorElement) -> list:
        ar = alpha_right(B)
        al = alpha_left(B)
        return [ar(g.basis(b)) + sigma_inv.apply(al(g.basis(b))) for b in range(g.N)]
    return L


def _flatten_outputs(outs: list, g: Geometry, D) -> np.ndarray:
    """Scalar coefficients of total degree D + d_b at every (b, J)."""
    fr = g.frame
    alg = g.algebra
    vals = []
    for b, t in enumerate(outs):
        target = alg.add_degrees(D, fr.degrees[b])
        for J in fr.labels(2):
            c = t.coeffs.get(J)
            n = alg.add_degrees(target, alg.neg_degree(fr.degree_of(J)))
            vals.append(0j if c is None else complex(c.terms.get(n, 0)))
    return np.array(vals)


def _off_block(outs: list, g: Geometry, D) -> float:
    """Size of the coefficients outside the degree-D block (should vanish)."""
    fr = g.frame
    alg = g.algebra
    worst = 0.0
    for b, t in enumerate(outs):
        target = alg.add_degrees(D, fr.degrees[b])
        for J, c in t.coeffs.items():
            n = alg.add_degrees(target, alg.neg_degree(fr.degree_of(J)))
            for m, v in c.terms.items():
                if m != n:
                    worst = max(worst, abs(complex(v)))
    return worst


def bimodule_correction(c0: Connection, sigma: ModuleOperator | None = None, tol: float = 1e-10) -> CorrectionReport:
    """Solve (alpha + sigma^(-1) alpha_left)(B) = sigma^(-1) conj grad0 - grad0 on the frame basis.

    Torus backends split the system by total degree, the grid backend solves
    it pointwise; each block is a dense least-squares problem and a residual
    above ``tol`` is reported as having no solution.
    """
    g = c0.geometry
    sigma = g.sigma if sigma is None else sigma
    try:
        sigma_inv = _inverse_braiding(g, sigma)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return CorrectionReport(False, None, float("inf"), 0, f"braiding not invertible: {exc}")
    if sigma_inv.frame is not c0.frame:
        g = _on(g, sigma_inv.frame)
        c0 = Connection(g, c0.A.to_approx(g.frame), c0.label)
    fr = g.frame
    rhs = [sigma_inv.apply(c0.conjugate(g.basis(b))) - c0.on_frame(b) for b in range(g.N)]
    exact = _is_exact(fr)
    if all((t.is_zero() if exact else t.norm() <= tol * 1e-3) for t in rhs):
        return CorrectionReport(True, TensorElement.zero(fr, 3), 0.0, 0, "right-hand side vanishes")
    L = _correction_map(g, sigma_inv)
    labels = fr.labels(3)
    if isinstance(g.algebra, GridAlgebra):
        return _solve_grid(g, L, rhs, labels, tol)
    return _solve_graded(g, L, rhs, labels, tol)


def _solve_graded(g: Geometry, L, rhs: list, labels: list, tol: float) -> CorrectionReport:
    fr = g.frame
    alg = g.algebra
    blocks = set()
    for b, t in enumerate(rhs):
        for J, c in t.coeffs.items():
            for n in c.terms:
                D = alg.add_degrees(alg.add_degrees(n, fr.degree_of(J)), alg.neg_degree(fr.degrees[b]))
                blocks.add(D)
    tframe = fr.approx_twin()
    B = TensorElement.zero(tframe, 3)
    worst = 0.0
    unknowns = 0
    for D in sorted(blocks):
        cols, basis = [], []
        for I in labels:
            n = alg.add_degrees(D, alg.neg_degree(fr.degree_of(I)))
            e = TensorElement.basis(fr, I, alg.monomial(n))
            outs = L(e)
            if _off_block(outs, g, D) > 1e-9:
                raise RuntimeError("correction map does not preserve total degree")
            cols.append(_flatten_outputs(outs, g, D))
            basis.append(e)
        M = np.array(cols).T
        y = _flatten_outputs(rhs, g, D)
        x, *_ = np.linalg.lstsq(M, y, rcond=None)
        worst = max(worst, float(np.max(np.abs(M @ x - y), initial=0.0)))
        unknowns += len(basis)
        for coef, e in zip(x, basis):
            if abs(coef) > 1e-14:
                B = B + e.to_approx(tframe).scale(complex(coef))
    solved = worst <= tol
    return CorrectionReport(solved, B if solved else None, worst, unknowns,
                            "" if solved else "inconsistent system: no solution")


def _solve_grid(g: Geometry, L, rhs: list, labels: list, tol: float) -> CorrectionReport:
    fr = g.frame
    alg = g.algebra
    shape = alg.shape
    pts = int(np.prod(shape))
    rows = [(b, J) for b in range(g.N) for J in fr.labels(2)]

    def flat(outs):
        out = np.zeros((pts, len(rows)), dtype=complex)
        for r, (b, J) in enumerate(rows):
            c = outs[b].coeffs.get(J)
            if c is not None:
                out[:, r] = np.broadcast_to(c.data, shape).reshape(-1)
        return out

    M = np.stack([flat(L(TensorElement.basis(fr, I))) for I in labels], axis=2)
    y = flat(rhs)
    x = np.einsum("pij,pj->pi", np.linalg.pinv(M), y)
    resid = np.einsum("pij,pj->pi", M, x) - y
    worst = float(np.max(np.abs(resid)))
    solved = worst <= tol
    B = None
    if solved:
        coeffs = {I: alg.from_array(x[:, r].reshape(shape)).compress(1e-14) for r, I in enumerate(labels)}
        B = TensorElement(fr, 3, coeffs, canonical=True)
    return CorrectionReport(solved, B, worst, len(labels) * pts,
                            "" if solved else "inconsistent system: no solution")
