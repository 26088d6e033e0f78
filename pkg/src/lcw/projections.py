"""The two-projection problem for P = psi (x) 1 and Q = 1 (x) psi.

Given two projections the limit ``Pi = lim (PQ)^n`` projects onto the
intersection of their ranges.  When U = 2P - 1 and V = 2Q - 1 satisfy the
braid relation UVU = VUV they generate a unitary action of S_3 and Pi is the
group average; otherwise the powers are iterated in a faithful
finite-dimensional representation (fuzzy and grid backends only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import GridAlgebra, LaurentAlgebra
from .tensors import (
    ModuleOperator,
    TensorElement,
    UnsupportedNormError,
    dense_representation,
    operator_from_dense,
    operator_norm,
)


class ConvergenceError(RuntimeError):
    """Raised when an iteration does not settle within its budget."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


@dataclass
class TwoProjectionReport:
    pi: object
    friedrichs_angle: float
    concordant: bool
    method: str
    iterations: int
    residual: float
    braid: bool = False
    rank: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "friedrichs_angle": self.friedrichs_angle,
            "concordant": self.concordant,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "braid": self.braid,
        }
        if self.rank is not None:
            out["rank"] = self.rank
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def _half_scalar(op: ModuleOperator):
    alg = op.frame.algebra
    if getattr(alg, "exact", False):
        return alg.scalars.coerce(Fraction(1, 6))
    return 1.0 / 6.0


def _is_exact(op: ModuleOperator) -> bool:
    return bool(getattr(op.frame.algebra, "exact", False))


def _ops_equal(a: ModuleOperator, b: ModuleOperator, tol: float | None) -> bool:
    if _is_exact(a):
        return a.equals(b)
    return a.equals(b, tol)


def reflections(P, Q):
    """U = 2P - 1 and V = 2Q - 1."""
    if isinstance(P, np.ndarray):
        one = np.eye(P.shape[0])
        return 2 * P - one, 2 * Q - one
    one = ModuleOperator.identity(P.frame, P.k)
    return P.scale(2) - one, Q.scale(2) - one


def braid_holds(P, Q, tol: float = 1e-12) -> bool:
    """Whether (2P-1)(2Q-1)(2P-1) = (2Q-1)(2P-1)(2Q-1)."""
    U, V = reflections(P, Q)
    if isinstance(P, np.ndarray):
        return bool(np.max(np.abs(U @ V @ U - V @ U @ V), initial=0.0) <= tol)
    return _ops_equal(U @ V @ U, V @ U @ V, tol)


def group_average(P, Q):
    """Pi = (1 + U + V + UV + VU + UVU) / 6, valid when the braid relation holds."""
    U, V = reflections(P, Q)
    if isinstance(P, np.ndarray):
        one = np.eye(P.shape[0])
        return (one + U + V + U @ V + V @ U + U @ V @ U) / 6.0
    one = ModuleOperator.identity(P.frame, P.k)
    UV = U @ V
    total = one + U + V + UV + V @ U + UV @ U
    return total.scale(_half_scalar(P))


def _norm_dense(mat: np.ndarray, pointwise: bool) -> float:
    if mat.size == 0:
        return 0.0
    if pointwise:
        return float(np.max(np.linalg.norm(mat, ord=2, axis=(1, 2))))
    return float(np.linalg.norm(mat, ord=2))


def _dense_pair(P: ModuleOperator, Q: ModuleOperator):
    """Faithful matrices of P and Q, broadcast to a common grid layout."""
    dP = dense_representation(P)
    dQ = dense_representation(Q)
    pointwise = isinstance(P.frame.algebra, GridAlgebra)
    if pointwise and dP.shape[0] != dQ.shape[0]:
        pts = max(dP.shape[0], dQ.shape[0])
        dP = np.broadcast_to(dP, (pts,) + dP.shape[1:]).copy()
        dQ = np.broadcast_to(dQ, (pts,) + dQ.shape[1:]).copy()
    return dP, dQ, pointwise


def iterate_powers(M: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000, pointwise: bool = False):
    """Iterate X_(n+1) = X_n M from X_1 = M until successive powers agree.

    Returns the limit, the iteration count and the final difference norm;
    raises :class:`ConvergenceError` when the budget is exhausted.
    """
    X = M.copy()
    residual = float("inf")
    for n in range(1, max_iter + 1):
        nxt = X @ M
        residual = _norm_dense(nxt - X, pointwise)
        X = nxt
        if residual < tol:
            return X, n, residual
    raise ConvergenceError(
        f"(PQ)^n did not converge in {max_iter} iterations (last difference {residual:.3e})",
        max_iter,
        residual,
    )


def _rank(mat: np.ndarray, pointwise: bool, tol: float = 1e-8) -> int:
    if mat.size == 0:
        return 0
    if pointwise:
        return int(np.max(np.linalg.matrix_rank(mat, tol=tol)))
    return int(np.linalg.matrix_rank(mat, tol=tol))


def _s3_angle(P: ModuleOperator, Q: ModuleOperator, Pi: ModuleOperator) -> float:
    """Angle of an S_3 pair without a faithful representation.

    Within a unitary S_3 representation PQ - Pi vanishes on the trivial and
    sign parts and has norm cos(pi/3) = 1/2 on every copy of the
    two-dimensional irreducible part.
    """
    D = (P @ Q) - Pi
    tol = None if _is_exact(P) else P.frame.algebra.tol
    return 0.0 if (D.is_zero() if tol is None else D.is_zero(tol)) else 0.5


# ---------------------------------------------------------------------------
# public api
# ---------------------------------------------------------------------------
def friedrichs_angle(P, Q, Pi) -> float:
    """||PQ - Pi|| in the faithful representation."""
    if isinstance(P, np.ndarray):
        return float(np.linalg.norm(P @ Q - Pi, ord=2))
    if Pi.frame is not P.frame:
        P, Q = P.to_approx(Pi.frame), Q.to_approx(Pi.frame)
    alg = P.frame.algebra
    if isinstance(alg, LaurentAlgebra):
        if not braid_holds(P, Q, alg.tol):
            raise UnsupportedNormError("the Laurent backend has no operator norm outside the S_3 case")
        return _s3_angle(P, Q, Pi)
    return operator_norm((P @ Q) - Pi)


def limit_projection(P, Q, tol: float = 1e-12, max_iter: int = 10_000, method: str = "auto") -> TwoProjectionReport:
    """Limit projection Pi of the alternating products (PQ)^n.

    Parameters
    ----------
    P, Q
        Projections, either as :class:`ModuleOperator` or as square numpy arrays.
    method
        ``"auto"`` uses the group average when the braid relation holds and
        iterates otherwise; ``"iterative"`` and ``"group-average"`` force a path.
    """
    if method not in ("auto", "iterative", "group-average"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(P, np.ndarray):
        return _limit_dense(np.asarray(P, dtype=complex), np.asarray(Q, dtype=complex), tol, max_iter, method)
    alg = P.frame.algebra
    braid_tol = max(tol, alg.tol) if not _is_exact(P) else 0.0
    braid = braid_holds(P, Q, braid_tol)
    if method == "group-average" and not braid:
        raise ValueError("the braid relation fails; the group average is not the limit projection")
    if method == "group-average" or (method == "auto" and braid):
        Pi = group_average(P, Q)
        if isinstance(alg, LaurentAlgebra):
            angle = _s3_angle(P, Q, Pi)
            return TwoProjectionReport(Pi, angle, angle < 1, "group-average", 0, 0.0, braid=True)
        angle = friedrichs_angle(P, Q, Pi)
        dP = dense_representation(Pi)
        rank = _rank(dP, isinstance(alg, GridAlgebra))
        return TwoProjectionReport(Pi, angle, angle < 1, "group-average", 0, 0.0, braid=True, rank=rank)
    if isinstance(alg, LaurentAlgebra):
        raise UnsupportedNormError("iterating (PQ)^n needs the fuzzy or grid backend")
    dP, dQ, pointwise = _dense_pair(P, Q)
    M = dP @ dQ
    limit, n, residual = iterate_powers(M, tol, max_iter, pointwise)
    # fuzzy results live on the floating twin frame
    Pi = operator_from_dense(P.frame, P.k, limit)
    angle = _norm_dense(M - limit, pointwise)
    return TwoProjectionReport(Pi, angle, angle < 1, "iterative", n, residual, braid=braid,
                               rank=_rank(limit, pointwise))


def _limit_dense(P: np.ndarray, Q: np.ndarray, tol: float, max_iter: int, method: str) -> TwoProjectionReport:
    braid = braid_holds(P, Q, max(tol, 1e-12))
    if method == "group-average" and not braid:
        raise ValueError("the braid relation fails; the group average is not the limit projection")
    if method == "group-average" or (method == "auto" and braid):
        Pi = group_average(P, Q)
        angle = friedrichs_angle(P, Q, Pi)
        return TwoProjectionReport(Pi, angle, angle < 1, "group-average", 0, 0.0, braid=True, rank=_rank(Pi, False))
    M = P @ Q
    limit, n, residual = iterate_powers(M, tol, max_iter)
    angle = float(np.linalg.norm(M - limit, ord=2))
    return TwoProjectionReport(limit, angle, angle < 1, "iterative", n, residual, braid=braid,
                               rank=_rank(limit, False))


def _align(op: ModuleOperator, t: TensorElement) -> TensorElement:
    if op.frame is t.frame:
        return t
    return t.to_approx(op.frame)


def _ratio(new: TensorElement, old: TensorElement):
    """Scalar c with new = c old, or None."""
    if not old.coeffs:
        return None
    I, a = next(iter(sorted(old.coeffs.items())))
    b = new.coeffs.get(I)
    if b is None:
        return None
    alg = old.frame.algebra
    if isinstance(alg, GridAlgebra):
        return None
    n, ca = next(iter(sorted(a.terms.items())))
    cb = b.terms.get(n)
    if cb is None:
        return None
    c = cb / ca
    if new == old.scale(c):
        return c
    return None


def neumann_inverse(P: ModuleOperator, Q: ModuleOperator, Pi: ModuleOperator, t: TensorElement,
                    tol: float = 1e-12, max_iter: int = 10_000) -> TensorElement:
    """(1 + Pi - PQ)^(-1) t = Pi t + sum_n (PQ)^n (1 - Pi) t.

    Exact backends stop at an exactly vanishing increment, or sum the tail in
    closed form once the increments become geometric with a scalar ratio.
    """
    if Pi.frame is not P.frame:
        P, Q = P.to_approx(Pi.frame), Q.to_approx(Pi.frame)
    t = _align(Pi, t)
    PQ = P @ Q
    v = t - Pi.apply(t)
    total = Pi.apply(t)
    exact = _is_exact(Pi)
    for n in range(max_iter):
        if exact:
            if v.is_zero():
                return total
        elif v.norm() < tol:
            return total + v
        nxt = PQ.apply(v)
        if exact:
            c = _ratio(nxt, v)
            if c is not None and abs(complex(c)) < 1:
                return total + v.scale((c.field.one - c).inverse())
        total = total + v
        v = nxt
    raise ConvergenceError("Neumann series did not converge", max_iter, v.norm())


def geometric_decay_residuals(P: ModuleOperator, Q: ModuleOperator, W: TensorElement, n_max: int = 4) -> list:
    """Tensors (PQ)^n W - 4^(1-n) PQ W for n = 1..n_max."""
    PQ = P @ Q
    alg = P.frame.algebra
    base = PQ.apply(W)
    cur = base
    out = []
    for n in range(1, n_max + 1):
        if getattr(alg, "exact", False):
            factor = alg.scalars.coerce(Fraction(1, 4 ** (n - 1)))
        else:
            factor = 4.0 ** (1 - n)
        out.append(cur - base.scale(factor))
        cur = PQ.apply(cur)
    return out


def braid_residuals(P: ModuleOperator, Q: ModuleOperator) -> list:
    """UVU - VUV applied to every basis three-tensor."""
    U, V = reflections(P, Q)
    L, R = U @ V @ U, V @ U @ V
    fr = P.frame
    return [L.apply(TensorElement.basis(fr, I)) - R.apply(TensorElement.basis(fr, I)) for I in fr.labels(P.k)]
