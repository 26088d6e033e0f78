"""Classical Christoffel and Riemann symbols from a metric, evaluated pointwise.

This is deliberately independent of the connection engine: metric entries are
trigonometric polynomials whose derivatives are taken analytically, and the
classical coordinate formulas are applied with dense numpy algebra.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np


class SingularMetricError(ValueError):
    """The metric is not invertible at some evaluation point."""


def _trig_jets(terms: Sequence, points: np.ndarray):
    """Value, gradient and Hessian of sum_k c_k exp(i k . x) at each point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    npts, dim = points.shape
    val = np.zeros(npts, dtype=complex)
    grad = np.zeros((npts, dim), dtype=complex)
    hess = np.zeros((npts, dim, dim), dtype=complex)
    for k, c in terms:
        k = np.asarray(k, dtype=float)
        if k.shape != (dim,):
            raise ValueError(f"wave vector {tuple(k)} does not match dimension {dim}")
        e = complex(c) * np.exp(1j * points @ k)
        val += e
        grad += 1j * e[:, None] * k[None, :]
        hess += -e[:, None, None] * np.outer(k, k)[None, :, :]
    return val, grad, hess


def metric_jets(entries: Mapping, dim: int, points: np.ndarray):
    """Metric g, first derivatives dg[p, s, m, n] = d_s g_mn and second derivatives.

    ``entries`` maps index pairs (m, n) to trigonometric-polynomial term lists;
    missing pairs are zero and the symmetric partner is filled in.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    npts = points.shape[0]
    g = np.zeros((npts, dim, dim), dtype=complex)
    dg = np.zeros((npts, dim, dim, dim), dtype=complex)
    ddg = np.zeros((npts, dim, dim, dim, dim), dtype=complex)
    for (m, n), terms in entries.items():
        v, d1, d2 = _trig_jets(terms, points)
        for a, b in {(m, n), (n, m)}:
            g[:, a, b] = v
            dg[:, :, a, b] = d1
            ddg[:, :, :, a, b] = d2
    return g, dg, ddg


def diagonal_entries(diagonal: Sequence) -> dict:
    return {(m, m): terms for m, terms in enumerate(diagonal)}


def _inverse(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if np.any(np.abs(det) < 1e-14):
        bad = int(np.argmin(np.abs(det)))
        raise SingularMetricError(f"metric is singular at evaluation point {bad}")
    return np.linalg.inv(g)


def christoffel(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma[p, nu, mu, rho] = 1/2 g^{nu s}(d_rho g_{s mu} + d_mu g_{s rho} - d_s g_{mu rho})."""
    ginv = _inverse(g)
    # dg[p, s, m, n] = d_s g_mn
    S = np.einsum("prsm->psmr", dg) + np.einsum("pmsr->psmr", dg) - dg
    return 0.5 * np.einsum("pns,psmr->pnmr", ginv, S)


def christoffel_derivative(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> np.ndarray:
    """dGamma[p, a, nu, mu, rho] = d_a Gamma^nu_{mu rho}."""
    ginv = _inverse(g)
    S = np.einsum("prsm->psmr", dg) + np.einsum("pmsr->psmr", dg) - dg
    # ddg[p, a, s, m, n] = d_a d_s g_mn
    dS = np.einsum("parsm->pasmr", ddg) + np.einsum("pamsr->pasmr", ddg) - ddg
    dginv = -np.einsum("pij,pajk,pkl->pail", ginv, dg, ginv)
    return 0.5 * (np.einsum("pans,psmr->panmr", dginv, S) + np.einsum("pns,pasmr->panmr", ginv, dS))


def riemann(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> np.ndarray:
    """R[p, nu, b, a, m] = d_a G^nu_{m b} - d_m G^nu_{a b} + G^nu_{a l} G^l_{m b} - G^nu_{m l} G^l_{a b}."""
    G = christoffel(g, dg)
    dG = christoffel_derivative(g, dg, ddg)
    term1 = np.einsum("panmb->pnbam", dG)
    term2 = np.einsum("pmnab->pnbam", dG)
    quad = np.einsum("pnal,plmb->pnbam", G, G)
    return term1 - term2 + quad - np.einsum("pnbma->pnbam", quad)


def connection_on_coordinate_forms(G: np.ndarray) -> np.ndarray:
    """C[p, nu, r, m]: coefficient of dx^r (x) dx^m in grad(dx^nu) = -Gamma^nu_{m r} dx^r (x) dx^m."""
    return -np.einsum("pnmr->pnrm", G)


def curvature_on_coordinate_forms(R: np.ndarray) -> np.ndarray:
    """K[p, nu, b, a, m]: coefficient of dx^b (x) dx^a (x) dx^m in the antisymmetrized curvature.

    For the right connection conventions used here the value on dx^nu is
    -1/2 R^nu_{b a m}.
    """
    return -0.5 * R


def grid_points(shape: Sequence[int], indices: Sequence[Sequence[int]]) -> np.ndarray:
    """Coordinates 2 pi i / n of grid index tuples."""
    shape = np.asarray(shape, dtype=float)
    return 2 * np.pi * np.asarray(indices, dtype=float) / shape[None, :]


def christoffel_table(entries: Mapping, dim: int, points: np.ndarray) -> list:
    """Nonzero Christoffel symbols per point as dictionaries, for reports."""
    g, dg, _ = metric_jets(entries, dim, points)
    G = christoffel(g, dg)
    table = []
    for p in range(G.shape[0]):
        row = {}
        for nu, mu, rho in np.ndindex(dim, dim, dim):
            v = G[p, nu, mu, rho]
            if abs(v) > 1e-14:
                row[f"{nu},{mu},{rho}"] = [float(v.real), float(v.imag)]
        table.append(row)
    return table
