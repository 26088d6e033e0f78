"""Command-line front end: ``lcw check|connect|projections|oracle|junk|compare``.

Exit codes: 0 success, 1 mathematical failure, 2 input error, 3 solver
non-convergence.  Reports are JSON with sorted keys; timings are included only
with ``--timings`` so that default output is byte-stable.
"""

from __future__ import annotations

import sys
import time
from contextlib import contextmanager

import click
import numpy as np

from . import oracle
from .algebra import BandLimitError, GridAlgebra
from .connection import (
    DagConcordanceError,
    HypothesisError,
    certify,
    compare_mod_sym3,
    compute_W,
    curvature,
    levi_civita,
    projection_report,
    torsion_tensor,
)
from .geometry import Geometry, MissingLiftError
from .io import DocumentError, dumps, load_document, geometry_from_document, tensor_dump, validate_document
from .projections import ConvergenceError, limit_projection
from .tensors import UnsupportedNormError, operator_norm

EXIT_OK, EXIT_MATH, EXIT_INPUT, EXIT_CONVERGENCE = 0, 1, 2, 3


class Run:
    """Accumulates a report and timings for one command."""

    def __init__(self, command: str, timings: bool):
        self.command = command
        self.report: dict = {"command": command, "geometry": {"name": "", "backend": "laurent"}}
        self.want_timings = timings
        self.timings: dict = {}

    @contextmanager
    def timed(self, key: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[key] = round(time.perf_counter() - start, 6)

    def echo_geometry(self, doc: dict, g: Geometry | None = None) -> None:
        echo = {"name": str(doc.get("name", "geometry")), "backend": doc.get("backend", "laurent")}
        if "theta" in doc:
            echo["theta"] = str(doc["theta"])
        if g is not None:
            echo["frame_size"] = g.N
            echo["exact"] = g.exact
            if isinstance(g.algebra, GridAlgebra):
                echo["shape"] = list(g.algebra.shape)
        self.report["geometry"] = echo

    def finish(self, code: int, out: str | None, error: str | None = None) -> None:
        self.report["exit_code"] = code
        self.report["ok"] = code == EXIT_OK
        if error:
            self.report["error"] = error
        if self.want_timings:
            self.report["timings"] = self.timings
        text = dumps(_clean(self.report))
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
        sys.exit(code)


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _load(run: Run, path: str, out: str | None) -> Geometry:
    try:
        doc = load_document(path)
        run.echo_geometry(doc if isinstance(doc, dict) else {})
        with run.timed("load"):
            g = geometry_from_document(doc)
    except (DocumentError, BandLimitError, ValueError, KeyError, TypeError) as exc:
        run.finish(EXIT_INPUT, out, f"input error: {exc}")
    run.echo_geometry(doc, g)
    return g


def _validated(run: Run, g: Geometry, out: str | None, tol: float | None) -> None:
    with run.timed("validate"):
        rep = g.validate(tol=tol)
    run.report["validation"] = rep.to_dict()
    if not rep.passed:
        run.finish(EXIT_MATH, out, "validation failed: " + ", ".join(rep.failures()))


def _common(f):
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here.")(f)
    f = click.option("--timings", is_flag=True, help="Include wall-clock timings in the report.")(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Levi-Civita connections on noncommutative one-forms."""


@main.command()
@click.argument("spec", type=click.Path())
@click.option("--tol", type=float, default=None, help="Tolerance for floating backends.")
@_common
def check(spec, tol, out, timings):
    """Validate a geometry document."""
    run = Run("check", timings)
    g = _load(run, spec, out)
    _validated(run, g, out, tol)
    run.finish(EXIT_OK, out)


def _projection_dict(rep) -> dict:
    d = rep.to_dict()
    return {k: d[k] for k in sorted(d)}


@main.command()
@click.argument("spec", type=click.Path())
@click.option("--method", type=click.Choice(["series", "closed", "auto", "both"]), default="auto")
@click.option("--tol", type=float, default=1e-10, help="Certification tolerance on floating backends.")
@_common
def connect(spec, method, tol, out, timings):
    """Construct and certify the Hermitian torsion-free connection."""
    run = Run("connect", timings)
    g = _load(run, spec, out)
    _validated(run, g, out, None)
    methods = ["series", "closed"] if method == "both" else [method]
    conns = {}
    try:
        with run.timed("projections"):
            prep = projection_report(g)
        run.report["projections"] = _projection_dict(prep)
        for m in methods:
            with run.timed(f"connect_{m}"):
                conns[m] = levi_civita(g, m)
    except DagConcordanceError as exc:
        run.report["certification"] = {"dag_concordant": False, "defect_norm": exc.residual}
        run.finish(EXIT_MATH, out, f"dagger concordance fails: {exc}")
    except HypothesisError as exc:
        run.finish(EXIT_MATH, out, f"construction hypothesis fails: {exc}")
    except ConvergenceError as exc:
        run.finish(EXIT_CONVERGENCE, out, f"non-convergence: {exc}")
    except UnsupportedNormError as exc:
        run.finish(EXIT_INPUT, out, f"unsupported: {exc}")
    primary = conns[methods[0]]
    run.report["connection_form"] = tensor_dump(primary.A)
    code = EXIT_OK
    summary = {}
    for m, c in conns.items():
        with run.timed(f"certify_{m}"):
            cert = certify(c, tol=tol, report=prep)
        summary[m] = {"label": c.label, "certification": cert.to_dict()}
        if not cert.passed:
            code = EXIT_MATH
    run.report["methods"] = summary
    run.report["certification"] = summary[methods[0]]["certification"]
    if len(conns) == 2:
        cmp = compare_mod_sym3(conns["series"], conns["closed"], prep.pi, tol)
        run.report["comparison"] = cmp.to_dict()
        if not cmp.equivalent:
            code = EXIT_MATH
    with run.timed("torsion"):
        T = torsion_tensor(primary)
    run.report["torsion"] = {"norm": T.norm(), "vanishes": T.is_zero() if g.exact else T.norm() <= tol}
    with run.timed("curvature"):
        norms = [curvature(primary, g.basis(j)).norm() for j in range(g.N)]
    run.report["curvature"] = {"max_norm_on_frame": max(norms, default=0.0)}
    W, _ = compute_W(g)
    run.report["torsion"]["W_norm"] = W.norm()
    run.finish(code, out)


@main.command()
@click.argument("spec", type=click.Path())
@click.option("--method", type=click.Choice(["auto", "iterative", "group-average"]), default="auto")
@click.option("--tol", type=float, default=1e-12)
@click.option("--max-iter", type=int, default=10_000)
@_common
def projections(spec, method, tol, max_iter, out, timings):
    """Limit projection, Friedrichs angle and concordance of P and Q."""
    run = Run("projections", timings)
    g = _load(run, spec, out)
    try:
        with run.timed("limit"):
            rep = limit_projection(g.P, g.Q, tol, max_iter, method)
        res = _projection_dict(rep)
        if rep.braid:
            try:
                with run.timed("iterative"):
                    alt = limit_projection(g.P, g.Q, tol, max_iter, "iterative")
                if rep.method != alt.method:
                    pi = rep.pi if rep.pi.frame is alt.pi.frame else rep.pi.to_approx(alt.pi.frame)
                    res["iterative_vs_group_average"] = operator_norm(pi - alt.pi)
                    res["iterations"] = alt.iterations
            except UnsupportedNormError:
                pass
    except ConvergenceError as exc:
        run.report["projections"] = {"residual": exc.residual, "iterations": exc.iterations}
        run.finish(EXIT_CONVERGENCE, out, f"non-convergence: {exc}")
    except UnsupportedNormError as exc:
        run.finish(EXIT_INPUT, out, f"unsupported: {exc}")
    except ValueError as exc:
        run.finish(EXIT_MATH, out, str(exc))
    run.report["projections"] = res
    run.finish(EXIT_OK if rep.concordant else EXIT_MATH, out)


def _parse_ints(text: str, what: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise click.BadParameter(f"{what} must be comma-separated integers, got {text!r}") from exc


def _metric_entries(doc: dict) -> tuple:
    if doc.get("backend") != "grid" or "metric" not in doc:
        raise DocumentError("the oracle needs a grid document with a diagonal metric")
    diag = doc["metric"]["diagonal"]
    entries = {}
    for m, terms in enumerate(diag):
        entries[(m, m)] = [(tuple(k), complex(*c) if isinstance(c, list) else complex(c)) for k, c in terms]
    return entries, len(diag), tuple(doc["algebra"]["shape"])


@main.command("oracle")
@click.argument("spec", type=click.Path())
@click.option("--point", "points", multiple=True, help="Grid index i,j,k; repeatable (default: origin).")
@_common
def oracle_cmd(spec, points, out, timings):
    """Classical Christoffel symbols of a diagonal metric at grid points."""
    run = Run("oracle", timings)
    try:
        doc = load_document(spec)
        run.echo_geometry(doc)
        validate_document(doc, "geometry")
        entries, dim, shape = _metric_entries(doc)
        idx = [_parse_ints(p, "point") for p in points] or [(0,) * dim]
        if any(len(p) != dim for p in idx):
            raise DocumentError(f"points need {dim} indices")
    except (DocumentError, click.BadParameter) as exc:
        run.finish(EXIT_INPUT, out, f"input error: {exc}")
    pts = oracle.grid_points(shape, idx)
    try:
        with run.timed("oracle"):
            table = oracle.christoffel_table(entries, dim, pts)
    except oracle.SingularMetricError as exc:
        run.finish(EXIT_MATH, out, str(exc))
    run.report["christoffel"] = [
        {"point": list(p), "coords": [float(x) for x in c], "gamma": t} for p, c, t in zip(idx, pts, table)
    ]
    run.finish(EXIT_OK, out)


@main.command()
@click.argument("spec", type=click.Path())
@click.option("--generator", "generators", multiple=True,
              help="Monomial degree (torus) or wave vector (grid), comma separated; repeatable.")
@click.option("--tol", type=float, default=1e-10)
@_common
def junk(spec, generators, tol, out, timings):
    """Junk tensors grad_T(d b) for monomials b and their membership in Im psi."""
    run = Run("junk", timings)
    g = _load(run, spec, out)
    try:
        degs = [_parse_ints(s, "generator") for s in generators] or [(1,) + (0,) * (g.algebra.dim - 1)]
        if any(len(d) != g.algebra.dim for d in degs):
            raise click.BadParameter(f"generators need {g.algebra.dim} entries")
        elems = [(d, g.algebra.monomial(d)) for d in degs if any(d)]
        with run.timed("junk"):
            tensors = g.junk_from_connection([b for _, b in elems])
    except (click.BadParameter, BandLimitError) as exc:
        run.finish(EXIT_INPUT, out, f"input error: {exc}")
    except MissingLiftError as exc:
        run.finish(EXIT_INPUT, out, str(exc))
    rows = []
    code = EXIT_OK
    for (d, _), t in zip(elems, tensors):
        res = (g.psi.apply(t) - t)
        in_psi = res.is_zero() if g.exact else res.norm() <= tol
        if not in_psi:
            code = EXIT_MATH
        rows.append({"generator": list(d), "in_image_of_psi": in_psi, "residual": res.norm(),
                     "norm": t.norm(), "tensor": tensor_dump(t)})
    run.report["junk"] = rows
    run.finish(code, out)


@main.command()
@click.argument("spec", type=click.Path())
@click.option("--tol", type=float, default=1e-8)
@_common
def compare(spec, tol, out, timings):
    """Compare the constructed connection with the Christoffel oracle on a grid."""
    run = Run("compare", timings)
    try:
        doc = load_document(spec)
        entries, dim, shape = _metric_entries(doc)
    except DocumentError as exc:
        run.echo_geometry({})
        run.finish(EXIT_INPUT, out, f"input error: {exc}")
    g = _load(run, spec, out)
    try:
        with run.timed("connect"):
            conn = levi_civita(g, "auto")
    except (DagConcordanceError, HypothesisError) as exc:
        run.finish(EXIT_MATH, out, str(exc))
    except ConvergenceError as exc:
        run.finish(EXIT_CONVERGENCE, out, str(exc))
    with run.timed("compare"):
        worst = connection_oracle_difference(g, conn, entries)
    run.report["comparison"] = {"max_abs_difference": worst, "tol": tol, "method": conn.label,
                                "equivalent": worst <= tol}
    run.finish(EXIT_OK if worst <= tol else EXIT_MATH, out)


def connection_oracle_difference(g: Geometry, conn, entries: dict) -> float:
    """max |grad(dx^nu) - (-Gamma^nu_{mu rho} dx^rho (x) dx^mu)| over the grid."""
    alg = g.algebra
    dim = alg.dim
    pts = np.stack([np.broadcast_to(x, alg.shape).reshape(-1) for x in alg.coordinates()], axis=1)
    gg, dg, _ = oracle.metric_jets(entries, dim, pts)
    C = oracle.connection_on_coordinate_forms(oracle.christoffel(gg, dg))
    worst = 0.0
    for nu in range(dim):
        comp = g.coordinate_components(conn(g.coordinate_one_form(nu)))
        for r in range(dim):
            for m in range(dim):
                v = comp.get((r, m))
                vals = np.zeros(pts.shape[0], dtype=complex) if v is None else np.broadcast_to(v.data, alg.shape).reshape(-1)
                worst = max(worst, float(np.max(np.abs(vals - C[:, nu, r, m]))))
    return worst


if __name__ == "__main__":  # pragma: no cover
    main()
