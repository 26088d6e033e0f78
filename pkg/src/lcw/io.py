"""JSON geometry documents and report serialization.

Exact scalars are written as arrays of ``"p/q"`` strings, the coefficients on
1, zeta, zeta^2, ... of the cyclotomic field; floating scalars as ``[re, im]``.
Torus algebra elements are lists of ``[degree, scalar]`` pairs and tensors are
lists of ``{"index": [...], "coeff": element}`` entries.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .algebra import FuzzyAlgebra, GridAlgebra, LaurentAlgebra, TorusElement
from .catalog import diagonal_metric_geometry
from .geometry import Geometry, _build_psi, from_coordinate_frame
from .scalars import Cyclotomic
from .tensors import Frame, TensorElement


class DocumentError(ValueError):
    """Malformed or schema-violating geometry document."""


# ---------------------------------------------------------------------------
# schemas
# ---------------------------------------------------------------------------
def load_schema(name: str) -> dict:
    """Schema shipped with the package (``geometry`` or ``report``)."""
    text = resources.files("lcw").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_document(doc: dict, name: str = "geometry") -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DocumentError(f"{name} document invalid at {path}: {exc.message}") from exc


# ---------------------------------------------------------------------------
# scalars and elements
# ---------------------------------------------------------------------------
def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def scalar_to_json(c):
    if isinstance(c, Cyclotomic):
        coeffs = list(c.coefficients())
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return [_frac_str(v) for v in coeffs]
    c = complex(c)
    return [float(c.real), float(c.imag)]


def scalar_from_json(value, algebra):
    """Parse a scalar for ``algebra`` (exact arrays, rationals or [re, im])."""
    exact = getattr(algebra, "exact", False)
    try:
        if exact:
            field = algebra.scalars.field
            if isinstance(value, list):
                return field.from_coefficients([Fraction(v) for v in value])
            return field.from_rational(Fraction(value))
        if isinstance(value, list):
            if len(value) != 2:
                raise DocumentError(f"approximate scalar must be [re, im], got {value!r}")
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(Fraction(value))
        return complex(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise DocumentError(f"cannot parse scalar {value!r}: {exc}") from exc


def element_to_json(e):
    if isinstance(e, TorusElement):
        return [[list(n), scalar_to_json(c)] for n, c in sorted(e.terms.items())]
    if e.is_constant():
        return [[[0] * e.algebra.dim, scalar_to_json(complex(e.data))]]
    raise DocumentError("sampled grid elements have no document form")


def element_from_json(value, algebra):
    if isinstance(algebra, GridAlgebra):
        terms = [(tuple(int(v) for v in k), scalar_from_json(c, algebra)) for k, c in value]
        return algebra.trig_poly(terms) if terms else algebra.zero()
    terms = {}
    for n, c in value:
        if len(n) != 2:
            raise DocumentError(f"torus degrees have two entries, got {n!r}")
        terms[tuple(int(v) for v in n)] = scalar_from_json(c, algebra)
    return algebra.from_terms(terms)


def matrix_from_json(value, algebra, rows: int | None = None, cols: int | None = None) -> list:
    if rows is not None and len(value) != rows:
        raise DocumentError(f"expected {rows} rows, got {len(value)}")
    out = []
    for row in value:
        if cols is not None and len(row) != cols:
            raise DocumentError(f"expected {cols} columns, got {len(row)}")
        out.append([element_from_json(e, algebra) for e in row])
    return out


def tensor_to_json(t: TensorElement) -> list:
    return [{"index": list(I), "coeff": element_to_json(c)} for I, c in sorted(t.coeffs.items())]


def tensor_from_json(value, frame: Frame, k: int) -> TensorElement:
    coeffs = {}
    for entry in value:
        I = tuple(int(i) for i in entry["index"])
        if len(I) != k or any(i < 0 or i >= frame.N for i in I):
            raise DocumentError(f"bad tensor index {list(I)} for rank {k} and frame size {frame.N}")
        coeffs[I] = element_from_json(entry["coeff"], frame.algebra)
    return TensorElement(frame, k, coeffs)


def tensor_dump(t: TensorElement, limit: int | None = None) -> list:
    """Nonzero coefficients sorted by multi-index then degree.

    Grid coefficients are summarized by their largest sample.
    """
    out = []
    for I, c in sorted(t.coeffs.items()):
        if isinstance(c, TorusElement):
            for n, v in sorted(c.terms.items()):
                out.append({"index": list(I), "degree": list(n), "coeff": scalar_to_json(v)})
        else:
            out.append({"index": list(I), "max_abs": float(np.max(np.abs(c.data)))})
    return out if limit is None else out[:limit]


# ---------------------------------------------------------------------------
# geometry documents
# ---------------------------------------------------------------------------
def _theta(doc: dict) -> Fraction:
    try:
        return Fraction(str(doc.get("theta", "0")))
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"theta must be a rational 'p/q': {exc}") from exc


def _algebra(doc: dict):
    backend = doc["backend"]
    theta = _theta(doc)
    params = doc.get("algebra", {})
    exact = bool(doc.get("exact", True))
    tol = float(params.get("tol", 1e-10))
    if backend == "laurent":
        return LaurentAlgebra(theta, exact=exact, tol=tol)
    if backend == "fuzzy":
        if theta == 0:
            raise DocumentError("the fuzzy torus needs a nonzero theta = p/q")
        q = params.get("q")
        if q is not None and int(q) != theta.denominator:
            raise DocumentError(f"q = {q} does not match theta = {theta}")
        return FuzzyAlgebra(theta, exact=exact, tol=tol)
    if backend == "grid":
        if theta != 0:
            raise DocumentError("the grid backend is commutative: theta must be 0")
        shape = params.get("shape")
        if not shape:
            raise DocumentError("grid documents need algebra.shape")
        return GridAlgebra(shape, band_limit=params.get("band_limit"), tol=tol)
    raise DocumentError(f"unknown backend {backend!r}")


def geometry_from_document(doc: dict) -> Geometry:
    """Build a geometry from a parsed document (validated against the schema)."""
    validate_document(doc, "geometry")
    name = doc.get("name", "geometry")
    meta = dict(doc.get("metadata", {}))
    if doc["backend"] == "grid":
        params = doc["algebra"]
        metric = doc["metric"]["diagonal"]
        diag = [[(tuple(int(v) for v in k), complex(*c) if isinstance(c, list) else complex(c)) for k, c in terms]
                for terms in metric]
        if len(diag) != len(params["shape"]):
            raise DocumentError("need one diagonal metric entry per grid axis")
        try:
            return diagonal_metric_geometry(params["shape"], diag, params.get("band_limit"), name=name)
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc
    alg = _algebra(doc)
    fr = doc["frame"]
    degrees = [tuple(d) for d in fr["degrees"]]
    N = len(degrees)
    psi_doc = doc.get("psi", "sigma-theta")
    if "gram" not in fr:
        F = matrix_from_json(fr["coordinate_frame"], alg, alg.dim, N)
        ginv = fr.get("inverse_metric")
        ginv = None if ginv is None else matrix_from_json(ginv, alg, alg.dim, alg.dim)
        psi = psi_doc if isinstance(psi_doc, str) else matrix_from_json(psi_doc["matrix"], alg, N * N, N * N)
        return from_coordinate_frame(alg, F, degrees, ginv, psi=psi, name=name, metadata=meta)
    frame = Frame(alg, degrees, matrix_from_json(fr["gram"], alg, N, N),
                  matrix_from_json(fr["dagger_matrix"], alg, N, N))
    psi = _build_psi(frame, psi_doc if isinstance(psi_doc, str) else
                     matrix_from_json(psi_doc["matrix"], alg, N * N, N * N))
    diffs = [tensor_from_json(t, frame, 2) for t in fr["frame_differentials"]]
    if len(diffs) != N:
        raise DocumentError("one frame differential per frame element is required")
    lifts = fr.get("universal_lift_correction")
    lifts = None if lifts is None else [tensor_from_json(t, frame, 2) for t in lifts]
    E = fr.get("coordinate_differentials")
    E = None if E is None else matrix_from_json(E, alg, N, alg.dim)
    F = fr.get("coordinate_frame")
    F = None if F is None else matrix_from_json(F, alg, alg.dim, N)
    try:
        return Geometry(frame, psi, diffs, E, lifts, F, name=name, metadata=meta)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def geometry_to_document(g: Geometry) -> dict:
    """Explicit document for a torus geometry (grid geometries keep their metric)."""
    alg = g.algebra
    if isinstance(alg, GridAlgebra):
        metric = g.metadata.get("metric")
        if metric is None:
            raise DocumentError("grid geometries serialize only through their diagonal metric")
        return {
            "name": g.name,
            "backend": "grid",
            "theta": "0",
            "algebra": {"shape": list(alg.shape)},
            "metric": {"diagonal": [[[list(k), scalar_to_json(c)] for k, c in terms] for terms in metric]},
            "psi": "sigma-theta",
        }
    fr = g.frame
    doc = {
        "name": g.name,
        "backend": "fuzzy" if isinstance(alg, FuzzyAlgebra) else "laurent",
        "theta": _frac_str(Fraction(alg.theta)),
        "exact": bool(alg.exact),
        "frame": {
            "degrees": [list(d) for d in fr.degrees],
            "gram": [[element_to_json(e) for e in row] for row in fr.gram],
            "dagger_matrix": [[element_to_json(e) for e in row] for row in fr.dagger],
            "frame_differentials": [tensor_to_json(t) for t in g.frame_differentials],
            "universal_lift_correction": None if g.lift_corrections is None
            else [tensor_to_json(t) for t in g.lift_corrections],
        },
        "psi": "sigma-theta",
        "metadata": {k: v for k, v in g.metadata.items() if isinstance(v, (str, int, float, bool))},
    }
    if isinstance(alg, FuzzyAlgebra):
        doc["algebra"] = {"q": alg.q}
    if g.coordinate_differentials is not None:
        doc["frame"]["coordinate_differentials"] = [[element_to_json(e) for e in row] for row in g.coordinate_differentials]
    if g.coordinate_frame is not None:
        doc["frame"]["coordinate_frame"] = [[element_to_json(e) for e in row] for row in g.coordinate_frame]
    if not _is_sigma_theta(g):
        doc["psi"] = {"matrix": [[element_to_json(e) for e in row] for row in g.psi.dense_entries()]}
    return doc


def _is_sigma_theta(g: Geometry) -> bool:
    ref = _build_psi(g.frame, "sigma-theta")
    return g.psi.equals(ref) if g.exact else g.psi.equals(ref, g.algebra.tol)


def load_document(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc


def load_geometry(path) -> Geometry:
    return geometry_from_document(load_document(path))


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def shipped_path(name: str) -> Path:
    return Path(str(resources.files("lcw").joinpath("data", f"{name}.json")))


def shipped_names() -> list:
    data = resources.files("lcw").joinpath("data")
    return sorted(p.name[:-5] for p in data.iterdir() if p.name.endswith(".json"))


def export_shipped(directory) -> list:
    """Write every shipped catalog geometry as a document; returns the paths."""
    from .catalog import SHIPPED

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, build in sorted(SHIPPED.items()):
        doc = geometry_to_document(build())
        doc["name"] = name
        path = directory / f"{name}.json"
        path.write_text(dumps(doc))
        paths.append(path)
    return paths
