"""JSON instance/result/report documents and the plot table.

Sets are written as sorted id arrays and maps with ids in ascending order, so
rational-mode documents are byte-for-byte reproducible. Rational numbers are
written as ``"p/q"`` (or integer) strings, floats as shortest round-trip JSON
numbers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

import gmpy2

from .engine import MODES, POSITIVE, ExtensionResult, Term, as_arithmetic, partial_sums
from .separation import SeparatingSet
from .space import AmbientSpace, ClassLabel, SampledFunction, SubsetMask, ValidationError, build_space, to_exact

DEFAULTS = {"tolerance": Fraction(1, 10**6), "mode": "signed", "alpha": 1, "arithmetic": "float"}
OPTION_KEYS = tuple(DEFAULTS)


class InstanceError(ValidationError):
    """Validation failure tied to one field of a document."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ProblemInstance:
    space: AmbientSpace
    A: SubsetMask
    f: SampledFunction
    tolerance: Fraction
    mode: str
    alpha: ClassLabel
    arithmetic: str
    geometry: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        """Geometry, domain and values in exact canonical form."""
        return {
            **self.geometry,
            "domain_subset": self.A.sorted_ids(),
            "values": {str(a): fmt_exact(v) for a, v in self.f.values.items()},
        }


def fmt_exact(value) -> str:
    return str(to_exact(value))


def fmt_number(value, arithmetic: str):
    """Serialize one computed number for the given arithmetic."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if as_arithmetic(arithmetic).exact:
        if isinstance(value, float):
            return value
        return str(value)
    return float(value)


def parse_number(value, arithmetic: str):
    if as_arithmetic(arithmetic).exact:
        return gmpy2.mpq(to_exact(value))
    return float(to_exact(value)) if isinstance(value, str) else float(value)


def loads(text: str) -> dict:
    return json.loads(text, parse_float=Fraction)


def load_document(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = loads(fh.read())
        except json.JSONDecodeError as exc:
            raise InstanceError("document", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError("document", "top level must be an object")
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _parse_geometry(doc: dict):
    has_points = doc.get("points") is not None
    has_matrix = doc.get("distance_matrix") is not None
    if has_points == has_matrix:
        raise InstanceError("points", "give exactly one of 'points' or 'distance_matrix'")
    try:
        if has_points:
            metric = doc.get("metric", "euclidean")
            space = build_space(coords=doc["points"], metric=metric)
            geometry = {
                "points": [[fmt_exact(v) for v in p] for p in space.coords],
                "metric": metric,
            }
        else:
            space = build_space(matrix=doc["distance_matrix"])
            geometry = {"distance_matrix": [[fmt_exact(v) for v in row] for row in space.matrix]}
    except (ValidationError, TypeError) as exc:
        raise InstanceError("points" if has_points else "distance_matrix", str(exc)) from exc
    return space, geometry


def _parse_options(doc: dict, overrides: dict | None) -> dict:
    opts = dict(DEFAULTS)
    opts.update({k: doc[k] for k in OPTION_KEYS if doc.get(k) is not None})
    opts.update({k: v for k, v in (overrides or {}).items() if v is not None})

    try:
        tol = to_exact(opts["tolerance"])
    except ValidationError as exc:
        raise InstanceError("tolerance", str(exc)) from exc
    if tol <= 0:
        raise InstanceError("tolerance", f"must be positive, got {tol}")
    if opts["mode"] not in MODES:
        raise InstanceError("mode", f"expected one of {MODES}, got {opts['mode']!r}")
    try:
        alpha = ClassLabel(int(opts["alpha"]) if isinstance(opts["alpha"], str) else opts["alpha"])
    except (ValidationError, ValueError) as exc:
        raise InstanceError("alpha", str(exc)) from exc
    try:
        arithmetic = as_arithmetic(opts["arithmetic"]).name
    except ValidationError as exc:
        raise InstanceError("arithmetic", str(exc)) from exc
    return {"tolerance": tol, "mode": opts["mode"], "alpha": alpha, "arithmetic": arithmetic}


def parse_instance(doc: dict, overrides: dict | None = None) -> ProblemInstance:
    """Validate an instance document; ``overrides`` (CLI flags) beat file options."""
    space, geometry = _parse_geometry(doc)

    ids = doc.get("domain_subset")
    if not isinstance(ids, list) or not ids:
        raise InstanceError("domain_subset", "must be a nonempty list of point ids")
    if len(set(map(repr, ids))) != len(ids):
        raise InstanceError("domain_subset", "contains repeated ids")
    try:
        A = space.subset(ids)
    except ValidationError as exc:
        raise InstanceError("domain_subset", str(exc)) from exc

    raw = doc.get("values")
    if not isinstance(raw, dict):
        raise InstanceError("values", "must be an object mapping point ids to numbers")
    values = {}
    for key, v in raw.items():
        try:
            a = int(key)
        except ValueError as exc:
            raise InstanceError("values", f"key {key!r} is not a point id") from exc
        try:
            values[a] = to_exact(v)
        except ValidationError as exc:
            raise InstanceError("values", f"id {a}: {exc}") from exc
    try:
        f = SampledFunction(A, values)
    except ValidationError as exc:
        raise InstanceError("values", str(exc)) from exc

    opts = _parse_options(doc, overrides)
    if opts["mode"] == POSITIVE:
        negative = [a for a, v in f.values.items() if v < 0]
        if negative:
            raise InstanceError("values", f"positive mode needs f >= 0; id {negative[0]} has value {f[negative[0]]}")
    return ProblemInstance(space, A, f, geometry=geometry, **opts)


def load_instance(path, overrides: dict | None = None) -> ProblemInstance:
    return parse_instance(load_document(path), overrides)


# --- results ----------------------------------------------------------------


def result_to_doc(result: ExtensionResult, instance: ProblemInstance) -> dict:
    ar = result.arithmetic
    return {
        "c": fmt_number(result.c, ar),
        "mode": result.mode,
        "alpha": result.alpha.alpha,
        "arithmetic": ar,
        "tolerance": fmt_exact(instance.tolerance),
        "K": result.K,
        "error_bound": fmt_number(result.error_bound, ar),
        "terms": [
            {"n": t.n, "coefficient": fmt_number(t.coefficient, ar), "H": t.H.sorted_ids()}
            for t in result.terms
        ],
        "extended": {str(x): fmt_number(result.extended[x], ar) for x in sorted(result.extended)},
        "instance": instance.canonical(),
    }


def _need(doc: dict, key: str):
    if key not in doc:
        raise InstanceError(key, "missing from result document")
    return doc[key]


def result_from_doc(doc: dict, instance: ProblemInstance | None = None):
    """Rebuild ``(result, instance)``; the embedded instance is used when none is given."""
    embedded = _need(doc, "instance")
    overrides = {
        "tolerance": _need(doc, "tolerance"),
        "mode": _need(doc, "mode"),
        "alpha": _need(doc, "alpha"),
        "arithmetic": _need(doc, "arithmetic"),
    }
    own = parse_instance(embedded, overrides)
    if instance is None:
        instance = own
    else:
        if instance.canonical() != own.canonical():
            raise InstanceError("instance", "result was produced from a different instance")
        # run options come from the result, which may carry CLI overrides
        instance = replace(instance, tolerance=own.tolerance, mode=own.mode, alpha=own.alpha,
                           arithmetic=own.arithmetic)

    ar = instance.arithmetic
    space = instance.space
    terms = []
    for i, t in enumerate(_need(doc, "terms")):
        try:
            H = SeparatingSet(space.subset(t["H"]), instance.alpha)
            terms.append(Term(int(t["n"]), H, parse_number(t["coefficient"], ar)))
        except (KeyError, TypeError, ValidationError) as exc:
            raise InstanceError("terms", f"entry {i}: {exc}") from exc
    try:
        extended = {int(k): parse_number(v, ar) for k, v in _need(doc, "extended").items()}
        result = ExtensionResult(
            c=parse_number(_need(doc, "c"), ar),
            mode=instance.mode,
            terms=tuple(terms),
            K=int(_need(doc, "K")),
            error_bound=parse_number(_need(doc, "error_bound"), ar),
            extended=extended,
            alpha=instance.alpha,
            arithmetic=ar,
            space_size=space.size,
        )
    except (TypeError, ValueError) as exc:
        raise InstanceError("result", str(exc)) from exc
    return result, instance


# --- reports ----------------------------------------------------------------


def report_to_doc(report, arithmetic: str) -> dict:
    return {
        "checks": [
            {
                "name": ch.name,
                "pass": ch.passed,
                "applicable": ch.applicable,
                "slack": fmt_number(ch.slack, arithmetic),
                "measured": fmt_number(ch.measured, arithmetic),
                "witness": ch.witness,
            }
            for ch in report.checks
        ],
        "overall": report.overall,
    }


# --- plot table -------------------------------------------------------------


def plot_table(result: ExtensionResult, instance: ProblemInstance, delimiter: str = ",") -> str:
    """One row per point: id, coordinates, in_A, f (blank off A), extended, S_0..S_K."""
    space = instance.space
    if space.coords is None:
        raise InstanceError("points", "plot data needs coordinates; this space is given only as a distance matrix")
    dim = space.dimension
    if dim > 2:
        raise InstanceError("points", f"plot data supports 1-D or 2-D coordinates, got {dim}-D")
    axes = ["x", "y"][:dim]
    header = ["id", *axes, "in_A", "f", "extended"] + [f"S_{m}" for m in range(len(result.terms))]

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for x in space.points:
        in_a = x in instance.A
        row = [x, *(repr(float(c)) for c in space.coords[x]), int(in_a)]
        row.append(repr(float(instance.f[x])) if in_a else "")
        row.append(repr(float(result.extended[x])))
        row.extend(repr(float(s)) for s in partial_sums(result, x))
        writer.writerow(row)
    return buf.getvalue()
