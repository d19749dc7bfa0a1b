"""On-disk formats: graph documents, series CSV, edit logs, suggestions.

Graph documents are canonical JSON: keys sorted, floats in shortest
round-trip form, stable field order. Structurally equal graphs therefore
serialize to byte-identical documents, and a document's sha256 doubles as
a version fingerprint. Unknown top-level fields in a document survive a
load/save round trip untouched.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .functionals import (
    NAIVE_FUNCTIONALS,
    CategoricalTable,
    FunctionalSpec,
    Identity,
    LinearWindow,
    Mlp,
    NoiseSpec,
    Null,
    Threshold,
)
from .graph import (
    DscpGraph,
    GraphError,
    LagEdge,
    PartitionGroup,
    Provenance,
    VariableSpec,
)
from .simulation import (
    DoClamp,
    InterventionSpec,
    RunMeta,
    SeriesFrame,
    ShiftNoise,
)

__all__ = [
    "FormatError",
    "FORMAT_VERSION",
    "canonical_json_bytes",
    "sha256_hex",
    "to_document",
    "from_document",
    "save_graph",
    "load_graph",
    "graph_hash",
    "export_csv",
    "import_csv",
    "series_meta",
    "save_series",
    "load_series",
    "EditEvent",
    "apply_edit",
    "replay",
    "read_log",
    "append_event",
    "Suggestion",
    "SuggestionSet",
    "import_discovery",
    "save_suggestions",
    "load_suggestions",
]

FORMAT_VERSION = "1"

_CORE_KEYS = {"format_version", "variables", "edges", "partitions", "functionals", "noise"}


class FormatError(ValueError):
    """A document, CSV, log line, or suggestion file failed to parse."""


def canonical_json_bytes(obj) -> bytes:
    """Sorted keys, two-space indent, shortest round-trip numbers, one trailing newline."""
    return (
        json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
        + "\n"
    ).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# -- field helpers ---------------------------------------------------------


def _need(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping):
        raise FormatError(f"{where}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise FormatError(f"{where}: expected a string, got {value!r}")
    return value


# -- functional and noise specs -------------------------------------------


def functional_to_obj(spec: FunctionalSpec) -> dict:
    if isinstance(spec, Identity):
        return {"kind": "identity"}
    if isinstance(spec, Null):
        return {"kind": "null"}
    if isinstance(spec, LinearWindow):
        return {
            "kind": "linear_window",
            "coeffs": [list(row) for row in spec.coeffs],
            "intercept": spec.intercept,
        }
    if isinstance(spec, Threshold):
        return {"kind": "threshold", "cut": spec.cut, "low": spec.low, "high": spec.high}
    if isinstance(spec, CategoricalTable):
        entries = [
            {"codes": list(codes), "value": value}
            for codes, value in sorted(spec.entries.items())
        ]
        return {"kind": "categorical_table", "entries": entries, "default": spec.default}
    if isinstance(spec, Mlp):
        return {
            "kind": "mlp",
            "w1": [list(row) for row in spec.w1],
            "b1": list(spec.b1),
            "w2": list(spec.w2),
            "b2": spec.b2,
        }
    raise FormatError(f"unknown functional type {type(spec).__name__}")


def obj_to_functional(obj: Mapping, where: str) -> FunctionalSpec:
    kind = _as_str(_need(obj, "kind", where), f"{where}.kind")
    try:
        if kind == "identity":
            return Identity()
        if kind == "null":
            return Null()
        if kind == "linear_window":
            coeffs = _need(obj, "coeffs", where)
            return LinearWindow(
                coeffs=tuple(tuple(row) for row in coeffs),
                intercept=obj.get("intercept", 0.0),
            )
        if kind == "threshold":
            return Threshold(
                cut=_as_float(_need(obj, "cut", where), f"{where}.cut"),
                low=obj.get("low", 0.0),
                high=obj.get("high", 1.0),
            )
        if kind == "categorical_table":
            entries = {}
            for i, entry in enumerate(_need(obj, "entries", where)):
                codes = tuple(
                    _as_int(c, f"{where}.entries[{i}].codes") for c in _need(entry, "codes", f"{where}.entries[{i}]")
                )
                entries[codes] = _as_float(
                    _need(entry, "value", f"{where}.entries[{i}]"), f"{where}.entries[{i}].value"
                )
            return CategoricalTable(entries=entries, default=obj.get("default"))
        if kind == "mlp":
            return Mlp(
                w1=tuple(tuple(row) for row in _need(obj, "w1", where)),
                b1=tuple(_need(obj, "b1", where)),
                w2=tuple(_need(obj, "w2", where)),
                b2=obj.get("b2", 0.0),
            )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{where}: {exc}") from exc
    raise FormatError(f"{where}.kind: unknown functional kind {kind!r}")


def noise_to_obj(spec: NoiseSpec) -> dict:
    if spec.kind == "gaussian":
        return {"kind": "gaussian", "mean": spec.mean, "std": spec.std}
    if spec.kind == "uniform":
        return {"kind": "uniform", "low": spec.low, "high": spec.high}
    return {"kind": "none"}


def obj_to_noise(obj: Mapping, where: str) -> NoiseSpec:
    kind = _as_str(_need(obj, "kind", where), f"{where}.kind")
    try:
        if kind == "none":
            return NoiseSpec.none()
        if kind == "gaussian":
            return NoiseSpec.gaussian(
                _as_float(_need(obj, "mean", where), f"{where}.mean"),
                _as_float(_need(obj, "std", where), f"{where}.std"),
            )
        if kind == "uniform":
            return NoiseSpec.uniform(
                _as_float(_need(obj, "low", where), f"{where}.low"),
                _as_float(_need(obj, "high", where), f"{where}.high"),
            )
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{where}: {exc}") from exc
    raise FormatError(f"{where}.kind: unknown noise kind {kind!r}")


# -- graph documents --------------------------------------------------------


def _variable_to_obj(v: VariableSpec) -> dict:
    return {
        "id": v.id,
        "name": v.name,
        "kind": v.kind,
        "categories": list(v.categories),
        "min": v.min,
        "max": v.max,
        "offset": v.offset,
        "memo": v.memo,
        "aggregation": v.aggregation,
        "latent": v.latent,
    }


def _obj_to_variable(obj: Mapping, where: str) -> VariableSpec:
    # id is absent in add_variable event payloads: the graph assigns it
    categories = tuple(
        _as_str(c, f"{where}.categories") for c in obj.get("categories", ())
    )
    # a categorical domain is its code range, not the unit interval
    default_max = float(len(categories) - 1) if categories else 1.0
    try:
        return VariableSpec(
            id=_as_int(obj["id"], f"{where}.id") if "id" in obj else None,
            name=_as_str(_need(obj, "name", where), f"{where}.name"),
            kind=_as_str(_need(obj, "kind", where), f"{where}.kind"),
            categories=categories,
            min=_as_float(obj.get("min", 0.0), f"{where}.min"),
            max=_as_float(obj.get("max", default_max), f"{where}.max"),
            offset=_as_float(obj.get("offset", 0.0), f"{where}.offset"),
            memo=_as_str(obj.get("memo", ""), f"{where}.memo"),
            aggregation=_as_str(obj.get("aggregation", "sum"), f"{where}.aggregation"),
            latent=bool(obj.get("latent", False)),
        )
    except GraphError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def _provenance_to_obj(p: Provenance) -> dict:
    return {"kind": p.kind, "name": p.name}


def _obj_to_provenance(obj: Mapping, where: str) -> Provenance:
    try:
        return Provenance(
            kind=_as_str(_need(obj, "kind", where), f"{where}.kind"),
            name=_as_str(_need(obj, "name", where), f"{where}.name"),
        )
    except GraphError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def to_document(graph: DscpGraph) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "variables": [_variable_to_obj(v) for v in graph.variables],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "lag": e.lag,
                "functional": e.functional,
                "provenance": _provenance_to_obj(e.provenance),
            }
            for e in graph.edges
        ],
        "partitions": {
            str(t): [
                {"parents": [list(p) for p in g.parents], "functional": g.functional}
                for g in groups
            ]
            for t, groups in graph.partitions.items()
        },
        "functionals": {
            fid: functional_to_obj(spec) for fid, spec in graph.functionals.items()
        },
        "noise": {str(v): noise_to_obj(s) for v, s in graph.noise.items()},
    }
    for key, value in graph.extra.items():
        if key not in _CORE_KEYS:
            doc[key] = value
    return doc


def from_document(doc: Mapping, validate: bool = True) -> DscpGraph:
    if not isinstance(doc, Mapping):
        raise FormatError(f"document: expected an object, got {type(doc).__name__}")
    version = doc.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"format_version: {version!r} not supported (this build reads {FORMAT_VERSION!r})")

    variables = tuple(
        _obj_to_variable(obj, f"variables[{i}]")
        for i, obj in enumerate(doc.get("variables", ()))
    )
    edges = []
    for i, obj in enumerate(doc.get("edges", ())):
        where = f"edges[{i}]"
        try:
            edges.append(
                LagEdge(
                    source=_as_int(_need(obj, "source", where), f"{where}.source"),
                    target=_as_int(_need(obj, "target", where), f"{where}.target"),
                    lag=_as_int(_need(obj, "lag", where), f"{where}.lag"),
                    functional=_as_str(obj.get("functional", "identity"), f"{where}.functional"),
                    provenance=_obj_to_provenance(
                        obj.get("provenance", {"kind": "expert", "name": "user"}),
                        f"{where}.provenance",
                    ),
                )
            )
        except GraphError as exc:
            raise FormatError(f"{where}: {exc}") from exc

    partitions: dict[int, tuple[PartitionGroup, ...]] = {}
    for key, group_objs in doc.get("partitions", {}).items():
        where = f"partitions[{key}]"
        try:
            target = int(key)
        except ValueError:
            raise FormatError(f"{where}: key is not a variable id") from None
        groups = []
        for gi, gobj in enumerate(group_objs):
            gwhere = f"{where}.groups[{gi}]"
            try:
                parents = tuple(
                    (
                        _as_int(p[0], f"{gwhere}.parents"),
                        _as_int(p[1], f"{gwhere}.parents"),
                    )
                    for p in _need(gobj, "parents", gwhere)
                )
                groups.append(
                    PartitionGroup(
                        parents=parents,
                        functional=_as_str(gobj.get("functional", "identity"), f"{gwhere}.functional"),
                    )
                )
            except (GraphError, TypeError, IndexError) as exc:
                raise FormatError(f"{gwhere}: {exc}") from exc
        partitions[target] = tuple(groups)

    functionals = {
        _as_str(fid, "functionals"): obj_to_functional(obj, f"functionals[{fid!r}]")
        for fid, obj in doc.get("functionals", {}).items()
    }
    noise = {}
    for key, obj in doc.get("noise", {}).items():
        where = f"noise[{key}]"
        try:
            var_id = int(key)
        except ValueError:
            raise FormatError(f"{where}: key is not a variable id") from None
        noise[var_id] = obj_to_noise(obj, where)

    extra = {k: v for k, v in doc.items() if k not in _CORE_KEYS}
    graph = DscpGraph(
        variables=variables,
        edges=tuple(edges),
        partitions=partitions,
        functionals=functionals,
        noise=noise,
        extra=extra,
    )
    if validate:
        report = graph.validate()
        if not report.ok:
            raise FormatError(f"document is not a valid graph: {report}")
    return graph


def save_graph(graph: DscpGraph, path: str | Path | None = None) -> bytes:
    data = canonical_json_bytes(to_document(graph))
    if path is not None:
        Path(path).write_bytes(data)
    return data


def load_graph(source: str | Path | bytes, validate: bool = True) -> DscpGraph:
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".json")):
        text = Path(source).read_text("utf-8")
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"document is not JSON: {exc}") from exc
    return from_document(doc, validate=validate)


def graph_hash(graph: DscpGraph) -> str:
    return sha256_hex(save_graph(graph))


# -- series CSV + sidecar ----------------------------------------------------


def _format_cell(var: VariableSpec, value) -> str:
    if var.kind == "continuous":
        return repr(float(value))
    code = int(value)
    if var.kind == "binary":
        return str(code)
    try:
        return var.categories[code]
    except IndexError:
        raise FormatError(
            f"column {var.name!r}: code {code} outside 0..{len(var.categories) - 1}"
        ) from None


def export_csv(frame: SeriesFrame) -> bytes:
    """One header row of variable names in id order, then one row per step.

    Continuous cells use shortest round-trip decimals, binary cells are
    0/1, categorical cells carry the label string.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(frame.names)
    cols = [frame.columns[name] for name in frame.names]
    for t in range(frame.length):
        writer.writerow(
            _format_cell(var, col[t]) for var, col in zip(frame.variables, cols)
        )
    return buf.getvalue().encode("utf-8")


def _intervention_to_obj(iv: InterventionSpec) -> dict:
    if isinstance(iv, DoClamp):
        return {
            "kind": "do_clamp",
            "variable": iv.variable,
            "value": iv.value,
            "t_start": iv.t_start,
            "t_end": iv.t_end,
        }
    return {
        "kind": "shift_noise",
        "variable": iv.variable,
        "noise": noise_to_obj(iv.noise),
        "t_start": iv.t_start,
        "t_end": iv.t_end,
    }


def _obj_to_intervention(obj: Mapping, where: str) -> InterventionSpec:
    kind = _as_str(_need(obj, "kind", where), f"{where}.kind")
    variable = _as_str(_need(obj, "variable", where), f"{where}.variable")
    t_start = _as_int(_need(obj, "t_start", where), f"{where}.t_start")
    t_end = _as_int(_need(obj, "t_end", where), f"{where}.t_end")
    if kind == "do_clamp":
        return DoClamp(variable=variable, value=_need(obj, "value", where), t_start=t_start, t_end=t_end)
    if kind == "shift_noise":
        return ShiftNoise(
            variable=variable,
            noise=obj_to_noise(_need(obj, "noise", where), f"{where}.noise"),
            t_start=t_start,
            t_end=t_end,
        )
    raise FormatError(f"{where}.kind: unknown intervention kind {kind!r}")


def series_meta(frame: SeriesFrame) -> dict:
    obj = {
        "variables": [
            {
                "id": v.id,
                "name": v.name,
                "kind": v.kind,
                "categories": list(v.categories),
            }
            for v in frame.variables
        ],
        "length": frame.length,
    }
    if frame.meta is not None:
        m = frame.meta
        obj["run"] = {
            "seed": m.seed,
            "graph_hash": m.graph_hash,
            "burn_in": m.burn_in,
            "length": m.length,
            "init": m.init,
            "record_latent": m.record_latent,
            "interventions": [_intervention_to_obj(iv) for iv in m.interventions],
            "rng_state": {name: state for name, state in m.rng_state.items()},
        }
    return obj


def import_csv(
    data: bytes | str,
    variables: Sequence[VariableSpec] | None = None,
    meta: Mapping | None = None,
) -> SeriesFrame:
    """Parse a series CSV back into a typed frame.

    Column types come from ``variables``, else from a sidecar ``meta``
    object, else every column is read as continuous (good enough for
    external recordings used as init segments).
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("csv: empty input")
    header = rows[0]
    if len(set(header)) != len(header):
        raise FormatError(f"csv header: duplicate column names in {header}")

    if variables is None and meta is not None:
        variables = [
            VariableSpec(
                id=obj.get("id", i),
                name=_as_str(_need(obj, "name", f"meta.variables[{i}]"), "name"),
                kind=_as_str(obj.get("kind", "continuous"), "kind"),
                categories=tuple(obj.get("categories", ())),
                min=float("-inf"),
                max=float("inf"),
            )
            for i, obj in enumerate(meta["variables"])
        ]
    if variables is None:
        variables = [
            VariableSpec(id=i, name=name, kind="continuous", min=float("-inf"), max=float("inf"))
            for i, name in enumerate(header)
        ]

    by_name = {v.name: v for v in variables}
    missing = [name for name in header if name not in by_name]
    if missing:
        raise FormatError(f"csv header: no schema for column(s) {missing}")
    ordered = [by_name[name] for name in header]

    columns: dict[str, list] = {name: [] for name in header}
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise FormatError(f"csv row {r}: {len(row)} cells, expected {len(header)}")
        for var, cell in zip(ordered, row):
            where = f"csv row {r}, column {var.name!r}"
            if var.kind == "continuous":
                try:
                    columns[var.name].append(float(cell))
                except ValueError:
                    raise FormatError(f"{where}: {cell!r} is not a number") from None
            elif var.kind == "binary":
                if cell not in ("0", "1"):
                    raise FormatError(f"{where}: {cell!r} is not 0 or 1")
                columns[var.name].append(int(cell))
            else:
                if cell not in var.categories:
                    raise FormatError(
                        f"{where}: label {cell!r} not in categories {list(var.categories)}"
                    )
                columns[var.name].append(var.categories.index(cell))

    arrays = {
        name: np.asarray(vals, dtype=float if by_name[name].kind == "continuous" else np.int64)
        for name, vals in columns.items()
    }

    run_meta = None
    if meta is not None and "run" in meta:
        run = meta["run"]
        run_meta = RunMeta(
            seed=_as_int(_need(run, "seed", "meta.run"), "meta.run.seed"),
            graph_hash=_as_str(_need(run, "graph_hash", "meta.run"), "meta.run.graph_hash"),
            burn_in=_as_int(run.get("burn_in", 0), "meta.run.burn_in"),
            length=_as_int(run.get("length", len(rows) - 1), "meta.run.length"),
            init=_as_str(run.get("init", "offsets"), "meta.run.init"),
            interventions=tuple(
                _obj_to_intervention(obj, f"meta.run.interventions[{i}]")
                for i, obj in enumerate(run.get("interventions", ()))
            ),
            record_latent=bool(run.get("record_latent", False)),
            rng_state=dict(run.get("rng_state", {})),
        )
    return SeriesFrame(variables=tuple(ordered), columns=arrays, meta=run_meta)


def save_series(frame: SeriesFrame, base: str | Path) -> tuple[Path, Path]:
    """Write ``<base>.series.csv`` and ``<base>.series.meta.json``."""
    base = Path(base)
    csv_path = base.with_name(base.name + ".series.csv")
    meta_path = base.with_name(base.name + ".series.meta.json")
    csv_path.write_bytes(export_csv(frame))
    meta_path.write_bytes(canonical_json_bytes(series_meta(frame)))
    return csv_path, meta_path


def load_series(csv_path: str | Path) -> SeriesFrame:
    """Read a series CSV, using its sidecar meta file when present."""
    csv_path = Path(csv_path)
    meta = None
    meta_path = csv_path.with_name(csv_path.name.replace(".series.csv", ".series.meta.json"))
    if meta_path != csv_path and meta_path.exists():
        meta = json.loads(meta_path.read_text("utf-8"))
    return import_csv(csv_path.read_bytes(), meta=meta)


# -- edit log ----------------------------------------------------------------

EDIT_ACTIONS = (
    "create_graph",
    "add_variable",
    "update_variable",
    "remove_variable",
    "add_edge",
    "update_edge",
    "remove_edge",
    "set_partition",
    "reset_partition",
    "set_functional",
    "remove_functional",
    "set_noise",
    "accept_suggestion",
)


@dataclass(frozen=True)
class EditEvent:
    """One applied mutation: who did what, in order."""

    seq: int
    actor: Provenance
    action: str
    payload: dict = field(default_factory=dict)
    timestamp: str | None = None

    def __post_init__(self) -> None:
        if self.action not in EDIT_ACTIONS:
            raise FormatError(f"unknown edit action {self.action!r}")
        if self.seq < 1:
            raise FormatError(f"event seq must be >= 1, got {self.seq}")


def event_to_obj(event: EditEvent) -> dict:
    obj = {
        "seq": event.seq,
        "actor": _provenance_to_obj(event.actor),
        "action": event.action,
        "payload": event.payload,
    }
    if event.timestamp is not None:
        obj["timestamp"] = event.timestamp
    return obj


def obj_to_event(obj: Mapping, where: str = "event") -> EditEvent:
    return EditEvent(
        seq=_as_int(_need(obj, "seq", where), f"{where}.seq"),
        actor=_obj_to_provenance(_need(obj, "actor", where), f"{where}.actor"),
        action=_as_str(_need(obj, "action", where), f"{where}.action"),
        payload=dict(obj.get("payload", {})),
        timestamp=obj.get("timestamp"),
    )


def apply_edit(graph: DscpGraph, event: EditEvent) -> DscpGraph:
    """Fold one event into a graph; the result is validated like any edit."""
    p = event.payload
    action = event.action
    where = f"event {event.seq} ({action})"
    try:
        if action == "create_graph":
            return from_document(_need(p, "document", where))
        if action == "add_variable":
            return graph.add_variable(_obj_to_variable(_need(p, "spec", where), f"{where}.spec"))
        if action == "update_variable":
            changes = dict(_need(p, "changes", where))
            if "categories" in changes:
                changes["categories"] = tuple(changes["categories"])
            return graph.update_variable(_as_int(_need(p, "id", where), f"{where}.id"), **changes)
        if action == "remove_variable":
            return graph.remove_variable(_as_int(_need(p, "id", where), f"{where}.id"))
        if action == "add_edge":
            return graph.add_edge(
                source=_as_int(_need(p, "source", where), f"{where}.source"),
                target=_as_int(_need(p, "target", where), f"{where}.target"),
                lag=_as_int(_need(p, "lag", where), f"{where}.lag"),
                functional=p.get("functional", "identity"),
                provenance=_obj_to_provenance(
                    p.get("provenance", _provenance_to_obj(event.actor)), f"{where}.provenance"
                ),
            )
        if action == "update_edge":
            return graph.update_edge(
                source=_as_int(_need(p, "source", where), f"{where}.source"),
                target=_as_int(_need(p, "target", where), f"{where}.target"),
                lag=_as_int(_need(p, "lag", where), f"{where}.lag"),
                functional=p.get("functional"),
                provenance=(
                    _obj_to_provenance(p["provenance"], f"{where}.provenance")
                    if "provenance" in p
                    else None
                ),
            )
        if action == "remove_edge":
            return graph.remove_edge(
                source=_as_int(_need(p, "source", where), f"{where}.source"),
                target=_as_int(_need(p, "target", where), f"{where}.target"),
                lag=_as_int(_need(p, "lag", where), f"{where}.lag"),
            )
        if action == "set_partition":
            target = _as_int(_need(p, "target", where), f"{where}.target")
            groups = [
                PartitionGroup(
                    parents=tuple((int(s), int(l)) for s, l in _need(g, "parents", where)),
                    functional=g.get("functional", "identity"),
                )
                for g in _need(p, "groups", where)
            ]
            return graph.set_partition(target, groups)
        if action == "reset_partition":
            return graph.reset_partition(_as_int(_need(p, "target", where), f"{where}.target"))
        if action == "set_functional":
            return graph.set_functional(
                _as_str(_need(p, "id", where), f"{where}.id"),
                obj_to_functional(_need(p, "spec", where), f"{where}.spec"),
            )
        if action == "remove_functional":
            return graph.remove_functional(_as_str(_need(p, "id", where), f"{where}.id"))
        if action == "set_noise":
            return graph.set_noise(
                _as_int(_need(p, "id", where), f"{where}.id"),
                obj_to_noise(_need(p, "noise", where), f"{where}.noise"),
            )
        if action == "accept_suggestion":
            algorithm = _as_str(_need(p, "algorithm", where), f"{where}.algorithm")
            return graph.add_edge(
                source=_as_int(_need(p, "source", where), f"{where}.source"),
                target=_as_int(_need(p, "target", where), f"{where}.target"),
                lag=_as_int(_need(p, "lag", where), f"{where}.lag"),
                functional=p.get("functional", "identity"),
                provenance=Provenance.algorithm(algorithm),
            )
    except (GraphError, FormatError) as exc:
        msg = str(exc)
        if not msg.startswith(where):
            msg = f"{where}: {msg}"
        raise GraphError(msg) from exc
    raise FormatError(f"{where}: unhandled action")


def replay(events: Iterable[EditEvent], base: DscpGraph | None = None) -> DscpGraph:
    """Fold an ordered event list into the graph it describes."""
    graph = DscpGraph.empty() if base is None else base
    last_seq = 0
    for event in events:
        if event.seq != last_seq + 1:
            raise FormatError(
                f"event log: seq {event.seq} after {last_seq}; log must be gapless and ordered"
            )
        last_seq = event.seq
        graph = apply_edit(graph, event)
    return graph


def read_log(path: str | Path) -> list[EditEvent]:
    events = []
    for i, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{i}: not JSON: {exc}") from exc
        events.append(obj_to_event(obj, where=f"{path}:{i}"))
    return events


def append_event(path: str | Path, event: EditEvent) -> None:
    """Append one event to a JSONL log, enforcing the monotone seq rule."""
    path = Path(path)
    last = 0
    if path.exists():
        lines = [l for l in path.read_text("utf-8").splitlines() if l.strip()]
        if lines:
            last = _as_int(json.loads(lines[-1]).get("seq", 0), "log tail seq")
    if event.seq != last + 1:
        raise FormatError(f"append: event seq {event.seq} does not follow {last}")
    line = json.dumps(event_to_obj(event), sort_keys=True, ensure_ascii=False, allow_nan=False)
    with path.open("a", encoding="utf-8") as fh:
        fh.write(line + "\n")


# -- discovery suggestions ----------------------------------------------------

SUGGESTION_STATUS = ("pending", "accepted", "rejected")


@dataclass(frozen=True)
class Suggestion:
    """One proposed lagged edge from a discovery algorithm."""

    id: str
    source: str
    target: str
    lag: int
    score: float | None = None
    status: str = "pending"

    def __post_init__(self) -> None:
        if self.status not in SUGGESTION_STATUS:
            raise FormatError(f"suggestion {self.id}: unknown status {self.status!r}")
        if self.lag < 0:
            raise FormatError(f"suggestion {self.id}: negative lag {self.lag}")


@dataclass(frozen=True)
class SuggestionSet:
    algorithm: str
    suggestions: tuple[Suggestion, ...] = ()

    def get(self, suggestion_id: str) -> Suggestion:
        for s in self.suggestions:
            if s.id == suggestion_id:
                return s
        raise FormatError(f"no suggestion with id {suggestion_id!r}")

    def with_status(self, suggestion_id: str, status: str) -> "SuggestionSet":
        found = False
        out = []
        for s in self.suggestions:
            if s.id == suggestion_id:
                if s.status != "pending":
                    raise FormatError(
                        f"suggestion {suggestion_id!r} already {s.status}; terminal states are final"
                    )
                out.append(Suggestion(s.id, s.source, s.target, s.lag, s.score, status))
                found = True
            else:
                out.append(s)
        if not found:
            raise FormatError(f"no suggestion with id {suggestion_id!r}")
        return SuggestionSet(algorithm=self.algorithm, suggestions=tuple(out))


def import_discovery(
    source, fmt: str = "edge-list", algorithm: str | None = None
) -> SuggestionSet:
    """Turn a discovery algorithm's output into pending suggestions.

    ``edge-list`` expects {"algorithm"?, "edges": [{source, target, lag,
    score?}]} with variable names. ``lag-matrix`` expects {"variables":
    [names], "matrix": M} where M[i][j][tau] != 0 proposes i -> j at lag
    tau with the absolute value as score.
    """
    if isinstance(source, (bytes, str)) and not isinstance(source, Mapping):
        try:
            obj = json.loads(source if isinstance(source, str) else source.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"discovery import: not JSON: {exc}") from exc
    else:
        obj = source
    if not isinstance(obj, Mapping):
        raise FormatError("discovery import: expected a JSON object")

    name = algorithm or obj.get("algorithm")
    if not name:
        raise FormatError("discovery import: no algorithm name given or present in file")

    suggestions: list[Suggestion] = []
    if fmt == "edge-list":
        for i, e in enumerate(_need(obj, "edges", "discovery")):
            where = f"edges[{i}]"
            score = e.get("score")
            suggestions.append(
                Suggestion(
                    id=f"s{i}",
                    source=_as_str(_need(e, "source", where), f"{where}.source"),
                    target=_as_str(_need(e, "target", where), f"{where}.target"),
                    lag=_as_int(_need(e, "lag", where), f"{where}.lag"),
                    score=None if score is None else _as_float(score, f"{where}.score"),
                )
            )
    elif fmt == "lag-matrix":
        names = [_as_str(n, "variables") for n in _need(obj, "variables", "discovery")]
        matrix = _need(obj, "matrix", "discovery")
        if len(matrix) != len(names):
            raise FormatError(
                f"lag-matrix: {len(matrix)} rows for {len(names)} variables"
            )
        k = 0
        for i, row in enumerate(matrix):
            if len(row) != len(names):
                raise FormatError(f"lag-matrix row {i}: {len(row)} cells, expected {len(names)}")
            for j, lags in enumerate(row):
                for tau, value in enumerate(lags):
                    v = _as_float(value, f"matrix[{i}][{j}][{tau}]")
                    if v != 0.0:
                        suggestions.append(
                            Suggestion(
                                id=f"s{k}",
                                source=names[i],
                                target=names[j],
                                lag=tau,
                                score=abs(v),
                            )
                        )
                        k += 1
    else:
        raise FormatError(f"discovery import: unknown format {fmt!r}")
    return SuggestionSet(algorithm=name, suggestions=tuple(suggestions))


def suggestions_to_obj(sset: SuggestionSet) -> dict:
    return {
        "algorithm": sset.algorithm,
        "suggestions": [
            {
                "id": s.id,
                "source": s.source,
                "target": s.target,
                "lag": s.lag,
                "score": s.score,
                "status": s.status,
            }
            for s in sset.suggestions
        ],
    }


def save_suggestions(sset: SuggestionSet, path: str | Path) -> None:
    Path(path).write_bytes(canonical_json_bytes(suggestions_to_obj(sset)))


def load_suggestions(path: str | Path) -> SuggestionSet:
    obj = json.loads(Path(path).read_text("utf-8"))
    return SuggestionSet(
        algorithm=_as_str(_need(obj, "algorithm", "suggestions"), "suggestions.algorithm"),
        suggestions=tuple(
            Suggestion(
                id=_as_str(_need(s, "id", f"suggestions[{i}]"), "id"),
                source=_as_str(_need(s, "source", f"suggestions[{i}]"), "source"),
                target=_as_str(_need(s, "target", f"suggestions[{i}]"), "target"),
                lag=_as_int(_need(s, "lag", f"suggestions[{i}]"), "lag"),
                score=s.get("score"),
                status=s.get("status", "pending"),
            )
            for i, s in enumerate(obj.get("suggestions", ()))
        ),
    )
