"""HTTP service for collaborative graph editing and simulation.

Every graph lives behind an append-only edit log; the server is the
single writer. Mutations go through PATCH with the client's
``base_version`` and conflict with 409 when someone else got there first,
so clients can refetch, merge, and retry. Logs and document snapshots
persist under the data directory (``KARMATS_DATA_DIR``) and are replayed
on startup.
"""

from __future__ import annotations

import os
import tempfile
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import formats, metrics
from .graph import DscpGraph, GraphError, Provenance
from .simulation import SeriesFrame, SimulationConfig, SimulationError, simulate

__all__ = ["create_app", "GraphStore"]

DEFAULT_MAX_LENGTH = 200_000


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunRecord:
    run_id: str
    graph_id: str
    status: str = "running"  # running | done | failed
    error: str | None = None
    frame: "SeriesFrame | None" = None


@dataclass
class GraphSession:
    graph_id: str
    graph: DscpGraph
    events: list[formats.EditEvent] = field(default_factory=list)
    suggestions: dict[str, formats.SuggestionSet] = field(default_factory=dict)
    run_cache: dict[str, str] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def version(self) -> int:
        return len(self.events)


class GraphStore:
    """All sessions plus the shared run registry, file-backed per graph."""

    def __init__(self, data_dir: str | Path | None = None, max_length: int = DEFAULT_MAX_LENGTH):
        if data_dir is None:
            data_dir = os.environ.get("KARMATS_DATA_DIR")
        if data_dir is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="karmats-")
            data_dir = self._tmp.name
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.max_length = max_length
        self.sessions: dict[str, GraphSession] = {}
        self.runs: dict[str, RunRecord] = {}
        self._lock = threading.Lock()
        self._next_id = 0
        self._restore()

    def _restore(self) -> None:
        for log_path in sorted(self.data_dir.glob("*.editlog.jsonl")):
            graph_id = log_path.name.replace(".editlog.jsonl", "")
            events = formats.read_log(log_path)
            graph = formats.replay(events)
            self.sessions[graph_id] = GraphSession(graph_id=graph_id, graph=graph, events=events)
            if graph_id.startswith("g") and graph_id[1:].isdigit():
                self._next_id = max(self._next_id, int(graph_id[1:]) + 1)

    def new_session(self) -> GraphSession:
        with self._lock:
            graph_id = f"g{self._next_id}"
            self._next_id += 1
            session = GraphSession(graph_id=graph_id, graph=DscpGraph.empty())
            self.sessions[graph_id] = session
            return session

    def session(self, graph_id: str) -> GraphSession | None:
        return self.sessions.get(graph_id)

    def log_path(self, graph_id: str) -> Path:
        return self.data_dir / f"{graph_id}.editlog.jsonl"

    def commit(self, session: GraphSession, event: formats.EditEvent, graph: DscpGraph) -> None:
        """Append the event and persist log plus snapshot. Caller holds the lock."""
        formats.append_event(self.log_path(session.graph_id), event)
        session.events.append(event)
        session.graph = graph
        formats.save_graph(graph, self.data_dir / f"{session.graph_id}.dscp.json")


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, **extra})


def _actor_from(obj) -> Provenance:
    if not obj:
        return Provenance.expert("editor")
    return Provenance(kind=obj.get("kind", "expert"), name=obj.get("name", "editor"))


def _graph_body(session: GraphSession) -> dict:
    return {
        "id": session.graph_id,
        "version": session.version,
        "document": formats.to_document(session.graph),
    }


def _config_from_payload(payload: dict, max_length: int) -> SimulationConfig:
    length = payload.get("length")
    if not isinstance(length, int) or isinstance(length, bool):
        raise SimulationError(f"length must be an integer, got {length!r}")
    if length > max_length:
        raise _LengthLimit(length, max_length)
    interventions = tuple(
        formats._obj_to_intervention(obj, f"interventions[{i}]")
        for i, obj in enumerate(payload.get("interventions", ()))
    )
    return SimulationConfig(
        length=length,
        seed=payload.get("seed", 0),
        burn_in=payload.get("burn_in"),
        record_latent=bool(payload.get("record_latent", False)),
        interventions=interventions,
    )


class _LengthLimit(Exception):
    def __init__(self, length: int, max_length: int):
        super().__init__(f"length {length} above server limit {max_length}")


def create_app(data_dir: str | Path | None = None, max_length: int = DEFAULT_MAX_LENGTH) -> FastAPI:
    app = FastAPI(title="karmats", version="0.1.0")
    # The browser editor may be served from a different origin than the API.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = GraphStore(data_dir=data_dir, max_length=max_length)
    app.state.store = store

    @app.exception_handler(GraphError)
    async def _graph_error(request: Request, exc: GraphError):
        return _error(400, str(exc))

    @app.exception_handler(SimulationError)
    async def _sim_error(request: Request, exc: SimulationError):
        return _error(400, str(exc))

    @app.exception_handler(formats.FormatError)
    async def _format_error(request: Request, exc: formats.FormatError):
        return _error(400, str(exc))

    @app.exception_handler(_LengthLimit)
    async def _limit_error(request: Request, exc: _LengthLimit):
        return _error(422, str(exc))

    # -- graphs ------------------------------------------------------------

    @app.get("/graphs")
    def list_graphs():
        out = []
        for graph_id in sorted(store.sessions):
            session = store.sessions[graph_id]
            meta = session.graph.extra.get("metadata", {})
            title = meta.get("title") if isinstance(meta, dict) else None
            out.append(
                {
                    "id": graph_id,
                    "version": session.version,
                    "title": title,
                    "variables": session.graph.n,
                    "edges": len(session.graph.edges),
                }
            )
        return {"graphs": out}

    @app.post("/graphs", status_code=201)
    def create_graph(payload: dict | None = Body(None)):
        # parse before allocating so a bad document leaves no orphan session
        graph = None
        if payload and payload.get("document"):
            graph = formats.from_document(payload["document"])
        session = store.new_session()
        with session.lock:
            if graph is not None:
                event = formats.EditEvent(
                    seq=1,
                    actor=_actor_from(payload.get("actor")),
                    action="create_graph",
                    payload={"document": formats.to_document(graph)},
                    timestamp=_now(),
                )
                store.commit(session, event, graph)
            return _graph_body(session)

    @app.get("/graphs/{graph_id}")
    def get_graph(graph_id: str):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        return _graph_body(session)

    @app.patch("/graphs/{graph_id}")
    def patch_graph(graph_id: str, payload: dict = Body(...)):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        if "base_version" not in payload:
            return _error(400, "PATCH needs base_version")
        event_obj = payload.get("event")
        if not isinstance(event_obj, dict):
            return _error(400, "PATCH needs an event object")
        with session.lock:
            base = payload["base_version"]
            if base != session.version:
                return _error(
                    409,
                    f"base_version {base} is stale; current version is {session.version}",
                    current_version=session.version,
                )
            event = formats.EditEvent(
                seq=session.version + 1,
                actor=_actor_from(event_obj.get("actor")),
                action=event_obj.get("action", ""),
                payload=event_obj.get("payload", {}),
                timestamp=_now(),
            )
            graph = formats.apply_edit(session.graph, event)
            store.commit(session, event, graph)
            return _graph_body(session)

    @app.get("/graphs/{graph_id}/log")
    def get_log(graph_id: str, since: int = 0):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        events = [formats.event_to_obj(e) for e in session.events if e.seq > since]
        return {"id": graph_id, "version": session.version, "events": events}

    # -- suggestions ---------------------------------------------------------

    @app.post("/graphs/{graph_id}/suggestions", status_code=201)
    def import_suggestions(graph_id: str, payload: dict = Body(...)):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        sset = formats.import_discovery(
            payload.get("payload", {}),
            fmt=payload.get("format", "edge-list"),
            algorithm=payload.get("algorithm"),
        )
        with session.lock:
            set_id = f"{graph_id}-s{len(session.suggestions)}"
            # Re-key suggestion ids under the set so they are addressable.
            sset = formats.SuggestionSet(
                algorithm=sset.algorithm,
                suggestions=tuple(
                    formats.Suggestion(
                        id=f"{set_id}.{i}",
                        source=s.source,
                        target=s.target,
                        lag=s.lag,
                        score=s.score,
                        status=s.status,
                    )
                    for i, s in enumerate(sset.suggestions)
                ),
            )
            session.suggestions[set_id] = sset
        return {"set_id": set_id, **formats.suggestions_to_obj(sset)}

    @app.get("/graphs/{graph_id}/suggestions")
    def list_suggestions(graph_id: str):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        return {
            "sets": {
                set_id: formats.suggestions_to_obj(s)
                for set_id, s in session.suggestions.items()
            }
        }

    def _find_suggestion(session: GraphSession, suggestion_id: str):
        for set_id, sset in session.suggestions.items():
            for s in sset.suggestions:
                if s.id == suggestion_id:
                    return set_id, sset, s
        return None, None, None

    @app.post("/graphs/{graph_id}/suggestions/{suggestion_id}/accept")
    def accept_suggestion(graph_id: str, suggestion_id: str):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        with session.lock:
            set_id, sset, s = _find_suggestion(session, suggestion_id)
            if s is None:
                return _error(404, f"no suggestion {suggestion_id!r}")
            if s.status != "pending":
                return _error(400, f"suggestion {suggestion_id!r} already {s.status}")
            source = session.graph.variable_named(s.source)
            target = session.graph.variable_named(s.target)
            event = formats.EditEvent(
                seq=session.version + 1,
                actor=Provenance.algorithm(sset.algorithm),
                action="accept_suggestion",
                payload={
                    "source": source.id,
                    "target": target.id,
                    "lag": s.lag,
                    "algorithm": sset.algorithm,
                    "suggestion_id": suggestion_id,
                },
                timestamp=_now(),
            )
            graph = formats.apply_edit(session.graph, event)
            store.commit(session, event, graph)
            session.suggestions[set_id] = sset.with_status(suggestion_id, "accepted")
            return {
                "suggestion": asdict(session.suggestions[set_id].get(suggestion_id)),
                **_graph_body(session),
            }

    @app.post("/graphs/{graph_id}/suggestions/{suggestion_id}/reject")
    def reject_suggestion(graph_id: str, suggestion_id: str):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        with session.lock:
            set_id, sset, s = _find_suggestion(session, suggestion_id)
            if s is None:
                return _error(404, f"no suggestion {suggestion_id!r}")
            if s.status != "pending":
                return _error(400, f"suggestion {suggestion_id!r} already {s.status}")
            session.suggestions[set_id] = sset.with_status(suggestion_id, "rejected")
            return {"suggestion": asdict(session.suggestions[set_id].get(suggestion_id))}

    # -- simulation ------------------------------------------------------------

    @app.post("/graphs/{graph_id}/simulate", status_code=202)
    def start_run(graph_id: str, payload: dict = Body(...)):
        session = store.session(graph_id)
        if session is None:
            return _error(404, f"no graph {graph_id!r}")
        config = _config_from_payload(payload, store.max_length)
        with session.lock:
            cache_key = f"{session.version}:" + formats.sha256_hex(
                formats.canonical_json_bytes(payload)
            )
            if cache_key in session.run_cache:
                return {"run_id": session.run_cache[cache_key], "cached": True}
            graph = session.graph
            run_id = f"r{uuid.uuid4().hex[:12]}"
            record = RunRecord(run_id=run_id, graph_id=graph_id)
            store.runs[run_id] = record
            session.run_cache[cache_key] = run_id

        def work():
            try:
                record.frame = simulate(graph, config)
                record.status = "done"
            except Exception as exc:  # surfaced through GET /runs
                record.error = str(exc)
                record.status = "failed"

        threading.Thread(target=work, daemon=True).start()
        return {"run_id": run_id, "cached": False}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str, request: Request):
        record = store.runs.get(run_id)
        if record is None:
            return _error(404, f"no run {run_id!r}")
        if record.status == "running":
            return {"run_id": run_id, "status": "running"}
        if record.status == "failed":
            return {"run_id": run_id, "status": "failed", "error": record.error}
        frame = record.frame
        accept = request.headers.get("accept", "")
        if "text/csv" in accept:
            return Response(content=formats.export_csv(frame), media_type="text/csv")
        columns = {}
        for var in frame.variables:
            col = frame.columns[var.name]
            if var.kind == "continuous":
                columns[var.name] = [float(x) for x in col]
            else:
                columns[var.name] = [int(x) for x in col]
        return {
            "run_id": run_id,
            "status": "done",
            "series": {"meta": formats.series_meta(frame), "columns": columns},
        }

    # -- evaluation --------------------------------------------------------------

    @app.post("/evaluate")
    def evaluate(payload: dict = Body(...)):
        if "truth_graph_id" in payload:
            session = store.session(payload["truth_graph_id"])
            if session is None:
                return _error(404, f"no graph {payload['truth_graph_id']!r}")
            truth = session.graph
        elif "truth_document" in payload:
            truth = formats.from_document(payload["truth_document"])
        else:
            return _error(400, "evaluate needs truth_graph_id or truth_document")
        if "estimate_document" not in payload:
            return _error(400, "evaluate needs estimate_document")
        estimate = formats.from_document(payload["estimate_document"])
        lag_window = payload.get("lag_window", 0)
        if not isinstance(lag_window, int) or isinstance(lag_window, bool) or lag_window < 0:
            return _error(400, f"lag_window must be a non-negative integer, got {lag_window!r}")
        try:
            report = metrics.evaluate(truth, estimate, lag_window=lag_window)
        except ValueError as exc:
            return _error(400, str(exc))
        return asdict(report)

    return app
