"""HTTP/JSON facade over sessions for the web client and automation.

Endpoints:
  POST /sessions?threshold=N      upload a log, run initialize, get a handle
  GET  /sessions/{sid}/model      current model graph payload
  GET  /sessions/{sid}/abstractions   available / redoable / history lists
  POST /sessions/{sid}/apply      body: {"suffix", "target", "transitions"}
  POST /sessions/{sid}/redo       body: {"oid"}
  GET  /sessions/{sid}/export     the current augmented log document

Record references over the wire are the transition-reconstructable triple
(abstraction suffix, target type, sorted transition ids). Mutating responses
carry the refreshed model payload and lists, so clients never need a second
fetch. Sessions live in memory; each is locked so its operations serialize.
"""

from __future__ import annotations

import threading
import uuid
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .abstraction import AbstractionRecord
from .errors import (
    GranexError,
    InadmissibleError,
    InvariantError,
    ParseError,
    StaleRecordError,
    UnfitError,
    UnknownEntityError,
)
from .nets import to_graph_payload
from .ocel import parse_log
from .session import CLASS_NAMES, DEFAULT_SIZE_THRESHOLD, Session, initialize


class _Registry:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[Session, threading.Lock, dict]] = {}

    def add(self, session: Session, threshold: int) -> dict:
        sid = uuid.uuid4().hex[:12]
        handle = {
            "sid": sid,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "threshold": threshold,
        }
        with self._lock:
            self._sessions[sid] = (session, threading.Lock(), handle)
        return handle

    def get(self, sid: str) -> tuple[Session, threading.Lock, dict] | None:
        with self._lock:
            return self._sessions.get(sid)

    def items(self) -> list[tuple[str, tuple[Session, threading.Lock, dict]]]:
        with self._lock:
            return list(self._sessions.items())


def _record_ref(record: AbstractionRecord, members: list[str], rules: tuple[str, ...] = ()) -> dict:
    ref = {
        "suffix": record.suffix,
        "target": record.target_otype,
        "transitions": sorted(record.transitions),
        "label": f"{CLASS_NAMES[record.suffix]} ({record.target_otype}): " + ", ".join(members),
    }
    if record.oid:
        ref["oid"] = record.oid
    if rules:
        ref["rules"] = list(rules)
    return ref


def _abstraction_lists(session: Session) -> dict:
    available = [
        _record_ref(node.record(), node.member_labels()) for node in session.available()
    ]
    redoable = [
        _record_ref(record, _member_labels(session, record), rules)
        for record, rules in session.redoable()
    ]
    history = []
    for oid in session.log.history:
        node = session._match(oid)
        atype = session.log.objects[oid]
        if node is not None:
            history.append(_record_ref(node.record(oid), node.member_labels()))
        else:
            history.append({"oid": oid, "suffix": atype.rsplit("$", 1)[1], "target": atype, "transitions": []})
    return {"available": available, "redoable": redoable, "history": history}


def _member_labels(session: Session, record: AbstractionRecord) -> list[str]:
    node = session._match(record.oid) if record.oid else None
    if node is not None:
        return node.member_labels()
    return sorted(t[len("t:"):] for t in record.transitions if t.startswith("t:"))


def _state_body(session: Session, handle: dict) -> dict:
    body = {"session": handle, "model": to_graph_payload(session.current_model())}
    body.update(_abstraction_lists(session))
    return body


def create_app(
    default_threshold: int = DEFAULT_SIZE_THRESHOLD,
    seed: int | None = None,
    static_dir: str | Path | None = None,
    snapshot_dir: str | Path | None = None,
) -> FastAPI:
    registry = _Registry()

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        if snapshot_dir is not None:
            target = Path(snapshot_dir)
            target.mkdir(parents=True, exist_ok=True)
            for sid, (session, lock, _) in registry.items():
                with lock:
                    (target / f"{sid}.json").write_bytes(session.export())

    app = FastAPI(title="granex", version=__version__, lifespan=lifespan)

    @app.exception_handler(GranexError)
    async def _granex_error(request: Request, exc: GranexError):
        status = 500
        if isinstance(exc, ParseError):
            status = 400
        elif isinstance(exc, StaleRecordError):
            status = 409
        elif isinstance(exc, (UnfitError, InvariantError, UnknownEntityError, InadmissibleError)):
            status = 422
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, UnfitError):
            body["diagnostics"] = [{"entity": e, "reason": r} for e, r in exc.diagnostics]
        return JSONResponse(status_code=status, content=body)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request, threshold: int = Query(default=None)):
        raw = await request.body()
        log = parse_log(raw)
        effective = threshold if threshold is not None else default_threshold
        session = initialize(log, threshold=effective, seed=seed)
        handle = registry.add(session, effective)
        body = _state_body(session, handle)
        body["warnings"] = list(session.warnings)
        return body

    def _lookup(sid: str):
        entry = registry.get(sid)
        if entry is None:
            return None
        return entry

    @app.get("/sessions/{sid}/model")
    def get_model(sid: str):
        entry = _lookup(sid)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        session, lock, _ = entry
        with lock:
            return to_graph_payload(session.current_model())

    @app.get("/sessions/{sid}/abstractions")
    def get_abstractions(sid: str):
        entry = _lookup(sid)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        session, lock, _ = entry
        with lock:
            return _abstraction_lists(session)

    @app.post("/sessions/{sid}/apply")
    def apply_abstraction(sid: str, body: dict):
        entry = _lookup(sid)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        session, lock, handle = entry
        with lock:
            node = session.find_available(
                body.get("suffix", ""), body.get("target", ""), frozenset(body.get("transitions", []))
            )
            session.apply(node)
            return _state_body(session, handle)

    @app.post("/sessions/{sid}/redo")
    def redo_abstraction(sid: str, body: dict):
        entry = _lookup(sid)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        session, lock, handle = entry
        with lock:
            oid = body.get("oid", "")
            if oid not in {rec.oid for rec, _ in session.redoable()}:
                return JSONResponse(
                    status_code=422,
                    content={"error": "NotRedoable", "detail": f"abstraction object {oid!r} is not redoable"},
                )
            session.redo(oid)
            return _state_body(session, handle)

    @app.get("/sessions/{sid}/export")
    def export_log(sid: str):
        entry = _lookup(sid)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        session, lock, _ = entry
        with lock:
            return Response(content=session.export(), media_type="application/json")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
