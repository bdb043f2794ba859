"""HTTP facade for live annotation sessions.

A small JSON API over the annotation state machine, plus static hosting for
the browser UI:

  POST /sessions                    create a session (computes the order)
  GET  /sessions/{id}               status / progress (poll while pending)
  GET  /sessions/{id}/next          peek the next document to annotate
  POST /sessions/{id}/annotations   record one label for the current head
  GET  /sessions/{id}/export        JSONL export (records + summary)
  GET  /healthz                     liveness plus loaded-corpus info

Concurrency: every session carries its own lock; a mutation appends to the
session journal before it becomes visible.  Two racing posts for the same
head document resolve to exactly one success and one conflict.  Order
computation for large corpora runs on a background thread ("pending" status)
and never blocks other sessions.

Persistence: with a journal directory configured, each session is an
append-only JSONL file (meta line, then one line per annotation); recovery
replays the journal, restoring sessions byte-identically.
"""

from __future__ import annotations

import json
import logging
import pathlib
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from idsel import __version__, annotation
from idsel.clustering import ClusterParams
from idsel.corpus import Corpus, LabelSet, label_set_of
from idsel.errors import FormatError, IdselError, StateError, ValidationError
from idsel.geometry import EmbeddingSet
from idsel.lexical import LexicalParams
from idsel.selectors import (
    DEFAULT_BETA,
    METHODS,
    SelectionOrder,
    build_order,
)

log = logging.getLogger("idsel.service")

PENDING = "pending"
FAILED = "failed"

DEFAULT_SYNC_THRESHOLD = 2000


class NotFoundError(IdselError):
    """No such resource."""


class CreateSessionRequest(BaseModel):
    method: str
    n_shots: int
    labels: list[str] | None = None
    allow_new_labels: bool = False
    corpus: str = "default"
    seed: int = 0
    beta: float = DEFAULT_BETA
    lls_mode: str = "previous_only"
    max_ngram: int = 4
    smoothing: str = "none"
    min_cluster_size: int | None = None
    min_samples: int | None = None
    threads: int = 1


class AnnotationRequest(BaseModel):
    doc_id: str
    label: str


@dataclass
class SessionRecord:
    """One live session: its state plus bookkeeping the API needs."""

    session_id: str
    corpus_name: str
    corpus: Corpus
    created_at: float
    status: str = PENDING
    state: annotation.SessionState | None = None
    error: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def effective_status(self) -> str:
        if self.state is not None:
            return self.state.status
        return self.status


def _progress(state: annotation.SessionState) -> dict:
    return {
        "status": state.status,
        "cursor": state.cursor,
        "n_ranked": len(state.order.ranked_ids),
        "total_annotations": len(state.annotated),
        "per_class_counts": dict(state.annotated.per_class_counts),
        "labels": list(state.label_set.labels),
        "n_shots": state.config.n_shots,
        "n_classes": state.label_set.n_classes,
        "theta_so_far": annotation.theta_so_far(state),
        "truncated": state.order.truncated,
        "method": state.order.method,
    }


class SessionStore:
    """All sessions, their journals, and the data sets they draw from."""

    def __init__(
        self,
        registry: dict[str, tuple[Corpus, EmbeddingSet | None]],
        journal_dir: str | None = None,
        sync_threshold: int = DEFAULT_SYNC_THRESHOLD,
    ):
        self._registry = registry
        self._journal_dir = pathlib.Path(journal_dir) if journal_dir else None
        self._sync_threshold = sync_threshold
        self._sessions: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()
        if self._journal_dir is not None:
            self._journal_dir.mkdir(parents=True, exist_ok=True)
            self._recover()

    # -- creation ---------------------------------------------------------

    def create(self, req: CreateSessionRequest) -> dict:
        if req.method not in METHODS:
            raise ValidationError(f"unknown method {req.method!r}")
        if req.corpus not in self._registry:
            raise NotFoundError(f"no corpus named {req.corpus!r}")
        corpus, emb = self._registry[req.corpus]
        if req.method in ("rss", "oc") and emb is None:
            raise ValidationError(f"method {req.method} requires embeddings")
        label_set = self._label_set(req, corpus)
        config = annotation.SessionConfig(
            n_shots=req.n_shots,
            label_set=label_set,
            allow_new_labels=req.allow_new_labels,
        )

        record = SessionRecord(
            session_id=uuid.uuid4().hex,
            corpus_name=req.corpus,
            corpus=corpus,
            created_at=time.time(),
        )
        with self._lock:
            self._sessions[record.session_id] = record

        if len(corpus) <= self._sync_threshold:
            self._initialize(record, req, config, corpus, emb)
        else:
            worker = threading.Thread(
                target=self._initialize,
                args=(record, req, config, corpus, emb),
                daemon=True,
            )
            worker.start()
        return self.describe(record.session_id)

    def _label_set(self, req: CreateSessionRequest, corpus: Corpus) -> LabelSet:
        if req.labels is not None:
            return LabelSet(tuple(req.labels))
        try:
            return label_set_of(corpus)
        except ValidationError:
            raise ValidationError(
                "labels are required when the corpus has no gold labels"
            ) from None

    def _initialize(self, record, req, config, corpus, emb) -> None:
        try:
            cluster_params = None
            if req.min_cluster_size is not None or req.min_samples is not None:
                cluster_params = ClusterParams(
                    min_cluster_size=req.min_cluster_size or 5,
                    min_samples=req.min_samples or 5,
                )
            order = build_order(
                req.method,
                corpus,
                emb=emb,
                seed=req.seed,
                beta=req.beta,
                lexical_params=LexicalParams(
                    max_ngram=req.max_ngram, smoothing=req.smoothing
                ),
                lls_mode=req.lls_mode,
                cluster_params=cluster_params,
                threads=req.threads,
            )
            state = annotation.new_session(config, order)
        except Exception as exc:  # surface the failure to pollers
            with record.lock:
                record.status = FAILED
                record.error = str(exc)
            log.warning("session %s failed to initialize: %s", record.session_id, exc)
            return
        with record.lock:
            self._write_meta(record, config, order)
            record.state = state
            record.status = state.status

    # -- journaling -------------------------------------------------------

    def _journal_path(self, session_id: str) -> pathlib.Path | None:
        if self._journal_dir is None:
            return None
        return self._journal_dir / f"{session_id}.jsonl"

    def _write_meta(self, record, config, order) -> None:
        path = self._journal_path(record.session_id)
        if path is None:
            return
        meta = {
            "kind": "session-meta",
            "session_id": record.session_id,
            "corpus": record.corpus_name,
            "created_at": record.created_at,
            "method": order.method,
            "ranked_ids": list(order.ranked_ids),
            "params_fingerprint": order.params_fingerprint,
            "truncated": order.truncated,
            "n_shots": config.n_shots,
            "labels": list(config.label_set.labels),
            "allow_new_labels": config.allow_new_labels,
        }
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(meta, sort_keys=True) + "\n")

    def _append_annotation(self, record, doc_id: str, label: str) -> None:
        path = self._journal_path(record.session_id)
        if path is None:
            return
        line = json.dumps({"id": doc_id, "label": label}, sort_keys=True) + "\n"
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(line)
            handle.flush()

    def _recover(self) -> None:
        for path in sorted(self._journal_dir.glob("*.jsonl")):
            try:
                record = self._replay(path)
            except (IdselError, OSError, json.JSONDecodeError) as exc:
                log.warning("skipping journal %s: %s", path.name, exc)
                continue
            self._sessions[record.session_id] = record
            log.info(
                "recovered session %s (%s annotations)",
                record.session_id,
                len(record.state.annotated),
            )

    def _replay(self, path: pathlib.Path) -> SessionRecord:
        with open(path, encoding="utf-8") as handle:
            lines = [line for line in handle.read().splitlines() if line.strip()]
        if not lines:
            raise FormatError("empty journal")
        meta = json.loads(lines[0])
        if meta.get("kind") != "session-meta":
            raise FormatError("journal does not start with a session-meta line")
        if meta["corpus"] not in self._registry:
            raise FormatError(f"journal references unknown corpus {meta['corpus']!r}")
        corpus, _ = self._registry[meta["corpus"]]
        order = SelectionOrder(
            method=meta["method"],
            ranked_ids=tuple(meta["ranked_ids"]),
            params_fingerprint=meta["params_fingerprint"],
            truncated=meta["truncated"],
        )
        config = annotation.SessionConfig(
            n_shots=meta["n_shots"],
            label_set=LabelSet(tuple(meta["labels"])),
            allow_new_labels=meta["allow_new_labels"],
        )
        state = annotation.new_session(config, order)
        for line in lines[1:]:
            entry = json.loads(line)
            state = annotation.annotate(state, entry["id"], entry["label"])
        record = SessionRecord(
            session_id=meta["session_id"],
            corpus_name=meta["corpus"],
            corpus=corpus,
            created_at=meta["created_at"],
            status=state.status,
            state=state,
        )
        return record

    # -- per-session operations -------------------------------------------

    def _get(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._sessions.get(session_id)
        if record is None:
            raise NotFoundError(f"no session {session_id!r}")
        return record

    def describe(self, session_id: str) -> dict:
        record = self._get(session_id)
        with record.lock:
            payload = {
                "session_id": record.session_id,
                "status": record.effective_status(),
                "corpus": record.corpus_name,
                "created_at": record.created_at,
            }
            if record.error is not None:
                payload["error"] = record.error
            if record.state is not None:
                payload["progress"] = _progress(record.state)
        return payload

    def _ready_state(self, record: SessionRecord) -> annotation.SessionState:
        if record.state is None:
            if record.status == FAILED:
                raise StateError(f"session failed: {record.error}")
            raise StateError("session is pending; order not ready yet")
        return record.state

    def next_payload(self, session_id: str) -> dict:
        record = self._get(session_id)
        with record.lock:
            state = self._ready_state(record)
            progress = _progress(state)
            if state.status != annotation.ACTIVE:
                return {
                    "status": state.status,
                    "theta": annotation.overannotation_rate(state)
                    if len(state.annotated)
                    else None,
                    "progress": progress,
                }
            doc_id = annotation.next_document(state)
            return {
                "id": doc_id,
                "text": record.corpus.get(doc_id).text,
                "rank": state.cursor,
                "progress": progress,
            }

    def annotate(self, session_id: str, doc_id: str, label: str) -> dict:
        record = self._get(session_id)
        with record.lock:
            state = self._ready_state(record)
            new_state = annotation.annotate(state, doc_id, label)
            self._append_annotation(record, doc_id, label)
            record.state = new_state
            record.status = new_state.status
            return {"progress": _progress(new_state)}

    def export(self, session_id: str) -> str:
        record = self._get(session_id)
        with record.lock:
            state = self._ready_state(record)
            return "\n".join(annotation.export_session(state)) + "\n"


def create_app(
    registry: dict[str, tuple[Corpus, EmbeddingSet | None]],
    journal_dir: str | None = None,
    sync_threshold: int = DEFAULT_SYNC_THRESHOLD,
    ui_dir: str | None = None,
) -> FastAPI:
    """Build the API around a name -> (corpus, embeddings) registry."""
    app = FastAPI(title="idsel annotation service", version=__version__)
    store = SessionStore(
        registry, journal_dir=journal_dir, sync_threshold=sync_threshold
    )
    app.state.store = store

    def error_response(status_code: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            status_code=status_code, content={"code": code, "message": message}
        )

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return error_response(404, "not_found", str(exc))

    @app.exception_handler(StateError)
    async def _conflict(request: Request, exc: StateError):
        return error_response(409, "conflict", str(exc))

    @app.exception_handler(ValidationError)
    async def _invalid(request: Request, exc: ValidationError):
        return error_response(400, "validation", str(exc))

    @app.exception_handler(IdselError)
    async def _other(request: Request, exc: IdselError):
        return error_response(500, "internal", str(exc))

    @app.get("/healthz")
    def healthz() -> dict:
        data = {}
        for name, (corpus, emb) in registry.items():
            data[name] = {
                "documents": len(corpus),
                "embeddings": len(emb) if emb is not None else 0,
                "has_gold_labels": all(
                    d.gold_label is not None for d in corpus
                ),
            }
        return {"status": "ok", "version": __version__, "corpora": data}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest) -> dict:
        return store.create(req)

    @app.get("/sessions/{session_id}")
    def describe_session(session_id: str) -> dict:
        return store.describe(session_id)

    @app.get("/sessions/{session_id}/next")
    def get_next(session_id: str) -> dict:
        return store.next_payload(session_id)

    @app.post("/sessions/{session_id}/annotations")
    def post_annotation(session_id: str, req: AnnotationRequest) -> dict:
        return store.annotate(session_id, req.doc_id, req.label)

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str) -> PlainTextResponse:
        return PlainTextResponse(
            store.export(session_id), media_type="application/x-ndjson"
        )

    if ui_dir is not None and pathlib.Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
