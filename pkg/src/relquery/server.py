"""HTTP service exposing sessions to the web console.

Endpoints (JSON bodies/responses):
  POST /sessions                      create a session from a CSV (path, raw
                                      text, or bundled dataset name)
  POST /sessions/{id}/query           run one BQL statement
  GET  /sessions/{id}/schema          column names and statistical types
  GET  /sessions/{id}/heatmap         pairwise matrix (measure/context/k)
  POST /sessions/{id}/analyze         start an asynchronous analyze job
  GET  /sessions/{id}/analyze/status  poll the job
  GET  /health

Within a session, queries queue behind a running analyze; starting an
analyze while a query holds the ensemble answers 409.
"""

from __future__ import annotations

import secrets
import tempfile
import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .baselines import MEASURES, heatmap_ordering, pairwise_matrix
from .errors import BqlError, RelqueryError
from .session import Session


class CreateSession(BaseModel):
    name: Optional[str] = None
    csv_path: Optional[str] = None
    csv_text: Optional[str] = None
    dataset: Optional[str] = None
    key: Optional[str] = None
    seed: Optional[int] = None
    models: int = 16
    analyze_iterations: int = 0


class QueryBody(BaseModel):
    text: str


class AnalyzeBody(BaseModel):
    iterations: int = 100


class _Handle:
    def __init__(self, session: Session, name: str):
        self.session = session
        self.name = name
        self.work_lock = threading.Lock()  # released by whichever thread finishes the work
        self.analyze_status = {"running": False, "total_iterations": 0, "error": None}


def _error_payload(err):
    out = {"message": getattr(err, "message", str(err))}
    if isinstance(err, BqlError):
        out["line"] = err.line
        out["column"] = err.column
    return {"error": out}


def create_app(default_seed: int = 0) -> FastAPI:
    app = FastAPI(title="relquery", version="0.1.0")
    sessions: dict[str, _Handle] = {}
    registry_lock = threading.Lock()

    def handle_of(session_id: str) -> _Handle:
        handle = sessions.get(session_id)
        if handle is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return handle

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(body: CreateSession):
        seed = body.seed if body.seed is not None else default_seed
        session = Session(seed=seed)
        sources = [s for s in (body.csv_path, body.csv_text, body.dataset) if s]
        if len(sources) != 1:
            return JSONResponse(status_code=400, content=_error_payload(
                ValueError("give exactly one of csv_path, csv_text, dataset")))
        try:
            if body.csv_text is not None:
                with tempfile.NamedTemporaryFile(
                        "w", suffix=".csv", delete=False, encoding="utf-8") as fh:
                    fh.write(body.csv_text)
                    path = fh.name
                name = body.name or "data"
            elif body.dataset is not None:
                path = body.dataset
                name = body.name or body.dataset
            else:
                path = body.csv_path
                name = body.name or Path(body.csv_path).stem
            table = session.create_table(name, path, key=body.key)
            pop = session.create_population(name, name)
            if body.models > 0:
                session.initialize_models(pop, body.models)
            if body.analyze_iterations > 0:
                session.analyze_population(pop, body.analyze_iterations, "iterations")
        except RelqueryError as err:
            return JSONResponse(status_code=400, content=_error_payload(err))
        session_id = secrets.token_hex(8)
        with registry_lock:
            sessions[session_id] = _Handle(session, name)
        key_column = (
            table.columns[table.key_column].name if table.key_column is not None else None
        )
        return {
            "session_id": session_id,
            "name": name,
            "rows": table.n_rows,
            "columns": table.p,
            "key_column": key_column,
            "schema": session.schema_summary()[name],
        }

    @app.post("/sessions/{session_id}/query")
    def query(session_id: str, body: QueryBody):
        handle = handle_of(session_id)
        started = time.perf_counter()
        with handle.work_lock:
            try:
                result = handle.session.execute(body.text)
            except RelqueryError as err:
                return JSONResponse(status_code=400, content=_error_payload(err))
            warnings = list(handle.session.warnings)
        return {
            "columns": result.columns,
            "rows": [[_jsonable(v) for v in row] for row in result.rows],
            "kinds": result.kinds,
            "warnings": warnings,
            "timing_ms": round((time.perf_counter() - started) * 1000.0, 3),
        }

    @app.get("/sessions/{session_id}/schema")
    def schema(session_id: str):
        handle = handle_of(session_id)
        session = handle.session
        pop = session.find_population(handle.name)
        table = pop.table if pop else session.table_for(handle.name)
        key_column = (
            table.columns[table.key_column].name if table.key_column is not None else None
        )
        return {"name": handle.name, "key_column": key_column,
                "schema": session.schema_summary()}

    @app.get("/sessions/{session_id}/heatmap")
    def heatmap(session_id: str, measure: str, context: str, k: int = 10):
        handle = handle_of(session_id)
        if measure not in MEASURES:
            return JSONResponse(status_code=400, content=_error_payload(
                ValueError(f"unknown measure {measure!r}")))
        with handle.work_lock:
            session = handle.session
            pop = session.find_population(handle.name)
            try:
                if pop is None:
                    raise RelqueryError("session has no population")
                if measure == "relevance" or pop.ensemble is not None:
                    session.require_models(pop)
                matrix = pairwise_matrix(
                    measure, pop.table, context,
                    ensemble=pop.ensemble, cache=pop.cache, k=k)
            except RelqueryError as err:
                return JSONResponse(status_code=400, content=_error_payload(err))
            order = heatmap_ordering(matrix)
        return {
            "measure": measure,
            "context": context,
            "labels": pop.table.row_keys,
            "matrix": [[float(v) for v in row] for row in matrix],
            "ordering": order,
        }

    @app.post("/sessions/{session_id}/analyze")
    def analyze_async(session_id: str, body: AnalyzeBody):
        handle = handle_of(session_id)
        if not handle.work_lock.acquire(blocking=False):
            return JSONResponse(status_code=409, content=_error_payload(
                RuntimeError("a query or analyze currently holds the ensemble")))
        handle.analyze_status = {"running": True, "total_iterations": None, "error": None}

        def worker():
            try:
                session = handle.session
                pop = session.population_for(handle.name)
                total = session.analyze_population(pop, body.iterations, "iterations")
                handle.analyze_status = {
                    "running": False, "total_iterations": total, "error": None}
            except Exception as err:  # surfaced via the status endpoint
                handle.analyze_status = {
                    "running": False, "total_iterations": None, "error": str(err)}
            finally:
                handle.work_lock.release()

        threading.Thread(target=worker, daemon=True).start()
        return JSONResponse(status_code=202, content={
            "status": "running", "iterations": body.iterations})

    @app.get("/sessions/{session_id}/analyze/status")
    def analyze_status(session_id: str):
        return handle_of(session_id).analyze_status

    return app


def _jsonable(value):
    import numpy as np

    if value is None:
        return None
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    return value
