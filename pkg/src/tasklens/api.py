"""HTTP service exposing the workbench over a JSON API.

All routes live under /api and return either a 2xx payload built by the
shared builders in payloads.py or an error body of the shape
{"status", "code", "message", "detail"?}.  Invisible models 404 rather
than 403 so probing ids reveals nothing.  GET handlers never write to the
workspace.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

from fastapi import FastAPI, Header, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import diffs, layout as layouts, optimize, payloads, scheduling
from .codemap import locations_for_task, read_source
from .errors import (
    Forbidden,
    GraphValidationError,
    MissingMember,
    NotFound,
    PackageError,
    PathRejected,
    SchemaError,
    StorageFull,
    TasklensError,
    TooLarge,
    UnknownTask,
    UnsupportedFormat,
)
from .profiles import HardwareProfile, default_profile, load_profile
from .store import Workspace

DEFAULT_MAX_UPLOAD_MB = 512


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def body(self) -> dict:
        doc = {"status": self.status, "code": self.code, "message": self.message}
        if self.detail is not None:
            doc["detail"] = self.detail
        return doc


def _translate(exc: Exception) -> ApiError:
    """Domain exception to wire error.  Order matters: subclasses first."""
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, NotFound):
        return ApiError(404, "not-found", str(exc))
    if isinstance(exc, Forbidden):
        return ApiError(403, "forbidden", str(exc))
    if isinstance(exc, TooLarge):
        return ApiError(413, "too-large", str(exc))
    if isinstance(exc, PathRejected):
        return ApiError(400, "bad-path", str(exc))
    if isinstance(exc, UnknownTask):
        return ApiError(400, "unknown-task", str(exc))
    if isinstance(exc, UnsupportedFormat):
        return ApiError(400, "unsupported-format", str(exc))
    if isinstance(exc, GraphValidationError):
        detail = [v.to_json() for v in exc.violations]
        return ApiError(400, "validation-error", "graph failed validation", detail)
    if isinstance(exc, SchemaError):
        return ApiError(400, "schema-error", str(exc), {"pointer": exc.pointer})
    if isinstance(exc, MissingMember):
        return ApiError(400, "missing-member", str(exc))
    if isinstance(exc, StorageFull):
        return ApiError(507, "storage-full", str(exc))
    if isinstance(exc, (PackageError, TasklensError, ValueError)):
        return ApiError(400, "invalid-request", str(exc))
    raise exc


def create_app(
    data_dir: str | Path = "data",
    profile: HardwareProfile | None = None,
    max_upload_mb: int = DEFAULT_MAX_UPLOAD_MB,
    static_dir: str | Path | None = None,
) -> FastAPI:
    workspace = Workspace(data_dir)
    hw = profile or default_profile()
    max_upload_bytes = max_upload_mb * 1024 * 1024

    app = FastAPI(title="tasklens", docs_url=None, redoc_url=None)
    app.state.workspace = workspace
    app.state.profile = hw

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # option lists are pure in (graph, task, selection); memoize them
    options_cache: dict[tuple, dict] = {}
    layout_cache: dict[tuple, dict] = {}
    cache_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _on_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def _on_request_error(request: Request, exc: RequestValidationError):
        err = ApiError(400, "invalid-request", "malformed request", exc.errors())
        return JSONResponse(status_code=err.status, content=err.body())

    @app.exception_handler(StarletteHTTPException)
    async def _on_http_error(request: Request, exc: StarletteHTTPException):
        err = ApiError(exc.status_code, "http-error", str(exc.detail))
        return JSONResponse(status_code=err.status, content=err.body())

    @app.exception_handler(TasklensError)
    async def _on_domain_error(request: Request, exc: TasklensError):
        err = _translate(exc)
        return JSONResponse(status_code=err.status, content=err.body())

    def require_user(user: str | None) -> str:
        if not user:
            raise ApiError(401, "unauthorized", "X-User header required")
        return user

    def visible_record(model_id: str, user: str | None, token: str | None):
        return workspace.require_access(model_id, user, token)

    def model_graph(model_id: str):
        return workspace.model_graph(model_id)

    def parse_selection_param(selection: str | None):
        if selection is None:
            return None
        try:
            return payloads.parse_selection_json(selection)
        except ValueError as exc:
            raise ApiError(400, "invalid-selection", str(exc))

    def selection_for(
        model_id: str, analysis: str | None, selection: str | None
    ) -> optimize.OptimizationSelection | None:
        if analysis is not None and selection is not None:
            raise ApiError(400, "invalid-request", "pass analysis or selection, not both")
        if analysis is not None:
            record = workspace.get_analysis(analysis)
            if record.model_id != model_id:
                raise ApiError(400, "analysis-mismatch", "analysis belongs to another model")
            return record.selection
        return parse_selection_param(selection)

    def selection_digest(selection) -> str:
        doc = selection.to_json() if selection is not None else None
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # -- models ----------------------------------------------------------

    @app.post("/api/models", status_code=201)
    async def upload_model(
        package: UploadFile,
        x_user: str | None = Header(default=None),
        name: str | None = None,
    ):
        user = require_user(x_user)
        blob = await package.read()
        if len(blob) > max_upload_bytes:
            raise ApiError(413, "too-large", f"package exceeds {max_upload_mb} MB")
        try:
            record, duplicate = workspace.store_model(blob, owner=user, name=name)
        except TasklensError as exc:
            raise _translate(exc)
        return payloads.record_payload(record, viewer=user, duplicate=duplicate)

    @app.get("/api/models")
    def list_models(x_user: str | None = Header(default=None)):
        user = require_user(x_user)
        return {
            "models": [
                payloads.record_payload(r, viewer=user) for r in workspace.list_models(user)
            ]
        }

    @app.get("/api/models/{model_id}/summary")
    def model_summary(
        model_id: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        visible_record(model_id, x_user, t)
        return payloads.summary_payload(model_graph(model_id), hw)

    @app.get("/api/models/{model_id}/graph")
    def model_graph_route(
        model_id: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        visible_record(model_id, x_user, t)
        return payloads.graph_payload(model_graph(model_id))

    @app.get("/api/models/{model_id}/layout")
    def model_layout(
        model_id: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
        collapse: str | None = None,
    ):
        record = visible_record(model_id, x_user, t)
        g = model_graph(model_id)
        collapsed = tuple(sorted({c for c in (collapse or "").split(",") if c}))
        key = (record.graph_hash, collapsed)
        with cache_lock:
            cached = layout_cache.get(key)
        if cached is not None:
            return cached
        if collapsed:
            result = layouts.layout_collapsed(g, set(collapsed))
        else:
            result = layouts.layout_graph(g)
        payload = payloads.layout_payload(result)
        with cache_lock:
            if len(layout_cache) > 256:
                layout_cache.clear()
            layout_cache[key] = payload
        return payload

    @app.get("/api/models/{model_id}/timeline")
    def model_timeline(
        model_id: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        visible_record(model_id, x_user, t)
        g = model_graph(model_id)
        result = optimize.simulate(g, optimize.EMPTY_SELECTION, hw)
        latencies = [row.base.latency for row in result.per_task]
        entries, makespan = scheduling.schedule(g, latencies, engines=hw.engines)
        return payloads.timeline_payload(entries, makespan, hw.engines)

    @app.get("/api/models/{model_id}/metrics")
    def model_metrics(
        model_id: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
        analysis: str | None = None,
        selection: str | None = None,
        offset: int = 0,
        limit: int | None = None,
    ):
        visible_record(model_id, x_user, t)
        sel = selection_for(model_id, analysis, selection)
        return payloads.metrics_payload(
            model_graph(model_id), hw, sel, offset=offset, limit=limit
        )

    @app.get("/api/models/{model_id}/tasks/{task_id}/options")
    def task_options(
        model_id: str,
        task_id: int,
        x_user: str | None = Header(default=None),
        t: str | None = None,
        selection: str | None = None,
    ):
        record = visible_record(model_id, x_user, t)
        sel = parse_selection_param(selection)
        key = (record.graph_hash, task_id, selection_digest(sel))
        with cache_lock:
            cached = options_cache.get(key)
        if cached is not None:
            return cached
        g = model_graph(model_id)
        try:
            payload = payloads.options_payload(g, hw, task_id, sel)
        except UnknownTask as exc:
            raise ApiError(404, "unknown-task", str(exc))
        with cache_lock:
            if len(options_cache) > 4096:
                options_cache.clear()
            options_cache[key] = payload
        return payload

    @app.post("/api/models/{model_id}/simulate")
    async def simulate_model(
        model_id: str,
        request: Request,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        visible_record(model_id, x_user, t)
        body = await request.body()
        try:
            sel = payloads.parse_selection_json(body.decode("utf-8") or "{}")
        except (ValueError, UnicodeDecodeError) as exc:
            raise ApiError(400, "invalid-selection", str(exc))
        g = model_graph(model_id)
        try:
            result = optimize.simulate(g, sel, hw)
        except (UnknownTask, UnsupportedFormat) as exc:
            raise _translate(exc)
        return payloads.simulation_payload(result)

    # -- analyses --------------------------------------------------------

    @app.post("/api/models/{model_id}/analyses", status_code=201)
    async def create_analysis(
        model_id: str,
        request: Request,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        user = require_user(x_user)
        visible_record(model_id, user, t)
        try:
            body = json.loads(await request.body())
            name = body["name"]
            sel = optimize.OptimizationSelection.from_json(body["selection"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ApiError(400, "invalid-request", f"bad analysis body: {exc}")
        analysis = workspace.save_analysis(
            model_id, name=name, selection=sel, author=user,
            parent_analysis_id=body.get("parent_analysis_id"),
        )
        return payloads.analysis_payload(analysis)

    @app.get("/api/models/{model_id}/analyses")
    def list_analyses(
        model_id: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        visible_record(model_id, x_user, t)
        return {
            "analyses": [
                payloads.analysis_payload(a) for a in workspace.list_analyses(model_id)
            ]
        }

    @app.post("/api/analyses/{analysis_id}/fork", status_code=201)
    async def fork_analysis(
        analysis_id: str,
        request: Request,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        user = require_user(x_user)
        parent = workspace.get_analysis(analysis_id)
        visible_record(parent.model_id, user, t)
        name = None
        body = await request.body()
        if body:
            try:
                doc = json.loads(body)
                name = doc.get("name")
            except json.JSONDecodeError as exc:
                raise ApiError(400, "invalid-request", f"bad fork body: {exc}")
        forked = workspace.fork_analysis(analysis_id, author=user, name=name)
        return payloads.analysis_payload(forked)

    # -- sharing ---------------------------------------------------------

    @app.post("/api/models/{model_id}/share")
    async def share_model(
        model_id: str,
        request: Request,
        x_user: str | None = Header(default=None),
    ):
        user = require_user(x_user)
        # visibility check first so non-viewers cannot distinguish the model
        workspace.require_access(model_id, user)
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiError(400, "invalid-request", f"bad share body: {exc}")
        users = body.get("users")
        link_sharing = body.get("link_sharing")
        if users is None and link_sharing is None:
            raise ApiError(400, "invalid-request", "share body needs users or link_sharing")
        record = workspace.share(model_id, caller=user, users=users, link_sharing=link_sharing)
        return payloads.record_payload(record, viewer=user)

    # -- diff --------------------------------------------------------------

    @app.get("/api/diff")
    def diff_route(
        base: str,
        target: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
        selection_base: str | None = None,
        selection_target: str | None = None,
    ):
        visible_record(base, x_user, t)
        visible_record(target, x_user, t)
        g_base = model_graph(base)
        g_target = model_graph(target)
        sel_base = parse_selection_param(selection_base) or optimize.EMPTY_SELECTION
        sel_target = parse_selection_param(selection_target) or optimize.EMPTY_SELECTION
        sim_base = optimize.simulate(g_base, sel_base, hw)
        sim_target = optimize.simulate(g_target, sel_target, hw)
        result = diffs.diff_models(
            g_base,
            [row.opt for row in sim_base.per_task],
            g_target,
            [row.opt for row in sim_target.per_task],
            sim_base.summary_opt,
            sim_target.summary_opt,
        )
        return payloads.diff_payload(result)

    # -- code --------------------------------------------------------------

    @app.get("/api/models/{model_id}/tasks/{task_id}/code")
    def task_code(
        model_id: str,
        task_id: int,
        x_user: str | None = Header(default=None),
        t: str | None = None,
    ):
        visible_record(model_id, x_user, t)
        parsed = workspace.model_package(model_id)
        g = model_graph(model_id)
        if task_id < 0 or task_id >= len(g.tasks):
            raise ApiError(404, "unknown-task", f"no task {task_id}")
        locations = locations_for_task(parsed.code_map, task_id)
        return payloads.code_payload(task_id, locations)

    @app.get("/api/models/{model_id}/code")
    def model_code(
        model_id: str,
        file: str,
        x_user: str | None = Header(default=None),
        t: str | None = None,
        start: int | None = None,
        end: int | None = None,
    ):
        visible_record(model_id, x_user, t)
        parsed = workspace.model_package(model_id)
        window = None
        if start is not None and end is not None:
            window = (start, end)
        elif (start is None) != (end is None):
            raise ApiError(400, "invalid-request", "start and end go together")
        try:
            sl = read_source(parsed.source, file, window)
        except (NotFound, PathRejected, TooLarge) as exc:
            raise _translate(exc)
        return payloads.source_payload(sl)

    if static_dir is not None:
        static_root = Path(static_dir).resolve()

        # catch-all so /m/{id} deep links load the single-page app; real
        # files win, /api stays governed by the routes above
        @app.get("/{asset_path:path}", include_in_schema=False)
        def static_asset(asset_path: str):
            if asset_path == "api" or asset_path.startswith("api/"):
                raise ApiError(404, "http-error", "no such route")
            candidate = (static_root / asset_path).resolve() if asset_path else None
            if (
                candidate is not None
                and candidate.is_file()
                and candidate.is_relative_to(static_root)
            ):
                return FileResponse(candidate)
            index = static_root / "index.html"
            if not index.is_file():
                raise ApiError(404, "http-error", "no such route")
            return FileResponse(index)

    return app


def serve() -> None:
    """Entry point used by the CLI: read config from the environment."""
    import uvicorn

    port = int(os.environ.get("PORT", "8000"))
    data_dir = os.environ.get("DATA_DIR", "data")
    profile_path = os.environ.get("PROFILE_PATH")
    max_upload = int(os.environ.get("MAX_UPLOAD_MB", str(DEFAULT_MAX_UPLOAD_MB)))
    profile = load_profile(profile_path) if profile_path else None
    app = create_app(data_dir=data_dir, profile=profile, max_upload_mb=max_upload)
    uvicorn.run(app, host="0.0.0.0", port=port)
