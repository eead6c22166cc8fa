"""HTTP layer over the session store.

Endpoints (all JSON except frame payloads):
  POST /sessions                        create (optional config/seed)
  GET  /sessions/{id}                   full session view
  PUT  /sessions/{id}/instructions      merge edits, optimistic revision
  POST /sessions/{id}/generate          run the engine (optional seed)
  GET  /sessions/{id}/frames            PNG or zip of PNGs, half-open range
  POST /sessions/{id}/save              persist under the data directory
  POST /sessions/load                   restore a saved session (new id)
  GET  /health                          liveness probe

Frame ranges are [from, to): a one-frame range answers image/png, anything
else a stored (uncompressed) zip of numbered PNGs with frozen metadata so
repeated fetches are byte-identical.

Handlers are plain sync functions; the framework runs them on worker
threads, which the per-session locking in the store is built for.
"""

from __future__ import annotations

import io
import logging
import zipfile
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Query, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    BusyError,
    CapacityError,
    ConflictError,
    SchemaError,
    ValidationError,
)
from .serialization import (
    config_from_dict,
    config_to_dict,
    instructions_to_dict,
    pixels_to_png_bytes,
    result_digests,
)
from .sessions import ServiceConfig, Session, SessionStore

logger = logging.getLogger("videoloom.service")

# Frozen zip entry timestamp; zip has no "no date" so pin the epoch floor.
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class CreateSessionRequest(BaseModel):
    config: Optional[dict] = None
    seed: Optional[int] = None


class PutInstructionsRequest(BaseModel):
    instructions: dict
    expected_revision: int


class GenerateRequest(BaseModel):
    seed: Optional[int] = None


class PathRequest(BaseModel):
    path: str


def _error(status: int, error: str, message: str, **extra) -> JSONResponse:
    payload = {"error": error, "message": message}
    payload.update(extra)
    return JSONResponse(status_code=status, content={"detail": payload})


def _session_view(session: Session) -> dict:
    with session.lock:
        result = session.last_result
        digests = result_digests(result) if result is not None else session.stored_digests
        return {
            "id": session.id,
            "revision": session.revision,
            "seed": session.seed,
            "busy": session.busy,
            "config": config_to_dict(session.config),
            "instructions": instructions_to_dict(session.instructions),
            "has_result": result is not None,
            "frame_count": result.raw.num_frames if result is not None else None,
            "digests": digests,
        }


def _resolve_data_path(config: ServiceConfig, name: str) -> Path:
    p = Path(name)
    if p.is_absolute() or ".." in p.parts:
        raise ValidationError(
            "path must be relative to the data directory, without '..'", path="path"
        )
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    return data_dir / p


def create_app(
    service_config: Optional[ServiceConfig] = None,
    store: Optional[SessionStore] = None,
) -> FastAPI:
    service_config = service_config or ServiceConfig()
    store = store or SessionStore(service_config)
    app = FastAPI(title="videoloom", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.service_config = service_config

    @app.exception_handler(KeyError)
    def _unknown(request, exc: KeyError):
        return _error(404, "unknown_session", str(exc.args[0]) if exc.args else "unknown session")

    @app.exception_handler(ConflictError)
    def _conflict(request, exc: ConflictError):
        return _error(409, "conflict", str(exc))

    @app.exception_handler(BusyError)
    def _busy(request, exc: BusyError):
        return _error(409, "busy", str(exc))

    @app.exception_handler(CapacityError)
    def _capacity(request, exc: CapacityError):
        return _error(
            400, "capacity", str(exc),
            cap=exc.cap, limit=exc.limit, requested=exc.requested,
        )

    @app.exception_handler(ValidationError)
    def _invalid(request, exc: ValidationError):
        return _error(422, "validation", str(exc), path=exc.path)

    @app.exception_handler(SchemaError)
    def _schema(request, exc: SchemaError):
        return _error(422, "validation", str(exc), path=exc.path)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(payload: CreateSessionRequest = Body(default=CreateSessionRequest())):
        config = None
        if payload.config is not None:
            config = config_from_dict(payload.config, "config")
        seed = 0 if payload.seed is None else payload.seed
        session = store.create(config=config, seed=seed)
        logger.info("created session %s", session.id)
        return _session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_view(store.get(session_id))

    @app.put("/sessions/{session_id}/instructions")
    def put_instructions(session_id: str, payload: PutInstructionsRequest):
        revision = store.put_instructions(
            session_id, payload.instructions, payload.expected_revision
        )
        return {"id": session_id, "revision": revision}

    @app.post("/sessions/{session_id}/generate")
    def run_generate(
        session_id: str, payload: GenerateRequest = Body(default=GenerateRequest())
    ):
        result = store.run_generate(session_id, seed_override=payload.seed)
        logger.info(
            "generated %d frames for session %s in %.3fs",
            result.raw.num_frames, session_id, result.timings["total"],
        )
        return {
            "id": session_id,
            "frame_count": result.raw.num_frames,
            "seed": result.seed,
            "lambda": result.lam,
            "timings": {k: float(v) for k, v in result.timings.items()},
            "digests": result_digests(result),
        }

    @app.get("/sessions/{session_id}/frames")
    def get_frames(
        session_id: str,
        variant: str = Query("aligned"),
        start: int = Query(0, alias="from"),
        stop: Optional[int] = Query(None, alias="to"),
    ):
        if variant not in ("raw", "aligned"):
            raise ValidationError(
                f"variant must be 'raw' or 'aligned', got {variant!r}", path="variant"
            )
        session = store.get(session_id)
        with session.lock:
            result = session.last_result
        if result is None:
            return _error(409, "no_result", "generate before fetching frames")
        stack = getattr(result, variant).frames
        n = stack.shape[0]
        if stop is None:
            stop = n
        if not (0 <= start <= stop <= n):
            raise ValidationError(
                f"range [{start}, {stop}) out of bounds for {n} frames", path="from"
            )
        if stop - start == 1:
            return Response(
                content=pixels_to_png_bytes(stack[start]), media_type="image/png"
            )
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
            for i in range(start, stop):
                info = zipfile.ZipInfo(f"{variant}_{i:03d}.png", date_time=_ZIP_EPOCH)
                zf.writestr(info, pixels_to_png_bytes(stack[i]))
        return Response(content=buf.getvalue(), media_type="application/zip")

    @app.post("/sessions/{session_id}/save")
    def save_session(session_id: str, payload: PathRequest):
        target = _resolve_data_path(service_config, payload.path)
        target.parent.mkdir(parents=True, exist_ok=True)
        saved = store.save(session_id, target)
        return {"id": session_id, "path": str(saved)}

    @app.post("/sessions/load")
    def load_session(payload: PathRequest):
        target = _resolve_data_path(service_config, payload.path)
        session = store.load(target)
        return _session_view(session)

    return app


def serve(service_config: ServiceConfig) -> None:
    """Run the API until interrupted."""
    import uvicorn

    app = create_app(service_config)
    uvicorn.run(app, host=service_config.host, port=service_config.port)
