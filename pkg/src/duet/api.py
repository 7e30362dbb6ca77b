"""HTTP service exposing the comparison pipeline, storage, and analytics.

Every error response body carries a machine-readable `code`, a human
`message`, and, for parse failures, the diagnostics with line and column.
Diagram input is accepted either as JSON with a `plantuml` field or as
multipart form data with an `image` file that goes through the vision
gateway first.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    DuetError,
    GatewayError,
    KindMismatchError,
    MissingEnclosureError,
    MixedKindsError,
    OfflineModeError,
    PlantUmlSyntaxError,
    UnknownReferenceError,
    UnsupportedImageError,
)
from .feedback import TemplateSet, default_templates, paraphrase_feedback
from .gateway import GatewayConfig, LlmGateway, MAX_IMAGE_BYTES
from .matching import DEFAULT_THRESHOLD
from .model import DiagramKind
from .pipeline import compare_sources
from .store import ReferenceRecord, Store, SubmissionRecord

log = logging.getLogger("duet.api")

VISION_KEY_HEADER = "x-duet-vision-key"


@dataclass
class AppConfig:
    store_dir: str = "./duet-store"
    gateway: GatewayConfig = field(default_factory=GatewayConfig.from_env)
    cors_origins: tuple = ("*",)
    threshold: float = DEFAULT_THRESHOLD
    max_upload_bytes: int = MAX_IMAGE_BYTES
    ui_dir: Optional[str] = None


class _ApiProblem(Exception):
    """Internal carrier translated into an ApiError JSON response."""

    def __init__(self, status: int, code: str, message: str, diagnostics=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.diagnostics = diagnostics


def _problem_from_error(exc: DuetError) -> _ApiProblem:
    if isinstance(exc, PlantUmlSyntaxError):
        return _ApiProblem(
            400,
            "parse_error",
            str(exc),
            [d.to_dict() for d in exc.diagnostics],
        )
    if isinstance(exc, (MissingEnclosureError, MixedKindsError)):
        return _ApiProblem(400, "parse_error", str(exc))
    if isinstance(exc, KindMismatchError):
        return _ApiProblem(400, "kind_mismatch", str(exc))
    if isinstance(exc, UnknownReferenceError):
        return _ApiProblem(404, "unknown_reference", str(exc))
    if isinstance(exc, OfflineModeError):
        return _ApiProblem(409, "offline_mode", str(exc))
    if isinstance(exc, UnsupportedImageError):
        return _ApiProblem(400, "unsupported_image", str(exc))
    if isinstance(exc, GatewayError):
        return _ApiProblem(502, "gateway_error", str(exc))
    return _ApiProblem(400, "invalid_input", str(exc))


def _error_response(problem: _ApiProblem) -> JSONResponse:
    body = {"code": problem.code, "message": problem.message}
    if problem.diagnostics is not None:
        body["diagnostics"] = problem.diagnostics
    return JSONResponse(status_code=problem.status, content=body)


def create_app(
    config: Optional[AppConfig] = None,
    store: Optional[Store] = None,
    gateway: Optional[LlmGateway] = None,
    templates: Optional[TemplateSet] = None,
) -> FastAPI:
    """Build the FastAPI application; store and gateway are injectable."""
    config = config or AppConfig()
    store = store or Store(config.store_dir)
    gateway = gateway or LlmGateway(config.gateway)
    templates = templates or default_templates()

    app = FastAPI(title="duet", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(_ApiProblem)
    async def handle_problem(_request, exc: _ApiProblem):
        return _error_response(exc)

    @app.exception_handler(DuetError)
    async def handle_duet_error(_request, exc: DuetError):
        return _error_response(_problem_from_error(exc))

    def _gateway_for(request: Request) -> LlmGateway:
        # Per-request key pass-through; never logged, never stored.
        key = request.headers.get(VISION_KEY_HEADER)
        return gateway.with_vision_key(key) if key else gateway

    async def _read_diagram_source(
        request: Request, kind: Optional[DiagramKind]
    ) -> tuple:
        """Extract PlantUML text from a JSON or multipart request.

        Returns (source, fields) where fields are the other form/JSON values.
        """
        content_type = request.headers.get("content-type", "")
        body = await request.body()
        if len(body) > config.max_upload_bytes:
            raise _ApiProblem(413, "payload_too_large", "request body exceeds limit")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            fields = {k: v for k, v in form.items() if isinstance(v, str)}
            upload = form.get("image")
            if upload is None:
                raise _ApiProblem(400, "invalid_input", "multipart needs an 'image' part")
            image = await upload.read()
            if len(image) > config.max_upload_bytes:
                raise _ApiProblem(413, "image_too_large", "image exceeds size limit")
            image_kind = kind or _parse_kind(fields.get("kind"))
            result = _gateway_for(request).convert_image(image, image_kind)
            return result.plantuml, fields
        try:
            data = json.loads(body) if body else {}
        except json.JSONDecodeError as exc:
            raise _ApiProblem(400, "invalid_input", f"body is not valid JSON: {exc}")
        if "plantuml" not in data:
            raise _ApiProblem(400, "invalid_input", "missing 'plantuml' field")
        return data["plantuml"], data

    def _parse_kind(raw: Optional[str]) -> DiagramKind:
        if raw is None:
            raise _ApiProblem(400, "invalid_input", "missing 'kind' field")
        try:
            return DiagramKind(raw)
        except ValueError:
            raise _ApiProblem(
                400, "invalid_input", f"kind must be 'class' or 'er', got {raw!r}"
            ) from None

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "offline": gateway.config.offline}

    @app.get("/api/references")
    async def list_references():
        return {
            "references": [
                {
                    "id": r.id,
                    "name": r.name,
                    "kind": r.kind.value,
                    "created_at": r.created_at,
                }
                for r in store.list_references()
            ]
        }

    @app.post("/api/references", status_code=201)
    async def create_reference(request: Request):
        source, fields = await _read_diagram_source(request, kind=None)
        kind = _parse_kind(fields.get("kind"))
        name = fields.get("name", "")
        record = ReferenceRecord(id="", name=name, kind=kind, plantuml=source)
        reference_id = store.put_reference(record)
        return JSONResponse(status_code=201, content={"id": reference_id})

    def _run_submission(
        reference: ReferenceRecord,
        source: str,
        student_name: str,
        paraphrase: bool,
        request: Request,
    ) -> dict:
        result = compare_sources(
            reference.plantuml,
            source,
            reference_name=reference.name or reference.id,
            student_name=student_name,
            expected_kind=reference.kind,
            threshold=config.threshold,
            templates=templates,
        )
        feedback = result.feedback
        if paraphrase:
            feedback = paraphrase_feedback(
                feedback, _gateway_for(request), templates
            )
        record = SubmissionRecord(
            id="",
            reference_id=reference.id,
            student_plantuml=source,
            diff_report=result.report,
            tags=result.tags,
            feedback=feedback,
        )
        submission_id = store.put_submission(record)
        return {
            "submission_id": submission_id,
            "diff_report": result.report.to_dict(),
            "tags": [t.to_dict() for t in result.tags],
            "feedback": feedback.to_dict(),
        }

    @app.post("/api/references/{reference_id}/submissions")
    async def submit(reference_id: str, request: Request, paraphrase: bool = False):
        reference = store.get_reference(reference_id)
        source, fields = await _read_diagram_source(request, kind=reference.kind)
        student_name = fields.get("name", "student")
        return _run_submission(reference, source, student_name, paraphrase, request)

    @app.post("/api/references/{reference_id}/batch")
    async def batch(reference_id: str, request: Request):
        reference = store.get_reference(reference_id)
        content_type = request.headers.get("content-type", "")
        if not content_type.startswith("multipart/form-data"):
            raise _ApiProblem(400, "invalid_input", "batch upload must be multipart")
        form = await request.form()
        uploads = form.getlist("files")
        if not uploads:
            raise _ApiProblem(400, "empty_batch", "no files in batch")
        results = []
        for upload in uploads:
            filename = getattr(upload, "filename", "") or "submission.puml"
            try:
                source = (await upload.read()).decode("utf-8")
                outcome = _run_submission(
                    reference, source, filename, paraphrase=False, request=request
                )
                results.append(
                    {
                        "filename": filename,
                        "submission_id": outcome["submission_id"],
                        "differences": len(outcome["diff_report"]["differences"]),
                    }
                )
            except DuetError as exc:
                problem = _problem_from_error(exc)
                error_body = {"code": problem.code, "message": problem.message}
                if problem.diagnostics is not None:
                    error_body["diagnostics"] = problem.diagnostics
                results.append({"filename": filename, "error": error_body})
            except UnicodeDecodeError as exc:
                results.append(
                    {
                        "filename": filename,
                        "error": {"code": "invalid_input", "message": str(exc)},
                    }
                )
        return {"results": results}

    @app.get("/api/references/{reference_id}/analytics")
    async def analytics(reference_id: str):
        return store.aggregate(reference_id).to_dict()

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
