"""HTTP facade over the pipeline.

Every endpoint is a thin adapter: parse JSON, call the owning module,
serialize the answer. Behavior differences between direct module calls and
HTTP calls are limited to serialization and the status mapping below:

    validation 400 - auth 401 - permission 403 - conflict 409 -
    no task available 204
"""

from __future__ import annotations

import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional

from starlette.applications import Starlette
from starlette.requests import Request
from starlette.responses import JSONResponse, Response
from starlette.routing import Route

from . import exam as exam_mod
from . import ingest as ingest_mod
from .engine import TaskEngine
from .errors import (
    AuthError,
    ConflictError,
    CorpusForgeError,
    ConfigError,
    Forbidden,
    InputError,
)
from .langid import Detector
from .ledger import PriceSheet
from .quality import KIND_TRANSLATE, KIND_VERIFY, QCConfig
from .store import Direction, DEFAULT_DIRECTIONS, Store, Worker

CONFIG_ENV_VAR = "CORPUSFORGE_CONFIG"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8800
    store_path: Optional[str] = None
    profile_dir: Optional[str] = None
    directions: tuple[str, ...] = tuple(d.code for d in DEFAULT_DIRECTIONS)
    length_ratio_max: float = 3.0
    fast_ms_translate: int = 10_000
    fast_ms_verify: int = 3_000
    fast_min_occurrences: int = 3
    langid_margin: float = 0.05
    per_translation: Decimal = Decimal("0.02")
    per_verdict_set: Decimal = Decimal("0.01")
    translate_deadline_s: float = 1800.0
    verify_deadline_s: float = 600.0
    exam_pass_threshold: int = 8
    requester_enabled: bool = True
    ui_dir: Optional[str] = None

    def qc(self) -> QCConfig:
        return QCConfig(
            length_ratio_max=self.length_ratio_max,
            fast_ms={
                KIND_TRANSLATE: self.fast_ms_translate,
                KIND_VERIFY: self.fast_ms_verify,
            },
            fast_min_occurrences=self.fast_min_occurrences,
            langid_margin=self.langid_margin,
        )

    def prices(self) -> PriceSheet:
        return PriceSheet(
            per_translation=self.per_translation,
            per_verdict_set=self.per_verdict_set,
        )


_CONFIG_KEYS = {
    "listen.host": ("host", str),
    "listen.port": ("port", int),
    "store.path": ("store_path", str),
    "langid.profile_dir": ("profile_dir", str),
    "qc.length_ratio_max": ("length_ratio_max", float),
    "qc.fast_ms.translate": ("fast_ms_translate", int),
    "qc.fast_ms.verify": ("fast_ms_verify", int),
    "qc.fast_min_occurrences": ("fast_min_occurrences", int),
    "qc.langid_margin": ("langid_margin", float),
    "prices.per_translation": ("per_translation", Decimal),
    "prices.per_verdict_set": ("per_verdict_set", Decimal),
    "deadlines.translate_s": ("translate_deadline_s", float),
    "deadlines.verify_s": ("verify_deadline_s", float),
    "exam.pass_threshold": ("exam_pass_threshold", int),
    "requester.enabled": ("requester_enabled", bool),
    "ui.dir": ("ui_dir", str),
}


def parse_config(text: str) -> ServiceConfig:
    """Parse the flat ``key = value`` config format."""
    values = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_no}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "directions":
            codes = tuple(code.strip() for code in value.split(",") if code.strip())
            for code in codes:
                Direction.parse(code)
            values["directions"] = codes
            continue
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {line_no}: unknown key {key!r}")
        name, cast = _CONFIG_KEYS[key]
        try:
            if cast is bool:
                if value.lower() not in ("true", "false"):
                    raise ValueError(value)
                values[name] = value.lower() == "true"
            else:
                values[name] = cast(value)
        except (ValueError, InvalidOperation) as exc:
            raise ConfigError(
                f"config line {line_no}: bad value for {key}: {value!r}"
            ) from exc
    return ServiceConfig(**values)


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"))


@dataclass
class AppContext:
    store: Store
    engine: TaskEngine
    detector: Detector
    config: ServiceConfig = field(default_factory=ServiceConfig)


def build_context(
    detector: Detector,
    config: ServiceConfig = ServiceConfig(),
    store: Optional[Store] = None,
    clock=None,
) -> AppContext:
    directions = [Direction.parse(code) for code in config.directions]
    for direction in directions:
        for lang in (direction.src_lang, direction.tgt_lang):
            if not detector.has(lang):
                raise ConfigError(
                    f"direction {direction.code} needs a language profile "
                    f"for {lang!r}"
                )
    if store is None:
        if config.store_path and Path(config.store_path).exists():
            store = Store.load(config.store_path, clock=clock)
        else:
            store = Store(
                directions=directions, prices=config.prices(), clock=clock
            )
    engine = TaskEngine(
        store=store,
        detector=detector,
        qc=config.qc(),
        translate_deadline_s=config.translate_deadline_s,
        verify_deadline_s=config.verify_deadline_s,
        exam_pass_threshold=config.exam_pass_threshold,
    )
    return AppContext(store=store, engine=engine, detector=detector, config=config)


# ----------------------------------------------------------------------
# request helpers


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise InputError("request body must be a JSON object")
    return body


def _require_worker(request: Request) -> Worker:
    header = request.headers.get("authorization", "")
    if not header.lower().startswith("bearer "):
        raise AuthError("missing bearer token")
    token = header[7:].strip()
    worker = request.app.state.ctx.store.worker_by_token(token)
    if worker is None:
        raise AuthError("unknown or expired token")
    return worker


def _require_requester(request: Request) -> None:
    if not request.app.state.ctx.config.requester_enabled:
        raise Forbidden("requester endpoints are disabled by configuration")


def _field(body: dict, name: str, kind: type, optional: bool = False):
    if name not in body:
        if optional:
            return None
        raise InputError(f"missing field {name!r}")
    value = body[name]
    if kind is int and isinstance(value, bool):
        raise InputError(f"field {name!r} must be an integer")
    if not isinstance(value, kind):
        raise InputError(f"field {name!r} must be {kind.__name__}")
    return value


# ----------------------------------------------------------------------
# handlers


async def register_worker(request: Request) -> JSONResponse:
    body = await _json_body(request)
    name = _field(body, "name", str)
    langs = _field(body, "langs", list)
    if not all(isinstance(lang, str) and lang for lang in langs):
        raise InputError("langs must be non-empty strings")
    ctx = request.app.state.ctx
    worker = ctx.store.add_worker(name, langs)
    return JSONResponse(
        {
            "worker_id": worker.id,
            "token": worker.token,
            "expires_at": worker.token_expires_at,
        },
        status_code=201,
    )


async def next_task(request: Request) -> Response:
    worker = _require_worker(request)
    kind = request.query_params.get("kind", KIND_TRANSLATE)
    offer = request.app.state.ctx.engine.assign_next(worker.id, kind)
    if offer is None:
        return Response(status_code=204)
    payload = {"kind": offer.kind, "direction": offer.direction,
               "instruction": offer.instruction,
               "source_text": offer.source_text, "deadline": offer.deadline}
    if offer.kind == KIND_TRANSLATE:
        payload["task_id"] = offer.task_id
    else:
        payload["assignment_id"] = offer.assignment_id
        payload["candidate_text"] = offer.candidate_text
    return JSONResponse(payload)


async def submit_translation(request: Request) -> JSONResponse:
    worker = _require_worker(request)
    body = await _json_body(request)
    text = _field(body, "text", str)
    elapsed_ms = _field(body, "elapsed_ms", int)
    task_id = _path_int(request, "task_id")
    outcome = request.app.state.ctx.engine.submit_translation(
        task_id, worker.id, text, elapsed_ms
    )
    payload = {"outcome": outcome.status}
    if outcome.reason:
        payload["reason"] = outcome.reason
    return JSONResponse(payload)


async def submit_verdict(request: Request) -> JSONResponse:
    worker = _require_worker(request)
    body = await _json_body(request)
    verdict = _field(body, "verdict", str)
    elapsed_ms = _field(body, "elapsed_ms", int)
    assignment_id = _path_int(request, "assignment_id")
    outcome = request.app.state.ctx.engine.submit_verdict(
        assignment_id, worker.id, verdict, elapsed_ms
    )
    payload = {"outcome": outcome.status}
    if outcome.result:
        payload["result"] = outcome.result
    return JSONResponse(payload)


async def get_exam(request: Request) -> JSONResponse:
    worker = _require_worker(request)
    ctx = request.app.state.ctx
    direction = request.path_params["direction"]
    ctx.store.direction(direction)
    form = ctx.store.active_exam(direction)
    if form is None:
        raise InputError(f"no exam is installed for {direction}")
    return JSONResponse(
        {
            "direction": direction,
            "version": form.version,
            "pass_threshold": ctx.config.exam_pass_threshold,
            "already_passed": direction in worker.passed_exams,
            "items": [{"src": item.src, "tgt": item.tgt} for item in form.items],
        }
    )


async def grade_exam(request: Request) -> JSONResponse:
    worker = _require_worker(request)
    ctx = request.app.state.ctx
    direction = request.path_params["direction"]
    ctx.store.direction(direction)
    body = await _json_body(request)
    version = _field(body, "version", str, optional=True)
    answers = _field(body, "answers", list)
    form = ctx.store.active_exam(direction)
    if form is None:
        raise InputError(f"no exam is installed for {direction}")
    if version is not None and version != form.version:
        raise ConflictError(
            f"exam version {version!r} is no longer active (now {form.version!r})"
        )
    result = exam_mod.grade_exam(
        form,
        answers,
        pass_threshold=ctx.config.exam_pass_threshold,
        worker_id=worker.id,
        taken_at=ctx.store.clock(),
    )
    ctx.store.record_exam_result(result)
    return JSONResponse({"score": result.score, "passed": result.passed})


async def funnel_stats(request: Request) -> JSONResponse:
    _require_requester(request)
    ctx = request.app.state.ctx
    payload = ctx.store.funnel_stats().as_dict()
    payload["flags_raised"] = ctx.store.flags_raised()
    return JSONResponse(payload)


async def export_corpus(request: Request) -> Response:
    _require_requester(request)
    ctx = request.app.state.ctx
    direction = request.query_params.get("direction")
    if not direction:
        raise InputError("missing direction parameter")
    format = request.query_params.get("format", "jsonl")
    include_pending = request.query_params.get("include_pending") == "true"
    body = ctx.store.export_corpus(direction, format, include_pending)
    media = "application/x-ndjson" if format == "jsonl" else "text/tab-separated-values"
    return Response(content=body, media_type=f"{media}; charset=utf-8")


async def cost_totals(request: Request) -> JSONResponse:
    _require_requester(request)
    ledger = request.app.state.ctx.store.ledger
    totals = {k: str(v) for k, v in ledger.totals().items()}
    payload = {"totals": totals}
    if request.query_params.get("by") == "worker":
        payload["by_worker"] = {
            str(worker_id): str(amount)
            for worker_id, amount in sorted(ledger.totals_by_worker().items())
        }
    return JSONResponse(payload)


async def upload_sources(request: Request) -> JSONResponse:
    _require_requester(request)
    ctx = request.app.state.ctx
    body = await _json_body(request)
    direction_code = _field(body, "direction", str)
    origin = _field(body, "origin", str)
    lines = _field(body, "lines", list)
    if not all(isinstance(line, str) for line in lines):
        raise InputError("lines must be strings")
    direction = ctx.store.direction(direction_code)
    with ctx.store.lock:
        before = set(ctx.store.sources)
        report = ingest_mod.ingest(
            ctx.store,
            [ingest_mod.RawLine(text=line, origin=origin) for line in lines],
            direction.src_lang,
            ctx.detector,
        )
        new_ids = sorted(set(ctx.store.sources) - before)
        tasks = ctx.engine.create_translation_tasks(new_ids, direction)
    return JSONResponse(
        {"report": report.as_dict(), "tasks_created": len(tasks)}
    )


def _path_int(request: Request, name: str) -> int:
    try:
        return int(request.path_params[name])
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad path parameter {name!r}") from exc


# ----------------------------------------------------------------------
# app assembly


def http_route_table() -> list[Route]:
    """The service's declared endpoints; behavior lives in other modules."""
    return [
        Route("/v1/workers", register_worker, methods=["POST"]),
        Route("/v1/tasks/next", next_task, methods=["GET"]),
        Route("/v1/tasks/{task_id}/translation", submit_translation,
              methods=["POST"]),
        Route("/v1/assignments/{assignment_id}/verdict", submit_verdict,
              methods=["POST"]),
        Route("/v1/exam/{direction}", get_exam, methods=["GET"]),
        Route("/v1/exam/{direction}/answers", grade_exam, methods=["POST"]),
        Route("/v1/stats/funnel", funnel_stats, methods=["GET"]),
        Route("/v1/export", export_corpus, methods=["GET"]),
        Route("/v1/cost", cost_totals, methods=["GET"]),
        Route("/v1/sources", upload_sources, methods=["POST"]),
    ]


_STATUS_BY_ERROR = [
    (AuthError, 401),
    (Forbidden, 403),
    (ConflictError, 409),
    (InputError, 400),
    (ConfigError, 500),
]


def _error_response(request: Request, exc: Exception) -> JSONResponse:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return JSONResponse({"error": str(exc)}, status_code=status)
    return JSONResponse({"error": str(exc)}, status_code=500)


def create_app(ctx: AppContext) -> Starlette:
    routes = http_route_table()
    if ctx.config.ui_dir and Path(ctx.config.ui_dir).is_dir():
        from starlette.staticfiles import StaticFiles
        from starlette.routing import Mount

        routes = routes + [
            Mount("/", app=StaticFiles(directory=ctx.config.ui_dir, html=True)),
        ]

    @asynccontextmanager
    async def lifespan(app: Starlette):
        yield
        if ctx.config.store_path:
            ctx.store.save(ctx.config.store_path)

    app = Starlette(
        routes=routes,
        exception_handlers={CorpusForgeError: _error_response},
        lifespan=lifespan,
    )
    app.state.ctx = ctx
    return app


def serve(config: ServiceConfig, detector: Detector) -> None:
    """Run the HTTP service until interrupted; saves the store on exit."""
    import uvicorn

    ctx = build_context(detector, config)
    app = create_app(ctx)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
