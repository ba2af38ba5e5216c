"""Read-only HTTP face of the temporal index.

Endpoints mirror the index operations one to one and serialize through
the canonical JSON encoder, so a service response is byte-identical to
the equivalent direct library call. Parameter problems map to 400 with
a machine-readable error code; the service never mutates the index.
"""

from __future__ import annotations

import functools
import os
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Response

from .canon import canonical_json
from .errors import BadRangeError, RevhistError, UnknownFieldError
from .index import FIELDS, TemporalIndex
from .timeutil import SECONDS_PER_DAY, format_date, parse_date

DEFAULT_MAX_RANGE_DAYS = 3650


@dataclass
class ServiceConfig:
    index_dir: Path
    bind_address: str = "127.0.0.1:8377"
    max_range_days: int = DEFAULT_MAX_RANGE_DAYS
    default_granularity: str = "week"
    cors_allowed_origins: list[str] = field(default_factory=list)
    ui_dir: Path | None = None

    def __post_init__(self):
        if self.max_range_days < 1:
            raise ValueError("max_range_days must be >= 1")
        if self.default_granularity not in ("day", "week"):
            raise ValueError("default_granularity must be day|week")

    @property
    def host(self) -> str:
        return self.bind_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_address.rsplit(":", 1)[1])


def load_config(path: str | Path | None = None, **overrides) -> ServiceConfig:
    """Read the `key = value` config file; REVHIST_INDEX overrides index_dir."""
    values: dict[str, str] = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    values.update({k: v for k, v in overrides.items() if v is not None})
    env_index = os.environ.get("REVHIST_INDEX")
    index_dir = env_index or values.get("index_dir")
    if not index_dir:
        raise ValueError("index_dir is required (config, flag, or REVHIST_INDEX)")
    origins = values.get("cors_allowed_origins", "")
    ui_dir = values.get("ui_dir")
    return ServiceConfig(
        index_dir=Path(index_dir),
        bind_address=values.get("bind", "127.0.0.1:8377"),
        max_range_days=int(values.get("max_range_days", DEFAULT_MAX_RANGE_DAYS)),
        default_granularity=values.get("default_granularity", "week"),
        cors_allowed_origins=[o.strip() for o in origins.split(",") if o.strip()],
        ui_dir=Path(ui_dir) if ui_dir else None,
    )


class IndexHandle:
    """Holds the open index; reload is an atomic swap, readers keep
    whatever snapshot they already fetched."""

    def __init__(self, index_dir: Path):
        self.index_dir = index_dir
        self._index: TemporalIndex | None = None
        self._error: str | None = None
        self._lock = threading.Lock()

    def load(self):
        with self._lock:
            try:
                self._index = TemporalIndex.open(self.index_dir)
                self._error = None
            except RevhistError as exc:
                self._index = None
                self._error = str(exc)

    def reload(self):
        self.load()

    def get(self) -> TemporalIndex:
        index = self._index
        if index is None:
            raise _Unavailable(self._error or "index is opening")
        return index


class _Unavailable(Exception):
    pass


class _BadParameter(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _json(payload, status: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status,
        media_type="application/json",
    )


def _error(status: int, code: str, message: str) -> Response:
    return _json({"error": {"code": code, "message": message}}, status)


def _need(value: str | None, name: str) -> str:
    if value is None or value == "":
        raise _BadParameter("bad-parameter", f"missing required parameter {name!r}")
    return value


def _parse_day(value: str, name: str) -> int:
    try:
        return parse_date(value)
    except RevhistError:
        raise _BadParameter(
            "bad-parameter", f"parameter {name!r} must be YYYY-MM-DD, got {value!r}"
        ) from None


def _parse_bool(value: str | None, name: str) -> bool:
    if value is None or value == "" or value == "false":
        return False
    if value == "true":
        return True
    raise _BadParameter("bad-parameter", f"parameter {name!r} must be true|false")


def _range_of(from_: str | None, to: str | None, max_days: int) -> tuple[int, int]:
    start = _parse_day(_need(from_, "from"), "from")
    end = _parse_day(_need(to, "to"), "to")
    if start >= end:
        raise BadRangeError(f"'from' must precede 'to' ({from_} >= {to})")
    if (end - start) > max_days * SECONDS_PER_DAY:
        raise _BadParameter(
            "range-too-large",
            f"range exceeds the {max_days}-day cap",
        )
    return start, end


def create_app(config: ServiceConfig, *, handle: IndexHandle | None = None) -> FastAPI:
    handle = handle or IndexHandle(config.index_dir)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        handle.load()
        yield

    app = FastAPI(
        title="revhist query service", docs_url=None, redoc_url=None,
        lifespan=lifespan,
    )
    app.state.handle = handle
    app.state.config = config

    if config.cors_allowed_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_allowed_origins,
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    def guarded(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except _Unavailable as exc:
                return _error(503, "index-opening", str(exc))
            except _BadParameter as exc:
                return _error(400, exc.code, str(exc))
            except (BadRangeError, UnknownFieldError) as exc:
                return _error(400, exc.code, str(exc))
            except RevhistError as exc:
                return _error(400, exc.code, str(exc))

        return wrapper

    @app.get("/health")
    @guarded
    def health():
        index = handle.get()
        stats = index.stats()
        span = None
        if stats.time_span is not None:
            span = {
                "min": format_date(stats.time_span[0]),
                "max": format_date(stats.time_span[1]),
            }
        return _json(
            {
                "status": "ok",
                "segments": stats.segments,
                "doc_count": stats.doc_count,
                "posting_count": stats.posting_count,
                "time_span": span,
                "fields": list(FIELDS),
            }
        )

    @app.get("/timeline")
    @guarded
    def timeline(
        q: str | None = None,
        field: str = "anchor",
        granularity: str | None = None,
        from_: str | None = Query(None, alias="from"),
        to: str | None = None,
        match: str = "term",
        weighted: str | None = None,
    ):
        index = handle.get()
        time_range = _range_of(from_, to, config.max_range_days)
        if match not in ("term", "entity"):
            raise _BadParameter("bad-parameter", "match must be term|entity")
        histogram = index.query_timeline(
            _need(q, "q"),
            field=field,
            granularity=granularity or config.default_granularity,
            time_range=time_range,
            match=match,
            weighted=_parse_bool(weighted, "weighted"),
        )
        return _json(
            {"q": q, "field": field, "match": match,
             "weighted": _parse_bool(weighted, "weighted"),
             **histogram.to_payload()}
        )

    @app.get("/top-terms")
    @guarded
    def top_terms(
        q: str | None = None,
        k: str = "10",
        field: str = "anchor",
        from_: str | None = Query(None, alias="from"),
        to: str | None = None,
        match: str = "term",
    ):
        index = handle.get()
        time_range = _range_of(from_, to, config.max_range_days)
        try:
            k_val = int(k)
        except ValueError:
            raise _BadParameter("bad-parameter", f"k must be an integer, got {k!r}") from None
        if match not in ("term", "entity"):
            raise _BadParameter("bad-parameter", "match must be term|entity")
        ranking = index.top_terms(
            _need(q, "q"), time_range=time_range, k=k_val, field=field, match=match
        )
        return _json(
            {
                "q": q,
                "field": field,
                "match": match,
                "range": {
                    "from": format_date(time_range[0]),
                    "to": format_date(time_range[1]),
                },
                **ranking.to_payload(),
            }
        )

    @app.get("/cooccur")
    @guarded
    def cooccur(
        a: str | None = None,
        b: str | None = None,
        field: str = "anchor",
        granularity: str | None = None,
        from_: str | None = Query(None, alias="from"),
        to: str | None = None,
        strict: str | None = None,
        weighted: str | None = None,
    ):
        index = handle.get()
        time_range = _range_of(from_, to, config.max_range_days)
        key_a, key_b = _need(a, "a"), _need(b, "b")
        if _parse_bool(strict, "strict"):
            for key in (key_a, key_b):
                if not index.has_entity(key):
                    return _error(404, "unknown-entity", f"unknown entity {key!r}")
        result = index.co_occurrence(
            key_a, key_b,
            field=field,
            granularity=granularity or config.default_granularity,
            time_range=time_range,
            weighted=_parse_bool(weighted, "weighted"),
        )
        return _json({"field": field, **result.to_payload()})

    @app.get("/entity-search")
    @guarded
    def entity_search(prefix: str | None = None, limit: str = "20"):
        index = handle.get()
        try:
            limit_val = int(limit)
        except ValueError:
            raise _BadParameter(
                "bad-parameter", f"limit must be an integer, got {limit!r}"
            ) from None
        entries = index.entity_search(_need(prefix, "prefix"), limit=max(1, limit_val))
        return _json(
            {
                "prefix": prefix,
                "entities": [{"key": key, "postings": count} for key, count in entries],
            }
        )

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig):
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
