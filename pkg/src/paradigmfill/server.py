"""HTTP/JSON front for the exercise service, plus static UI hosting.

Endpoints:

* ``GET /api/session`` -> ``{"session_id": ...}``
* ``GET /api/exercise/next?session=...&dialect=...`` -> exercise without
  its answer
* ``POST /api/exercise/{id}/answer`` with body ``{"session":..,
  "attempt":..}`` -> ``{"correct":.., "expected":.., "box":..}``
* ``GET /api/progress?session=...`` -> box counts and accuracy

Errors return status 400 (bad request) or 404 (unknown session/exercise,
exhausted session) with a ``{"error", "detail"}`` body.  Anything outside
``/api/`` is served from the optional static UI directory.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import (
    ServiceError,
    SessionExhausted,
    UnknownExercise,
    UnknownSession,
)
from .exercises import Exercise, ExerciseService

logger = logging.getLogger(__name__)

_ERROR_CODES = {
    "unknown_session": 404,
    "unknown_exercise": 404,
    "session_exhausted": 404,
    "bad_request": 400,
}


class _ApiError(Exception):
    def __init__(self, error: str, detail: str):
        super().__init__(detail)
        self.error = error
        self.detail = detail
        self.status = _ERROR_CODES[error]


def _translate(err: ServiceError) -> _ApiError:
    if isinstance(err, UnknownSession):
        return _ApiError("unknown_session", str(err))
    if isinstance(err, UnknownExercise):
        return _ApiError("unknown_exercise", str(err))
    if isinstance(err, SessionExhausted):
        return _ApiError("session_exhausted", str(err))
    return _ApiError("bad_request", str(err))


class DrillApi:
    """Transport-independent request handling, easy to exercise in tests."""

    def __init__(self, service: ExerciseService):
        self.service = service

    def get(self, path: str, params: dict[str, str]) -> tuple[int, dict]:
        try:
            if path == "/api/session":
                return 200, {"session_id": self.service.create_session()}
            if path == "/api/exercise/next":
                session = self._require(params, "session")
                exercise = self.service.next_exercise(
                    session, params.get("dialect")
                )
                return 200, exercise.public_view()
            if path == "/api/progress":
                session = self._require(params, "session")
                return 200, self.service.progress(session)
            raise _ApiError("bad_request", f"no such endpoint: {path}")
        except _ApiError as err:
            return err.status, {"error": err.error, "detail": err.detail}
        except ServiceError as err:
            translated = _translate(err)
            return translated.status, {
                "error": translated.error,
                "detail": translated.detail,
            }

    def post(self, path: str, body: bytes) -> tuple[int, dict]:
        try:
            parts = path.strip("/").split("/")
            if (
                len(parts) == 4
                and parts[0] == "api"
                and parts[1] == "exercise"
                and parts[3] == "answer"
            ):
                exercise_id = parts[2]
                try:
                    payload = json.loads(body.decode("utf-8"))
                except (ValueError, UnicodeDecodeError):
                    raise _ApiError("bad_request", "body must be JSON")
                if not isinstance(payload, dict):
                    raise _ApiError("bad_request", "body must be a JSON object")
                session = payload.get("session")
                attempt = payload.get("attempt")
                if not isinstance(session, str) or not isinstance(attempt, str):
                    raise _ApiError(
                        "bad_request",
                        "body needs string fields 'session' and 'attempt'",
                    )
                return 200, self.service.check_answer(
                    session, exercise_id, attempt
                )
            raise _ApiError("bad_request", f"no such endpoint: {path}")
        except _ApiError as err:
            return err.status, {"error": err.error, "detail": err.detail}
        except ServiceError as err:
            translated = _translate(err)
            return translated.status, {
                "error": translated.error,
                "detail": translated.detail,
            }

    @staticmethod
    def _require(params: dict[str, str], name: str) -> str:
        value = params.get(name)
        if not value:
            raise _ApiError("bad_request", f"missing query parameter {name!r}")
        return value


def _make_handler(api: DrillApi, ui_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, format, *args):  # noqa: A002 - stdlib signature
            logger.debug("%s - %s", self.address_string(), format % args)

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _serve_static(self, path: str) -> None:
            if ui_dir is None:
                self._send_json(
                    404, {"error": "bad_request", "detail": "no UI bundled"}
                )
                return
            relative = path.lstrip("/") or "index.html"
            target = (ui_dir / relative).resolve()
            if not str(target).startswith(str(ui_dir.resolve())) or (
                not target.is_file()
            ):
                self._send_json(
                    404, {"error": "bad_request", "detail": "not found"}
                )
                return
            content = target.read_bytes()
            ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(content)))
            self.end_headers()
            self.wfile.write(content)

        def do_GET(self):  # noqa: N802 - stdlib casing
            parsed = urlparse(self.path)
            if parsed.path.startswith("/api/") or parsed.path == "/api":
                params = {
                    key: values[0]
                    for key, values in parse_qs(parsed.query).items()
                }
                status, payload = api.get(parsed.path, params)
                self._send_json(status, payload)
            else:
                self._serve_static(parsed.path)

        def do_POST(self):  # noqa: N802 - stdlib casing
            parsed = urlparse(self.path)
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length) if length else b""
            status, payload = api.post(parsed.path, body)
            self._send_json(status, payload)

    return Handler


class DrillServer:
    def __init__(
        self,
        exercises: list[Exercise],
        port: int = 0,
        ui_dir: Path | str | None = None,
        snapshot: Path | str | None = None,
    ):
        self.service = ExerciseService(exercises)
        self.snapshot = Path(snapshot) if snapshot else None
        if self.snapshot and self.snapshot.exists():
            self.service.load_snapshot(self.snapshot)
        api = DrillApi(self.service)
        handler = _make_handler(
            api, Path(ui_dir) if ui_dir else None
        )
        self.httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
        self.port = self.httpd.server_address[1]
        self._closed = False

    def serve_forever(self):
        try:
            self.httpd.serve_forever()
        finally:
            self.close()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        thread.start()
        return thread

    def close(self):
        if self._closed:
            return
        self._closed = True
        if self.snapshot:
            self.service.save_snapshot(self.snapshot)
        self.httpd.server_close()
