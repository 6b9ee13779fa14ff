"""HTTP client plumbing for drivers of the service.

The simulator and the contract tests talk to the service exclusively
through ``httpx``; for in-process runs ``SyncASGITransport`` carries the
requests through the full ASGI stack (routing, serialization, status
mapping) without a socket, so nothing short-circuits the HTTP boundary.
"""

from __future__ import annotations

import asyncio
from typing import Optional

import httpx

from .errors import AuthError, ConflictError, CorpusForgeError, Forbidden, InputError


class SyncASGITransport(httpx.BaseTransport):
    """Run an ASGI app behind a synchronous httpx.Client.

    One private event loop per transport; create one transport per thread
    when driving the app concurrently.
    """

    def __init__(self, app) -> None:
        self._inner = httpx.ASGITransport(app=app)
        self._loop = asyncio.new_event_loop()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        response = self._loop.run_until_complete(
            self._inner.handle_async_request(request)
        )
        content = self._loop.run_until_complete(response.aread())
        return httpx.Response(
            response.status_code,
            headers=response.headers,
            content=content,
            extensions=response.extensions,
        )

    def close(self) -> None:
        self._loop.run_until_complete(self._inner.aclose())
        self._loop.close()


def client_for_app(app) -> httpx.Client:
    return httpx.Client(
        transport=SyncASGITransport(app), base_url="http://corpusforge.local"
    )


_ERROR_BY_STATUS = {
    400: InputError,
    401: AuthError,
    403: Forbidden,
    409: ConflictError,
}


class ApiError(CorpusForgeError):
    def __init__(self, status_code: int, message: str) -> None:
        super().__init__(f"HTTP {status_code}: {message}")
        self.status_code = status_code


def raise_for_status(response: httpx.Response) -> None:
    if response.status_code < 400:
        return
    try:
        message = response.json().get("error", response.text)
    except ValueError:
        message = response.text
    error_type = _ERROR_BY_STATUS.get(response.status_code)
    if error_type is not None:
        raise error_type(message)
    raise ApiError(response.status_code, message)


class ApiClient:
    """Typed convenience wrapper over the v1 endpoints."""

    def __init__(self, http: httpx.Client, token: Optional[str] = None) -> None:
        self.http = http
        self.token = token

    def _headers(self) -> dict[str, str]:
        if self.token is None:
            return {}
        return {"Authorization": f"Bearer {self.token}"}

    def register(self, name: str, langs: list[str]) -> dict:
        response = self.http.post(
            "/v1/workers", json={"name": name, "langs": langs}
        )
        raise_for_status(response)
        payload = response.json()
        self.token = payload["token"]
        return payload

    def next_task(self, kind: str) -> Optional[dict]:
        response = self.http.get(
            "/v1/tasks/next", params={"kind": kind}, headers=self._headers()
        )
        if response.status_code == 204:
            return None
        raise_for_status(response)
        return response.json()

    def submit_translation(self, task_id: int, text: str, elapsed_ms: int) -> dict:
        response = self.http.post(
            f"/v1/tasks/{task_id}/translation",
            json={"text": text, "elapsed_ms": elapsed_ms},
            headers=self._headers(),
        )
        raise_for_status(response)
        return response.json()

    def submit_verdict(
        self, assignment_id: int, verdict: str, elapsed_ms: int
    ) -> dict:
        response = self.http.post(
            f"/v1/assignments/{assignment_id}/verdict",
            json={"verdict": verdict, "elapsed_ms": elapsed_ms},
            headers=self._headers(),
        )
        raise_for_status(response)
        return response.json()

    def get_exam(self, direction: str) -> dict:
        response = self.http.get(
            f"/v1/exam/{direction}", headers=self._headers()
        )
        raise_for_status(response)
        return response.json()

    def submit_exam(self, direction: str, version: str, answers: list[str]) -> dict:
        response = self.http.post(
            f"/v1/exam/{direction}/answers",
            json={"version": version, "answers": answers},
            headers=self._headers(),
        )
        raise_for_status(response)
        return response.json()

    def funnel(self) -> dict:
        response = self.http.get("/v1/stats/funnel")
        raise_for_status(response)
        return response.json()

    def cost(self) -> dict:
        response = self.http.get("/v1/cost")
        raise_for_status(response)
        return response.json()

    def upload_sources(self, direction: str, origin: str, lines: list[str]) -> dict:
        response = self.http.post(
            "/v1/sources",
            json={"direction": direction, "origin": origin, "lines": lines},
        )
        raise_for_status(response)
        return response.json()

    def export(self, direction: str, format: str = "jsonl") -> bytes:
        response = self.http.get(
            "/v1/export", params={"direction": direction, "format": format}
        )
        raise_for_status(response)
        return response.content
