"""Request transports: live HTTP, recording, and fixture replay.

A transport exposes one method, ``fetch_raw(endpoint, params) ->
(status, payload)``; ``perform`` wraps it and maps error statuses to
typed exceptions so callers never branch on numbers. Endpoint names
are symbolic and double as the fixture key, which keeps recorded runs
independent of URL details.
"""

from __future__ import annotations

import string
import threading
import time
from typing import Dict, Optional, Tuple

import requests

from ..errors import NotFoundError, RateLimitError, ReplayMissError, TransportError
from .fixtures import FixtureStore

API_BASE = "https://api.github.com"

# Path placeholders are consumed from params; the rest travel as the
# query string.
_ENDPOINTS = {
    "search_issues": "/search/issues",
    "get_issue": "/repos/{owner}/{repo}/issues/{number}",
    "list_comments": "/repos/{owner}/{repo}/issues/{number}/comments",
    "get_pull": "/repos/{owner}/{repo}/pulls/{number}",
    "get_pull_files": "/repos/{owner}/{repo}/pulls/{number}/files",
    "get_commit": "/repos/{owner}/{repo}/commits/{sha}",
    "get_repo": "/repos/{owner}/{repo}",
    "get_tree": "/repos/{owner}/{repo}/git/trees/{ref}",
    "get_file_content": "/repos/{owner}/{repo}/contents/{path}",
}

_RETRYABLE = {500, 502, 503, 504}

# documented budgets: ~30 searches/minute, 5000 core calls/hour
SEARCH_QUOTA = (30, 60.0)
CORE_QUOTA = (5000, 3600.0)


class TokenBucket:
    """Continuously refilling token bucket; acquire() blocks until a
    token is available, via the injected sleeper."""

    def __init__(self, capacity, interval, *, clock=time.monotonic, sleeper=time.sleep):
        self.capacity = float(capacity)
        self.rate = float(capacity) / float(interval)
        self._tokens = float(capacity)
        self._clock = clock
        self._sleep = sleeper
        self._stamp = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


def _payload_message(payload) -> str:
    if isinstance(payload, dict):
        return str(payload.get("message", ""))
    return ""


def perform(transport, endpoint: str, params: Dict[str, str]):
    """Run one request and return the payload, or raise the typed error
    the recorded/live status maps to."""
    status, payload = transport.fetch_raw(endpoint, params)
    if 200 <= status < 300:
        return payload
    if status == 404:
        raise NotFoundError(f"{endpoint} {params}: not found")
    message = _payload_message(payload)
    if status == 429 or (status == 403 and "rate limit" in message.lower()):
        raise RateLimitError(message or f"{endpoint}: rate limited")
    raise TransportError(f"{endpoint} failed with status {status}: {message}")


class LiveTransport:
    """Real HTTP against the platform API with client-side rate
    limiting and bounded retries for transient failures."""

    def __init__(
        self,
        *,
        token: Optional[str] = None,
        base_url: str = API_BASE,
        session=None,
        search_bucket: Optional[TokenBucket] = None,
        core_bucket: Optional[TokenBucket] = None,
        max_retries: int = 3,
        sleeper=time.sleep,
        timeout: float = 30.0,
    ):
        self._token = token
        self._base_url = base_url.rstrip("/")
        self._session = session if session is not None else requests.Session()
        self._search_bucket = search_bucket or TokenBucket(*SEARCH_QUOTA)
        self._core_bucket = core_bucket or TokenBucket(*CORE_QUOTA)
        self._max_retries = max_retries
        self._sleep = sleeper
        self._timeout = timeout

    def fetch_raw(self, endpoint: str, params: Dict[str, str]) -> Tuple[int, object]:
        template = _ENDPOINTS[endpoint]
        path_fields = {
            name for _, name, _, _ in string.Formatter().parse(template) if name
        }
        url = self._base_url + template.format(**{k: params[k] for k in path_fields})
        query = {k: v for k, v in params.items() if k not in path_fields}
        headers = {"Accept": "application/vnd.github+json"}
        if self._token:
            headers["Authorization"] = f"Bearer {self._token}"
        bucket = self._search_bucket if endpoint == "search_issues" else self._core_bucket

        attempt = 0
        while True:
            bucket.acquire()
            try:
                response = self._session.get(
                    url, params=query, headers=headers, timeout=self._timeout
                )
            except requests.RequestException as exc:
                if attempt >= self._max_retries:
                    raise TransportError(f"{endpoint}: {exc}") from exc
                self._sleep(2.0 ** attempt)
                attempt += 1
                continue
            status = response.status_code
            if status in _RETRYABLE:
                if attempt >= self._max_retries:
                    raise TransportError(f"{endpoint} failed with status {status}")
                self._sleep(2.0 ** attempt)
                attempt += 1
                continue
            payload = _safe_json(response)
            if status in (403, 429):
                retry_after = response.headers.get("Retry-After")
                message = _payload_message(payload)
                if status == 429 or retry_after is not None or "rate limit" in message.lower():
                    raise RateLimitError(
                        message or f"{endpoint}: rate limited",
                        retry_after=float(retry_after) if retry_after else None,
                    )
            return status, payload


def _safe_json(response):
    try:
        return response.json()
    except ValueError:
        return {}


class RecordingTransport:
    """Pass-through that persists every response into a fixture store."""

    def __init__(self, inner, store: FixtureStore):
        self._inner = inner
        self._store = store

    def fetch_raw(self, endpoint: str, params: Dict[str, str]) -> Tuple[int, object]:
        status, payload = self._inner.fetch_raw(endpoint, params)
        self._store.record(endpoint, params, status, payload)
        return status, payload


class ReplayTransport:
    """Serves recorded fixtures only; a request without a recording is
    an error, never a network call."""

    def __init__(self, store: FixtureStore):
        self._store = store

    def fetch_raw(self, endpoint: str, params: Dict[str, str]) -> Tuple[int, object]:
        found = self._store.lookup(endpoint, params)
        if found is None:
            raise ReplayMissError(
                f"no fixture recorded for {endpoint} {dict(params)}",
                endpoint=endpoint,
                params=dict(params),
            )
        return found
