"""Chat-completion HTTP client shared by the generator, judge and model adapters."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import requests

from ..core import GroundProbeError

log = logging.getLogger(__name__)

ENV_PREFIX = "GROUNDPROBE_LLM_"


class BackendUnavailable(GroundProbeError):
    """The endpoint could not be reached or kept failing after retries."""


class BackendRejected(GroundProbeError):
    """The endpoint answered with a non-retryable client error (4xx)."""

    def __init__(self, message: str, status: int, body: str = ""):
        super().__init__(message)
        self.status = status
        self.body = body


@dataclass(frozen=True)
class LLMConfig:
    url: str = "http://localhost:8000/v1"
    model: str = "gpt-4o-mini"
    api_key: str = field(default="", repr=False)
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_s: float = 0.5
    max_in_flight: int = 8

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict[str, str] | None = None, **overrides) -> LLMConfig:
        """File values, then ``GROUNDPROBE_LLM_*`` env vars, then explicit overrides.

        The API key is only read from the environment (``GROUNDPROBE_LLM_API_KEY``)
        or an override, never from the file.
        """
        env = os.environ if env is None else env
        values: dict[str, Any] = {}
        if path:
            raw = json.loads(Path(path).read_text())
            raw = raw.get("llm", raw)
            raw.pop("api_key", None)
            values.update(raw)
        for f in fields(cls):
            key = ENV_PREFIX + f.name.upper()
            if key in env:
                values[f.name] = _cast(f.default, env[key])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _cast(default: Any, raw: str) -> Any:
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


Message = dict[str, Any]


class ChatClient:
    """Thread-safe chat-completion client with retries and an in-flight cap."""

    def __init__(self, config: LLMConfig, session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(config.max_in_flight)
        self._lock = threading.Lock()
        self.request_count = 0

    @property
    def endpoint(self) -> str:
        return self.config.url.rstrip("/") + "/chat/completions"

    def with_model(self, model: str) -> ChatClient:
        return ChatClient(replace(self.config, model=model), self._session)

    def complete(self, messages: Sequence[Message], extra: dict[str, Any] | None = None) -> str:
        payload: dict[str, Any] = {
            "model": self.config.model,
            "messages": list(messages),
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        if extra:
            payload.update(extra)
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"

        last_error: Exception | None = None
        for attempt in range(self.config.max_retries):
            if attempt:
                time.sleep(self.config.backoff_s * 2 ** (attempt - 1))
            with self._slots:
                with self._lock:
                    self.request_count += 1
                try:
                    resp = self._session.post(
                        self.endpoint, json=payload, headers=headers, timeout=self.config.timeout_s
                    )
                except requests.RequestException as exc:
                    last_error = exc
                    log.warning("request to %s failed (attempt %d): %s", self.endpoint, attempt + 1, exc)
                    continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = RuntimeError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                log.warning("%s returned %d (attempt %d)", self.endpoint, resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise BackendRejected(
                    f"{self.endpoint} returned {resp.status_code}", resp.status_code, resp.text
                )
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                last_error = exc
                continue
        raise BackendUnavailable(
            f"{self.endpoint} failed after {self.config.max_retries} attempts: {last_error}"
        )
