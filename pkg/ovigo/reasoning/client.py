"""Chat-completion clients: a live OpenAI-compatible one and deterministic stand-ins for tests and fixtures."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from collections.abc import Callable, Mapping, Sequence
from types import MappingProxyType
from typing import Protocol

import requests

from ovigo.models.errors import ChatTransportError, ParseError, UnexpectedRequest
from ovigo.models.reasoning import ChatMessage, TranscriptEntry

logger = logging.getLogger(__name__)


class ChatClient(Protocol):
    def send(self, messages: Sequence[ChatMessage], *, stage: str = "") -> str: ...


def request_digest(messages: Sequence[ChatMessage]) -> str:
    canonical = json.dumps([m.to_dict() for m in messages], sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class OpenAIChatClient:
    """POSTs to an OpenAI-compatible chat-completions endpoint.

    Transport failures (connection errors, HTTP 429 and 5xx) are retried with
    exponential backoff; anything else fails immediately.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key: str | None = None,
        temperature: float = 0.0,
        max_retries: int = 3,
        timeout: float = 60.0,
        backoff: float = 0.5,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.max_retries = max(1, max_retries)
        self.timeout = timeout
        self.backoff = backoff
        self._api_key = api_key
        self._session = session or requests.Session()
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def send(self, messages: Sequence[ChatMessage], *, stage: str = "") -> str:
        body = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [m.to_dict() for m in messages],
        }
        last_error = ""
        for attempt in range(self.max_retries):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._session.post(self.endpoint, json=body, headers=self._headers(), timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = str(exc)
                logger.warning("Chat request for %s failed (attempt %d): %s", stage or "?", attempt + 1, exc)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                logger.warning("Chat endpoint returned %s for %s (attempt %d)", last_error, stage or "?", attempt + 1)
                continue
            if response.status_code >= 400:
                msg = f"Chat endpoint rejected the request: HTTP {response.status_code}"
                raise ChatTransportError(msg, stage=stage)
            return self._content(response, stage)
        raise ChatTransportError(f"Chat request failed after {self.max_retries} attempts: {last_error}", stage=stage)

    @staticmethod
    def _content(response: requests.Response, stage: str) -> str:
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ChatTransportError(f"Malformed chat completion payload: {exc}", stage=stage) from exc
        if not isinstance(content, str):
            raise ChatTransportError("Chat completion content is not text", stage=stage)
        return content


class ScriptedChatClient:
    """Replays responses keyed by request digest and refuses anything unscripted."""

    def __init__(self, responses: Mapping[str, str]) -> None:
        self._responses: Mapping[str, str] = MappingProxyType(dict(responses))

    def __len__(self) -> int:
        return len(self._responses)

    @classmethod
    def from_jsonl(cls, text: str, source: str = "<transcript>") -> ScriptedChatClient:
        responses: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                responses[str(row["request_digest"])] = str(row["response_text"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{source}:{lineno}: not a transcript row ({exc})", path=source, line=lineno) from exc
        return cls(responses)

    def send(self, messages: Sequence[ChatMessage], *, stage: str = "") -> str:
        digest = request_digest(messages)
        try:
            return self._responses[digest]
        except KeyError:
            raise UnexpectedRequest(
                f"No scripted response for {stage or 'request'} ({digest[:12]})", stage=stage, digest=digest
            ) from None


class PolicyChatClient:
    """Answers through a callable of (stage, messages); used to author transcripts."""

    def __init__(self, policy: Callable[[str, Sequence[ChatMessage]], str]) -> None:
        self._policy = policy

    def send(self, messages: Sequence[ChatMessage], *, stage: str = "") -> str:
        return self._policy(stage, messages)


class RecordingChatClient:
    """Wraps another client and keeps every exchange with its timing."""

    def __init__(self, inner: ChatClient, clock: Callable[[], float] = time.perf_counter) -> None:
        self._inner = inner
        self._clock = clock
        self._lock = threading.Lock()
        self._entries: list[TranscriptEntry] = []

    @property
    def entries(self) -> list[TranscriptEntry]:
        with self._lock:
            return list(self._entries)

    def send(self, messages: Sequence[ChatMessage], *, stage: str = "") -> str:
        start = self._clock()
        text = self._inner.send(messages, stage=stage)
        entry = TranscriptEntry(
            stage=stage,
            request_digest=request_digest(messages),
            messages=tuple(messages),
            response_text=text,
            elapsed_s=self._clock() - start,
        )
        with self._lock:
            self._entries.append(entry)
        logger.debug("%s answered in %.3fs", stage or "chat", entry.elapsed_s)
        return text

    def to_jsonl(self, *, timings: bool = True) -> str:
        return "".join(json.dumps(e.to_dict(timings=timings), sort_keys=True) + "\n" for e in self.entries)
