"""Provider calls with caching, retries and per-provider rate limits."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from functools import cached_property
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import httpx

from .grid import ModelSpec, SamplingSetting
from .prompts import PromptUnit

log = logging.getLogger(__name__)

OK = "ok"
REFUSAL = "refusal"
TRANSPORT_ERROR = "transport_error"
PROVIDER_ERROR = "provider_error"
STATUSES = (OK, REFUSAL, TRANSPORT_ERROR, PROVIDER_ERROR)
CACHEABLE = (OK, REFUSAL)

DEFAULT_BASE_URLS = {
    "openai": "https://api.openai.com/v1",
    "groq": "https://api.groq.com/openai/v1",
}


class TransientError(Exception):
    """Retryable failure: timeouts, connection resets, 429 and 5xx."""


class ProviderError(Exception):
    """Non-retryable failure reported by the provider."""


class CredentialMissing(RuntimeError):
    pass


def credential_env_var(provider_id: str) -> str:
    return f"SILICON_PROVIDER_{provider_id.upper().replace('-', '_').replace('.', '_')}_KEY"


@dataclass(frozen=True)
class CompletionRequest:
    config_id: str
    participant_id: str
    template_version: str
    model: ModelSpec
    sampling: SamplingSetting
    prompt: PromptUnit

    @property
    def unit_id(self) -> str:
        return self.prompt.unit_id

    @cached_property
    def cache_key(self) -> str:
        blob = json.dumps(
            [
                self.config_id,
                self.participant_id,
                self.prompt.unit_id,
                self.template_version,
                self.prompt.system_text,
                self.prompt.user_text,
            ],
            ensure_ascii=False,
            separators=(",", ":"),
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def provenance(self) -> dict:
        return {
            "config_id": self.config_id,
            "participant_id": self.participant_id,
            "unit_id": self.unit_id,
            "template_version": self.template_version,
            "provider_id": self.model.provider_id,
            "model_id": self.model.model_id,
            "temperature": self.sampling.temperature,
            "reasoning_effort": self.sampling.reasoning_effort,
            "prompt_sha256": hashlib.sha256(
                (self.prompt.system_text + "\0" + self.prompt.user_text).encode()
            ).hexdigest(),
        }


@dataclass(frozen=True)
class CompletionResult:
    status: str
    raw_text: str
    latency_ms: int
    attempt_count: int
    timestamp: str
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if bool(self.raw_text) != (self.status in CACHEABLE):
            raise ValueError(f"raw_text must be non-empty exactly for ok/refusal ({self.status})")
        if self.attempt_count < 1:
            raise ValueError("attempt_count must be >= 1")


class Provider(Protocol):
    """``send`` returns ``(status, text)`` with status ok or refusal.

    Raise ``TransientError`` for retryable failures and ``ProviderError``
    for anything the provider rejects outright.
    """

    provider_id: str

    def send(self, request: CompletionRequest) -> tuple[str, str]: ...


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


class ResponseCache:
    """Append-only JSONL log of completion envelopes, indexed by cache key.

    Only ok and refusal results are served back as hits; error envelopes are
    kept in the log for auditing so a later run retries them.
    """

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._index: dict[str, CompletionResult] = {}
        self._lock = threading.Lock()
        self._fh = None
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self):
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    env = json.loads(line)
                except json.JSONDecodeError:
                    # a torn final line from an interrupted write
                    log.warning("%s:%d: skipping unreadable cache line", self.path, lineno)
                    continue
                result = CompletionResult(**env["result"])
                if result.status in CACHEABLE:
                    self._index.setdefault(env["cache_key"], result)

    def __len__(self):
        return len(self._index)

    def close(self):
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    def __contains__(self, key):
        return key in self._index

    def get(self, key: str) -> CompletionResult | None:
        return self._index.get(key)

    def put(self, request: CompletionRequest, result: CompletionResult) -> None:
        envelope = {
            "cache_key": request.cache_key,
            "request": request.provenance(),
            "result": asdict(result),
        }
        line = json.dumps(envelope, ensure_ascii=False, sort_keys=True) + "\n"
        with self._lock:
            if self.path is not None:
                if self._fh is None:
                    self._fh = open(self.path, "a", encoding="utf-8")
                self._fh.write(line)
                self._fh.flush()
            if result.status in CACHEABLE:
                self._index.setdefault(request.cache_key, result)


class RateLimiter:
    """Sliding one-minute window per provider."""

    def __init__(self, per_minute: dict[str, int] | None = None, clock=time.monotonic, sleep=time.sleep):
        self.per_minute = dict(per_minute or {})
        self.clock = clock
        self.sleep = sleep
        self._windows: dict[str, deque] = {}
        self._lock = threading.Lock()

    def acquire(self, provider_id: str) -> None:
        limit = self.per_minute.get(provider_id)
        if not limit:
            return
        while True:
            with self._lock:
                window = self._windows.setdefault(provider_id, deque())
                now = self.clock()
                while window and now - window[0] >= 60.0:
                    window.popleft()
                if len(window) < limit:
                    window.append(now)
                    return
                wait = 60.0 - (now - window[0])
            self.sleep(max(wait, 0.001))


@dataclass
class RetryPolicy:
    max_retries: int = 3
    base_delay: float = 1.0
    factor: float = 4.0
    jitter: float = 0.25

    def delay(self, retry_index: int, rng: random.Random) -> float:
        d = self.base_delay * self.factor ** retry_index
        return d + rng.uniform(0, self.jitter * d)


@dataclass
class GatewayStats:
    cache_hits: int = 0
    requests_sent: int = 0
    calls: int = 0
    by_status: dict = field(default_factory=dict)


class Gateway:
    def __init__(
        self,
        providers: dict[str, Provider] | Callable[[str], Provider],
        cache: ResponseCache | None = None,
        rate_limiter: RateLimiter | None = None,
        retry: RetryPolicy | None = None,
        sleep=time.sleep,
        jitter_seed: int = 0,
    ):
        self._providers = providers
        self.cache = cache if cache is not None else ResponseCache(None)
        self.rate_limiter = rate_limiter or RateLimiter()
        self.retry = retry or RetryPolicy()
        self.sleep = sleep
        self._rng = random.Random(jitter_seed)
        self.stats = GatewayStats()
        self._stats_lock = threading.Lock()

    def provider_for(self, provider_id: str) -> Provider:
        if callable(self._providers) and not isinstance(self._providers, dict):
            return self._providers(provider_id)
        try:
            return self._providers[provider_id]
        except KeyError:
            raise CredentialMissing(f"no provider configured for {provider_id!r}") from None

    def _count(self, field_name, status=None):
        with self._stats_lock:
            setattr(self.stats, field_name, getattr(self.stats, field_name) + 1)
            if status:
                self.stats.by_status[status] = self.stats.by_status.get(status, 0) + 1

    def complete(self, request: CompletionRequest) -> CompletionResult:
        cached = self.cache.get(request.cache_key)
        if cached is not None:
            self._count("cache_hits")
            return cached

        provider = self.provider_for(request.model.provider_id)
        attempts = 0
        detail = ""
        start = time.monotonic()
        while True:
            attempts += 1
            self.rate_limiter.acquire(request.model.provider_id)
            self._count("requests_sent")
            try:
                status, text = provider.send(request)
            except TransientError as exc:
                detail = str(exc)
                if attempts > self.retry.max_retries:
                    status, text = TRANSPORT_ERROR, ""
                    break
                with self._stats_lock:
                    delay = self.retry.delay(attempts - 1, self._rng)
                log.info("transient failure (%s); retry %d in %.1fs", exc, attempts, delay)
                self.sleep(delay)
                continue
            except ProviderError as exc:
                status, text, detail = PROVIDER_ERROR, "", str(exc)
                break
            # refusals are data: never retried
            break
        result = CompletionResult(
            status=status,
            raw_text=text,
            latency_ms=int((time.monotonic() - start) * 1000),
            attempt_count=attempts,
            timestamp=_now(),
            detail=detail,
        )
        self.cache.put(request, result)
        self._count("calls", status)
        return result

    def complete_many(self, requests: Sequence[CompletionRequest], workers: int = 1) -> list[CompletionResult]:
        if workers <= 1:
            return [self.complete(r) for r in requests]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(self.complete, requests))


class ChatCompletionsProvider:
    """OpenAI-compatible ``/chat/completions`` endpoint (OpenAI, Groq, ...)."""

    def __init__(self, provider_id: str, api_key: str | None = None, base_url: str | None = None,
                 timeout: float = 60.0, transport: httpx.BaseTransport | None = None):
        self.provider_id = provider_id
        key = api_key if api_key is not None else os.environ.get(credential_env_var(provider_id))
        if not key:
            raise CredentialMissing(
                f"set {credential_env_var(provider_id)} to call provider {provider_id!r}"
            )
        base_url = base_url or DEFAULT_BASE_URLS.get(provider_id)
        if base_url is None:
            raise ValueError(f"no base URL known for provider {provider_id!r}")
        self.client = httpx.Client(
            base_url=base_url,
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {key}"},
        )

    @staticmethod
    def payload(request: CompletionRequest) -> dict:
        body = {
            "model": request.model.model_id,
            "messages": [
                {"role": "system", "content": request.prompt.system_text},
                {"role": "user", "content": request.prompt.user_text},
            ],
        }
        # reasoning models reject temperature; they take an effort level instead
        if request.sampling.reasoning_effort is not None:
            body["reasoning_effort"] = request.sampling.reasoning_effort
        else:
            body["temperature"] = request.sampling.temperature
        return body

    def send(self, request: CompletionRequest) -> tuple[str, str]:
        try:
            resp = self.client.post("/chat/completions", json=self.payload(request))
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise TransientError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderError(f"HTTP {resp.status_code}: {resp.text[:500]}")
        try:
            choice = resp.json()["choices"][0]
            message = choice.get("message") or {}
        except (ValueError, KeyError, IndexError) as exc:
            raise ProviderError(f"unexpected response body: {exc}") from exc
        if message.get("refusal"):
            return REFUSAL, message["refusal"]
        content = message.get("content") or ""
        if choice.get("finish_reason") == "content_filter":
            return REFUSAL, content or "[content filtered]"
        if not content:
            raise ProviderError("empty completion")
        return OK, content


def http_providers(provider_ids: Iterable[str], base_urls: dict[str, str] | None = None):
    base_urls = base_urls or {}
    return {pid: ChatCompletionsProvider(pid, base_url=base_urls.get(pid)) for pid in provider_ids}
