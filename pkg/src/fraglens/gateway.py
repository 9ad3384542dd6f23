"""Uniform access to chat-completion and embedding backends.

A gateway wraps one backend (live HTTP or offline mock) and adds retries
with exponential backoff, an embedding cache keyed by content hash, an
in-flight request limiter, and optional transcript recording so any live
run can be replayed offline byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .types import content_hash

logger = logging.getLogger(__name__)

PIPELINE_TEMPERATURE = 0.1
BENCHMARK_TEMPERATURE = 0.0


class GatewayError(RuntimeError):
    pass


class AuthenticationError(GatewayError):
    pass


class TransientBackendError(GatewayError):
    """Retryable failure (rate limit, 5xx, timeout)."""


class RetriesExhaustedError(GatewayError):
    pass


class MockMissError(GatewayError):
    """A replay transcript has no (further) response for this request."""


@dataclass(frozen=True, slots=True)
class CompletionRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = PIPELINE_TEMPERATURE
    max_output_tokens: int = 8192
    tag: str = ""

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    def fingerprint(self) -> str:
        return content_hash(self.system_prompt, self.user_prompt, f"{self.temperature:g}")


@dataclass(frozen=True, slots=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dim: int
    source_hash: str

    def __post_init__(self) -> None:
        if len(self.values) != self.dim:
            raise ValueError("dim does not match number of values")
        if not all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite entries")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class Transcript:
    """Ordered record of completions plus an embedding table.

    A fingerprint may occur several times (the same prompt re-asked); replay
    consumes the recorded responses for that fingerprint in order.
    """

    def __init__(self) -> None:
        self.completions: list[tuple[str, str]] = []
        self.embeddings: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def record_completion(self, fingerprint: str, response: str) -> None:
        with self._lock:
            self.completions.append((fingerprint, response))

    def record_embedding(self, source_hash: str, values: list[float]) -> None:
        with self._lock:
            self.embeddings[source_hash] = list(values)

    def save(self, path: str | Path) -> None:
        doc = {"completions": self.completions, "embeddings": self.embeddings}
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        t = cls()
        t.completions = [tuple(pair) for pair in doc.get("completions", [])]
        t.embeddings = dict(doc.get("embeddings", {}))
        return t


def hash_embedding(text: str, dim: int) -> list[float]:
    """Deterministic unit vector derived from the text content alone."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "big")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return [float(x) for x in v]


class MockBackend:
    """Deterministic offline backend.

    Completions replay a transcript (per-fingerprint FIFO). Embeddings come
    from, in priority order: explicit fixture vectors, the transcript's
    embedding table, or seeded hash-derived unit vectors.
    """

    deterministic = True

    def __init__(
        self,
        transcript: Transcript | None = None,
        *,
        dim: int = 32,
        fixture_vectors: dict[str, list[float]] | None = None,
        hash_fallback: bool = True,
    ) -> None:
        self.transcript = transcript or Transcript()
        self.dim = dim
        self.fixture_vectors = dict(fixture_vectors or {})
        self.hash_fallback = hash_fallback
        self._queues: dict[str, list[str]] = defaultdict(list)
        for fp, response in self.transcript.completions:
            self._queues[fp].append(response)

    def complete_once(self, req: CompletionRequest) -> str:
        queue = self._queues.get(req.fingerprint())
        if not queue:
            raise MockMissError(
                f"no recorded response for request tag={req.tag!r} "
                f"(fingerprint {req.fingerprint()[:12]})"
            )
        return queue.pop(0)

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            if text in self.fixture_vectors:
                out.append(list(self.fixture_vectors[text]))
                continue
            recorded = self.transcript.embeddings.get(text_hash(text))
            if recorded is not None:
                out.append(list(recorded))
                continue
            if not self.hash_fallback:
                raise MockMissError(f"no recorded embedding for text hash {text_hash(text)[:12]}")
            out.append(hash_embedding(text, self.dim))
        return out


class HttpBackend:
    """OpenAI-compatible HTTP backend (chat completions + embeddings)."""

    deterministic = False

    def __init__(
        self,
        *,
        base_url: str = "https://api.openai.com/v1",
        model: str = "gpt-4o-mini",
        embedding_model: str = "text-embedding-3-small",
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 120.0,
    ) -> None:
        import httpx

        api_key = os.environ.get(api_key_env, "")
        if not api_key:
            raise AuthenticationError(f"missing credentials: set ${api_key_env}")
        self.model = model
        self.embedding_model = embedding_model
        self._client = httpx.Client(
            base_url=base_url,
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=timeout,
        )

    def _post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code in (401, 403):
            raise AuthenticationError(f"backend rejected credentials ({resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientBackendError(f"backend returned {resp.status_code}")
        resp.raise_for_status()
        return resp.json()

    def complete_once(self, req: CompletionRequest) -> str:
        doc = self._post(
            "/chat/completions",
            {
                "model": self.model,
                "temperature": req.temperature,
                "max_tokens": req.max_output_tokens,
                "messages": [
                    {"role": "system", "content": req.system_prompt},
                    {"role": "user", "content": req.user_prompt},
                ],
            },
        )
        return doc["choices"][0]["message"]["content"] or ""

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        doc = self._post("/embeddings", {"model": self.embedding_model, "input": texts})
        rows = sorted(doc["data"], key=lambda d: d["index"])
        return [row["embedding"] for row in rows]


@dataclass
class GatewayStats:
    completions: int = 0
    embed_calls: int = 0
    embed_batches: int = 0
    retries: int = 0
    cache_hits: int = 0


class LLMGateway:
    """Retrying, rate-limited front door for one completion/embedding backend."""

    def __init__(
        self,
        backend,
        *,
        retries: int = 3,
        backoff_base: float = 1.0,
        jitter: float = 0.1,
        max_in_flight: int = 4,
        batch_size: int = 100,
        cache_enabled: bool = True,
        record_to: Transcript | None = None,
        sleep=time.sleep,
    ) -> None:
        self.backend = backend
        self.retries = retries
        self.backoff_base = backoff_base
        self.jitter = jitter
        self.batch_size = batch_size
        self.cache_enabled = cache_enabled
        self.record_to = record_to
        self.stats = GatewayStats()
        self._sleep = sleep
        self._tokens = threading.BoundedSemaphore(max_in_flight)
        self._cache: dict[str, EmbeddingVector] = {}
        self._cache_lock = threading.Lock()
        self._dim: int | None = None
        self._rng = random.Random(0x5EED)

    @property
    def deterministic(self) -> bool:
        return bool(getattr(self.backend, "deterministic", False))

    def _with_retries(self, fn, tag: str):
        attempt = 0
        while True:
            try:
                with self._tokens:
                    return attempt, fn()
            except TransientBackendError as exc:
                attempt += 1
                self.stats.retries += 1
                if attempt >= self.retries:
                    raise RetriesExhaustedError(
                        f"{tag or 'request'}: gave up after {attempt} retries: {exc}"
                    ) from exc
                delay = self.backoff_base * (2 ** (attempt - 1))
                delay += self._rng.uniform(0, self.jitter)
                logger.warning("transient failure (%s), retry %d in %.2fs", tag, attempt, delay)
                self._sleep(delay)

    def complete(self, req: CompletionRequest) -> str:
        attempts, text = self._with_retries(lambda: self.backend.complete_once(req), req.tag)
        self.stats.completions += 1
        if attempts:
            logger.info("completion %s succeeded after %d retries", req.tag, attempts)
        if self.record_to is not None:
            self.record_to.record_completion(req.fingerprint(), text)
        return text

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("embed requires at least one text")
        for i, t in enumerate(texts):
            if not t or not t.strip():
                raise ValueError(f"embed input {i} is blank")

        resolved: dict[str, EmbeddingVector] = {}
        pending: list[str] = []
        pending_hashes: set[str] = set()
        order_hashes = []
        for t in texts:
            h = text_hash(t)
            order_hashes.append(h)
            if self.cache_enabled:
                with self._cache_lock:
                    hit = self._cache.get(h)
                if hit is not None:
                    self.stats.cache_hits += 1
                    resolved[h] = hit
                    continue
            if not self.cache_enabled or h not in pending_hashes:
                pending.append(t)
                pending_hashes.add(h)

        for start in range(0, len(pending), self.batch_size):
            batch = pending[start:start + self.batch_size]
            _, rows = self._with_retries(lambda b=batch: self.backend.embed_batch(b), "embed")
            self.stats.embed_calls += len(batch)
            self.stats.embed_batches += 1
            for text, values in zip(batch, rows):
                h = text_hash(text)
                vec = EmbeddingVector(values=tuple(float(v) for v in values),
                                      dim=len(values), source_hash=h)
                if self._dim is None:
                    self._dim = vec.dim
                elif vec.dim != self._dim:
                    raise GatewayError(
                        f"embedding dim {vec.dim} does not match run dim {self._dim}"
                    )
                resolved[h] = vec
                if self.cache_enabled:
                    with self._cache_lock:
                        self._cache[h] = vec
                if self.record_to is not None:
                    self.record_to.record_embedding(h, list(values))
        return [resolved[h] for h in order_hashes]
