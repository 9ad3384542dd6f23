"""Configuration file loading and gateway construction.

Config files are YAML (JSON also parses). Credentials never live in the
file; only the name of the environment variable to read does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .gateway import HttpBackend, LLMGateway, MockBackend, Transcript


@dataclass(slots=True)
class AppConfig:
    provider: str = "mock"  # "mock" or "openai"
    model: str = "gpt-4o-mini"
    embedding_model: str = "text-embedding-3-small"
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "OPENAI_API_KEY"
    batch_size: int = 100
    retries: int = 3
    backoff_base: float = 1.0
    max_in_flight: int = 4
    parallelism: int = 4
    seed: int = 0
    embedding_dim: int = 32  # mock backend only
    min_cluster_size: int | None = None
    dedup_target: int | None = None
    label_language: str | None = None
    store_path: str = "./fraglens-store"
    host: str = "127.0.0.1"
    port: int = 8601
    extra: dict = field(default_factory=dict)


def load_config(path: str | Path | None) -> AppConfig:
    if path is None:
        return AppConfig()
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a mapping")
    known = {f for f in AppConfig.__dataclass_fields__ if f != "extra"}
    kwargs = {k: v for k, v in doc.items() if k in known}
    extra = {k: v for k, v in doc.items() if k not in known}
    return AppConfig(**kwargs, extra=extra)


def build_gateway(
    config: AppConfig,
    *,
    transcript: Transcript | None = None,
    record_to: Transcript | None = None,
) -> LLMGateway:
    """Construct the gateway for a run.

    ``transcript`` switches to offline replay regardless of provider;
    ``record_to`` collects live traffic for later replay.
    """
    if transcript is not None or config.provider == "mock":
        backend = MockBackend(transcript, dim=config.embedding_dim)
    elif config.provider == "openai":
        backend = HttpBackend(
            base_url=config.base_url,
            model=config.model,
            embedding_model=config.embedding_model,
            api_key_env=config.api_key_env,
        )
    else:
        raise ValueError(f"unknown provider {config.provider!r}")
    return LLMGateway(
        backend,
        retries=config.retries,
        backoff_base=config.backoff_base,
        max_in_flight=config.max_in_flight,
        batch_size=config.batch_size,
        record_to=record_to,
    )
