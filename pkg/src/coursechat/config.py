"""Environment-style configuration.

Values come from process environment variables, optionally overlaid by a
KEY=VALUE config file. Secrets (API keys) are held but never logged.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Config:
    listen_addr: str = "127.0.0.1:8000"
    db_path: str = ":memory:"
    object_store_root: str = ""  # empty -> in-memory store
    s3_endpoint: str = ""
    s3_bucket: str = ""
    s3_access_key: str = ""
    s3_secret_key: str = ""
    s3_region: str = "us-east-1"
    llm_endpoint: str = ""
    llm_model: str = "course-chat"
    llm_api_key: str = ""
    embed_provider: str = "local"  # "local" | "remote"
    embed_endpoint: str = ""
    embed_model: str = "hashed-bow"
    embed_dims: int = 384
    transcript_fixtures: str = ""  # directory of canned transcript JSON
    transcript_endpoint: str = ""
    max_chunk_words: int = 512
    overlap_words: int = 64
    fusion_alpha: float = 0.5
    fusion_method: str = "weighted"  # "weighted" | "rrf"
    extra: dict = field(default_factory=dict)

    _ENV_MAP = {
        "LISTEN_ADDR": ("listen_addr", str),
        "DB_PATH": ("db_path", str),
        "OBJECT_STORE_ROOT": ("object_store_root", str),
        "S3_ENDPOINT": ("s3_endpoint", str),
        "S3_BUCKET": ("s3_bucket", str),
        "S3_ACCESS_KEY": ("s3_access_key", str),
        "S3_SECRET_KEY": ("s3_secret_key", str),
        "S3_REGION": ("s3_region", str),
        "LLM_ENDPOINT": ("llm_endpoint", str),
        "LLM_MODEL": ("llm_model", str),
        "LLM_API_KEY": ("llm_api_key", str),
        "EMBED_PROVIDER": ("embed_provider", str),
        "EMBED_ENDPOINT": ("embed_endpoint", str),
        "EMBED_MODEL": ("embed_model", str),
        "EMBED_DIMS": ("embed_dims", int),
        "TRANSCRIPT_FIXTURES": ("transcript_fixtures", str),
        "TRANSCRIPT_ENDPOINT": ("transcript_endpoint", str),
        "MAX_CHUNK_WORDS": ("max_chunk_words", int),
        "OVERLAP_WORDS": ("overlap_words", int),
        "FUSION_ALPHA": ("fusion_alpha", float),
        "FUSION_METHOD": ("fusion_method", str),
    }

    @classmethod
    def load(cls, config_file: str | Path | None = None,
             env: dict | None = None) -> "Config":
        env = dict(os.environ if env is None else env)
        if config_file:
            # An explicitly passed file outranks ambient environment.
            for line in Path(config_file).read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue
                key, _, value = line.partition("=")
                env[key.strip()] = value.strip()
        cfg = cls()
        for env_key, (attr, cast) in cls._ENV_MAP.items():
            if env_key in env and env[env_key] != "":
                setattr(cfg, attr, cast(env[env_key]))
        return cfg
