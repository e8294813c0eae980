"""Embedding providers and cosine measures.

The bundled local provider hashes lowercase alphanumeric tokens into a
fixed number of buckets with term-frequency weights and L2-normalizes, so
the whole pipeline runs deterministically offline. A remote provider
speaking ``{"model", "input"} -> {"embedding": [...]}`` JSON over HTTP
drops in behind the same contract.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from typing import Protocol, Sequence

import httpx
import numpy as np

from .errors import DimensionMismatch, EmptyInput, ProviderUnreachable
from .text import tokenize

DEFAULT_DIMS = 384


class EmbeddingProvider(Protocol):
    """Maps non-empty text to a fixed-dimension vector."""

    dims: int

    def embed(self, text: str) -> np.ndarray: ...


def _bucket(token: str, dims: int) -> int:
    # Stable across runs and platforms, unlike hash().
    digest = hashlib.md5(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") % dims


class LocalHashEmbedder:
    """Deterministic hashed bag-of-words embedder."""

    def __init__(self, dims: int = DEFAULT_DIMS):
        if dims <= 0:
            raise ValueError("dims must be positive")
        self.dims = dims

    def embed(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmptyInput("cannot embed empty text")
        vec = np.zeros(self.dims, dtype=np.float64)
        for token, count in Counter(tokenize(text)).items():
            vec[_bucket(token, self.dims)] += count
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


class RemoteEmbedder:
    """HTTP embedding provider client."""

    def __init__(self, endpoint: str, model: str, dims: int = DEFAULT_DIMS,
                 api_key: str = "", timeout: float = 30.0):
        self.endpoint = endpoint
        self.model = model
        self.dims = dims
        self.api_key = api_key
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmptyInput("cannot embed empty text")
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(
                self.endpoint,
                json={"model": self.model, "input": text},
                headers=headers,
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise ProviderUnreachable(str(exc)) from exc
        if resp.status_code != 200:
            raise ProviderUnreachable(f"embedding endpoint status {resp.status_code}")
        values = resp.json()["embedding"]
        vec = np.asarray(values, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != self.dims:
            raise DimensionMismatch(
                f"expected {self.dims} dims, got shape {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise ProviderUnreachable("non-finite embedding values")
        return vec


def cosine_similarity(a: Sequence[float] | np.ndarray,
                      b: Sequence[float] | np.ndarray) -> float:
    """dot(a,b) / (|a||b|); 0.0 when either vector has zero norm.

    Each vector is pre-scaled by its largest magnitude so tiny or huge
    components neither underflow nor overflow the squared sums.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"{va.shape} vs {vb.shape}")
    ma = float(np.max(np.abs(va))) if va.size else 0.0
    mb = float(np.max(np.abs(vb))) if vb.size else 0.0
    if ma == 0.0 or mb == 0.0:
        return 0.0
    va = va / ma
    vb = vb / mb
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    return float(np.dot(va, vb) / (na * nb))


def cosine_distance(a: Sequence[float] | np.ndarray,
                    b: Sequence[float] | np.ndarray) -> float:
    return 1.0 - cosine_similarity(a, b)
