"""Object store contract with local-filesystem, in-memory, and S3 backends.

Keys are UTF-8 paths with "/" separators. ``get`` after ``put`` returns
identical bytes; ``get`` raises KeyError for missing keys; transport and
IO failures surface as StoreUnavailable.
"""

from __future__ import annotations

import datetime
import hashlib
import hmac
import threading
from pathlib import Path
from typing import Iterable, Protocol
from urllib.parse import quote
from xml.etree import ElementTree

import httpx

from .errors import StoreUnavailable


class ObjectStore(Protocol):
    def put(self, key: str, data: bytes) -> None: ...

    def get(self, key: str) -> bytes: ...

    def list(self, prefix: str) -> list[str]: ...

    def delete(self, key: str) -> None: ...


class MemoryObjectStore:
    """Dict-backed store for tests and ephemeral runs."""

    def __init__(self):
        self._objects: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def put(self, key: str, data: bytes) -> None:
        with self._lock:
            self._objects[key] = bytes(data)

    def get(self, key: str) -> bytes:
        with self._lock:
            return self._objects[key]

    def list(self, prefix: str) -> list[str]:
        with self._lock:
            return sorted(k for k in self._objects if k.startswith(prefix))

    def delete(self, key: str) -> None:
        with self._lock:
            self._objects.pop(key, None)


class LocalFileStore:
    """Filesystem-backed store rooted at a directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        if not key or key.startswith("/"):
            raise ValueError(f"bad key {key!r}")
        path = (self.root / key).resolve()
        if not path.is_relative_to(self.root.resolve()):
            raise ValueError(f"key escapes store root: {key!r}")
        return path

    def put(self, key: str, data: bytes) -> None:
        path = self._path(key)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(path.suffix + ".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc

    def get(self, key: str) -> bytes:
        path = self._path(key)
        if not path.is_file():
            raise KeyError(key)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc

    def list(self, prefix: str) -> list[str]:
        try:
            keys = [
                str(p.relative_to(self.root)).replace("\\", "/")
                for p in self.root.rglob("*")
                if p.is_file() and not p.name.endswith(".tmp")
            ]
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc
        return sorted(k for k in keys if k.startswith(prefix))

    def delete(self, key: str) -> None:
        path = self._path(key)
        try:
            path.unlink(missing_ok=True)
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc


def _sign(key: bytes, msg: str) -> bytes:
    return hmac.new(key, msg.encode("utf-8"), hashlib.sha256).digest()


class S3ObjectStore:
    """S3-compatible backend speaking path-style REST with SigV4 auth.

    Works against any S3-compatible endpoint (MinIO and friends); region
    defaults to us-east-1 which self-hosted stores generally accept.
    """

    def __init__(self, endpoint: str, bucket: str, access_key: str,
                 secret_key: str, region: str = "us-east-1",
                 timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.bucket = bucket
        self.access_key = access_key
        self.secret_key = secret_key
        self.region = region
        self.timeout = timeout

    def _headers(self, method: str, canonical_uri: str, query: str,
                 payload: bytes) -> dict[str, str]:
        now = datetime.datetime.now(datetime.timezone.utc)
        amz_date = now.strftime("%Y%m%dT%H%M%SZ")
        datestamp = now.strftime("%Y%m%d")
        host = self.endpoint.split("://", 1)[1]
        payload_hash = hashlib.sha256(payload).hexdigest()
        headers = {
            "host": host,
            "x-amz-content-sha256": payload_hash,
            "x-amz-date": amz_date,
        }
        signed = ";".join(sorted(headers))
        canonical = "\n".join(
            [
                method,
                canonical_uri,
                query,
                "".join(f"{k}:{headers[k]}\n" for k in sorted(headers)),
                signed,
                payload_hash,
            ]
        )
        scope = f"{datestamp}/{self.region}/s3/aws4_request"
        to_sign = "\n".join(
            [
                "AWS4-HMAC-SHA256",
                amz_date,
                scope,
                hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
            ]
        )
        k = _sign(("AWS4" + self.secret_key).encode("utf-8"), datestamp)
        k = _sign(k, self.region)
        k = _sign(k, "s3")
        k = _sign(k, "aws4_request")
        signature = hmac.new(k, to_sign.encode("utf-8"), hashlib.sha256).hexdigest()
        headers["Authorization"] = (
            f"AWS4-HMAC-SHA256 Credential={self.access_key}/{scope}, "
            f"SignedHeaders={signed}, Signature={signature}"
        )
        del headers["host"]  # httpx sets it from the URL
        return headers

    def _request(self, method: str, key: str = "", query: str = "",
                 payload: bytes = b"") -> httpx.Response:
        uri = f"/{self.bucket}"
        if key:
            uri += "/" + quote(key, safe="/")
        headers = self._headers(method, uri, query, payload)
        url = f"{self.endpoint}{uri}"
        if query:
            url += "?" + query
        try:
            return httpx.request(
                method, url, headers=headers,
                content=payload if method == "PUT" else None,
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise StoreUnavailable(str(exc)) from exc

    def put(self, key: str, data: bytes) -> None:
        resp = self._request("PUT", key, payload=data)
        if resp.status_code not in (200, 201):
            raise StoreUnavailable(f"put {key}: status {resp.status_code}")

    def get(self, key: str) -> bytes:
        resp = self._request("GET", key)
        if resp.status_code == 404:
            raise KeyError(key)
        if resp.status_code != 200:
            raise StoreUnavailable(f"get {key}: status {resp.status_code}")
        return resp.content

    def list(self, prefix: str) -> list[str]:
        query = f"list-type=2&prefix={quote(prefix, safe='')}"
        resp = self._request("GET", query=query)
        if resp.status_code != 200:
            raise StoreUnavailable(f"list {prefix}: status {resp.status_code}")
        root = ElementTree.fromstring(resp.content)
        ns = ""
        if root.tag.startswith("{"):
            ns = root.tag.split("}")[0] + "}"
        return sorted(
            el.text
            for el in root.iter(f"{ns}Key")
            if el.text is not None
        )

    def delete(self, key: str) -> None:
        resp = self._request("DELETE", key)
        if resp.status_code not in (200, 204, 404):
            raise StoreUnavailable(f"delete {key}: status {resp.status_code}")


def purge_prefix(store: ObjectStore, prefix: str) -> None:
    """Delete every object under a prefix."""
    for key in store.list(prefix):
        store.delete(key)


def copy_objects(src: ObjectStore, dst: ObjectStore, keys: Iterable[str]) -> None:
    for key in keys:
        dst.put(key, src.get(key))
