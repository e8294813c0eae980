import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, unquote, urlparse

import pytest

from coursechat.objectstore import (
    LocalFileStore,
    MemoryObjectStore,
    S3ObjectStore,
    purge_prefix,
)


class FakeS3Handler(BaseHTTPRequestHandler):
    """Tiny path-style S3 double: PUT/GET/DELETE plus list-type=2."""

    objects: dict[str, bytes] = {}

    def log_message(self, *args):
        pass

    def _key(self):
        path = unquote(urlparse(self.path).path)
        return path.lstrip("/").split("/", 1)[1] if "/" in path.lstrip("/") else ""

    def do_PUT(self):
        length = int(self.headers.get("content-length", 0))
        self.objects[self._key()] = self.rfile.read(length)
        self.send_response(200)
        self.end_headers()

    def do_GET(self):
        query = parse_qs(urlparse(self.path).query)
        if "list-type" in query:
            prefix = query.get("prefix", [""])[0]
            keys = sorted(k for k in self.objects if k.startswith(prefix))
            body = "".join(f"<Contents><Key>{k}</Key></Contents>" for k in keys)
            payload = (
                '<?xml version="1.0" encoding="UTF-8"?>'
                f"<ListBucketResult>{body}</ListBucketResult>"
            ).encode()
            self.send_response(200)
            self.send_header("content-type", "application/xml")
            self.end_headers()
            self.wfile.write(payload)
            return
        key = self._key()
        if key not in self.objects:
            self.send_response(404)
            self.end_headers()
            return
        self.send_response(200)
        self.end_headers()
        self.wfile.write(self.objects[key])

    def do_DELETE(self):
        self.objects.pop(self._key(), None)
        self.send_response(204)
        self.end_headers()


@pytest.fixture
def fake_s3():
    FakeS3Handler.objects = {}
    server = ThreadingHTTPServer(("127.0.0.1", 0), FakeS3Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def _stores(tmp_path, fake_s3_url=None):
    stores = [
        MemoryObjectStore(),
        LocalFileStore(tmp_path / "local"),
    ]
    if fake_s3_url:
        stores.append(
            S3ObjectStore(fake_s3_url, "bucket", "ak", "sk")
        )
    return stores


@pytest.mark.parametrize("store_kind", ["memory", "local", "s3"])
def test_contract_get_after_put_roundtrips(store_kind, tmp_path, fake_s3):
    store = {
        "memory": MemoryObjectStore(),
        "local": LocalFileStore(tmp_path / "local"),
        "s3": S3ObjectStore(fake_s3, "bucket", "ak", "sk"),
    }[store_kind]

    payload = bytes(range(256)) * 3
    store.put("courses/intro/index/vectors.bin", payload)
    assert store.get("courses/intro/index/vectors.bin") == payload

    store.put("courses/intro/index/vectors.bin", b"overwritten")
    assert store.get("courses/intro/index/vectors.bin") == b"overwritten"

    with pytest.raises(KeyError):
        store.get("courses/intro/missing")

    store.put("courses/intro/raw/doc1", b"one")
    store.put("courses/intro/raw/doc2", b"two")
    store.put("courses/other/raw/doc3", b"three")
    assert store.list("courses/intro/raw/") == [
        "courses/intro/raw/doc1",
        "courses/intro/raw/doc2",
    ]

    store.delete("courses/intro/raw/doc1")
    assert store.list("courses/intro/raw/") == ["courses/intro/raw/doc2"]
    # Deleting a missing key is a no-op.
    store.delete("courses/intro/raw/doc1")


def test_purge_prefix(tmp_path):
    store = LocalFileStore(tmp_path / "s")
    store.put("a/x", b"1")
    store.put("a/y", b"2")
    store.put("b/z", b"3")
    purge_prefix(store, "a/")
    assert store.list("a/") == []
    assert store.list("b/") == ["b/z"]


def test_local_store_rejects_escaping_keys(tmp_path):
    store = LocalFileStore(tmp_path / "s")
    with pytest.raises(ValueError):
        store.put("../outside", b"nope")
    with pytest.raises(ValueError):
        store.get("/absolute")


def test_unicode_binary_payloads(tmp_path):
    store = LocalFileStore(tmp_path / "s")
    payload = "ascii + काफी + 中文".encode("utf-8")
    store.put("courses/unicode-course/raw/d", payload)
    assert store.get("courses/unicode-course/raw/d") == payload
