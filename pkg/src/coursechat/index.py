"""Build, persist, and load per-course hybrid retrieval indices.

One course maps to an object-store prefix ``courses/<slug>/``; the index
lives under ``<prefix>index/`` as three objects written in a fixed order
(postings.jsonl, vectors.bin, manifest.json last) so that the presence of
a manifest always implies a complete, loadable index.
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .chunking import Chunk
from .errors import (
    CorruptIndex,
    DimensionMismatch,
    EmptyCourse,
    IndexNotFound,
    SerializationFailure,
)
from .objectstore import ObjectStore
from .text import content_tokens, stopwords_sha256

VECTORS_MAGIC = b"VRIX"
VECTORS_FORMAT_VERSION = 1

_SLUG_RE = re.compile(r"[^a-z0-9]+")


def slugify(title: str) -> str:
    """Deterministic [a-z0-9-] slug; case and punctuation variants collide.

    Slug collisions are acceptable: privacy comes from access grants, not
    from slug secrecy.
    """
    slug = _SLUG_RE.sub("-", title.lower()).strip("-")
    return slug or "untitled"


def course_prefix(course_key: str) -> str:
    return f"courses/{slugify(course_key)}/"


def index_prefix(course_key: str) -> str:
    return course_prefix(course_key) + "index/"


def raw_key(course_key: str, doc_id: str) -> str:
    return course_prefix(course_key) + f"raw/{doc_id}"


@dataclass
class CourseIndex:
    """Per-course retrieval state: lexical postings plus embedding matrix."""

    course_id: str
    chunks: list[Chunk]
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avg_doc_length: float
    vectors: np.ndarray  # n_chunks x dims, float32
    manifest_version: int = 1
    created_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )

    @property
    def n_chunks(self) -> int:
        return len(self.chunks)

    @property
    def dims(self) -> int:
        return int(self.vectors.shape[1])

    def chunk_by_id(self, chunk_id: str) -> Chunk:
        return self._by_id[chunk_id]

    def row_of(self, chunk_id: str) -> int:
        """Position of a chunk in the chunk table; the global tie-break order."""
        return self._rows[chunk_id]

    def __post_init__(self):
        self._by_id = {c.chunk_id: c for c in self.chunks}
        self._rows = {c.chunk_id: i for i, c in enumerate(self.chunks)}


def build_index(
    course_id: str,
    chunks: list[Chunk],
    embeddings: list[np.ndarray],
    prev_version: int = 0,
) -> CourseIndex:
    """Tokenize chunks into postings and stack embeddings into a matrix.

    Tokenization is lowercase, split on non-alphanumeric, stopwords from the
    bundled list dropped, no stemming. doc_lengths count post-stopword tokens,
    so per-chunk posting frequencies always sum to the chunk's doc_length.
    """
    if not chunks:
        raise EmptyCourse(f"no chunks for course {course_id!r}")
    if len(chunks) != len(embeddings):
        raise DimensionMismatch(
            f"{len(chunks)} chunks vs {len(embeddings)} embeddings"
        )
    dims = {int(np.asarray(e).shape[0]) for e in embeddings}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed embedding dims {sorted(dims)}")

    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for chunk in chunks:
        tokens = content_tokens(chunk.text)
        doc_lengths[chunk.chunk_id] = len(tokens)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((chunk.chunk_id, tf))

    avg = sum(doc_lengths.values()) / len(chunks)
    matrix = np.vstack([np.asarray(e, dtype=np.float32) for e in embeddings])
    return CourseIndex(
        course_id=course_id,
        chunks=list(chunks),
        postings=postings,
        doc_lengths=doc_lengths,
        avg_doc_length=avg,
        vectors=matrix,
        manifest_version=prev_version + 1,
    )


def encode_vectors(matrix: np.ndarray) -> bytes:
    """Binary layout: magic, u32 version, u32 n_chunks, u32 dims,
    row-major little-endian float32 payload, u64 payload-length footer."""
    n, d = matrix.shape
    payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    return (
        VECTORS_MAGIC
        + struct.pack("<III", VECTORS_FORMAT_VERSION, n, d)
        + payload
        + struct.pack("<Q", len(payload))
    )


def decode_vectors(blob: bytes) -> np.ndarray:
    head = len(VECTORS_MAGIC) + 12
    if len(blob) < head + 8 or blob[:4] != VECTORS_MAGIC:
        raise CorruptIndex("bad vectors header")
    version, n, d = struct.unpack("<III", blob[4:head])
    if version != VECTORS_FORMAT_VERSION:
        raise CorruptIndex(f"unsupported vectors format version {version}")
    payload = blob[head:-8]
    (footer,) = struct.unpack("<Q", blob[-8:])
    if footer != len(payload) or len(payload) != n * d * 4:
        raise CorruptIndex("vectors payload length mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float32)


def _manifest_key(course_key: str) -> str:
    return index_prefix(course_key) + "manifest.json"


def persist_index(index: CourseIndex, store: ObjectStore) -> str:
    """Write postings.jsonl, vectors.bin, then manifest.json last.

    The stored manifest version is bumped past whatever version is already
    in the store, so repeated persists increment monotonically. Returns the
    manifest key.
    """
    prefix = index_prefix(index.course_id)
    try:
        existing_blob = store.get(_manifest_key(index.course_id))
    except KeyError:
        existing_blob = None
    if existing_blob is None:
        index.manifest_version = max(index.manifest_version, 1)
    else:
        try:
            existing = json.loads(existing_blob)
            index.manifest_version = int(existing["manifest_version"]) + 1
        except (ValueError, TypeError, KeyError) as exc:
            raise CorruptIndex(f"unreadable manifest under {prefix}") from exc

    try:
        postings_lines = [
            json.dumps(
                {"term": term, "postings": [[cid, tf] for cid, tf in plist]},
                ensure_ascii=False,
            )
            for term, plist in sorted(index.postings.items())
        ]
        postings_blob = ("\n".join(postings_lines) + "\n").encode("utf-8")
        vectors_blob = encode_vectors(index.vectors)
        manifest = {
            "course_id": index.course_id,
            "manifest_version": index.manifest_version,
            "n_chunks": index.n_chunks,
            "dims": index.dims,
            "avg_doc_length": index.avg_doc_length,
            "stopwords_sha256": stopwords_sha256(),
            "vectors_sha256": hashlib.sha256(vectors_blob).hexdigest(),
            "created_at": index.created_at.isoformat(),
            # Chunk table and lengths ride in the manifest so the three
            # objects round-trip the full index.
            "chunks": [
                {
                    "chunk_id": c.chunk_id,
                    "doc_id": c.doc_id,
                    "ordinal": c.ordinal,
                    "text": c.text,
                    "word_count": c.word_count,
                }
                for c in index.chunks
            ],
            "doc_lengths": index.doc_lengths,
        }
        manifest_blob = json.dumps(manifest, ensure_ascii=False).encode("utf-8")
    except (TypeError, ValueError) as exc:
        raise SerializationFailure(str(exc)) from exc

    store.put(prefix + "postings.jsonl", postings_blob)
    store.put(prefix + "vectors.bin", vectors_blob)
    store.put(prefix + "manifest.json", manifest_blob)
    return prefix + "manifest.json"


def load_index(course_key: str, store: ObjectStore) -> CourseIndex:
    """Load a persisted index; round-trips persist_index structurally."""
    prefix = index_prefix(course_key)
    try:
        manifest_blob = store.get(prefix + "manifest.json")
    except KeyError:
        raise IndexNotFound(f"no index under {prefix}") from None
    try:
        manifest = json.loads(manifest_blob)
        postings_blob = store.get(prefix + "postings.jsonl")
        vectors_blob = store.get(prefix + "vectors.bin")
    except KeyError as exc:
        raise CorruptIndex(f"manifest references missing object: {exc}") from exc
    except ValueError as exc:
        raise CorruptIndex(f"unreadable manifest under {prefix}") from exc

    if hashlib.sha256(vectors_blob).hexdigest() != manifest["vectors_sha256"]:
        raise CorruptIndex("vectors checksum mismatch")
    vectors = decode_vectors(vectors_blob)

    postings: dict[str, list[tuple[str, int]]] = {}
    for line in postings_blob.decode("utf-8").splitlines():
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            postings[row["term"]] = [
                (cid, int(tf)) for cid, tf in row["postings"]
            ]
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptIndex(f"bad postings line: {line[:80]!r}") from exc

    try:
        chunks = [
            Chunk(
                chunk_id=c["chunk_id"],
                doc_id=c["doc_id"],
                ordinal=int(c["ordinal"]),
                text=c["text"],
                word_count=int(c["word_count"]),
            )
            for c in manifest["chunks"]
        ]
        doc_lengths = {k: int(v) for k, v in manifest["doc_lengths"].items()}
        index = CourseIndex(
            course_id=manifest["course_id"],
            chunks=chunks,
            postings=postings,
            doc_lengths=doc_lengths,
            avg_doc_length=float(manifest["avg_doc_length"]),
            vectors=vectors,
            manifest_version=int(manifest["manifest_version"]),
            created_at=datetime.fromisoformat(manifest["created_at"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptIndex(f"manifest missing fields: {exc}") from exc

    if vectors.shape[0] != len(chunks) or vectors.shape[1] != int(manifest["dims"]):
        raise CorruptIndex("vectors shape disagrees with manifest")
    for term, plist in postings.items():
        for cid, tf in plist:
            if cid not in index.doc_lengths or tf < 1:
                raise CorruptIndex(f"posting for unknown chunk {cid!r}")
    return index


def finalize_upload(store: ObjectStore, course_key: str, doc_id: str) -> None:
    """Remove the raw uploaded object once its index is persisted.

    Idempotent: deleting an already-removed raw object succeeds.
    """
    store.delete(raw_key(course_key, doc_id))
