"""Platform orchestration: wires storage, object store, providers, and the
ingestion pipeline behind one facade the API and CLI share.

Index swaps are atomic reference replacements: a reader that grabbed the
old index keeps a consistent view while a build publishes the new one.
"""

from __future__ import annotations

import threading
import uuid

from .chat import ChatService, HttpChatClient
from .chunking import chunk_text
from .config import Config
from .courses import CourseManager, PaymentGateway
from .embedding import LocalHashEmbedder, RemoteEmbedder
from .errors import IndexNotFound, ProviderUnreachable, SessionNotFound, AccessDenied
from .index import (
    CourseIndex,
    build_index,
    finalize_upload,
    load_index,
    persist_index,
    raw_key,
)
from .ingest import (
    FixtureTranscriptProvider,
    HttpTranscriptProvider,
    TranscriptProvider,
    clean_transcript,
    fetch_transcript,
    parse_upload,
    parse_video_id,
)
from .jobs import Job, JobQueue
from .models import Course, SessionLog, SourceDocument, utcnow
from .objectstore import LocalFileStore, MemoryObjectStore, S3ObjectStore
from .retrieval import make_query
from .storage import Database


class CoursePlatform:
    def __init__(self, config: Config | None = None, *,
                 db: Database | None = None,
                 store=None,
                 embedder=None,
                 chat_client=None,
                 transcript_provider: TranscriptProvider | None = None,
                 payment_gateway: PaymentGateway | None = None):
        self.config = config or Config()
        self.db = db or Database(self.config.db_path)
        self.store = store if store is not None else self._make_store()
        self.embedder = embedder if embedder is not None else self._make_embedder()
        self.chat_client = (
            chat_client if chat_client is not None else self._make_chat_client()
        )
        self.transcripts = (
            transcript_provider
            if transcript_provider is not None
            else self._make_transcript_provider()
        )
        self.courses = CourseManager(self.db, payment_gateway)
        self.chat = ChatService(self.db, self.courses, self.chat_client)
        self.jobs = JobQueue()
        self._indices: dict[str, CourseIndex] = {}
        self._indices_lock = threading.Lock()

    def _make_store(self):
        cfg = self.config
        if cfg.s3_endpoint:
            return S3ObjectStore(
                cfg.s3_endpoint, cfg.s3_bucket,
                cfg.s3_access_key, cfg.s3_secret_key, cfg.s3_region,
            )
        if cfg.object_store_root:
            return LocalFileStore(cfg.object_store_root)
        return MemoryObjectStore()

    def _make_embedder(self):
        cfg = self.config
        if cfg.embed_provider == "remote":
            return RemoteEmbedder(
                cfg.embed_endpoint, cfg.embed_model, cfg.embed_dims
            )
        return LocalHashEmbedder(cfg.embed_dims)

    def _make_chat_client(self):
        cfg = self.config
        if cfg.llm_endpoint:
            return HttpChatClient(cfg.llm_endpoint, cfg.llm_model,
                                  cfg.llm_api_key)
        return None

    def _make_transcript_provider(self):
        cfg = self.config
        if cfg.transcript_fixtures:
            return FixtureTranscriptProvider(cfg.transcript_fixtures)
        if cfg.transcript_endpoint:
            return HttpTranscriptProvider(cfg.transcript_endpoint)
        return None

    def close(self) -> None:
        self.jobs.shutdown()
        self.db.close()

    # --- ingestion ---------------------------------------------------------

    def upload_document(self, course: Course, filename: str, data: bytes,
                        declared_format: str) -> Job:
        """Validate, save the raw upload, and queue the index build."""
        text = parse_upload(data, declared_format)
        doc = SourceDocument(
            doc_id=uuid.uuid4().hex[:12],
            course_id=course.course_id,
            title=filename,
            origin="upload",
            origin_ref=filename,
            body=text,
        )
        self.store.put(raw_key(course.slug, doc.doc_id), data)
        self.db.insert_document(doc)
        return self.jobs.submit(
            course.course_id, lambda: self._build(course, doc)
        )

    def ingest_youtube(self, course: Course, url: str,
                       preferred_langs: list[str]) -> Job:
        """Fetch, clean, and queue a YouTube transcript as course text."""
        if self.transcripts is None:
            raise ProviderUnreachable("no transcript provider configured")
        video_id = parse_video_id(url)
        entries, title = fetch_transcript(
            video_id, preferred_langs, self.transcripts
        )
        text = clean_transcript(entries, title)
        doc = SourceDocument(
            doc_id=uuid.uuid4().hex[:12],
            course_id=course.course_id,
            title=title,
            origin="youtube",
            origin_ref=url,
            body=text,
        )
        # The cleaned transcript is the temporary server-side file; it is
        # removed like any raw upload once the index is built.
        self.store.put(raw_key(course.slug, doc.doc_id), text.encode("utf-8"))
        self.db.insert_document(doc)
        return self.jobs.submit(
            course.course_id, lambda: self._build(course, doc)
        )

    def _build(self, course: Course, doc: SourceDocument) -> int:
        """Chunk, embed, index, persist; then delete the raw upload."""
        cfg = self.config
        try:
            previous = self.get_index(course)
        except IndexNotFound:
            previous = None

        new_chunks = chunk_text(
            doc.body,
            max_chunk_words=cfg.max_chunk_words,
            overlap_words=cfg.overlap_words,
            doc_id=doc.doc_id,
        )
        new_vectors = [self.embedder.embed(c.text) for c in new_chunks]
        if previous is not None:
            chunks = previous.chunks + new_chunks
            vectors = [previous.vectors[i] for i in range(previous.n_chunks)]
            vectors += new_vectors
            prev_version = previous.manifest_version
        else:
            chunks, vectors, prev_version = new_chunks, new_vectors, 0

        index = build_index(course.slug, chunks, vectors, prev_version)
        persist_index(index, self.store)
        finalize_upload(self.store, course.slug, doc.doc_id)
        self.db.drop_document_body(doc.doc_id)
        self.db.replace_chunks_meta(
            course.course_id,
            [(c.chunk_id, c.doc_id, c.ordinal, c.word_count) for c in chunks],
        )
        with self._indices_lock:
            self._indices[course.course_id] = index
        return index.manifest_version

    def get_index(self, course: Course) -> CourseIndex:
        """Current index for a course, loading from the store on first use."""
        with self._indices_lock:
            cached = self._indices.get(course.course_id)
        if cached is not None:
            return cached
        index = load_index(course.slug, self.store)
        with self._indices_lock:
            self._indices.setdefault(course.course_id, index)
            return self._indices[course.course_id]

    # --- chat ----------------------------------------------------------------

    def answer(self, user_id: str, course_id: str, question: str,
               mode: str = "restricted", k: int = 4):
        course = self.courses.require_access(user_id, course_id)
        index = self.get_index(course)
        query = make_query(question, index, self.embedder)
        return self.chat.answer(
            user_id, course_id, question, index, query, mode=mode, k=k
        )

    # --- study sessions --------------------------------------------------------

    def start_session(self, user_id: str, course_id: str) -> SessionLog:
        self.courses.require_access(user_id, course_id)
        session = SessionLog(
            session_id=uuid.uuid4().hex,
            user_id=user_id,
            course_id=course_id,
            started_at=utcnow(),
        )
        self.db.insert_session(session)
        return session

    def end_session(self, user_id: str, session_id: str) -> float:
        session = self.db.get_session(session_id)
        if session is None:
            raise SessionNotFound(f"no session {session_id!r}")
        if session.user_id != user_id:
            raise AccessDenied("not your session")
        ended = session.ended_at or utcnow()
        if session.ended_at is None:
            self.db.end_session(session_id, ended)
        return (ended - session.started_at).total_seconds()
