"""SQLite-backed relational store.

One connection guarded by a re-entrant lock; every public method is a
transaction. The schema realizes the platform's evaluation and identity
tables with cascade on course deletion.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from datetime import datetime
from pathlib import Path

from .models import (
    AccessGrant,
    ChatTurn,
    Course,
    PaymentRecord,
    Quiz,
    QuizAttempt,
    QuizQuestion,
    SessionLog,
    SourceDocument,
    UserAccount,
)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id TEXT PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    email TEXT NOT NULL,
    password_hash TEXT NOT NULL,
    role TEXT NOT NULL CHECK (role IN ('instructor', 'learner')),
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS payments (
    payment_id TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id) ON DELETE CASCADE,
    plan TEXT NOT NULL,
    amount INTEGER NOT NULL,
    merchant_txn_id TEXT NOT NULL DEFAULT '',
    status TEXT NOT NULL CHECK (status IN ('pending', 'confirmed', 'failed')),
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS courses (
    course_id TEXT PRIMARY KEY,
    title TEXT NOT NULL,
    slug TEXT NOT NULL UNIQUE,
    visibility TEXT NOT NULL CHECK (visibility IN ('public', 'private')),
    owner_id TEXT NOT NULL REFERENCES users(user_id),
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS grants (
    course_id TEXT NOT NULL REFERENCES courses(course_id) ON DELETE CASCADE,
    user_id TEXT NOT NULL REFERENCES users(user_id) ON DELETE CASCADE,
    granted_by TEXT NOT NULL,
    granted_at TEXT NOT NULL,
    PRIMARY KEY (course_id, user_id)
);
CREATE TABLE IF NOT EXISTS documents (
    doc_id TEXT PRIMARY KEY,
    course_id TEXT NOT NULL REFERENCES courses(course_id) ON DELETE CASCADE,
    title TEXT NOT NULL,
    origin TEXT NOT NULL CHECK (origin IN ('upload', 'youtube')),
    origin_ref TEXT NOT NULL,
    body TEXT,
    body_dropped INTEGER NOT NULL DEFAULT 0,
    ingested_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS chunks_meta (
    course_id TEXT NOT NULL REFERENCES courses(course_id) ON DELETE CASCADE,
    chunk_id TEXT NOT NULL,
    doc_id TEXT NOT NULL,
    ordinal INTEGER NOT NULL,
    word_count INTEGER NOT NULL,
    PRIMARY KEY (course_id, chunk_id)
);
CREATE TABLE IF NOT EXISTS chat_turns (
    turn_id TEXT PRIMARY KEY,
    user_id TEXT NOT NULL,
    course_id TEXT NOT NULL REFERENCES courses(course_id) ON DELETE CASCADE,
    mode TEXT NOT NULL,
    question TEXT NOT NULL,
    context_chunk_ids TEXT NOT NULL,
    rendered_prompt TEXT NOT NULL,
    answer TEXT NOT NULL,
    model_id TEXT NOT NULL,
    latency_ms INTEGER NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS quizzes (
    quiz_id TEXT PRIMARY KEY,
    course_id TEXT NOT NULL REFERENCES courses(course_id) ON DELETE CASCADE,
    module_label TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS quiz_questions (
    quiz_id TEXT NOT NULL REFERENCES quizzes(quiz_id) ON DELETE CASCADE,
    position INTEGER NOT NULL,
    question_text TEXT NOT NULL,
    options TEXT NOT NULL,
    correct_index INTEGER NOT NULL,
    PRIMARY KEY (quiz_id, position)
);
CREATE TABLE IF NOT EXISTS quiz_attempts (
    attempt_id TEXT PRIMARY KEY,
    quiz_id TEXT NOT NULL REFERENCES quizzes(quiz_id) ON DELETE CASCADE,
    user_id TEXT NOT NULL,
    answers TEXT NOT NULL,
    score REAL NOT NULL,
    completed_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    user_id TEXT NOT NULL,
    course_id TEXT NOT NULL REFERENCES courses(course_id) ON DELETE CASCADE,
    started_at TEXT NOT NULL,
    ended_at TEXT
);
CREATE TABLE IF NOT EXISTS auth_tokens (
    token TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id) ON DELETE CASCADE,
    expires_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS reset_tokens (
    token TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id) ON DELETE CASCADE,
    expires_at TEXT NOT NULL
);
"""


def _ts(dt: datetime | None) -> str | None:
    return dt.isoformat() if dt is not None else None


def _dt(value: str | None) -> datetime | None:
    return datetime.fromisoformat(value) if value else None


class Database:
    """Thread-safe facade over one SQLite file (":memory:" supported)."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock, self._conn:
            self._conn.execute("PRAGMA foreign_keys = ON")
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # --- users / auth -----------------------------------------------------

    def insert_user(self, user: UserAccount) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO users VALUES (?, ?, ?, ?, ?, ?)",
                (user.user_id, user.username, user.email,
                 user.password_hash, user.role, _ts(user.created_at)),
            )

    def username_taken(self, username: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM users WHERE username = ?", (username,)
            ).fetchone()
        return row is not None

    def get_user(self, user_id: str) -> UserAccount | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM users WHERE user_id = ?", (user_id,)
            ).fetchone()
        return self._user(row)

    def get_user_by_username(self, username: str) -> UserAccount | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM users WHERE username = ?", (username,)
            ).fetchone()
        return self._user(row)

    @staticmethod
    def _user(row) -> UserAccount | None:
        if row is None:
            return None
        return UserAccount(
            user_id=row["user_id"], username=row["username"],
            email=row["email"], password_hash=row["password_hash"],
            role=row["role"], created_at=_dt(row["created_at"]),
        )

    def insert_auth_token(self, token: str, user_id: str,
                          expires_at: datetime) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO auth_tokens VALUES (?, ?, ?)",
                (token, user_id, _ts(expires_at)),
            )

    def get_auth_token(self, token: str) -> tuple[str, datetime] | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id, expires_at FROM auth_tokens WHERE token = ?",
                (token,),
            ).fetchone()
        if row is None:
            return None
        return row["user_id"], _dt(row["expires_at"])

    def delete_auth_token(self, token: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "DELETE FROM auth_tokens WHERE token = ?", (token,)
            )

    def insert_reset_token(self, token: str, user_id: str,
                           expires_at: datetime) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO reset_tokens VALUES (?, ?, ?)",
                (token, user_id, _ts(expires_at)),
            )

    def pop_reset_token(self, token: str) -> tuple[str, datetime] | None:
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT user_id, expires_at FROM reset_tokens WHERE token = ?",
                (token,),
            ).fetchone()
            if row is None:
                return None
            self._conn.execute(
                "DELETE FROM reset_tokens WHERE token = ?", (token,)
            )
        return row["user_id"], _dt(row["expires_at"])

    def update_password(self, user_id: str, password_hash: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE users SET password_hash = ? WHERE user_id = ?",
                (password_hash, user_id),
            )

    # --- payments -----------------------------------------------------------

    def insert_payment(self, payment: PaymentRecord) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO payments VALUES (?, ?, ?, ?, ?, ?, ?)",
                (payment.payment_id, payment.user_id, payment.plan,
                 payment.amount, payment.merchant_txn_id, payment.status,
                 _ts(payment.created_at)),
            )

    def update_payment(self, payment_id: str, status: str,
                       merchant_txn_id: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE payments SET status = ?, merchant_txn_id = ?"
                " WHERE payment_id = ?",
                (status, merchant_txn_id, payment_id),
            )

    def pending_payment(self, user_id: str, plan: str) -> PaymentRecord | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM payments WHERE user_id = ? AND plan = ?"
                " AND status = 'pending' ORDER BY created_at LIMIT 1",
                (user_id, plan),
            ).fetchone()
        return self._payment(row)

    def has_confirmed_payment(self, user_id: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM payments WHERE user_id = ?"
                " AND status = 'confirmed' LIMIT 1",
                (user_id,),
            ).fetchone()
        return row is not None

    @staticmethod
    def _payment(row) -> PaymentRecord | None:
        if row is None:
            return None
        return PaymentRecord(
            payment_id=row["payment_id"], user_id=row["user_id"],
            plan=row["plan"], amount=row["amount"],
            merchant_txn_id=row["merchant_txn_id"], status=row["status"],
            created_at=_dt(row["created_at"]),
        )

    # --- courses / grants ---------------------------------------------------

    def insert_course(self, course: Course) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO courses VALUES (?, ?, ?, ?, ?, ?)",
                (course.course_id, course.title, course.slug,
                 course.visibility, course.owner_id, _ts(course.created_at)),
            )

    def slug_taken(self, slug: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM courses WHERE slug = ?", (slug,)
            ).fetchone()
        return row is not None

    def get_course(self, course_id: str) -> Course | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM courses WHERE course_id = ?", (course_id,)
            ).fetchone()
        return self._course(row)

    def list_courses(self) -> list[Course]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM courses ORDER BY created_at, course_id"
            ).fetchall()
        return [self._course(r) for r in rows]

    @staticmethod
    def _course(row) -> Course | None:
        if row is None:
            return None
        return Course(
            course_id=row["course_id"], title=row["title"], slug=row["slug"],
            visibility=row["visibility"], owner_id=row["owner_id"],
            created_at=_dt(row["created_at"]),
        )

    def upsert_grant(self, grant: AccessGrant) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO grants VALUES (?, ?, ?, ?)"
                " ON CONFLICT (course_id, user_id) DO NOTHING",
                (grant.course_id, grant.user_id, grant.granted_by,
                 _ts(grant.granted_at)),
            )

    def delete_grant(self, course_id: str, user_id: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "DELETE FROM grants WHERE course_id = ? AND user_id = ?",
                (course_id, user_id),
            )

    def has_grant(self, course_id: str, user_id: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM grants WHERE course_id = ? AND user_id = ?",
                (course_id, user_id),
            ).fetchone()
        return row is not None

    def granted_course_ids(self, user_id: str) -> set[str]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT course_id FROM grants WHERE user_id = ?", (user_id,)
            ).fetchall()
        return {r["course_id"] for r in rows}

    # --- documents / chunk metadata ------------------------------------------

    def insert_document(self, doc: SourceDocument) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO documents VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (doc.doc_id, doc.course_id, doc.title, doc.origin,
                 doc.origin_ref, doc.body, int(doc.body_dropped),
                 _ts(doc.ingested_at)),
            )

    def drop_document_body(self, doc_id: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE documents SET body = NULL, body_dropped = 1"
                " WHERE doc_id = ?",
                (doc_id,),
            )

    def get_document(self, doc_id: str) -> SourceDocument | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM documents WHERE doc_id = ?", (doc_id,)
            ).fetchone()
        if row is None:
            return None
        return SourceDocument(
            doc_id=row["doc_id"], course_id=row["course_id"],
            title=row["title"], origin=row["origin"],
            origin_ref=row["origin_ref"], body=row["body"],
            body_dropped=bool(row["body_dropped"]),
            ingested_at=_dt(row["ingested_at"]),
        )

    def list_documents(self, course_id: str) -> list[SourceDocument]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT doc_id FROM documents WHERE course_id = ?"
                " ORDER BY ingested_at, doc_id",
                (course_id,),
            ).fetchall()
        return [self.get_document(r["doc_id"]) for r in rows]

    def replace_chunks_meta(self, course_id: str,
                            rows: list[tuple[str, str, int, int]]) -> None:
        """rows: (chunk_id, doc_id, ordinal, word_count)."""
        with self._lock, self._conn:
            self._conn.execute(
                "DELETE FROM chunks_meta WHERE course_id = ?", (course_id,)
            )
            self._conn.executemany(
                "INSERT INTO chunks_meta VALUES (?, ?, ?, ?, ?)",
                [(course_id, *row) for row in rows],
            )

    def chunk_ids(self, course_id: str) -> set[str]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT chunk_id FROM chunks_meta WHERE course_id = ?",
                (course_id,),
            ).fetchall()
        return {r["chunk_id"] for r in rows}

    # --- chat turns -----------------------------------------------------------

    def insert_chat_turn(self, turn: ChatTurn) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO chat_turns VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (turn.turn_id, turn.user_id, turn.course_id, turn.mode,
                 turn.question, json.dumps(turn.context_chunk_ids),
                 turn.rendered_prompt, turn.answer, turn.model_id,
                 turn.latency_ms, _ts(turn.created_at)),
            )

    def list_chat_turns(self, course_id: str, user_id: str | None = None,
                        since: datetime | None = None,
                        until: datetime | None = None) -> list[ChatTurn]:
        sql = "SELECT * FROM chat_turns WHERE course_id = ?"
        params: list = [course_id]
        if user_id is not None:
            sql += " AND user_id = ?"
            params.append(user_id)
        if since is not None:
            sql += " AND created_at >= ?"
            params.append(_ts(since))
        if until is not None:
            sql += " AND created_at <= ?"
            params.append(_ts(until))
        sql += " ORDER BY created_at, turn_id"
        with self._lock:
            rows = self._conn.execute(sql, params).fetchall()
        return [
            ChatTurn(
                turn_id=r["turn_id"], user_id=r["user_id"],
                course_id=r["course_id"], mode=r["mode"],
                question=r["question"],
                context_chunk_ids=json.loads(r["context_chunk_ids"]),
                rendered_prompt=r["rendered_prompt"], answer=r["answer"],
                model_id=r["model_id"], latency_ms=r["latency_ms"],
                created_at=_dt(r["created_at"]),
            )
            for r in rows
        ]

    # --- quizzes / attempts -----------------------------------------------------

    def insert_quiz(self, quiz: Quiz) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO quizzes VALUES (?, ?, ?, ?)",
                (quiz.quiz_id, quiz.course_id, quiz.module_label,
                 _ts(quiz.created_at)),
            )
            self._conn.executemany(
                "INSERT INTO quiz_questions VALUES (?, ?, ?, ?, ?)",
                [
                    (quiz.quiz_id, i, q.question_text,
                     json.dumps(q.options), q.correct_index)
                    for i, q in enumerate(quiz.questions)
                ],
            )

    def get_quiz(self, quiz_id: str) -> Quiz | None:
        with self._lock:
            head = self._conn.execute(
                "SELECT * FROM quizzes WHERE quiz_id = ?", (quiz_id,)
            ).fetchone()
            if head is None:
                return None
            rows = self._conn.execute(
                "SELECT * FROM quiz_questions WHERE quiz_id = ?"
                " ORDER BY position",
                (quiz_id,),
            ).fetchall()
        return Quiz(
            quiz_id=head["quiz_id"], course_id=head["course_id"],
            module_label=head["module_label"],
            questions=[
                QuizQuestion(
                    question_text=r["question_text"],
                    options=json.loads(r["options"]),
                    correct_index=r["correct_index"],
                )
                for r in rows
            ],
            created_at=_dt(head["created_at"]),
        )

    def list_quizzes(self, course_id: str) -> list[Quiz]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT quiz_id FROM quizzes WHERE course_id = ?"
                " ORDER BY created_at, quiz_id",
                (course_id,),
            ).fetchall()
        return [self.get_quiz(r["quiz_id"]) for r in rows]

    def insert_attempt(self, attempt: QuizAttempt) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO quiz_attempts VALUES (?, ?, ?, ?, ?, ?)",
                (attempt.attempt_id, attempt.quiz_id, attempt.user_id,
                 json.dumps(attempt.answers), attempt.score,
                 _ts(attempt.completed_at)),
            )

    def attempts_with_modules(self, course_id: str) -> list[tuple[str, str, float]]:
        """(user_id, module_label, score) for every attempt in a course."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT a.user_id, q.module_label, a.score"
                " FROM quiz_attempts a JOIN quizzes q ON a.quiz_id = q.quiz_id"
                " WHERE q.course_id = ?",
                (course_id,),
            ).fetchall()
        return [(r["user_id"], r["module_label"], r["score"]) for r in rows]

    def module_labels(self, course_id: str) -> list[str]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT DISTINCT module_label FROM quizzes WHERE course_id = ?"
                " ORDER BY module_label",
                (course_id,),
            ).fetchall()
        return [r["module_label"] for r in rows]

    # --- study sessions --------------------------------------------------------

    def insert_session(self, session: SessionLog) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO sessions VALUES (?, ?, ?, ?, ?)",
                (session.session_id, session.user_id, session.course_id,
                 _ts(session.started_at), _ts(session.ended_at)),
            )

    def get_session(self, session_id: str) -> SessionLog | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM sessions WHERE session_id = ?", (session_id,)
            ).fetchone()
        if row is None:
            return None
        return SessionLog(
            session_id=row["session_id"], user_id=row["user_id"],
            course_id=row["course_id"], started_at=_dt(row["started_at"]),
            ended_at=_dt(row["ended_at"]),
        )

    def end_session(self, session_id: str, ended_at: datetime) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE sessions SET ended_at = ? WHERE session_id = ?",
                (_ts(ended_at), session_id),
            )

    def closed_sessions(self, course_id: str) -> list[SessionLog]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT session_id FROM sessions WHERE course_id = ?"
                " AND ended_at IS NOT NULL ORDER BY started_at",
                (course_id,),
            ).fetchall()
        return [self.get_session(r["session_id"]) for r in rows]
