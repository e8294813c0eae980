"""Record types persisted by the relational store."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class UserAccount:
    user_id: str
    username: str
    email: str
    password_hash: str
    role: str  # "instructor" | "learner"
    created_at: datetime = field(default_factory=utcnow)


@dataclass
class PaymentRecord:
    payment_id: str
    user_id: str
    plan: str  # "learner_basic" | "instructor_basic"
    amount: int  # minor currency units
    merchant_txn_id: str
    status: str  # "pending" | "confirmed" | "failed"
    created_at: datetime = field(default_factory=utcnow)


@dataclass
class Course:
    course_id: str
    title: str
    slug: str
    visibility: str  # "public" | "private"
    owner_id: str
    created_at: datetime = field(default_factory=utcnow)


@dataclass
class AccessGrant:
    course_id: str
    user_id: str
    granted_by: str
    granted_at: datetime = field(default_factory=utcnow)


@dataclass
class SourceDocument:
    """Normalized course text plus provenance metadata.

    After indexing, body may be dropped; body_dropped records that the
    content was deliberately discarded rather than never ingested.
    """

    doc_id: str
    course_id: str
    title: str
    origin: str  # "upload" | "youtube"
    origin_ref: str
    body: str | None
    body_dropped: bool = False
    ingested_at: datetime = field(default_factory=utcnow)


@dataclass
class ChatTurn:
    """One recorded (prompt, question, context, answer, timing) tuple."""

    turn_id: str
    user_id: str
    course_id: str
    mode: str
    question: str
    context_chunk_ids: list[str]
    rendered_prompt: str
    answer: str
    model_id: str
    latency_ms: int
    created_at: datetime = field(default_factory=utcnow)


@dataclass
class QuizQuestion:
    question_text: str
    options: list[str]  # exactly 4
    correct_index: int  # 0..3


@dataclass
class Quiz:
    quiz_id: str
    course_id: str
    module_label: str
    questions: list[QuizQuestion]
    created_at: datetime = field(default_factory=utcnow)


@dataclass
class QuizAttempt:
    attempt_id: str
    quiz_id: str
    user_id: str
    answers: list[int]
    score: float  # correct/total
    completed_at: datetime = field(default_factory=utcnow)


@dataclass
class SessionLog:
    session_id: str
    user_id: str
    course_id: str
    started_at: datetime
    ended_at: datetime | None = None
