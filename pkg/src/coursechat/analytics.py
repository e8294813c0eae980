"""Quizzes, weak-module reporting, and engagement-time aggregation.

A module is "weak" for a user when their best attempt score in it falls
below the threshold; early failed attempts followed by a passing one do
not count against them.
"""

from __future__ import annotations

import csv
import io
import json
import re
import uuid
from collections import Counter
from typing import TYPE_CHECKING

from .errors import (
    CourseNotFound,
    InsufficientContent,
    LengthMismatch,
    QuizNotFound,
)
from .index import CourseIndex
from .models import Quiz, QuizAttempt, QuizQuestion
from .retrieval import bm25_scores
from .storage import Database
from .text import content_tokens, tokenize

if TYPE_CHECKING:
    from .chat import ChatClient

DEFAULT_WEAK_THRESHOLD = 0.5
BLANK = "____"

QUIZ_PROMPT = (
    "Write {n} multiple-choice questions about the material below. "
    'Reply with JSON only, shaped {{"questions": [{{"question_text": str, '
    '"options": [str, str, str, str], "correct_index": int}}]}}.\n\n{material}'
)


def _top_term(text: str) -> str | None:
    """Highest-TF non-stopword term; earliest occurrence wins ties."""
    tokens = content_tokens(text)
    if not tokens:
        return None
    counts = Counter(tokens)
    best = max(counts.values())
    for tok in tokens:
        if counts[tok] == best:
            return tok
    return None


def _cloze(text: str, term: str) -> str:
    return re.sub(
        rf"\b{re.escape(term)}\b", BLANK, text, flags=re.IGNORECASE
    )


def _fallback_questions(index: CourseIndex, module_label: str,
                        n_questions: int) -> list[QuizQuestion]:
    scores = bm25_scores(tokenize(module_label), index)
    ranked = sorted(
        index.chunks,
        key=lambda c: (-scores.get(c.chunk_id, 0.0), index.row_of(c.chunk_id)),
    )
    usable = [c for c in ranked if _top_term(c.text) is not None]
    if len(usable) < n_questions:
        raise InsufficientContent(
            f"{len(usable)} usable chunks, need {n_questions}"
        )
    picked = usable[:n_questions]

    questions = []
    for chunk in picked:
        answer = _top_term(chunk.text)
        pool: list[str] = []
        for other in usable:
            if other.chunk_id == chunk.chunk_id:
                continue
            for term, _ in Counter(content_tokens(other.text)).most_common():
                if term != answer and term not in pool:
                    pool.append(term)
        if len(pool) < 3:
            raise InsufficientContent(
                f"not enough distractor terms for {chunk.chunk_id}"
            )
        options = sorted([answer, *pool[:3]])
        questions.append(
            QuizQuestion(
                question_text=_cloze(chunk.text, answer),
                options=options,
                correct_index=options.index(answer),
            )
        )
    return questions


def _llm_questions(index: CourseIndex, module_label: str, n_questions: int,
                   llm: "ChatClient") -> list[QuizQuestion] | None:
    scores = bm25_scores(tokenize(module_label), index)
    ranked = sorted(
        index.chunks,
        key=lambda c: (-scores.get(c.chunk_id, 0.0), index.row_of(c.chunk_id)),
    )
    material = "\n\n".join(c.text for c in ranked[: max(n_questions, 4)])
    try:
        reply = llm.complete(
            [{"role": "user",
              "content": QUIZ_PROMPT.format(n=n_questions, material=material)}]
        )
        payload = json.loads(reply)
        questions = [
            QuizQuestion(
                question_text=q["question_text"],
                options=list(q["options"]),
                correct_index=int(q["correct_index"]),
            )
            for q in payload["questions"]
        ]
    except Exception:
        return None
    if len(questions) != n_questions:
        return None
    for q in questions:
        if len(q.options) != 4 or not 0 <= q.correct_index <= 3:
            return None
    return questions


def generate_quiz(db: Database, index: CourseIndex, course_id: str,
                  module_label: str, n_questions: int,
                  llm: "ChatClient | None" = None) -> Quiz:
    """Create and persist a quiz for a module.

    With an LLM client the questions come from the model (validated JSON);
    otherwise cloze questions are built by blanking each top chunk's
    dominant term, with distractors drawn from other chunks' terms.
    """
    if n_questions < 1:
        raise ValueError("n_questions must be >= 1")
    if not module_label.strip():
        raise ValueError("module_label must be non-empty")
    questions = None
    if llm is not None:
        questions = _llm_questions(index, module_label, n_questions, llm)
    if questions is None:
        questions = _fallback_questions(index, module_label, n_questions)
    quiz = Quiz(
        quiz_id=uuid.uuid4().hex,
        course_id=course_id,
        module_label=module_label,
        questions=questions,
    )
    db.insert_quiz(quiz)
    return quiz


def record_attempt(db: Database, user_id: str, quiz_id: str,
                   answers: list[int]) -> QuizAttempt:
    """Score an attempt exactly and persist it; attempts are immutable."""
    quiz = db.get_quiz(quiz_id)
    if quiz is None:
        raise QuizNotFound(f"no quiz {quiz_id!r}")
    if len(answers) != len(quiz.questions):
        raise LengthMismatch(
            f"{len(answers)} answers for {len(quiz.questions)} questions"
        )
    correct = sum(
        1 for a, q in zip(answers, quiz.questions) if a == q.correct_index
    )
    attempt = QuizAttempt(
        attempt_id=uuid.uuid4().hex,
        quiz_id=quiz_id,
        user_id=user_id,
        answers=list(answers),
        score=correct / len(quiz.questions),
    )
    db.insert_attempt(attempt)
    return attempt


def weak_module_report(db: Database, course_id: str,
                       threshold: float = DEFAULT_WEAK_THRESHOLD) -> dict[str, int]:
    """Distinct users whose best score in a module stays below threshold.

    Every module with a quiz appears in the result, zero-count included;
    users who never attempted a module are not counted for it.
    """
    if db.get_course(course_id) is None:
        raise CourseNotFound(f"no course {course_id!r}")
    best: dict[tuple[str, str], float] = {}
    for user_id, label, score in db.attempts_with_modules(course_id):
        key = (user_id, label)
        if key not in best or score > best[key]:
            best[key] = score
    report = {label: 0 for label in db.module_labels(course_id)}
    for (_user, label), score in best.items():
        if score < threshold:
            report[label] += 1
    return report


def avg_time_spent(db: Database, course_id: str) -> float:
    """Mean closed-session duration in seconds; 0.0 with no closed sessions."""
    if db.get_course(course_id) is None:
        raise CourseNotFound(f"no course {course_id!r}")
    durations = [
        (s.ended_at - s.started_at).total_seconds()
        for s in db.closed_sessions(course_id)
    ]
    return sum(durations) / len(durations) if durations else 0.0


def weak_modules_csv(report: dict[str, int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["module_label", "weak_user_count"])
    for label in sorted(report):
        writer.writerow([label, report[label]])
    return buf.getvalue()


def time_spent_csv(course_id: str, avg_seconds: float) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["course_id", "avg_seconds"])
    writer.writerow([course_id, avg_seconds])
    return buf.getvalue()
