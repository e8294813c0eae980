"""Prompt-template-governed chat over retrieved course context.

Each mode's template ships as a golden file with {context} and {question}
slots; rendering substitutes concatenated chunk texts in retrieval rank
order. Every answered question persists exactly one ChatTurn, refusals and
LLM failures included.
"""

from __future__ import annotations

import re
import time
import uuid
from datetime import datetime
from importlib import resources
from typing import TYPE_CHECKING, Protocol

import httpx

from .chunking import Chunk
from .errors import AccessDenied, LlmUnavailable, UnknownMode
from .models import ChatTurn

if TYPE_CHECKING:
    from .courses import CourseManager
    from .storage import Database

PROMPT_MODES = ("restricted", "relaxed", "medical")
REFUSAL = "I don't know."
LLM_ERROR_MARKER = "[llm_unavailable]"
DEFAULT_TEMPERATURE = 0.2
DEFAULT_CONTEXT_K = 4


def load_template(mode: str) -> str:
    """Read the golden template file for a mode, bytes untouched."""
    if mode not in PROMPT_MODES:
        raise UnknownMode(f"unknown prompt mode {mode!r}")
    return (
        resources.files("coursechat.templates")
        .joinpath(f"{mode}.txt")
        .read_text(encoding="utf-8")
    )


_SLOT_RE = re.compile(r"\{(context|question)\}")


def render_prompt(mode: str, context_chunks: list[Chunk], question: str) -> str:
    """Substitute context and question into the mode's template.

    Chunk texts are joined by blank lines in retrieval rank order. One
    substitution pass, so slot-like text inside course content is never
    re-expanded.
    """
    template = load_template(mode)
    context = "\n\n".join(c.text for c in context_chunks)
    values = {"context": context, "question": question}
    return _SLOT_RE.sub(lambda m: values[m.group(1)], template)


class ChatClient(Protocol):
    """Chat-completion client contract."""

    model: str

    def complete(self, messages: list[dict],
                 temperature: float = DEFAULT_TEMPERATURE) -> str:
        """Return the assistant message content. Raises LlmUnavailable."""
        ...


class HttpChatClient:
    """Client for a chat-completion HTTP endpoint.

    Request {model, messages, temperature} -> response {content}. Endpoint
    and key come from configuration and are never logged.
    """

    def __init__(self, endpoint: str, model: str, api_key: str = "",
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, messages: list[dict],
                 temperature: float = DEFAULT_TEMPERATURE) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(
                self.endpoint,
                json={
                    "model": self.model,
                    "messages": messages,
                    "temperature": temperature,
                },
                headers=headers,
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise LlmUnavailable(str(exc)) from exc
        if resp.status_code != 200:
            raise LlmUnavailable(f"chat endpoint status {resp.status_code}")
        try:
            return resp.json()["content"]
        except (ValueError, KeyError) as exc:
            raise LlmUnavailable("malformed chat response") from exc


class ChatService:
    """Runs the retrieve -> render -> complete -> record pipeline."""

    def __init__(self, db: "Database", courses: "CourseManager",
                 llm: ChatClient | None, refusal_guard: bool = True):
        self.db = db
        self.courses = courses
        self.llm = llm
        # Deterministic restricted-mode refusal on empty retrieval; the
        # prompt-level instruction alone is not machine-checkable.
        self.refusal_guard = refusal_guard

    def answer(self, user_id: str, course_id: str, question: str,
               index, query, mode: str = "restricted",
               k: int = DEFAULT_CONTEXT_K) -> ChatTurn:
        """Answer a question against a loaded course index.

        `query` is the retrieval-ready Query for `question`; `index` the
        course's CourseIndex. Access must have been checked by the caller
        via CourseManager (the API layer does); this method still records
        the turn for every outcome, including refusals and LLM errors.
        """
        from .retrieval import hybrid_retrieve

        if mode not in PROMPT_MODES:
            raise UnknownMode(f"unknown prompt mode {mode!r}")
        started = time.monotonic()
        results = hybrid_retrieve(query, index, k=k)
        # Candidates with no positive evidence in either family are noise.
        supported = [
            r for r in results if r.bm25_score > 0.0 or r.cosine_score > 0.0
        ]
        # The guard keys on the lexical family: hashed embeddings give
        # spurious small cosines, so "no keyword matched anything" is the
        # machine-checkable emptiness signal. Keyword-less queries already
        # degraded to vector-only retrieval and are served normally.
        no_lexical_hit = not query.vector_only and all(
            r.bm25_score <= 0.0 for r in results
        )

        if mode == "restricted" and self.refusal_guard and no_lexical_hit:
            turn = self._record(
                user_id, course_id, mode, question,
                context_chunk_ids=[],
                rendered_prompt=render_prompt(mode, [], question),
                answer=REFUSAL,
                started=started,
            )
            return turn

        chunks = [index.chunk_by_id(r.chunk_id) for r in supported]
        prompt = render_prompt(mode, chunks, question)
        try:
            if self.llm is None:
                raise LlmUnavailable("no chat client configured")
            reply = self.llm.complete(
                [{"role": "user", "content": prompt}],
                temperature=DEFAULT_TEMPERATURE,
            )
        except LlmUnavailable:
            self._record(
                user_id, course_id, mode, question,
                context_chunk_ids=[c.chunk_id for c in chunks],
                rendered_prompt=prompt,
                answer=LLM_ERROR_MARKER,
                started=started,
            )
            raise
        return self._record(
            user_id, course_id, mode, question,
            context_chunk_ids=[c.chunk_id for c in chunks],
            rendered_prompt=prompt,
            answer=reply,
            started=started,
        )

    def _record(self, user_id, course_id, mode, question, context_chunk_ids,
                rendered_prompt, answer, started) -> ChatTurn:
        turn = ChatTurn(
            turn_id=uuid.uuid4().hex,
            user_id=user_id,
            course_id=course_id,
            mode=mode,
            question=question,
            context_chunk_ids=context_chunk_ids,
            rendered_prompt=rendered_prompt,
            answer=answer,
            model_id=self.llm.model if self.llm else "none",
            latency_ms=max(0, int((time.monotonic() - started) * 1000)),
        )
        self.db.insert_chat_turn(turn)
        return turn

    def list_turns(self, caller_id: str, course_id: str,
                   user_id: str | None = None,
                   since: datetime | None = None,
                   until: datetime | None = None) -> list[ChatTurn]:
        """Turns in created_at order; learners see only their own."""
        course = self.courses.get_course(course_id)
        if caller_id != course.owner_id:
            self.courses.require_access(caller_id, course_id)
            if user_id is not None and user_id != caller_id:
                raise AccessDenied("learners may list only their own turns")
            user_id = caller_id
        return self.db.list_chat_turns(course_id, user_id, since, until)
