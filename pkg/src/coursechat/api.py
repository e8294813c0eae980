"""HTTP service exposing every platform operation with bearer-token auth.

All bodies are JSON except document upload, which is multipart. Every
error response carries the fixed {status, code, message} shape and a
stable machine code; stack traces never leave the process.
"""

from __future__ import annotations

from datetime import datetime
from email import policy
from email.parser import BytesParser

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from . import analytics
from .errors import (
    CourseChatError,
    InvalidToken,
    QuizNotFound,
    UnsupportedFormat,
)
from .models import Course, Quiz, UserAccount
from .service import CoursePlatform

PUBLIC_ROUTES = {
    ("POST", "/auth/register"),
    ("POST", "/auth/login"),
    ("POST", "/auth/pay"),
    ("POST", "/auth/reset-request"),
    ("POST", "/auth/reset-confirm"),
}


class RegisterRequest(BaseModel):
    username: str
    email: str
    password: str
    role: str
    plan: str


class LoginRequest(BaseModel):
    username: str
    password: str


class PayRequest(BaseModel):
    username: str
    plan: str


class ResetRequest(BaseModel):
    username: str


class ResetConfirmRequest(BaseModel):
    reset_token: str
    new_password: str


class CourseCreateRequest(BaseModel):
    title: str
    visibility: str


class GrantRequest(BaseModel):
    user_id: str


class YoutubeRequest(BaseModel):
    url: str
    preferred_langs: list[str] = ["en"]


class ChatRequest(BaseModel):
    question: str
    mode: str = "restricted"
    k: int = 4


class QuizCreateRequest(BaseModel):
    module_label: str
    n_questions: int


class AttemptRequest(BaseModel):
    answers: list[int]


def parse_multipart(content_type: str, body: bytes) -> dict[str, tuple[str | None, bytes]]:
    """Parse multipart/form-data into {field: (filename, payload)}."""
    if "multipart/form-data" not in content_type:
        raise UnsupportedFormat("expected multipart/form-data")
    header = f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n"
    message = BytesParser(policy=policy.HTTP).parsebytes(
        header.encode("latin-1") + body
    )
    fields: dict[str, tuple[str | None, bytes]] = {}
    for part in message.iter_parts():
        name = part.get_param("name", header="content-disposition")
        if name is None:
            continue
        payload = part.get_payload(decode=True) or b""
        fields[str(name)] = (part.get_filename(), payload)
    return fields


def _course_json(course: Course) -> dict:
    return {
        "course_id": course.course_id,
        "title": course.title,
        "slug": course.slug,
        "visibility": course.visibility,
        "owner_id": course.owner_id,
        "created_at": course.created_at.isoformat(),
    }


def _quiz_json(quiz: Quiz, include_answers: bool) -> dict:
    questions = []
    for q in quiz.questions:
        item = {"question_text": q.question_text, "options": q.options}
        if include_answers:
            item["correct_index"] = q.correct_index
        questions.append(item)
    return {
        "quiz_id": quiz.quiz_id,
        "course_id": quiz.course_id,
        "module_label": quiz.module_label,
        "questions": questions,
        "created_at": quiz.created_at.isoformat(),
    }


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"status": status, "code": code, "message": message},
    )


def create_app(platform: CoursePlatform) -> FastAPI:
    app = FastAPI(
        title="coursechat",
        docs_url=None,
        redoc_url=None,
        openapi_url=None,
    )
    app.state.platform = platform

    @app.exception_handler(CourseChatError)
    async def domain_error(_req: Request, exc: CourseChatError):
        return _error_response(exc.http_status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def validation_error(_req: Request, exc: RequestValidationError):
        return _error_response(400, "validation_error", str(exc.errors()[:3]))

    @app.exception_handler(ValueError)
    async def value_error(_req: Request, exc: ValueError):
        return _error_response(400, "validation_error", str(exc))

    @app.exception_handler(404)
    async def not_found(_req: Request, exc):
        return _error_response(404, "not_found", "no such route")

    @app.exception_handler(405)
    async def bad_method(_req: Request, exc):
        return _error_response(405, "method_not_allowed", "method not allowed")

    @app.exception_handler(Exception)
    async def unhandled(_req: Request, exc: Exception):
        # Deliberately unspecific: no stack traces or internals in responses.
        return _error_response(500, "internal_error", "internal error")

    def authed(request: Request) -> UserAccount:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise InvalidToken("missing bearer token")
        return platform.courses.authenticate(header[7:].strip())

    @app.middleware("http")
    async def require_bearer(request: Request, call_next):
        # Token enforcement happens before routing and body validation, so
        # an unauthenticated request is always a plain 401.
        if (request.method, request.url.path) not in PUBLIC_ROUTES:
            try:
                authed(request)
            except InvalidToken as exc:
                return _error_response(exc.http_status, exc.code, exc.message)
        return await call_next(request)

    # --- auth ---------------------------------------------------------------

    @app.post("/auth/register", status_code=201)
    async def register(body: RegisterRequest):
        user_id = platform.courses.register(
            body.username, body.email, body.password, body.role, body.plan
        )
        return {"user_id": user_id, "status": "awaiting_payment"}

    @app.post("/auth/pay")
    async def pay(body: PayRequest):
        record = platform.courses.pay_by_username(body.username, body.plan)
        return {
            "payment_id": record.payment_id,
            "merchant_txn_id": record.merchant_txn_id,
            "status": record.status,
        }

    @app.post("/auth/login")
    async def login(body: LoginRequest):
        token, expires = platform.courses.login(body.username, body.password)
        user = platform.courses.authenticate(token)
        # user_id/username/role ride along so clients can gate views
        # without an extra round trip.
        return {
            "token": token,
            "expires_at": expires.isoformat(),
            "user_id": user.user_id,
            "username": user.username,
            "role": user.role,
        }

    @app.post("/auth/logout", status_code=204)
    async def logout(request: Request):
        authed(request)
        platform.courses.logout(request.headers["authorization"][7:].strip())
        return Response(status_code=204)

    @app.post("/auth/reset-request")
    async def reset_request(body: ResetRequest):
        token, expires = platform.courses.request_password_reset(body.username)
        return {"reset_token": token, "expires_at": expires.isoformat()}

    @app.post("/auth/reset-confirm", status_code=204)
    async def reset_confirm(body: ResetConfirmRequest):
        platform.courses.reset_password(body.reset_token, body.new_password)
        return Response(status_code=204)

    # --- courses / grants ------------------------------------------------------

    @app.get("/courses")
    async def list_courses(request: Request):
        user = authed(request)
        return [_course_json(c) for c in platform.courses.list_accessible(user)]

    @app.post("/courses", status_code=201)
    async def create_course(request: Request, body: CourseCreateRequest):
        user = authed(request)
        course = platform.courses.create_course(user, body.title, body.visibility)
        return _course_json(course)

    @app.get("/courses/{course_id}")
    async def course_detail(request: Request, course_id: str):
        user = authed(request)
        course = platform.courses.require_access(user.user_id, course_id)
        data = _course_json(course)
        try:
            data["manifest_version"] = platform.get_index(course).manifest_version
        except CourseChatError:
            data["manifest_version"] = None
        data["n_documents"] = len(platform.db.list_documents(course_id))
        return data

    @app.post("/courses/{course_id}/grants", status_code=204)
    async def grant(request: Request, course_id: str, body: GrantRequest):
        user = authed(request)
        platform.courses.grant_access(user, course_id, body.user_id)
        return Response(status_code=204)

    @app.delete("/courses/{course_id}/grants/{user_id}", status_code=204)
    async def revoke(request: Request, course_id: str, user_id: str):
        user = authed(request)
        platform.courses.revoke_access(user, course_id, user_id)
        return Response(status_code=204)

    # --- ingestion ---------------------------------------------------------------

    @app.post("/courses/{course_id}/documents", status_code=202)
    async def upload_document(request: Request, course_id: str):
        user = authed(request)
        course = platform.courses.require_owner(user, course_id)
        fields = parse_multipart(
            request.headers.get("content-type", ""), await request.body()
        )
        if "file" not in fields or "declared_format" not in fields:
            raise UnsupportedFormat("multipart needs 'file' and 'declared_format'")
        filename, data = fields["file"]
        declared = fields["declared_format"][1].decode("utf-8", "replace").strip()
        job = platform.upload_document(
            course, filename or "upload", data, declared
        )
        return {"job_id": job.job_id}

    @app.post("/courses/{course_id}/youtube", status_code=202)
    async def ingest_youtube(request: Request, course_id: str, body: YoutubeRequest):
        user = authed(request)
        course = platform.courses.require_owner(user, course_id)
        job = platform.ingest_youtube(course, body.url, body.preferred_langs)
        return {"job_id": job.job_id}

    @app.get("/jobs/{job_id}")
    async def job_status(request: Request, job_id: str):
        user = authed(request)
        job = platform.jobs.get(job_id)
        platform.courses.require_owner(user, job.course_id)
        return job.snapshot()

    # --- chat ------------------------------------------------------------------

    @app.post("/courses/{course_id}/chat")
    async def chat(request: Request, course_id: str, body: ChatRequest):
        user = authed(request)
        turn = platform.answer(
            user.user_id, course_id, body.question, mode=body.mode, k=body.k
        )
        return {
            "answer": turn.answer,
            "context_chunk_ids": turn.context_chunk_ids,
            "turn_id": turn.turn_id,
        }

    @app.get("/courses/{course_id}/turns")
    async def list_turns(request: Request, course_id: str,
                         user_id: str | None = None,
                         since: str | None = None,
                         until: str | None = None):
        user = authed(request)
        turns = platform.chat.list_turns(
            user.user_id, course_id,
            user_id=user_id,
            since=datetime.fromisoformat(since) if since else None,
            until=datetime.fromisoformat(until) if until else None,
        )
        return [
            {
                "turn_id": t.turn_id,
                "user_id": t.user_id,
                "mode": t.mode,
                "question": t.question,
                "context_chunk_ids": t.context_chunk_ids,
                "rendered_prompt": t.rendered_prompt,
                "answer": t.answer,
                "model_id": t.model_id,
                "latency_ms": t.latency_ms,
                "created_at": t.created_at.isoformat(),
            }
            for t in turns
        ]

    # --- analytics ---------------------------------------------------------------

    @app.get("/courses/{course_id}/analytics/weak-modules")
    async def weak_modules(request: Request, course_id: str,
                           threshold: float = analytics.DEFAULT_WEAK_THRESHOLD,
                           format: str = "json"):
        user = authed(request)
        platform.courses.require_owner(user, course_id)
        report = analytics.weak_module_report(platform.db, course_id, threshold)
        if format == "csv":
            return PlainTextResponse(
                analytics.weak_modules_csv(report), media_type="text/csv"
            )
        return report

    @app.get("/courses/{course_id}/analytics/time")
    async def time_spent(request: Request, course_id: str,
                         format: str = "json"):
        user = authed(request)
        platform.courses.require_owner(user, course_id)
        avg = analytics.avg_time_spent(platform.db, course_id)
        if format == "csv":
            return PlainTextResponse(
                analytics.time_spent_csv(course_id, avg), media_type="text/csv"
            )
        return {"course_id": course_id, "avg_seconds": avg}

    # --- quizzes -------------------------------------------------------------------

    @app.post("/courses/{course_id}/quizzes", status_code=201)
    async def create_quiz(request: Request, course_id: str,
                          body: QuizCreateRequest):
        user = authed(request)
        course = platform.courses.require_owner(user, course_id)
        index = platform.get_index(course)
        quiz = analytics.generate_quiz(
            platform.db, index, course_id, body.module_label, body.n_questions,
            llm=platform.chat_client,
        )
        return _quiz_json(quiz, include_answers=True)

    @app.get("/courses/{course_id}/quizzes")
    async def list_quizzes(request: Request, course_id: str):
        user = authed(request)
        course = platform.courses.require_access(user.user_id, course_id)
        include = course.owner_id == user.user_id
        return [
            _quiz_json(q, include_answers=include)
            for q in platform.db.list_quizzes(course_id)
        ]

    @app.post("/quizzes/{quiz_id}/attempts", status_code=201)
    async def attempt_quiz(request: Request, quiz_id: str,
                           body: AttemptRequest):
        user = authed(request)
        quiz = platform.db.get_quiz(quiz_id)
        if quiz is None:
            raise QuizNotFound(f"no quiz {quiz_id!r}")
        platform.courses.require_access(user.user_id, quiz.course_id)
        attempt = analytics.record_attempt(
            platform.db, user.user_id, quiz_id, body.answers
        )
        return {"attempt_id": attempt.attempt_id, "score": attempt.score}

    # --- study sessions ---------------------------------------------------------------

    @app.post("/courses/{course_id}/sessions", status_code=201)
    async def start_session(request: Request, course_id: str):
        user = authed(request)
        session = platform.start_session(user.user_id, course_id)
        return {
            "session_id": session.session_id,
            "started_at": session.started_at.isoformat(),
        }

    @app.post("/sessions/{session_id}/end")
    async def end_session(request: Request, session_id: str):
        user = authed(request)
        seconds = platform.end_session(user.user_id, session_id)
        return {"session_id": session_id, "seconds": seconds}

    return app
