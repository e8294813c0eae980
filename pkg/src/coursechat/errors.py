"""Exception hierarchy shared across the platform.

Every error carries a stable machine code and the HTTP status the API
layer maps it to, so service responses stay uniform without per-endpoint
translation tables.
"""

from __future__ import annotations


class CourseChatError(Exception):
    """Base class for all domain errors."""

    code = "internal_error"
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# --- ingest ---------------------------------------------------------------

class MalformedUrl(CourseChatError):
    code = "malformed_url"
    http_status = 400


class TranscriptUnavailable(CourseChatError):
    code = "transcript_unavailable"
    http_status = 424


class LanguageUnavailable(CourseChatError):
    code = "language_unavailable"
    http_status = 424


class ProviderUnreachable(CourseChatError):
    code = "provider_unreachable"
    http_status = 502


class EmptyTranscript(CourseChatError):
    code = "empty_transcript"
    http_status = 400


class InvalidEncoding(CourseChatError):
    code = "invalid_encoding"
    http_status = 415


class UnsupportedFormat(CourseChatError):
    code = "unsupported_format"
    http_status = 415


class EmptyDocument(CourseChatError):
    code = "empty_document"
    http_status = 400


# --- chunking / embedding -------------------------------------------------

class EmptyInput(CourseChatError):
    code = "empty_input"
    http_status = 400


class DimensionMismatch(CourseChatError):
    code = "dimension_mismatch"
    http_status = 400


# --- index / object store -------------------------------------------------

class EmptyCourse(CourseChatError):
    code = "empty_course"
    http_status = 400


class StoreUnavailable(CourseChatError):
    code = "store_unavailable"
    http_status = 503


class SerializationFailure(CourseChatError):
    code = "serialization_failure"
    http_status = 500


class IndexNotFound(CourseChatError):
    code = "index_not_found"
    http_status = 404


class CorruptIndex(CourseChatError):
    code = "corrupt_index"
    http_status = 500


# --- retrieval ------------------------------------------------------------

class EmptyQuery(CourseChatError):
    code = "empty_query"
    http_status = 400


class EmptyIndex(CourseChatError):
    code = "empty_index"
    http_status = 404


# --- chat -----------------------------------------------------------------

class UnknownMode(CourseChatError):
    code = "unknown_mode"
    http_status = 400


class LlmUnavailable(CourseChatError):
    code = "llm_unavailable"
    http_status = 502


# --- accounts / courses ---------------------------------------------------

class UsernameTaken(CourseChatError):
    code = "username_taken"
    http_status = 409


class WeakPassword(CourseChatError):
    code = "weak_password"
    http_status = 400


class InvalidCredentials(CourseChatError):
    code = "invalid_credentials"
    http_status = 401


class InvalidToken(CourseChatError):
    code = "invalid_token"
    http_status = 401


class PaymentRequired(CourseChatError):
    code = "payment_required"
    http_status = 402


class PaymentFailed(CourseChatError):
    code = "payment_failed"
    http_status = 402


class GatewayUnreachable(CourseChatError):
    code = "gateway_unreachable"
    http_status = 502


class AccessDenied(CourseChatError):
    code = "access_denied"
    http_status = 403


class DuplicateSlug(CourseChatError):
    code = "duplicate_slug"
    http_status = 409


class NotPrivateCourse(CourseChatError):
    code = "not_private_course"
    http_status = 400


class CourseNotFound(CourseChatError):
    code = "course_not_found"
    http_status = 404


class UserNotFound(CourseChatError):
    code = "user_not_found"
    http_status = 404


# --- analytics ------------------------------------------------------------

class QuizNotFound(CourseChatError):
    code = "quiz_not_found"
    http_status = 404


class LengthMismatch(CourseChatError):
    code = "length_mismatch"
    http_status = 400


class InsufficientContent(CourseChatError):
    code = "insufficient_content"
    http_status = 422


class EmptyText(CourseChatError):
    code = "empty_text"
    http_status = 400


# --- api plumbing ---------------------------------------------------------

class JobNotFound(CourseChatError):
    code = "job_not_found"
    http_status = 404


class SessionNotFound(CourseChatError):
    code = "session_not_found"
    http_status = 404


def _collect_codes() -> frozenset[str]:
    # The non-exception codes the API layer emits directly.
    codes = {"internal_error", "validation_error", "not_found",
             "method_not_allowed"}
    stack = [CourseChatError]
    while stack:
        cls = stack.pop()
        codes.add(cls.code)
        stack.extend(cls.__subclasses__())
    return frozenset(codes)


#: The fixed, published enumeration of machine codes an API response may carry.
API_ERROR_CODES = _collect_codes()
