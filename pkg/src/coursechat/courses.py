"""Identity, subscription gating, course lifecycle, and the grant-based
privacy model.

Login requires both a verified password and a confirmed payment record;
private courses are readable only by their owner and explicitly granted
users.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import secrets
import uuid
from datetime import datetime, timedelta
from typing import Protocol

from .errors import (
    AccessDenied,
    CourseNotFound,
    DuplicateSlug,
    GatewayUnreachable,
    InvalidCredentials,
    InvalidToken,
    NotPrivateCourse,
    PaymentFailed,
    PaymentRequired,
    UserNotFound,
    UsernameTaken,
    WeakPassword,
)
from .index import slugify
from .models import AccessGrant, Course, PaymentRecord, UserAccount, utcnow
from .storage import Database

ROLES = ("instructor", "learner")
PLANS = {"learner_basic": 49900, "instructor_basic": 99900}
MIN_PASSWORD_LEN = 8
TOKEN_TTL = timedelta(hours=24)
RESET_TOKEN_TTL = timedelta(hours=1)

# scrypt cost parameters; adaptive and memory-hard.
_SCRYPT_N, _SCRYPT_R, _SCRYPT_P = 2**14, 8, 1


def hash_password(password: str) -> str:
    salt = os.urandom(16)
    digest = hashlib.scrypt(
        password.encode("utf-8"), salt=salt,
        n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P,
    )
    return f"scrypt${_SCRYPT_N}${_SCRYPT_R}${_SCRYPT_P}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, n, r, p, salt_hex, digest_hex = stored.split("$")
        if scheme != "scrypt":
            return False
        digest = hashlib.scrypt(
            password.encode("utf-8"), salt=bytes.fromhex(salt_hex),
            n=int(n), r=int(r), p=int(p),
        )
        return hmac.compare_digest(digest.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


# Verified against when the username does not exist, so login cost does not
# reveal which credential was wrong.
_DUMMY_HASH = hash_password("correct horse battery staple")


class PaymentGateway(Protocol):
    """External payment provider contract."""

    def initiate(self, user_id: str, plan: str, amount: int,
                 payment_id: str) -> tuple[str, str]:
        """Start a payment; returns (merchant_txn_id, redirect_ref)."""
        ...

    def status(self, merchant_txn_id: str) -> str:
        """One of 'pending' | 'confirmed' | 'failed'."""
        ...


class StubPaymentGateway:
    """Deterministic gateway stand-in: every payment confirms immediately."""

    def initiate(self, user_id: str, plan: str, amount: int,
                 payment_id: str) -> tuple[str, str]:
        return f"TEST-{payment_id}", f"stub://pay/{payment_id}"

    def status(self, merchant_txn_id: str) -> str:
        return "confirmed"


class CourseManager:
    def __init__(self, db: Database, gateway: PaymentGateway | None = None):
        self.db = db
        self.gateway = gateway or StubPaymentGateway()

    # --- registration / payment / login -----------------------------------

    def register(self, username: str, email: str, password: str,
                 role: str, plan: str) -> str:
        """Create an account awaiting payment; login stays disabled until
        a payment for it confirms."""
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        if plan not in PLANS:
            raise ValueError(f"unknown plan {plan!r}")
        if len(password) < MIN_PASSWORD_LEN:
            raise WeakPassword(
                f"password must be at least {MIN_PASSWORD_LEN} characters"
            )
        if self.db.username_taken(username):
            raise UsernameTaken(f"username {username!r} is taken")
        user = UserAccount(
            user_id=uuid.uuid4().hex,
            username=username,
            email=email,
            password_hash=hash_password(password),
            role=role,
        )
        self.db.insert_user(user)
        self.db.insert_payment(
            PaymentRecord(
                payment_id=uuid.uuid4().hex,
                user_id=user.user_id,
                plan=plan,
                amount=PLANS[plan],
                merchant_txn_id="",
                status="pending",
            )
        )
        return user.user_id

    def process_payment(self, user_id: str, plan: str) -> PaymentRecord:
        """Drive the gateway initiate/poll flow for the user's pending plan."""
        if plan not in PLANS:
            raise ValueError(f"unknown plan {plan!r}")
        if self.db.get_user(user_id) is None:
            raise UserNotFound(f"no user {user_id!r}")
        record = self.db.pending_payment(user_id, plan)
        if record is None:
            record = PaymentRecord(
                payment_id=uuid.uuid4().hex,
                user_id=user_id,
                plan=plan,
                amount=PLANS[plan],
                merchant_txn_id="",
                status="pending",
            )
            self.db.insert_payment(record)
        try:
            txn_id, _redirect = self.gateway.initiate(
                user_id, plan, record.amount, record.payment_id
            )
            status = self.gateway.status(txn_id)
        except GatewayUnreachable:
            raise
        except Exception as exc:
            raise GatewayUnreachable(str(exc)) from exc
        if status == "failed":
            self.db.update_payment(record.payment_id, "failed", txn_id)
            raise PaymentFailed(f"gateway declined {txn_id}")
        self.db.update_payment(record.payment_id, status, txn_id)
        record.status = status
        record.merchant_txn_id = txn_id
        return record

    def pay_by_username(self, username: str, plan: str) -> PaymentRecord:
        user = self.db.get_user_by_username(username)
        if user is None:
            raise UserNotFound(f"no user named {username!r}")
        return self.process_payment(user.user_id, plan)

    def login(self, username: str, password: str) -> tuple[str, datetime]:
        """Verify credentials and payment; issue an opaque 256-bit token.

        Wrong username and wrong password are indistinguishable.
        """
        user = self.db.get_user_by_username(username)
        if user is None:
            verify_password(password, _DUMMY_HASH)
            raise InvalidCredentials("invalid username or password")
        if not verify_password(password, user.password_hash):
            raise InvalidCredentials("invalid username or password")
        if not self.db.has_confirmed_payment(user.user_id):
            raise PaymentRequired("subscription payment not confirmed")
        token = secrets.token_hex(32)
        expires = utcnow() + TOKEN_TTL
        self.db.insert_auth_token(token, user.user_id, expires)
        return token, expires

    def logout(self, token: str) -> None:
        self.db.delete_auth_token(token)

    def authenticate(self, token: str) -> UserAccount:
        found = self.db.get_auth_token(token)
        if found is None:
            raise InvalidToken("unknown or revoked token")
        user_id, expires = found
        if expires < utcnow():
            self.db.delete_auth_token(token)
            raise InvalidToken("token expired")
        user = self.db.get_user(user_id)
        if user is None:
            raise InvalidToken("token user no longer exists")
        return user

    def request_password_reset(self, username: str) -> tuple[str, datetime]:
        """Issue a reset token. Transporting it (email) is out of scope;
        the caller receives it directly."""
        user = self.db.get_user_by_username(username)
        if user is None:
            raise UserNotFound(f"no user named {username!r}")
        token = secrets.token_hex(32)
        expires = utcnow() + RESET_TOKEN_TTL
        self.db.insert_reset_token(token, user.user_id, expires)
        return token, expires

    def reset_password(self, reset_token: str, new_password: str) -> None:
        if len(new_password) < MIN_PASSWORD_LEN:
            raise WeakPassword(
                f"password must be at least {MIN_PASSWORD_LEN} characters"
            )
        found = self.db.pop_reset_token(reset_token)
        if found is None:
            raise InvalidToken("unknown reset token")
        user_id, expires = found
        if expires < utcnow():
            raise InvalidToken("reset token expired")
        self.db.update_password(user_id, hash_password(new_password))

    # --- courses / grants ---------------------------------------------------

    def create_course(self, owner: UserAccount, title: str,
                      visibility: str) -> Course:
        if owner.role != "instructor":
            raise AccessDenied("only instructors create courses")
        if visibility not in ("public", "private"):
            raise ValueError(f"unknown visibility {visibility!r}")
        slug = slugify(title)
        if self.db.slug_taken(slug):
            raise DuplicateSlug(f"slug {slug!r} already exists")
        course = Course(
            course_id=uuid.uuid4().hex,
            title=title,
            slug=slug,
            visibility=visibility,
            owner_id=owner.user_id,
        )
        self.db.insert_course(course)
        return course

    def get_course(self, course_id: str) -> Course:
        course = self.db.get_course(course_id)
        if course is None:
            raise CourseNotFound(f"no course {course_id!r}")
        return course

    def grant_access(self, caller: UserAccount, course_id: str,
                     user_id: str) -> None:
        course = self._owned_private_course(caller, course_id)
        if self.db.get_user(user_id) is None:
            raise UserNotFound(f"no user {user_id!r}")
        self.db.upsert_grant(
            AccessGrant(
                course_id=course.course_id,
                user_id=user_id,
                granted_by=caller.user_id,
            )
        )

    def revoke_access(self, caller: UserAccount, course_id: str,
                      user_id: str) -> None:
        self._owned_private_course(caller, course_id)
        self.db.delete_grant(course_id, user_id)

    def _owned_private_course(self, caller: UserAccount,
                              course_id: str) -> Course:
        course = self.get_course(course_id)
        if course.owner_id != caller.user_id:
            raise AccessDenied("only the course owner manages grants")
        if course.visibility != "private":
            raise NotPrivateCourse("grants apply to private courses only")
        return course

    def has_access(self, user_id: str, course_id: str) -> bool:
        course = self.get_course(course_id)
        if course.visibility == "public":
            return True
        if course.owner_id == user_id:
            return True
        return self.db.has_grant(course_id, user_id)

    def require_access(self, user_id: str, course_id: str) -> Course:
        course = self.get_course(course_id)
        if not self.has_access(user_id, course_id):
            raise AccessDenied("no access to this course")
        return course

    def require_owner(self, caller: UserAccount, course_id: str) -> Course:
        course = self.get_course(course_id)
        if course.owner_id != caller.user_id:
            raise AccessDenied("instructor-only operation")
        return course

    def list_accessible(self, user: UserAccount) -> list[Course]:
        """Public courses, plus granted private ones, plus owned ones."""
        granted = self.db.granted_course_ids(user.user_id)
        return [
            c
            for c in self.db.list_courses()
            if c.visibility == "public"
            or c.owner_id == user.user_id
            or c.course_id in granted
        ]
