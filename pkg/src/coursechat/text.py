"""Tokenization and the bundled stopword list.

The stopword list is fixed at 50 entries and its SHA-256 is recorded in
every index manifest, so retrieval scores stay reproducible across builds.
"""

from __future__ import annotations

import hashlib
import re

# Fixed 50-word English stopword list. Order matters only for the hash.
STOPWORDS: tuple[str, ...] = (
    "a", "about", "an", "and", "are", "as", "at", "be", "been", "but",
    "by", "can", "could", "did", "do", "does", "for", "from", "had", "has",
    "have", "he", "her", "his", "how", "i", "if", "in", "is", "it",
    "its", "of", "on", "or", "she", "so", "that", "the", "their", "them",
    "they", "this", "to", "was", "we", "were", "what", "when", "which", "with",
)

STOPWORD_SET = frozenset(STOPWORDS)

# Unicode-aware alphanumeric runs (underscore excluded).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_WS_RE = re.compile(r"\s+")


def stopwords_sha256() -> str:
    """Hash of the bundled list, newline-joined, as recorded in manifests."""
    return hashlib.sha256("\n".join(STOPWORDS).encode("utf-8")).hexdigest()


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def content_tokens(text: str) -> list[str]:
    """Tokenize and drop stopwords. No stemming."""
    return [t for t in tokenize(text) if t not in STOPWORD_SET]


def collapse_ws(text: str) -> str:
    """Collapse all internal whitespace runs to single spaces and strip."""
    return _WS_RE.sub(" ", text).strip()
