"""Segment normalized text into retrieval granules.

Splits on blank-line paragraph boundaries first; oversized paragraphs are
re-split into fixed word windows with a configurable overlap carried between
consecutive windows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EmptyInput

DEFAULT_MAX_CHUNK_WORDS = 512
DEFAULT_OVERLAP_WORDS = 64

_PARA_RE = re.compile(r"\n\s*\n")


@dataclass
class Chunk:
    """Ordered unit of course text; the retrieval granule."""

    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    word_count: int


def chunk_text(
    text: str,
    max_chunk_words: int = DEFAULT_MAX_CHUNK_WORDS,
    overlap_words: int = DEFAULT_OVERLAP_WORDS,
    doc_id: str = "doc",
) -> list[Chunk]:
    """Split text into chunks of at most max_chunk_words whitespace tokens.

    Windowed re-splits start every (max_chunk_words - overlap_words) tokens,
    so concatenating chunks with overlaps deduplicated reconstructs the
    original token sequence.
    """
    if max_chunk_words <= 0:
        raise ValueError("max_chunk_words must be positive")
    if not 0 <= overlap_words < max_chunk_words:
        raise ValueError("need max_chunk_words > overlap_words >= 0")
    if not text or not text.strip():
        raise EmptyInput("no text to chunk")

    stride = max_chunk_words - overlap_words
    pieces: list[str] = []
    for para in _PARA_RE.split(text):
        words = para.split()
        if not words:
            continue
        if len(words) <= max_chunk_words:
            pieces.append(para.strip())
            continue
        start = 0
        while start < len(words):
            pieces.append(" ".join(words[start : start + max_chunk_words]))
            if start + max_chunk_words >= len(words):
                break
            start += stride

    return [
        Chunk(
            chunk_id=f"{doc_id}:{i}",
            doc_id=doc_id,
            ordinal=i,
            text=piece,
            word_count=len(piece.split()),
        )
        for i, piece in enumerate(pieces)
    ]
