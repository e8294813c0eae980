from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coursechat.chunking import Chunk
from coursechat.config import Config
from coursechat.embedding import LocalHashEmbedder
from coursechat.index import build_index
from coursechat.service import CoursePlatform

FIXTURES = Path(__file__).parent / "fixtures"
TRANSCRIPTS = FIXTURES / "transcripts"


class MockChatClient:
    """Programmable chat client with a call counter."""

    def __init__(self, reply="ok", model="mock-model"):
        self.reply = reply
        self.model = model
        self.calls = 0
        self.prompts: list[str] = []

    def complete(self, messages, temperature=0.2):
        self.calls += 1
        self.prompts.append(messages[-1]["content"])
        if callable(self.reply):
            return self.reply(messages)
        if isinstance(self.reply, Exception):
            raise self.reply
        return self.reply


def make_chunks(texts, doc_id="doc"):
    return [
        Chunk(
            chunk_id=f"{doc_id}:{i}",
            doc_id=doc_id,
            ordinal=i,
            text=text,
            word_count=len(text.split()),
        )
        for i, text in enumerate(texts)
    ]


def make_index(texts, course_id="course", dims=384, embedder=None):
    chunks = make_chunks(texts)
    embedder = embedder or LocalHashEmbedder(dims)
    vectors = [embedder.embed(c.text) for c in chunks]
    return build_index(course_id, chunks, vectors)


def rng_texts(rng: np.random.Generator, n_chunks: int, vocab_size: int,
              max_len: int = 30) -> list[str]:
    vocab = [f"term{i}" for i in range(vocab_size)]
    texts = []
    for _ in range(n_chunks):
        length = int(rng.integers(1, max_len))
        words = rng.choice(vocab, size=length)
        texts.append(" ".join(words))
    return texts


@pytest.fixture
def mock_llm():
    return MockChatClient()


@pytest.fixture
def platform(tmp_path, mock_llm):
    cfg = Config(
        db_path=":memory:",
        object_store_root=str(tmp_path / "store"),
        transcript_fixtures=str(TRANSCRIPTS),
    )
    p = CoursePlatform(cfg, chat_client=mock_llm)
    yield p
    p.close()


@pytest.fixture
def embedder():
    return LocalHashEmbedder()
