"""Keyword-augmented hybrid retrieval over a course index.

A question is rewritten into salient keywords (LLM-assisted when a client
is configured, corpus-IDF fallback otherwise), scored lexically with Okapi
BM25 and semantically with cosine similarity, and the two families are
fused by a min-max normalized weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyIndex, EmptyQuery
from .index import CourseIndex
from .text import STOPWORD_SET, tokenize

if TYPE_CHECKING:
    from .chat import ChatClient

BM25_K1 = 1.2
BM25_B = 0.75
DEFAULT_ALPHA = 0.5

KEYWORD_PROMPT = (
    "Extract up to {k} search keywords from the question below. "
    "Reply with the keywords only, comma-separated, no commentary.\n\n"
    "Question: {question}"
)


@dataclass
class Query:
    """A user question plus its extracted keywords and embedding."""

    raw_text: str
    keywords: list[str]
    embedding: np.ndarray
    vector_only: bool = False  # set when keyword extraction came up empty


@dataclass
class RetrievalResult:
    chunk_id: str
    bm25_score: float
    cosine_score: float
    fused_score: float
    rank: int


def idf(n_chunks: int, doc_freq: int) -> float:
    return math.log((n_chunks - doc_freq + 0.5) / (doc_freq + 0.5) + 1.0)


def extract_keywords(
    raw_text: str,
    index: CourseIndex,
    llm: "ChatClient | None" = None,
    k: int = 8,
) -> list[str]:
    """Rewrite a question into up to k lowercase keyword terms.

    With an LLM client, ask for comma-separated keywords and post-filter.
    Without one (or when the client fails), rank the question's own terms
    by corpus IDF, unknown terms counting as maximally informative, and
    keep query order among ties.
    """
    if not raw_text or not raw_text.strip():
        raise EmptyQuery("empty question")
    if k < 1:
        raise ValueError("k must be >= 1")

    if llm is not None:
        try:
            reply = llm.complete(
                [{"role": "user",
                  "content": KEYWORD_PROMPT.format(k=k, question=raw_text)}]
            )
            terms = []
            for piece in reply.split(","):
                for tok in tokenize(piece):
                    if tok not in STOPWORD_SET and tok not in terms:
                        terms.append(tok)
            if terms:
                return terms[:k]
        except Exception:
            pass  # fall through to the deterministic path

    seen: list[str] = []
    for tok in tokenize(raw_text):
        if tok not in STOPWORD_SET and tok not in seen:
            seen.append(tok)
    n = index.n_chunks
    max_idf = idf(n, 0)

    def term_idf(term: str) -> float:
        plist = index.postings.get(term)
        return idf(n, len(plist)) if plist else max_idf

    ranked = sorted(
        enumerate(seen), key=lambda pair: (-term_idf(pair[1]), pair[0])
    )
    return [term for _, term in ranked[:k]]


def make_query(
    raw_text: str,
    index: CourseIndex,
    embedder,
    llm: "ChatClient | None" = None,
    k_keywords: int = 8,
) -> Query:
    """Build the retrieval-ready form of a question.

    An all-stopword question yields no keywords; the query is then flagged
    vector_only and retrieval leans on the embedding alone.
    """
    keywords = extract_keywords(raw_text, index, llm, k_keywords)
    return Query(
        raw_text=raw_text,
        keywords=keywords,
        embedding=embedder.embed(raw_text),
        vector_only=not keywords,
    )


def bm25_scores(
    keywords: Sequence[str], index: CourseIndex
) -> dict[str, float]:
    """Okapi BM25 over the inverted index; zero-match chunks are omitted.

    Keywords are a term set: repeating a keyword does not double its
    contribution.
    """
    if index.n_chunks == 0:
        raise EmptyIndex("index has no chunks")
    n = index.n_chunks
    avgdl = index.avg_doc_length
    scores: dict[str, float] = {}
    for term in dict.fromkeys(keywords):
        plist = index.postings.get(term)
        if not plist:
            continue
        term_idf = idf(n, len(plist))
        for chunk_id, tf in plist:
            dl = index.doc_lengths[chunk_id]
            denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / avgdl)
            scores[chunk_id] = scores.get(chunk_id, 0.0) + (
                term_idf * tf * (BM25_K1 + 1.0) / denom
            )
    return scores


def _all_cosines(query_embedding: np.ndarray, index: CourseIndex) -> np.ndarray:
    q = np.asarray(query_embedding, dtype=np.float64)
    if q.shape != (index.dims,):
        raise DimensionMismatch(f"query {q.shape} vs index dims {index.dims}")
    matrix = index.vectors.astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    qnorm = float(np.linalg.norm(q))
    sims = np.zeros(index.n_chunks)
    if qnorm > 0.0:
        nonzero = norms > 0.0
        sims[nonzero] = (matrix[nonzero] @ q) / (norms[nonzero] * qnorm)
    return sims


def vector_scores(
    query_embedding: np.ndarray, index: CourseIndex, k: int
) -> list[tuple[str, float]]:
    """Exact top-k cosine scan over all chunk vectors, ties by chunk order."""
    if index.n_chunks == 0:
        raise EmptyIndex("index has no chunks")
    sims = _all_cosines(query_embedding, index)
    order = sorted(range(index.n_chunks), key=lambda i: (-sims[i], i))
    return [(index.chunks[i].chunk_id, float(sims[i])) for i in order[:k]]


def _minmax(values: Mapping[str, float]) -> dict[str, float]:
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        return {k: 1.0 for k in values}
    span = hi - lo
    return {k: (v - lo) / span for k, v in values.items()}


def fuse_scores(
    candidates: Sequence[str],
    bm25_raw: Mapping[str, float],
    cosine_raw: Mapping[str, float],
    alpha: float = DEFAULT_ALPHA,
) -> dict[str, float]:
    """Min-max normalize each family over the candidate set and mix.

    A candidate missing from a family contributes a raw 0 to that family
    before normalization; a constant family normalizes to all 1.0.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    bm = _minmax({c: bm25_raw.get(c, 0.0) for c in candidates})
    cos = _minmax({c: cosine_raw.get(c, 0.0) for c in candidates})
    return {c: alpha * bm[c] + (1.0 - alpha) * cos[c] for c in candidates}


def reciprocal_rank_fusion(
    candidates: Sequence[str],
    bm25_raw: Mapping[str, float],
    cosine_raw: Mapping[str, float],
    rrf_k: int = 60,
) -> dict[str, float]:
    """Rank-based fusion alternative, selectable via configuration.

    Discards score magnitudes, which is why it is not the default.
    """
    fused = {c: 0.0 for c in candidates}
    for raw in (bm25_raw, cosine_raw):
        ordered = sorted(candidates, key=lambda c: -raw.get(c, 0.0))
        for rank, c in enumerate(ordered, start=1):
            fused[c] += 1.0 / (rrf_k + rank)
    return fused


def hybrid_retrieve(
    query: Query,
    index: CourseIndex,
    k: int = 4,
    alpha: float = DEFAULT_ALPHA,
    method: str = "weighted",
) -> list[RetrievalResult]:
    """Fuse BM25 and cosine rankings into the top-k context chunks.

    Candidates are the union of each family's top-2k; results are ordered
    by fused score descending with ties broken by chunk-table position.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if index.n_chunks == 0:
        raise EmptyIndex("index has no chunks")

    bm_all = {} if query.vector_only else bm25_scores(query.keywords, index)
    bm_top = sorted(bm_all, key=lambda c: (-bm_all[c], index.row_of(c)))[: 2 * k]
    sims = _all_cosines(query.embedding, index)
    cos_top = sorted(range(index.n_chunks), key=lambda i: (-sims[i], i))[: 2 * k]

    candidates = sorted(
        set(bm_top) | {index.chunks[i].chunk_id for i in cos_top},
        key=index.row_of,
    )
    if not candidates:
        return []
    # A candidate keeps its true score in each family; chunks the lexical
    # family never matched contribute 0 there.
    cos_raw = {c: float(sims[index.row_of(c)]) for c in candidates}
    if method == "rrf":
        fused = reciprocal_rank_fusion(candidates, bm_all, cos_raw)
    elif method == "weighted":
        fused = fuse_scores(candidates, bm_all, cos_raw, alpha)
    else:
        raise ValueError(f"unknown fusion method {method!r}")

    ordered = sorted(candidates, key=lambda c: (-fused[c], index.row_of(c)))
    return [
        RetrievalResult(
            chunk_id=c,
            bm25_score=bm_all.get(c, 0.0),
            cosine_score=cos_raw[c],
            fused_score=fused[c],
            rank=rank,
        )
        for rank, c in enumerate(ordered[:k], start=1)
    ]
