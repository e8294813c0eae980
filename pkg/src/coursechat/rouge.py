"""ROUGE-N and ROUGE-L scoring for recorded answers.

Tokenization is lowercase whitespace split. ROUGE-N uses clipped n-gram
multiset overlap; ROUGE-L uses the longest common subsequence over tokens.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import EmptyText


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _score(overlap: float, cand_total: float, ref_total: float) -> RougeScore:
    p = overlap / cand_total if cand_total > 0 else 0.0
    r = overlap / ref_total if ref_total > 0 else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(precision=p, recall=r, f1=f1)


def rouge_n(candidate: str, reference: str, n: int = 1) -> RougeScore:
    """Clipped n-gram overlap; recall against the reference side."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not cand or not ref:
        raise EmptyText("candidate and reference must be non-empty")
    cand_grams = _ngrams(cand, n)
    ref_grams = _ngrams(ref, n)
    overlap = sum(min(c, ref_grams.get(g, 0)) for g, c in cand_grams.items())
    return _score(overlap, sum(cand_grams.values()), sum(ref_grams.values()))


def _lcs_len(xs: list[str], ys: list[str]) -> int:
    # Row-rolling DP keeps memory at O(min side).
    if len(xs) < len(ys):
        xs, ys = ys, xs
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0]
        for j, y in enumerate(ys, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """LCS-based score: R = LCS/|ref|, P = LCS/|cand|."""
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not cand or not ref:
        raise EmptyText("candidate and reference must be non-empty")
    lcs = _lcs_len(cand, ref)
    return _score(lcs, len(cand), len(ref))
