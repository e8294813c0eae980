import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coursechat.chunking import chunk_text
from coursechat.errors import EmptyInput


def test_paragraphs_become_chunks():
    chunks = chunk_text("para one.\n\npara two.", max_chunk_words=512)
    assert [c.ordinal for c in chunks] == [0, 1]
    assert [c.text for c in chunks] == ["para one.", "para two."]


def test_long_paragraph_windows():
    # 1000 words, max 512, overlap 64 -> windows start at 0, 448, 896.
    words = [f"w{i}" for i in range(1000)]
    chunks = chunk_text(" ".join(words), 512, 64)
    assert [c.word_count for c in chunks] == [512, 512, 104]
    assert chunks[0].text.split()[0] == "w0"
    assert chunks[1].text.split()[0] == "w448"
    assert chunks[2].text.split()[0] == "w896"


def test_empty_input():
    with pytest.raises(EmptyInput):
        chunk_text("")
    with pytest.raises(EmptyInput):
        chunk_text("   \n\n  ")


def test_bad_window_arguments():
    with pytest.raises(ValueError):
        chunk_text("words here", max_chunk_words=10, overlap_words=10)
    with pytest.raises(ValueError):
        chunk_text("words here", max_chunk_words=10, overlap_words=-1)


def test_chunk_ids_and_ordinals_contiguous():
    chunks = chunk_text("a\n\nb\n\nc", doc_id="d42")
    assert [c.chunk_id for c in chunks] == ["d42:0", "d42:1", "d42:2"]
    assert all(c.doc_id == "d42" for c in chunks)


words_st = st.lists(
    st.text(alphabet="abcdefg", min_size=1, max_size=6), min_size=1,
    max_size=400,
)


@given(words=words_st, max_words=st.integers(2, 50),
       overlap=st.integers(0, 10))
@settings(max_examples=100)
def test_overlap_dedup_reconstructs_token_sequence(words, max_words, overlap):
    if overlap >= max_words:
        overlap = max_words - 1
    # Single paragraph: consecutive windows repeat exactly `overlap` tokens.
    text = " ".join(words)
    chunks = chunk_text(text, max_words, overlap, doc_id="x")
    rebuilt = list(chunks[0].text.split())
    for chunk in chunks[1:]:
        shared = chunk.text.split()[:overlap]
        assert rebuilt[len(rebuilt) - overlap:] == shared if overlap else True
        rebuilt.extend(chunk.text.split()[overlap:])
    assert rebuilt == text.split()
    assert [c.ordinal for c in chunks] == list(range(len(chunks)))


@given(words=words_st, max_words=st.integers(1, 50))
@settings(max_examples=100)
def test_zero_overlap_partitions_exactly(words, max_words):
    text = " ".join(words)
    chunks = chunk_text(text, max_words, 0)
    assert sum(c.word_count for c in chunks) == len(text.split())
    assert [t for c in chunks for t in c.text.split()] == text.split()


@given(words=words_st, max_words=st.integers(2, 40),
       overlap=st.integers(0, 10))
@settings(max_examples=100)
def test_word_count_bounds(words, max_words, overlap):
    if overlap >= max_words:
        overlap = max_words - 1
    chunks = chunk_text(" ".join(words), max_words, overlap)
    for chunk in chunks:
        assert 1 <= chunk.word_count <= max_words
        assert chunk.text
