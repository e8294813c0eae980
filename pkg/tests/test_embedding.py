import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coursechat.embedding import (
    LocalHashEmbedder,
    cosine_distance,
    cosine_similarity,
)
from coursechat.errors import DimensionMismatch, EmptyInput

from oracles import naive_cosine

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)
vectors_st = st.lists(finite_floats, min_size=1, max_size=16)


class TestCosine:
    def test_identity(self):
        assert cosine_similarity([1, 0, 0], [1, 0, 0]) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == pytest.approx(0.0)

    def test_worked_example(self):
        # dot = 8, norms = 3 * 3
        assert cosine_similarity([1, 2, 2], [2, 1, 2]) == pytest.approx(8 / 9)

    def test_zero_norm_gives_zero(self):
        assert cosine_similarity([0, 0], [1, 1]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity([1, 2], [1, 2, 3])

    def test_distance_complements_similarity(self):
        a, b = [1.0, 2.0, 2.0], [2.0, 1.0, 2.0]
        assert cosine_distance(a, b) == pytest.approx(1 - 8 / 9)

    @given(vectors_st)
    def test_self_similarity_is_one(self, v):
        if all(x == 0 for x in v):
            assert cosine_similarity(v, v) == 0.0
        else:
            assert abs(cosine_similarity(v, v) - 1.0) < 1e-9

    @given(st.data())
    def test_symmetry_exact(self, data):
        n = data.draw(st.integers(1, 12))
        a = data.draw(st.lists(finite_floats, min_size=n, max_size=n))
        b = data.draw(st.lists(finite_floats, min_size=n, max_size=n))
        assert cosine_similarity(a, b) == cosine_similarity(b, a)

    @given(st.data())
    def test_scale_invariance(self, data):
        n = data.draw(st.integers(1, 12))
        a = data.draw(st.lists(finite_floats, min_size=n, max_size=n))
        b = data.draw(st.lists(finite_floats, min_size=n, max_size=n))
        k = data.draw(st.floats(min_value=1e-3, max_value=1e3))
        scaled = [k * x for x in a]
        assert abs(
            cosine_similarity(scaled, b) - cosine_similarity(a, b)
        ) < 1e-9

    @given(st.data())
    def test_matches_naive_oracle(self, data):
        # The naive oracle itself underflows on subnormal components, so
        # compare on magnitudes where its arithmetic is exact enough.
        sane = st.floats(min_value=-1e6, max_value=1e6).filter(
            lambda x: x == 0.0 or abs(x) > 1e-6
        )
        n = data.draw(st.integers(1, 12))
        a = data.draw(st.lists(sane, min_size=n, max_size=n))
        b = data.draw(st.lists(sane, min_size=n, max_size=n))
        assert cosine_similarity(a, b) == pytest.approx(
            naive_cosine(a, b), abs=1e-9
        )


class TestLocalHashEmbedder:
    def test_deterministic(self):
        emb = LocalHashEmbedder()
        first = emb.embed("the quick brown fox")
        second = emb.embed("the quick brown fox")
        assert np.array_equal(first, second)

    def test_repeated_token_normalizes_to_same_unit_vector(self):
        emb = LocalHashEmbedder()
        once = emb.embed("apple")
        twice = emb.embed("apple apple")
        assert cosine_similarity(once, twice) == pytest.approx(1.0)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            LocalHashEmbedder().embed("")
        with pytest.raises(EmptyInput):
            LocalHashEmbedder().embed("   ")

    def test_dims(self):
        assert LocalHashEmbedder().embed("token").shape == (384,)
        assert LocalHashEmbedder(dims=16).embed("token").shape == (16,)

    @given(st.text(alphabet="abcdefghij ", min_size=1, max_size=80))
    @settings(max_examples=100)
    def test_unit_norm_for_nonempty_token_sets(self, text):
        emb = LocalHashEmbedder(dims=64)
        if not any(ch.isalnum() for ch in text):
            return
        vec = emb.embed(text)
        assert abs(float(np.linalg.norm(vec)) - 1.0) < 1e-9
        assert np.all(np.isfinite(vec))

    def test_different_dims_do_not_mix(self):
        a = LocalHashEmbedder(dims=16).embed("apple")
        b = LocalHashEmbedder(dims=32).embed("apple")
        with pytest.raises(DimensionMismatch):
            cosine_similarity(a, b)
