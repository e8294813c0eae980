import json
import re
import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coursechat.errors import (
    EmptyDocument,
    EmptyTranscript,
    InvalidEncoding,
    LanguageUnavailable,
    MalformedUrl,
    TranscriptUnavailable,
    UnsupportedFormat,
)
from coursechat.ingest import (
    FixtureTranscriptProvider,
    TranscriptEntry,
    clean_text,
    clean_transcript,
    fetch_transcript,
    parse_upload,
    parse_video_id,
    short_url,
    watch_url,
)

from conftest import FIXTURES, TRANSCRIPTS

VIDEO_ID_ALPHABET = string.ascii_letters + string.digits + "_-"


class TestParseVideoId:
    def test_watch_url(self):
        assert parse_video_id("https://www.youtube.com/watch?v=dQw4w9WgXcQ") == "dQw4w9WgXcQ"

    def test_short_url(self):
        assert parse_video_id("https://youtu.be/dQw4w9WgXcQ") == "dQw4w9WgXcQ"

    def test_watch_url_with_extra_params(self):
        url = "https://www.youtube.com/watch?v=dQw4w9WgXcQ&t=42s"
        assert parse_video_id(url) == "dQw4w9WgXcQ"

    def test_non_video_url_rejected(self):
        with pytest.raises(MalformedUrl):
            parse_video_id("https://example.com/page")

    @pytest.mark.parametrize("url", [
        "", "   ", "not a url", "https://www.youtube.com/watch",
        "https://www.youtube.com/watch?v=tooshort", "https://youtu.be/",
        "https://www.youtube.com/watch?v=waytoolongid42",
    ])
    def test_rejects_garbage(self, url):
        with pytest.raises(MalformedUrl):
            parse_video_id(url)

    @given(st.text(alphabet=VIDEO_ID_ALPHABET, min_size=11, max_size=11))
    def test_roundtrip_both_url_forms(self, video_id):
        assert parse_video_id(watch_url(video_id)) == video_id
        assert parse_video_id(short_url(video_id)) == video_id


class TestFetchTranscript:
    @pytest.fixture
    def provider(self):
        return FixtureTranscriptProvider(TRANSCRIPTS)

    def test_fixture_passthrough(self, provider):
        entries, title = fetch_transcript("fixvid00en1", ["en"], provider)
        raw = json.loads((TRANSCRIPTS / "fixvid00en1.en.json").read_text())
        assert [e.text for e in entries] == [r["text"] for r in raw]
        assert [e.start_seconds for e in entries] == [r["start"] for r in raw]
        assert title == "Search Systems 101"

    def test_language_fallback_order(self, provider):
        entries, title = fetch_transcript("fixvidhindi", ["en", "hi"], provider)
        assert entries[0].text == "namaste aur swagat hai"
        assert title == "Khoj Pranali"

    def test_unknown_video(self, provider):
        with pytest.raises(TranscriptUnavailable):
            fetch_transcript("nosuchvid00", ["en"], provider)

    def test_no_preferred_language(self, provider):
        with pytest.raises(LanguageUnavailable):
            fetch_transcript("fixvidhindi", ["en", "de"], provider)


class TestCleanTranscript:
    def test_title_then_blank_line_then_joined_texts(self):
        entries = [
            TranscriptEntry("hello", 0.0, 1.0),
            TranscriptEntry("world", 1.2, 0.9),
        ]
        assert clean_transcript(entries, "Intro") == "Intro\n\nhello world"

    def test_all_artifact_entries_rejected(self):
        entries = [TranscriptEntry("[Music]", 0.0, 2.0)]
        with pytest.raises(EmptyTranscript):
            clean_transcript(entries, "T")

    def test_empty_entries_rejected(self):
        with pytest.raises(EmptyTranscript):
            clean_transcript([], "T")

    def test_golden_fixture_en(self):
        provider = FixtureTranscriptProvider(TRANSCRIPTS)
        entries, title = fetch_transcript("fixvid00en1", ["en"], provider)
        golden = (FIXTURES / "golden_transcript_en.txt").read_text()
        assert clean_transcript(entries, title) == golden

    def test_golden_fixture_hi(self):
        provider = FixtureTranscriptProvider(TRANSCRIPTS)
        entries, title = fetch_transcript("fixvidhindi", ["en", "hi"], provider)
        golden = (FIXTURES / "golden_transcript_hi.txt").read_text()
        assert clean_transcript(entries, title) == golden

    @given(
        st.lists(
            st.tuples(
                st.text(
                    alphabet=string.ascii_lowercase + " []:0123456789",
                    max_size=40,
                ),
                st.floats(min_value=0, max_value=1e4),
            ),
            min_size=1,
            max_size=8,
        )
    )
    def test_no_residual_time_or_cue_patterns(self, raw):
        entries = [TranscriptEntry(text, start, 1.0) for text, start in raw]
        try:
            out = clean_transcript(entries, "Title")
        except EmptyTranscript:
            return
        body = out.split("\n\n", 1)[1]
        assert not re.search(r"\d+:\d+", body)
        assert not re.search(r"\[[^\[\]]*\]", body)

    @given(st.text(alphabet=string.printable, max_size=200))
    def test_cleaning_idempotent(self, text):
        cleaned = clean_text(text)
        assert clean_text(cleaned) == cleaned

    def test_reapplying_to_cleaned_body_is_identity(self):
        entries = [
            TranscriptEntry("[Music] alpha 0:12 beta", 0.0, 1.0),
            TranscriptEntry("gamma   delta", 1.0, 1.0),
        ]
        out = clean_transcript(entries, "Title")
        body = out.split("\n\n", 1)[1]
        again = clean_transcript([TranscriptEntry(body, 0.0, 0.0)], "Title")
        assert again == out


class TestParseUpload:
    def test_csv_flattening(self):
        assert parse_upload(b"a,b\n1,2", "csv") == "a, b\n1, 2"

    def test_txt_passthrough_with_newline_normalization(self):
        assert parse_upload(b"line one\r\nline two\rend", "txt") == (
            "line one\nline two\nend"
        )

    def test_md_passthrough(self):
        assert parse_upload(b"# Title\n\nbody", "md") == "# Title\n\nbody"

    def test_invalid_utf8(self):
        with pytest.raises(InvalidEncoding):
            parse_upload(b"\xff\xfe\x00bad", "txt")

    def test_unknown_format(self):
        with pytest.raises(UnsupportedFormat):
            parse_upload(b"data", "pdf")

    def test_empty_bytes(self):
        with pytest.raises(EmptyDocument):
            parse_upload(b"", "txt")

    def test_whitespace_only(self):
        with pytest.raises(EmptyDocument):
            parse_upload(b"  \n \n ", "txt")

    @given(st.text(min_size=1).filter(lambda s: s.strip()))
    def test_never_returns_carriage_returns(self, text):
        out = parse_upload(text.encode("utf-8"), "txt")
        assert "\r" not in out

    def test_csv_quoted_cells(self):
        out = parse_upload(b'name,desc\nalpha,"x, y"\n', "csv")
        assert out == "name, desc\nalpha, x, y"
