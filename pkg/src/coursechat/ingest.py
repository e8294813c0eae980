"""Turn uploads and YouTube transcripts into normalized UTF-8 course text.

Transcript retrieval goes through a pluggable provider so the pipeline runs
offline against canned JSON fixtures; the wire shape is a JSON array of
``{"text": str, "start": number, "duration": number}``.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol
from urllib.parse import parse_qs, urlparse

import httpx

from .errors import (
    EmptyDocument,
    EmptyTranscript,
    InvalidEncoding,
    LanguageUnavailable,
    MalformedUrl,
    ProviderUnreachable,
    TranscriptUnavailable,
    UnsupportedFormat,
)
from .models import SourceDocument
from .text import collapse_ws

__all__ = [
    "SourceDocument", "TranscriptEntry", "TranscriptProvider",
    "FixtureTranscriptProvider", "HttpTranscriptProvider",
    "parse_video_id", "watch_url", "short_url", "fetch_transcript",
    "clean_text", "clean_transcript", "parse_upload", "UPLOAD_FORMATS",
]

UPLOAD_FORMATS = ("txt", "md", "csv")

_VIDEO_ID_RE = re.compile(r"^[A-Za-z0-9_-]{11}$")
# Bracketed cue artifacts ([Music], [Applause], ...) and bare time patterns.
_CUE_RE = re.compile(r"\[[^\[\]]*\]")
_TIME_RE = re.compile(r"\d+:\d+(?::\d+)*")


@dataclass
class TranscriptEntry:
    """One caption line with its timing, as delivered by the provider."""

    text: str
    start_seconds: float
    duration_seconds: float


def parse_video_id(url: str) -> str:
    """Extract the 11-character video id from a watch or youtu.be URL."""
    if not url or not url.strip():
        raise MalformedUrl("empty URL")
    parsed = urlparse(url.strip())
    host = (parsed.hostname or "").lower()
    candidate = None
    if host == "youtu.be":
        candidate = parsed.path.lstrip("/").split("/")[0]
    elif host in ("youtube.com", "www.youtube.com", "m.youtube.com"):
        if parsed.path == "/watch":
            candidate = parse_qs(parsed.query).get("v", [None])[0]
    if candidate is None or not _VIDEO_ID_RE.match(candidate):
        raise MalformedUrl(f"no video id in {url!r}")
    return candidate


def watch_url(video_id: str) -> str:
    return f"https://www.youtube.com/watch?v={video_id}"


def short_url(video_id: str) -> str:
    return f"https://youtu.be/{video_id}"


class TranscriptProvider(Protocol):
    """Client contract for the external transcript service."""

    def fetch(self, video_id: str, language: str) -> list[TranscriptEntry]:
        """Return entries for one language.

        Raises LanguageUnavailable when the video has captions but not in
        this language, TranscriptUnavailable when it has none at all, and
        ProviderUnreachable on transport failure.
        """
        ...

    def video_title(self, video_id: str) -> str: ...


class FixtureTranscriptProvider:
    """Reads transcripts from a directory of canned JSON fixtures.

    Layout: ``<video_id>.<lang>.json`` holding the wire-shape array, and
    ``<video_id>.title.txt`` holding the video title.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _langs(self, video_id: str) -> list[str]:
        return sorted(
            p.name.split(".")[1]
            for p in self.root.glob(f"{video_id}.*.json")
        )

    def fetch(self, video_id: str, language: str) -> list[TranscriptEntry]:
        path = self.root / f"{video_id}.{language}.json"
        if not path.exists():
            if self._langs(video_id):
                raise LanguageUnavailable(
                    f"{video_id} has no {language!r} captions"
                )
            raise TranscriptUnavailable(f"no captions for {video_id}")
        raw = json.loads(path.read_text(encoding="utf-8"))
        return [
            TranscriptEntry(
                text=e["text"],
                start_seconds=float(e["start"]),
                duration_seconds=float(e["duration"]),
            )
            for e in raw
        ]

    def video_title(self, video_id: str) -> str:
        path = self.root / f"{video_id}.title.txt"
        if not path.exists():
            raise TranscriptUnavailable(f"no captions for {video_id}")
        return path.read_text(encoding="utf-8").strip()


class HttpTranscriptProvider:
    """Transcript provider over a plain HTTP JSON endpoint.

    GET {base}/transcript?video_id=..&lang=.. -> the wire-shape array,
    GET {base}/title?video_id=..              -> {"title": str}.
    Responds 404 with {"reason": "language"|"video"} for the error split.
    """

    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def fetch(self, video_id: str, language: str) -> list[TranscriptEntry]:
        try:
            resp = httpx.get(
                f"{self.base_url}/transcript",
                params={"video_id": video_id, "lang": language},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise ProviderUnreachable(str(exc)) from exc
        if resp.status_code == 404:
            reason = {}
            try:
                reason = resp.json()
            except ValueError:
                pass
            if reason.get("reason") == "language":
                raise LanguageUnavailable(f"{video_id}: {language}")
            raise TranscriptUnavailable(video_id)
        if resp.status_code != 200:
            raise ProviderUnreachable(f"status {resp.status_code}")
        return [
            TranscriptEntry(
                text=e["text"],
                start_seconds=float(e["start"]),
                duration_seconds=float(e["duration"]),
            )
            for e in resp.json()
        ]

    def video_title(self, video_id: str) -> str:
        try:
            resp = httpx.get(
                f"{self.base_url}/title",
                params={"video_id": video_id},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise ProviderUnreachable(str(exc)) from exc
        if resp.status_code == 404:
            raise TranscriptUnavailable(video_id)
        if resp.status_code != 200:
            raise ProviderUnreachable(f"status {resp.status_code}")
        return resp.json()["title"]


def fetch_transcript(
    video_id: str,
    preferred_langs: list[str],
    provider: TranscriptProvider,
) -> tuple[list[TranscriptEntry], str]:
    """Fetch entries in the first available preferred language, plus title."""
    if not _VIDEO_ID_RE.match(video_id):
        raise MalformedUrl(f"bad video id {video_id!r}")
    last_missing: LanguageUnavailable | None = None
    for lang in preferred_langs:
        try:
            entries = provider.fetch(video_id, lang)
        except LanguageUnavailable as exc:
            last_missing = exc
            continue
        return entries, provider.video_title(video_id)
    raise last_missing or LanguageUnavailable(
        f"none of {preferred_langs!r} offered for {video_id}"
    )


def clean_text(text: str) -> str:
    """Strip cue artifacts and time patterns, collapse whitespace.

    Removal loops to a fixpoint so nested brackets cannot reassemble into
    fresh cue tokens. Idempotent.
    """
    previous = None
    while previous != text:
        previous = text
        text = _CUE_RE.sub(" ", text)
        text = _TIME_RE.sub(" ", text)
    return collapse_ws(text)


def clean_transcript(entries: list[TranscriptEntry], video_title: str) -> str:
    """Merge caption texts under the video title, timing fields discarded."""
    body = clean_text(" ".join(e.text for e in entries))
    if not body:
        raise EmptyTranscript("no caption text left after cleaning")
    return f"{video_title}\n\n{body}"


def parse_upload(data: bytes, declared_format: str) -> str:
    """Decode an uploaded file to normalized text.

    txt/md pass through with newline normalization; csv rows are flattened
    to comma-joined lines with the header retained.
    """
    if declared_format not in UPLOAD_FORMATS:
        raise UnsupportedFormat(f"format {declared_format!r} not accepted")
    if not data:
        raise EmptyDocument("upload is empty")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(str(exc)) from exc
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    if declared_format == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        text = "\n".join(", ".join(cell.strip() for cell in row) for row in rows if row)
    if not text.strip():
        raise EmptyDocument("no text content")
    return text
