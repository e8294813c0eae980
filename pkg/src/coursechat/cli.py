"""Administrative driver: serve the API, ingest content, query indices,
and emit analytics/evaluation reports without the web UI.

Commands bypass HTTP auth and operate on the stores directly; data output
goes to stdout as CSV/JSON, diagnostics to stderr.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

from . import analytics
from .chat import HttpChatClient, render_prompt
from .config import Config
from .errors import CourseChatError
from .index import load_index
from .retrieval import hybrid_retrieve, make_query
from .rouge import rouge_l, rouge_n
from .service import CoursePlatform
from .storage import Database


def _fail(exc: CourseChatError) -> None:
    click.echo(f"error [{exc.code}]: {exc.message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Course knowledge platform admin tools."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="KEY=VALUE config file.")
def serve(config_path):
    """Run the HTTP API."""
    import uvicorn

    from .api import create_app

    cfg = Config.load(config_path)
    host, _, port = cfg.listen_addr.partition(":")
    app = create_app(CoursePlatform(cfg))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


@main.command()
@click.argument("source")
@click.option("--course", required=True, help="Course title or slug.")
@click.option("--format", "declared_format", default="txt",
              type=click.Choice(["txt", "md", "csv"]))
@click.option("--langs", default="en", help="Comma-separated language order.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
def ingest(source, course, declared_format, langs, config_path):
    """Ingest a file path or YouTube URL into a course index."""
    cfg = Config.load(config_path)
    platform = CoursePlatform(cfg)
    try:
        if source.startswith(("http://", "https://")):
            from .errors import ProviderUnreachable
            from .ingest import clean_transcript, fetch_transcript, parse_video_id

            if platform.transcripts is None:
                raise ProviderUnreachable("no transcript provider configured")
            video_id = parse_video_id(source)
            entries, title = fetch_transcript(
                video_id, [s.strip() for s in langs.split(",") if s.strip()],
                platform.transcripts,
            )
            text = clean_transcript(entries, title)
        else:
            from .ingest import parse_upload

            text = parse_upload(Path(source).read_bytes(), declared_format)
        version = _index_text(platform, course, source, text)
    except CourseChatError as exc:
        _fail(exc)
    click.echo(json.dumps({"course": course, "manifest_version": version}))


def _index_text(platform: CoursePlatform, course_key: str, ref: str,
                text: str) -> int:
    """Chunk, embed, merge with any existing index, persist."""
    import uuid

    from .chunking import chunk_text
    from .errors import IndexNotFound
    from .index import build_index, persist_index

    cfg = platform.config
    try:
        previous = load_index(course_key, platform.store)
    except IndexNotFound:
        previous = None
    doc_id = uuid.uuid4().hex[:12]
    chunks = chunk_text(text, cfg.max_chunk_words, cfg.overlap_words, doc_id)
    vectors = [platform.embedder.embed(c.text) for c in chunks]
    if previous is not None:
        chunks = previous.chunks + chunks
        vectors = [previous.vectors[i] for i in range(previous.n_chunks)] + vectors
        prev_version = previous.manifest_version
    else:
        prev_version = 0
    index = build_index(course_key, chunks, vectors, prev_version)
    persist_index(index, platform.store)
    return index.manifest_version


@main.command()
@click.argument("question")
@click.option("--course", required=True)
@click.option("--alpha", type=float, default=0.5)
@click.option("--k", type=int, default=4)
@click.option("--mode", default="restricted",
              type=click.Choice(["restricted", "relaxed", "medical"]))
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
def query(question, course, alpha, k, mode, config_path):
    """Print ranked chunks, then the LLM answer when one is configured."""
    cfg = Config.load(config_path)
    platform = CoursePlatform(cfg)
    try:
        index = load_index(course, platform.store)
        q = make_query(question, index, platform.embedder)
        results = hybrid_retrieve(q, index, k=k, alpha=alpha,
                                  method=cfg.fusion_method)
    except CourseChatError as exc:
        _fail(exc)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["rank", "chunk_id", "bm25", "cosine", "fused"])
    for r in results:
        writer.writerow(
            [r.rank, r.chunk_id, f"{r.bm25_score:.6f}",
             f"{r.cosine_score:.6f}", f"{r.fused_score:.6f}"]
        )
    if cfg.llm_endpoint:
        client = HttpChatClient(cfg.llm_endpoint, cfg.llm_model, cfg.llm_api_key)
        chunks = [index.chunk_by_id(r.chunk_id) for r in results]
        try:
            answer = client.complete(
                [{"role": "user",
                  "content": render_prompt(mode, chunks, question)}]
            )
        except CourseChatError as exc:
            _fail(exc)
        click.echo(f"answer: {answer}")


@main.command("eval-rouge")
@click.argument("turns_file", type=click.Path(exists=True))
@click.argument("refs_file", type=click.Path(exists=True))
@click.option("--metric", default="rouge1",
              type=click.Choice(["rouge1", "rouge2", "rougeL"]))
def eval_rouge(turns_file, refs_file, metric):
    """Score recorded answers against reference answers, CSV per turn.

    Both files are JSON lists; turns need {turn_id, answer}, references
    either a parallel list of strings or {turn_id: reference} mapping.
    """
    turns = json.loads(Path(turns_file).read_text(encoding="utf-8"))
    refs = json.loads(Path(refs_file).read_text(encoding="utf-8"))
    if isinstance(refs, list):
        if len(refs) != len(turns):
            click.echo("error [length_mismatch]: refs list does not match turns",
                       err=True)
            sys.exit(1)
        pairs = [(t.get("turn_id", str(i)), t["answer"], refs[i])
                 for i, t in enumerate(turns)]
    else:
        pairs = [(t["turn_id"], t["answer"], refs[t["turn_id"]])
                 for t in turns if t.get("turn_id") in refs]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["turn_id", "precision", "recall", "f1"])
    scores = []
    for turn_id, answer, reference in pairs:
        try:
            if metric == "rougeL":
                score = rouge_l(answer, reference)
            else:
                score = rouge_n(answer, reference, n=1 if metric == "rouge1" else 2)
        except CourseChatError as exc:
            _fail(exc)
        scores.append(score)
        writer.writerow([turn_id, f"{score.precision:.6f}",
                         f"{score.recall:.6f}", f"{score.f1:.6f}"])
    if scores:
        writer.writerow([
            "mean",
            f"{sum(s.precision for s in scores) / len(scores):.6f}",
            f"{sum(s.recall for s in scores) / len(scores):.6f}",
            f"{sum(s.f1 for s in scores) / len(scores):.6f}",
        ])
    click.echo(buf.getvalue(), nl=False)


@main.command()
@click.option("--course", required=True, help="Course id in the database.")
@click.option("--threshold", type=float, default=0.5)
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
def report(course, threshold, config_path):
    """Weak-module and time-spent reports as CSV on stdout."""
    cfg = Config.load(config_path)
    db = Database(cfg.db_path)
    try:
        weak = analytics.weak_module_report(db, course, threshold)
        avg = analytics.avg_time_spent(db, course)
    except CourseChatError as exc:
        _fail(exc)
    click.echo(analytics.weak_modules_csv(weak), nl=False)
    click.echo(analytics.time_spent_csv(course, avg), nl=False)


if __name__ == "__main__":
    main()
