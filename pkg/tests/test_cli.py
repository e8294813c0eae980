import json
import uuid
from datetime import datetime, timedelta, timezone

import pytest
from click.testing import CliRunner

from coursechat.cli import main
from coursechat.courses import CourseManager
from coursechat.models import Quiz, QuizQuestion, SessionLog
from coursechat.storage import Database


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def env(tmp_path):
    """Config file pointing CLI commands at a temp store and database."""
    db_path = tmp_path / "app.db"
    config = tmp_path / "app.cfg"
    config.write_text(
        f"DB_PATH={db_path}\n"
        f"OBJECT_STORE_ROOT={tmp_path / 'store'}\n"
        f"TRANSCRIPT_FIXTURES={tmp_path / 'transcripts'}\n"
    )
    (tmp_path / "transcripts").mkdir()
    return tmp_path, config


def test_ingest_then_query_roundtrip(runner, env, tmp_path):
    root, config = env
    doc = tmp_path / "fruit.txt"
    doc.write_text(
        "apple orchards need sun\n\nbanana plants need humidity\n\n"
        "cherry trees need chill"
    )
    result = runner.invoke(main, [
        "ingest", str(doc), "--course", "Fruit 101", "--config", str(config),
    ])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["manifest_version"] == 1

    result = runner.invoke(main, [
        "ingest", str(doc), "--course", "Fruit 101", "--config", str(config),
    ])
    assert json.loads(result.output)["manifest_version"] == 2

    result = runner.invoke(main, [
        "query", "what do apple orchards need", "--course", "Fruit 101",
        "--k", "2", "--config", str(config),
    ])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "rank,chunk_id,bm25,cosine,fused"
    assert len(lines) == 3  # header + k rows


def test_query_missing_index_fails_nonzero(runner, env):
    _, config = env
    result = runner.invoke(main, [
        "query", "anything", "--course", "ghost", "--config", str(config),
    ])
    assert result.exit_code == 1
    assert "index_not_found" in result.output


def test_ingest_bad_format_fails_nonzero(runner, env, tmp_path):
    _, config = env
    doc = tmp_path / "data.bin"
    doc.write_bytes(b"\xff\xfe")
    result = runner.invoke(main, [
        "ingest", str(doc), "--course", "X", "--format", "txt",
        "--config", str(config),
    ])
    assert result.exit_code == 1
    assert "invalid_encoding" in result.output


def test_eval_rouge_identity_means_one(runner, tmp_path):
    turns = [
        {"turn_id": "t1", "answer": "the mitochondria is the powerhouse"},
        {"turn_id": "t2", "answer": "water boils at one hundred"},
    ]
    refs = {t["turn_id"]: t["answer"] for t in turns}
    turns_file = tmp_path / "turns.json"
    refs_file = tmp_path / "refs.json"
    turns_file.write_text(json.dumps(turns))
    refs_file.write_text(json.dumps(refs))

    for metric in ("rouge1", "rouge2", "rougeL"):
        result = runner.invoke(main, [
            "eval-rouge", str(turns_file), str(refs_file),
            "--metric", metric,
        ])
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert lines[0] == "turn_id,precision,recall,f1"
        mean = lines[-1].split(",")
        assert mean[0] == "mean"
        assert [float(x) for x in mean[1:]] == [1.0, 1.0, 1.0]


def test_eval_rouge_parallel_refs_list(runner, tmp_path):
    turns_file = tmp_path / "turns.json"
    refs_file = tmp_path / "refs.json"
    turns_file.write_text(json.dumps([{"answer": "a b c d"}]))
    refs_file.write_text(json.dumps(["a c d"]))
    result = runner.invoke(main, [
        "eval-rouge", str(turns_file), str(refs_file), "--metric", "rougeL",
    ])
    assert result.exit_code == 0
    row = result.output.strip().splitlines()[1].split(",")
    assert float(row[1]) == 0.75  # P = LCS 3 / 4 candidate tokens
    assert float(row[2]) == 1.0


def test_report_outputs_both_csv_blocks(runner, env):
    root, config = env
    db = Database(root / "app.db")
    manager = CourseManager(db)
    owner_id = manager.register("prof", "p@e.e", "password123",
                                "instructor", "instructor_basic")
    manager.process_payment(owner_id, "instructor_basic")
    course = manager.create_course(db.get_user(owner_id), "DS2025", "public")
    quiz = Quiz(
        quiz_id=uuid.uuid4().hex,
        course_id=course.course_id,
        module_label="Module 3",
        questions=[QuizQuestion("q?", ["a", "b", "c", "d"], 0)],
    )
    db.insert_quiz(quiz)
    from coursechat.analytics import record_attempt

    for user in ("u1", "u2", "u3"):
        record_attempt(db, user, quiz.quiz_id, [1])
    started = datetime(2025, 4, 1, tzinfo=timezone.utc)
    db.insert_session(SessionLog(
        session_id="s1", user_id="u1", course_id=course.course_id,
        started_at=started, ended_at=started + timedelta(seconds=120),
    ))
    db.close()

    result = runner.invoke(main, [
        "report", "--course", course.course_id, "--threshold", "0.5",
        "--config", str(config),
    ])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "module_label,weak_user_count"
    assert lines[1] == "Module 3,3"
    assert lines[2] == "course_id,avg_seconds"
    assert lines[3] == f"{course.course_id},120.0"
