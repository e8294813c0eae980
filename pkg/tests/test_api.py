import io
import re
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from coursechat.api import PUBLIC_ROUTES, create_app
from coursechat.config import Config
from coursechat.errors import API_ERROR_CODES
from coursechat.service import CoursePlatform

from conftest import TRANSCRIPTS, MockChatClient

WEBUI_API_CLIENT = Path(__file__).parent.parent / "frontend" / "src" / "api.ts"


def _register_and_login(client, username, role, plan):
    resp = client.post("/auth/register", json={
        "username": username,
        "email": f"{username}@example.edu",
        "password": "password123",
        "role": role,
        "plan": plan,
    })
    assert resp.status_code == 201, resp.text
    resp = client.post("/auth/pay", json={"username": username, "plan": plan})
    assert resp.status_code == 200, resp.text
    assert resp.json()["status"] == "confirmed"
    resp = client.post("/auth/login", json={
        "username": username, "password": "password123",
    })
    assert resp.status_code == 200, resp.text
    return {"Authorization": f"Bearer {resp.json()['token']}"}


def _upload_text(client, platform, headers, course_id, text,
                 filename="notes.txt", declared="txt", wait=True):
    resp = client.post(
        f"/courses/{course_id}/documents",
        headers=headers,
        files={"file": (filename, io.BytesIO(text.encode()), "text/plain")},
        data={"declared_format": declared},
    )
    if resp.status_code != 202:
        return resp, None
    job_id = resp.json()["job_id"]
    if wait:
        platform.jobs.wait(job_id)
    return resp, job_id


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    cfg = Config(
        object_store_root=str(tmp_path_factory.mktemp("store")),
        transcript_fixtures=str(TRANSCRIPTS),
    )
    llm = MockChatClient(reply="mock answer about apples")
    platform = CoursePlatform(cfg, chat_client=llm)
    app = create_app(platform)
    client = TestClient(app, raise_server_exceptions=False)

    teacher = _register_and_login(client, "teach", "instructor",
                                  "instructor_basic")
    learner = _register_and_login(client, "study", "learner", "learner_basic")
    outsider = _register_and_login(client, "other", "learner", "learner_basic")

    resp = client.post("/courses", headers=teacher, json={
        "title": "Orchard Science", "visibility": "private",
    })
    assert resp.status_code == 201
    course = resp.json()

    _, job = _upload_text(
        client, platform, teacher, course["course_id"],
        "apple orchards need full sun\n\nbanana plants need humidity\n\n"
        "cherry trees need winter chill hours",
    )
    assert platform.jobs.get(job).status == "done"

    learner_id = platform.db.get_user_by_username("study").user_id
    client.post(f"/courses/{course['course_id']}/grants", headers=teacher,
                json={"user_id": learner_id})

    return {
        "client": client,
        "platform": platform,
        "llm": llm,
        "teacher": teacher,
        "learner": learner,
        "outsider": outsider,
        "course": course,
        "learner_id": learner_id,
    }


class TestAuthFlow:
    def test_login_before_payment_is_402(self, world):
        client = world["client"]
        client.post("/auth/register", json={
            "username": "unpaid", "email": "u@example.edu",
            "password": "password123", "role": "learner",
            "plan": "learner_basic",
        })
        resp = client.post("/auth/login", json={
            "username": "unpaid", "password": "password123",
        })
        assert resp.status_code == 402
        assert resp.json()["code"] == "payment_required"

    def test_wrong_credentials_401(self, world):
        resp = world["client"].post("/auth/login", json={
            "username": "teach", "password": "wrong-password",
        })
        assert resp.status_code == 401
        assert resp.json()["code"] == "invalid_credentials"

    def test_duplicate_username_409(self, world):
        resp = world["client"].post("/auth/register", json={
            "username": "teach", "email": "t2@example.edu",
            "password": "password123", "role": "learner",
            "plan": "learner_basic",
        })
        assert resp.status_code == 409

    def test_password_reset_flow(self, world):
        client = world["client"]
        client.post("/auth/register", json={
            "username": "forgets", "email": "f@example.edu",
            "password": "password123", "role": "learner",
            "plan": "learner_basic",
        })
        client.post("/auth/pay", json={
            "username": "forgets", "plan": "learner_basic",
        })
        token = client.post(
            "/auth/reset-request", json={"username": "forgets"}
        ).json()["reset_token"]
        resp = client.post("/auth/reset-confirm", json={
            "reset_token": token, "new_password": "fresh-password-9",
        })
        assert resp.status_code == 204
        resp = client.post("/auth/login", json={
            "username": "forgets", "password": "fresh-password-9",
        })
        assert resp.status_code == 200

    def test_logout_revokes(self, world):
        client = world["client"]
        headers = _register_and_login(client, "leaver", "learner",
                                      "learner_basic")
        assert client.get("/courses", headers=headers).status_code == 200
        assert client.post("/auth/logout", headers=headers).status_code == 204
        assert client.get("/courses", headers=headers).status_code == 401


class TestAuthSweep:
    def test_every_route_requires_bearer_except_public(self, world):
        client = world["client"]
        app = client.app
        fillers = {
            "course_id": "x", "user_id": "x", "job_id": "x",
            "quiz_id": "x", "session_id": "x",
        }
        seen = set()
        for route in app.routes:
            if not hasattr(route, "methods"):
                continue
            path = route.path
            for name, value in fillers.items():
                path = path.replace("{" + name + "}", value)
            for method in route.methods:
                seen.add((method, route.path))
                if (method, route.path) in PUBLIC_ROUTES:
                    continue
                resp = client.request(method, path)
                assert resp.status_code == 401, (method, path, resp.text)
                assert resp.json()["code"] == "invalid_token"
        assert PUBLIC_ROUTES <= seen

    def test_error_bodies_parse_as_api_error(self, world):
        client = world["client"]
        probes = [
            client.get("/courses"),
            client.get("/nope/missing", headers=world["teacher"]),
            client.post("/auth/login", json={"username": "x"}),
            client.post("/auth/login", json={
                "username": "x", "password": "y",
            }),
            client.get("/jobs/ghost", headers=world["teacher"]),
            client.request("DELETE", "/auth/login",
                           headers=world["teacher"]),
        ]
        for resp in probes:
            assert resp.status_code >= 400
            body = resp.json()
            assert set(body) == {"status", "code", "message"}, resp.text
            assert body["status"] == resp.status_code
            assert body["code"] in API_ERROR_CODES
            assert "Traceback" not in resp.text


class TestWebUiContract:
    def test_frontend_endpoint_table_matches_served_routes(self, world):
        """The web client's endpoint table and the served routes agree."""
        if not WEBUI_API_CLIENT.exists():
            pytest.skip("web client not checked out")
        source = WEBUI_API_CLIENT.read_text(encoding="utf-8")
        table = re.search(
            r"DOCUMENTED_ENDPOINTS[^(]*\(\[(.*?)\]\)", source, re.DOTALL
        )
        assert table, "endpoint table not found in client source"
        declared = {
            (m.group(1), m.group(2))
            for m in re.finditer(r'"(GET|POST|DELETE) ([^"]+)"', table.group(1))
        }
        served = {
            (method, route.path)
            for route in world["client"].app.routes
            if hasattr(route, "methods")
            for method in route.methods
        }
        assert declared == served, declared ^ served


class TestCourses:
    def test_learner_cannot_create_course(self, world):
        resp = world["client"].post("/courses", headers=world["learner"],
                                    json={"title": "X", "visibility": "public"})
        assert resp.status_code == 403

    def test_duplicate_slug(self, world):
        resp = world["client"].post(
            "/courses", headers=world["teacher"],
            json={"title": "orchard science!!", "visibility": "public"},
        )
        assert resp.status_code == 409
        assert resp.json()["code"] == "duplicate_slug"

    def test_detail_reports_manifest_version(self, world):
        resp = world["client"].get(
            f"/courses/{world['course']['course_id']}",
            headers=world["teacher"],
        )
        assert resp.status_code == 200
        assert resp.json()["manifest_version"] == 1
        assert resp.json()["n_documents"] == 1


class TestIngestionEndpoints:
    def test_upload_and_job_reports_version(self, world):
        client, platform = world["client"], world["platform"]
        teacher = world["teacher"]
        resp = client.post("/courses", headers=teacher, json={
            "title": "Upload Target", "visibility": "public",
        })
        cid = resp.json()["course_id"]
        resp, job = _upload_text(client, platform, teacher, cid,
                                 "grapes grow on vines")
        assert resp.status_code == 202
        status = client.get(f"/jobs/{job}", headers=teacher).json()
        assert status["status"] == "done"
        assert status["manifest_version"] == 1

        _, job2 = _upload_text(client, platform, teacher, cid,
                               "olives grow on trees")
        status = client.get(f"/jobs/{job2}", headers=teacher).json()
        assert status["manifest_version"] == 2

    def test_unsupported_format_is_415(self, world):
        client = world["client"]
        resp, _ = _upload_text(
            client, world["platform"], world["teacher"],
            world["course"]["course_id"], "binaryish", declared="pdf",
        )
        assert resp.status_code == 415
        assert resp.json()["code"] == "unsupported_format"

    def test_raw_uploads_deleted_after_indexing(self, world):
        platform = world["platform"]
        slug = world["course"]["slug"]
        assert platform.store.list(f"courses/{slug}/raw/") == []

    def test_youtube_ingestion_with_fixture(self, world):
        client, platform = world["client"], world["platform"]
        teacher = world["teacher"]
        resp = client.post("/courses", headers=teacher, json={
            "title": "Video Course", "visibility": "public",
        })
        cid = resp.json()["course_id"]
        resp = client.post(f"/courses/{cid}/youtube", headers=teacher, json={
            "url": "https://www.youtube.com/watch?v=fixvid00en1",
            "preferred_langs": ["en"],
        })
        assert resp.status_code == 202, resp.text
        job = platform.jobs.wait(resp.json()["job_id"])
        assert job.status == "done"

    def test_unknown_video_is_424(self, world):
        client = world["client"]
        resp = client.post(
            f"/courses/{world['course']['course_id']}/youtube",
            headers=world["teacher"],
            json={"url": "https://youtu.be/nosuchvid00"},
        )
        assert resp.status_code == 424
        assert resp.json()["code"] == "transcript_unavailable"

    def test_chat_before_upload_is_404(self, world):
        client = world["client"]
        resp = client.post("/courses", headers=world["teacher"], json={
            "title": "Empty Course", "visibility": "public",
        })
        cid = resp.json()["course_id"]
        resp = client.post(f"/courses/{cid}/chat", headers=world["teacher"],
                           json={"question": "anything?"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "index_not_found"

    def test_learner_cannot_upload(self, world):
        resp, _ = _upload_text(
            world["client"], world["platform"], world["learner"],
            world["course"]["course_id"], "sneaky",
        )
        assert resp.status_code == 403


class TestChatEndpoint:
    def test_answer_with_context(self, world):
        client = world["client"]
        resp = client.post(
            f"/courses/{world['course']['course_id']}/chat",
            headers=world["learner"],
            json={"question": "What do apple orchards need?", "k": 2},
        )
        assert resp.status_code == 200, resp.text
        body = resp.json()
        assert body["answer"] == "mock answer about apples"
        assert body["context_chunk_ids"]
        assert body["turn_id"]

    def test_restricted_refusal(self, world):
        resp = world["client"].post(
            f"/courses/{world['course']['course_id']}/chat",
            headers=world["learner"],
            json={"question": "zzyzx qwxv plugh", "mode": "restricted"},
        )
        assert resp.status_code == 200
        assert resp.json()["answer"] == "I don't know."

    def test_ungranted_learner_403(self, world):
        resp = world["client"].post(
            f"/courses/{world['course']['course_id']}/chat",
            headers=world["outsider"],
            json={"question": "let me in?"},
        )
        assert resp.status_code == 403
        assert resp.json()["code"] == "access_denied"

    def test_turns_visibility(self, world):
        client = world["client"]
        course_id = world["course"]["course_id"]
        teacher_view = client.get(f"/courses/{course_id}/turns",
                                  headers=world["teacher"])
        assert teacher_view.status_code == 200
        learner_view = client.get(f"/courses/{course_id}/turns",
                                  headers=world["learner"])
        assert learner_view.status_code == 200
        learner_ids = {t["user_id"] for t in learner_view.json()}
        assert learner_ids <= {world["learner_id"]}
        assert len(teacher_view.json()) >= len(learner_view.json())


@pytest.fixture(scope="module")
def quiz(world):
    resp = world["client"].post(
        f"/courses/{world['course']['course_id']}/quizzes",
        headers=world["teacher"],
        json={"module_label": "Module 3", "n_questions": 2},
    )
    assert resp.status_code == 201, resp.text
    return resp.json()


class TestAnalyticsEndpoints:
    def test_quiz_hides_answers_from_learners(self, world, quiz):
        client = world["client"]
        course_id = world["course"]["course_id"]
        as_learner = client.get(f"/courses/{course_id}/quizzes",
                                headers=world["learner"]).json()
        assert all("correct_index" not in q for quiz_item in as_learner
                   for q in quiz_item["questions"])
        as_teacher = client.get(f"/courses/{course_id}/quizzes",
                                headers=world["teacher"]).json()
        assert all("correct_index" in q for quiz_item in as_teacher
                   for q in quiz_item["questions"])

    def test_attempt_scored(self, world, quiz):
        answers = [q["correct_index"] for q in quiz["questions"]]
        resp = world["client"].post(
            f"/quizzes/{quiz['quiz_id']}/attempts",
            headers=world["learner"], json={"answers": answers},
        )
        assert resp.status_code == 201
        assert resp.json()["score"] == 1.0

    def test_attempt_length_mismatch(self, world, quiz):
        resp = world["client"].post(
            f"/quizzes/{quiz['quiz_id']}/attempts",
            headers=world["learner"], json={"answers": [0]},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "length_mismatch"

    def test_weak_modules_owner_only(self, world, quiz):
        course_id = world["course"]["course_id"]
        resp = world["client"].get(
            f"/courses/{course_id}/analytics/weak-modules",
            headers=world["learner"],
        )
        assert resp.status_code == 403
        resp = world["client"].get(
            f"/courses/{course_id}/analytics/weak-modules",
            headers=world["teacher"],
        )
        assert resp.status_code == 200
        assert "Module 3" in resp.json()

    def test_weak_modules_csv_header(self, world, quiz):
        resp = world["client"].get(
            f"/courses/{world['course']['course_id']}/analytics/weak-modules",
            headers=world["teacher"], params={"format": "csv"},
        )
        assert resp.headers["content-type"].startswith("text/csv")
        assert resp.text.splitlines()[0] == "module_label,weak_user_count"

    def test_time_report(self, world):
        client = world["client"]
        course_id = world["course"]["course_id"]
        started = client.post(f"/courses/{course_id}/sessions",
                              headers=world["learner"])
        assert started.status_code == 201
        ended = client.post(
            f"/sessions/{started.json()['session_id']}/end",
            headers=world["learner"],
        )
        assert ended.status_code == 200
        assert ended.json()["seconds"] >= 0
        resp = client.get(f"/courses/{course_id}/analytics/time",
                          headers=world["teacher"], params={"format": "csv"})
        assert resp.text.splitlines()[0] == "course_id,avg_seconds"

    def test_cannot_end_another_users_session(self, world):
        client = world["client"]
        course_id = world["course"]["course_id"]
        session = client.post(f"/courses/{course_id}/sessions",
                              headers=world["learner"]).json()
        resp = client.post(f"/sessions/{session['session_id']}/end",
                           headers=world["teacher"])
        assert resp.status_code == 403
