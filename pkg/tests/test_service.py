"""HTTP annotation service: lifecycle, errors, journals, and races."""

import json
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi.testclient import TestClient

from idsel.annotation import parse_export
from idsel.corpus import Corpus, Document
from idsel.geometry import EmbeddingSet
from idsel.service import CreateSessionRequest, SessionStore, create_app


def small_registry():
    gold = {f"d{i}": ("pos" if i % 2 else "neg") for i in range(8)}
    corpus = Corpus(
        documents=tuple(
            Document(id=i, text=f"document body {i}", gold_label=g)
            for i, g in gold.items()
        )
    )
    rng = np.random.default_rng(0)
    emb = EmbeddingSet.from_mapping(
        {i: rng.normal(size=5).astype(np.float32) for i in gold}
    )
    unlabeled = Corpus(
        documents=tuple(Document(id=f"u{i}", text=f"raw text {i}") for i in range(4))
    )
    return {"default": (corpus, emb), "raw": (unlabeled, None)}


@pytest.fixture()
def client():
    return TestClient(create_app(small_registry()))


def create_session(client, **overrides):
    body = {"method": "random", "n_shots": 2, "seed": 3}
    body.update(overrides)
    response = client.post("/sessions", json=body)
    assert response.status_code == 201, response.text
    return response.json()


def test_healthz_reports_loaded_corpora(client):
    payload = client.get("/healthz").json()
    assert payload["status"] == "ok"
    assert payload["corpora"]["default"] == {
        "documents": 8,
        "embeddings": 8,
        "has_gold_labels": True,
    }
    assert payload["corpora"]["raw"]["has_gold_labels"] is False


def test_create_session_validations(client):
    response = client.post("/sessions", json={"method": "sideways", "n_shots": 2})
    assert response.status_code == 400
    assert response.json()["code"] == "validation"

    response = client.post(
        "/sessions", json={"method": "random", "n_shots": 2, "corpus": "nope"}
    )
    assert response.status_code == 404
    assert response.json()["code"] == "not_found"

    response = client.post(
        "/sessions", json={"method": "rss", "n_shots": 2, "corpus": "raw"}
    )
    assert response.status_code == 400

    response = client.post(
        "/sessions", json={"method": "random", "n_shots": 2, "corpus": "raw"}
    )
    assert response.status_code == 400
    assert "labels are required" in response.json()["message"]


def test_unknown_session_is_404(client):
    assert client.get("/sessions/ghost").status_code == 404
    assert client.get("/sessions/ghost/next").status_code == 404
    assert client.get("/sessions/ghost/export").status_code == 404
    assert (
        client.post(
            "/sessions/ghost/annotations", json={"doc_id": "d0", "label": "pos"}
        ).status_code
        == 404
    )


def test_full_annotation_lifecycle(client):
    session = create_session(client, n_shots=1)
    sid = session["session_id"]
    assert session["status"] == "active"
    assert session["progress"]["n_ranked"] == 8
    assert session["progress"]["theta_so_far"] == 0.0

    first = client.get(f"/sessions/{sid}/next").json()
    again = client.get(f"/sessions/{sid}/next").json()
    assert first == again  # peeking never advances
    assert first["rank"] == 0
    assert first["text"].startswith("document body")

    # wrong document -> conflict, nothing recorded
    bad = client.post(
        f"/sessions/{sid}/annotations", json={"doc_id": "not-next", "label": "pos"}
    )
    assert bad.status_code == 409
    assert client.get(f"/sessions/{sid}/next").json()["rank"] == 0

    # unknown label -> validation error
    bad = client.post(
        f"/sessions/{sid}/annotations", json={"doc_id": first["id"], "label": "meh"}
    )
    assert bad.status_code == 400

    # annotate with gold labels until the session completes
    corpus, _ = small_registry()["default"]
    payload = first
    while True:
        doc_id = payload["id"]
        done = client.post(
            f"/sessions/{sid}/annotations",
            json={"doc_id": doc_id, "label": corpus.get(doc_id).gold_label},
        )
        assert done.status_code == 200
        payload = client.get(f"/sessions/{sid}/next").json()
        if "id" not in payload:
            break
    assert payload["status"] == "complete"
    assert payload["theta"] >= 1.0

    # terminal sessions reject further annotations
    conflict = client.post(
        f"/sessions/{sid}/annotations", json={"doc_id": "d0", "label": "pos"}
    )
    assert conflict.status_code == 409

    text = client.get(f"/sessions/{sid}/export").text
    records, summary = parse_export(text.splitlines())
    assert summary["status"] == "complete"
    assert summary["theta"] == payload["theta"]
    assert len(records) == summary["total_annotations"]


def test_exhausted_session_reports_deficits(client):
    session = create_session(
        client, corpus="raw", labels=["x", "y"], n_shots=1, seed=0
    )
    sid = session["session_id"]
    while True:
        payload = client.get(f"/sessions/{sid}/next").json()
        if "id" not in payload:
            break
        client.post(
            f"/sessions/{sid}/annotations",
            json={"doc_id": payload["id"], "label": "x"},
        )
    assert payload["status"] == "exhausted"
    _, summary = parse_export(
        client.get(f"/sessions/{sid}/export").text.splitlines()
    )
    assert summary["deficits"] == {"y": 1}


def test_failed_initialization_is_surfaced():
    corpus, emb = small_registry()["default"]
    partial = EmbeddingSet.from_mapping(
        {i: emb.vector(i) for i in list(sorted(corpus.ids()))[:4]}
    )
    client = TestClient(create_app({"default": (corpus, partial)}))
    session = create_session(client, method="rss")
    assert session["status"] == "failed"
    assert "error" in session
    response = client.get(f"/sessions/{session['session_id']}/next")
    assert response.status_code == 409
    assert "failed" in response.json()["message"]


def test_background_initialization_over_threshold():
    client = TestClient(create_app(small_registry(), sync_threshold=0))
    session = create_session(client, n_shots=1)
    sid = session["session_id"]
    assert session["status"] in ("pending", "active")
    deadline = time.time() + 5.0
    while time.time() < deadline:
        status = client.get(f"/sessions/{sid}").json()["status"]
        if status != "pending":
            break
        time.sleep(0.01)
    assert status == "active"
    assert "id" in client.get(f"/sessions/{sid}/next").json()


def test_journal_recovery_round_trip(tmp_path):
    journal_dir = tmp_path / "journal"
    registry = small_registry()
    client = TestClient(create_app(registry, journal_dir=str(journal_dir)))
    session = create_session(client, n_shots=2, seed=9)
    sid = session["session_id"]
    corpus, _ = registry["default"]
    for _ in range(3):
        payload = client.get(f"/sessions/{sid}/next").json()
        client.post(
            f"/sessions/{sid}/annotations",
            json={"doc_id": payload["id"], "label": corpus.get(payload["id"]).gold_label},
        )
    before = client.get(f"/sessions/{sid}/export").text
    progress_before = client.get(f"/sessions/{sid}").json()["progress"]

    # a corrupted journal must not break recovery of the healthy one
    (journal_dir / "broken.jsonl").write_text("{not json}\n")
    (journal_dir / "empty.jsonl").write_text("")

    revived = TestClient(create_app(registry, journal_dir=str(journal_dir)))
    assert revived.get(f"/sessions/{sid}/export").text == before
    progress_after = revived.get(f"/sessions/{sid}").json()["progress"]
    assert progress_after == progress_before
    # the revived session keeps accepting annotations
    payload = revived.get(f"/sessions/{sid}/next").json()
    done = revived.post(
        f"/sessions/{sid}/annotations",
        json={"doc_id": payload["id"], "label": corpus.get(payload["id"]).gold_label},
    )
    assert done.status_code == 200


def test_journal_lines_are_meta_then_annotations(tmp_path):
    journal_dir = tmp_path / "journal"
    registry = small_registry()
    client = TestClient(create_app(registry, journal_dir=str(journal_dir)))
    session = create_session(client, n_shots=1, seed=4)
    sid = session["session_id"]
    payload = client.get(f"/sessions/{sid}/next").json()
    client.post(
        f"/sessions/{sid}/annotations", json={"doc_id": payload["id"], "label": "pos"}
    )
    lines = (journal_dir / f"{sid}.jsonl").read_text().splitlines()
    meta = json.loads(lines[0])
    assert meta["kind"] == "session-meta"
    assert len(meta["ranked_ids"]) == 8
    assert meta["ranked_ids"][0] == payload["id"]
    assert json.loads(lines[1]) == {"id": payload["id"], "label": "pos"}


def test_racing_annotations_resolve_to_one_success(client):
    session = create_session(client, n_shots=2)
    sid = session["session_id"]
    for round_no in range(1, 5):
        head = client.get(f"/sessions/{sid}/next").json()["id"]

        def shoot(_k, head=head):
            return client.post(
                f"/sessions/{sid}/annotations",
                json={"doc_id": head, "label": "pos"},
            ).status_code

        with ThreadPoolExecutor(max_workers=8) as pool:
            codes = list(pool.map(shoot, range(8)))
        assert codes.count(200) == 1
        assert codes.count(409) == 7
        progress = client.get(f"/sessions/{sid}").json()["progress"]
        assert progress["cursor"] == round_no  # exactly one advance per round


def test_store_create_is_usable_without_http():
    store = SessionStore(small_registry())
    described = store.create(CreateSessionRequest(method="lls", n_shots=1, beta=1.0))
    assert described["status"] == "active"
    assert described["progress"]["method"] == "lls"
