"""Annotation service protocol tests.

The main test drives a full session over HTTP: two annotators, a 25-item
frame with three blinded systems, calibration, adjudication of planted
disagreements, solo and review passes, closure, and export. Along the way
it restarts the server from the event log and checks that no response
ever names a model.
"""

import hashlib
import json

from fastapi.testclient import TestClient

from revcorpus.evaluation import draw_sample, write_frame
from revcorpus.service import AnnotationServer, create_app

from .conftest import make_example

MODELS = ("sys-alpha", "sys-beta", "sys-gamma")
FEEDBACK = ("suggestion", "concern", "confused_question")
CATEGORIES = ("logical", "naming_convention", "documentation", "validation")
ANN_A, ANN_B = "ann-a", "ann-b"


class RecordingClient:
    """TestClient wrapper that keeps every response body for the blinding scan."""

    def __init__(self, app):
        self.client = TestClient(app)
        self.bodies: list[str] = []
        self.posts = 0

    def get(self, url, **kwargs):
        resp = self.client.get(url, **kwargs)
        self.bodies.append(resp.text)
        return resp

    def post(self, url, **kwargs):
        resp = self.client.post(url, **kwargs)
        self.bodies.append(resp.text)
        if resp.status_code in (200, 201):
            self.posts += 1
        return resp


def build_frame(tmp_path, n_items, models, name, pool=None, seed=9):
    pool = pool or n_items
    examples = [
        make_example(
            pr_id=i + 1,
            comment_id=i + 1,
            m_pre=f"int v{i} = 0;",
            r_nl=f"Rename variable {i}.",
        )
        for i in range(pool)
    ]
    generations = {
        m: [f"variant {j} comment for item {i}" for i in range(pool)]
        for j, m in enumerate(models)
    }
    frame = draw_sample(examples, generations, n_items, seed=seed)
    frames_dir = tmp_path / "frames"
    frames_dir.mkdir(exist_ok=True)
    write_frame(frame, frames_dir / name)
    return frame, frames_dir


def base_values(sample_id, alias):
    """Deterministic labels so both annotators agree unless a test plants a flip."""
    h = hashlib.md5(f"{sample_id}|{alias}".encode()).digest()
    applicable = h[1] % 2 == 1
    return {
        "semantic_equivalence": h[0] % 2 == 1,
        "applicability": applicable,
        "has_explanation": h[2] % 2 == 1,
        "feedback_type": FEEDBACK[h[3] % 3] if applicable else None,
        "category": CATEGORIES[h[4] % 4] if applicable else None,
    }


def drive_labels(client, session_id, annotator, values_for, resubmit=False):
    """Follow /next until no item is offered, labeling every candidate."""
    last = None
    while True:
        resp = client.get(
            f"/sessions/{session_id}/next", params={"annotator": annotator}
        )
        assert resp.status_code == 200, resp.text
        payload = resp.json()
        item = payload.get("item")
        if item is None:
            return payload
        rounds = 2 if resubmit and payload["remaining"] > 1 else 1
        for _ in range(rounds):
            for cand in item["candidates"]:
                body = {
                    "annotator": annotator,
                    "sample_id": item["sample_id"],
                    "alias": cand["alias"],
                    **values_for(annotator, item["sample_id"], cand["alias"]),
                }
                resp = client.post(f"/sessions/{session_id}/labels", json=body)
                assert resp.status_code == 200, resp.text
        last = payload
    return last


def test_full_protocol_with_restart_and_replay(tmp_path):
    frame, frames_dir = build_frame(tmp_path, 25, MODELS, "frame.jsonl", pool=30)
    log_path = tmp_path / "events.jsonl"

    cal_items = frame.items[:10]
    solo_items = frame.items[10:]
    base_flip = (cal_items[2].sample_id, cal_items[2].candidates[0][0])
    cond_flip = (cal_items[5].sample_id, cal_items[5].candidates[1][0])
    rev_base_flip = (solo_items[2].sample_id, solo_items[2].candidates[0][0])
    rev_cond_flip = (solo_items[8].sample_id, solo_items[8].candidates[2][0])

    def values_for(annotator, sample_id, alias):
        unit = (sample_id, alias)
        if unit in (cond_flip, rev_cond_flip):
            return {
                "semantic_equivalence": False,
                "applicability": True,
                "has_explanation": True,
                "feedback_type": "suggestion" if annotator == ANN_A else "concern",
                "category": "logical",
            }
        values = base_values(sample_id, alias)
        if unit in (base_flip, rev_base_flip) and annotator == ANN_B:
            values["semantic_equivalence"] = not values["semantic_equivalence"]
        return values

    client = RecordingClient(create_app(log_path, frames_dir))

    resp = client.post(
        "/sessions",
        json={"frame": "frame.jsonl", "annotators": [ANN_A, ANN_B], "calibration_size": 10},
    )
    assert resp.status_code == 201, resp.text
    session_id = resp.json()["session_id"]
    assert resp.json()["phase"] == "calibration"

    resp = client.get(f"/sessions/{session_id}")
    assert resp.json()["items"] == 25

    # Idempotent reads: asking twice without labeling offers the same item.
    first = client.get(f"/sessions/{session_id}/next", params={"annotator": ANN_A}).json()
    again = client.get(f"/sessions/{session_id}/next", params={"annotator": ANN_A}).json()
    assert first == again
    assert first["item"] is not None

    # Calibration: first annotator labels everything, with resubmissions.
    done = drive_labels(client, session_id, ANN_A, values_for, resubmit=True)
    assert done["phase"] == "calibration"
    assert done.get("phase_complete") is True
    assert done["waiting_for"] == ANN_B

    drive_labels(client, session_id, ANN_B, values_for)

    # Both planted calibration disagreements surface for adjudication.
    resp = client.get(f"/sessions/{session_id}")
    assert resp.json()["phase"] == "adjudication"
    payload = client.get(
        f"/sessions/{session_id}/next", params={"annotator": ANN_A}
    ).json()
    assert payload["phase"] == "adjudication"
    assert payload["remaining"] == 2
    open_units = {(d["sample_id"], d["alias"]) for d in payload["disagreements"]}
    assert open_units == {base_flip, cond_flip}
    by_unit = {(d["sample_id"], d["alias"]): d for d in payload["disagreements"]}
    assert by_unit[base_flip]["dimensions"] == ["semantic_equivalence"]
    assert by_unit[cond_flip]["dimensions"] == ["feedback_type"]
    assert by_unit[base_flip]["labels"][ANN_A] != by_unit[base_flip]["labels"][ANN_B]

    for item in payload["disagreements"]:
        resolution = values_for(ANN_A, item["sample_id"], item["alias"])
        resp = client.post(
            f"/sessions/{session_id}/adjudications/{item['item_id']}/resolve",
            json=resolution,
        )
        assert resp.status_code == 200, resp.text
    assert client.get(f"/sessions/{session_id}").json()["phase"] == "solo"

    # Frozen: the adjudicated unit cannot be relabeled in any later phase.
    resp = client.post(
        f"/sessions/{session_id}/labels",
        json={
            "annotator": ANN_A,
            "sample_id": base_flip[0],
            "alias": base_flip[1],
            **values_for(ANN_A, *base_flip),
        },
    )
    assert resp.status_code == 409
    assert "adjudicated" in resp.json()["detail"]

    # Export refuses until the session is closed.
    assert client.get(f"/sessions/{session_id}/export").status_code == 409

    # Restart the service from the log and continue on a fresh app.
    client2 = RecordingClient(create_app(log_path, frames_dir))
    assert client2.get(f"/sessions/{session_id}").json()["phase"] == "solo"

    done = drive_labels(client2, session_id, ANN_A, values_for, resubmit=True)
    assert client2.get(f"/sessions/{session_id}").json()["phase"] == "review"

    # The waiting annotator is told who the session waits for.
    waiting = client2.get(
        f"/sessions/{session_id}/next", params={"annotator": ANN_A}
    ).json()
    assert waiting["waiting_for"] == ANN_B

    # Review pass shows the first annotator's prior labels on each item.
    preview = client2.get(
        f"/sessions/{session_id}/next", params={"annotator": ANN_B}
    ).json()
    prior = preview["item"]["prior_labels"]
    for cand in preview["item"]["candidates"]:
        assert prior[cand["alias"]] == values_for(
            ANN_A, preview["item"]["sample_id"], cand["alias"]
        )

    payload = drive_labels(client2, session_id, ANN_B, values_for)
    assert payload["phase"] == "review"
    open_units = {(d["sample_id"], d["alias"]) for d in payload["disagreements"]}
    assert open_units == {rev_base_flip, rev_cond_flip}
    for item in payload["disagreements"]:
        resolution = values_for(ANN_B, item["sample_id"], item["alias"])
        resp = client2.post(
            f"/sessions/{session_id}/adjudications/{item['item_id']}/resolve",
            json=resolution,
        )
        assert resp.status_code == 200, resp.text

    assert client2.get(f"/sessions/{session_id}").json()["phase"] == "closed"
    closed_next = client2.get(
        f"/sessions/{session_id}/next", params={"annotator": ANN_A}
    ).json()
    assert closed_next["closed"] is True

    # Export: one record per (item, candidate), resolutions take precedence.
    records = client2.get(f"/sessions/{session_id}/export").json()["records"]
    assert len(records) == 25 * len(MODELS)
    by_annotator = {}
    for record in records:
        by_annotator.setdefault(record["annotator_id"], 0)
        by_annotator[record["annotator_id"]] += 1
        assert set(record) == {
            "sample_id",
            "alias",
            "annotator_id",
            "semantic_equivalence",
            "applicability",
            "has_explanation",
            "feedback_type",
            "category",
        }
    assert by_annotator == {"adjudicated": 4, ANN_A: 71}
    adjudicated = {
        (r["sample_id"], r["alias"]) for r in records if r["annotator_id"] == "adjudicated"
    }
    assert adjudicated == {base_flip, cond_flip, rev_base_flip, rev_cond_flip}

    # Agreement over all 75 doubly-labeled units, batched by calibration size.
    agreement = client2.get(f"/sessions/{session_id}/agreement").json()
    assert agreement["units"] == 75
    assert agreement["dimensions"]["semantic_equivalence"]["kappa"] < 1.0
    assert agreement["dimensions"]["feedback_type"] is not None
    assert [b["items"] for b in agreement["batches"]] == [10, 10, 5]
    assert [c["items"] for c in agreement["cumulative"]] == [10, 20, 25]

    # The log holds the whole history: a fresh server replays to equal state.
    events = [
        json.loads(line)
        for line in log_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    assert len(events) >= 200
    assert [e["event_id"] for e in events] == list(range(1, len(events) + 1))
    assert len(events) == client.posts + client2.posts

    replayed = AnnotationServer(log_path, frames_dir)
    live = client2.client.app.state.server
    assert replayed.sessions[session_id].snapshot() == live.sessions[session_id].snapshot()
    assert replayed.log.next_event_id == len(events) + 1

    # Blinding: no response from either app ever names a model.
    for body in client.bodies + client2.bodies:
        for model in MODELS:
            assert model not in body
    log_text = log_path.read_text(encoding="utf-8")
    for model in MODELS:
        assert model not in log_text


def small_session(tmp_path, calibration_size=2, name="small.jsonl"):
    frame, frames_dir = build_frame(tmp_path, 4, MODELS[:2], name, seed=5)
    client = RecordingClient(create_app(tmp_path / "events.jsonl", frames_dir))
    resp = client.post(
        "/sessions",
        json={
            "frame": name,
            "annotators": [ANN_A, ANN_B],
            "calibration_size": calibration_size,
        },
    )
    assert resp.status_code == 201, resp.text
    return client, resp.json()["session_id"], frame


def test_create_session_validation(tmp_path):
    _, frames_dir = build_frame(tmp_path, 4, MODELS[:2], "small.jsonl", seed=5)
    client = RecordingClient(create_app(tmp_path / "events.jsonl", frames_dir))

    base = {"frame": "small.jsonl", "annotators": [ANN_A, ANN_B], "calibration_size": 2}
    assert client.post("/sessions", json={**base, "annotators": [ANN_A]}).status_code == 422
    assert (
        client.post("/sessions", json={**base, "annotators": [ANN_A, ANN_A]}).status_code
        == 422
    )
    assert client.post("/sessions", json={**base, "calibration_size": 5}).status_code == 422
    assert client.post("/sessions", json={**base, "calibration_size": 0}).status_code == 422
    assert client.post("/sessions", json={**base, "frame": "nope.jsonl"}).status_code == 404

    assert client.post("/sessions", json=base).status_code == 201
    # One live session per frame.
    assert client.post("/sessions", json=base).status_code == 409


def test_unknown_session_and_annotator(tmp_path):
    client, session_id, frame = small_session(tmp_path)
    assert client.get("/sessions/deadbeef").status_code == 404
    assert (
        client.get(f"/sessions/{session_id}/next", params={"annotator": "nobody"}).status_code
        == 403
    )
    item = frame.items[0]
    body = {
        "annotator": "nobody",
        "sample_id": item.sample_id,
        "alias": item.candidates[0][0],
        **base_values(item.sample_id, item.candidates[0][0]),
    }
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 403


def test_label_validation_and_phase_gating(tmp_path):
    client, session_id, frame = small_session(tmp_path)
    cal_item = frame.items[0]
    solo_item = frame.items[3]
    alias = cal_item.candidates[0][0]

    # Conditional fields are rejected when not applicable, and vice versa.
    body = {
        "annotator": ANN_A,
        "sample_id": cal_item.sample_id,
        "alias": alias,
        "semantic_equivalence": True,
        "applicability": False,
        "has_explanation": False,
        "category": "logical",
    }
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 422
    body.update(applicability=True, category=None)
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 422
    body.update(feedback_type="not-a-feedback-type", category="logical")
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 422

    # Non-calibration items are off-limits during calibration.
    body = {
        "annotator": ANN_A,
        "sample_id": solo_item.sample_id,
        "alias": solo_item.candidates[0][0],
        **base_values(solo_item.sample_id, solo_item.candidates[0][0]),
    }
    resp = client.post(f"/sessions/{session_id}/labels", json=body)
    assert resp.status_code == 409
    assert "calibration" in resp.json()["detail"]

    # Unknown unit.
    body = {
        "annotator": ANN_A,
        "sample_id": "no@such@1",
        "alias": "A",
        **base_values("x", "A"),
    }
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 404

    # Resolutions need an open adjudication phase and a real disagreement.
    resp = client.post(
        f"/sessions/{session_id}/adjudications/cal-0-A/resolve",
        json=base_values(cal_item.sample_id, alias),
    )
    assert resp.status_code == 409

    # Agreement needs at least one doubly-labeled unit.
    assert client.get(f"/sessions/{session_id}/agreement").status_code == 404


def test_agreement_skips_uncomputable_dimensions(tmp_path):
    client, session_id, frame = small_session(tmp_path, calibration_size=4)

    # Nothing is applicable: conditional dimensions have no data, and the
    # constant applicability column has no defined chance correction.
    def values_for(annotator, sample_id, alias):
        h = hashlib.md5(f"{sample_id}|{alias}|{annotator}".encode()).digest()
        return {
            "semantic_equivalence": h[0] % 2 == 1,
            "applicability": False,
            "has_explanation": h[2] % 2 == 1,
            "feedback_type": None,
            "category": None,
        }

    drive_labels(client, session_id, ANN_A, values_for)
    drive_labels(client, session_id, ANN_B, values_for)

    agreement = client.get(f"/sessions/{session_id}/agreement").json()
    assert agreement["dimensions"]["applicability"] is None
    assert agreement["dimensions"]["feedback_type"] is None
    assert agreement["dimensions"]["category"] is None
    assert agreement["dimensions"]["semantic_equivalence"] is not None


def test_resolution_rejects_unknown_item_and_double_resolve(tmp_path):
    client, session_id, frame = small_session(tmp_path, calibration_size=1)
    item = frame.items[0]

    def values_for(annotator, sample_id, alias):
        values = base_values(sample_id, alias)
        if annotator == ANN_B and alias == item.candidates[0][0]:
            values["semantic_equivalence"] = not values["semantic_equivalence"]
        return values

    drive_labels(client, session_id, ANN_A, values_for)
    drive_labels(client, session_id, ANN_B, values_for)
    assert client.get(f"/sessions/{session_id}").json()["phase"] == "adjudication"

    listing = client.get(f"/sessions/{session_id}/adjudications").json()["items"]
    assert len(listing) == 1
    item_id = listing[0]["item_id"]

    # Units in agreement are not adjudication items.
    other = f"cal-0-{item.candidates[1][0]}"
    resolution = base_values(item.sample_id, item.candidates[0][0])
    assert (
        client.post(
            f"/sessions/{session_id}/adjudications/{other}/resolve", json=resolution
        ).status_code
        == 404
    )

    assert (
        client.post(
            f"/sessions/{session_id}/adjudications/{item_id}/resolve", json=resolution
        ).status_code
        == 200
    )
    # Already resolved; the session has moved on.
    assert (
        client.post(
            f"/sessions/{session_id}/adjudications/{item_id}/resolve", json=resolution
        ).status_code
        == 409
    )


def test_relabel_before_adjudication_is_last_write_wins(tmp_path):
    client, session_id, frame = small_session(tmp_path)
    item = frame.items[0]
    alias = item.candidates[0][0]
    body = {
        "annotator": ANN_A,
        "sample_id": item.sample_id,
        "alias": alias,
        "semantic_equivalence": False,
        "applicability": False,
        "has_explanation": False,
    }
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 200
    body["semantic_equivalence"] = True
    assert client.post(f"/sessions/{session_id}/labels", json=body).status_code == 200

    state = client.client.app.state.server.sessions[session_id]
    assert state.labels[(ANN_A, item.sample_id, alias)].semantic_equivalence is True


def test_health_reports_sessions(tmp_path):
    client, _, _ = small_session(tmp_path)
    health = client.get("/health").json()
    assert health == {"status": "ok", "sessions": 1}
