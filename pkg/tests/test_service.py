"""HTTP interface: plans, menus, generation, queries, drafts, tells."""
import json

import pytest
from fastapi.testclient import TestClient

from maintgen.service import app_from_fixtures


@pytest.fixture()
def client(fixture_dir, tmp_path):
    app = app_from_fixtures(fixture_dir, workspace_dir=str(tmp_path))
    with TestClient(app) as c:
        c.workspace = tmp_path
        yield c


def generate(client, plan="check-oil-level", languages=("en", "de", "fr"),
             **kwargs) -> dict:
    response = client.post("/generate", json={
        "plan": plan, "languages": list(languages), **kwargs})
    assert response.status_code == 200, response.text
    return response.json()


def annotated_items(client, plan="check-oil-level", lang="en") -> tuple:
    batch = generate(client, plan=plan, languages=[lang] if isinstance(lang, str)
                     else lang, format="annotated-json")
    doc = batch["documents"][lang]
    return doc["id"], json.loads(doc["body"])["items"]


class TestPlans:
    def test_all_plans(self, client):
        data = client.get("/plans").json()
        ids = [p["id"] for p in data["plans"]]
        assert ids == sorted(ids)
        assert "check-oil-level" in ids and "read-oil-level-procedure" in ids

    def test_applicable_for_device(self, client):
        data = client.get("/plans", params={"device": "car-1"}).json()
        assert [p["id"] for p in data["plans"]] == [
            "check-oil-level", "refill-washer-fluid", "replace-spark-plugs"]
        assert all(p["target_device"] == "car-1" for p in data["plans"])

    def test_unknown_device(self, client):
        assert client.get("/plans", params={"device": "boat-1"}).status_code == 404


class TestMenu:
    def test_device_context(self, client):
        data = client.get("/menu", params={"context": "device"}).json()
        ids = [o["id"] for o in data["options"]]
        assert "car-1" in ids and "aircraft-1" in ids

    def test_object_role_offers_typed_instances(self, client):
        data = client.get("/menu", params={"role": "instrument"}).json()
        assert data["context"]["role"] == "instrument"
        ids = {o["id"] for o in data["options"]}
        assert "dipstick-1" in ids and "cloth-1" in ids
        # levels are states, not graspable objects
        assert "oil-level-1" not in ids

    def test_enum_role_offers_values(self, client):
        data = client.get("/menu", params={"role": "level-state"}).json()
        assert {o["id"] for o in data["options"]} == {"low", "ok", "high"}
        assert data["freeform"] is False

    def test_concept_filter(self, client):
        data = client.get("/menu", params={"concept": "tank"}).json()
        ids = [o["id"] for o in data["options"]]
        assert "oil-tank-1" in ids and "washer-reservoir-1" in ids
        assert "car-1" not in ids

    def test_option_labels_are_specific(self, client):
        data = client.get("/menu", params={"concept": "tank"}).json()
        by_id = {o["id"]: o["concept"] for o in data["options"]}
        assert by_id["oil-tank-1"] == "dipstick-tank"

    def test_argument_arity(self, client):
        assert client.get("/menu").status_code == 422
        both = client.get("/menu", params={"role": "instrument",
                                           "concept": "tank"})
        assert both.status_code == 422

    def test_unknown_ids(self, client):
        assert client.get("/menu", params={"role": "flavor"}).status_code == 404
        assert client.get("/menu", params={"concept": "boat"}).status_code == 404


class TestGenerate:
    def test_trilingual_batch(self, client):
        data = generate(client)
        assert data["batch"] == "b0001"
        assert set(data["documents"]) == {"en", "de", "fr"}
        assert data["documents"]["en"]["id"] == "b0001-en"
        assert "Pull out the dipstick." in data["documents"]["en"]["body"]

    def test_get_generation_is_stateless(self, client):
        a = generate(client)
        b = generate(client)
        assert a["batch"] != b["batch"]
        assert a["digest"] == b["digest"]
        for lang in ("en", "de", "fr"):
            assert a["documents"][lang]["body"] == b["documents"][lang]["body"]

    def test_format_and_mode_validation(self, client):
        bad_format = client.post("/generate", json={
            "plan": "check-oil-level", "languages": ["en"], "format": "docx"})
        assert bad_format.status_code == 422
        bad_mode = client.post("/generate", json={
            "plan": "check-oil-level", "languages": ["en"], "mode": "dream"})
        assert bad_mode.status_code == 422

    def test_unknown_plan(self, client):
        response = client.post("/generate", json={
            "plan": "paint-the-car", "languages": ["en"]})
        assert response.status_code == 404

    def test_empty_languages_rejected(self, client):
        response = client.post("/generate", json={
            "plan": "check-oil-level", "languages": []})
        assert response.status_code == 422


class TestSimulateEndpoint:
    def test_trace_shape(self, client):
        response = client.post("/simulate", json={"plan": "check-oil-level"})
        assert response.status_code == 200
        trace = response.json()
        assert trace["plan"] == "check-oil-level"
        assert [e["status"] for e in trace["entries"]] == \
            ["executed"] * 6 + ["skipped-by-condition"]
        assert trace["blocked"] is False

    def test_simulation_leaves_state_alone(self, client):
        client.post("/simulate", json={"plan": "replace-spark-plugs"})
        data = client.get("/plans", params={"device": "car-1"}).json()
        assert len(data["plans"]) == 3


class TestTell:
    def test_tell_then_filtered_generation(self, client):
        response = client.post("/tell", json={"assertions": [
            {"assert": "filler", "instance": "oil-level-1",
             "role": "level-state", "value": "ok"}]})
        assert response.status_code == 200
        data = response.json()
        assert data["applied"] == 1
        result = generate(client, mode="state-filtered", languages=["en"])
        assert "add engine oil" not in result["documents"]["en"]["body"]

    def test_rollback_is_all_or_nothing(self, client):
        response = client.post("/tell", json={"assertions": [
            {"assert": "filler", "instance": "washer-level-1",
             "role": "level-state", "value": "ok"},
            {"assert": "type", "instance": "ghost-9", "concept": "tank"},
        ]})
        assert response.status_code == 404
        # first assertion must have been undone: the refill plan still applies
        data = client.get("/plans", params={"device": "car-1"}).json()
        assert "refill-washer-fluid" in [p["id"] for p in data["plans"]]

    def test_malformed_assertion(self, client):
        response = client.post("/tell", json={"assertions": [
            {"frob": "qux"}]})
        assert response.status_code == 422

    def test_range_violation_rejected(self, client):
        response = client.post("/tell", json={"assertions": [
            {"assert": "filler", "instance": "oil-level-1",
             "role": "level-state", "value": "brimming"}]})
        assert response.status_code == 422


class TestDrafts:
    DRAFT = {
        "id": "wave-at-car",
        "target-device": "car-1",
        "steps": [
            {"step": "action", "id": "d-open", "category": "primitive-motor-action",
             "process": "open", "participants": {"patient": "hood-1"}},
            {"step": "action", "id": "d-close", "category": "primitive-motor-action",
             "process": "close", "participants": {"patient": "hood-1"}}
        ],
    }

    def test_draft_then_generate(self, client):
        response = client.post("/draft-plan", json={
            "session": "s1", "plan": self.DRAFT})
        assert response.status_code == 200, response.text
        assert response.json()["diagnostics"] == []
        result = client.post("/generate", json={
            "plan": "wave-at-car", "languages": ["en"], "session": "s1"})
        assert result.status_code == 200
        body = result.json()["documents"]["en"]["body"]
        assert "Open the hood." in body and "Close it." in body

    def test_draft_invisible_without_session(self, client):
        client.post("/draft-plan", json={"session": "s1", "plan": self.DRAFT})
        response = client.post("/generate", json={
            "plan": "wave-at-car", "languages": ["en"]})
        assert response.status_code == 404
        other = client.post("/generate", json={
            "plan": "wave-at-car", "languages": ["en"], "session": "s2"})
        assert other.status_code == 404

    def test_draft_does_not_touch_base_plans(self, client):
        client.post("/draft-plan", json={"session": "s1", "plan": self.DRAFT})
        data = client.get("/plans").json()
        assert "wave-at-car" not in [p["id"] for p in data["plans"]]

    def test_ghost_participant_conflict(self, client):
        bad = json.loads(json.dumps(self.DRAFT))
        bad["steps"][0]["participants"]["patient"] = "ghost-1"
        response = client.post("/draft-plan", json={"session": "s1", "plan": bad})
        assert response.status_code == 409
        detail = response.json()["detail"]
        assert detail["plan"] == "wave-at-car"
        assert any("ghost-1" in d["message"] for d in detail["diagnostics"])

    def test_malformed_plan(self, client):
        response = client.post("/draft-plan", json={
            "session": "s1", "plan": {"id": "x", "steps": "not-a-list"}})
        assert response.status_code == 422

    def test_save_writes_workspace_file(self, client):
        response = client.post("/draft-plan", json={
            "session": "s1", "plan": self.DRAFT, "save": True})
        assert response.status_code == 200
        saved = json.loads((client.workspace / "s1.json").read_text())
        assert [p["id"] for p in saved["plans"]] == ["wave-at-car"]

    def test_failed_save_registers_nothing(self, fixture_dir):
        app = app_from_fixtures(fixture_dir)
        with TestClient(app) as bare:
            response = bare.post("/draft-plan", json={
                "session": "s1", "plan": self.DRAFT, "save": True})
            assert response.status_code == 422
            # the rejected draft must not be generatable either
            response = bare.post("/generate", json={
                "plan": "wave-at-car", "session": "s1"})
            assert response.status_code == 404


class TestQueries:
    def pronoun_span(self, items) -> tuple[str, dict]:
        for i, item in enumerate(items):
            if item["kind"] != "sentence":
                continue
            for tok in item["tokens"]:
                if tok["pronoun"]:
                    return f"{i}:{tok['start']}:{tok['end']}", tok
        raise AssertionError("no pronoun token found")

    def test_antecedent(self, client):
        doc_id, items = annotated_items(client)
        span, tok = self.pronoun_span(items)
        response = client.get("/query/antecedent",
                              params={"doc": doc_id, "span": span})
        assert response.status_code == 200
        data = response.json()
        assert data["referent"] == tok["kb"] == "dipstick-1"
        ante = data["antecedent"]
        assert (ante["item"], ante["start"]) < tuple(int(x) for x in span.split(":")[:2])
        assert items[ante["item"]]["text"][ante["start"]:ante["end"]] == ante["surface"]
        assert ante["surface"] != data["pronoun"]["surface"]

    def test_antecedent_rejects_non_pronoun(self, client):
        doc_id, items = annotated_items(client)
        sent = next(i for i, item in enumerate(items)
                    if item["kind"] == "sentence")
        tok = next(t for t in items[sent]["tokens"] if not t["pronoun"])
        response = client.get("/query/antecedent", params={
            "doc": doc_id, "span": f"{sent}:{tok['start']}:{tok['end']}"})
        assert response.status_code == 422

    def test_antecedent_bad_requests(self, client):
        doc_id, _ = annotated_items(client)
        assert client.get("/query/antecedent", params={
            "doc": doc_id, "span": "zero:one:two"}).status_code == 422
        assert client.get("/query/antecedent", params={
            "doc": doc_id, "span": "0:1:2"}).status_code == 404
        assert client.get("/query/antecedent", params={
            "doc": "b9999-en", "span": "1:0:4"}).status_code == 404

    def test_align_content_token(self, client):
        batch = generate(client, format="annotated-json")
        doc = batch["documents"]["en"]
        items = json.loads(doc["body"])["items"]
        sent = next(i for i, item in enumerate(items) if item["kind"] == "sentence")
        tok = next(t for t in items[sent]["tokens"] if t["kb"] == "dipstick-1")
        response = client.get("/query/align", params={
            "doc": doc["id"], "span": f"{sent}:{tok['start']}:{tok['end']}"})
        assert response.status_code == 200
        data = response.json()
        assert data["referent"] == "dipstick-1"
        assert data["language"] == "en"
        assert set(data["spans"]) == {"de", "fr"}
        assert data["spans"]["de"] and data["spans"]["fr"]

    def test_alignment_map_endpoint(self, client):
        batch = generate(client)
        response = client.get(f"/alignment/{batch['batch']}")
        assert response.status_code == 200
        amap = response.json()
        assert amap["digest"] == batch["digest"]
        assert set(amap["languages"]) == {"en", "de", "fr"}
        assert client.get("/alignment/b9999").status_code == 404

    def test_location(self, client):
        response = client.get("/query/location",
                              params={"instance": "dipstick-1"})
        assert response.status_code == 200
        data = response.json()
        assert data["illustration"] == "ill-dipstick-1"
        assert data["url"] == "/assets/engine-bay.png"
        assert data["rectangle"] == {"x": 412, "y": 198, "w": 86, "h": 240}
        assert "dipstick" in data["caption"].lower()

    def test_location_errors(self, client):
        assert client.get("/query/location",
                          params={"instance": "cloth-1"}).status_code == 404
        assert client.get("/query/location",
                          params={"instance": "nobody"}).status_code == 404


class TestAssets:
    def test_served_asset(self, client):
        response = client.get("/assets/engine-bay.png")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"

    def test_unknown_asset(self, client):
        assert client.get("/assets/car.json").status_code == 404

    def test_traversal_is_confined(self, client):
        response = client.get("/assets/..%2Fcar.json")
        assert response.status_code == 404
