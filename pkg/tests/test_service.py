"""HTTP service: versioned edits, suggestions, cached runs, and evaluation."""

import time

import pytest
from fastapi.testclient import TestClient

from karmats import formats
from karmats.functionals import NoiseSpec
from karmats.graph import DscpGraph, VariableSpec
from karmats.service import GraphStore, create_app


def demo_graph() -> DscpGraph:
    """Two wide continuous variables with a single lag-1 link."""
    g = DscpGraph.empty()
    g = g.add_variable(VariableSpec.continuous("x", min=-1e6, max=1e6, offset=0.1))
    g = g.add_variable(VariableSpec.continuous("y", min=-1e6, max=1e6, offset=-0.2))
    g = g.add_edge(0, 1, 1)
    g = g.set_noise(0, NoiseSpec.gaussian(0.0, 0.5))
    g = g.set_noise(1, NoiseSpec.gaussian(0.0, 0.5))
    return g


@pytest.fixture
def client(tmp_path) -> TestClient:
    return TestClient(create_app(data_dir=tmp_path / "data"))


@pytest.fixture
def seeded(client) -> tuple[TestClient, str]:
    """Client plus the id of a graph created from the demo document."""
    doc = formats.to_document(demo_graph())
    body = client.post("/graphs", json={"document": doc}).json()
    return client, body["id"]


def wait_for_run(client: TestClient, run_id: str, timeout: float = 10.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        body = client.get(f"/runs/{run_id}").json()
        if body.get("status") != "running":
            return body
        time.sleep(0.01)
    raise AssertionError(f"run {run_id} still running after {timeout}s")


# -- graph lifecycle ------------------------------------------------------------


def test_create_empty_graph_starts_at_version_zero(client):
    body = client.post("/graphs").json()
    assert body["id"] == "g0"
    assert body["version"] == 0
    assert body["document"]["variables"] == []


def test_create_with_document_records_a_create_event(seeded):
    client, gid = seeded
    body = client.get(f"/graphs/{gid}").json()
    assert body["version"] == 1
    assert [v["name"] for v in body["document"]["variables"]] == ["x", "y"]
    log = client.get(f"/graphs/{gid}/log").json()
    assert [e["seq"] for e in log["events"]] == [1]
    assert log["events"][0]["action"] == "create_graph"


def test_create_with_invalid_document_leaves_no_orphan(client):
    resp = client.post("/graphs", json={"document": {"format_version": "99"}})
    assert resp.status_code == 400
    assert client.get("/graphs").json()["graphs"] == []
    assert client.post("/graphs").json()["id"] == "g0"


def test_list_graphs_summarizes_each_session(seeded):
    client, gid = seeded
    client.post("/graphs")
    body = client.get("/graphs").json()
    assert [g["id"] for g in body["graphs"]] == [gid, "g1"]
    first = body["graphs"][0]
    assert first["variables"] == 2
    assert first["edges"] == 1


def test_get_unknown_graph_is_404(client):
    resp = client.get("/graphs/g99")
    assert resp.status_code == 404
    assert "g99" in resp.json()["error"]


# -- optimistic concurrency ------------------------------------------------------


def test_patch_applies_event_and_bumps_version(seeded):
    client, gid = seeded
    resp = client.patch(
        f"/graphs/{gid}",
        json={
            "base_version": 1,
            "event": {
                "action": "add_variable",
                "payload": {"spec": {"name": "z", "kind": "binary"}},
            },
        },
    )
    body = resp.json()
    assert resp.status_code == 200
    assert body["version"] == 2
    assert [v["name"] for v in body["document"]["variables"]] == ["x", "y", "z"]


def test_patch_with_stale_base_version_is_409(seeded):
    client, gid = seeded
    event = {"action": "remove_edge", "payload": {"source": 0, "target": 1, "lag": 1}}
    resp = client.patch(f"/graphs/{gid}", json={"base_version": 0, "event": event})
    assert resp.status_code == 409
    assert resp.json()["current_version"] == 1
    # the graph was not touched
    assert client.get(f"/graphs/{gid}").json()["version"] == 1


def test_patch_requires_base_version_and_event(seeded):
    client, gid = seeded
    assert client.patch(f"/graphs/{gid}", json={"event": {}}).status_code == 400
    assert client.patch(f"/graphs/{gid}", json={"base_version": 1}).status_code == 400


def test_patch_with_invalid_edit_leaves_version_unchanged(seeded):
    client, gid = seeded
    resp = client.patch(
        f"/graphs/{gid}",
        json={
            "base_version": 1,
            "event": {"action": "add_edge", "payload": {"source": 0, "target": 0, "lag": 0}},
        },
    )
    assert resp.status_code == 400
    assert client.get(f"/graphs/{gid}").json()["version"] == 1


def test_patch_unknown_graph_is_404(client):
    resp = client.patch("/graphs/g7", json={"base_version": 0, "event": {"action": "x"}})
    assert resp.status_code == 404


def test_log_since_filters_and_replay_rebuilds_the_document(seeded):
    client, gid = seeded
    for name in ("a", "b"):
        base = client.get(f"/graphs/{gid}").json()["version"]
        client.patch(
            f"/graphs/{gid}",
            json={
                "base_version": base,
                "event": {
                    "action": "add_variable",
                    "payload": {"spec": {"name": name, "kind": "continuous"}},
                },
            },
        )
    log = client.get(f"/graphs/{gid}/log", params={"since": 1}).json()
    assert [e["seq"] for e in log["events"]] == [2, 3]

    full = client.get(f"/graphs/{gid}/log").json()
    events = [formats.obj_to_event(obj) for obj in full["events"]]
    rebuilt = formats.replay(events)
    assert formats.to_document(rebuilt) == client.get(f"/graphs/{gid}").json()["document"]


# -- suggestions -----------------------------------------------------------------


EDGES_PAYLOAD = {
    "edges": [
        {"source": "x", "target": "y", "lag": 2, "score": 0.9},
        {"source": "y", "target": "x", "lag": 1, "score": 0.4},
        {"source": "x", "target": "ghost", "lag": 1, "score": 0.2},
    ]
}


def test_import_suggestions_rekeys_ids_under_the_set(seeded):
    client, gid = seeded
    body = client.post(
        f"/graphs/{gid}/suggestions",
        json={"payload": EDGES_PAYLOAD, "format": "edge-list", "algorithm": "pcmci"},
    ).json()
    assert body["set_id"] == f"{gid}-s0"
    assert body["algorithm"] == "pcmci"
    assert [s["id"] for s in body["suggestions"]] == [
        f"{gid}-s0.0",
        f"{gid}-s0.1",
        f"{gid}-s0.2",
    ]
    assert all(s["status"] == "pending" for s in body["suggestions"])
    listed = client.get(f"/graphs/{gid}/suggestions").json()
    assert set(listed["sets"]) == {f"{gid}-s0"}


def test_import_suggestions_requires_an_algorithm(seeded):
    client, gid = seeded
    resp = client.post(f"/graphs/{gid}/suggestions", json={"payload": EDGES_PAYLOAD})
    assert resp.status_code == 400
    assert "algorithm" in resp.json()["error"]


def test_accept_adds_the_edge_with_algorithm_provenance(seeded):
    client, gid = seeded
    sid = client.post(
        f"/graphs/{gid}/suggestions",
        json={"payload": EDGES_PAYLOAD, "algorithm": "pcmci"},
    ).json()["suggestions"][0]["id"]
    body = client.post(f"/graphs/{gid}/suggestions/{sid}/accept").json()
    assert body["suggestion"]["status"] == "accepted"
    assert body["version"] == 2
    edges = body["document"]["edges"]
    added = [e for e in edges if e["lag"] == 2]
    assert len(added) == 1
    assert added[0]["provenance"] == {"kind": "algorithm", "name": "pcmci"}
    # terminal states are final
    again = client.post(f"/graphs/{gid}/suggestions/{sid}/accept")
    assert again.status_code == 400


def test_reject_is_terminal_and_leaves_the_graph_alone(seeded):
    client, gid = seeded
    sid = client.post(
        f"/graphs/{gid}/suggestions",
        json={"payload": EDGES_PAYLOAD, "algorithm": "pcmci"},
    ).json()["suggestions"][1]["id"]
    body = client.post(f"/graphs/{gid}/suggestions/{sid}/reject").json()
    assert body["suggestion"]["status"] == "rejected"
    assert client.get(f"/graphs/{gid}").json()["version"] == 1
    assert client.post(f"/graphs/{gid}/suggestions/{sid}/accept").status_code == 400


def test_accept_with_unknown_variable_is_400_and_stays_pending(seeded):
    client, gid = seeded
    sid = client.post(
        f"/graphs/{gid}/suggestions",
        json={"payload": EDGES_PAYLOAD, "algorithm": "pcmci"},
    ).json()["suggestions"][2]["id"]  # targets "ghost"
    resp = client.post(f"/graphs/{gid}/suggestions/{sid}/accept")
    assert resp.status_code == 400
    assert client.get(f"/graphs/{gid}").json()["version"] == 1
    listed = client.get(f"/graphs/{gid}/suggestions").json()["sets"][f"{gid}-s0"]
    assert listed["suggestions"][2]["status"] == "pending"


def test_unknown_suggestion_is_404(seeded):
    client, gid = seeded
    resp = client.post(f"/graphs/{gid}/suggestions/{gid}-s0.9/accept")
    assert resp.status_code == 404


# -- simulation runs -------------------------------------------------------------


def test_simulate_polls_to_done_with_typed_columns(seeded):
    client, gid = seeded
    resp = client.post(f"/graphs/{gid}/simulate", json={"length": 30, "seed": 7})
    assert resp.status_code == 202
    body = resp.json()
    assert body["cached"] is False
    done = wait_for_run(client, body["run_id"])
    assert done["status"] == "done"
    series = done["series"]
    assert series["meta"]["length"] == 30
    assert series["meta"]["run"]["seed"] == 7
    assert set(series["columns"]) == {"x", "y"}
    assert len(series["columns"]["x"]) == 30
    assert all(isinstance(v, float) for v in series["columns"]["x"])


def test_identical_payload_at_same_version_hits_the_cache(seeded):
    client, gid = seeded
    first = client.post(f"/graphs/{gid}/simulate", json={"length": 20, "seed": 1}).json()
    second = client.post(f"/graphs/{gid}/simulate", json={"length": 20, "seed": 1}).json()
    assert second == {"run_id": first["run_id"], "cached": True}


def test_equal_configs_with_different_payload_bytes_agree(seeded):
    """Cold runs are pure in (version, config): spelling defaults out changes nothing."""
    client, gid = seeded
    a = client.post(f"/graphs/{gid}/simulate", json={"length": 25, "seed": 3}).json()
    b = client.post(
        f"/graphs/{gid}/simulate",
        json={"length": 25, "seed": 3, "record_latent": False},
    ).json()
    assert b["cached"] is False
    assert b["run_id"] != a["run_id"]
    wait_for_run(client, a["run_id"])
    wait_for_run(client, b["run_id"])
    headers = {"accept": "text/csv"}
    csv_a = client.get(f"/runs/{a['run_id']}", headers=headers).content
    csv_b = client.get(f"/runs/{b['run_id']}", headers=headers).content
    assert csv_a == csv_b


def test_editing_the_graph_invalidates_the_run_cache(seeded):
    client, gid = seeded
    first = client.post(f"/graphs/{gid}/simulate", json={"length": 10, "seed": 0}).json()
    client.patch(
        f"/graphs/{gid}",
        json={
            "base_version": 1,
            "event": {"action": "set_noise", "payload": {"id": 0, "noise": {"kind": "none"}}},
        },
    )
    second = client.post(f"/graphs/{gid}/simulate", json={"length": 10, "seed": 0}).json()
    assert second["cached"] is False
    assert second["run_id"] != first["run_id"]


def test_run_csv_negotiation_matches_the_json_columns(seeded):
    client, gid = seeded
    run_id = client.post(f"/graphs/{gid}/simulate", json={"length": 12, "seed": 2}).json()[
        "run_id"
    ]
    done = wait_for_run(client, run_id)
    resp = client.get(f"/runs/{run_id}", headers={"accept": "text/csv"})
    assert resp.headers["content-type"].startswith("text/csv")
    lines = resp.text.strip().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 13
    first_x = float(lines[1].split(",")[0])
    assert first_x == done["series"]["columns"]["x"][0]


def test_simulate_with_interventions_round_trips_them(seeded):
    client, gid = seeded
    payload = {
        "length": 15,
        "seed": 4,
        "interventions": [
            {"kind": "do_clamp", "variable": "x", "value": 2.5, "t_start": 3, "t_end": 6}
        ],
    }
    run_id = client.post(f"/graphs/{gid}/simulate", json=payload).json()["run_id"]
    done = wait_for_run(client, run_id)
    assert done["series"]["columns"]["x"][3:7] == [2.5] * 4
    assert done["series"]["meta"]["run"]["interventions"][0]["variable"] == "x"


def test_failing_run_reports_failed_status(seeded):
    client, gid = seeded
    payload = {
        "length": 10,
        "interventions": [
            {"kind": "do_clamp", "variable": "nope", "value": 0.0, "t_start": 0, "t_end": 1}
        ],
    }
    run_id = client.post(f"/graphs/{gid}/simulate", json=payload).json()["run_id"]
    done = wait_for_run(client, run_id)
    assert done["status"] == "failed"
    assert "nope" in done["error"]


def test_simulate_rejects_bad_lengths(seeded):
    client, gid = seeded
    assert client.post(f"/graphs/{gid}/simulate", json={"length": "30"}).status_code == 400
    assert client.post(f"/graphs/{gid}/simulate", json={"length": True}).status_code == 400
    assert client.post(f"/graphs/{gid}/simulate", json={"seed": 1}).status_code == 400


def test_simulate_above_the_server_limit_is_422(tmp_path):
    client = TestClient(create_app(data_dir=tmp_path / "data", max_length=16))
    gid = client.post("/graphs", json={"document": formats.to_document(demo_graph())}).json()[
        "id"
    ]
    resp = client.post(f"/graphs/{gid}/simulate", json={"length": 17})
    assert resp.status_code == 422
    assert "limit" in resp.json()["error"]
    assert client.post(f"/graphs/{gid}/simulate", json={"length": 16}).status_code == 202


def test_unknown_run_is_404(client):
    assert client.get("/runs/r000").status_code == 404


# -- evaluation -------------------------------------------------------------------


def test_evaluate_by_graph_id_against_itself_is_perfect(seeded):
    client, gid = seeded
    doc = client.get(f"/graphs/{gid}").json()["document"]
    body = client.post(
        "/evaluate",
        json={"truth_graph_id": gid, "estimate_document": doc, "lag_window": 1},
    ).json()
    assert body["windowed"]["f1"] == 1.0
    assert body["windowed"]["lag_window"] == 1
    assert body["sid"]["lagged"] == 0


def test_evaluate_by_document_counts_misses(seeded):
    client, _ = seeded
    truth = formats.to_document(demo_graph())
    empty = formats.to_document(
        DscpGraph.empty()
        .add_variable(VariableSpec.continuous("x", min=-1e6, max=1e6))
        .add_variable(VariableSpec.continuous("y", min=-1e6, max=1e6))
    )
    body = client.post(
        "/evaluate", json={"truth_document": truth, "estimate_document": empty}
    ).json()
    assert body["windowed"]["fn"] == 1
    assert body["windowed"]["tp"] == 0


def test_evaluate_validates_its_inputs(seeded):
    client, gid = seeded
    doc = client.get(f"/graphs/{gid}").json()["document"]
    assert client.post("/evaluate", json={"estimate_document": doc}).status_code == 400
    assert client.post("/evaluate", json={"truth_graph_id": gid}).status_code == 400
    assert (
        client.post(
            "/evaluate",
            json={"truth_graph_id": "g9", "estimate_document": doc},
        ).status_code
        == 404
    )
    resp = client.post(
        "/evaluate",
        json={"truth_graph_id": gid, "estimate_document": doc, "lag_window": -1},
    )
    assert resp.status_code == 400


# -- persistence ------------------------------------------------------------------


def test_store_replays_logs_and_recovers_the_id_counter(tmp_path):
    data_dir = tmp_path / "data"
    first = TestClient(create_app(data_dir=data_dir))
    doc = formats.to_document(demo_graph())
    gid = first.post("/graphs", json={"document": doc}).json()["id"]
    first.patch(
        f"/graphs/{gid}",
        json={
            "base_version": 1,
            "event": {
                "action": "add_variable",
                "payload": {"spec": {"name": "z", "kind": "binary"}},
            },
        },
    )
    before = first.get(f"/graphs/{gid}").json()

    second = TestClient(create_app(data_dir=data_dir))
    after = second.get(f"/graphs/{gid}").json()
    assert after == before
    assert second.post("/graphs").json()["id"] == "g1"


def test_store_writes_log_and_snapshot_files(tmp_path):
    data_dir = tmp_path / "data"
    client = TestClient(create_app(data_dir=data_dir))
    gid = client.post("/graphs", json={"document": formats.to_document(demo_graph())}).json()[
        "id"
    ]
    assert (data_dir / f"{gid}.editlog.jsonl").exists()
    snapshot = formats.load_graph(data_dir / f"{gid}.dscp.json")
    assert [v.name for v in snapshot.variables] == ["x", "y"]


def test_store_honors_the_data_dir_environment_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("KARMATS_DATA_DIR", str(tmp_path / "env-data"))
    store = GraphStore()
    assert store.data_dir == tmp_path / "env-data"
    assert store.data_dir.is_dir()
