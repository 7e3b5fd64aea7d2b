from fastapi.testclient import TestClient

from conglab.service import app

from conftest import FIVESET, HAUSDORFF, R2_SWAP

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_classify_endpoint():
    response = client.post("/classify", json={"source": FIVESET, "pairs": True})
    assert response.status_code == 200
    payload = response.json()
    assert payload["weak"]["ok"] and payload["consistent"]["ok"]
    assert payload["decreasing_pairs"] == [[[1, 3, 4], [1, 2]], [[3, 4, 5], [2, 5]]]


def test_classify_hausdorff_not_weak():
    payload = client.post("/classify", json={"source": HAUSDORFF}).json()
    assert not payload["weak"]["ok"]
    assert payload["weak"]["witness"]["mask"] == [1]


def test_bad_dsl_is_400():
    response = client.post("/classify", json={"source": "sets 2\ncong {1 2} ~ {1}"})
    assert response.status_code == 400
    assert "full set" in response.json()["detail"]


def test_reduce_endpoint():
    payload = client.post("/reduce", json={"source": HAUSDORFF}).json()
    assert payload["empty"] and payload["deleted"] == [1, 2, 3]


def test_transform_endpoint():
    payload = client.post("/transform", json={"source": HAUSDORFF}).json()
    assert payload["m_bar"] == 2 and payload["m"] == 3


def test_generate_endpoint():
    payload = client.post("/generate", json={"n": 4}).json()
    assert payload["r"] == 12 and payload["m"] == 6
    response = client.post("/generate", json={"n": 9})
    assert response.status_code == 422  # pydantic bound


def test_graph_endpoint():
    payload = client.post("/graph", json={"source": FIVESET}).json()
    assert payload["claim1"]["ok"] and payload["claim2"]["ok"] and payload["claim3"]["ok"]


def test_partition_endpoint():
    payload = client.post("/partition", json={
        "source": FIVESET, "w": "s1^2", "verify_depth": 3,
    }).json()
    assert payload["verified"]["ok"]
    assert payload["anchor_piece"] == payload["identity_piece"]


def test_certify_endpoint():
    payload = client.post("/certify", json={"m": 2, "mbar": 1, "depth": 4}).json()
    assert payload["certified"]


def test_simulate_endpoint():
    payload = client.post("/simulate", json={
        "source": R2_SWAP, "variant": "s4", "steps": 2, "include_snapshot": True,
    }).json()
    assert payload["ok"] and payload["stages"] == 2
    assert payload["snapshot"]["schema"] == "conglab-stage-state/1"


def test_simulate_rejects_inconsistent():
    response = client.post("/simulate", json={"source": HAUSDORFF, "steps": 1})
    assert response.status_code == 400
