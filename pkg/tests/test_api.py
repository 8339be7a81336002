import pytest
from fastapi.testclient import TestClient

from app.main import app
from tests.conftest import read_fixture


@pytest.fixture
def client():
    return TestClient(app)


def test_ping(client):
    response = client.get("/ping")
    assert response.status_code == 200
    assert response.json() == {"message": "pong"}


def test_root(client):
    body = client.get("/").json()
    assert body["success"] is True


def test_check_courier(client):
    response = client.post("/check", json={"source": read_fixture("courier.pi")})
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["data"]["leftover"] == "[]"
    assert body["data"]["derivation"].startswith("res new[x]")


def test_reduce_to_end(client):
    response = client.post("/reduce", json={"source": read_fixture("courier.pi"), "to_end": True})
    assert response.status_code == 200
    data = response.json()["data"]
    assert len(data["trace"]) == 4
    assert data["normal_form"] == "end"


def test_reduce_rejects_negative_steps(client):
    response = client.post("/reduce", json={"source": "end", "steps": -1})
    assert response.status_code == 422
    assert response.json()["message"] == "Validation error"


def test_roundtrip(client):
    response = client.post("/roundtrip", json={"source": read_fixture("naming.pi")})
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["names"] == ["z^0"]
    assert data["source"].startswith("free z^0 : unit @ lin (0,0);\n")


def test_algebras(client):
    response = client.get("/algebras/")
    assert response.status_code == 200
    data = response.json()["data"]
    assert [a["idx"] for a in data] == ["lin", "gra", "sha"]
    assert data[2] == {"idx": "sha", "zero": "w", "one": "w", "finite": True}
    assert data[1]["finite"] is False


def test_parse_error_is_bad_request(client):
    response = client.post("/check", json={"source": "new . end"})
    assert response.status_code == 400
    body = response.json()
    assert body["success"] is False
    assert body["message"] == "Parse error"
    assert (body["data"]["line"], body["data"]["column"]) == (1, 5)


def test_scope_error_is_unprocessable(client):
    response = client.post("/check", json={"source": "x!y. end"})
    assert response.status_code == 422
    assert response.json()["data"]["error"] == "ScopeError"


def test_type_error_reports_path(client):
    source = "free c : chan<unit>[lin (0,0)] @ lin (0,1); free u : unit @ lin (0,0); end | c!u. c!u. end"
    response = client.post("/check", json={"source": source})
    assert response.status_code == 422
    data = response.json()["data"]
    assert data["error"] == "SplitUndefined"
    assert data["path"] == ["ParRight", "SendBody"]


def test_missing_source_is_a_validation_error(client):
    response = client.post("/check", json={})
    assert response.status_code == 422
    assert response.json()["success"] is False
