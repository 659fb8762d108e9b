"""HTTP service endpoints via the in-process test client."""

import threading
import time

import pytest
from fastapi.testclient import TestClient

from relquery.server import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(default_seed=11))


@pytest.fixture(scope="module")
def gapminder(client):
    body = {"dataset": "gapminder_extract", "name": "population",
            "key": "country", "models": 8, "analyze_iterations": 30}
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()


HYPOTHETICAL_QUERY = (
    'SELECT "country", "oil", "hdi" FROM population '
    "WHERE \"government\" IS NOT 'monarchy' "
    "ORDER BY RELEVANCE PROBABILITY TO HYPOTHETICAL ROW WITH VALUES "
    '(("oil" = 27, "snow" = 0.2, "hdi" = 180)) IN THE CONTEXT OF "hdi" DESC'
)


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_create_session_reports_schema(gapminder):
    assert gapminder["rows"] == 20
    names = [c["name"] for c in gapminder["schema"]]
    assert names == ["country", "oil", "hdi", "snow", "government"]


def test_create_session_requires_one_source(client):
    resp = client.post("/sessions", json={})
    assert resp.status_code == 400
    assert "error" in resp.json()


def test_query_hypothetical_returns_ordered(client, gapminder):
    sid = gapminder["session_id"]
    resp = client.post(f"/sessions/{sid}/query", json={"text": HYPOTHETICAL_QUERY})
    assert resp.status_code == 200, resp.text
    payload = resp.json()
    assert payload["columns"] == ["country", "oil", "hdi"]
    assert payload["timing_ms"] > 0
    countries = [row[0] for row in payload["rows"]]
    assert "Swaziland" not in countries and "Qatar" not in countries
    # identical re-submission returns identical rows (seeded engine)
    again = client.post(f"/sessions/{sid}/query", json={"text": HYPOTHETICAL_QUERY}).json()
    assert again["rows"] == payload["rows"]


def test_query_probabilities_are_numbers(client, gapminder):
    sid = gapminder["session_id"]
    text = ('SELECT "country", RELEVANCE PROBABILITY TO EXISTING ROWS IN '
            "('USA') IN THE CONTEXT OF \"hdi\" AS \"r\" FROM population "
            'ORDER BY "r" DESC LIMIT 3')
    payload = client.post(f"/sessions/{sid}/query", json={"text": text}).json()
    assert payload["kinds"] == ["str", "prob"]
    for _, r in payload["rows"]:
        assert isinstance(r, float)


def test_query_parse_error_carries_position(client, gapminder):
    sid = gapminder["session_id"]
    resp = client.post(f"/sessions/{sid}/query", json={"text": 'SELECT "a" FRM x'})
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert err["line"] == 1 and err["column"] is not None


def test_unknown_session_404(client):
    resp = client.post("/sessions/deadbeef/query", json={"text": "SELECT 1 FROM x"})
    assert resp.status_code == 404


def test_schema_endpoint(client, gapminder):
    sid = gapminder["session_id"]
    resp = client.get(f"/sessions/{sid}/schema")
    assert resp.status_code == 200
    schema = resp.json()["schema"]["population"]
    kinds = {c["name"]: c["stat_type"] for c in schema}
    assert kinds["government"] == "categorical"
    assert kinds["snow"] == "numerical"


def test_heatmap_endpoint(client, gapminder):
    sid = gapminder["session_id"]
    resp = client.get(f"/sessions/{sid}/heatmap",
                      params={"measure": "relevance", "context": "hdi", "k": 3})
    assert resp.status_code == 200
    payload = resp.json()
    n = len(payload["labels"])
    assert n == 20
    assert len(payload["matrix"]) == n
    assert sorted(payload["ordering"]) == list(range(n))
    for i in range(n):
        assert payload["matrix"][i][i] == 1.0
    bad = client.get(f"/sessions/{sid}/heatmap",
                     params={"measure": "nope", "context": "hdi"})
    assert bad.status_code == 400


def test_csv_text_upload(client):
    body = {"csv_text": "a,b\n1,x\n0,y\n1,x\n", "name": "tiny", "models": 2}
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200
    sid = resp.json()["session_id"]
    rows = client.post(f"/sessions/{sid}/query",
                       json={"text": 'SELECT "a", "b" FROM tiny'}).json()["rows"]
    assert rows == [["1", "x"], ["0", "y"], ["1", "x"]]


def test_async_analyze_and_conflict(client):
    body = {"dataset": "cars_1987", "name": "cars", "models": 4}
    sid = client.post("/sessions", json=body).json()["session_id"]
    resp = client.post(f"/sessions/{sid}/analyze", json={"iterations": 40})
    assert resp.status_code == 202
    # starting a second analyze while the first holds the ensemble conflicts
    conflict = client.post(f"/sessions/{sid}/analyze", json={"iterations": 1})
    assert conflict.status_code in (202, 409)
    # a query queues behind the analyze and still succeeds
    out = client.post(f"/sessions/{sid}/query",
                      json={"text": 'SELECT "make" FROM cars LIMIT 1'})
    assert out.status_code == 200
    deadline = time.time() + 60
    while time.time() < deadline:
        status = client.get(f"/sessions/{sid}/analyze/status").json()
        if not status["running"]:
            break
        time.sleep(0.05)
    assert not status["running"]
    assert status["error"] is None
    assert status["total_iterations"] in (40, 41)


def test_concurrent_queries_match_serial(client, gapminder):
    sid = gapminder["session_id"]
    texts = [
        ('SELECT "country", RELEVANCE PROBABILITY TO EXISTING ROWS IN '
         "('USA') IN THE CONTEXT OF \"hdi\" AS \"r\" FROM population ORDER BY \"r\" DESC"),
        ('SELECT "country", RELEVANCE PROBABILITY TO EXISTING ROWS IN '
         "('Norway') IN THE CONTEXT OF \"oil\" AS \"r\" FROM population ORDER BY \"r\" DESC"),
    ]
    serial = [client.post(f"/sessions/{sid}/query", json={"text": t}).json()["rows"]
              for t in texts]
    results = {}

    def worker(i):
        results[i] = client.post(f"/sessions/{sid}/query",
                                 json={"text": texts[i]}).json()["rows"]

    threads = [threading.Thread(target=worker, args=(i,)) for i in (0, 1)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results[0] == serial[0]
    assert results[1] == serial[1]
