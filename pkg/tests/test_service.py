"""HTTP API: routes, payload validation, and error mapping."""

import pytest
from fastapi.testclient import TestClient

from vqinit import __version__
from vqinit.service import app

client = TestClient(app)

HEIS_CONFIG = {"problem": {"kind": "heisenberg", "num_qubits": 2, "blocks": 2},
               "iterations": 2, "seeds": [0]}


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


# --- /run --------------------------------------------------------------------------

def test_run_returns_summary():
    resp = client.post("/run", json={"config": HEIS_CONFIG})
    assert resp.status_code == 200
    body = resp.json()
    assert set(body) == {"summary"}
    summary = body["summary"]
    assert summary["problem"]["num_params"] == 8
    assert len(summary["per_seed"]) == 1
    assert len(summary["per_seed"][0]["params_digest"]) == 64


def test_run_writes_requested_output(tmp_path):
    cfg = dict(HEIS_CONFIG, output_dir=str(tmp_path))
    resp = client.post("/run", json={"config": cfg})
    assert resp.status_code == 200
    assert resp.json()["summary"]["output_dir"] == str(tmp_path)
    assert (tmp_path / "trace_seed0.csv").is_file()


def test_run_rejects_unknown_problem_kind():
    bad = dict(HEIS_CONFIG, problem={"kind": "ising", "num_qubits": 2})
    assert client.post("/run", json={"config": bad}).status_code == 422


def test_run_rejects_extra_fields():
    assert client.post(
        "/run", json={"config": HEIS_CONFIG, "verbose": True}).status_code == 422
    cfg = dict(HEIS_CONFIG, out_dir="/tmp/x")
    assert client.post("/run", json={"config": cfg}).status_code == 422


def test_run_missing_hamiltonian_file_is_400():
    cfg = {"problem": {"kind": "chemistry", "num_electrons": 2,
                       "hamiltonian": "/nonexistent/h.txt"},
           "iterations": 1, "seeds": [0]}
    resp = client.post("/run", json={"config": cfg})
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert err["type"] == "FileNotFoundError"


# --- /sweep ------------------------------------------------------------------------

def test_sweep_route():
    resp = client.post("/sweep", json={
        "config": HEIS_CONFIG, "axis": "variance_multiplier",
        "values": [0.5, 1.0]})
    assert resp.status_code == 200
    sweep = resp.json()["sweep"]
    assert sweep["axis"] == "variance_multiplier"
    assert [p["value"] for p in sweep["points"]] == [0.5, 1.0]


def test_sweep_rejects_unknown_axis():
    resp = client.post("/sweep", json={
        "config": HEIS_CONFIG, "axis": "learning_rate", "values": [0.1]})
    assert resp.status_code == 422


# --- /verify-bound -----------------------------------------------------------------

def test_verify_bound_grad_norm():
    resp = client.post("/verify-bound", json={
        "check": "4.1", "qubits": 4, "locality": 1, "layers": 2,
        "samples": 300, "seed": 0})
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["check"] == "grad-norm-lower-bound"
    assert report["lower_bound"] == pytest.approx(1 / 8)
    assert report["passed"] is True


def test_verify_bound_component():
    resp = client.post("/verify-bound", json={
        "check": "4.2", "samples": 300, "epsilon": 0.5, "index": 1})
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["check"] == "shared-parameter-component-bound"
    assert report["index"] == 1
    assert report["passed"] is True


def test_verify_bound_single_gate_forms():
    for check, name in (("lemma-b1", "single-gate-loss-second-moment"),
                        ("lemma-b2", "single-gate-grad-second-moment")):
        resp = client.post("/verify-bound", json={
            "check": check, "configs": 2, "samples": 2000})
        assert resp.status_code == 200
        report = resp.json()["report"]
        assert report["check"] == name
        assert report["num_configs"] == 2
        assert report["passed"] is True


def test_verify_bound_validation():
    assert client.post("/verify-bound",
                       json={"check": "5.1"}).status_code == 422
    assert client.post("/verify-bound",
                       json={"check": "4.2", "epsilon": 1.5}).status_code == 422
    assert client.post("/verify-bound",
                       json={"check": "4.1", "qubits": 40}).status_code == 422


# --- /grad-check -------------------------------------------------------------------

def test_grad_check_route():
    resp = client.post("/grad-check", json={"circuits": 3, "seed": 2})
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["num_circuits"] == 3
    assert report["passed"] is True
    assert report["max_abs_diff"] <= 1e-6


def test_grad_check_rejects_bad_counts():
    assert client.post("/grad-check",
                       json={"circuits": 0}).status_code == 422


# --- /ground-energy ----------------------------------------------------------------

def test_ground_energy_route():
    text = "# two-site exchange\n1.0 XX\n1.0 YY\n1.0 ZZ\n"
    resp = client.post("/ground-energy", json={"hamiltonian_text": text})
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["num_qubits"] == 2
    assert report["num_terms"] == 3
    assert report["ground_energy"] == pytest.approx(-3.0, abs=1e-12)


def test_ground_energy_bad_line_is_400():
    resp = client.post("/ground-energy", json={"hamiltonian_text": "1.0 QX\n"})
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert err["type"] == "HamiltonianFormatError"
    assert "line 1" in err["message"]


def test_ground_energy_empty_text_is_400():
    resp = client.post("/ground-energy", json={"hamiltonian_text": "# none\n"})
    assert resp.status_code == 400
    assert resp.json()["error"]["type"] == "HamiltonianFormatError"
