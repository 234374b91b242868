import json
import threading
import time
import urllib.request

import pytest

import coaplan


def scenario(data_dir, name):
    return coaplan.Scenario.load(data_dir / "scenarios" / f"{name}.yaml")


def test_brigade_plan_has_a_hundred_leaves(data_dir, kb):
    p = coaplan.plan(scenario(data_dir, "brigade"), kb)
    assert p.leaf_count >= 100
    assert len(p.digest) == 64
    assert p.to_dict()["plan_digest"] == p.digest


def test_export_round_trips(data_dir, kb):
    p = coaplan.plan(scenario(data_dir, "seize"), kb)
    text = p.export()
    assert coaplan.import_plan(text).export() == text
    assert json.loads(text)["kind"] == p.to_dict()["kind"]


def test_matrix_csv_matches_golden(data_dir, kb):
    p = coaplan.plan(scenario(data_dir, "seize"), kb)
    golden = (data_dir.parent / "tests" / "golden" / "seize-matrix-60.csv").read_text()
    assert p.export("matrix_csv", 60) == golden
    m = p.matrix(30)
    assert m["columns"][0]["label"] == coaplan.period_label(0) == "H+0:00"


def test_accept_flag_edit(data_dir, kb):
    s = scenario(data_dir, "brigade")
    base = coaplan.plan(s, kb)
    flags = base.flags
    assert flags
    after = coaplan.replan(base, s, kb, [{"kind": "accept_flag", "target": flags[0]["id"]}])
    assert sum(f["accepted"] for f in after.flags) == 1
    assert sum(f["accepted"] for f in base.flags) == 0


def test_wargame_and_utilization(data_dir, kb):
    s = scenario(data_dir, "wargame")
    p = coaplan.wargame(s, kb)
    assert p.wargame
    rows = coaplan.utilization(p, s)
    assert [r["unit"] for r in rows] == sorted(r["unit"] for r in rows)
    assert all(0.0 <= r["fraction"] <= 1.0 for r in rows)


def test_config_changes_the_plan(data_dir, kb):
    s = scenario(data_dir, "brigade")
    steep = coaplan.PlanConfig.load(data_dir / "config" / "steep.yaml")
    assert steep.to_dict() != coaplan.PlanConfig().to_dict()
    shallow = coaplan.PlanConfig.from_dict({**coaplan.PlanConfig().to_dict(), "max_expansion_depth": 1})
    with pytest.raises(coaplan.PlanningError):
        coaplan.plan(s, kb, shallow)


def test_errors_map_to_python_exceptions(data_dir, kb):
    with pytest.raises(coaplan.ParseError):
        coaplan.Scenario.parse("{not yaml: [")
    assert issubclass(coaplan.ValidationError, coaplan.Error)
    text = (data_dir / "scenarios" / "minimal.yaml").read_text().replace("tactical-move", "teleport")
    bad = coaplan.Scenario.parse(text)
    codes = [d["code"] for d in coaplan.validate_scenario(bad, kb)]
    assert "unknown-task-type" in codes
    with pytest.raises(coaplan.ValidationError) as info:
        coaplan.plan(bad, kb)
    assert info.value.diagnostics[0]["code"] == "unknown-task-type"
    seize = scenario(data_dir, "seize")
    with pytest.raises(coaplan.EditError):
        coaplan.replan(coaplan.plan(seize, kb), seize, kb, [{"kind": "delete_activity", "target": "ghost"}])


def test_kb_lint_is_clean(kb):
    assert [d for d in coaplan.lint_kb(kb) if d["severity"] == "error"] == []
    assert "tactical-move" in kb.task_types


def test_service_in_process(data_dir):
    svc = coaplan.Service()
    status, _, body = svc.handle("POST", "/scenarios", body=(data_dir / "scenarios" / "seize.yaml").read_text())
    assert status == 201
    sid = json.loads(body)["id"]
    status, _, body = svc.handle("POST", "/kbs", body=(data_dir / "kb" / "base.yaml").read_text())
    kid = json.loads(body)["id"]
    status, _, body = svc.handle("POST", "/jobs", body=json.dumps({"scenario": sid, "kbs": [kid]}))
    assert status == 202
    job = svc.wait(json.loads(body)["job"])
    assert job["state"] == "done"
    status, ctype, csv = svc.handle("GET", f"/plans/{job['plan']}/matrix", {"period": "60"})
    assert (status, ctype) == (200, "text/csv")
    assert svc.handle("GET", "/plans/plan-999999")[0] == 404


def test_service_over_http(data_dir):
    svc = coaplan.Service()
    server = threading.Thread(target=svc.serve, args=("127.0.0.1", 0), daemon=True)
    server.start()
    for _ in range(500):
        if svc.bound_port > 0:
            break
        time.sleep(0.01)
    assert svc.bound_port > 0
    base = f"http://127.0.0.1:{svc.bound_port}"
    req = urllib.request.Request(base + "/scenarios", data=(data_dir / "scenarios" / "seize.yaml").read_bytes(),
                                 method="POST")
    with urllib.request.urlopen(req) as r:
        assert r.status == 201
        assert json.load(r)["id"]
    svc.stop()
    server.join(timeout=5)
    assert not server.is_alive()
