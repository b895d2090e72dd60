import json
import math
import os
from pathlib import Path

import pytest

import pafa

SCENARIOS = Path(os.environ.get("PAFA_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def scenario(name):
    return (SCENARIOS / f"{name}.json").read_text()


def test_validate_shipped():
    for path in sorted(SCENARIOS.glob("*.json")):
        assert pafa.validate(path) == []


def test_validate_reports_period():
    doc = json.loads(scenario("minimal"))
    doc["functions"][0]["period"] = 1500
    kinds = [kind for kind, _, _ in pafa.validate(doc)]
    assert "PeriodViolation" in kinds


def test_errors_are_raised_as_pafa_error():
    with pytest.raises(pafa.PafaError, match="ParseError"):
        pafa.validate("{not json")


def test_digest_ignores_key_order():
    doc = json.loads(scenario("fig3"))
    shuffled = json.dumps(doc, sort_keys=True)
    assert pafa.digest(doc) == pafa.digest(shuffled)


def test_query():
    names = pafa.query(scenario("duplex"), "/Device/name")
    assert names == ["M1", "M2", "M3"]


def test_plan_and_qualify_duplex():
    out = pafa.plan(scenario("duplex"))
    assert out["outcome"] == "Candidate"
    assert out["config"]["replicas"]["Pitch"] == 2
    q = pafa.qualify(scenario("duplex"), out["config"])
    assert q["verdict"] == "Accept"
    p = -math.expm1(-1e-5)
    pitch = next(t for t in q["artifact"]["fault_trees"] if t["function"] == "Pitch")
    assert pitch["probability"] == pytest.approx(p * p, rel=1e-12)


def test_shared_switch_rejected():
    out = pafa.plan(scenario("shared_switch"))
    q = pafa.qualify(scenario("shared_switch"), out["config"])
    assert q["verdict"] == "Reject"
    assert any(element == "S" for _, element, _ in q["findings"])


def test_run_is_reproducible_and_reportable():
    d1, log1 = pafa.run(scenario("duplex"), 120, seed=7)
    d2, log2 = pafa.run(scenario("duplex"), 120, seed=7)
    assert d1 == d2 and log1 == log2
    assert "k=SWITCH" in log1
    rep = pafa.report(log1, scenario("duplex"))
    assert rep == pafa.report(log2, scenario("duplex"))
