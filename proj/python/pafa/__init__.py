"""Plug&Fly avionics platform: planning, qualification and simulation."""

import json
from pathlib import Path

from . import _pafa
from ._pafa import PafaError

__all__ = ["PafaError", "validate", "digest", "query", "plan", "qualify", "run", "report"]


def _text(scenario):
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    if isinstance(scenario, Path):
        return scenario.read_text()
    return scenario


def validate(scenario):
    """Semantic violations as (kind, element, detail) tuples."""
    return _pafa.validate(_text(scenario))


def digest(scenario):
    return _pafa.canonical_digest(_text(scenario))


def query(scenario, text):
    return _pafa.query(_text(scenario), text)


def plan(scenario):
    out = _pafa.plan(_text(scenario))
    if out["config"] is not None:
        out["config"] = json.loads(out["config"])
    return out


def qualify(scenario, config):
    if isinstance(config, dict):
        config = json.dumps(config)
    out = _pafa.qualify(_text(scenario), config)
    out["artifact"] = json.loads(out["artifact"])
    return out


def run(scenario, cycles, seed=0):
    """Returns (log digest, log text)."""
    return _pafa.run(_text(scenario), cycles, seed)


def report(log, scenario):
    return json.loads(_pafa.report(log, _text(scenario)))
