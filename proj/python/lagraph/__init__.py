"""Logical attack graphs with alert-driven enrichment."""

import json

from ._core import (
    API_FORMAT_VERSION,
    Error,
    GoalNotDerivableError,
    ParseError,
    SchemaError,
    fixpoint,
    generate,
    post_conditions,
    replay,
)
from ._core import Engine as _Engine
from ._core import build_graph_json as _build_graph_json

__all__ = [
    "API_FORMAT_VERSION",
    "Engine",
    "Error",
    "GoalNotDerivableError",
    "ParseError",
    "SchemaError",
    "build_graph",
    "fixpoint",
    "generate",
    "post_conditions",
    "replay",
]


def build_graph(rules, facts, goal):
    """Graph document for `goal` derived from rule and fact texts."""
    return json.loads(_build_graph_json(rules, facts, goal))


class Engine:
    """Committed graph versions for one deployment configuration."""

    def __init__(self, config):
        self._engine = _Engine(str(config))

    def current(self):
        return json.loads(self._engine.current_json())

    def history(self):
        return json.loads(self._engine.history_json())

    def submit(self, alert):
        if not isinstance(alert, str):
            alert = json.dumps(alert)
        return json.loads(self._engine.submit_json(alert))

    def what_if(self, alert):
        if not isinstance(alert, str):
            alert = json.dumps(alert)
        return json.loads(self._engine.what_if_json(alert))
