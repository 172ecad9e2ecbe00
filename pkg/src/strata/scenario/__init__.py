"""Scenario files: parsing, replay and reporting."""
from .parser import Directive, ScenarioDoc, ScenarioError, parse, parse_file
from .replay import ReplayReport, replay, replay_file
from .emit import emit

__all__ = ["Directive", "ScenarioDoc", "ScenarioError", "parse", "parse_file",
           "ReplayReport", "replay", "replay_file", "emit", "data_path"]


def data_path(name: str = "") -> str:
    import os
    return os.path.join(os.path.dirname(__file__), "data", name)
