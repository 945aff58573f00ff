"""Bundled example structures, loadable by name."""

import json
from importlib import resources

from .access import structure_from_dict

NAMES = ("gamma1", "gamma2", "gamma3", "gamma3_sharp", "gamma4_ramp", "gamma5_ramp")


def fixture_path(name):
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files("multiassign") / "data" / f"{name}.json"


def load_fixture(name):
    return structure_from_dict(json.loads(fixture_path(name).read_text()))
