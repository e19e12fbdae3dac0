"""Bundled example instances and plans.

scenario1   3x4 warehouse, two robots sharing waypoint cell 7; plan1 is
            the solution whose waits the worked examples question, plan2
            the wait-free-for-robot-2 alternative.
scenario6   2x4 corridor blocked at cell 2; the swap instance with no
            solution (QU material).
m1          3x10 warehouse with a slow zone, two shelves, four chargers,
            and two battery-constrained robots swapping corners.
m1_3x5      single-robot 3x5 shrink of m1 used by tests as a world small
            enough to brute-force.
m2          m1 plus two more robots swapping the free corners.
m3          m1's environment replicated twice horizontally.
"""

from __future__ import annotations

import json
from importlib import resources

from .model import Instance, Plan, load_instance, load_plan

_NAMES = ("scenario1", "scenario6", "m1", "m1_3x5", "m2", "m3")
_PLANS = {
    "scenario1": ("scenario1_plan1", "scenario1_plan2"),
    "m1": ("m1_plan",),
    "m1_3x5": ("m1_3x5_plan",),
}


def fixture_names() -> tuple[str, ...]:
    return _NAMES


def load_fixture_doc(name: str) -> dict:
    path = resources.files("mapfx.data").joinpath(f"{name}.json")
    return json.loads(path.read_text(encoding="utf-8"))


def load_fixture(name: str) -> Instance:
    if name not in _NAMES:
        raise KeyError(f"unknown fixture {name!r}")
    return load_instance(load_fixture_doc(name))


def fixture_plans(name: str) -> tuple[str, ...]:
    return _PLANS.get(name, ())


def load_fixture_plan(name: str, plan_name: str | None = None) -> Plan:
    inst = load_fixture(name)
    plans = fixture_plans(name)
    if not plans:
        raise KeyError(f"fixture {name!r} ships no plan")
    return load_plan(load_fixture_doc(plan_name or plans[0]), inst)
