"""Randomized validator properties over seeded fixtures.

Covers the battery recurrence, the two-step slow-edge shape, the
vanish-at-goal occupancy convention, and determinism plus monotonicity of
violation enumeration.  The case count is what matters: the shared
``run_property_ suite`` below is also invoked by the acceptance module and
must exercise at least a thousand generated fixtures.
"""

from __future__ import annotations

import random

from mapfx.model import INTRANSIT, NORMAL, SLOW, AgentPlan, Plan
from mapfx.semantics import (
    ALL_FAMILIES, BATTERY, COLLISION_FAMILY, GOAL, OBSTACLE, WAYPOINT,
    check_battery, check_traversal, enumerate_violations,
)

from family import generate_instance


def random_walk(rng: random.Random, inst, spec):
    """A traversal- and battery-legal walk; not necessarily a solution."""
    locs = [spec.init]
    bats = [spec.init_battery]
    steps = rng.randint(0, inst.tau)
    while len(locs) - 1 < steps:
        here = locs[-1]
        level = bats[-1]
        choices = [("wait", here)]
        for (nbr, mode) in inst.neighbors(here):
            if mode == NORMAL:
                choices.append(("move", nbr))
            elif len(locs) + 1 <= steps + 1 and len(locs) - 1 + 2 <= inst.tau:
                choices.append(("cross", nbr))
        kind, target = rng.choice(choices)
        charging = here in inst.charging
        def next_level(v):
            if charging and rng.random() < 0.5:
                return inst.max_battery
            return max(v - 1, 0)
        if kind == "cross":
            mid = next_level(level)
            locs += [INTRANSIT, target]
            bats += [mid, max(mid - 1, 0)]
        else:
            locs.append(target)
            bats.append(next_level(level))
    if locs[-1] == INTRANSIT:
        locs.pop()
        bats.pop()
    return AgentPlan(spec.id, tuple(locs), tuple(bats))


def corrupt_battery(rng: random.Random, inst, plan: AgentPlan):
    """Flip one battery level to something the recurrence cannot produce."""
    if plan.length == 0:
        return None
    t = rng.randint(1, plan.length)
    here = plan.locs[t - 1]
    prev = plan.batteries[t - 1]
    legal = {max(prev - 1, 0)}
    if here != INTRANSIT and here in inst.charging:
        legal.add(inst.max_battery)
    bad = [v for v in range(inst.max_battery + 1) if v not in legal]
    if not bad:
        return None
    levels = list(plan.batteries)
    levels[t] = rng.choice(bad)
    return AgentPlan(plan.agent_id, plan.locs, tuple(levels)), t


def run_property_suite(seed: int = 20250810, cases: int = 1100) -> dict:
    rng = random.Random(seed)
    counts = {"total": 0, "battery_ok": 0, "battery_reject": 0,
              "slow_shape": 0, "vanish": 0, "determinism": 0}
    while counts["total"] < cases:
        inst = generate_instance(rng)
        plans = {}
        for spec in inst.agents:
            plans[spec.id] = random_walk(rng, inst, spec)
        joint = Plan(agents=plans)
        counts["total"] += 1

        for spec in inst.agents:
            p = plans[spec.id]
            assert check_traversal(inst, spec, p).ok, (inst, p)
            assert check_battery(inst, spec, p).ok, (inst, p)
            counts["battery_ok"] += 1

            corrupted = corrupt_battery(rng, inst, p)
            if corrupted is not None:
                bad_plan, t = corrupted
                verdict = check_battery(inst, spec, bad_plan)
                assert not verdict.ok
                assert verdict.first_bad_step == t
                counts["battery_reject"] += 1

            # slow-edge two-step shape: intransit runs have length one and
            # bridge exactly one slow edge
            for t in range(p.length + 1):
                if p.locs[t] == INTRANSIT:
                    assert 0 < t < p.length
                    u, v = p.locs[t - 1], p.locs[t + 1]
                    assert u != INTRANSIT and v != INTRANSIT
                    assert inst.edge_mode(u, v) == SLOW
            counts["slow_shape"] += 1

        atoms = enumerate_violations(inst, joint, ALL_FAMILIES)
        # vanish-at-goal: pairwise atoms never mention a time after either
        # agent's plan has ended
        for a in atoms:
            if a.family == COLLISION_FAMILY:
                a1, a2, t = a.args[0], a.args[1], a.args[2]
                horizon = min(plans[a1].length, plans[a2].length)
                assert t <= horizon
        counts["vanish"] += 1

        assert atoms == enumerate_violations(inst, joint, ALL_FAMILIES)
        subset = frozenset(rng.sample(sorted(ALL_FAMILIES), rng.randint(1, 4)))
        sub_atoms = enumerate_violations(inst, joint, subset)
        assert set(sub_atoms) <= set(atoms)
        assert all(a.family in subset for a in sub_atoms)
        counts["determinism"] += 1
    return counts


def test_property_suite_runs_thousand_cases():
    counts = run_property_suite()
    assert counts["total"] >= 1000
    assert counts["battery_reject"] > 300  # the negative path is well fed


def test_walks_collide_sometimes():
    # sanity: the generator actually produces multi-agent interactions
    rng = random.Random(3)
    seen_collision = False
    for _ in range(300):
        inst = generate_instance(rng)
        if len(inst.agents) < 2:
            continue
        joint = Plan(agents={
            spec.id: random_walk(rng, inst, spec) for spec in inst.agents
        })
        atoms = enumerate_violations(inst, joint, frozenset({COLLISION_FAMILY}))
        if atoms:
            seen_collision = True
            break
    assert seen_collision
