"""Executable semantics: traversal legality, battery evolution, violations.

This module is the oracle the rest of the system answers to.  A plan is a
*solution* exactly when every agent's traversal is legal, every battery
sequence is consistent, and :func:`enumerate_violations` over all
constraint families comes back empty.

Violation atoms follow fixed shapes:

    collision(a1, a2, t, x)          a1 < a2, x a vertex
    swap(a1, a2, t, x, y)            a1 < a2, a1 moved x->y on a normal edge
    slow_collision1(a1, a2, t, x, y) a1 started slow x->y at t, a2 started
                                     the reverse crossing at t-1 (a1 != a2)
    slow_collision2(a1, a2, t, x, y) both started opposite crossings at t,
                                     a1 < a2, (x, y) is a1's direction
    goal(a, x)                       the plan does not end at goal x
    waypoint(a, x)                   waypoint x never visited
    obstacle(a, t, x)                agent occupies obstacle x at t
    min_battery(a, t, loc)           battery 0 at t with t < plan length

Agents contribute no occupancy after their plan length: a pair can only
collide at times both are still active.  The goal atom is end-based, not
visit-based: a plan that strolls through its goal mid-route and parks
elsewhere has not reached its destination.  This keeps "zero atoms of
every family" exactly equivalent to "solution of the hard problem".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import INTRANSIT, SLOW, AgentPlan, AgentSpec, Instance, Plan

# Constraint families (the softening granularity).
COLLISION_FAMILY = "collision_family"
GOAL = "goal"
WAYPOINT = "waypoint"
OBSTACLE = "obstacle"
BATTERY = "battery"

ALL_FAMILIES = frozenset({COLLISION_FAMILY, GOAL, WAYPOINT, OBSTACLE, BATTERY})

FAMILY_OF_KIND = {
    "collision": COLLISION_FAMILY,
    "swap": COLLISION_FAMILY,
    "slow_collision1": COLLISION_FAMILY,
    "slow_collision2": COLLISION_FAMILY,
    "goal": GOAL,
    "waypoint": WAYPOINT,
    "obstacle": OBSTACLE,
    "min_battery": BATTERY,
}


@dataclass(frozen=True, order=True)
class ViolationAtom:
    kind: str
    args: tuple

    @property
    def family(self) -> str:
        return FAMILY_OF_KIND[self.kind]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "args": list(self.args)}

    def __str__(self) -> str:
        return f"{self.kind}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Verdict:
    ok: bool
    first_bad_step: int | None = None
    reason: str | None = None


@dataclass
class ValidationReport:
    traversal_legal: dict[int, Verdict] = field(default_factory=dict)
    battery_consistent: dict[int, Verdict] = field(default_factory=dict)
    violations: list[ViolationAtom] = field(default_factory=list)

    @property
    def is_solution(self) -> bool:
        return (
            all(v.ok for v in self.traversal_legal.values())
            and all(v.ok for v in self.battery_consistent.values())
            and not self.violations
        )

    def to_dict(self) -> dict:
        return {
            "is_solution": self.is_solution,
            "traversal_legal": {
                str(a): v.ok for a, v in sorted(self.traversal_legal.items())
            },
            "battery_consistent": {
                str(a): v.ok for a, v in sorted(self.battery_consistent.items())
            },
            "violations": [v.to_dict() for v in sorted(self.violations)],
        }


def check_traversal(inst: Instance, agent: AgentSpec, steps: AgentPlan) -> Verdict:
    """Check that each step follows a wait, a normal edge, or a slow crossing.

    An intransit step is legal only as the middle of a two-step crossing
    of a slow edge: vertex u at t, intransit at t+1, a slow neighbour of
    u at t+2.  The verdict carries the index of the first step that no
    rule explains.
    """
    locs = steps.locs
    length = steps.length
    if locs[0] == INTRANSIT:
        return Verdict(False, 0, "plan starts at intransit")
    t = 0
    while t < length:
        here = locs[t]
        nxt = locs[t + 1]
        if nxt == INTRANSIT:
            if t + 2 > length:
                return Verdict(False, t + 1, "crossing never completes")
            dest = locs[t + 2]
            if dest == INTRANSIT:
                return Verdict(False, t + 2, "consecutive intransit steps")
            if inst.edge_mode(here, dest) != SLOW:
                return Verdict(
                    False, t + 1, f"intransit without a slow edge ({here},{dest})"
                )
            t += 2
            continue
        if nxt == here:
            t += 1
            continue
        if inst.edge_mode(here, nxt) == "normal":
            t += 1
            continue
        return Verdict(False, t + 1, f"no normal edge ({here},{nxt})")
    return Verdict(True)


def check_battery(inst: Instance, agent: AgentSpec, steps: AgentPlan) -> Verdict:
    """Check the battery recurrence.

    Away from charging stations the level drops by one per step; at a
    charging station the agent either recharges to full or lets the level
    drop.  A level of zero no longer drops (there is nothing left to
    spend) - continuing at zero is what the min_battery violation atoms
    record, it is not a structural inconsistency.
    """
    b = inst.max_battery
    levels = steps.batteries
    locs = steps.locs
    if levels[0] != agent.init_battery:
        return Verdict(
            False, 0,
            f"starts at level {levels[0]}, init_battery is {agent.init_battery}",
        )
    for t in range(steps.length):
        here = locs[t]
        v, w = levels[t], levels[t + 1]
        decayed = max(v - 1, 0)
        if here != INTRANSIT and here in inst.charging:
            if w not in (b, decayed):
                return Verdict(
                    False, t + 1,
                    f"level {v} -> {w} at charging cell (expected {b} or {decayed})",
                )
        elif w != decayed:
            return Verdict(False, t + 1, f"level {v} -> {w} (expected {decayed})")
    return Verdict(True)


def _crossing_starts(plan: AgentPlan) -> dict[int, tuple[int, int]]:
    """Map start time t -> (u, v) for each slow crossing u@t, intransit@t+1, v@t+2."""
    out = {}
    for t in range(plan.length - 1):
        if plan.locs[t + 1] == INTRANSIT:
            out[t] = (plan.locs[t], plan.locs[t + 2])
    return out


def enumerate_violations(
    inst: Instance, plan: Plan, families: frozenset[str] = ALL_FAMILIES
) -> list[ViolationAtom]:
    """Ground all violation atoms of the requested families.

    Pure function of (instance, plan, families); atoms are returned
    sorted.  The result is a multiset: the same pair colliding twice
    yields two collision atoms.
    """
    atoms: list[ViolationAtom] = []
    agents = sorted(plan.agents)

    if OBSTACLE in families:
        for a in agents:
            p = plan[a]
            for t in range(p.length + 1):
                loc = p.locs[t]
                if loc != INTRANSIT and loc in inst.obstacles:
                    atoms.append(ViolationAtom("obstacle", (a, t, loc)))

    if GOAL in families or WAYPOINT in families:
        for a in agents:
            p = plan[a]
            spec = inst.agent(a)
            if GOAL in families and p.locs[-1] != spec.goal:
                atoms.append(ViolationAtom("goal", (a, spec.goal)))
            if WAYPOINT in families:
                for w in sorted(spec.waypoints - set(p.locs)):
                    atoms.append(ViolationAtom("waypoint", (a, w)))

    if BATTERY in families:
        for a in agents:
            p = plan[a]
            for t in range(p.length):  # t < L only
                if p.batteries[t] == 0:
                    atoms.append(ViolationAtom("min_battery", (a, t, p.locs[t])))

    if COLLISION_FAMILY in families:
        crossings = {a: _crossing_starts(plan[a]) for a in agents}
        for i, a1 in enumerate(agents):
            p1 = plan[a1]
            for a2 in agents[i + 1:]:
                p2 = plan[a2]
                horizon = min(p1.length, p2.length)
                for t in range(horizon + 1):
                    x = p1.locs[t]
                    if x != INTRANSIT and x == p2.locs[t]:
                        atoms.append(ViolationAtom("collision", (a1, a2, t, x)))
                for t in range(horizon):
                    x1, y1 = p1.locs[t], p1.locs[t + 1]
                    x2, y2 = p2.locs[t], p2.locs[t + 1]
                    if (
                        INTRANSIT not in (x1, y1, x2, y2)
                        and x1 == y2 and y1 == x2 and x1 != y1
                        and inst.edge_mode(x1, y1) == "normal"
                    ):
                        atoms.append(ViolationAtom("swap", (a1, a2, t, x1, y1)))
                # Opposite crossings of the same slow edge.
                c1, c2 = crossings[a1], crossings[a2]
                for t, (u, v) in sorted(c1.items()):
                    if c2.get(t) == (v, u):
                        atoms.append(
                            ViolationAtom("slow_collision2", (a1, a2, t, u, v))
                        )
                    if c2.get(t - 1) == (v, u):
                        atoms.append(
                            ViolationAtom("slow_collision1", (a1, a2, t, u, v))
                        )
                for t, (u, v) in sorted(c2.items()):
                    if c1.get(t - 1) == (v, u):
                        atoms.append(
                            ViolationAtom("slow_collision1", (a2, a1, t, u, v))
                        )
    return sorted(atoms)


def validate(inst: Instance, plan: Plan) -> ValidationReport:
    """Full check: traversal + battery per agent, then all violation atoms."""
    report = ValidationReport()
    for a in sorted(plan.agents):
        spec = inst.agent(a)
        report.traversal_legal[a] = check_traversal(inst, spec, plan[a])
        report.battery_consistent[a] = check_battery(inst, spec, plan[a])
    checks_ok = all(v.ok for v in report.traversal_legal.values()) and all(
        v.ok for v in report.battery_consistent.values()
    )
    if checks_ok:
        report.violations = enumerate_violations(inst, plan, ALL_FAMILIES)
    return report
