"""The fourteen query kinds: parsing, compilation, and enumeration.

A query compiles to one hard constraint (the *negation* of the observed
behaviour: "find a plan where the agent does NOT wait there") plus the
set of constraint families relevant to answering it when that constraint
turns out to be unsatisfiable:

    QW1(a,x)      why does agent a wait at x (at any time)?
    QW2(a,x,s)    why does agent a wait at x at time s?
    QW3(a,x,s,n)  why does agent a wait at x at time s for n steps?
    QW4(a,x,s,n)  why does agent a not wait at x at s for fewer than n steps?
    QC1(a,x)      why does agent a charge at x (at any time)?
    QC2(a,s)      why does agent a charge at time s?
    QC3(a,x,s)    why does agent a charge at x at time s?
    QC4(a,m)      why does agent a not charge fewer than m times?
    QP1(a,l)      why does agent a not have a plan shorter than l?
    QP2(a,x)      why does agent a visit x (at any time)?
    QP3(a,x,s)    why does agent a visit x at time s?
    QP4(a,x,y)    why does agent a move from x to y (at any time)?
    QP5(a,x,y,s)  why does agent a move from x to y at time s?
    QU            why does the instance have no solution?

Waiting questions are answered against collisions, obstacles and
waypoints; charging questions against battery, goal, obstacles and
waypoints; path and no-solution questions against all five families.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .model import INTRANSIT, Instance, Plan
from .semantics import (
    ALL_FAMILIES, BATTERY, COLLISION_FAMILY, GOAL, OBSTACLE, WAYPOINT,
)
from .solver.constraints import (
    CapChargeCount, CapPlanLength, CapWaitCount, ForbidChargeAt,
    ForbidChargeAtTime, ForbidChargeTime, ForbidMove, ForbidMoveAt,
    ForbidVisit, ForbidVisitAt, ForbidWait, ForbidWaitAt, ForbidWaitRun,
    HardConstraint,
)

QUERY_KINDS = (
    "QW1", "QW2", "QW3", "QW4",
    "QC1", "QC2", "QC3", "QC4",
    "QP1", "QP2", "QP3", "QP4", "QP5",
    "QU",
)

# which parameters each kind takes, in canonical order
_PARAMS = {
    "QW1": ("agent", "x"),
    "QW2": ("agent", "x", "s"),
    "QW3": ("agent", "x", "s", "n"),
    "QW4": ("agent", "x", "s", "n"),
    "QC1": ("agent", "x"),
    "QC2": ("agent", "s"),
    "QC3": ("agent", "x", "s"),
    "QC4": ("agent", "m"),
    "QP1": ("agent", "l"),
    "QP2": ("agent", "x"),
    "QP3": ("agent", "x", "s"),
    "QP4": ("agent", "x", "y"),
    "QP5": ("agent", "x", "y", "s"),
    "QU": (),
}

_WAIT_RELEVANT = frozenset({COLLISION_FAMILY, OBSTACLE, WAYPOINT})
_CHARGE_RELEVANT = frozenset({BATTERY, GOAL, OBSTACLE, WAYPOINT})

RELEVANT_FAMILIES = {
    "QW1": _WAIT_RELEVANT, "QW2": _WAIT_RELEVANT,
    "QW3": _WAIT_RELEVANT, "QW4": _WAIT_RELEVANT,
    "QC1": _CHARGE_RELEVANT, "QC2": _CHARGE_RELEVANT,
    "QC3": _CHARGE_RELEVANT, "QC4": _CHARGE_RELEVANT,
    "QP1": ALL_FAMILIES, "QP2": ALL_FAMILIES, "QP3": ALL_FAMILIES,
    "QP4": ALL_FAMILIES, "QP5": ALL_FAMILIES,
    "QU": ALL_FAMILIES,
}


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    kind: str
    agent: int | None = None
    x: int | None = None
    y: int | None = None
    s: int | None = None
    n: int | None = None
    m: int | None = None
    l: int | None = None

    def params(self) -> dict:
        return {p: getattr(self, p) for p in _PARAMS[self.kind]}

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}

    def label(self) -> str:
        args = ",".join(str(v) for v in self.params().values())
        return f"{self.kind}({args})" if args else self.kind

    def validate(self, inst: Instance) -> None:
        if self.kind not in QUERY_KINDS:
            raise QueryError(f"unknown query kind {self.kind!r}")
        for p in _PARAMS[self.kind]:
            if getattr(self, p) is None:
                raise QueryError(f"{self.kind} needs parameter {p!r}")
        if self.kind == "QU":
            return
        try:
            inst.agent(self.agent)
        except KeyError:
            raise QueryError(f"unknown agent {self.agent}") from None
        for p in ("x", "y"):
            v = getattr(self, p)
            if p in _PARAMS[self.kind] and v not in inst.vertices:
                raise QueryError(f"{p}={v} is not a vertex")
        if "s" in _PARAMS[self.kind] and not 0 <= self.s < inst.tau:
            raise QueryError(f"time s={self.s} outside [0, {inst.tau})")
        for p in ("n", "m", "l"):
            if p in _PARAMS[self.kind] and getattr(self, p) < 1:
                raise QueryError(f"{p} must be at least 1")
        if self.kind in ("QW3", "QW4") and self.s + self.n > inst.tau:
            raise QueryError(f"window s+n={self.s + self.n} exceeds tau")


@dataclass(frozen=True)
class CompiledQuery:
    query: Query
    hard: HardConstraint | None  # None only for QU
    relevant: frozenset[str]
    template_id: str


def compile_query(q: Query, inst: Instance) -> CompiledQuery:
    """Hard constraint forbidding the queried behaviour, plus relevancy."""
    q.validate(inst)
    src = q.label()
    a = q.agent
    hard: HardConstraint | None
    if q.kind == "QW1":
        hard = ForbidWait(agent=a, x=q.x, source=src)
    elif q.kind == "QW2":
        hard = ForbidWaitAt(agent=a, x=q.x, s=q.s, source=src)
    elif q.kind == "QW3":
        hard = ForbidWaitRun(agent=a, x=q.x, s=q.s, n=q.n, source=src)
    elif q.kind == "QW4":
        hard = CapWaitCount(agent=a, x=q.x, s=q.s, n=q.n, source=src)
    elif q.kind == "QC1":
        hard = ForbidChargeAt(agent=a, x=q.x, source=src)
    elif q.kind == "QC2":
        hard = ForbidChargeTime(agent=a, s=q.s, source=src)
    elif q.kind == "QC3":
        hard = ForbidChargeAtTime(agent=a, x=q.x, s=q.s, source=src)
    elif q.kind == "QC4":
        hard = CapChargeCount(agent=a, m=q.m, source=src)
    elif q.kind == "QP1":
        hard = CapPlanLength(agent=a, l=q.l, source=src)
    elif q.kind == "QP2":
        hard = ForbidVisit(agent=a, x=q.x, source=src)
    elif q.kind == "QP3":
        hard = ForbidVisitAt(agent=a, x=q.x, s=q.s, source=src)
    elif q.kind == "QP4":
        hard = ForbidMove(agent=a, x=q.x, y=q.y, source=src)
    elif q.kind == "QP5":
        hard = ForbidMoveAt(agent=a, x=q.x, y=q.y, s=q.s, source=src)
    elif q.kind == "QU":
        hard = None
    else:  # pragma: no cover
        raise QueryError(f"unknown query kind {q.kind!r}")
    return CompiledQuery(
        query=q, hard=hard, relevant=frozenset(RELEVANT_FAMILIES[q.kind]),
        template_id=q.kind,
    )


def parse_query(text: str | dict) -> Query:
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise QueryError(f"invalid JSON: {exc}") from None
    else:
        doc = text
    if not isinstance(doc, dict):
        raise QueryError("query must be a JSON object")
    kind = doc.get("kind")
    if kind not in QUERY_KINDS:
        raise QueryError(f"unknown query kind {kind!r}")
    allowed = set(_PARAMS[kind]) | {"kind"}
    unknown = set(doc) - allowed
    if unknown:
        raise QueryError(f"unexpected key {sorted(unknown)[0]!r} for {kind}")
    kwargs = {}
    for p in _PARAMS[kind]:
        if p not in doc:
            raise QueryError(f"{kind} needs parameter {p!r}")
        v = doc[p]
        if not isinstance(v, int) or isinstance(v, bool):
            raise QueryError(f"parameter {p!r} must be an integer")
        kwargs[p] = v
    return Query(kind=kind, **kwargs)


# ---------------------------------------------------------------------------
# Grounding queries in an observed plan


def _wait_runs(plan: Plan, agent_id: int):
    """Maximal runs of consecutive waits: (x, s, n) with n wait steps."""
    p = plan[agent_id]
    runs = []
    t = 0
    while t < p.length:
        if p.locs[t] != INTRANSIT and p.locs[t + 1] == p.locs[t]:
            s = t
            while t < p.length and p.locs[t + 1] == p.locs[s]:
                t += 1
            runs.append((p.locs[s], s, t - s))
        else:
            t += 1
    return runs


def _recharge_events(inst: Instance, plan: Plan, agent_id: int):
    """(x, s) pairs where the battery refills to max while at charger x."""
    p = plan[agent_id]
    b = inst.max_battery
    return [
        (p.locs[t], t)
        for t in range(p.length)
        if p.locs[t] != INTRANSIT
        and p.locs[t] in inst.charging
        and p.batteries[t + 1] == b
    ]


def enumerate_queries(inst: Instance, plan: Plan, kinds=QUERY_KINDS) -> list[Query]:
    """All query instances grounded in behaviours the plan actually shows.

    Every returned query's hard constraint is violated by the source plan
    (the plan exhibits the queried phenomenon), so each is a meaningful
    why-question about it.  QU is never enumerated: it applies to
    instances without solutions, and the input plan is one.
    """
    from .semantics import validate as _validate

    report = _validate(inst, plan)
    if not report.is_solution:
        raise QueryError("enumerate_queries needs a plan that is a solution")

    out: list[Query] = []
    agents = sorted(plan.agents)
    kinds = set(kinds)

    if "QW1" in kinds:
        seen = sorted({(a, x) for a in agents for (x, s, n) in _wait_runs(plan, a)})
        out += [Query("QW1", agent=a, x=x) for a, x in seen]
    for kind in ("QW2", "QW3", "QW4"):
        if kind in kinds:
            for a in agents:
                for (x, s, n) in _wait_runs(plan, a):
                    if kind == "QW2":
                        out.append(Query("QW2", agent=a, x=x, s=s))
                    elif kind == "QW3":
                        out.append(Query("QW3", agent=a, x=x, s=s, n=n))
                    else:
                        out.append(Query("QW4", agent=a, x=x, s=s, n=n))
    if "QC1" in kinds:
        for a in agents:
            for x in sorted({x for (x, s) in _recharge_events(inst, plan, a)}):
                out.append(Query("QC1", agent=a, x=x))
    if "QC2" in kinds:
        for a in agents:
            for s in sorted({s for (x, s) in _recharge_events(inst, plan, a)}):
                out.append(Query("QC2", agent=a, s=s))
    if "QC3" in kinds:
        for a in agents:
            for (x, s) in sorted(_recharge_events(inst, plan, a)):
                out.append(Query("QC3", agent=a, x=x, s=s))
    if "QC4" in kinds:
        for a in agents:
            m = len(_recharge_events(inst, plan, a))
            if m >= 1:
                out.append(Query("QC4", agent=a, m=m))
    if "QP1" in kinds:
        for a in agents:
            if plan[a].length >= 1:
                out.append(Query("QP1", agent=a, l=plan[a].length))
    if "QP2" in kinds:
        for a in agents:
            for x in sorted({v for v in plan[a].locs if v != INTRANSIT}):
                out.append(Query("QP2", agent=a, x=x))
    if "QP3" in kinds:
        for a in agents:
            p = plan[a]
            for t in range(p.length + 1):
                if p.locs[t] != INTRANSIT and t < inst.tau:
                    out.append(Query("QP3", agent=a, x=p.locs[t], s=t))
    if "QP4" in kinds or "QP5" in kinds:
        for a in agents:
            p = plan[a]
            moves = []
            t = 0
            while t < p.length:
                here, nxt = p.locs[t], p.locs[t + 1]
                if nxt == INTRANSIT:
                    moves.append((here, p.locs[t + 2], t))
                    t += 2
                elif nxt != here:
                    moves.append((here, nxt, t))
                    t += 1
                else:
                    t += 1
            if "QP4" in kinds:
                for (x, y) in sorted({(x, y) for (x, y, t) in moves}):
                    out.append(Query("QP4", agent=a, x=x, y=y))
            if "QP5" in kinds:
                for (x, y, t) in sorted(moves, key=lambda mv: (mv[2], mv[0])):
                    if t < inst.tau:
                        out.append(Query("QP5", agent=a, x=x, y=y, s=t))
    order = {k: i for i, k in enumerate(QUERY_KINDS)}
    out.sort(key=lambda q: (order[q.kind], q.agent or 0,
                            q.x or 0, q.y or 0, q.s or 0, q.n or 0,
                            q.m or 0, q.l or 0))
    return out
