"""Domain types for warehouse path-finding instances and timed plans.

An :class:`Instance` is the world description: an undirected graph whose
edges carry a transportation mode (``normal`` one-step edges, ``slow``
edges that take two steps through the pseudo-location ``intransit``),
obstacle and charging vertices, the agents with their start/goal/waypoint
assignments and initial battery levels, a battery capacity, and a horizon
``tau`` bounding every agent's plan length.

A :class:`Plan` holds, per agent, the timed location sequence together
with the battery level at each step.  Only *structural* validity is
checked here (contiguity, endpoints, horizon); whether a plan actually
respects traversal and battery rules is the job of :mod:`mapfx.semantics`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

INTRANSIT = "intransit"

NORMAL = "normal"
SLOW = "slow"

OBJECTIVE_TERMS = ("makespan", "total_plan_length", "total_charge_count")


class ModelError(Exception):
    """Base class for loading/validation failures."""


class ParseError(ModelError):
    """Malformed document (bad JSON, wrong types, unknown keys)."""


class ValidationError(ModelError):
    """Structurally well-formed document that breaks an invariant."""


@dataclass(frozen=True)
class AgentSpec:
    id: int
    init: int
    goal: int
    waypoints: frozenset[int]
    init_battery: int


@dataclass(frozen=True)
class GridShorthand:
    """Row-major R x C grid, cells numbered from 1.

    Expansion yields 4-neighbour adjacency.  An expanded edge is slow iff
    *both* endpoint cells are slow cells: a slow zone is a region of
    cells, and an edge belongs to the zone only when it lies entirely
    inside it.  Edges that merely touch the zone boundary stay normal,
    which is what lets a route enter the zone, cross it once, and leave
    at full speed.
    """

    rows: int
    cols: int
    slow_cells: frozenset[int] = frozenset()
    obstacle_cells: frozenset[int] = frozenset()
    charging_cells: frozenset[int] = frozenset()

    def cell(self, row: int, col: int) -> int:
        return (row - 1) * self.cols + col

    def expand(self) -> tuple[tuple[int, ...], dict[tuple[int, int], str]]:
        """Return (vertices, {edge: mode}) with edges as (u, v), u < v."""
        n = self.rows * self.cols
        vertices = tuple(range(1, n + 1))
        edges: dict[tuple[int, int], str] = {}
        for r in range(1, self.rows + 1):
            for c in range(1, self.cols + 1):
                u = self.cell(r, c)
                if c < self.cols:
                    v = u + 1
                    edges[(u, v)] = self._mode(u, v)
                if r < self.rows:
                    v = u + self.cols
                    edges[(u, v)] = self._mode(u, v)
        return vertices, edges

    def _mode(self, u: int, v: int) -> str:
        return SLOW if (u in self.slow_cells and v in self.slow_cells) else NORMAL


@dataclass(frozen=True)
class Instance:
    vertices: frozenset[int]
    edges: dict[tuple[int, int], str]  # key (u, v) with u < v -> mode
    obstacles: frozenset[int]
    charging: frozenset[int]
    endpoints: frozenset[int] | None
    agents: tuple[AgentSpec, ...]
    max_battery: int
    tau: int
    objective: tuple[str, ...] = ("makespan",)
    grid: GridShorthand | None = None
    _adjacency: dict[int, tuple[tuple[int, str], ...]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        adj: dict[int, list[tuple[int, str]]] = {v: [] for v in self.vertices}
        for (u, v), mode in self.edges.items():
            adj[u].append((v, mode))
            adj[v].append((u, mode))
        frozen = {v: tuple(sorted(nbrs)) for v, nbrs in adj.items()}
        object.__setattr__(self, "_adjacency", frozen)

    def neighbors(self, v: int) -> tuple[tuple[int, str], ...]:
        """Sorted (neighbor, mode) pairs of v."""
        return self._adjacency[v]

    def edge_mode(self, u: int, v: int) -> str | None:
        return self.edges.get((u, v) if u < v else (v, u))

    def agent(self, agent_id: int) -> AgentSpec:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(f"no agent with id {agent_id}")

    def validate(self) -> None:
        """Raise ValidationError naming the first violated invariant."""
        for (u, v), mode in self.edges.items():
            if u == v:
                raise ValidationError(f"self-loop edge at vertex {u}")
            if u not in self.vertices or v not in self.vertices:
                raise ValidationError(f"edge ({u},{v}) mentions unknown vertex")
            if mode not in (NORMAL, SLOW):
                raise ValidationError(f"edge ({u},{v}) has unknown mode {mode!r}")
        if self.obstacles & self.charging:
            x = min(self.obstacles & self.charging)
            raise ValidationError(f"vertex {x} is both obstacle and charging")
        for s in (self.obstacles, self.charging):
            if not s <= self.vertices:
                raise ValidationError("obstacle/charging cell outside the graph")
        if self.endpoints is not None and not self.endpoints <= self.vertices:
            raise ValidationError("endpoint cell outside the graph")
        if self.max_battery <= 0:
            raise ValidationError("max_battery must be positive")
        if self.tau <= 0:
            raise ValidationError("tau must be positive")
        for term in self.objective:
            if term not in OBJECTIVE_TERMS:
                raise ValidationError(f"unknown objective term {term!r}")
        if len(set(self.objective)) != len(self.objective):
            raise ValidationError("objective terms must be distinct")
        seen_ids: set[int] = set()
        for a in self.agents:
            if not isinstance(a.id, int) or a.id <= 0:
                raise ValidationError(f"agent id {a.id!r} is not a positive integer")
            if a.id in seen_ids:
                raise ValidationError(f"duplicate agent id {a.id}")
            seen_ids.add(a.id)
            for label, v in (("init", a.init), ("goal", a.goal)):
                if v not in self.vertices:
                    raise ValidationError(
                        f"agent {a.id} {label} {v} is not a vertex"
                    )
                if v in self.obstacles:
                    raise ValidationError(
                        f"agent {a.id} {label} {v} lies on an obstacle"
                    )
            if not a.waypoints <= self.vertices:
                raise ValidationError(f"agent {a.id} has a waypoint outside the graph")
            if a.waypoints & self.obstacles:
                raise ValidationError(f"agent {a.id} has a waypoint on an obstacle")
            if not 0 < a.init_battery <= self.max_battery:
                raise ValidationError(
                    f"agent {a.id} init_battery {a.init_battery} outside [1, "
                    f"{self.max_battery}]"
                )

    def validate_endpoints_strict(self) -> None:
        """Optional strict mode: require init/goal to lie in the endpoint set."""
        if self.endpoints is None:
            return
        for a in self.agents:
            for label, v in (("init", a.init), ("goal", a.goal)):
                if v not in self.endpoints:
                    raise ValidationError(
                        f"agent {a.id} {label} {v} not in the endpoint set"
                    )


@dataclass(frozen=True)
class AgentPlan:
    """Timed steps of one agent: locations and battery levels for t = 0..L."""

    agent_id: int
    locs: tuple  # vertex ids and INTRANSIT markers
    batteries: tuple[int, ...]

    @property
    def length(self) -> int:
        """Plan length L: index of the final step."""
        return len(self.locs) - 1

    def loc(self, t: int):
        return self.locs[t] if 0 <= t <= self.length else None

    def battery(self, t: int) -> int | None:
        return self.batteries[t] if 0 <= t <= self.length else None


@dataclass(frozen=True)
class Plan:
    agents: dict[int, AgentPlan]

    @property
    def makespan(self) -> int:
        return max(p.length for p in self.agents.values())

    def __getitem__(self, agent_id: int) -> AgentPlan:
        return self.agents[agent_id]


# ---------------------------------------------------------------------------
# JSON loading / saving


def _require_keys(obj: dict, allowed: set[str], required: set[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"unknown key {sorted(unknown)[0]!r} in {what}")
    missing = required - set(obj)
    if missing:
        raise ParseError(f"missing key {sorted(missing)[0]!r} in {what}")


def _int_list(value, what: str) -> list[int]:
    if not isinstance(value, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in value
    ):
        raise ParseError(f"{what} must be a list of integers")
    return value


def _int(value, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"{what} must be an integer")
    return value


def load_instance(document: str | dict, strict_endpoints: bool = False) -> Instance:
    """Parse and validate an instance document (JSON text or dict)."""
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ParseError("instance document must be a JSON object")

    allowed = {
        "grid", "vertices", "edges", "obstacles", "charging", "endpoints",
        "max_battery", "tau", "objective", "agents",
    }
    _require_keys(doc, allowed, {"max_battery", "tau", "agents"}, "instance")

    grid = None
    if "grid" in doc:
        if "vertices" in doc or "edges" in doc:
            raise ParseError("give either a grid shorthand or explicit vertices/edges")
        g = doc["grid"]
        if not isinstance(g, dict):
            raise ParseError("grid must be an object")
        _require_keys(
            g, {"rows", "cols", "slow", "obstacles", "charging"},
            {"rows", "cols"}, "grid",
        )
        rows, cols = _int(g["rows"], "grid.rows"), _int(g["cols"], "grid.cols")
        if rows <= 0 or cols <= 0:
            raise ValidationError("grid dimensions must be positive")
        n = rows * cols
        for key in ("slow", "obstacles", "charging"):
            for cell in _int_list(g.get(key, []), f"grid.{key}"):
                if not 1 <= cell <= n:
                    raise ValidationError(f"grid.{key} cell {cell} outside 1..{n}")
        grid = GridShorthand(
            rows=rows,
            cols=cols,
            slow_cells=frozenset(g.get("slow", [])),
            obstacle_cells=frozenset(g.get("obstacles", [])),
            charging_cells=frozenset(g.get("charging", [])),
        )
        vertices, edges = grid.expand()
        vertex_set = frozenset(vertices)
        obstacles = grid.obstacle_cells
        charging = grid.charging_cells
    else:
        if "vertices" not in doc or "edges" not in doc:
            raise ParseError("instance needs either a grid or vertices+edges")
        vertex_set = frozenset(_int_list(doc["vertices"], "vertices"))
        edges = {}
        if not isinstance(doc["edges"], list):
            raise ParseError("edges must be a list")
        for e in doc["edges"]:
            if not isinstance(e, dict):
                raise ParseError("each edge must be an object")
            _require_keys(e, {"u", "v", "mode"}, {"u", "v"}, "edge")
            u, v = _int(e["u"], "edge.u"), _int(e["v"], "edge.v")
            mode = e.get("mode", NORMAL)
            key = (u, v) if u < v else (v, u)
            if key in edges and edges[key] != mode:
                raise ValidationError(f"edge ({u},{v}) listed twice with different modes")
            edges[key] = mode
        obstacles = frozenset(_int_list(doc.get("obstacles", []), "obstacles"))
        charging = frozenset(_int_list(doc.get("charging", []), "charging"))

    endpoints = None
    if "endpoints" in doc:
        endpoints = frozenset(_int_list(doc["endpoints"], "endpoints"))

    objective = tuple(doc.get("objective", ["makespan"]))
    if not objective or not all(isinstance(o, str) for o in objective):
        raise ParseError("objective must be a non-empty list of term names")

    if not isinstance(doc["agents"], list) or not doc["agents"]:
        raise ParseError("agents must be a non-empty list")
    agents = []
    for a in doc["agents"]:
        if not isinstance(a, dict):
            raise ParseError("each agent must be an object")
        _require_keys(
            a, {"id", "init", "goal", "waypoints", "init_battery"},
            {"id", "init", "goal"}, "agent",
        )
        agents.append(
            AgentSpec(
                id=_int(a["id"], "agent.id"),
                init=_int(a["init"], "agent.init"),
                goal=_int(a["goal"], "agent.goal"),
                waypoints=frozenset(_int_list(a.get("waypoints", []), "agent.waypoints")),
                init_battery=_int(a.get("init_battery", doc["max_battery"]),
                                  "agent.init_battery"),
            )
        )

    inst = Instance(
        vertices=vertex_set,
        edges=edges,
        obstacles=obstacles,
        charging=charging,
        endpoints=endpoints,
        agents=tuple(agents),
        max_battery=_int(doc["max_battery"], "max_battery"),
        tau=_int(doc["tau"], "tau"),
        objective=objective,
        grid=grid,
    )
    inst.validate()
    if strict_endpoints:
        inst.validate_endpoints_strict()
    return inst


def save_instance(inst: Instance) -> str:
    doc: dict = {}
    if inst.grid is not None:
        doc["grid"] = {
            "rows": inst.grid.rows,
            "cols": inst.grid.cols,
            "slow": sorted(inst.grid.slow_cells),
            "obstacles": sorted(inst.grid.obstacle_cells),
            "charging": sorted(inst.grid.charging_cells),
        }
    else:
        doc["vertices"] = sorted(inst.vertices)
        doc["edges"] = [
            {"u": u, "v": v, "mode": mode}
            for (u, v), mode in sorted(inst.edges.items())
        ]
        doc["obstacles"] = sorted(inst.obstacles)
        doc["charging"] = sorted(inst.charging)
    if inst.endpoints is not None:
        doc["endpoints"] = sorted(inst.endpoints)
    doc["max_battery"] = inst.max_battery
    doc["tau"] = inst.tau
    doc["objective"] = list(inst.objective)
    doc["agents"] = [
        {
            "id": a.id,
            "init": a.init,
            "goal": a.goal,
            "waypoints": sorted(a.waypoints),
            "init_battery": a.init_battery,
        }
        for a in inst.agents
    ]
    return json.dumps(doc, indent=2)


def load_plan(document: str | dict, inst: Instance) -> Plan:
    """Parse a plan document and check its structural invariants.

    Structural means: steps contiguous from t=0, first location is the
    agent's init, last location is the agent's goal and not intransit,
    length within tau, battery values within [0, max_battery].  Whether
    moves and battery changes are *legal* is checked by semantics.validate.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ParseError("plan document must be a JSON object")
    _require_keys(doc, {"agents"}, {"agents"}, "plan")
    if not isinstance(doc["agents"], list):
        raise ParseError("plan.agents must be a list")

    plans: dict[int, AgentPlan] = {}
    for entry in doc["agents"]:
        if not isinstance(entry, dict):
            raise ParseError("each plan agent must be an object")
        _require_keys(entry, {"id", "steps"}, {"id", "steps"}, "plan agent")
        agent_id = _int(entry["id"], "plan agent id")
        try:
            spec = inst.agent(agent_id)
        except KeyError:
            raise ValidationError(f"plan mentions unknown agent {agent_id}") from None
        steps = entry["steps"]
        if not isinstance(steps, list) or not steps:
            raise ValidationError(f"agent {agent_id} has an empty steps list")
        locs: list = []
        batteries: list[int] = []
        for i, step in enumerate(steps):
            if not isinstance(step, dict):
                raise ParseError("each step must be an object")
            _require_keys(step, {"t", "loc", "battery"}, {"t", "loc", "battery"}, "step")
            if _int(step["t"], "step.t") != i:
                raise ValidationError(
                    f"agent {agent_id} steps not contiguous at index {i}"
                )
            loc = step["loc"]
            if loc == INTRANSIT:
                locs.append(INTRANSIT)
            elif isinstance(loc, int) and not isinstance(loc, bool):
                if loc not in inst.vertices:
                    raise ValidationError(
                        f"agent {agent_id} step {i} at unknown vertex {loc}"
                    )
                locs.append(loc)
            else:
                raise ParseError(f"step.loc must be a vertex id or {INTRANSIT!r}")
            level = _int(step["battery"], "step.battery")
            if not 0 <= level <= inst.max_battery:
                raise ValidationError(
                    f"agent {agent_id} battery {level} at t={i} outside "
                    f"[0, {inst.max_battery}]"
                )
            batteries.append(level)
        if locs[0] != spec.init:
            raise ValidationError(
                f"agent {agent_id} plan starts at {locs[0]}, init is {spec.init}"
            )
        if locs[-1] == INTRANSIT:
            raise ValidationError(f"agent {agent_id} plan ends at intransit")
        if locs[-1] != spec.goal:
            raise ValidationError(
                f"agent {agent_id} plan ends at {locs[-1]}, goal is {spec.goal}"
            )
        if len(locs) - 1 > inst.tau:
            raise ValidationError(
                f"agent {agent_id} plan length {len(locs) - 1} exceeds tau {inst.tau}"
            )
        plans[agent_id] = AgentPlan(agent_id, tuple(locs), tuple(batteries))

    for a in inst.agents:
        if a.id not in plans:
            raise ValidationError(f"plan missing agent {a.id}")
    return Plan(agents=plans)


def plan_to_dict(plan: Plan) -> dict:
    return {
        "agents": [
            {
                "id": agent_id,
                "steps": [
                    {"t": t, "loc": p.locs[t], "battery": p.batteries[t]}
                    for t in range(p.length + 1)
                ],
            }
            for agent_id, p in sorted(plan.agents.items())
        ]
    }


def save_plan(plan: Plan) -> str:
    """Serialize a plan; load_plan(save_plan(p), inst) == p for valid plans."""
    return json.dumps(plan_to_dict(plan), indent=2)
