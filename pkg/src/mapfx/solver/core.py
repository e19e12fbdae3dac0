"""Exact optimization over joint timed plans.

``solve`` minimizes a lexicographic cost vector: softened-constraint
violation weight at the soft priorities (default 7), then the instance's
objective terms in order.  With an empty soft list it realizes the plain
hard program; softened families are removed from the hard set and charged
per grounded violation atom.
"""

from __future__ import annotations

import heapq
import importlib.util
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..model import INTRANSIT, NORMAL, SLOW, AgentPlan, Instance, Plan
from ..semantics import (
    ALL_FAMILIES, BATTERY, COLLISION_FAMILY, GOAL, OBSTACLE, WAYPOINT,
)
from .constraints import (
    CompiledAgentConstraints, ConstraintError, FixTraversal, HardConstraint,
    SoftConstraint, compile_agent_constraints,
)
from . import kernel as _kernel

KERNEL_COMPILED = not _kernel.__file__.endswith(".py")


def load_interpreted_kernel():
    """Load the pure-Python twin of the kernel even when compiled.

    Used by the kernel benchmark to compare both variants in one process.
    """
    path = Path(__file__).with_name("kernel.py")
    spec = importlib.util.spec_from_file_location("mapfx._kernel_interpreted", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@dataclass(frozen=True)
class SolveConfig:
    mode: str = "exact"  # "exact" | "anytime"
    budget: float | None = None  # seconds, anytime mode
    objective: tuple[str, ...] | None = None  # None: take the instance's

    def __post_init__(self):
        if self.mode not in ("exact", "anytime"):
            raise ValueError(f"unknown solve mode {self.mode!r}")
        if self.mode == "anytime" and (self.budget is None or self.budget <= 0):
            raise ValueError("anytime mode needs a positive budget")


@dataclass(frozen=True)
class CostVector:
    """Priority level -> accumulated cost, compared from the top level down."""

    levels: tuple[tuple[int, int], ...]  # ((priority, value), ...) desc

    def value(self, priority: int) -> int:
        for p, v in self.levels:
            if p == priority:
                return v
        return 0

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.levels)

    def to_dict(self) -> dict:
        return {str(p): v for p, v in self.levels}

    def __str__(self) -> str:
        return "[" + ", ".join(f"{v}@{p}" for p, v in self.levels) + "]"


@dataclass
class Outcome:
    status: str  # "optimal" | "infeasible" | "best_so_far" | "unknown"
    plan: Plan | None = None
    cost: CostVector | None = None
    stats: dict = field(default_factory=dict)

    @property
    def feasible_plan_found(self) -> bool:
        return self.plan is not None


OBJECTIVE_BASE_PRIORITY = 6  # first objective term; soft constraints sit above


def _dijkstra(nbrs: dict, sources: list[int], reverse_cost=None) -> dict[int, int]:
    """Shortest step counts over (vertex, weight) adjacency from sources."""
    dist: dict[int, int] = {}
    heap = [(0, s) for s in sorted(sources)]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for u, w in nbrs.get(v, ()):
            if u not in dist:
                heapq.heappush(heap, (d + w, u))
    return dist


class _AgentTables:
    """Per-agent distance tables on the agent's constrained graph."""

    def __init__(self, inst: Instance, agent_idx: int, spec, cons,
                 obstacle_hard: bool, goal_hard: bool, wp_hard: bool):
        banned = set(cons.banned_visits)
        if obstacle_hard:
            banned |= set(inst.obstacles)
        banned_moves = cons.banned_moves
        nbrs: dict[int, list[tuple[int, int]]] = {}
        for v in inst.vertices:
            if v in banned:
                continue
            lst = []
            for u, mode in inst.neighbors(v):
                if u in banned or (v, u) in banned_moves:
                    continue
                lst.append((u, 1 if mode == NORMAL else 2))
            nbrs[v] = lst
        self.nbrs = nbrs
        rev: dict[int, list[tuple[int, int]]] = {v: [] for v in nbrs}
        for v, lst in nbrs.items():
            for u, w in lst:
                rev.setdefault(u, []).append((v, w))
        self.rev_nbrs = rev
        self.spec = spec
        self.waypoints = tuple(sorted(spec.waypoints))
        self.goal_hard = goal_hard
        self.wp_hard = wp_hard
        # distance maps from each target (on the reversed graph, so the
        # value at v is the cost of reaching the target *from* v)
        self._to: dict[int, dict[int, int]] = {}
        for tgt in set(self.waypoints) | {spec.goal}:
            self._to[tgt] = _dijkstra(self.rev_nbrs, [tgt]) if tgt in nbrs else {}

    def dist_to(self, tgt: int, v: int) -> int:
        return self._to[tgt].get(v, _kernel.INF)

    def h_table(self, goal_matters: bool, wp_matter: bool):
        """mask -> {vertex: remaining steps}, or None when stopping is free."""
        if not goal_matters and not wp_matter:
            return None
        wps = self.waypoints if wp_matter else ()
        full = (1 << len(self.waypoints)) - 1
        goal = self.spec.goal

        def rest(v: int, remaining: tuple[int, ...]) -> int:
            if not remaining:
                return self.dist_to(goal, v) if goal_matters else 0
            best = _kernel.INF
            for i, w in enumerate(remaining):
                d = self.dist_to(w, v)
                if d >= _kernel.INF:
                    continue
                r = rest(w, remaining[:i] + remaining[i + 1:])
                if r < _kernel.INF and d + r < best:
                    best = d + r
            return best

        table: dict[int, dict[int, int]] = {}
        for mask in range(full + 1):
            remaining = tuple(w for i, w in enumerate(wps) if not mask & (1 << i))
            table[mask] = {v: rest(v, remaining) for v in self.nbrs}
        return table

    def charger_dist(self, inst: Instance, cons) -> dict[int, int]:
        usable = [
            c for c in sorted(inst.charging)
            if c in self.nbrs and c not in cons.banned_charge_cells
        ]
        return _dijkstra(self.nbrs, usable) if usable else {}


def _family_setup(soft: list[SoftConstraint]):
    seen = {}
    for sc in soft:
        if sc.family not in ALL_FAMILIES:
            raise ConstraintError(f"unknown constraint family {sc.family!r}")
        if sc.family in seen:
            raise ConstraintError(f"family {sc.family!r} softened twice")
        seen[sc.family] = sc
    priorities = sorted({sc.priority for sc in seen.values()}, reverse=True)
    slot_of_priority = {p: i for i, p in enumerate(priorities)}
    info = {}
    for fam in ALL_FAMILIES:
        if fam in seen:
            sc = seen[fam]
            info[fam] = (False, slot_of_priority[sc.priority], sc.weight)
        else:
            info[fam] = (True, 0, 0)
    return info, priorities


def _compile_program(
    inst: Instance,
    agent_ids: list[int],
    hard: list[HardConstraint],
    soft: list[SoftConstraint],
    objective: tuple[str, ...],
) -> _kernel.Program:
    info, priorities = _family_setup(soft)
    collision_hard, s_coll, w_coll = info[COLLISION_FAMILY]
    obstacle_hard, s_obs, w_obs = info[OBSTACLE]
    battery_hard, s_bat, w_bat = info[BATTERY]
    goal_hard, s_goal, w_goal = info[GOAL]
    wp_hard, s_wp, w_wp = info[WAYPOINT]

    specs = [inst.agent(a) for a in agent_ids]
    cons = [compile_agent_constraints(inst, a, hard) for a in agent_ids]

    normal_nbrs: dict[int, tuple[int, ...]] = {}
    slow_nbrs: dict[int, tuple[int, ...]] = {}
    for v in sorted(inst.vertices):
        normal_nbrs[v] = tuple(u for u, m in inst.neighbors(v) if m == NORMAL)
        slow_nbrs[v] = tuple(u for u, m in inst.neighbors(v) if m == SLOW)
    base = max(inst.vertices) + 1
    cross_code: dict[tuple[int, int], int] = {}
    cross_info: dict[int, tuple[int, int]] = {}
    for (u, v), mode in sorted(inst.edges.items()):
        if mode == SLOW:
            for (a, b) in ((u, v), (v, u)):
                code = base + len(cross_code)
                cross_code[(a, b)] = code
                cross_info[code] = (a, b)

    target_bit, full_wpmask, goal_bit = [], [], []
    h_tabs, h_order, charger_dists, deadline = [], [], [], []
    for idx, spec in enumerate(specs):
        tables = _AgentTables(inst, idx, spec, cons[idx],
                              obstacle_hard, goal_hard, wp_hard)
        wps = tables.waypoints
        bits: dict[int, int] = {}
        for i, w in enumerate(wps):
            bits[w] = bits.get(w, 0) | (1 << i)
        gbit = 1 << len(wps)
        bits[spec.goal] = bits.get(spec.goal, 0) | gbit
        target_bit.append(bits)
        full_wpmask.append((1 << len(wps)) - 1)
        goal_bit.append(gbit)
        h_tabs.append(tables.h_table(goal_hard, wp_hard))
        h_order.append(tables.h_table(True, True))
        charger_dists.append(
            tables.charger_dist(inst, cons[idx]) if battery_hard else {}
        )
        cap = cons[idx].length_cap
        deadline.append(min(inst.tau, cap - 1) if cap is not None else inst.tau)

    return _kernel.Program(
        agent_ids=tuple(agent_ids),
        n=len(agent_ids),
        tau=inst.tau,
        b=inst.max_battery,
        charging=frozenset(inst.charging),
        obstacles=frozenset(inst.obstacles),
        normal_nbrs=normal_nbrs,
        slow_nbrs=slow_nbrs,
        cross_code=cross_code,
        cross_info=cross_info,
        init=[s.init for s in specs],
        goal=[s.goal for s in specs],
        init_battery=[s.init_battery for s in specs],
        target_bit=target_bit,
        full_wpmask=full_wpmask,
        goal_bit=goal_bit,
        h=h_tabs,
        h_order=h_order,
        dist_charger=charger_dists,
        collision_hard=collision_hard,
        obstacle_hard=obstacle_hard,
        battery_hard=battery_hard,
        goal_hard=goal_hard,
        wp_hard=wp_hard,
        w_collision=w_coll, w_obstacle=w_obs, w_battery=w_bat,
        w_goal=w_goal, w_waypoint=w_wp,
        s_collision=s_coll, s_obstacle=s_obs, s_battery=s_bat,
        s_goal=s_goal, s_waypoint=s_wp,
        n_viol_slots=max(1, len(priorities)),
        objective=objective,
        cons=cons,
        deadline_step=deadline,
    ), priorities


def _decode_plan(raw, agent_ids, cross_info) -> Plan:
    agents = {}
    for agent_id, (locs, bats) in zip(agent_ids, raw):
        decoded = tuple(
            INTRANSIT if loc in cross_info else loc for loc in locs
        )
        agents[agent_id] = AgentPlan(agent_id, decoded, tuple(bats))
    return Plan(agents=agents)


def _cost_vector(cost_tuple, priorities, objective) -> CostVector:
    n_slots = max(1, len(priorities))
    levels = []
    prios = priorities if priorities else [7]
    for i, p in enumerate(prios):
        levels.append((p, cost_tuple[i] if i < n_slots else 0))
    if not priorities:
        levels = [(7, 0)]
    for j, _term in enumerate(objective):
        levels.append((OBJECTIVE_BASE_PRIORITY - j, cost_tuple[n_slots + j]))
    return CostVector(levels=tuple(levels))


def solve(
    inst: Instance,
    hard: list[HardConstraint] | None = None,
    soft: list[SoftConstraint] | None = None,
    cfg: SolveConfig | None = None,
    on_improve=None,
) -> Outcome:
    """Exact or anytime lexicographic optimization.

    Every returned plan respects traversal and battery semantics, every
    non-softened builtin family, and every hard constraint; the top cost
    level is the weighted violation count of the softened families and
    the remaining levels are the objective values.
    """
    hard = list(hard or [])
    soft = list(soft or [])
    cfg = cfg or SolveConfig()
    objective = tuple(cfg.objective if cfg.objective is not None else inst.objective)
    for term in objective:
        if term not in ("makespan", "total_plan_length", "total_charge_count"):
            raise ValueError(f"unknown objective term {term!r}")

    agent_ids = sorted(a.id for a in inst.agents)
    started = time.monotonic()
    deadline = started + cfg.budget if cfg.mode == "anytime" else None

    total_nodes = 0
    # Single-agent feasibility screen: if some agent alone cannot satisfy
    # its own hard constraints, no joint plan can.  Collision constraints
    # never bind a single agent, so the projection is a relaxation.
    # (Softened programs are always satisfiable per agent, so skip there.)
    if cfg.mode == "exact" and len(agent_ids) > 1 and not soft:
        for a in agent_ids:
            sub_inst = Instance(
                vertices=inst.vertices, edges=inst.edges,
                obstacles=inst.obstacles, charging=inst.charging,
                endpoints=inst.endpoints,
                agents=(inst.agent(a),),
                max_battery=inst.max_battery, tau=inst.tau,
                objective=inst.objective, grid=inst.grid,
            )
            prog, prios = _compile_program(
                sub_inst, [a],
                [c for c in hard if c.agent == a],
                soft, objective,
            )
            status, _raw, _cost, nodes, _models, _to = _kernel.run_search(prog)
            total_nodes += nodes
            if status == "infeasible":
                elapsed_ms = int((time.monotonic() - started) * 1000)
                return Outcome(
                    status="infeasible",
                    stats={"nodes": total_nodes, "models": 0,
                           "time_ms": elapsed_ms},
                )

    prog, priorities = _compile_program(inst, agent_ids, hard, soft, objective)

    # Per-agent violation fronts drive the level-7 bound; they assume a
    # single soft priority slot (the default), else the bound falls back
    # to zero future violations.
    fronts = None
    if soft and len(priorities) == 1:
        fronts = [_kernel.build_fronts(prog, i) for i in range(prog.n)]

    emit = None
    if on_improve is not None:
        def emit(raw, cost_tuple):
            plan = _decode_plan(raw, agent_ids, prog.cross_info)
            on_improve(plan, _cost_vector(cost_tuple, priorities, objective))

    status, raw, cost_tuple, nodes, models, timed_out = _kernel.run_search(
        prog, deadline=deadline, on_improve=emit, fronts=fronts
    )
    total_nodes += nodes
    elapsed_ms = int((time.monotonic() - started) * 1000)
    stats = {"nodes": total_nodes, "models": models, "time_ms": elapsed_ms}
    if raw is None:
        return Outcome(status=status, stats=stats)
    plan = _decode_plan(raw, agent_ids, prog.cross_info)
    return Outcome(
        status=status,
        plan=plan,
        cost=_cost_vector(cost_tuple, priorities, objective),
        stats=stats,
    )


def solve_fixed_traversal(
    inst: Instance,
    hard: list[HardConstraint],
    soft: list[SoftConstraint] | None = None,
    cfg: SolveConfig | None = None,
) -> Outcome:
    """Search only over charge decisions: every agent's traversal is pinned."""
    fixed_agents = {c.agent for c in hard if isinstance(c, FixTraversal)}
    missing = {a.id for a in inst.agents} - fixed_agents
    if missing:
        raise ConstraintError(
            f"solve_fixed_traversal needs a FixTraversal for agent {min(missing)}"
        )
    return solve(inst, hard, soft, cfg)


def improvement_stream(
    inst: Instance,
    hard: list[HardConstraint] | None = None,
    soft: list[SoftConstraint] | None = None,
    cfg: SolveConfig | None = None,
):
    """All strictly improving incumbents, ending with solve's final answer."""
    collected: list[tuple[Plan, CostVector]] = []
    solve(inst, hard, soft, cfg, on_improve=lambda p, c: collected.append((p, c)))
    return collected
