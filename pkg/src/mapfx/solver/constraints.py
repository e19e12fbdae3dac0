"""Hard and soft constraints over candidate plans.

Every hard constraint is a decidable predicate on complete plans
(:meth:`satisfied_by`) and also compiles into small per-agent lookup
tables the search kernel checks incrementally while extending partial
plans.  A prefix rejection always implies rejection of every extension,
which is what makes in-search pruning sound.

Soft constraints name a whole constraint family to relax: violations of
that family are permitted but charged ``weight`` at ``priority`` per
grounded violation atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..model import INTRANSIT, NORMAL, SLOW, AgentPlan, Instance, Plan


class ConstraintError(ValueError):
    """Ill-formed constraint (bad parameters, illegal fixed traversal)."""


@dataclass(frozen=True)
class HardConstraint:
    """Base: subclasses define the predicate; ``source`` tags its origin."""

    agent: int
    source: str = field(default="", compare=False)

    def satisfied_by(self, inst: Instance, plan: Plan) -> bool:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    def to_dict(self) -> dict:
        d = {"type": _TYPE_OF[type(self)], "agent": self.agent}
        for key in self.__dataclass_fields__:
            if key in ("agent", "source"):
                continue
            value = getattr(self, key)
            if isinstance(value, tuple):
                value = list(value)
            d[key] = value
        if self.source:
            d["source"] = self.source
        return d

    def _plan(self, plan: Plan) -> AgentPlan:
        return plan[self.agent]


@dataclass(frozen=True)
class ForbidWait(HardConstraint):
    """Agent never waits at x."""

    x: int = 0

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        return not any(
            p.locs[t] == self.x and p.locs[t + 1] == self.x for t in range(p.length)
        )

    def render(self):
        return f"agent {self.agent} never waits at cell {self.x}"


@dataclass(frozen=True)
class ForbidWaitAt(HardConstraint):
    """Agent does not wait at x at time s."""

    x: int = 0
    s: int = 0

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        return not (p.loc(self.s) == self.x and p.loc(self.s + 1) == self.x)

    def render(self):
        return f"agent {self.agent} does not wait at cell {self.x} at time {self.s}"


@dataclass(frozen=True)
class ForbidWaitRun(HardConstraint):
    """Agent does not stay at x through times s..s+n."""

    x: int = 0
    s: int = 0
    n: int = 1

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        if self.s + self.n > p.length:
            return True
        return not all(
            p.locs[t] == self.x for t in range(self.s, self.s + self.n + 1)
        )

    def render(self):
        return (
            f"agent {self.agent} does not stay at cell {self.x} "
            f"from time {self.s} through {self.s + self.n}"
        )


@dataclass(frozen=True)
class CapWaitCount(HardConstraint):
    """Fewer than n waits at x within the window [s, s+n)."""

    x: int = 0
    s: int = 0
    n: int = 1

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        count = sum(
            1
            for t in range(self.s, min(self.s + self.n, p.length))
            if p.locs[t] == self.x and p.locs[t + 1] == self.x
        )
        return count < self.n

    def render(self):
        return (
            f"agent {self.agent} waits at cell {self.x} fewer than {self.n} times "
            f"in the window starting at {self.s}"
        )


@dataclass(frozen=True)
class ForbidChargeAt(HardConstraint):
    """Agent never recharges to full at cell x."""

    x: int = 0

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        b = inst.max_battery
        return not any(
            p.locs[t] == self.x and self.x in inst.charging and p.batteries[t + 1] == b
            for t in range(p.length)
        )

    def render(self):
        return f"agent {self.agent} never charges at cell {self.x}"


@dataclass(frozen=True)
class ForbidChargeTime(HardConstraint):
    """Agent does not recharge to full at time s (at any charging cell)."""

    s: int = 0

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        loc = p.loc(self.s)
        return not (
            loc != INTRANSIT
            and loc in inst.charging
            and p.battery(self.s + 1) == inst.max_battery
        )

    def render(self):
        return f"agent {self.agent} does not charge at time {self.s}"


@dataclass(frozen=True)
class ForbidChargeAtTime(HardConstraint):
    x: int = 0
    s: int = 0

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        return not (
            p.loc(self.s) == self.x
            and self.x in inst.charging
            and p.battery(self.s + 1) == inst.max_battery
        )

    def render(self):
        return (
            f"agent {self.agent} does not charge at cell {self.x} at time {self.s}"
        )


@dataclass(frozen=True)
class CapChargeCount(HardConstraint):
    """Fewer than m steps at full battery after t=0."""

    m: int = 1

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        b = inst.max_battery
        count = sum(1 for t in range(1, p.length + 1) if p.batteries[t] == b)
        return count < self.m

    def render(self):
        return f"agent {self.agent} charges fewer than {self.m} times"


@dataclass(frozen=True)
class CapPlanLength(HardConstraint):
    """Plan length strictly below l."""

    l: int = 1

    def satisfied_by(self, inst, plan):
        return self._plan(plan).length < self.l

    def render(self):
        return f"agent {self.agent} has a plan shorter than {self.l}"


@dataclass(frozen=True)
class ForbidVisit(HardConstraint):
    x: int = 0

    def satisfied_by(self, inst, plan):
        return self.x not in self._plan(plan).locs

    def render(self):
        return f"agent {self.agent} never visits cell {self.x}"


@dataclass(frozen=True)
class ForbidVisitAt(HardConstraint):
    x: int = 0
    s: int = 0

    def satisfied_by(self, inst, plan):
        return self._plan(plan).loc(self.s) != self.x

    def render(self):
        return f"agent {self.agent} is not at cell {self.x} at time {self.s}"


def _moves_through(inst: Instance, p: AgentPlan, t: int, x: int, y: int) -> bool:
    """True when the plan moves x->y starting at t (one normal step or a
    two-step slow crossing)."""
    if p.loc(t) != x:
        return False
    nxt = p.loc(t + 1)
    if nxt == y and inst.edge_mode(x, y) == NORMAL:
        return True
    return nxt == INTRANSIT and p.loc(t + 2) == y and inst.edge_mode(x, y) == SLOW


@dataclass(frozen=True)
class ForbidMove(HardConstraint):
    """Agent never moves from x to y (that direction, either edge mode)."""

    x: int = 0
    y: int = 0

    def satisfied_by(self, inst, plan):
        p = self._plan(plan)
        return not any(
            _moves_through(inst, p, t, self.x, self.y) for t in range(p.length)
        )

    def render(self):
        return f"agent {self.agent} never moves from cell {self.x} to cell {self.y}"


@dataclass(frozen=True)
class ForbidMoveAt(HardConstraint):
    x: int = 0
    y: int = 0
    s: int = 0

    def satisfied_by(self, inst, plan):
        return not _moves_through(inst, self._plan(plan), self.s, self.x, self.y)

    def render(self):
        return (
            f"agent {self.agent} does not move from cell {self.x} to cell {self.y} "
            f"at time {self.s}"
        )


@dataclass(frozen=True)
class FixTraversal(HardConstraint):
    """Pin the agent's location sequence; battery decisions stay free."""

    locs: tuple = ()

    def satisfied_by(self, inst, plan):
        return self._plan(plan).locs == self.locs

    def render(self):
        return f"agent {self.agent} follows the fixed traversal"

    def validate_against(self, inst: Instance) -> None:
        from ..semantics import check_traversal

        spec = inst.agent(self.agent)
        if not self.locs:
            raise ConstraintError(f"fixed traversal for agent {self.agent} is empty")
        if self.locs[0] != spec.init:
            raise ConstraintError(
                f"fixed traversal for agent {self.agent} starts at {self.locs[0]}, "
                f"init is {spec.init}"
            )
        if len(self.locs) - 1 > inst.tau:
            raise ConstraintError(
                f"fixed traversal for agent {self.agent} exceeds tau {inst.tau}"
            )
        dummy = AgentPlan(self.agent, tuple(self.locs), (0,) * len(self.locs))
        verdict = check_traversal(inst, spec, dummy)
        if not verdict.ok:
            raise ConstraintError(
                f"fixed traversal for agent {self.agent} illegal at step "
                f"{verdict.first_bad_step}: {verdict.reason}"
            )


_TYPE_OF = {
    ForbidWait: "forbid_wait",
    ForbidWaitAt: "forbid_wait_at",
    ForbidWaitRun: "forbid_wait_run",
    CapWaitCount: "cap_wait_count",
    ForbidChargeAt: "forbid_charge_at",
    ForbidChargeTime: "forbid_charge_time",
    ForbidChargeAtTime: "forbid_charge_at_time",
    CapChargeCount: "cap_charge_count",
    CapPlanLength: "cap_plan_length",
    ForbidVisit: "forbid_visit",
    ForbidVisitAt: "forbid_visit_at",
    ForbidMove: "forbid_move",
    ForbidMoveAt: "forbid_move_at",
    FixTraversal: "fix_traversal",
}

_CLASS_OF = {name: cls for cls, name in _TYPE_OF.items()}


def constraint_from_dict(d: dict) -> HardConstraint:
    d = dict(d)
    type_name = d.pop("type", None)
    cls = _CLASS_OF.get(type_name)
    if cls is None:
        raise ConstraintError(f"unknown constraint type {type_name!r}")
    if cls is FixTraversal and "locs" in d:
        d["locs"] = tuple(
            loc if loc == INTRANSIT else int(loc) for loc in d["locs"]
        )
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConstraintError(f"bad constraint parameters: {exc}") from None


@dataclass(frozen=True)
class SoftConstraint:
    """Relax one constraint family at weight@priority per violation atom."""

    family: str
    weight: int = 1
    priority: int = 7

    def __post_init__(self):
        if self.weight <= 0:
            raise ConstraintError("soft constraint weight must be positive")
        if self.priority < 7:
            raise ConstraintError(
                "soft constraint priority must stay above objective priorities"
            )


@dataclass
class CompiledAgentConstraints:
    """Per-agent lookup tables the kernel consults while extending plans."""

    banned_wait_cells: frozenset[int] = frozenset()
    banned_waits_at: frozenset[tuple[int, int]] = frozenset()  # (x, s)
    wait_runs: tuple[tuple[int, int, int], ...] = ()  # (x, s, n)
    wait_windows: tuple[tuple[int, int, int], ...] = ()  # (x, s, n)
    banned_charge_cells: frozenset[int] = frozenset()
    banned_charge_times: frozenset[int] = frozenset()
    banned_charges_at: frozenset[tuple[int, int]] = frozenset()  # (x, s)
    charge_cap: int | None = None
    length_cap: int | None = None
    banned_visits: frozenset[int] = frozenset()
    banned_visits_at: frozenset[tuple[int, int]] = frozenset()  # (x, s)
    banned_moves: frozenset[tuple[int, int]] = frozenset()  # (x, y)
    banned_moves_at: frozenset[tuple[int, int, int]] = frozenset()  # (x, y, s)
    fixed: tuple | None = None


def compile_agent_constraints(
    inst: Instance, agent_id: int, hard: list[HardConstraint]
) -> CompiledAgentConstraints:
    banned_wait_cells, banned_waits_at = set(), set()
    wait_runs, wait_windows = [], []
    banned_charge_cells, banned_charge_times, banned_charges_at = set(), set(), set()
    charge_cap = length_cap = None
    banned_visits, banned_visits_at = set(), set()
    banned_moves, banned_moves_at = set(), set()
    fixed = None
    for c in hard:
        if c.agent != agent_id:
            continue
        if isinstance(c, ForbidWait):
            banned_wait_cells.add(c.x)
        elif isinstance(c, ForbidWaitAt):
            banned_waits_at.add((c.x, c.s))
        elif isinstance(c, ForbidWaitRun):
            wait_runs.append((c.x, c.s, c.n))
        elif isinstance(c, CapWaitCount):
            wait_windows.append((c.x, c.s, c.n))
        elif isinstance(c, ForbidChargeAt):
            banned_charge_cells.add(c.x)
        elif isinstance(c, ForbidChargeTime):
            banned_charge_times.add(c.s)
        elif isinstance(c, ForbidChargeAtTime):
            banned_charges_at.add((c.x, c.s))
        elif isinstance(c, CapChargeCount):
            charge_cap = c.m if charge_cap is None else min(charge_cap, c.m)
        elif isinstance(c, CapPlanLength):
            length_cap = c.l if length_cap is None else min(length_cap, c.l)
        elif isinstance(c, ForbidVisit):
            banned_visits.add(c.x)
        elif isinstance(c, ForbidVisitAt):
            banned_visits_at.add((c.x, c.s))
        elif isinstance(c, ForbidMove):
            banned_moves.add((c.x, c.y))
        elif isinstance(c, ForbidMoveAt):
            banned_moves_at.add((c.x, c.y, c.s))
        elif isinstance(c, FixTraversal):
            c.validate_against(inst)
            if fixed is not None and tuple(c.locs) != fixed:
                raise ConstraintError(
                    f"agent {agent_id} has two conflicting fixed traversals"
                )
            fixed = tuple(c.locs)
        else:
            raise ConstraintError(f"unknown hard constraint {type(c).__name__}")
    return CompiledAgentConstraints(
        banned_wait_cells=frozenset(banned_wait_cells),
        banned_waits_at=frozenset(banned_waits_at),
        wait_runs=tuple(sorted(wait_runs)),
        wait_windows=tuple(sorted(wait_windows)),
        banned_charge_cells=frozenset(banned_charge_cells),
        banned_charge_times=frozenset(banned_charge_times),
        banned_charges_at=frozenset(banned_charges_at),
        charge_cap=charge_cap,
        length_cap=length_cap,
        banned_visits=frozenset(banned_visits),
        banned_visits_at=frozenset(banned_visits_at),
        banned_moves=frozenset(banned_moves),
        banned_moves_at=frozenset(banned_moves_at),
        fixed=fixed,
    )
