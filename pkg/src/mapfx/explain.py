"""Interactive why-questions over a plan, answered by what-if solving.

The flow for an observation query (QW/QC/QP): forbid the observed
behaviour as a hard constraint and re-solve.  If an alternative plan
exists, show it (and whether it is better, equal, or worse on the active
objective); the constraint then joins the session so later questions are
answered against it.  If no alternative exists, relax the families
relevant to the question into weighted soft constraints and report which
violations a cost-minimal plan is forced into - both when the current
plan's routes are kept (what would happen *here*) and when the solver may
plan freely (what would happen *at best*).

QU (why is there no solution?) relaxes everything but obstacles for one
answer, and only obstacles for the other; obstacle violations in the
second answer double as infrastructure-change suggestions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .model import Instance, Plan, load_instance, load_plan, plan_to_dict, save_instance
from .queries import CompiledQuery, Query, compile_query, parse_query
from .semantics import (
    BATTERY, COLLISION_FAMILY, GOAL, OBSTACLE, WAYPOINT,
    ViolationAtom, enumerate_violations, validate,
)
from .solver import (
    FixTraversal, Outcome, SoftConstraint, SolveConfig, solve,
    solve_fixed_traversal,
)
from .solver.constraints import HardConstraint, constraint_from_dict


class ExplainError(Exception):
    pass


class PremiseNotObserved(ExplainError):
    """The question asks about behaviour the current plan does not show."""


@dataclass
class Explanation:
    kind: str  # "alternative" | "counterfactual" | "infeasibility"
    query: Query
    text: str
    alternative_plan: Plan | None = None
    comparison: str | None = None  # "shorter" | "equal" | "longer"
    violations_current: list[ViolationAtom] | None = None
    violations_any: list[ViolationAtom] | None = None
    suggestion: dict | None = None
    solver_calls: int = 0
    models: int = 0
    unknown: bool = False

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "query": self.query.to_dict(),
            "text": self.text,
            "solver_calls": self.solver_calls,
            "models": self.models,
        }
        if self.alternative_plan is not None:
            d["alternative_plan"] = plan_to_dict(self.alternative_plan)
        if self.comparison is not None:
            d["comparison"] = self.comparison
        if self.violations_current is not None:
            d["violations_current"] = [a.to_dict() for a in self.violations_current]
        if self.violations_any is not None:
            d["violations_any"] = [a.to_dict() for a in self.violations_any]
        if self.suggestion is not None:
            d["suggestion"] = self.suggestion
        if self.unknown:
            d["unknown"] = True
        return d


@dataclass
class HistoryEntry:
    query: Query
    explanation: Explanation
    prior_plan: Plan | None
    added_constraint: bool


@dataclass
class Session:
    instance: Instance
    current_plan: Plan | None
    config: SolveConfig = field(default_factory=SolveConfig)
    accumulate_unsat: bool = False
    accumulated: list[HardConstraint] = field(default_factory=list)
    history: list[HistoryEntry] = field(default_factory=list)

    @classmethod
    def start(cls, instance: Instance, plan: Plan | None,
              config: SolveConfig | None = None,
              accumulate_unsat: bool = False) -> "Session":
        if plan is not None:
            report = validate(instance, plan)
            if not report.is_solution:
                raise ExplainError("session plan is not a solution of the instance")
        return cls(instance=instance, current_plan=plan,
                   config=config or SolveConfig(),
                   accumulate_unsat=accumulate_unsat)

    def reset(self) -> None:
        self.accumulated.clear()
        self.history.clear()

    def pop(self) -> HistoryEntry:
        if not self.history:
            raise ExplainError("no history entry to pop")
        entry = self.history.pop()
        if entry.added_constraint:
            self.accumulated.pop()
        self.current_plan = entry.prior_plan
        return entry

    # -- persistence -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "instance": json.loads(save_instance(self.instance)),
            "current_plan": plan_to_dict(self.current_plan)
            if self.current_plan is not None else None,
            "accumulate_unsat": self.accumulate_unsat,
            "accumulated": [c.to_dict() for c in self.accumulated],
            "history": [
                {
                    "query": e.query.to_dict(),
                    "explanation": e.explanation.to_dict(),
                    "prior_plan": plan_to_dict(e.prior_plan)
                    if e.prior_plan is not None else None,
                    "added_constraint": e.added_constraint,
                }
                for e in self.history
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Session":
        inst = load_instance(doc["instance"])
        plan = (load_plan(doc["current_plan"], inst)
                if doc.get("current_plan") else None)
        sess = cls(instance=inst, current_plan=plan,
                   accumulate_unsat=doc.get("accumulate_unsat", False))
        sess.accumulated = [constraint_from_dict(c) for c in doc.get("accumulated", [])]
        for e in doc.get("history", []):
            q = parse_query(e["query"])
            expl = Explanation(
                kind=e["explanation"]["kind"], query=q,
                text=e["explanation"]["text"],
            )
            prior = (load_plan(e["prior_plan"], inst)
                     if e.get("prior_plan") else None)
            sess.history.append(HistoryEntry(q, expl, prior,
                                             e.get("added_constraint", False)))
        return sess


# ---------------------------------------------------------------------------
# Plan revision: "what if the agent did not wait/charge here?"


def revise(plan: Plan, q: Query) -> dict[int, tuple]:
    """Per-agent location sequences with the queried behaviour edited out.

    Waiting queries delete the targeted wait steps of the queried agent
    (shifting the rest earlier); charging queries keep every agent's
    locations verbatim and leave the charge decisions to the solver.
    Only the queried agent's sequence ever differs from the input.
    """
    sequences = {a: tuple(p.locs) for a, p in plan.agents.items()}
    if q.kind.startswith("QC"):
        return sequences
    if not q.kind.startswith("QW"):
        raise ExplainError(f"no plan revision for query kind {q.kind}")
    p = plan[q.agent]
    locs = list(p.locs)
    drop: set[int] = set()
    if q.kind == "QW1":
        drop = {t + 1 for t in range(p.length)
                if locs[t] == q.x and locs[t + 1] == q.x}
    elif q.kind == "QW2":
        if p.loc(q.s) == q.x and p.loc(q.s + 1) == q.x:
            drop = {q.s + 1}
    elif q.kind == "QW3":
        if all(p.loc(t) == q.x for t in range(q.s, q.s + q.n + 1)):
            drop = set(range(q.s + 1, q.s + q.n + 1))
    elif q.kind == "QW4":
        waits = [t for t in range(q.s, min(q.s + q.n, p.length))
                 if locs[t] == q.x and locs[t + 1] == q.x]
        drop = {t + 1 for t in waits[q.n - 1:]}
    if not drop:
        raise PremiseNotObserved(
            f"the current plan shows no {q.kind} behaviour to remove"
        )
    sequences[q.agent] = tuple(
        loc for t, loc in enumerate(locs) if t not in drop
    )
    return sequences


# ---------------------------------------------------------------------------
# Rendering


def _robot(a: int) -> str:
    return f"Robot {a}"


def _cell(x) -> str:
    return "in transit" if x == "intransit" else f"Cell {x}"


_ALT_PREFIX = {
    "QW1": "Actually, {R} does not have to wait at Cell {x}.",
    "QW2": "Actually, {R} does not have to wait at Cell {x} at time step {s}.",
    "QW3": ("Actually, {R} does not have to wait at Cell {x} "
            "at time step {s} for {n} steps."),
    "QW4": ("Actually, {R} can wait at Cell {x} at time step {s} "
            "for less than {n} steps."),
    "QC1": "Actually, {R} does not have to charge at Cell {x}.",
    "QC2": "Actually, {R} does not have to charge at time step {s}.",
    "QC3": "Actually, {R} does not have to charge at Cell {x} at time step {s}.",
    "QC4": "Actually, {R} can charge less than {m} times.",
    "QP1": ("Actually, {R} can follow a shorter plan whose length is "
            "smaller than {l}."),
    "QP2": "Actually, {R} does not have to visit Cell {x}.",
    "QP3": "Actually, {R} does not have to visit Cell {x} at time step {s}.",
    "QP4": "Actually, {R} does not have to move from Cell {x} to Cell {y}.",
    "QP5": ("Actually, {R} does not have to move from Cell {x} to Cell {y} "
            "at time step {s}."),
}

_CF_PREFIX = {
    "QW1": "{R} has to wait at Cell {x}",
    "QW2": "{R} has to wait at Cell {x} at time step {s}",
    "QW3": "{R} has to wait at Cell {x} at time step {s} for {n} steps",
    "QW4": ("{R} cannot wait at Cell {x} at time step {s} "
            "for less than {n} steps"),
    "QC1": "{R} has to charge at Cell {x}",
    "QC2": "{R} has to charge at time step {s}",
    "QC3": "{R} has to charge at Cell {x} at time step {s}",
    "QC4": "{R} cannot charge less than {m} times",
    "QP1": "{R} cannot follow a plan whose length is smaller than {l}",
    "QP2": "{R} has to visit Cell {x}",
    "QP3": "{R} has to visit Cell {x} at time step {s}",
    "QP4": "{R} has to move from Cell {x} to Cell {y}",
    "QP5": "{R} has to move from Cell {x} to Cell {y} at time step {s}",
}


def _fill(template: str, q: Query) -> str:
    return template.format(R=_robot(q.agent), x=q.x, y=q.y, s=q.s, n=q.n,
                           m=q.m, l=q.l)


def render_atoms(atoms: list[ViolationAtom], subject: int | None = None) -> str:
    """Violation atoms as prose, grouped the way the answers read best."""
    if not atoms:
        return "no relevant constraint is violated"
    parts: list[str] = []
    collisions: dict[tuple[int, int], list[tuple[int, object]]] = {}
    for a in sorted(atoms):
        if a.kind == "collision":
            a1, a2, t, x = a.args
            collisions.setdefault((a1, a2), []).append((t, x))
            continue
        if a.kind == "swap":
            a1, a2, t, x, y = a.args
            parts.append(
                f"{_robot(a1)} and {_robot(a2)} will swap positions between "
                f"{_cell(x)} and {_cell(y)} at time step {t}"
            )
        elif a.kind in ("slow_collision1", "slow_collision2"):
            a1, a2, t, x, y = a.args
            parts.append(
                f"{_robot(a1)} and {_robot(a2)} will collide on the slow edge "
                f"between {_cell(x)} and {_cell(y)} at time step {t}"
            )
        elif a.kind == "goal":
            ag, x = a.args
            who = "it" if ag == subject else _robot(ag)
            parts.append(f"{who} will not be able to reach its goal at {_cell(x)}")
        elif a.kind == "waypoint":
            ag, x = a.args
            who = "it" if ag == subject else _robot(ag)
            parts.append(
                f"{who} will not be able to visit its waypoint at {_cell(x)}"
            )
        elif a.kind == "obstacle":
            ag, t, x = a.args
            who = "it" if ag == subject else _robot(ag)
            parts.append(
                f"{who} collides with the obstacle at {_cell(x)} at time step {t}"
            )
        elif a.kind == "min_battery":
            ag, t, _loc = a.args
            who = "its" if ag == subject else f"{_robot(ag)}'s"
            parts.append(f"{who} battery will run out at time step {t}")
    for (a1, a2), events in sorted(collisions.items()):
        where = " and ".join(
            f"at {_cell(x)} at time step {t}" for t, x in sorted(events)
        )
        parts.insert(0, f"{_robot(a1)} and {_robot(a2)} will collide "
                        f"with each other {where}")
    return " and ".join(parts)


def render(e: Explanation) -> str:
    q = e.query
    if e.kind == "alternative":
        qualifier = {
            "shorter": " that is shorter",
            "longer": " which is longer",
            "equal": "",
        }[e.comparison or "equal"]
        noun = "an alternative optimal plan" if e.comparison == "equal" \
            else f"an alternative plan{qualifier}"
        return f"{_fill(_ALT_PREFIX[q.kind], q)} Here is {noun}:"
    if e.kind == "counterfactual":
        prefix = _fill(_CF_PREFIX[q.kind], q)
        subject = q.agent
        any_text = render_atoms(e.violations_any or [], subject)
        if e.violations_current is not None:
            cur_text = render_atoms(e.violations_current, subject)
            return (f"{prefix}; otherwise, {cur_text} if it uses the current "
                    f"plan or {any_text} with another plan.")
        return f"{prefix}; otherwise, {any_text}."
    # infeasibility (QU)
    lines = []
    if e.unknown:
        return ("The search budget was exhausted before the cause of "
                "infeasibility could be determined.")
    lines.append(f"There is no solution because "
                 f"{render_atoms(e.violations_any or [])}.")
    if e.violations_current is not None:
        obstacle_atoms = [a for a in e.violations_current if a.kind == "obstacle"]
        if obstacle_atoms:
            cells = sorted({a.args[2] for a in obstacle_atoms})
            noun = "this obstacle" if len(cells) == 1 else "these obstacles"
            lines.append(
                f"There is no solution because "
                f"{render_atoms(e.violations_current)}; "
                f"this suggests removing {noun}."
            )
        else:
            lines.append(
                "Even if obstacles could be removed, no solution exists."
            )
    return " ".join(lines)


# ---------------------------------------------------------------------------
# Algorithm: answer one query against a session


def _objective_value(inst: Instance, plan: Plan, term: str) -> int:
    if term == "makespan":
        return max(p.length for p in plan.agents.values())
    if term == "total_plan_length":
        return sum(p.length for p in plan.agents.values())
    count = 0
    for p in plan.agents.values():
        count += sum(1 for t in range(1, p.length + 1)
                     if p.batteries[t] == inst.max_battery)
    return count


def _soften(families) -> list[SoftConstraint]:
    return [SoftConstraint(f) for f in sorted(families)]


def answer(sess: Session, q: Query) -> Explanation:
    """Algorithm main loop for one query; updates the session in place."""
    inst = sess.instance
    q.validate(inst)
    if q.kind == "QU":
        return _answer_qu(sess, q)
    if sess.current_plan is None:
        raise PremiseNotObserved(
            "the session has no plan; only QU applies to unsolvable instances"
        )
    compiled = compile_query(q, inst)
    if compiled.hard.satisfied_by(inst, sess.current_plan):
        raise PremiseNotObserved(
            f"the current plan does not show the behaviour {q.label()} asks about"
        )

    hard = list(sess.accumulated) + [compiled.hard]
    calls = 0
    out = solve(inst, hard=hard, cfg=sess.config)
    calls += 1
    models = out.stats.get("models", 0)

    if out.status in ("optimal", "best_so_far"):
        active = (sess.config.objective or inst.objective)[0]
        now = _objective_value(inst, sess.current_plan, active)
        alt = _objective_value(inst, out.plan, active)
        comparison = "equal" if alt == now else ("shorter" if alt < now else "longer")
        expl = Explanation(
            kind="alternative", query=q, text="",
            alternative_plan=out.plan, comparison=comparison,
            solver_calls=calls, models=models,
        )
        expl.text = render(expl)
        sess.history.append(HistoryEntry(q, expl, sess.current_plan, True))
        sess.accumulated.append(compiled.hard)
        sess.current_plan = out.plan
        return expl

    if out.status == "unknown":
        expl = Explanation(kind="infeasibility", query=q, text="",
                           solver_calls=calls, models=models, unknown=True)
        expl.text = render(expl)
        sess.history.append(HistoryEntry(q, expl, sess.current_plan, False))
        return expl

    # infeasible: escalate to the softened program(s)
    soft = _soften(compiled.relevant)
    violations_current = None
    if q.kind.startswith(("QW", "QC")):
        sequences = revise(sess.current_plan, q)
        hard_c = hard + [
            FixTraversal(agent=a, locs=locs, source="current-plan")
            for a, locs in sorted(sequences.items())
        ]
        out_c = solve_fixed_traversal(inst, hard_c, soft, cfg=sess.config)
        calls += 1
        models += out_c.stats.get("models", 0)
        if out_c.plan is not None:
            violations_current = enumerate_violations(
                inst, out_c.plan, compiled.relevant
            )

    out_w = solve(inst, hard=hard, soft=soft, cfg=sess.config)
    calls += 1
    models += out_w.stats.get("models", 0)
    violations_any = None
    blocking = None
    if out_w.plan is not None:
        violations_any = enumerate_violations(inst, out_w.plan, compiled.relevant)
        if not violations_any:
            # the dead end came from accumulated constraints outside the
            # relevant families; say so instead of inventing a culprit
            blocking = [c.render() for c in sess.accumulated]

    expl = Explanation(
        kind="counterfactual", query=q, text="",
        violations_current=violations_current,
        violations_any=violations_any,
        solver_calls=calls, models=models,
        unknown=out_w.status == "unknown",
    )
    expl.text = render(expl)
    if blocking:
        expl.text += (" The accumulated session constraints stand in the way: "
                      + "; ".join(blocking) + ".")
    added = False
    if sess.accumulate_unsat:
        sess.accumulated.append(compiled.hard)
        added = True
    sess.history.append(HistoryEntry(q, expl, sess.current_plan, added))
    return expl


def _answer_qu(sess: Session, q: Query) -> Explanation:
    inst = sess.instance
    if sess.current_plan is not None:
        raise PremiseNotObserved(
            "the session has a plan, so the instance does have a solution"
        )
    hard = list(sess.accumulated)
    calls = 0
    # no infrastructure change: everything but obstacles may give way
    soft_w1 = _soften({COLLISION_FAMILY, BATTERY, GOAL, WAYPOINT})
    out1 = solve(inst, hard=hard, soft=soft_w1, cfg=sess.config)
    calls += 1
    models = out1.stats.get("models", 0)
    # infrastructure change possible: only obstacles give way
    out2 = solve(inst, hard=hard, soft=[SoftConstraint(OBSTACLE)], cfg=sess.config)
    calls += 1
    models += out2.stats.get("models", 0)

    violations_any = (enumerate_violations(inst, out1.plan)
                      if out1.plan is not None else [])
    violations_current = (enumerate_violations(inst, out2.plan)
                          if out2.plan is not None else None)
    suggestion = None
    if violations_current:
        cells = sorted({a.args[2] for a in violations_current
                        if a.kind == "obstacle"})
        if cells:
            suggestion = {"remove_obstacles": cells}

    expl = Explanation(
        kind="infeasibility", query=q, text="",
        violations_current=violations_current,
        violations_any=violations_any,
        suggestion=suggestion,
        solver_calls=calls, models=models,
        unknown=out1.status == "unknown" and out2.status == "unknown",
    )
    expl.text = render(expl)
    sess.history.append(HistoryEntry(q, expl, None, False))
    return expl
