"""Acceptance criteria, one test per criterion, each with its time budget.

Run with ``pytest -v -s tests/test_acceptance.py`` to see one line per
criterion.
"""

from __future__ import annotations

import random
import time

import pytest

from mapfx.explain import Session, answer
from mapfx.model import AgentPlan, Plan
from mapfx.queries import (
    QUERY_KINDS, Query, compile_query, enumerate_queries,
)
from mapfx.semantics import (
    ALL_FAMILIES, BATTERY, COLLISION_FAMILY, GOAL, OBSTACLE, WAYPOINT,
    enumerate_violations, validate,
)
from mapfx.solver import (
    CapChargeCount, FixTraversal, ForbidWait, SoftConstraint, SolveConfig,
    improvement_stream, solve, solve_fixed_traversal,
)

from family import generate_instance, random_hard_constraints
from oracle import oracle_solve
from test_properties import run_property_suite


def soften(*families):
    return [SoftConstraint(f) for f in sorted(families)]


def report(name, started, budget):
    elapsed = time.monotonic() - started
    assert elapsed < budget, f"{name} took {elapsed:.1f}s (budget {budget}s)"
    print(f"[PASS] {name} ({elapsed:.1f}s)")


def test_criterion_scenario1(scenario1, scenario1_plan1):
    started = time.monotonic()
    out = solve(scenario1)
    assert out.status == "optimal"
    assert out.cost.value(6) == 4  # makespan exactly 4

    sess = Session.start(scenario1, scenario1_plan1)
    expl = answer(sess, Query("QW1", agent=2, x=8))
    assert expl.kind == "alternative"
    alt = expl.alternative_plan
    assert max(p.length for p in alt.agents.values()) == 4
    p2 = alt[2]
    assert not any(p2.locs[t] == 8 == p2.locs[t + 1] for t in range(p2.length))
    assert validate(scenario1, alt).is_solution
    report("scenario 1: optimal makespan 4 and wait-free alternative",
           started, 1.0)


def test_criterion_scenario2(scenario1, scenario1_plan1):
    started = time.monotonic()
    sess = Session.start(scenario1, scenario1_plan1)
    answer(sess, Query("QW1", agent=2, x=8))

    hard = list(sess.accumulated) + [
        compile_query(Query("QW1", agent=1, x=11), scenario1).hard
    ]
    assert solve(scenario1, hard=hard).status == "infeasible"

    expl = answer(sess, Query("QW1", agent=1, x=11))
    assert expl.kind == "counterfactual"
    assert [(a.kind, a.args) for a in expl.violations_current] == [
        ("collision", (1, 2, 1, 7)),
        ("collision", (1, 2, 2, 6)),
    ]

    soft = soften(COLLISION_FAMILY, OBSTACLE, WAYPOINT)
    out_w = solve(scenario1, hard=hard, soft=soft)
    status, levels = oracle_solve(scenario1, hard=hard, soft=soft)
    assert status == "optimal"
    assert out_w.cost.value(7) == levels[7]
    assert any(a.kind == "collision" and a.args[3] == 7
               for a in expl.violations_any)
    report("scenario 2: exact collision atoms and brute-force-minimal cost",
           started, 5.0)


def test_criterion_scenario6(scenario6):
    started = time.monotonic()
    assert solve(scenario6).status == "infeasible"

    sess = Session.start(scenario6, None)
    expl = answer(sess, Query("QU"))
    # (a) collision-family atoms only in the no-infrastructure-change answer
    assert expl.violations_any
    assert all(a.family == COLLISION_FAMILY for a in expl.violations_any)
    # (b) obstacle-only answer is a brute-force-minimal obstacle set
    assert expl.violations_current
    assert all(a.kind == "obstacle" for a in expl.violations_current)
    status, levels = oracle_solve(scenario6, soft=[SoftConstraint(OBSTACLE)])
    assert status == "optimal"
    assert len(expl.violations_current) == levels[7]
    assert expl.suggestion == {"remove_obstacles": [2]}
    # the relaxed-everything answer is brute-force minimal too
    status1, levels1 = oracle_solve(
        scenario6, soft=soften(COLLISION_FAMILY, BATTERY, GOAL, WAYPOINT)
    )
    assert len(expl.violations_any) == levels1[7]
    report("scenario 6: QU collision diagnosis and obstacle suggestion",
           started, 5.0)


def test_criterion_scenario4(m1, m1_plan, m1_3x5, m1_3x5_plan):
    started = time.monotonic()
    # full M1: structure of the charge-cap escalation
    sess = Session.start(m1, m1_plan)
    expl = answer(sess, Query("QC4", agent=2, m=2))
    assert expl.kind == "counterfactual"
    assert any(a.kind == "min_battery" for a in expl.violations_current)
    assert any(a.kind in ("waypoint", "goal") for a in expl.violations_any)
    relevant = {BATTERY, GOAL, OBSTACLE, WAYPOINT}
    assert all(a.family in relevant for a in expl.violations_current)
    assert all(a.family in relevant for a in expl.violations_any)

    # 3x5 truncation: both relaxations match the exhaustive oracle
    cap = CapChargeCount(agent=1, m=1)
    soft = soften(BATTERY, GOAL, OBSTACLE, WAYPOINT)
    assert solve(m1_3x5, hard=[cap]).status == "infeasible"

    fixed = FixTraversal(agent=1, locs=m1_3x5_plan[1].locs)
    out_c = solve_fixed_traversal(m1_3x5, [cap, fixed], soft)
    status_c, levels_c = oracle_solve(m1_3x5, hard=[cap, fixed], soft=soft)
    assert status_c == "optimal"
    assert out_c.cost.value(7) == levels_c[7]
    atoms_c = enumerate_violations(m1_3x5, out_c.plan, frozenset(relevant))
    assert atoms_c and any(a.kind == "min_battery" for a in atoms_c)

    out_w = solve(m1_3x5, hard=[cap], soft=soft)
    status_w, levels_w = oracle_solve(m1_3x5, hard=[cap], soft=soft)
    assert status_w == "optimal"
    assert out_w.cost.value(7) == levels_w[7]
    atoms_w = enumerate_violations(m1_3x5, out_w.plan, frozenset(relevant))
    assert any(a.kind in ("waypoint", "goal") for a in atoms_w)
    report("scenario 4: charge-cap counterfactuals, truncation oracle-checked",
           started, 60.0)


def test_criterion_oracle_equivalence():
    started = time.monotonic()
    rng = random.Random(20250810)
    n_instances = 200
    all_soft = soften(*ALL_FAMILIES)
    for i in range(n_instances):
        inst = generate_instance(rng)
        hard = random_hard_constraints(rng, inst)

        out = solve(inst, hard=hard)
        status, levels = oracle_solve(inst, hard=hard)
        assert out.status == status, (i, inst, hard)
        if status == "optimal":
            assert out.cost.to_dict() == \
                   {str(k): v for k, v in levels.items()}, (i, inst, hard)

        out_soft = solve(inst, hard=hard, soft=all_soft)
        status_s, levels_s = oracle_solve(inst, hard=hard, soft=all_soft)
        assert out_soft.status == status_s == "optimal", (i, inst, hard)
        assert out_soft.cost.to_dict() == \
               {str(k): v for k, v in levels_s.items()}, (i, inst, hard)

        # hard/soft consistency: infeasible hard program <=> positive
        # minimum violation cost after softening everything
        assert (out.status == "infeasible") == (out_soft.cost.value(7) > 0), \
            (i, inst, hard)

        if i % 4 == 0:
            subset = soften(*rng.sample(sorted(ALL_FAMILIES), 3))
            out_mix = solve(inst, hard=hard, soft=subset)
            status_m, levels_m = oracle_solve(inst, hard=hard, soft=subset)
            assert out_mix.status == status_m, (i, inst, hard)
            if status_m == "optimal":
                assert out_mix.cost.to_dict() == \
                       {str(k): v for k, v in levels_m.items()}, (i, inst, hard)
    report(f"oracle equivalence on {n_instances} instances", started, 600.0)


def test_criterion_validator_properties():
    started = time.monotonic()
    counts = run_property_suite()
    assert counts["total"] >= 1000
    report(f"validator properties on {counts['total']} randomized fixtures",
           started, 300.0)


def test_criterion_query_semantics(scenario1, scenario1_plan1, scenario1_plan2,
                                   m1, m1_plan):
    started = time.monotonic()
    # negation property: the source plan exhibits everything enumerated
    seen_kinds = set()
    for inst, plan in ((scenario1, scenario1_plan1), (m1, m1_plan)):
        for q in enumerate_queries(inst, plan):
            compiled = compile_query(q, inst)
            assert not compiled.hard.satisfied_by(inst, plan), q.label()
            seen_kinds.add(q.kind)
    assert seen_kinds == set(QUERY_KINDS) - {"QU"}

    # satisfaction: per kind, a hand-built plan satisfying the constraint
    def m1_alt_charges():
        # same route as the bundled plan, charging at 14 (t=5) and 17 (t=10)
        locs = m1_plan[1].locs
        bats = [10]
        for t in range(len(locs) - 1):
            bats.append(10 if t in (5, 10) else max(bats[-1] - 1, 0))
        plan = Plan(agents={1: AgentPlan(1, locs, tuple(bats)),
                            2: m1_plan[2]})
        assert validate(m1, plan).is_solution
        return plan

    alt = m1_alt_charges()
    satisfying = [
        (scenario1, Query("QW1", agent=2, x=8), scenario1_plan2),
        (scenario1, Query("QW2", agent=2, x=8, s=0), scenario1_plan2),
        (scenario1, Query("QW3", agent=2, x=8, s=0, n=1), scenario1_plan2),
        (scenario1, Query("QW4", agent=2, x=8, s=0, n=1), scenario1_plan2),
        (m1, Query("QC1", agent=1, x=9), alt),
        (m1, Query("QC2", agent=1, s=14), alt),
        (m1, Query("QC3", agent=1, x=9, s=14), alt),
        (scenario1, Query("QC4", agent=1, m=1), scenario1_plan1),
        (scenario1, Query("QP1", agent=1, l=4), scenario1_plan1),
        (scenario1, Query("QP2", agent=1, x=10), scenario1_plan1),
        (scenario1, Query("QP3", agent=1, x=10, s=1), scenario1_plan1),
        (scenario1, Query("QP4", agent=1, x=11, y=10), scenario1_plan1),
        (scenario1, Query("QP5", agent=1, x=11, y=10, s=0), scenario1_plan1),
    ]
    assert {q.kind for _, q, _ in satisfying} == set(QUERY_KINDS) - {"QU"}
    for inst, q, plan in satisfying:
        compiled = compile_query(q, inst)
        assert compiled.hard.satisfied_by(inst, plan), q.label()
    report("query semantics: negation on source plans, satisfaction on "
           "hand-built plans", started, 60.0)


def test_criterion_call_counts(m1):
    started = time.monotonic()
    base = solve(m1)
    assert base.status == "optimal"
    plan = base.plan
    queries = enumerate_queries(m1, plan)
    assert not [q for q in queries if q.kind.startswith("QW")], \
        "the M1 plan should be wait-free"
    per_kind: dict[str, list] = {}
    for q in queries:
        sess = Session.start(m1, plan)
        expl = answer(sess, q)
        if expl.kind == "alternative":
            expected = 1
        elif q.kind.startswith(("QW", "QC")):
            expected = 3
        else:
            expected = 2
        assert expl.solver_calls == expected, (q.label(), expl.kind)
        per_kind.setdefault(q.kind, []).append(expl.solver_calls)
    assert per_kind  # the plan grounds plenty of queries
    summary = {k: (len(v), sum(v)) for k, v in sorted(per_kind.items())}
    report(f"call counts obey the 1/3/2 rule per query: {summary}",
           started, 600.0)


def test_criterion_anytime(m1):
    started = time.monotonic()
    exact = solve(m1)
    stream = improvement_stream(m1, cfg=SolveConfig(mode="anytime", budget=10.0))
    assert stream
    costs = [c.as_tuple() for _, c in stream]
    assert all(a > b for a, b in zip(costs, costs[1:]))
    assert costs[-1] >= exact.cost.as_tuple()
    # ten seconds is plenty for M1, so the budget suffices for equality
    assert costs[-1] == exact.cost.as_tuple()
    report("anytime mode: strictly improving stream, dominated by the "
           "exact optimum", started, 60.0)
