"""Command line entry points.

    mapfx solve INSTANCE [--objective ...] [--anytime S] [--out PATH]
    mapfx validate INSTANCE PLAN
    mapfx explain INSTANCE PLAN QUERY [--session PATH] [--anytime S]
    mapfx bench INSTANCE PLAN [--kinds LIST] [--anytime S] [--csv PATH]
    mapfx serve [--host H] [--port P] [--data-dir DIR]

Exit codes: 0 ok, 2 input error, 3 premise not observed, 10 infeasible,
11 unknown (budget exhausted without an answer).
"""

from __future__ import annotations

import argparse
import os
import json
import sys
from pathlib import Path

from .explain import (
    ExplainError, PremiseNotObserved, Session, answer, render,
)
from .fixtures import fixture_names
from .model import ModelError, load_instance, load_plan, plan_to_dict, save_plan
from .queries import QUERY_KINDS, QueryError, enumerate_queries, parse_query
from .semantics import validate as validate_plan
from .solver import ConstraintError, SolveConfig, solve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PREMISE = 3
EXIT_INFEASIBLE = 10
EXIT_UNKNOWN = 11


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc}") from None


def _config(args) -> SolveConfig:
    if getattr(args, "anytime", None):
        return SolveConfig(mode="anytime", budget=args.anytime)
    return SolveConfig()


def cmd_solve(args) -> int:
    inst = load_instance(_read(args.instance))
    objective = tuple(args.objective.split(",")) if args.objective else None
    out = solve(inst, cfg=SolveConfig(
        mode="anytime" if args.anytime else "exact",
        budget=args.anytime,
        objective=objective,
    ))
    payload = {"status": out.status, "stats": out.stats}
    if out.cost is not None:
        payload["cost"] = out.cost.to_dict()
    if out.plan is not None:
        payload["plan"] = plan_to_dict(out.plan)
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"status: {out.status}")
        if out.cost is not None:
            print(f"cost: {out.cost}")
        print(f"stats: {out.stats}")
    if out.plan is not None and args.out:
        Path(args.out).write_text(save_plan(out.plan), encoding="utf-8")
    if out.status == "infeasible":
        return EXIT_INFEASIBLE
    if out.status == "unknown":
        return EXIT_UNKNOWN
    if args.out is None and args.format != "json":
        print(save_plan(out.plan))
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = load_instance(_read(args.instance))
    plan = load_plan(_read(args.plan), inst)
    report = validate_plan(inst, plan)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.is_solution else EXIT_INFEASIBLE


def _load_session(args, inst, plan) -> Session:
    if args.session and Path(args.session).exists():
        return Session.from_dict(json.loads(_read(args.session)))
    cfg = _config(args)
    return Session.start(inst, plan, config=cfg)


def cmd_explain(args) -> int:
    inst = load_instance(_read(args.instance))
    plan = None
    if args.plan and args.plan != "-":
        plan = load_plan(_read(args.plan), inst)
    query_text = args.query
    if query_text.startswith("@"):
        query_text = _read(query_text[1:])
    q = parse_query(query_text)
    sess = _load_session(args, inst, plan)
    try:
        expl = answer(sess, q)
    except PremiseNotObserved as exc:
        print(json.dumps({"error": "premise_not_observed", "detail": str(exc)}))
        return EXIT_PREMISE
    if args.session:
        Path(args.session).write_text(
            json.dumps(sess.to_dict(), indent=2), encoding="utf-8"
        )
    if args.format == "json":
        print(json.dumps(expl.to_dict(), indent=2))
    else:
        print(expl.text)
    if expl.unknown:
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_bench(args) -> int:
    """Ground every query the plan exhibits and answer each in a fresh
    session, reporting per-kind instance counts, solver calls, improving
    models, and mean wall time."""
    import time as _time

    inst = load_instance(_read(args.instance))
    plan = load_plan(_read(args.plan), inst)
    kinds = tuple(args.kinds.split(",")) if args.kinds else tuple(
        k for k in QUERY_KINDS if k != "QU"
    )
    for k in kinds:
        if k not in QUERY_KINDS:
            raise QueryError(f"unknown query kind {k!r}")
    queries = enumerate_queries(inst, plan, kinds)
    if args.list:
        print(json.dumps([q.to_dict() for q in queries], indent=2))
        return EXIT_OK
    cfg = _config(args)
    rows = []
    for kind in kinds:
        of_kind = [q for q in queries if q.kind == kind]
        calls = models = 0
        elapsed = 0.0
        for q in of_kind:
            sess = Session.start(inst, plan, config=cfg)
            t0 = _time.perf_counter()
            expl = answer(sess, q)
            elapsed += _time.perf_counter() - t0
            calls += expl.solver_calls
            models += expl.models
        rows.append({
            "kind": kind,
            "instances": len(of_kind),
            "calls": calls,
            "models": models,
            "avg_time_s": round(elapsed / len(of_kind), 4) if of_kind else 0.0,
        })
    header = f"{'Query':<6} {'#Instances':>10} {'#Calls':>7} {'#Models':>8} {'Time (s)':>9}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['kind']:<6} {r['instances']:>10} {r['calls']:>7} "
              f"{r['models']:>8} {r['avg_time_s']:>9}")
    if args.csv:
        lines = ["kind,instances,calls,models,avg_time_s"]
        lines += [
            f"{r['kind']},{r['instances']},{r['calls']},{r['models']},{r['avg_time_s']}"
            for r in rows
        ]
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir,
                     default_budget=args.default_anytime)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_examples(args) -> int:
    for name in fixture_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mapfx")
    ap.add_argument("--seed", type=int, default=None,
                    help="reserved; the exact solver is deterministic")
    ap.add_argument("--format", choices=("json", "text"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an optimal plan")
    p.add_argument("instance")
    p.add_argument("--objective", help="comma-separated objective terms")
    p.add_argument("--anytime", type=float, default=None, metavar="SECONDS")
    p.add_argument("--out", help="write the plan JSON here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a plan against an instance")
    p.add_argument("instance")
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("explain", help="answer one query about a plan")
    p.add_argument("instance")
    p.add_argument("plan", help="plan JSON path, or '-' for none (QU)")
    p.add_argument("query", help="query JSON, or @path")
    p.add_argument("--session", help="session state file to read/update")
    p.add_argument("--anytime", type=float, default=None, metavar="SECONDS")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="answer every grounded query instance")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--kinds", help="comma-separated query kinds")
    p.add_argument("--anytime", type=float, default=None, metavar="SECONDS")
    p.add_argument("--csv", help="also write the table as CSV here")
    p.add_argument("--list", action="store_true",
                   help="print the grounded query instances as JSON and exit")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default=os.environ.get("MAPFX_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("MAPFX_PORT", "8400")))
    p.add_argument("--data-dir",
                   default=os.environ.get("MAPFX_DATA_DIR", "./mapfx-sessions"))
    p.add_argument("--default-anytime", type=float,
                   default=float(os.environ["MAPFX_DEFAULT_ANYTIME"])
                   if "MAPFX_DEFAULT_ANYTIME" in os.environ else None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("examples", help="list bundled fixture names")
    p.set_defaults(func=cmd_examples)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, QueryError, ConstraintError, ExplainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
