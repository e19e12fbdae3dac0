"""HTTP facade over explanation sessions.

Sessions persist as one JSON file each under the data directory and are
reloaded lazily after a restart.  A query that outlives the
synchronous-response threshold keeps running in its worker thread and the
request returns 202 with a token to poll at /api/jobs/{token}.  Each
session admits one in-flight query at a time; a second concurrent query
is rejected with 409.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .explain import ExplainError, PremiseNotObserved, Session, answer
from .fixtures import fixture_names, fixture_plans, load_fixture_doc
from .model import (
    ModelError, load_instance, load_plan, plan_to_dict, save_instance,
)
from .queries import QueryError, parse_query
from .solver import SolveConfig, solve

SYNC_THRESHOLD_S = float(os.environ.get("MAPFX_ASYNC_THRESHOLD", "2.0"))


class SessionStore:
    def __init__(self, data_dir: str):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._mutex = threading.Lock()

    def _path(self, sid: str) -> Path:
        return self.dir / f"{sid}.json"

    def create(self, sess: Session) -> str:
        sid = uuid.uuid4().hex[:12]
        with self._mutex:
            self._cache[sid] = sess
            self._locks[sid] = threading.Lock()
        self.save(sid)
        return sid

    def get(self, sid: str) -> Session:
        with self._mutex:
            if sid in self._cache:
                return self._cache[sid]
        path = self._path(sid)
        if not path.exists():
            raise KeyError(sid)
        sess = Session.from_dict(json.loads(path.read_text(encoding="utf-8")))
        with self._mutex:
            self._cache.setdefault(sid, sess)
            self._locks.setdefault(sid, threading.Lock())
        return self._cache[sid]

    def lock(self, sid: str) -> threading.Lock:
        with self._mutex:
            if sid not in self._locks:
                self._locks[sid] = threading.Lock()
            return self._locks[sid]

    def save(self, sid: str) -> None:
        sess = self._cache[sid]
        tmp = self._path(sid).with_suffix(".tmp")
        tmp.write_text(json.dumps(sess.to_dict()), encoding="utf-8")
        tmp.replace(self._path(sid))


class JobRegistry:
    def __init__(self):
        self._jobs: dict[str, dict] = {}
        self._mutex = threading.Lock()

    def create(self) -> str:
        token = uuid.uuid4().hex[:12]
        with self._mutex:
            self._jobs[token] = {"status": "running"}
        return token

    def finish(self, token: str, payload: dict, status_code: int = 200) -> None:
        with self._mutex:
            self._jobs[token] = {
                "status": "done", "result": payload, "code": status_code,
            }

    def fail(self, token: str, detail: str, status_code: int) -> None:
        with self._mutex:
            self._jobs[token] = {
                "status": "error", "detail": detail, "code": status_code,
            }

    def get(self, token: str) -> dict | None:
        with self._mutex:
            return self._jobs.get(token)


def _session_view(sid: str, sess: Session) -> dict:
    return {
        "session_id": sid,
        "has_plan": sess.current_plan is not None,
        "plan": plan_to_dict(sess.current_plan)
        if sess.current_plan is not None else None,
        "instance": json.loads(save_instance(sess.instance)),
        "accumulated": [
            {"constraint": c.to_dict(), "text": c.render()}
            for c in sess.accumulated
        ],
        "history_length": len(sess.history),
    }


def create_app(data_dir: str = "./mapfx-sessions",
               default_budget: float | None = None) -> FastAPI:
    app = FastAPI(title="mapfx service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(data_dir)
    jobs = JobRegistry()
    app.state.store = store
    app.state.jobs = jobs

    def config(budget: float | None) -> SolveConfig:
        budget = budget if budget is not None else default_budget
        if budget:
            return SolveConfig(mode="anytime", budget=budget)
        return SolveConfig()

    @app.post("/api/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "request body must be JSON") from None
        if not isinstance(body, dict) or "instance" not in body:
            raise HTTPException(400, "body needs an 'instance' field")
        try:
            inst = load_instance(body["instance"])
        except ModelError as exc:
            raise HTTPException(400, f"invalid instance: {exc}") from None
        plan = None
        infeasible = False
        if body.get("plan") is not None:
            try:
                plan = load_plan(body["plan"], inst)
            except ModelError as exc:
                raise HTTPException(400, f"invalid plan: {exc}") from None
        else:
            out = solve(inst, cfg=config(body.get("anytime")))
            if out.plan is None:
                infeasible = True
            else:
                plan = out.plan
        try:
            sess = Session.start(inst, plan, config=config(body.get("anytime")))
        except ExplainError as exc:
            raise HTTPException(400, str(exc)) from None
        sid = store.create(sess)
        view = _session_view(sid, sess)
        if infeasible:
            view["detail"] = "instance has no solution; ask QU about it"
            return JSONResponse(view, status_code=422)
        return view

    def run_query(sid: str, sess: Session, q, budget) -> tuple[dict, int]:
        prior_cfg = sess.config
        if budget is not None:
            sess.config = config(budget)
        try:
            expl = answer(sess, q)
        finally:
            sess.config = prior_cfg
        store.save(sid)
        payload = expl.to_dict()
        payload["accumulated"] = [
            {"constraint": c.to_dict(), "text": c.render()}
            for c in sess.accumulated
        ]
        payload["current_plan"] = (plan_to_dict(sess.current_plan)
                                   if sess.current_plan else None)
        return payload, 200

    @app.post("/api/sessions/{sid}/query")
    async def post_query(sid: str, request: Request):
        try:
            sess = store.get(sid)
        except KeyError:
            raise HTTPException(404, "unknown session") from None
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "request body must be JSON") from None
        try:
            q = parse_query(body.get("query", body))
        except QueryError as exc:
            raise HTTPException(400, f"invalid query: {exc}") from None
        lock = store.lock(sid)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, "a query is already running on this session")

        result: dict = {}

        def work(token=None):
            try:
                payload, code = run_query(sid, sess, q, body.get("anytime"))
                result.update(payload=payload, code=code)
                if token:
                    jobs.finish(token, payload, code)
            except PremiseNotObserved as exc:
                result.update(error=str(exc), code=422)
                if token:
                    jobs.fail(token, str(exc), 422)
            except (QueryError, ExplainError) as exc:
                result.update(error=str(exc), code=400)
                if token:
                    jobs.fail(token, str(exc), 400)
            finally:
                lock.release()

        token = jobs.create()
        thread = threading.Thread(target=work, args=(token,), daemon=True)
        thread.start()
        thread.join(timeout=SYNC_THRESHOLD_S)
        if thread.is_alive():
            return JSONResponse({"job": token}, status_code=202)
        if "error" in result:
            raise HTTPException(result["code"], result["error"])
        return JSONResponse(result["payload"], status_code=result["code"])

    @app.get("/api/jobs/{token}")
    async def get_job(token: str):
        job = jobs.get(token)
        if job is None:
            raise HTTPException(404, "unknown job")
        if job["status"] == "running":
            return JSONResponse({"status": "running"}, status_code=202)
        if job["status"] == "error":
            raise HTTPException(job["code"], job["detail"])
        return JSONResponse(job["result"], status_code=job["code"])

    @app.get("/api/sessions/{sid}")
    async def get_session(sid: str):
        try:
            sess = store.get(sid)
        except KeyError:
            raise HTTPException(404, "unknown session") from None
        return _session_view(sid, sess)

    @app.get("/api/sessions/{sid}/history")
    async def get_history(sid: str):
        try:
            sess = store.get(sid)
        except KeyError:
            raise HTTPException(404, "unknown session") from None
        return {
            "history": [
                {
                    "query": e.query.to_dict(),
                    "explanation": e.explanation.to_dict(),
                    "added_constraint": e.added_constraint,
                }
                for e in sess.history
            ]
        }

    @app.post("/api/sessions/{sid}/pop")
    async def pop_session(sid: str):
        try:
            sess = store.get(sid)
        except KeyError:
            raise HTTPException(404, "unknown session") from None
        lock = store.lock(sid)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, "a query is running on this session")
        try:
            if not sess.history:
                raise HTTPException(409, "history is empty")
            sess.pop()
            store.save(sid)
        finally:
            lock.release()
        return _session_view(sid, sess)

    @app.post("/api/sessions/{sid}/reset")
    async def reset_session(sid: str):
        try:
            sess = store.get(sid)
        except KeyError:
            raise HTTPException(404, "unknown session") from None
        lock = store.lock(sid)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, "a query is running on this session")
        try:
            sess.reset()
            store.save(sid)
        finally:
            lock.release()
        return _session_view(sid, sess)

    @app.get("/api/instances/examples")
    async def examples():
        out = []
        for name in fixture_names():
            entry = {"name": name, "instance": load_fixture_doc(name)}
            plans = fixture_plans(name)
            if plans:
                entry["plan"] = load_fixture_doc(plans[0])
            out.append(entry)
        return {"examples": out}

    ui_dir = Path(__file__).parent / "ui"
    if ui_dir.is_dir():  # built frontend assets, when present
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
