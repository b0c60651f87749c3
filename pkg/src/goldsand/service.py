"""HTTP session service: values on demand, interactive play for one human.

Sessions hold a live arrangement and a human role.  The engine side is
computed statelessly per move (remover_respond / pusher_respond), which is
what makes every session trace exactly replayable offline.  With a state
directory configured, each mutation rewrites the session's JSON snapshot;
snapshots are canonical (sorted keys, no spaces) so they round-trip
byte-identically.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Mapping

from fastapi import FastAPI, HTTPException, Request

from .core import (
    BUILTIN_KINDS,
    GoldSandError,
    InvalidMoveError,
    Arrangement,
    MoveSplit,
    apply_move,
    arrangement_from_dict,
    arrangement_to_dict,
    validate_split,
)
from .solver import solve_value
from .strategies import (
    StrategyConfig,
    pusher_respond,
    remover_respond,
    split_from_dict,
    split_to_dict,
)

MAX_LEVEL_BOUND = 16
MAX_R_BOUND = 12
MAX_CELLS_BOUND = 1024

_DUST = 1e-12


def _bounded_arrangement(data: Mapping) -> Arrangement:
    try:
        x = arrangement_from_dict(data)
    except GoldSandError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if x.max_level > MAX_LEVEL_BOUND:
        raise HTTPException(status_code=400, detail=f"maxLevel is capped at {MAX_LEVEL_BOUND}")
    if (x.system.r or 0) > MAX_R_BOUND:
        raise HTTPException(status_code=400, detail=f"r is capped at {MAX_R_BOUND}")
    if len(x.amounts) > MAX_CELLS_BOUND:
        raise HTTPException(status_code=400, detail=f"at most {MAX_CELLS_BOUND} sand cells")
    return x


def _value_payload(x: Arrangement, tol: float) -> dict:
    return solve_value(x, tol).to_dict()


@dataclass
class Session:
    session_id: str
    human_role: str
    cfg: StrategyConfig
    x: Arrangement
    status: str = "active"
    pending_split: MoveSplit | None = None
    total_harvested: float = 0.0
    total_destroyed: float = 0.0
    rounds: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def dust(self) -> float:
        return _DUST * max(1.0, self.total_harvested + self.total_destroyed + float(self.x.l1()))

    def view(self) -> dict:
        out = {
            "sessionId": self.session_id,
            "kind": self.x.system.kind,
            "humanRole": self.human_role,
            "status": self.status,
            "eps": self.cfg.epsilon,
            "arrangement": arrangement_to_dict(self.x),
            "round": len(self.rounds),
            "totalHarvested": self.total_harvested,
            "totalDestroyed": self.total_destroyed,
            "trace": self.rounds,
            "legalLabels": list(self.x.system.labels),
        }
        if not self.x.is_empty():
            out.update(_value_payload(self.x, self.cfg.solver_tol))
        if self.pending_split is not None:
            out["pendingSplit"] = split_to_dict(self.pending_split)
        return out

    def snapshot(self) -> dict:
        snap = {
            "sessionId": self.session_id,
            "humanRole": self.human_role,
            "eps": self.cfg.epsilon,
            "seed": self.cfg.seed,
            "status": self.status,
            "arrangement": arrangement_to_dict(self.x),
            "totalHarvested": self.total_harvested,
            "totalDestroyed": self.total_destroyed,
            "trace": self.rounds,
        }
        if self.pending_split is not None:
            snap["pendingSplit"] = split_to_dict(self.pending_split)
        return snap

    @classmethod
    def from_snapshot(cls, snap: Mapping) -> "Session":
        cfg = StrategyConfig(epsilon=snap["eps"], seed=snap.get("seed"))
        session = cls(
            session_id=snap["sessionId"],
            human_role=snap["humanRole"],
            cfg=cfg,
            x=arrangement_from_dict(snap["arrangement"]),
            status=snap["status"],
            total_harvested=snap["totalHarvested"],
            total_destroyed=snap["totalDestroyed"],
            rounds=list(snap["trace"]),
        )
        if "pendingSplit" in snap:
            session.pending_split = split_from_dict(snap["pendingSplit"])
        return session


def create_app(state_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="goldsand", version="0.1.0")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def persist(session: Session) -> None:
        if state_dir is None:
            return
        os.makedirs(state_dir, exist_ok=True)
        path = os.path.join(state_dir, f"{session.session_id}.json")
        blob = json.dumps(session.snapshot(), sort_keys=True, separators=(",", ":"))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(blob)

    def forget(session_id: str) -> None:
        if state_dir is None:
            return
        path = os.path.join(state_dir, f"{session_id}.json")
        if os.path.exists(path):
            os.remove(path)

    if state_dir is not None and os.path.isdir(state_dir):
        for name in sorted(os.listdir(state_dir)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(state_dir, name), "r", encoding="utf-8") as fh:
                snap = json.load(fh)
            session = Session.from_snapshot(snap)
            sessions[session.session_id] = session

    def get_session(session_id: str) -> Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def engine_pusher_split(session: Session) -> MoveSplit | None:
        """The engine's next split as Pusher, or None when the game is over."""
        if float(session.x.l1()) <= session.dust():
            return None
        try:
            split = pusher_respond(session.x, session.cfg)
        except GoldSandError:
            return None
        if split.is_empty():
            return None
        return split

    def finish_if_done(session: Session) -> None:
        if float(session.x.l1()) <= session.dust():
            session.status = "finished"

    def record_round(session: Session, split: MoveSplit, tau: int, outcome) -> dict:
        entry = {
            "round": len(session.rounds),
            "arrangementBefore": arrangement_to_dict(session.x),
            "split": split_to_dict(split),
            "tau": tau,
            "harvested": float(outcome.harvested),
            "destroyed": float(outcome.destroyed),
        }
        session.rounds.append(entry)
        session.total_harvested += float(outcome.harvested)
        session.total_destroyed += float(outcome.destroyed)
        session.x = outcome.next
        return entry

    @app.post("/v1/value")
    async def value(request: Request) -> dict:
        body = await request.json()
        if not isinstance(body, dict) or "arrangement" not in body:
            raise HTTPException(status_code=400, detail='body needs an "arrangement"')
        x = _bounded_arrangement(body["arrangement"])
        tol = body.get("tol", 1e-9)
        if not isinstance(tol, (int, float)):
            raise HTTPException(status_code=400, detail="tol must be a number")
        try:
            return _value_payload(x, float(tol))
        except GoldSandError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/v1/sessions")
    async def create_session(request: Request) -> dict:
        body = await request.json()
        if not isinstance(body, dict) or "arrangement" not in body:
            raise HTTPException(status_code=400, detail='body needs an "arrangement"')
        arr = dict(body["arrangement"])
        for key in ("kind", "r"):
            if key in body and key not in arr:
                arr[key] = body[key]
        if arr.get("kind") not in BUILTIN_KINDS:
            raise HTTPException(status_code=400, detail=f"unknown kind {arr.get('kind')!r}")
        role = body.get("humanRole", "pusher")
        if role not in ("pusher", "remover"):
            raise HTTPException(status_code=400, detail='humanRole must be "pusher" or "remover"')
        eps = body.get("eps", 0.01)
        try:
            cfg = StrategyConfig(epsilon=float(eps), seed=body.get("seed"))
        except (GoldSandError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        x = _bounded_arrangement(arr)

        # initial level-0 sand is already harvested
        swept = float(sum(a for (lvl, _), a in x.amounts.items() if lvl == 0))
        if swept:
            x = x.replace_amounts({c: a for c, a in x.amounts.items() if c[0] >= 1})

        session = Session(
            session_id=uuid.uuid4().hex[:12],
            human_role=role,
            cfg=cfg,
            x=x,
            total_harvested=swept,
        )
        if role == "remover":
            session.pending_split = engine_pusher_split(session)
            if session.pending_split is None:
                session.status = "finished"
        finish_if_done(session)
        with registry_lock:
            sessions[session.session_id] = session
        persist(session)
        return session.view()

    @app.get("/v1/sessions/{session_id}")
    async def get_view(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return session.view()

    @app.post("/v1/sessions/{session_id}/move")
    async def post_move(session_id: str, request: Request) -> dict:
        session = get_session(session_id)
        body = await request.json()
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        with session.lock:
            if session.status == "finished":
                raise HTTPException(status_code=409, detail="session is finished")
            if session.human_role == "pusher":
                if "split" not in body:
                    raise HTTPException(status_code=400, detail='a Pusher move needs a "split"')
                try:
                    split = split_from_dict(body["split"])
                    validate_split(session.x, split)
                    if split.is_empty():
                        raise InvalidMoveError("the running part must be nonempty")
                    tau = remover_respond(session.x, split, session.cfg)
                except GoldSandError as exc:
                    raise HTTPException(status_code=400, detail=str(exc))
                outcome = apply_move(session.x, split, tau)
                entry = record_round(session, split, tau, outcome)
                finish_if_done(session)
            else:
                if "tau" not in body:
                    raise HTTPException(status_code=400, detail='a Remover move needs a "tau"')
                tau = body["tau"]
                if not session.x.system.is_label(tau):
                    raise HTTPException(status_code=400, detail=f"bad label {tau!r}")
                if session.pending_split is None:
                    raise HTTPException(status_code=409, detail="no split is pending")
                split = session.pending_split
                outcome = apply_move(session.x, split, tau)
                entry = record_round(session, split, tau, outcome)
                session.pending_split = engine_pusher_split(session)
                if session.pending_split is None:
                    session.status = "finished"
                finish_if_done(session)
            persist(session)
            view = session.view()
            view["reply"] = entry
            return view

    @app.post("/v1/sessions/{session_id}/hint")
    async def hint(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.status == "finished":
                raise HTTPException(status_code=409, detail="session is finished")
            try:
                if session.human_role == "pusher":
                    split = pusher_respond(session.x, session.cfg)
                    return {"split": split_to_dict(split)}
                if session.pending_split is None:
                    raise HTTPException(status_code=409, detail="no split is pending")
                tau = remover_respond(session.x, session.pending_split, session.cfg)
                return {"tau": tau}
            except GoldSandError as exc:
                raise HTTPException(status_code=400, detail=str(exc))

    @app.delete("/v1/sessions/{session_id}")
    async def delete_session(session_id: str) -> dict:
        with registry_lock:
            if session_id not in sessions:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
            del sessions[session_id]
        forget(session_id)
        return {"deleted": session_id}

    return app
