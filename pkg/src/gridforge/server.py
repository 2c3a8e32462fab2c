"""JSON-over-HTTP service exposing the engine to the web IDE.

All simulation state lives server-side in named sessions; the UI only ever
sends protocol messages.  Sessions are in-memory, serialized per session,
isolated across sessions, and expire after 30 idle minutes.

Status codes: 400 schema violations, 404 unknown session, 409 stepping a
finished episode.
"""

from __future__ import annotations

import threading
import time

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from gridforge import engine, observers, trajectory
from gridforge.env import ResetOptions
from gridforge.errors import (
    EmptyLevelError,
    EpisodeOverError,
    BadActionError,
    GdySyntaxError,
    GridforgeError,
    HashMismatchError,
    LevelUnavailableError,
    NoLevelsError,
    SchemaError,
    UnknownCharacterError,
)
from gridforge.levelgen import GenParams
from gridforge.levels import LevelRef, resolve_level
from gridforge.model import GdyDocument
from gridforge.parser import LevelLayout, parse_gdy, parse_level, serialize_level

DEFAULT_PORT = 8877
SESSION_TIMEOUT_SECONDS = 30 * 60

API = "/api/v1"


class _ApiError(Exception):
    def __init__(self, status: int, message: str, details=None):
        self.status = status
        self.message = message
        self.details = details or []
        super().__init__(message)


def _bad_request(message: str, details=None) -> _ApiError:
    return _ApiError(400, message, details)


class Session:
    def __init__(self, session_id: str, document: GdyDocument):
        self.id = session_id
        self.document = document
        self.game = engine.compile_game(document)
        self.state: engine.GameState | None = None
        self.last_reset: ResetOptions | None = None
        self.recorder: trajectory.Recorder | None = None
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


def _diagnostics_json(diagnostics) -> list[dict]:
    return [
        {"severity": d.severity, "code": d.code, "path": d.path, "message": d.message}
        for d in diagnostics
    ]


def _render_json(render: observers.RenderMap) -> dict:
    return {
        "width": render.width,
        "height": render.height,
        "cells": [
            [
                [
                    {
                        "object": tile.object_name,
                        "tile": tile.tile_key,
                        "orientation": tile.orientation,
                        "autotile": tile.autotile_index,
                    }
                    for tile in cell
                ]
                for cell in row
            ]
            for row in render.cells
        ],
    }


def _layout_json(layout: LevelLayout) -> dict:
    return {
        "width": layout.width,
        "height": layout.height,
        "placements": [{"x": x, "y": y, "object": name} for x, y, name in layout.placements],
    }


def _state_view(session: Session) -> dict:
    state = session.state
    return {
        "render": _render_json(observers.render_map(state)),
        "variables": dict(state.player_variables),
        "mask": engine.valid_action_mask(state),
        "status": state.status,
        "step": state.step_count,
    }


def _parse_level_ref(data, path: str = "level") -> LevelRef:
    if not isinstance(data, dict) or len(data) != 1:
        raise _bad_request(f"{path} must hold exactly one of index, string, generator")
    ((kind, value),) = data.items()
    if kind == "index":
        if not isinstance(value, int) or isinstance(value, bool):
            raise _bad_request(f"{path}.index must be an integer")
        return LevelRef(index=value)
    if kind == "string":
        if not isinstance(value, str):
            raise _bad_request(f"{path}.string must be a string")
        return LevelRef(string=value)
    if kind == "generator":
        if not isinstance(value, dict):
            raise _bad_request(f"{path}.generator must be an object")
        known = {"seed", "width", "height"}
        unknown = set(value) - known
        if unknown:
            raise _bad_request(f"unknown generator fields {sorted(unknown)}")
        try:
            params = GenParams(
                seed=int(value.get("seed", 0)),
                width=int(value.get("width", 24)),
                height=int(value.get("height", 24)),
            )
        except (TypeError, ValueError) as exc:
            raise _bad_request(f"bad generator params: {exc}") from exc
        return LevelRef(generator=params)
    raise _bad_request(f"unknown level ref kind {kind!r}")


def create_app(session_timeout: float = SESSION_TIMEOUT_SECONDS) -> FastAPI:
    app = FastAPI(title="gridforge", docs_url=None, redoc_url=None)
    # The IDE is served as static files from a different origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    counter = {"next": 1}

    @app.exception_handler(_ApiError)
    async def _api_error_handler(_request, exc: _ApiError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.message, "details": exc.details}
        )

    def _purge_expired() -> None:
        now = time.monotonic()
        with registry_lock:
            expired = [sid for sid, s in sessions.items() if now - s.last_access > session_timeout]
            for sid in expired:
                del sessions[sid]

    def _get_session(session_id: str) -> Session:
        _purge_expired()
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise _ApiError(404, f"unknown session {session_id!r}")
        session.last_access = time.monotonic()
        return session

    async def _json_body(request: Request) -> dict:
        try:
            data = await request.json()
        except Exception as exc:
            raise _bad_request(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise _bad_request("request body must be a JSON object")
        return data

    def _required_text(data: dict, key: str) -> str:
        value = data.get(key)
        if not isinstance(value, str):
            raise _bad_request(f"{key!r} must be a string")
        return value

    @app.post(API + "/validate")
    async def validate_gdy(request: Request):
        data = await _json_body(request)
        text = _required_text(data, "gdy_text")
        try:
            parse_gdy(text)
        except GdySyntaxError as exc:
            diag = {"severity": "error", "code": "SYNTAX", "path": "$", "message": str(exc)}
            return {"valid": False, "diagnostics": [diag]}
        except SchemaError as exc:
            return {"valid": False, "diagnostics": _diagnostics_json(exc.diagnostics)}
        return {"valid": True, "diagnostics": []}

    @app.post(API + "/session")
    async def create_session(request: Request):
        data = await _json_body(request)
        text = _required_text(data, "gdy_text")
        try:
            document = parse_gdy(text)
        except GdySyntaxError as exc:
            raise _bad_request(f"GDY syntax error: {exc}")
        except SchemaError as exc:
            raise _bad_request("GDY schema error", _diagnostics_json(exc.diagnostics))
        _purge_expired()
        with registry_lock:
            session_id = f"s{counter['next']}"
            counter["next"] += 1
            session = Session(session_id, document)
            sessions[session_id] = session
        return {
            "session_id": session_id,
            "env_name": document.environment.name,
            "gdy_hash": document.source_hash_hex,
            "objects": [
                {
                    "name": o.name,
                    "map_char": o.map_character,
                    "tile": o.tile_spec().key,
                    "z": o.z,
                    "autotile": o.tile_spec().autotile,
                }
                for o in document.objects
            ],
            "action_space": [
                {"id": e.id, "action": e.action, "input": e.input, "label": e.label, "key": e.key}
                for e in session.game.action_space.entries
            ],
            "levels": [
                {"index": i, "level_string": level}
                for i, level in enumerate(document.environment.levels)
            ],
        }

    @app.post(API + "/session/{session_id}/reset")
    async def reset_session(session_id: str, request: Request):
        session = _get_session(session_id)
        data = await _json_body(request)
        level = _parse_level_ref(data.get("level", {"index": 0}))
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise _bad_request("'seed' must be an integer")
        with session.lock:
            try:
                layout, _ = resolve_level(session.document, level)
                session.state = engine.reset(session.game, layout, seed)
            except (LevelUnavailableError, NoLevelsError, UnknownCharacterError,
                    EmptyLevelError, GridforgeError) as exc:
                raise _bad_request(str(exc))
            session.last_reset = ResetOptions(level=level, seed=seed)
            session.recorder = None
            return _state_view(session)

    @app.post(API + "/session/{session_id}/step")
    async def step_session(session_id: str, request: Request):
        session = _get_session(session_id)
        data = await _json_body(request)
        action_id = data.get("action_id")
        if not isinstance(action_id, int) or isinstance(action_id, bool):
            raise _bad_request("'action_id' must be an integer")
        with session.lock:
            if session.state is None:
                raise _ApiError(409, "session has not been reset")
            try:
                if session.recorder is not None:
                    result = session.recorder.step(action_id)
                    session.state = session.recorder.state
                else:
                    result = engine.step(session.state, action_id)
            except EpisodeOverError as exc:
                raise _ApiError(409, str(exc))
            except BadActionError as exc:
                raise _bad_request(str(exc))
            view = _state_view(session)
            view.update(
                {
                    "reward": result.reward,
                    "terminated": result.terminated,
                    "truncated": result.truncated,
                    "events": [
                        {"command": kind, "object": name, "x": x, "y": y}
                        for kind, name, (x, y) in result.events
                    ],
                }
            )
            return view

    @app.post(API + "/session/{session_id}/parse_level")
    async def parse_level_endpoint(session_id: str, request: Request):
        session = _get_session(session_id)
        data = await _json_body(request)
        text = _required_text(data, "level_string")
        try:
            layout = parse_level(session.document, text)
        except (UnknownCharacterError, EmptyLevelError) as exc:
            raise _bad_request(str(exc))
        return {"layout": _layout_json(layout)}

    @app.post(API + "/session/{session_id}/serialize_level")
    async def serialize_level_endpoint(session_id: str, request: Request):
        session = _get_session(session_id)
        data = await _json_body(request)
        layout_data = data.get("layout")
        if not isinstance(layout_data, dict):
            raise _bad_request("'layout' must be an object")
        try:
            placements = tuple(
                (int(p["x"]), int(p["y"]), str(p["object"]))
                for p in layout_data.get("placements", [])
            )
            layout = LevelLayout(
                width=int(layout_data["width"]),
                height=int(layout_data["height"]),
                placements=placements,
            )
            return {"level_string": serialize_level(layout, session.document)}
        except (KeyError, TypeError, ValueError) as exc:
            raise _bad_request(f"bad layout: {exc}")

    @app.post(API + "/session/{session_id}/record/start")
    async def record_start(session_id: str, request: Request):
        session = _get_session(session_id)
        await request.body()
        with session.lock:
            if session.last_reset is None:
                raise _ApiError(409, "reset the session before recording")
            options = session.last_reset
            try:
                session.recorder = trajectory.Recorder(
                    session.document, options.level, options.seed, game=session.game
                )
            except ValueError as exc:
                raise _bad_request(str(exc))
            session.state = session.recorder.state
            view = _state_view(session)
            view["recording"] = True
            return view

    @app.post(API + "/session/{session_id}/record/stop")
    async def record_stop(session_id: str, request: Request):
        session = _get_session(session_id)
        await request.body()
        with session.lock:
            if session.recorder is None:
                raise _ApiError(409, "no recording in progress")
            record = session.recorder.finish()
            session.recorder = None
            return {"trajectory": trajectory.as_dict(record)}

    @app.post(API + "/session/{session_id}/replay")
    async def replay_endpoint(session_id: str, request: Request):
        session = _get_session(session_id)
        data = await _json_body(request)
        record_data = data.get("trajectory")
        if not isinstance(record_data, dict):
            raise _bad_request("'trajectory' must be an object")
        try:
            record = trajectory.from_dict(record_data)
        except SchemaError as exc:
            raise _bad_request("bad trajectory", _diagnostics_json(exc.diagnostics))
        with session.lock:
            try:
                report = trajectory.replay(session.document, record, game=session.game)
            except HashMismatchError as exc:
                raise _ApiError(409, str(exc))
            except (LevelUnavailableError, GridforgeError) as exc:
                raise _bad_request(str(exc))
        return {
            "report": {
                "total_reward": report.total_reward,
                "status": report.status,
                "final_hash": report.final_hash,
                "verified": report.verified,
            }
        }

    @app.delete(API + "/session/{session_id}")
    async def delete_session(session_id: str):
        _purge_expired()
        with registry_lock:
            if session_id not in sessions:
                raise _ApiError(404, f"unknown session {session_id!r}")
            del sessions[session_id]
        return {"deleted": True}

    return app
