"""Wire types for the gateway.

Server-to-client frames are JSON text: {kind, sequence, payload} with kind
one of hello/state/ack/error. Clients speak two message shapes: a hello
claiming a role, then request-id'd commands. Every client message decodes
to a model here or raises a diagnosable ValueError — the socket layer
never sees a raw exception from hostile bytes.
"""

from __future__ import annotations

import json
from enum import Enum
from typing import Literal, Union

from pydantic import BaseModel, Field, ValidationError

PROTOCOL_VERSION = 1


class FrameKind(str, Enum):
    HELLO = "hello"
    STATE = "state"
    ACK = "ack"
    ERROR = "error"


class Role(str, Enum):
    CHOREOGRAPHER = "choreographer"
    OBSERVER = "observer"


class ClientHello(BaseModel):
    hello: "HelloBody"


class HelloBody(BaseModel):
    role: Role = Role.OBSERVER
    protocol_version: int = PROTOCOL_VERSION


class ClientCommand(BaseModel):
    request_id: Union[int, str]
    command: dict


def parse_client_message(text: str | bytes) -> ClientHello | ClientCommand:
    """Decode one client message; raises ValueError with a reason on
    anything malformed."""
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"message is not valid UTF-8: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"message is not valid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValueError("message must be a JSON object")
    model = ClientHello if "hello" in obj else ClientCommand
    try:
        return model.model_validate(obj)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise ValueError(f"invalid {model.__name__}: {location}: {first['msg']}") from exc


def frame(kind: FrameKind, sequence: int, payload: dict) -> str:
    return json.dumps(
        {"kind": kind.value, "sequence": sequence, "payload": payload},
        separators=(",", ":"),
        sort_keys=True,
    )


# ---------------------------------------------------------------------- #
# REST response models


class HealthResponse(BaseModel):
    status: Literal["ok", "error"]
    tick: int
    running: bool
    error: str | None = None


class ConfigResponse(BaseModel):
    protocol_version: int
    config: dict
    robots: list[list[float]]


class SnapshotResponse(BaseModel):
    snapshot: dict


class ModeStatsResponse(BaseModel):
    occupancy_s: dict[str, float] = Field(default_factory=dict)


class GestureStatsResponse(BaseModel):
    counts: dict[str, int] = Field(default_factory=dict)
