"""Wire message schema shared by every transport and client.

One UTF-8 JSON object per datagram / frame, canonical form (sorted keys,
no extra whitespace) so identical game trajectories serialize to
byte-identical payloads.  Field names are fixed:

    {"v": 1, "type": "...", "seq": n, "session": "...", "player": i,
     "body": {...}}

Types: HELLO, CREATE, JOIN, STATE, ACT, ACK, RESULT, ERROR, PING.
See docs/protocol.md for the grammar, state machine, and examples.
"""

import json
from dataclasses import dataclass, field

PROTOCOL_VERSION = 1

MESSAGE_TYPES = (
    "HELLO",
    "CREATE",
    "JOIN",
    "STATE",
    "ACT",
    "ACK",
    "RESULT",
    "ERROR",
    "PING",
)

MAX_MESSAGE_BYTES = 8192


class ProtocolError(ValueError):
    """Malformed or out-of-contract message; the reason is the message."""


@dataclass
class Message:
    type: str
    seq: int = 0
    session: str = ""
    player: int = -1
    body: dict = field(default_factory=dict)
    version: int = PROTOCOL_VERSION


def encode_message(msg: Message) -> bytes:
    data = {
        "v": msg.version,
        "type": msg.type,
        "seq": msg.seq,
        "session": msg.session,
        "player": msg.player,
        "body": msg.body,
    }
    raw = json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")
    if len(raw) > MAX_MESSAGE_BYTES:
        raise ProtocolError(f"message too large: {len(raw)} bytes")
    return raw


def decode_message(raw: bytes) -> Message:
    if len(raw) > MAX_MESSAGE_BYTES:
        raise ProtocolError(f"message too large: {len(raw)} bytes")
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProtocolError("message must be a JSON object")
    for key in ("v", "type"):
        if key not in data:
            raise ProtocolError(f"missing field {key!r}")
    if data["type"] not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {data['type']!r}")
    if not isinstance(data.get("body", {}), dict):
        raise ProtocolError("body must be an object")
    return Message(
        type=data["type"],
        seq=int(data.get("seq", 0)),
        session=str(data.get("session", "")),
        player=int(data.get("player", -1)),
        body=data.get("body", {}),
        version=int(data["v"]),
    )


def error_message(reason: str, session: str = "", seq: int = 0) -> Message:
    return Message(type="ERROR", session=session, seq=seq, body={"reason": reason})
