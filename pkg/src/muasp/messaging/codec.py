"""Wire codec: a 4-byte big-endian length followed by one UTF-8 JSON object.

Atoms travel in program surface syntax, e.g. ``"want_go(c1,t1,ns,2)"``.
"""

from __future__ import annotations

import json
import struct

from ..asp import AspError, Atom, parse_ground_atom
from ..query import Query, QueryMode, QueryResult
from .message import Message, MessageError, Performative

HEADER = struct.Struct(">I")
MAX_FRAME = 16 * 1024 * 1024


class CodecError(MessageError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def _content_to_json(c) -> dict:
    if isinstance(c, Atom):
        return {"atom": str(c)}
    if isinstance(c, tuple):
        return {"atoms": [str(a) for a in c]}
    if isinstance(c, QueryResult):
        return {"result": {"mode": c.mode.value, "atom": str(c.atom), "value": c.value}}
    if isinstance(c, Query):
        return {"query": {"mode": c.mode.value, "atom": str(c.atom)}}
    if isinstance(c, str):
        return {"text": c}
    raise MessageError(f"unsupported content {c!r}")


def _content_from_json(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("content must be an object with exactly one key")
    (kind, value), = obj.items()
    if kind == "atom":
        return parse_ground_atom(value)
    if kind == "atoms":
        return tuple(parse_ground_atom(v) for v in value)
    if kind == "result":
        return QueryResult(QueryMode.parse(value["mode"]), parse_ground_atom(value["atom"]), bool(value["value"]))
    if kind == "query":
        return Query(QueryMode.parse(value["mode"]), parse_ground_atom(value["atom"]))
    if kind == "text":
        if not isinstance(value, str):
            raise ValueError("text content must be a string")
        return value
    raise ValueError(f"unknown content kind {kind!r}")


def encode_payload(m: Message) -> bytes:
    m.validate()
    obj = {
        "performative": m.performative.value,
        "sender": m.sender,
        "receiver": m.receiver,
        "id": m.id,
        "in_reply_to": m.in_reply_to,
        "content": _content_to_json(m.content),
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def encode(m: Message) -> bytes:
    payload = encode_payload(m)
    return HEADER.pack(len(payload)) + payload


def decode_payload(payload: bytes, base: int = 0) -> Message:
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CodecError(f"invalid UTF-8: {e.reason}", base + e.start) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise CodecError(f"invalid JSON: {e.msg}", base + len(text[: e.pos].encode("utf-8"))) from None
    try:
        m = Message(
            Performative(obj["performative"]),
            _str(obj["sender"]),
            _str(obj["receiver"]),
            _str(obj["id"]),
            _content_from_json(obj["content"]),
            in_reply_to=None if obj.get("in_reply_to") is None else _str(obj["in_reply_to"]),
        )
        m.validate()
    except (KeyError, TypeError, ValueError, AspError) as e:
        raise CodecError(f"malformed message: {e}", base) from None
    return m


def _str(v) -> str:
    if not isinstance(v, str):
        raise TypeError(f"expected a string, got {v!r}")
    return v


def decode(data: bytes) -> Message:
    """Decode exactly one frame; raises :class:`CodecError` with the offset."""
    if len(data) < HEADER.size:
        raise CodecError("truncated length header", len(data))
    (length,) = HEADER.unpack_from(data)
    end = HEADER.size + length
    if len(data) < end:
        raise CodecError(f"truncated payload: expected {length} bytes", len(data))
    if len(data) > end:
        raise CodecError("trailing bytes after frame", end)
    return decode_payload(data[HEADER.size:], HEADER.size)


class FrameDecoder:
    """Incremental decoder for a byte stream carrying consecutive frames."""

    def __init__(self) -> None:
        self._buf = bytearray()
        self._consumed = 0

    def feed(self, data: bytes) -> list[Message]:
        self._buf += data
        out = []
        while len(self._buf) >= HEADER.size:
            (length,) = HEADER.unpack_from(self._buf)
            if length > MAX_FRAME:
                raise CodecError(f"frame of {length} bytes exceeds limit", self._consumed)
            end = HEADER.size + length
            if len(self._buf) < end:
                break
            out.append(decode_payload(bytes(self._buf[HEADER.size:end]), self._consumed + HEADER.size))
            del self._buf[:end]
            self._consumed += end
        return out

    @property
    def pending(self) -> int:
        return len(self._buf)
