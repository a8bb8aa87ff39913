"""Call payload encoding.

A payload is ``selector(name) || canonical_json(args)``. Byte strings
inside ``args`` travel as ``"0x"``-prefixed hex; plain strings must
therefore not start with ``0x``.
"""

from __future__ import annotations

import json
from typing import Any

from ..hashing import canonical_json, selector


class AbiError(ValueError):
    pass


def to_jsonable(value: Any) -> Any:
    if isinstance(value, (bytes, bytearray)):
        return "0x" + bytes(value).hex()
    if isinstance(value, str):
        if value.startswith("0x"):
            raise AbiError(f"string argument may not start with 0x: {value!r}")
        return value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int)):
        return value
    raise AbiError(f"unsupported argument type {type(value).__name__}")


def from_jsonable(value: Any) -> Any:
    if isinstance(value, str) and value.startswith("0x"):
        return bytes.fromhex(value[2:])
    if isinstance(value, dict):
        return {k: from_jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [from_jsonable(v) for v in value]
    return value


def encode_call(name: str, args: dict[str, Any] | None = None) -> bytes:
    return selector(name) + canonical_json(to_jsonable(args or {}))


def decode_args(payload: bytes) -> tuple[bytes, dict[str, Any]]:
    if len(payload) < 4:
        raise AbiError("payload shorter than a selector")
    try:
        args = json.loads(payload[4:].decode("ascii")) if len(payload) > 4 else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise AbiError(f"malformed argument encoding: {exc}") from exc
    if not isinstance(args, dict):
        raise AbiError("arguments must encode an object")
    return payload[:4], from_jsonable(args)
