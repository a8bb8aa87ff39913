"""Hash primitives and canonical encodings shared by every layer.

All digests are SHA3-256 (FIPS 202). Commitment digests hash a
length-prefixed encoding of their text fields followed by the raw
32-byte nonce::

    enc(f1) || enc(f2) || ... || nonce
    enc(f)  = len(utf8(f)) as 4-byte big-endian || utf8(f)

Structured objects (blocks, transactions, blueprints) are hashed over
their canonical JSON form: sorted keys, no whitespace, ASCII only.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

NONCE_SIZE = 32
DIGEST_SIZE = 32


def sha3(data: bytes) -> bytes:
    return hashlib.sha3_256(data).digest()


def encode_fields(*fields: str) -> bytes:
    out = bytearray()
    for field in fields:
        raw = field.encode("utf-8")
        out += len(raw).to_bytes(4, "big")
        out += raw
    return bytes(out)


def check_nonce(nonce: bytes) -> None:
    if not isinstance(nonce, (bytes, bytearray)) or len(nonce) != NONCE_SIZE:
        raise ValueError(f"nonce must be exactly {NONCE_SIZE} bytes")


def salted_digest(*fields: str, nonce: bytes) -> bytes:
    """SHA3-256 over the length-prefixed fields followed by the nonce."""
    check_nonce(nonce)
    return sha3(encode_fields(*fields) + bytes(nonce))


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def selector(name: str) -> bytes:
    """4-byte function selector, first bytes of SHA3(name)."""
    return sha3(name.encode("utf-8"))[:4]


def topic(name: str) -> bytes:
    """32-byte log topic for a named event signature."""
    return sha3(name.encode("utf-8"))


def word(value: int) -> bytes:
    return value.to_bytes(32, "big")


def to_int(value: bytes) -> int:
    return int.from_bytes(value, "big")


def address_word(address: bytes) -> bytes:
    return bytes(12) + address
