"""Salted obfuscation of event patterns and events.

Every name and value is replaced by a salted SHA3-256 digest:

* activity:   H(activity || nonce)
* attr name:  H(name || nonce)
* attr value: H(name || value || nonce)

Matching is plain digest equality, so a contract never needs plaintext.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..hashing import salted_digest
from ..policy.ast import Equals, Event, EventPattern, Placeholder, PolicyError, Wildcard


@dataclass(frozen=True)
class ObfuscatedPattern:
    activity: bytes
    # (name digest, value digest); value None is the wildcard marker
    attributes: tuple[tuple[bytes, bytes | None], ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "activity": self.activity.hex(),
            "attributes": [[n.hex(), None if v is None else v.hex()] for n, v in self.attributes],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ObfuscatedPattern":
        return cls(
            bytes.fromhex(d["activity"]),
            tuple((bytes.fromhex(n), None if v is None else bytes.fromhex(v)) for n, v in d["attributes"]),
        )


@dataclass(frozen=True)
class ObfuscatedEvent:
    activity: bytes
    attributes: tuple[tuple[bytes, bytes], ...] = ()

    @property
    def value_digests(self) -> list[bytes]:
        return [v for _, v in self.attributes]

    def to_dict(self) -> dict[str, Any]:
        return {"activity": self.activity.hex(), "attributes": [[n.hex(), v.hex()] for n, v in self.attributes]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ObfuscatedEvent":
        return cls(
            bytes.fromhex(d["activity"]),
            tuple((bytes.fromhex(n), bytes.fromhex(v)) for n, v in d["attributes"]),
        )


def activity_digest(activity: str, nonce: bytes) -> bytes:
    return salted_digest(activity, nonce=nonce)


def name_digest(name: str, nonce: bytes) -> bytes:
    return salted_digest(name, nonce=nonce)


def value_digest(name: str, value: str, nonce: bytes) -> bytes:
    return salted_digest(name, value, nonce=nonce)


def obfuscate_pattern(pattern: EventPattern, nonce: bytes) -> ObfuscatedPattern:
    attrs = []
    for name, matcher in pattern.attributes:
        if isinstance(matcher, Placeholder):
            raise PolicyError("cannot obfuscate an uninstantiated template pattern")
        if isinstance(matcher, Wildcard):
            attrs.append((name_digest(name, nonce), None))
        else:
            assert isinstance(matcher, Equals)
            attrs.append((name_digest(name, nonce), value_digest(name, matcher.value, nonce)))
    # sorted so that the structure leaks nothing about declaration order
    return ObfuscatedPattern(activity_digest(pattern.activity, nonce), tuple(sorted(attrs, key=lambda a: a[0])))


def obfuscate_event(event: Event, nonce: bytes) -> ObfuscatedEvent:
    attrs = ((name_digest(n, nonce), value_digest(n, v, nonce)) for n, v in event.attributes)
    return ObfuscatedEvent(activity_digest(event.activity, nonce), tuple(sorted(attrs)))


def match_obfuscated(pattern: ObfuscatedPattern, event: ObfuscatedEvent) -> bool:
    if pattern.activity != event.activity:
        return False
    present = set(event.attributes)
    return all(v is None or (n, v) in present for n, v in pattern.attributes)
