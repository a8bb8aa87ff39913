"""Log topics and record encodings shared across the package."""

from __future__ import annotations

from dataclasses import dataclass

from ..hashing import topic, word

USAGE_EVENT_RECORD = topic("UsageEventRecord")
TRANSFER_EVENT = topic("TransferEvent")
VIOLATION_EVENT = topic("ViolationEvent")
CHILD_LINKED = topic("ChildLinked")
JOINED = topic("Joined")
LEFT = topic("Left")
DATA_REFERENCE = topic("DataReference")
BULK_EVENT = topic("BulkEvent")

DECISION_CODES = {"allow": 1, "deny": 2, "modify": 3, "delay": 4}
DECISION_NAMES = {v: k for k, v in DECISION_CODES.items()}
NOTIFY = 1
TRANSFER = 2
RECORD_KINDS = {NOTIFY: "notify", TRANSFER: "transfer"}


@dataclass(frozen=True)
class UsageRecord:
    """Decoded ``UsageEventRecord`` log.

    Topics are ``[activity digest, sig]`` so the usual topic0 filter
    selects records by obfuscated activity. The data is one packed word
    ``kind << 72 | decision << 64 | tick`` followed by the event's
    attribute value digests.
    """

    activity: bytes
    decision: str
    kind: str
    tick: int
    value_digests: tuple[bytes, ...]

    def encode_data(self) -> bytes:
        kinds = {v: k for k, v in RECORD_KINDS.items()}
        head = kinds[self.kind] << 72 | DECISION_CODES[self.decision] << 64 | self.tick
        return word(head) + b"".join(self.value_digests)

    @classmethod
    def decode(cls, topics: list[bytes], data: bytes) -> "UsageRecord":
        if len(topics) != 2 or topics[1] != USAGE_EVENT_RECORD or len(data) % 32:
            raise ValueError("not a usage event record")
        head = int.from_bytes(data[:32], "big")
        digests = tuple(data[i : i + 32] for i in range(32, len(data), 32))
        return cls(
            topics[0],
            DECISION_NAMES[(head >> 64) & 0xFF],
            RECORD_KINDS[(head >> 72) & 0xFF],
            head & ((1 << 64) - 1),
            digests,
        )


def is_usage_record(topics: list[bytes]) -> bool:
    return len(topics) == 2 and topics[1] == USAGE_EVENT_RECORD
