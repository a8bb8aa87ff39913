"""Compile a mechanism into an obfuscated operator-tree blueprint.

The condition (and the optional violation clause) become a flat list of
nodes in pre-order. Stateful nodes get a fixed storage layout:

* ``within``: a one-bit flag and the last closed tick at which the child
  held (64 bits).
* ``atmost`` (cardinality): a ring of ``window`` buckets, one storage
  slot each holding ``(tick tag, count)``, plus a packed head index and
  running count.
* ``match``: a one-bit "seen at the current tick" marker.

Scalar fields are packed into 32-byte words. The top byte of every packed
word is a non-zero sentinel written at deployment, so later updates pay
the cheaper existing-slot write price. A node's scalar fields never
straddle two words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..hashing import canonical_json, check_nonce, sha3
from ..policy.ast import (
    DENY,
    And,
    Cardinality,
    Condition,
    EventMatch,
    EventPattern,
    Mechanism,
    Not,
    Or,
    Within,
)
from .obfuscation import ObfuscatedPattern, name_digest, obfuscate_pattern, value_digest

WORD_BITS = 256
SENTINEL_SHIFT = 248
SENTINEL = 1
TICK_BITS = 64
COUNT_BITS = 64
HEAD_BITS = 32

# scalar fields per operator: (field, bits)
NODE_FIELDS: dict[str, tuple[tuple[str, int], ...]] = {
    "match": (("hit", 1),),
    "within": (("flag", 1), ("last", TICK_BITS)),
    "atmost": (("head", HEAD_BITS), ("count", COUNT_BITS)),
    "not": (),
    "and": (),
    "or": (),
}
HEADER_FIELDS = (("tick", TICK_BITS), ("violated", 1))


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSlot:
    slot: int
    offset: int
    bits: int

    @property
    def mask(self) -> int:
        return (1 << self.bits) - 1


@dataclass(frozen=True)
class NodeSpec:
    op: str
    children: tuple[int, ...] = ()
    pattern: int | None = None
    window: int = 0
    limit: int = 0

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"op": self.op}
        if self.children:
            d["children"] = list(self.children)
        if self.pattern is not None:
            d["pattern"] = self.pattern
        if self.op in ("within", "atmost"):
            d["window"] = self.window
        if self.op == "atmost":
            d["limit"] = self.limit
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NodeSpec":
        return cls(d["op"], tuple(d.get("children", ())), d.get("pattern"), d.get("window", 0), d.get("limit", 0))


@dataclass(frozen=True)
class Layout:
    header: dict[str, FieldSlot]
    fields: tuple[dict[str, FieldSlot], ...]
    buckets: tuple[int | None, ...]  # first bucket slot per node
    packed_words: int
    bucket_slots: int

    def node_slots(self, index: int, window: int = 0) -> set[int]:
        slots = {f.slot for f in self.fields[index].values()}
        base = self.buckets[index]
        if base is not None:
            slots.update(range(base, base + window))
        return slots


def plan_layout(nodes: tuple[NodeSpec, ...]) -> Layout:
    words: list[int] = [0]  # bits used per packed word
    header: dict[str, FieldSlot] = {}
    for name, bits in HEADER_FIELDS:
        header[name] = FieldSlot(0, words[0], bits)
        words[0] += bits
    fields = []
    for node in nodes:
        spec = NODE_FIELDS[node.op]
        need = sum(b for _, b in spec)
        placed: dict[str, FieldSlot] = {}
        if need:
            if words[-1] + need > SENTINEL_SHIFT:
                words.append(0)
            w = len(words) - 1
            for name, bits in spec:
                placed[name] = FieldSlot(w, words[w], bits)
                words[w] += bits
        fields.append(placed)
    buckets: list[int | None] = []
    next_slot = len(words)
    for node in nodes:
        if node.op == "atmost":
            buckets.append(next_slot)
            next_slot += node.window
        else:
            buckets.append(None)
    return Layout(header, tuple(fields), tuple(buckets), len(words), next_slot - len(words))


def horizon(nodes: tuple[NodeSpec, ...], index: int) -> int:
    """Idle ticks after which the node's value and state stop changing."""
    node = nodes[index]
    if node.op == "match":
        return 1
    if node.op == "atmost":
        return node.window
    if node.op == "within":
        return horizon(nodes, node.children[0]) + node.window
    return max((horizon(nodes, c) for c in node.children), default=0)


@dataclass(frozen=True)
class ContractBlueprint:
    trigger: ObfuscatedPattern
    action: str
    delay_ticks: int
    substitutions: tuple[tuple[bytes, bytes], ...]
    default: str
    patterns: tuple[ObfuscatedPattern, ...]
    nodes: tuple[NodeSpec, ...]
    condition: int
    violation: int | None = None
    layout: Layout = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layout", plan_layout(self.nodes))

    @property
    def roots(self) -> tuple[int, ...]:
        return (self.condition,) if self.violation is None else (self.condition, self.violation)

    @property
    def horizon(self) -> int:
        return max(horizon(self.nodes, r) for r in self.roots)

    def to_dict(self) -> dict[str, Any]:
        return {
            "trigger": self.trigger.to_dict(),
            "action": self.action,
            "delayTicks": self.delay_ticks,
            "substitutions": [[n.hex(), v.hex()] for n, v in self.substitutions],
            "default": self.default,
            "patterns": [p.to_dict() for p in self.patterns],
            "nodes": [n.to_dict() for n in self.nodes],
            "condition": self.condition,
            "violation": self.violation,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ContractBlueprint":
        return cls(
            trigger=ObfuscatedPattern.from_dict(d["trigger"]),
            action=d["action"],
            delay_ticks=d["delayTicks"],
            substitutions=tuple((bytes.fromhex(n), bytes.fromhex(v)) for n, v in d["substitutions"]),
            default=d["default"],
            patterns=tuple(ObfuscatedPattern.from_dict(p) for p in d["patterns"]),
            nodes=tuple(NodeSpec.from_dict(n) for n in d["nodes"]),
            condition=d["condition"],
            violation=d["violation"],
        )

    def digest(self) -> bytes:
        return sha3(canonical_json(self.to_dict()))

    def inspect(self) -> dict[str, Any]:
        """Structured dump for tooling: digests plus tree shape and slot budget."""
        lay = self.layout
        nodes = []
        for i, n in enumerate(self.nodes):
            entry = n.to_dict()
            entry["index"] = i
            entry["horizon"] = horizon(self.nodes, i)
            entry["fields"] = {k: [f.slot, f.offset, f.bits] for k, f in lay.fields[i].items()}
            if lay.buckets[i] is not None:
                entry["buckets"] = [lay.buckets[i], n.window]
            nodes.append(entry)
        out = self.to_dict()
        out["nodes"] = nodes
        out["digest"] = self.digest().hex()
        out["slots"] = {
            "packedWords": lay.packed_words,
            "bucketSlots": lay.bucket_slots,
            "total": lay.packed_words + lay.bucket_slots,
        }
        return out


def _flatten(
    node: Condition,
    nodes: list[NodeSpec],
    pattern_index: dict[EventPattern, int],
) -> int:
    index = len(nodes)
    nodes.append(NodeSpec("and"))  # placeholder keeps pre-order numbering
    if isinstance(node, EventMatch):
        spec = NodeSpec("match", pattern=pattern_index[node.pattern])
    elif isinstance(node, Cardinality):
        spec = NodeSpec("atmost", pattern=pattern_index[node.pattern], window=node.window, limit=node.limit)
    elif isinstance(node, Not):
        spec = NodeSpec("not", (_flatten(node.child, nodes, pattern_index),))
    elif isinstance(node, Within):
        spec = NodeSpec("within", (_flatten(node.child, nodes, pattern_index),), window=node.window)
    elif isinstance(node, (And, Or)):
        kids = tuple(_flatten(c, nodes, pattern_index) for c in node.children)
        spec = NodeSpec("and" if isinstance(node, And) else "or", kids)
    else:
        raise CompileError(f"unsupported operator {type(node).__name__}")
    nodes[index] = spec
    return index


def compile_mechanism(mechanism: Mechanism, nonce: bytes, default: str = DENY) -> ContractBlueprint:
    check_nonce(nonce)
    if not mechanism.is_concrete:
        raise CompileError("instantiate template placeholders before compiling")
    patterns: list[EventPattern] = []
    pattern_index: dict[EventPattern, int] = {}
    for p in mechanism.patterns():
        if p is not mechanism.trigger and p not in pattern_index:
            pattern_index[p] = len(patterns)
            patterns.append(p)
    nodes: list[NodeSpec] = []
    condition = _flatten(mechanism.condition, nodes, pattern_index)
    violation = None
    if mechanism.violation is not None:
        violation = _flatten(mechanism.violation, nodes, pattern_index)
    subs = tuple(
        (name_digest(n, nonce), value_digest(n, m.value, nonce)) for n, m in mechanism.action.substitutions
    )
    return ContractBlueprint(
        trigger=obfuscate_pattern(mechanism.trigger, nonce),
        action=mechanism.action.kind,
        delay_ticks=mechanism.action.delay_ticks,
        substitutions=subs,
        default=default,
        patterns=tuple(obfuscate_pattern(p, nonce) for p in patterns),
        nodes=tuple(nodes),
        condition=condition,
        violation=violation,
    )
