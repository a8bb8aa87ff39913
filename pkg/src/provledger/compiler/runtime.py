"""Execution of a compiled blueprint over packed storage words.

The runtime reads words through a ``load`` callback, caches them for the
duration of one call and reports the words it changed, so a contract can
meter each slot read once and each changed slot write once.

State is kept for the *open* tick ``t`` (the header tick): ``match``
nodes know whether a matching event was seen at ``t``; ``within`` nodes
remember the last closed tick at which their child held; ``atmost``
nodes keep per-tick buckets and the running count for ``[t-n+1, t]``.
Advancing closes ticks one by one up to the blueprint horizon, after
which every node is idle and the rest of the gap is a constant-time jump.
"""

from __future__ import annotations

from typing import Callable

from .blueprint import COUNT_BITS, SENTINEL, SENTINEL_SHIFT, TICK_BITS, ContractBlueprint, FieldSlot
from .obfuscation import ObfuscatedEvent, match_obfuscated

_TICK_MASK = (1 << TICK_BITS) - 1
_COUNT_MASK = (1 << COUNT_BITS) - 1


class PolicyRuntimeError(ValueError):
    pass


def initial_words(blueprint: ContractBlueprint) -> dict[int, int]:
    """Deployment-time values: the sentinel byte in every packed word."""
    return {w: SENTINEL << SENTINEL_SHIFT for w in range(blueprint.layout.packed_words)}


class PolicyRuntime:
    def __init__(
        self,
        blueprint: ContractBlueprint,
        load: Callable[[int], int],
        charge: Callable[[int], None] | None = None,
    ):
        self.bp = blueprint
        self.layout = blueprint.layout
        self._load = load
        self._charge = charge or (lambda n: None)
        self._words: dict[int, int] = {}
        self._dirty: set[int] = set()

    # -- word access -------------------------------------------------------

    def _word(self, slot: int) -> int:
        w = self._words.get(slot)
        if w is None:
            w = self._words[slot] = self._load(slot)
        return w

    def _put(self, slot: int, value: int) -> None:
        if self._word(slot) != value:
            self._words[slot] = value
            self._dirty.add(slot)

    def _get(self, f: FieldSlot) -> int:
        return (self._word(f.slot) >> f.offset) & f.mask

    def _set(self, f: FieldSlot, value: int) -> None:
        if not 0 <= value <= f.mask:
            raise PolicyRuntimeError(f"value {value} overflows a {f.bits}-bit field")
        w = self._word(f.slot)
        self._put(f.slot, (w & ~(f.mask << f.offset)) | (value << f.offset))

    def _field(self, node: int, name: str) -> FieldSlot:
        return self.layout.fields[node][name]

    def _bucket(self, node: int, idx: int) -> tuple[int, int]:
        w = self._word(self.layout.buckets[node] + idx)
        return w & _TICK_MASK, (w >> TICK_BITS) & _COUNT_MASK

    def _set_bucket(self, node: int, idx: int, tag: int, count: int) -> None:
        self._put(self.layout.buckets[node] + idx, tag | (count << TICK_BITS))

    def dirty_words(self) -> dict[int, int]:
        return {s: self._words[s] for s in sorted(self._dirty)}

    # -- header ------------------------------------------------------------

    @property
    def tick(self) -> int:
        return self._get(self.layout.header["tick"])

    @property
    def violated_flag(self) -> bool:
        return bool(self._get(self.layout.header["violated"]))

    def set_violated(self, value: bool) -> None:
        self._set(self.layout.header["violated"], int(value))

    # -- evaluation --------------------------------------------------------

    def value(self, i: int) -> bool:
        self._charge(1)
        node = self.bp.nodes[i]
        op = node.op
        if op == "match":
            return bool(self._get(self._field(i, "hit")))
        if op == "not":
            return not self.value(node.children[0])
        if op == "and":
            return all(self.value(c) for c in node.children)
        if op == "or":
            return any(self.value(c) for c in node.children)
        if op == "within":
            if self.value(node.children[0]):
                return True
            if not self._get(self._field(i, "flag")):
                return False
            return self._get(self._field(i, "last")) >= self.tick - node.window + 1
        if op == "atmost":
            return self._get(self._field(i, "count")) <= node.limit
        raise PolicyRuntimeError(f"unknown node op {op!r}")

    def condition_holds(self) -> bool:
        return self.value(self.bp.condition)

    def violation_holds(self) -> bool:
        return self.bp.violation is not None and self.value(self.bp.violation)

    def trigger_matches(self, event: ObfuscatedEvent) -> bool:
        self._charge(1 + len(self.bp.trigger.attributes))
        return match_obfuscated(self.bp.trigger, event)

    def decide(self, event: ObfuscatedEvent) -> str:
        """Decision kind for ``event`` as a tentative event at the open tick."""
        if self.trigger_matches(event) and self.condition_holds():
            return self.bp.action
        return self.bp.default

    # -- time --------------------------------------------------------------

    def _close(self, i: int, cur: int) -> None:
        node = self.bp.nodes[i]
        self._charge(1)
        if node.op == "within":
            if self.value(node.children[0]):
                self._set(self._field(i, "flag"), 1)
                self._set(self._field(i, "last"), cur)
        elif node.op == "match":
            self._set(self._field(i, "hit"), 0)
        for c in node.children:
            self._close(c, cur)

    def _step_one(self) -> None:
        cur = self.tick
        for root in self.bp.roots:
            self._close(root, cur)
        new = cur + 1
        self._set(self.layout.header["tick"], new)
        for i, node in enumerate(self.bp.nodes):
            if node.op == "atmost":
                idx = new % node.window
                tag, count = self._bucket(i, idx)
                if count and tag == new - node.window:
                    self._set(self._field(i, "count"), self._get(self._field(i, "count")) - count)
                self._set(self._field(i, "head"), idx)

    def _jump(self, target: int) -> None:
        # every node is idle: only steady-true "within" children leave a trace
        for i, node in enumerate(self.bp.nodes):
            self._charge(1)
            if node.op == "within" and self.value(node.children[0]):
                self._set(self._field(i, "flag"), 1)
                self._set(self._field(i, "last"), target - 1)
            elif node.op == "atmost":
                self._set(self._field(i, "head"), target % node.window)
        self._set(self.layout.header["tick"], target)

    def advance(self, target: int) -> None:
        cur = self.tick
        if target < cur:
            raise PolicyRuntimeError(f"tick {target} precedes current tick {cur}")
        gap = target - cur
        steps = min(gap, self.bp.horizon)
        for _ in range(steps):
            self._step_one()
        if gap > steps:
            self._jump(target)

    def observe(self, event: ObfuscatedEvent) -> None:
        """Record an actual event at the open tick."""
        self._charge(len(self.bp.patterns))
        matched = [match_obfuscated(p, event) for p in self.bp.patterns]
        t = self.tick
        for i, node in enumerate(self.bp.nodes):
            if node.pattern is None or not matched[node.pattern]:
                continue
            if node.op == "match":
                self._set(self._field(i, "hit"), 1)
            else:
                idx = t % node.window
                tag, count = self._bucket(i, idx)
                self._set_bucket(i, idx, t, count + 1 if tag == t and count else 1)
                self._set(self._field(i, "count"), self._get(self._field(i, "count")) + 1)
