"""Reference interpreter: brute-force evaluation over the full history.

This is the semantic ground truth for compiled contracts. It keeps every
observed event and re-scans the history for each evaluation; nothing is
summarised.

Semantics at tick ``t`` (ticks start at 0):

* ``EventMatch(p)``: some observed event at exactly ``t`` matches ``p``.
* ``Within(n, c)``: ``c`` holds at some tick in ``[max(0, t-n+1), t]``.
* ``Cardinality(L, n, p)``: at most ``L`` events matching ``p`` were
  observed in ``[t-n+1, t]``.
* A probe at ``t`` yields the mechanism action when the trigger matches
  and the condition holds; every other probe yields the default (deny).
"""

from __future__ import annotations

import copy
from array import array
from dataclasses import dataclass, field
from typing import Union

from .. import kernels
from .ast import (
    DENY_ACTION,
    And,
    Cardinality,
    Condition,
    EnforcementAction,
    Event,
    EventMatch,
    EventPattern,
    Mechanism,
    Not,
    Or,
    PolicyError,
    Within,
)


class TimeTravelError(PolicyError):
    pass


@dataclass(frozen=True)
class Observe:
    event: Event
    tick: int


@dataclass(frozen=True)
class Tick:
    tick: int


@dataclass(frozen=True)
class Probe:
    event: Event
    tick: int


Input = Union[Observe, Tick, Probe]


@dataclass
class InterpreterState:
    current_tick: int = 0
    history: list[tuple[int, Event]] = field(default_factory=list)


class ReferenceInterpreter:
    def __init__(self, mechanism: Mechanism, default: EnforcementAction = DENY_ACTION):
        if not mechanism.is_concrete:
            raise PolicyError("cannot interpret a mechanism with template placeholders")
        self.mechanism = mechanism
        self.default = default
        self.state = InterpreterState()
        self._bits: dict[EventPattern, tuple[int, int]] = {}
        for pattern in mechanism.patterns():
            if pattern is not mechanism.trigger and pattern not in self._bits:
                n = len(self._bits)
                self._bits[pattern] = (n // 64, 1 << (n % 64))
        groups = (len(self._bits) + 63) // 64 or 1
        self._ticks = array("q")
        self._masks = [array("Q") for _ in range(groups)]

    @property
    def current_tick(self) -> int:
        return self.state.current_tick

    def copy(self) -> "ReferenceInterpreter":
        """Independent interpreter with the same history."""
        other = object.__new__(ReferenceInterpreter)
        other.mechanism = self.mechanism
        other.default = self.default
        other.state = InterpreterState(self.state.current_tick, list(self.state.history))
        other._bits = self._bits
        other._ticks = array("q", self._ticks)
        other._masks = [array("Q", m) for m in self._masks]
        return other

    def _check_tick(self, tick: int) -> None:
        if tick < self.state.current_tick:
            raise TimeTravelError(f"tick {tick} precedes current tick {self.state.current_tick}")

    def advance(self, tick: int) -> None:
        self._check_tick(tick)
        self.state.current_tick = tick

    def observe(self, event: Event, tick: int) -> None:
        """Record an actual event."""
        self.advance(tick)
        self.state.history.append((tick, event))
        masks = [0] * len(self._masks)
        for pattern, (group, bit) in self._bits.items():
            if pattern.matches(event):
                masks[group] |= bit
        self._ticks.append(tick)
        for group, m in enumerate(masks):
            self._masks[group].append(m)

    def holds(self, node: Condition, tick: int) -> bool:
        if isinstance(node, EventMatch):
            group, bit = self._bits[node.pattern]
            return kernels.window_any(self._ticks, self._masks[group], bit, tick, tick)
        if isinstance(node, Not):
            return not self.holds(node.child, tick)
        if isinstance(node, And):
            return all(self.holds(c, tick) for c in node.children)
        if isinstance(node, Or):
            return any(self.holds(c, tick) for c in node.children)
        if isinstance(node, Within):
            lo = max(0, tick - node.window + 1)
            return any(self.holds(node.child, t) for t in range(lo, tick + 1))
        if isinstance(node, Cardinality):
            group, bit = self._bits[node.pattern]
            lo = tick - node.window + 1
            return kernels.window_count(self._ticks, self._masks[group], bit, lo, tick) <= node.limit
        raise PolicyError(f"unsupported operator {type(node).__name__}")

    def probe(self, event: Event, tick: int) -> EnforcementAction:
        """Decide a tentative event at ``tick`` without changing state."""
        self._check_tick(tick)
        m = self.mechanism
        if m.trigger.matches(event) and self.holds(m.condition, tick):
            return m.action
        return self.default

    def violated(self, tick: int | None = None) -> bool:
        """Whether the time-triggered violation clause holds at ``tick``."""
        tick = self.state.current_tick if tick is None else tick
        self._check_tick(tick)
        v = self.mechanism.violation
        return v is not None and self.holds(v, tick)

    def step(self, item: Input) -> EnforcementAction | None:
        if isinstance(item, Probe):
            return self.probe(item.event, item.tick)
        if isinstance(item, Observe):
            self.observe(item.event, item.tick)
        else:
            self.advance(item.tick)
        return None


def reference_step(
    mechanism: Mechanism,
    state: InterpreterState,
    item: Input,
    default: EnforcementAction = DENY_ACTION,
) -> tuple[EnforcementAction | None, InterpreterState]:
    """Functional single step; ``state`` is left untouched."""
    interp = ReferenceInterpreter(mechanism, default)
    for tick, event in state.history:
        interp.observe(event, tick)
    interp.advance(state.current_tick)
    decision = interp.step(item)
    return decision, copy.deepcopy(interp.state)
