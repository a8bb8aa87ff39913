"""Random mechanisms and traces for compiled-vs-reference sweeps."""

from __future__ import annotations

import itertools
import random

from provledger.compiler import CompiledPolicy, compile_mechanism
from provledger.policy import (
    ACTUAL,
    TENTATIVE,
    WILDCARD,
    And,
    Cardinality,
    EnforcementAction,
    Equals,
    Event,
    EventMatch,
    EventPattern,
    Mechanism,
    Not,
    Observe,
    Or,
    Probe,
    ReferenceInterpreter,
    Tick,
    Within,
)

ACTIVITIES = ("a", "b")
NAMES = ("x", "y")
VALUES = ("1", "2")


def random_pattern(rng: random.Random, phase: str = ACTUAL) -> EventPattern:
    attrs = []
    for n in NAMES:
        r = rng.random()
        if r < 0.3:
            attrs.append((n, Equals(rng.choice(VALUES))))
        elif r < 0.4:
            attrs.append((n, WILDCARD))
    return EventPattern(phase, rng.choice(ACTIVITIES), tuple(attrs))


def random_condition(rng: random.Random, depth: int = 3):
    r = rng.random()
    if depth <= 0 or r < 0.25:
        return EventMatch(random_pattern(rng))
    if r < 0.40:
        return Cardinality(rng.randint(0, 3), rng.randint(1, 6), random_pattern(rng))
    if r < 0.55:
        return Within(rng.randint(1, 5), random_condition(rng, depth - 1))
    if r < 0.65:
        return Not(random_condition(rng, depth - 1))
    kids = tuple(random_condition(rng, depth - 1) for _ in range(rng.choice((0, 2, 2, 3))))
    return And(kids) if r < 0.83 else Or(kids)


def random_action(rng: random.Random, trigger: EventPattern) -> EnforcementAction:
    r = rng.random()
    bound = [n for n, m in trigger.attributes]
    if r < 0.4:
        return EnforcementAction("allow")
    if r < 0.6:
        return EnforcementAction("deny")
    if r < 0.8 or not bound:
        return EnforcementAction("delay", delay_ticks=rng.randint(1, 4))
    return EnforcementAction("modify", ((rng.choice(bound), Equals(rng.choice(VALUES))),))


def random_mechanism(rng: random.Random) -> Mechanism:
    trigger = random_pattern(rng, TENTATIVE)
    violation = random_condition(rng) if rng.random() < 0.5 else None
    return Mechanism("m", trigger, random_condition(rng), random_action(rng, trigger), violation=violation)


def random_event(rng: random.Random) -> Event:
    attrs = {n: rng.choice(VALUES) for n in NAMES if rng.random() < 0.7}
    return Event.of(rng.choice(ACTIVITIES), **attrs)


def random_trace(rng: random.Random, length: int = 100) -> list:
    tick = 0
    out = []
    for _ in range(length):
        r = rng.random()
        tick += rng.choice((0, 0, 1, 1, 2, 3)) if r < 0.95 else rng.randint(5, 60)
        kind = rng.random()
        if kind < 0.45:
            out.append(Probe(random_event(rng), tick))
        elif kind < 0.9:
            out.append(Observe(random_event(rng), tick))
        else:
            out.append(Tick(tick))
    return out


def compare_trace(mechanism: Mechanism, trace: list, nonce: bytes = b"\x07" * 32) -> str | None:
    """Run both engines; return a description of the first divergence, if any."""
    compiled = CompiledPolicy(compile_mechanism(mechanism, nonce), nonce)
    oracle = ReferenceInterpreter(mechanism)
    for i, item in enumerate(trace):
        got = compiled.step(item)
        want = oracle.step(item)
        if isinstance(item, Probe) and got != want.kind:
            return f"step {i} {item}: compiled {got}, reference {want.kind}"
        if compiled.violated(item.tick) != oracle.violated(item.tick):
            return f"step {i} {item}: violation flags differ"
    return None


def exhaustive_check(mechanism: Mechanism, max_len: int = 6, gaps=(0, 2), nonce: bytes = b"\x09" * 32) -> tuple[int, list[str]]:
    """Depth-first over every observation sequence up to ``max_len``.

    Each position observes one activity after a tick gap from ``gaps``;
    at every node both activities are probed at the current tick and a
    window later. Returns (traces checked, divergences).
    """
    events = [Event.of(a) for a in ACTIVITIES]
    problems: list[str] = []
    count = 0

    def probe_all(compiled, oracle, tick, path):
        for t in (tick, tick + 3):
            for e in events:
                # probes and violation checks do not change either engine
                got, want = compiled.probe(e, t), oracle.probe(e, t).kind
                if got != want:
                    problems.append(f"{path} probe {e.activity}@{t}: compiled {got}, reference {want}")
                if compiled.violated(t) != oracle.violated(t):
                    problems.append(f"{path} violation@{t} differs")

    def walk(compiled, oracle, tick, path, depth):
        nonlocal count
        count += 1
        probe_all(compiled, oracle, tick, path)
        if depth == max_len:
            return
        for gap, e in itertools.product(gaps, events):
            c, o = compiled.copy(), oracle.copy()
            t = tick + gap
            c.observe(e, t)
            o.observe(e, t)
            walk(c, o, t, path + f" {e.activity}@{t}", depth + 1)

    walk(CompiledPolicy(compile_mechanism(mechanism, nonce), nonce), ReferenceInterpreter(mechanism), 0, "", 0)
    return count, problems
