import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policygen import compare_trace, exhaustive_check, random_mechanism, random_trace
from provledger.compiler import (
    CompiledPolicy,
    CompileError,
    ContractBlueprint,
    PolicyRuntime,
    PolicyRuntimeError,
    activity_digest,
    compile_mechanism,
    initial_words,
    match_obfuscated,
    obfuscate_event,
    obfuscate_pattern,
)
from provledger.compiler.blueprint import SENTINEL_SHIFT, horizon
from provledger.policy import Event, parse_document, parse_policy

NONCE = bytes(range(32))
OTHER = bytes(range(1, 33))

BILLING = parse_policy(
    "mechanism billing on tentative send(msgType = billing, recipient = a) "
    "if not within 30 (actual send(msgType = billing, recipient = a)) then allow end"
)
READS = parse_policy(
    "mechanism reads on tentative read() if atmost 2 within 7 (actual read()) then allow end"
)


def test_blueprint_hides_plaintext():
    bp = compile_mechanism(BILLING, NONCE)
    text = json.dumps(bp.to_dict())
    for plain in ("billing", "send", "msgType", "recipient"):
        assert plain not in text
    assert bp.trigger.activity == activity_digest("send", NONCE)
    assert compile_mechanism(BILLING, OTHER).digest() != bp.digest()


def test_blueprint_round_trip_and_digest():
    bp = compile_mechanism(BILLING, NONCE)
    again = ContractBlueprint.from_dict(json.loads(json.dumps(bp.to_dict())))
    assert again == bp and again.digest() == bp.digest()


def test_obfuscated_matching_follows_plaintext():
    pat = parse_policy("mechanism m on tentative a(x = 1, y = *) then allow end").trigger
    op = obfuscate_pattern(pat, NONCE)
    for ev in (Event.of("a", x="1"), Event.of("a", x="1", y="9"), Event.of("a", x="2"), Event.of("b", x="1")):
        assert match_obfuscated(op, obfuscate_event(ev, NONCE)) == pat.matches(ev)
    # digests under another nonce never match
    assert not match_obfuscated(op, obfuscate_event(Event.of("a", x="1"), OTHER))


def test_templates_must_be_instantiated():
    (tpl,) = parse_document(
        "template t(s: entity) mechanism m on tentative a(to = $s) then allow end end"
    )
    with pytest.raises(CompileError):
        compile_mechanism(tpl.body, NONCE)


def test_layout_packs_fields_below_the_sentinel():
    bp = compile_mechanism(READS, NONCE)
    assert bp.layout.packed_words == 1
    assert bp.layout.bucket_slots == 7
    for fields in bp.layout.fields:
        for f in fields.values():
            assert f.offset + f.bits <= SENTINEL_SHIFT
    assert initial_words(bp) == {0: 1 << SENTINEL_SHIFT}


def test_horizon_values():
    m = parse_policy(
        "mechanism m on tentative a() if within 3 (within 2 (actual b())) or atmost 1 within 5 (actual c()) "
        "then allow end"
    )
    bp = compile_mechanism(m, NONCE)
    # within 3 (within 2 (match)) -> 1 + 2 + 3; atmost window 5
    assert bp.horizon == 6
    assert horizon(bp.nodes, bp.condition) == 6


def test_compactness_slots_per_event():
    within = CompiledPolicy(compile_mechanism(BILLING, NONCE), NONCE)
    card = CompiledPolicy(compile_mechanism(READS, NONCE), NONCE)
    rng = random.Random(5)
    tick = 0
    for _ in range(200):
        tick += rng.choice((0, 1, 2))
        within.observe(Event.of("send", msgType="billing", recipient="a"), tick)
        assert len(within.last_touched) <= 2
        card.observe(Event.of("read"), tick)
        assert len(card.last_touched) <= 3


def test_long_gaps_are_constant_work():
    counted = []
    bp = compile_mechanism(BILLING, NONCE)
    storage = dict(initial_words(bp))
    rt = PolicyRuntime(bp, lambda s: storage.get(s, 0), counted.append)
    rt.advance(10**9)
    assert rt.tick == 10**9
    assert sum(counted) < 1000


def test_runtime_rejects_going_back():
    sim = CompiledPolicy(compile_mechanism(BILLING, NONCE), NONCE)
    sim.advance(5)
    with pytest.raises(PolicyRuntimeError):
        sim.advance(4)


def test_billing_decisions_compiled():
    sim = CompiledPolicy(compile_mechanism(BILLING, NONCE), NONCE)
    e = Event.of("send", msgType="billing", recipient="a")
    got = []
    for tick in (0, 10, 31):
        d = sim.probe(e, tick)
        got.append(f"{d}@{tick}")
        if d == "allow":
            sim.observe(e, tick)
    assert got == ["allow@0", "deny@10", "allow@31"]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_compiled_matches_reference(seed):
    rng = random.Random(seed)
    mechanism = random_mechanism(rng)
    assert compare_trace(mechanism, random_trace(rng, 60)) is None


def test_exhaustive_short_traces():
    m = parse_policy(
        "mechanism m on tentative a() if not within 2 (actual a()) and atmost 1 within 3 (actual b()) "
        "then allow violation if not atmost 1 within 2 (actual a()) end"
    )
    count, problems = exhaustive_check(m, max_len=4)
    assert count == 1 + 4 + 16 + 64 + 256
    assert problems == []
