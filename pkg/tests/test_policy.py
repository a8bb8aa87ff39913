import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from naive_oracle import decide, holds
from policygen import random_event, random_mechanism, random_trace
from provledger.policy import (
    DENY,
    Equals,
    Event,
    Mechanism,
    MechanismTemplate,
    Observe,
    PolicyError,
    PolicySemanticError,
    PolicySyntaxError,
    Probe,
    ReferenceInterpreter,
    TemplateManager,
    Tick,
    TimeTravelError,
    format_document,
    format_policy,
    instantiate_template,
    parse_document,
    parse_policy,
    reference_step,
    InterpreterState,
)

BILLING = """
mechanism billing granularity 1 day
  on tentative send(msgType = "billing", recipient = "alice@example.org")
  if not within 30 (actual send(msgType = "billing", recipient = "alice@example.org"))
  then allow
end
"""

TEMPLATE = """
template billing(s: entity)
  configure on actual subscribe(subject = $s)
  dispose on actual unsubscribe(subject = $s)
  mechanism monthly
    on tentative send(msgType = billing, recipient = $s.email)
    if not within 30 (actual send(msgType = billing, recipient = $s.email))
    then allow
  end
end
"""


def billing_event(to="alice@example.org"):
    return Event.of("send", msgType="billing", recipient=to)


# -- parser ---------------------------------------------------------------


def test_parse_billing_policy():
    m = parse_policy(BILLING)
    assert isinstance(m, Mechanism)
    assert m.trigger.activity == "send"
    assert m.action.kind == "allow"
    assert str(m.granularity) == "1 day"


@pytest.mark.parametrize("seed", range(40))
def test_format_parse_round_trip(seed):
    m = random_mechanism(random.Random(seed))
    text = format_policy(m)
    assert parse_policy(text) == m
    assert format_policy(parse_policy(text)) == text


def test_template_document_round_trip():
    doc = parse_document(TEMPLATE)
    assert isinstance(doc[0], MechanismTemplate)
    assert parse_document(format_document(doc)) == doc


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("mechanism m on tentative a() then allow", 1, 40),
        ("mechanism m on tentative a()\n  then launch end", 2, 8),
        ("mechanism m on tentative a() if within 0 (actual b()) then allow end", 1, 33),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(PolicySyntaxError if "within 0" not in text else PolicySemanticError) as info:
        parse_policy(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_semantic_errors():
    with pytest.raises(PolicySemanticError):
        parse_policy("mechanism m on actual a() then allow end")
    with pytest.raises(PolicySemanticError):
        parse_policy("mechanism m on tentative a() if tentative b() then allow end")
    with pytest.raises(PolicySemanticError):
        parse_policy("mechanism m on tentative a(x = 1) then modify(y = 2) end")
    with pytest.raises(PolicyError):
        parse_policy("mechanism m on tentative a() then delay 0 end")


# -- interpreter ------------------------------------------------------------


def test_billing_decisions_frozen():
    m = parse_policy(BILLING)
    interp = ReferenceInterpreter(m)
    out = []
    for tick in (0, 10, 29, 30, 31):
        d = interp.probe(billing_event(), tick).kind
        out.append(f"{d}@{tick}")
        if tick in (0, 31) and d == "allow":
            interp.observe(billing_event(), tick)
    # window [t-29, t]: the send at tick 0 blocks until tick 29 inclusive
    assert out == ["allow@0", "deny@10", "deny@29", "allow@30", "allow@31"]


def test_untriggered_events_get_the_default():
    interp = ReferenceInterpreter(parse_policy(BILLING))
    assert interp.probe(billing_event("bob@example.org"), 0).kind == DENY
    assert interp.probe(Event.of("read"), 0).kind == DENY


def test_cardinality_window():
    m = parse_policy("mechanism m on tentative r() if atmost 1 within 3 (actual r()) then allow end")
    interp = ReferenceInterpreter(m)
    interp.observe(Event.of("r"), 0)
    assert interp.probe(Event.of("r"), 0).kind == "allow"
    interp.observe(Event.of("r"), 1)
    assert interp.probe(Event.of("r"), 2).kind == "deny"
    assert interp.probe(Event.of("r"), 3).kind == "allow"


def test_time_only_moves_forward():
    interp = ReferenceInterpreter(parse_policy(BILLING))
    interp.advance(5)
    with pytest.raises(TimeTravelError):
        interp.probe(billing_event(), 4)


def test_violation_clause():
    m = parse_policy(
        "mechanism m on tentative r() then allow violation if not atmost 1 within 2 (actual r()) end"
    )
    interp = ReferenceInterpreter(m)
    interp.observe(Event.of("r"), 0)
    assert not interp.violated(0)
    interp.observe(Event.of("r"), 1)
    assert interp.violated(1)
    assert not interp.violated(2)


def test_reference_step_is_pure():
    m = parse_policy(BILLING)
    state = InterpreterState()
    _, s1 = reference_step(m, state, Observe(billing_event(), 0))
    assert state.history == [] and len(s1.history) == 1
    d, s2 = reference_step(m, s1, Probe(billing_event(), 3))
    assert d.kind == "deny" and s2 == s1


def test_interpreter_copy_is_independent():
    interp = ReferenceInterpreter(parse_policy(BILLING))
    other = interp.copy()
    other.observe(billing_event(), 0)
    assert interp.probe(billing_event(), 0).kind == "allow"
    assert other.probe(billing_event(), 0).kind == "deny"


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_interpreter_matches_naive_semantics(seed):
    rng = random.Random(seed)
    m = random_mechanism(rng)
    interp = ReferenceInterpreter(m)
    history = []
    for item in random_trace(rng, 40):
        if isinstance(item, Observe):
            interp.observe(item.event, item.tick)
            history.append((item.tick, item.event))
        elif isinstance(item, Tick):
            interp.advance(item.tick)
        else:
            assert interp.probe(item.event, item.tick).kind == decide(m, history, item.event, item.tick)
            if m.violation is not None:
                assert interp.violated(item.tick) == holds(m.violation, history, item.tick)


# -- templates --------------------------------------------------------------


def test_template_instantiation_resolves_data():
    (tpl,) = parse_document(TEMPLATE)
    m = instantiate_template(tpl, {"s": "alice"}, lambda e, a: f"{e}@example.org")
    assert m.is_concrete
    assert dict(m.trigger.attributes)["recipient"] == Equals("alice@example.org")
    with pytest.raises(PolicyError):
        instantiate_template(tpl, {}, None)
    with pytest.raises(PolicyError):
        ReferenceInterpreter(tpl.body)


def test_template_manager_configure_and_dispose():
    (tpl,) = parse_document(TEMPLATE)
    mgr = TemplateManager([tpl])
    assert mgr.observe(Event.of("subscribe", subject="alice")) == [("billing", (("s", "alice"),))]
    assert mgr.observe(Event.of("subscribe", subject="alice")) == []
    mgr.observe(Event.of("subscribe", subject="bob"))
    assert len(mgr.mechanisms()) == 2
    mgr.observe(Event.of("unsubscribe", subject="alice"))
    (only,) = mgr.mechanisms()
    assert dict(only.trigger.attributes)["recipient"] == Equals("bob.email")


def test_event_substitution():
    e = billing_event().with_substitutions((("recipient", "x"),))
    assert e.attr_map == {"msgType": "billing", "recipient": "x"}


def test_random_event_generator_is_seeded():
    assert random_event(random.Random(1)) == random_event(random.Random(1))
