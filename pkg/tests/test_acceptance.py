"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json
import random
import re
import time
from pathlib import Path

from chaingen import REGISTRY, build_chain, tamper
from policygen import compare_trace, exhaustive_check, random_mechanism, random_trace

import provledger
from provledger.harness import CONSISTENT, VIOLATION, audit_verify, load_scenario, run_scenario
from provledger.harness.runner import measure_throughput
from provledger.hashing import sha3
from provledger.ledger.chain import verify_chain
from provledger.ledger.export import dumps_chain, loads_chain
from provledger.policy import parse_policy
from provledger.provenance import DataInstance, commit_data

SCENARIOS = Path(provledger.__file__).parent / "scenarios"


def within(value: float, target: float, rel: float) -> bool:
    return abs(value - target) <= rel * target


def _measurements():
    start = time.perf_counter()
    res = run_scenario(load_scenario(SCENARIOS / "measurements.yaml"))
    return res.gas_report, time.perf_counter() - start


def test_c1_gas_ordering(criterion):
    report, elapsed = _measurements()
    base, ev, sv = (report.row(k).mean for k in
                    ("subjectDeployBaseline", "subjectDeployEvents", "subjectDeployStateVars"))
    ok = base < ev < sv and elapsed < 1.0
    assert criterion(1, "deploy gas baseline < events < state vars", ok,
                     f"{base:,.0f} < {ev:,.0f} < {sv:,.0f}, {elapsed:.2f}s")


def test_c2_state_variable_delta(criterion):
    report, _ = _measurements()
    delta = report.row("subjectDeployStateVars").mean - report.row("subjectDeployBaseline").mean
    ok = delta == 400_000 and within(delta, 430_000, 0.10)
    assert criterion(2, "state-var minus baseline = 400,000 and within 10% of 430,000", ok, f"delta {delta:,.0f}")


def test_c3_notify_cost(criterion):
    report, _ = _measurements()
    notify = report.row("notifyEvent").mean
    assert criterion(3, "notifyEvent within 30% of 23,000", within(notify, 23_000, 0.30), f"{notify:,.0f} gas")


def test_c4_controller_costs(criterion):
    report, _ = _measurements()
    join = report.row("join").mean
    deploy = report.row("controllerDeploy").mean
    ok = within(join, 41_000, 0.10) and within(join, 40_000, 0.10) and 340_000 / 1.5 <= deploy <= 340_000 * 1.5
    assert criterion(4, "join ~41k (and ~40k), controller deploy within x1.5 of 340k", ok,
                     f"join {join:,.0f}, deploy {deploy:,.0f}")


def test_c5_throughput(criterion):
    tps = measure_throughput(block_gas_limit=4_000_000, block_interval=10)
    assert criterion(5, "throughput ceiling 15..25 tx/s", 15 <= tps <= 25, f"{tps:.1f} tx/s")


EXHAUSTIVE = [
    "mechanism m on tentative a() then allow end",
    "mechanism m on tentative a() if within 3 (actual b()) then allow end",
    "mechanism m on tentative a() if not within 4 (actual a()) then allow end",
    "mechanism m on tentative b() if atmost 1 within 3 (actual a()) then allow end",
    "mechanism m on tentative a() if atmost 2 within 5 (actual b()) and not actual a() then allow end",
    "mechanism m on tentative a() if within 2 (actual a() or actual b()) then delay 2 end",
    "mechanism m on tentative b() if within 3 (not within 2 (actual a())) then allow "
    "violation if not atmost 1 within 4 (actual b()) end",
]


def test_c6_oracle_equivalence(criterion):
    start = time.perf_counter()
    rng = random.Random(2024)
    divergences = []
    for i in range(1000):
        mechanism = random_mechanism(rng)
        problem = compare_trace(mechanism, random_trace(rng, 100), nonce=rng.randbytes(32))
        if problem:
            divergences.append(f"trace {i}: {problem}")
    nodes = 0
    for text in EXHAUSTIVE:
        count, problems = exhaustive_check(parse_policy(text), max_len=6)
        nodes += count
        divergences += problems
    elapsed = time.perf_counter() - start
    ok = not divergences and elapsed < 60
    assert criterion(6, "compiled contracts agree with the reference interpreter", ok,
                     f"1000 traces x 100 events + {nodes} exhaustive prefixes, "
                     f"{len(divergences)} divergences, {elapsed:.1f}s"), divergences[:5]


def test_c7_billing_decisions(criterion):
    res = run_scenario(load_scenario(SCENARIOS / "model-a-billing.yaml"))
    got = res.decision_summary("alice-acme")
    want = ["allow@0", "deny@10", "allow@31"]
    assert criterion(7, "billing decisions allow@0, deny@10, allow@31", got == want, ", ".join(got))


def _string_leaves(obj, out: list[str]) -> list[str]:
    if isinstance(obj, dict):
        for v in obj.values():
            _string_leaves(v, out)
    elif isinstance(obj, list):
        for v in obj:
            _string_leaves(v, out)
    elif isinstance(obj, str):
        out.append(obj)
    return out


def _hex_payloads(leaves: list[str]) -> bytes:
    blobs = []
    for s in leaves:
        h = s[2:] if s.startswith("0x") else s
        if h and len(h) % 2 == 0 and re.fullmatch(r"[0-9a-fA-F]+", h):
            blobs.append(bytes.fromhex(h))
    return b"\x00".join(blobs)


def test_c8_privacy(criterion):
    rng = random.Random(8)
    value = DataInstance("identity.email", "alice@wonderland.example")
    refs = {commit_data(value, rng.randbytes(32)).to_bytes() for _ in range(10_000)}
    unsalted = sha3(value.value.encode())
    hiding = len(refs) == 10_000 and not any(unsalted in (r[:32], r[32:]) for r in refs)

    scenario = load_scenario(SCENARIOS / "model-a-billing.yaml")
    text = run_scenario(scenario).export_chain()
    scripted = {str(v) for a in scenario.actors.values() for v in a.data.values()}
    for step in scenario.timeline:
        event = step.get("event") or {}
        scripted |= {str(v) for v in (event.get("attributes") or {}).values() if not str(v).startswith("@")}
        if event:
            scripted.add(event["activity"])
    leaves = [s for line in text.splitlines() for s in _string_leaves(json.loads(line), [])]
    raw = _hex_payloads(leaves)
    leaks = sorted(
        v for v in scripted
        if any(v in s for s in leaves) or v.encode() in raw or sha3(v.encode()) in raw
        or sha3(v.encode()).hex() in text
    )
    ok = hiding and not leaks
    assert criterion(8, "commitments hide values; chain export has no plaintext", ok,
                     f"{len(refs)} distinct refs, {len(scripted)} scripted values scanned, leaks={leaks}")


def test_c9_chain_integrity(criterion):
    blocks = build_chain(100, seed=9)
    text = dumps_chain(blocks)
    rng = random.Random(909)
    located = 0
    for _ in range(100):
        copy = loads_chain(text)
        i = rng.randrange(len(copy))
        tamper(copy[i], rng)
        result = verify_chain(copy, REGISTRY)
        located += (not result) and result.bad_index == i
    ok = len(blocks) == 100 and located == 100
    assert criterion(9, "100 single-byte tamperings located", ok, f"{located}/100 at the right block")


def test_c10_audit(criterion):
    dishonest = run_scenario(load_scenario(SCENARIOS / "dishonest-controller.yaml"))
    bad = audit_verify(dishonest.ledger.blocks, dishonest.audit_bundle())
    honest = run_scenario(load_scenario(SCENARIOS / "honest-controller.yaml"))
    good = audit_verify(honest.ledger.blocks, honest.audit_bundle())
    flagged = bad["summary"][VIOLATION]
    false_pos = len(good["verdicts"]) - good["summary"][CONSISTENT]
    ok = flagged >= 1 and false_pos == 0
    assert criterion(10, "audit flags the dishonest controller only", ok,
                     f"{flagged} violation verdicts, {false_pos} false positives")

