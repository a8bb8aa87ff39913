"""Supervisory audit: check disclosures against the chain and replay decisions.

For every disclosed subject contract the auditor

1. recomputes each disclosed data reference and compares the set with
   the references committed on chain (constructor and ``grantData``);
2. recompiles the disclosed plaintext policy with the disclosed nonce
   and compares it with the deployed blueprint;
3. decodes every usage record with a dictionary built from the policy
   literals and the disclosed values, replays the contract's call
   sequence through the reference interpreter and compares decisions and
   violation notifications.

A usage event the controller reported as performed although it was
denied is a policy violation, as is any violation notification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..compiler.blueprint import ContractBlueprint, compile_mechanism
from ..compiler.obfuscation import activity_digest, value_digest
from ..contracts.events import VIOLATION_EVENT, UsageRecord, is_usage_record
from ..hashing import check_nonce, selector
from ..ledger.abi import decode_args
from ..ledger.chain import Block, verify_chain
from ..ledger.contract import Registry
from ..policy.ast import EnforcementAction, Equals, Event, Mechanism, PolicyError
from ..policy.interpreter import ReferenceInterpreter
from ..policy.parser import parse_policy
from ..provenance import DataInstance, commit_data

CONSISTENT = "consistent"
MISMATCH = "mismatch"
VIOLATION = "violation"


@dataclass
class Disclosure:
    contract: bytes
    nonce: bytes
    data: list[DataInstance]
    policy: str

    def __post_init__(self) -> None:
        check_nonce(self.nonce)

    def to_dict(self) -> dict[str, Any]:
        return {
            "contract": self.contract.hex(),
            "nonce": self.nonce.hex(),
            "data": [d.to_dict() for d in self.data],
            "policy": self.policy,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Disclosure":
        return cls(
            bytes.fromhex(d["contract"]),
            bytes.fromhex(d["nonce"]),
            [DataInstance.from_dict(x) for x in d["data"]],
            d["policy"],
        )


@dataclass
class AuditBundle:
    disclosures: list[Disclosure]
    chain_head: bytes = b""

    def to_dict(self) -> dict[str, Any]:
        return {"chainHead": self.chain_head.hex(), "disclosures": [d.to_dict() for d in self.disclosures]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AuditBundle":
        return cls([Disclosure.from_dict(x) for x in d["disclosures"]], bytes.fromhex(d.get("chainHead", "")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "AuditBundle":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class Verdict:
    contract: bytes
    status: str
    details: list[str] = field(default_factory=list)
    violations: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "contract": self.contract.hex(),
            "status": self.status,
            "details": self.details,
            "violationTicks": self.violations,
        }


@dataclass
class _Call:
    function: str
    args: dict[str, Any]
    receipt: Any


def _contract_calls(blocks: list[Block], address: bytes) -> tuple[dict[str, Any] | None, list[_Call]]:
    ctor = None
    calls = []
    for block in blocks:
        for tx, receipt in zip(block.transactions, block.receipts):
            if not receipt.ok:
                continue
            if tx.is_create and receipt.created_address == address:
                ctor = decode_args(tx.payload)[1]
            elif tx.to == address:
                sel, args = decode_args(tx.payload)
                calls.append(_Call(_FUNCTIONS.get(sel, sel.hex()), args, receipt))
    return ctor, calls


_FUNCTIONS = {
    selector(n): n
    for n in ("notifyEvent", "requestTransfer", "notifyTimeStep", "grantData", "addChildContract", "deactivate")
}


def _dictionary(mechanism: Mechanism, data: Iterable[DataInstance], nonce: bytes):
    activities: dict[bytes, str] = {}
    names: set[str] = set()
    values: set[str] = {d.value for d in data}
    for p in mechanism.patterns():
        activities[activity_digest(p.activity, nonce)] = p.activity
        for n, m in p.attributes:
            names.add(n)
            if isinstance(m, Equals):
                values.add(m.value)
    for n, m in mechanism.action.substitutions:
        names.add(n)
        values.add(m.value)
    pairs = {value_digest(n, v, nonce): (n, v) for n in names for v in values}
    return activities, pairs


def _decode(record: UsageRecord, activities, pairs) -> Event:
    activity = activities.get(record.activity, "?" + record.activity.hex())
    attrs = {}
    for d in record.value_digests:
        n, v = pairs.get(d, ("?" + d.hex(), "?"))
        attrs[n] = v
    return Event.of(activity, **attrs)


def audit_disclosure(blocks: list[Block], disclosure: Disclosure) -> Verdict:
    verdict = Verdict(disclosure.contract, CONSISTENT)
    problems = verdict.details

    ctor, calls = _contract_calls(blocks, disclosure.contract)
    if ctor is None:
        verdict.status = MISMATCH
        problems.append("no successful deployment of this contract on chain")
        return verdict

    # data references
    onchain = {bytes(r) for r in ctor.get("dataRefs") or []}
    for c in calls:
        if c.function == "grantData":
            onchain.update(bytes(r) for r in c.args.get("dataRefs", []))
    disclosed = {commit_data(d, disclosure.nonce).to_bytes(): d for d in disclosure.data}
    for raw, inst in disclosed.items():
        if raw not in onchain:
            problems.append(f"commitment mismatch for {inst.path}")
    undisclosed = len(onchain - set(disclosed))
    if undisclosed:
        problems.append(f"{undisclosed} on-chain reference(s) not covered by the disclosure")

    # policy
    try:
        mechanism = parse_policy(disclosure.policy)
        if not isinstance(mechanism, Mechanism):
            raise PolicyError("disclosed policy must be a concrete mechanism")
        expected = compile_mechanism(mechanism, disclosure.nonce)
    except (PolicyError, ValueError) as exc:
        verdict.status = MISMATCH
        problems.append(f"disclosed policy unusable: {exc}")
        return verdict
    deployed = ContractBlueprint.from_dict(ctor["policy"])
    if deployed.digest() != expected.digest():
        verdict.status = MISMATCH
        problems.append("disclosed policy does not compile to the deployed blueprint")
        return verdict

    # decision replay
    activities, pairs = _dictionary(mechanism, disclosure.data, disclosure.nonce)
    interp = ReferenceInterpreter(mechanism, default=EnforcementAction(expected.default))
    violated = False
    for call in calls:
        if call.function not in ("notifyEvent", "requestTransfer", "notifyTimeStep"):
            continue
        tick = call.args["tick"]
        logged_violation = any(log.topics and log.topics[0] == VIOLATION_EVENT for log in call.receipt.logs)
        holds = interp.violated(tick)
        if (holds and not violated) != logged_violation:
            problems.append(f"violation notification at tick {tick} does not replay")
        violated = holds
        if logged_violation:
            verdict.violations.append(tick)
        if call.function == "notifyTimeStep":
            interp.advance(tick)
            continue
        records = [
            UsageRecord.decode(log.topics, log.data) for log in call.receipt.logs if is_usage_record(log.topics)
        ]
        if len(records) != 1:
            problems.append(f"expected one usage record in {call.function} at tick {tick}")
            continue
        record = records[0]
        event = _decode(record, activities, pairs)
        replayed = interp.probe(event, tick).kind
        if replayed != record.decision:
            problems.append(
                f"tick {tick}: logged decision {record.decision} but the policy yields {replayed}"
            )
        if record.kind == "notify":
            interp.observe(event, tick)
            if record.decision == "deny":
                verdict.violations.append(tick)
        elif record.decision != "deny":
            interp.observe(event, tick)
    if problems:
        verdict.status = MISMATCH
    elif verdict.violations:
        verdict.status = VIOLATION
    return verdict


def audit_verify(blocks: list[Block], bundle: AuditBundle, registry: Registry | None = None) -> dict[str, Any]:
    """Verify the chain, then every disclosure; returns a JSON-ready report."""
    chain = verify_chain(blocks, registry)
    verdicts = [audit_disclosure(blocks, d) for d in bundle.disclosures]
    head_ok = not bundle.chain_head or (blocks and blocks[-1].block_hash == bundle.chain_head)
    return {
        "chainValid": bool(chain),
        "chainBadIndex": chain.bad_index,
        "chainHeadMatches": bool(head_ok),
        "verdicts": [v.to_dict() for v in verdicts],
        "summary": {s: sum(v.status == s for v in verdicts) for s in (CONSISTENT, MISMATCH, VIOLATION)},
    }


__all__ = [
    "AuditBundle", "CONSISTENT", "Disclosure", "MISMATCH", "VIOLATION", "Verdict", "audit_disclosure",
    "audit_verify",
]
