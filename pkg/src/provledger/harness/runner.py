"""Multi-actor scenario execution.

Subjects, controllers and processors act on one shared ledger. Data and
nonces travel on an in-memory off-chain channel as sealed payloads; the
chain only ever sees digests. Every decision the compiled contracts make
is cross-checked against the reference interpreter while the scenario
runs, and any divergence aborts the run.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..compiler.blueprint import compile_mechanism
from ..compiler.obfuscation import obfuscate_event
from ..contracts.events import TRANSFER_EVENT, VIOLATION_EVENT
from ..contracts.subject import EVENT_LOGS
from ..hashing import salted_digest, selector
from ..ledger.abi import decode_args, encode_call
from ..ledger.chain import Ledger, Receipt, Transaction
from ..ledger.export import dumps_chain
from ..ledger.keys import Account, create_account, seal
from ..policy.ast import DENY, MODIFY, DELAY, Equals, Event, Mechanism, MechanismTemplate
from ..policy.interpreter import ReferenceInterpreter
from ..policy.parser import format_document, format_policy
from ..policy.templates import instantiate_template
from ..provenance import CONTROLLER, PROCESSOR, DataInstance, ProvenanceGraph, commit_all
from .audit import AuditBundle, Disclosure
from .report import GasReport, build_gas_report
from .scenario import ActorSpec, Scenario, ScenarioError, Step, first_mechanism

DEPLOY_GAS = 4_000_000
CALL_GAS = 1_000_000
JOIN_GAS = 100_000


class HarnessError(RuntimeError):
    pass


class OracleMismatch(HarnessError):
    pass


class CensorshipDetected(HarnessError):
    pass


@dataclass
class DecisionEntry:
    tick: int
    contract: str
    activity: str
    kind: str  # probe | notify | transfer
    decision: str
    oracle: str
    performed: bool

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class Message:
    sender: str
    recipient: str
    kind: str
    payload: bytes


@dataclass
class SubjectHandle:
    id: str
    address: bytes
    subject: ActorSpec
    account: Account
    recipient: ActorSpec
    role: str
    nonce: bytes
    mechanism: Mechanism
    interp: ReferenceInterpreter
    data: list[DataInstance] = field(default_factory=list)
    violated: bool = False
    violation_ticks: list[int] = field(default_factory=list)


@dataclass
class ControllerHandle:
    id: str
    address: bytes
    controller: ActorSpec
    bulk_nonce: bytes
    root: str  # top-most ancestor id; members keep one address per family


@dataclass
class RunResult:
    scenario: Scenario
    ledger: Ledger
    graphs: dict[str, ProvenanceGraph]
    decisions: list[DecisionEntry]
    gas_report: GasReport
    subjects: dict[str, SubjectHandle]
    controllers: dict[str, ControllerHandle]
    members: dict[str, dict[str, Account]]
    channel: list[Message]
    checks: dict[str, Any]

    def export_chain(self) -> str:
        return dumps_chain(self.ledger.blocks)

    def audit_bundle(self, contracts: list[str] | None = None) -> AuditBundle:
        ids = contracts if contracts is not None else list(self.subjects)
        disclosures = []
        for cid in ids:
            h = self.subjects[cid]
            disclosures.append(Disclosure(h.address, h.nonce, list(h.data), format_policy(h.mechanism)))
        return AuditBundle(disclosures, self.ledger.head.block_hash)

    def decision_summary(self, contract: str | None = None) -> list[str]:
        return [
            f"{d.decision}@{d.tick}"
            for d in self.decisions
            if d.kind == "probe" and (contract is None or d.contract == contract)
        ]

    def summary(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.name,
            "blocks": self.ledger.height + 1,
            "headHash": self.ledger.head.block_hash.hex(),
            "decisions": [d.to_dict() for d in self.decisions],
            "checks": self.checks,
            "contracts": {
                **{k: v.address.hex() for k, v in self.subjects.items()},
                **{k: v.address.hex() for k, v in self.controllers.items()},
            },
        }


class Runner:
    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.s = scenario
        self.rng = random.Random(scenario.seed if seed is None else seed)
        cfg = scenario.chain
        censor = None
        if cfg.censor_withdrawals:
            deactivate = selector("deactivate")
            censor = lambda tx: tx.to is not None and tx.payload[:4] == deactivate  # noqa: E731
        self.ledger = Ledger(
            block_gas_limit=cfg.block_gas_limit,
            block_interval=cfg.block_interval,
            difficulty=cfg.difficulty,
            censor=censor,
        )
        self.accounts = {a.id: create_account(a.seed.encode()) for a in scenario.actors.values()}
        self.graphs = {a.id: ProvenanceGraph(a.id) for a in scenario.actors_with_role("subject")}
        self.subjects: dict[str, SubjectHandle] = {}
        self.controllers: dict[str, ControllerHandle] = {}
        self.members: dict[str, dict[str, Account]] = {}
        self.decisions: list[DecisionEntry] = []
        self.channel: list[Message] = []
        self.gas_rows: list[tuple[str, str | None, int]] = []
        self.deferred: list[tuple[int, int, Step]] = []
        self._fresh: dict[str, int] = {}

    # -- plumbing ------------------------------------------------------------

    def _now(self, tick: int) -> int:
        head = self.ledger.head
        return max(head.timestamp + self.ledger.block_interval, tick * self.s.chain.tick_seconds)

    def _execute(self, tx: Transaction, tick: int) -> Receipt:
        tx_hash = self.ledger.submit(tx)
        for _ in range(self.s.chain.inclusion_deadline):
            self.ledger.seal_block(self._now(tick))
            receipt = self.ledger.receipt(tx_hash)
            if receipt is not None:
                return receipt
        raise CensorshipDetected(
            f"transaction {tx_hash.hex()[:16]} from {tx.sender.hex()} not included within "
            f"{self.s.chain.inclusion_deadline} blocks"
        )

    def _call(self, account: Account, to: bytes | None, name: str, args: dict, tick: int, step: Step,
              gas: int = CALL_GAS) -> Receipt:
        tx = self.ledger.make_tx(account, to, encode_call(name, args), gas)
        receipt = self._execute(tx, tick)
        self._label(step, receipt)
        if not receipt.ok:
            raise HarnessError(f"step {step.index} ({step.action}) failed: {receipt.status} {receipt.reason}")
        return receipt

    def _label(self, step: Step, receipt: Receipt) -> None:
        label = step.get("label")
        if label:
            self.gas_rows.append((label, step.get("baseline"), receipt.gas_used))

    def _fresh_account(self, actor: ActorSpec) -> Account:
        n = self._fresh.get(actor.id, 0)
        self._fresh[actor.id] = n + 1
        return create_account(f"{actor.seed}/contract/{n}".encode())

    def _nonce(self) -> bytes:
        return self.rng.randbytes(32)

    def _send(self, sender: str, recipient: str, kind: str, payload: Any) -> bytes:
        sealed = seal(self.accounts[recipient].box_public, json.dumps(payload, sort_keys=True).encode(),
                      ephemeral_seed=self.rng.randbytes(32))
        self.channel.append(Message(sender, recipient, kind, sealed))
        return sealed

    def _resolver(self, subject: ActorSpec):
        def resolve(entity: str, attr: str) -> str:
            if entity != subject.id:
                raise ScenarioError([f"no data for entity {entity!r}"])
            for path in sorted(subject.data):
                if path.split(".")[-1] == attr:
                    return self.s.model.instance(path, subject.data[path]).value
            raise ScenarioError([f"subject {subject.id} has no data attribute {attr!r}"])

        return resolve

    def _mechanism(self, policy: str, subject: ActorSpec) -> Mechanism:
        p = first_mechanism(self.s.policies[policy])
        if isinstance(p, MechanismTemplate):
            bindings = {v: subject.id for v, _ in p.variables}
            return instantiate_template(p, bindings, self._resolver(subject))
        return p

    def _event(self, spec: dict, subject: ActorSpec) -> Event:
        attrs = {}
        for name, value in (spec.get("attributes") or {}).items():
            value = str(value)
            if value.startswith("@"):
                path = value[1:]
                if path not in subject.data:
                    raise ScenarioError([f"subject {subject.id} has no data at {path!r}"])
                value = self.s.model.instance(path, subject.data[path]).value
            attrs[name] = value
        return Event.of(spec["activity"], **attrs)

    def _instances(self, subject: ActorSpec, paths: list[str]) -> list[DataInstance]:
        return [self.s.model.instance(p, subject.data[p]) for p in paths]

    def _check_violation(self, h: SubjectHandle, tick: int, receipt: Receipt) -> None:
        holds = h.interp.violated(tick)
        expected = holds and not h.violated
        emitted = any(log.topics[0] == VIOLATION_EVENT for log in receipt.logs if log.topics)
        if expected != emitted:
            raise OracleMismatch(
                f"contract {h.id} tick {tick}: violation notification {emitted}, reference expects {expected}"
            )
        h.violated = holds
        if emitted:
            h.violation_ticks.append(tick)

    # -- steps ---------------------------------------------------------------

    def _deploy_subject(
        self, step: Step, cid: str, subject: ActorSpec, recipient: ActorSpec, role: str,
        policy: str, paths: list[str], tick: int, parent: SubjectHandle | None = None,
    ) -> SubjectHandle:
        if parent is not None:
            account, nonce = parent.account, parent.nonce
        else:
            account, nonce = self._fresh_account(subject), self._nonce()
        mechanism = self._mechanism(policy, subject)
        bp = compile_mechanism(mechanism, nonce)
        sealed_nonce = seal(self.accounts[recipient.id].box_public, nonce, ephemeral_seed=self.rng.randbytes(32))
        instances = self._instances(subject, paths)
        grants = commit_all(instances, nonce)
        args = {
            "subject": account.address,
            "controller": self.accounts[recipient.id].address,
            "sealedNonce": sealed_nonce,
            "policy": bp.to_dict(),
            "dataRefs": [r.to_bytes() for r, _ in grants],
            "storageMode": step.get("storageMode", EVENT_LOGS),
            "codeSize": self.s.calibration.get("subjectCodeSize", 3000),
        }
        if parent is not None:
            args["parent"] = parent.address
        receipt = self._call(account, None, "subject", args, tick, step, DEPLOY_GAS)
        address = receipt.created_address
        # the recipient learns the nonce from the constructor arguments
        if self.accounts[recipient.id].open(sealed_nonce) != nonce:
            raise HarnessError("recipient could not open the sealed nonce")
        self._send(subject.id, recipient.id, "data", [i.to_dict() for i in instances])
        handle = SubjectHandle(cid, address, subject, account, recipient, role, nonce, mechanism,
                               ReferenceInterpreter(mechanism), instances)
        self.subjects[cid] = handle
        return handle

    def _record_graph(self, h: SubjectHandle, grants, tx_hash: bytes, parent: bytes | None = None) -> None:
        recipient = self.accounts[h.recipient.id].address
        graph = self.graphs[h.subject.id]
        entry = graph.entry(recipient)
        if entry is not None and entry.nonce != h.nonce:
            # one graph entry per recipient; a second unrelated contract is tracked on chain only
            return
        contract = entry.contract if entry else h.address
        self.graphs[h.subject.id] = graph.record_transfer(
            recipient, h.role, grants, tx_hash, contract=contract, nonce=h.nonce, parent=parent
        )

    def step_deploy(self, step: Step) -> None:
        subject = self.s.actors[step.get("subject")]
        controller = self.s.actors[step.get("controller")]
        parent = self.subjects[step.get("parent")] if step.get("parent") else None
        if parent is not None and (parent.subject.id, parent.recipient.id) != (subject.id, controller.id):
            raise ScenarioError([f"step {step.index}: a child contract keeps its parent's subject and controller"])
        h = self._deploy_subject(step, step.get("contract"), subject, controller, CONTROLLER, step.get("policy"),
                                 list(step.get("data") or []), step.tick, parent)
        receipt = self._last_receipt()
        self._record_graph(h, commit_all(h.data, h.nonce), receipt.tx_hash)

    def _last_receipt(self) -> Receipt:
        return self.ledger.head.receipts[-1]

    def step_grantData(self, step: Step) -> None:
        h = self.subjects[step.get("contract")]
        instances = self._instances(h.subject, list(step.get("data")))
        grants = commit_all(instances, h.nonce)
        receipt = self._call(h.account, h.address, "grantData",
                             {"dataRefs": [r.to_bytes() for r, _ in grants]}, step.tick, step)
        h.data.extend(i for i in instances if i not in h.data)
        self._send(h.subject.id, h.recipient.id, "data", [i.to_dict() for i in instances])
        self._record_graph(h, grants, receipt.tx_hash)

    def _probe(self, h: SubjectHandle, event: Event, tick: int) -> dict:
        obf = obfuscate_event(event, h.nonce)
        caller = self.accounts[h.recipient.id].address
        result = self.ledger.query(h.address, "checkEvent", caller=caller, event=obf.to_dict(), tick=tick)
        oracle = h.interp.probe(event, tick)
        if result["decision"] != oracle.kind:
            raise OracleMismatch(
                f"contract {h.id} tick {tick} {event}: compiled {result['decision']}, reference {oracle.kind}\n"
                f"history: {h.interp.state.history}"
            )
        return result

    def step_usageEvent(self, step: Step) -> None:
        h = self.subjects[step.get("contract")]
        event = self._event(step.get("event"), h.subject)
        tick = step.tick
        result = self._probe(h, event, tick)
        decision = result["decision"]
        expect = step.get("expect")
        if expect is not None and expect != decision:
            raise HarnessError(f"step {step.index}: expected {expect}, contract decided {decision}")
        dishonest = bool(step.get("dishonest"))
        perform = decision in ("allow", MODIFY) or dishonest
        if decision == DELAY and not dishonest and not step.get("_deferred"):
            self.deferred.append((tick + result["delayTicks"], step.index, step))
        self.decisions.append(DecisionEntry(tick, h.id, event.activity, "probe", decision, decision, perform))
        if not perform:
            return
        if decision == MODIFY and not dishonest:
            subs = tuple((n, m.value) for n, m in h.mechanism.action.substitutions if isinstance(m, Equals))
            event = event.with_substitutions(subs)
        obf = obfuscate_event(event, h.nonce)
        receipt = self._call(self.accounts[h.recipient.id], h.address, "notifyEvent",
                             {"event": obf.to_dict(), "tick": tick}, tick, step)
        self._check_violation(h, tick, receipt)
        oracle = h.interp.probe(event, tick).kind
        logged = receipt.result()
        if logged != oracle:
            raise OracleMismatch(f"contract {h.id} tick {tick}: logged {logged}, reference {oracle}")
        h.interp.observe(event, tick)
        self.decisions.append(DecisionEntry(tick, h.id, event.activity, "notify", logged, oracle, True))

    def step_transfer(self, step: Step) -> None:
        h = self.subjects[step.get("contract")]
        processor = self.s.actors[step.get("processor")]
        event = self._event(step.get("event"), h.subject)
        tick = step.tick
        self._probe(h, event, tick)
        proc_addr = self.accounts[processor.id].address
        sealed = seal(h.account.box_public, proc_addr, ephemeral_seed=self.rng.randbytes(32))
        obf = obfuscate_event(event, h.nonce)
        receipt = self._call(self.accounts[h.recipient.id], h.address, "requestTransfer",
                             {"event": obf.to_dict(), "sealedProcessor": sealed, "tick": tick}, tick, step)
        self._check_violation(h, tick, receipt)
        decision = receipt.result()
        oracle = h.interp.probe(event, tick).kind
        if decision != oracle:
            raise OracleMismatch(f"contract {h.id} tick {tick}: transfer {decision}, reference {oracle}")
        self.decisions.append(DecisionEntry(tick, h.id, event.activity, "transfer", decision, oracle,
                                            decision != DENY))
        if decision == DENY:
            return
        h.interp.observe(event, tick)
        logs = [log for log in receipt.logs if log.topics and log.topics[0] == TRANSFER_EVENT]
        if len(logs) != 1 or h.account.open(logs[0].data) != proc_addr:
            raise HarnessError("subject could not recover the processor address from the transfer event")
        paths = list(step.get("data") or [i.path for i in h.data])
        self._send(h.recipient.id, processor.id, "data", [i.to_dict() for i in self._instances(h.subject, paths)])
        ph = self._deploy_subject(step, step.get("newContract"), h.subject, processor, PROCESSOR,
                                  step.get("policy"), paths, tick)
        deploy = self._last_receipt()
        self._record_graph(ph, commit_all(ph.data, ph.nonce), deploy.tx_hash,
                           parent=self.accounts[h.recipient.id].address)

    def step_timeStep(self, step: Step) -> None:
        h = self.subjects[step.get("contract")]
        by = step.get("by", "subject")
        account = h.account if by == "subject" else self.accounts[h.recipient.id]
        receipt = self._call(account, h.address, "notifyTimeStep", {"tick": step.tick}, step.tick, step)
        self._check_violation(h, step.tick, receipt)
        h.interp.advance(step.tick)
        expect = step.get("expectViolation")
        if expect is not None and bool(expect) != h.violated:
            raise HarnessError(f"step {step.index}: expected violation={expect}, got {h.violated}")

    def step_addChild(self, step: Step) -> None:
        h = self.subjects[step.get("contract")]
        child = self.subjects[step.get("child")]
        by = step.get("by", "subject")
        account = h.account if by == "subject" else self.accounts[h.recipient.id]
        self._call(account, h.address, "addChildContract", {"child": child.address}, step.tick, step)

    def step_withdraw(self, step: Step) -> None:
        h = self.subjects[step.get("contract")]
        self._call(h.account, h.address, "deactivate", {}, step.tick, step)

    def step_deployController(self, step: Step) -> None:
        actor = self.s.actors[step.get("controller")]
        account = self.accounts[actor.id]
        text = format_document(self.s.policies[step.get("policy")])
        args = {
            "controller": account.address,
            "policyTemplate": text,
            "joinMode": step.get("joinMode", "autoJoin"),
            "codeSize": self.s.calibration.get("controllerCodeSize", 1500),
        }
        root = step.get("contract")
        if step.get("parent"):
            parent = self.controllers[step.get("parent")]
            args["parent"] = parent.address
            root = parent.root
        receipt = self._call(account, None, "controller", args, step.tick, step, DEPLOY_GAS)
        cid = step.get("contract")
        self.controllers[cid] = ControllerHandle(cid, receipt.created_address, actor, self._nonce(), root)
        self.members.setdefault(root, {})

    def _member_accounts(self, step: Step, ch: ControllerHandle) -> list[Account]:
        family = self.members[ch.root]
        if step.get("subjects"):
            keys = list(step.get("subjects"))
        else:
            keys = [f"member-{i}" for i in range(int(step.get("count")))]
        out = []
        for key in keys:
            if key not in family:
                actor = self.s.actors.get(key)
                seed = actor.seed if actor else f"{self.s.name}/{key}"
                family[key] = create_account(f"{seed}/controller/{ch.root}".encode())
            out.append(family[key])
        return out

    def _batch(self, step: Step, ch: ControllerHandle, function: str) -> None:
        hashes = []
        for account in self._member_accounts(step, ch):
            tx = self.ledger.make_tx(account, ch.address, encode_call(function), JOIN_GAS)
            hashes.append(self.ledger.submit(tx))
        waiting = set(hashes)
        idle = 0
        while waiting:
            block = self.ledger.seal_block(self._now(step.tick))
            included = {r.tx_hash for r in block.receipts} & waiting
            idle = 0 if included else idle + 1
            if idle >= self.s.chain.inclusion_deadline:
                raise CensorshipDetected(f"{len(waiting)} {function} requests were never included")
            waiting -= included
        for h in hashes:
            receipt = self.ledger.receipt(h)
            self._label(step, receipt)
            if not receipt.ok:
                raise HarnessError(f"step {step.index} ({function}) failed: {receipt.reason}")

    def step_join(self, step: Step) -> None:
        self._batch(step, self.controllers[step.get("contract")], "join")

    def step_leave(self, step: Step) -> None:
        self._batch(step, self.controllers[step.get("contract")], "leave")

    def step_restrict(self, step: Step) -> None:
        self._batch(step, self.controllers[step.get("contract")], "restrict")

    def step_bulkEvent(self, step: Step) -> None:
        ch = self.controllers[step.get("contract")]
        params = step.get("params") or {}
        digests = sorted(salted_digest(k, str(v), nonce=ch.bulk_nonce) for k, v in params.items())
        self._call(self.accounts[ch.controller.id], ch.address, "logBulkEvent",
                   {"templateRef": step.get("template"), "params": digests, "tick": step.tick}, step.tick, step)

    def step_linkChild(self, step: Step) -> None:
        ch = self.controllers[step.get("contract")]
        child = self.controllers[step.get("child")]
        self._call(self.accounts[ch.controller.id], ch.address, "addChildContract",
                   {"child": child.address}, step.tick, step)

    # -- driver --------------------------------------------------------------

    def _run_deferred(self, until: int | None) -> None:
        while self.deferred:
            self.deferred.sort(key=lambda d: (d[0], d[1]))
            tick, _, step = self.deferred[0]
            if until is not None and tick > until:
                return
            self.deferred.pop(0)
            params = {k: v for k, v in step.params.items() if k != "expect"}
            params["_deferred"] = True  # a second delay drops the event
            self.step_usageEvent(Step(step.index, tick, step.action, params))

    def run(self) -> RunResult:
        for step in self.s.timeline:
            self._run_deferred(step.tick)
            getattr(self, f"step_{step.action}")(step)
        self._run_deferred(None)
        checks = {
            "chainValid": bool(self.ledger.verify()),
            "oracleAgreement": True,
            "unlinkable": self._unlinkable(),
            "violations": {k: h.violation_ticks for k, h in self.subjects.items() if h.violation_ticks},
        }
        if not checks["unlinkable"]:
            raise HarnessError("a digest or address is shared between contracts of one subject")
        report = build_gas_report(self.gas_rows, self.s.baselines)
        return RunResult(self.s, self.ledger, self.graphs, self.decisions, report, self.subjects,
                         self.controllers, self.members, self.channel, checks)

    def _unlinkable(self) -> bool:
        digests: dict[bytes, set[str]] = {}
        for h in self.subjects.values():
            for token in _contract_digests(self.ledger, h.address):
                digests.setdefault(token, set()).add(h.id)
        by_subject: dict[str, list[SubjectHandle]] = {}
        for h in self.subjects.values():
            by_subject.setdefault(h.subject.id, []).append(h)
        for handles in by_subject.values():
            roots = [h for h in handles if h.address not in _children(handles)]
            addresses = [h.account.address for h in roots]
            if len(addresses) != len(set(addresses)):
                return False
            for token, owners in digests.items():
                if len({o for o in owners if self.subjects[o] in roots}) > 1:
                    return False
        return True


def _children(handles: list[SubjectHandle]) -> set[bytes]:
    nonces: dict[bytes, list[SubjectHandle]] = {}
    for h in handles:
        nonces.setdefault(h.nonce, []).append(h)
    out = set()
    for group in nonces.values():
        out.update(h.address for h in group[1:])
    return out


def _digest_tokens(value: Any) -> list[bytes]:
    if isinstance(value, bytes):
        if len(value) in (32, 64):
            return [value[i : i + 32] for i in range(0, len(value), 32)]
        return []
    if isinstance(value, str) and len(value) == 64:
        try:
            return [bytes.fromhex(value)]
        except ValueError:
            return []
    if isinstance(value, dict):
        return [t for v in value.values() for t in _digest_tokens(v)]
    if isinstance(value, list):
        return [t for v in value for t in _digest_tokens(v)]
    return []


def _contract_digests(ledger: Ledger, address: bytes) -> set[bytes]:
    out: set[bytes] = set()
    for block in ledger.blocks:
        for tx, receipt in zip(block.transactions, block.receipts):
            if tx.to == address or (tx.is_create and receipt.created_address == address):
                out.update(_digest_tokens(decode_args(tx.payload)[1]))
    return out


def measure_throughput(block_gas_limit: int = 4_000_000, block_interval: int = 10, blocks: int = 5) -> float:
    """Fill ``blocks`` blocks with minimal value transfers; return included tx per second."""
    sender = create_account(b"throughput/sender")
    sink = create_account(b"throughput/sink").address
    ledger = Ledger(block_gas_limit=block_gas_limit, block_interval=block_interval,
                    alloc={sender.address: 10**30})
    per_block = block_gas_limit // ledger.schedule.tx_base + 1
    for _ in range(blocks * per_block):
        ledger.submit(ledger.make_tx(sender, sink, b"", ledger.schedule.tx_base, value=1))
    sealed = [ledger.seal_block() for _ in range(blocks)]
    included = sum(len(b.transactions) for b in sealed)
    return included / (blocks * block_interval)


def run_scenario(scenario: Scenario, seed: int | None = None) -> RunResult:
    return Runner(scenario, seed).run()


def write_outputs(result: RunResult, chain: str | Path | None = None, report: str | Path | None = None,
                  bundle: str | Path | None = None) -> None:
    if chain:
        Path(chain).write_text(result.export_chain())
    if report:
        Path(report).write_text(json.dumps(result.gas_report.to_dict(), indent=2, sort_keys=True) + "\n")
    if bundle:
        result.audit_bundle().save(bundle)
