"""Data usage contract deployed by a subject for one controller.

Storage layout:

* policy state: packed words and cardinality buckets at slots
  ``0 .. n`` as laid out by the compiler;
* ``CONFIG_SLOT``: sentinel, reference count and child count;
* data references (state-variable mode): two consecutive slots per
  reference starting at ``REFS_BASE``;
* linked children: one slot each starting at ``CHILDREN_BASE``.

The compiled policy, the two ACL addresses and the storage mode are
constructor-fixed code values; their cost is part of the calibrated code
size.
"""

from __future__ import annotations

import json
from functools import lru_cache
from typing import Any

from ..compiler.blueprint import ContractBlueprint
from ..compiler.obfuscation import ObfuscatedEvent
from ..compiler.runtime import PolicyRuntime, PolicyRuntimeError, initial_words
from ..hashing import address_word, canonical_json, sha3, to_int, word
from ..ledger.contract import NativeContract, external, view
from .events import (
    CHILD_LINKED,
    DATA_REFERENCE,
    NOTIFY,
    RECORD_KINDS,
    TRANSFER,
    TRANSFER_EVENT,
    USAGE_EVENT_RECORD,
    VIOLATION_EVENT,
    UsageRecord,
)

STATE_VARIABLES = "stateVariables"
EVENT_LOGS = "eventLogs"
STORAGE_MODES = (STATE_VARIABLES, EVENT_LOGS)

CONFIG_SLOT = sha3(b"subject.config")
REFS_BASE = to_int(sha3(b"subject.refs"))
CHILDREN_BASE = to_int(sha3(b"subject.children"))
_CONFIG_SENTINEL = 1 << 248
_MASK32 = 0xFFFFFFFF


@lru_cache(maxsize=256)
def _blueprint(encoded: str) -> ContractBlueprint:
    return ContractBlueprint.from_dict(json.loads(encoded))


def _addr(value: Any) -> bytes:
    if not isinstance(value, bytes) or len(value) != 20:
        raise ValueError("expected a 20-byte address")
    return value


class SubjectContract(NativeContract):
    name = "subject"
    default_code_size = 3635

    # -- helpers -----------------------------------------------------------

    @property
    def subject(self) -> bytes:
        return bytes.fromhex(self.ctx.code["subject"])

    @property
    def controller(self) -> bytes:
        return bytes.fromhex(self.ctx.code["controller"])

    @property
    def blueprint(self) -> ContractBlueprint:
        return _blueprint(self.ctx.code["policy"])

    def _runtime(self) -> PolicyRuntime:
        ctx = self.ctx
        return PolicyRuntime(self.blueprint, lambda s: to_int(ctx.sload(word(s))), ctx.step)

    def _flush(self, rt: PolicyRuntime) -> None:
        for slot, value in rt.dirty_words().items():
            self.ctx.sstore(word(slot), word(value))

    def _config(self) -> tuple[int, int]:
        w = to_int(self.ctx.sload(CONFIG_SLOT))
        return w & _MASK32, (w >> 32) & _MASK32

    def _set_config(self, refs: int, children: int) -> None:
        self.ctx.sstore(CONFIG_SLOT, word(_CONFIG_SENTINEL | children << 32 | refs))

    def _require_active(self) -> None:
        self.ctx.require(self.ctx.instance.active, "contract is inactive")

    def _store_refs(self, refs: list[bytes], start: int) -> None:
        ctx = self.ctx
        for i, raw in enumerate(refs):
            if not isinstance(raw, bytes) or len(raw) != 64:
                ctx.revert("data references are 64 bytes")
            if ctx.code["storageMode"] == STATE_VARIABLES:
                slot = REFS_BASE + 2 * (start + i)
                ctx.sstore(word(slot), raw[:32])
                ctx.sstore(word(slot + 1), raw[32:])
            else:
                ctx.emit([DATA_REFERENCE], raw)

    def _check_violation(self, rt: PolicyRuntime, tick: int) -> None:
        holds = rt.violation_holds()
        if holds and not rt.violated_flag:
            self.ctx.emit([VIOLATION_EVENT], word(tick))
        if holds != rt.violated_flag:
            rt.set_violated(holds)

    # -- construction ------------------------------------------------------

    def constructor(
        self,
        subject: bytes,
        controller: bytes,
        sealedNonce: bytes,
        policy: dict,
        dataRefs: list | None = None,
        storageMode: str = EVENT_LOGS,
        parent: bytes | None = None,
    ) -> None:
        ctx = self.ctx
        ctx.require(ctx.caller == _addr(subject), "only the subject deploys its contract")
        ctx.require(storageMode in STORAGE_MODES, "unknown storage mode")
        ctx.require(isinstance(sealedNonce, bytes) and len(sealedNonce) > 32, "sealed nonce missing")
        bp = ContractBlueprint.from_dict(policy)
        ctx.set_code("subject", subject.hex())
        ctx.set_code("controller", _addr(controller).hex())
        ctx.set_code("storageMode", storageMode)
        ctx.set_code("policy", canonical_json(bp.to_dict()).decode())
        ctx.set_code("parent", None if parent is None else _addr(parent).hex())
        for slot, value in initial_words(bp).items():
            ctx.sstore(word(slot), word(value))
        refs = list(dataRefs or [])
        self._set_config(len(refs), 0)
        self._store_refs(refs, 0)

    # -- policy entry points -----------------------------------------------

    @view
    def checkEvent(self, event: dict, tick: int) -> dict:
        self._require_active()
        rt = self._runtime()
        try:
            rt.advance(tick)
        except PolicyRuntimeError as exc:
            self.ctx.revert(str(exc))
        decision = rt.decide(ObfuscatedEvent.from_dict(event))
        bp = self.blueprint
        out: dict[str, Any] = {"decision": decision}
        if decision == "delay":
            out["delayTicks"] = bp.delay_ticks
        if decision == "modify":
            out["substitutions"] = [[n.hex(), v.hex()] for n, v in bp.substitutions]
        return out

    def _record(self, event: dict, tick: int, kind: int) -> tuple[str, ObfuscatedEvent, PolicyRuntime]:
        ctx = self.ctx
        self._require_active()
        ctx.require(ctx.caller == self.controller, "only the controller reports usage")
        obf = ObfuscatedEvent.from_dict(event)
        rt = self._runtime()
        ctx.require(tick >= rt.tick, f"stale tick {tick} < {rt.tick}")
        rt.advance(tick)
        self._check_violation(rt, tick)
        decision = rt.decide(obf)
        if kind == NOTIFY or decision != "deny":
            rt.observe(obf)
        record = UsageRecord(obf.activity, decision, RECORD_KINDS[kind], tick, tuple(obf.value_digests))
        ctx.emit([obf.activity, USAGE_EVENT_RECORD], record.encode_data())
        self._flush(rt)
        return decision, obf, rt

    @external
    def notifyEvent(self, event: dict, tick: int) -> str:
        return self._record(event, tick, NOTIFY)[0]

    @external
    def requestTransfer(self, event: dict, sealedProcessor: bytes, tick: int) -> str:
        decision = self._record(event, tick, TRANSFER)[0]
        if decision != "deny":
            self.ctx.emit([TRANSFER_EVENT], sealedProcessor)
        return decision

    @external
    def notifyTimeStep(self, tick: int) -> bool:
        ctx = self.ctx
        self._require_active()
        ctx.require(ctx.caller in (self.subject, self.controller), "only subject or controller may step time")
        rt = self._runtime()
        ctx.require(tick > rt.tick, f"tick {tick} does not advance past {rt.tick}")
        rt.advance(tick)
        self._check_violation(rt, tick)
        self._flush(rt)
        return rt.violated_flag

    # -- data, children, withdrawal ----------------------------------------

    @external
    def grantData(self, dataRefs: list) -> int:
        ctx = self.ctx
        self._require_active()
        ctx.require(ctx.caller == self.subject, "only the subject grants data")
        refs, children = self._config()
        self._store_refs(list(dataRefs), refs)
        self._set_config(refs + len(dataRefs), children)
        return refs + len(dataRefs)

    @external
    def addChildContract(self, child: bytes) -> int:
        ctx = self.ctx
        self._require_active()
        ctx.require(ctx.caller in (self.subject, self.controller), "only subject or controller link children")
        ctx.require(ctx.blueprint_of(_addr(child)) == self.name, "child is not a deployed subject contract")
        ctx.require(ctx.view(child, "parentContract") == ctx.address, "child does not name this parent")
        refs, children = self._config()
        ctx.sstore(word(CHILDREN_BASE + children), address_word(child))
        self._set_config(refs, children + 1)
        ctx.emit([CHILD_LINKED, address_word(child)])
        return children + 1

    @external
    def deactivate(self) -> None:
        ctx = self.ctx
        self._require_active()
        ctx.require(ctx.caller == self.subject, "only the subject can withdraw consent")
        ctx.deactivate()

    # -- views -------------------------------------------------------------

    @view
    def parentContract(self) -> bytes | None:
        parent = self.ctx.code.get("parent")
        return None if parent is None else bytes.fromhex(parent)

    @view
    def children(self) -> list:
        _, n = self._config()
        return [self.ctx.sload(word(CHILDREN_BASE + i))[12:] for i in range(n)]

    @view
    def dataRefs(self) -> list:
        refs, _ = self._config()
        if self.ctx.code["storageMode"] != STATE_VARIABLES:
            return []
        out = []
        for i in range(refs):
            slot = REFS_BASE + 2 * i
            out.append(self.ctx.sload(word(slot)) + self.ctx.sload(word(slot + 1)))
        return out

    @view
    def policyTick(self) -> int:
        return self._runtime().tick

    @view
    def isActive(self) -> bool:
        return self.ctx.instance.active

    @view
    def info(self) -> dict:
        code = self.ctx.code
        return {
            "subject": self.subject,
            "controller": self.controller,
            "storageMode": code["storageMode"],
            "policyDigest": self.blueprint.digest(),
            "active": self.ctx.instance.active,
        }
