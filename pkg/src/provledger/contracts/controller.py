"""Controller contract shared by many subjects.

The policy templates are constructor-fixed code. Storage holds nothing
but the membership map: one slot per subject, keyed like a mapping
``sha3(address || MEMBERS_INDEX)``. A slot value of 1 means joined; in an
auto-join child, 2 records that the subject opted out of inheriting the
parent's membership.
"""

from __future__ import annotations

from typing import Any

from ..hashing import address_word, sha3, to_int, word
from ..ledger.contract import NativeContract, external, view
from ..policy.ast import MechanismTemplate
from ..policy.parser import PolicyParseError, parse_document
from .events import BULK_EVENT, CHILD_LINKED, JOINED, LEFT

AUTO_JOIN = "autoJoin"
EXPLICIT_REJOIN = "explicitRejoin"
JOIN_MODES = (AUTO_JOIN, EXPLICIT_REJOIN)

MEMBERS_INDEX = word(1)
MEMBER = 1
RESTRICTED = 2


def member_slot(subject: bytes) -> bytes:
    return sha3(address_word(subject) + MEMBERS_INDEX)


class ControllerContract(NativeContract):
    name = "controller"
    default_code_size = 1500

    @classmethod
    def code_size(cls, args: dict[str, Any]) -> int:
        # the template text is deployed as part of the code
        text = args.get("policyTemplate", "")
        return super().code_size(args) + len(text.encode("utf-8"))

    @property
    def controller(self) -> bytes:
        return bytes.fromhex(self.ctx.code["controller"])

    def _status(self, subject: bytes) -> int:
        return to_int(self.ctx.sload(member_slot(subject)))

    def constructor(
        self,
        controller: bytes,
        policyTemplate: str,
        joinMode: str = AUTO_JOIN,
        parent: bytes | None = None,
    ) -> None:
        ctx = self.ctx
        ctx.require(ctx.caller == controller, "only the controller deploys its contract")
        ctx.require(joinMode in JOIN_MODES, "unknown join mode")
        try:
            policies = parse_document(policyTemplate)
        except PolicyParseError as exc:
            ctx.revert(f"policy template does not parse: {exc}")
        names = [p.name for p in policies if isinstance(p, MechanismTemplate)]
        ctx.require(bool(names), "policy document declares no template")
        if parent is not None:
            ctx.require(ctx.blueprint_of(parent) == self.name, "parent is not a controller contract")
        ctx.set_code("controller", controller.hex())
        ctx.set_code("policyTemplate", policyTemplate)
        ctx.set_code("templates", names)
        ctx.set_code("joinMode", joinMode)
        ctx.set_code("parent", None if parent is None else parent.hex())

    @external
    def join(self) -> None:
        ctx = self.ctx
        ctx.require(ctx.instance.active, "contract is inactive")
        ctx.require(self._status(ctx.caller) != MEMBER, "already a member")
        ctx.sstore(member_slot(ctx.caller), word(MEMBER))
        ctx.emit([JOINED, address_word(ctx.caller)])

    @external
    def leave(self) -> None:
        ctx = self.ctx
        ctx.require(self._status(ctx.caller) == MEMBER, "not a member")
        ctx.sstore(member_slot(ctx.caller), word(0))
        ctx.emit([LEFT, address_word(ctx.caller)])

    @external
    def restrict(self) -> None:
        """Opt out of membership inherited from an auto-join parent."""
        ctx = self.ctx
        ctx.require(ctx.code["joinMode"] == AUTO_JOIN and ctx.code["parent"] is not None, "nothing to restrict")
        ctx.require(self._status(ctx.caller) != RESTRICTED, "already restricted")
        ctx.sstore(member_slot(ctx.caller), word(RESTRICTED))
        ctx.emit([LEFT, address_word(ctx.caller)])

    @external
    def logBulkEvent(self, templateRef: str, params: list, tick: int) -> None:
        ctx = self.ctx
        ctx.require(ctx.instance.active, "contract is inactive")
        ctx.require(ctx.caller == self.controller, "only the controller logs bulk events")
        ctx.require(templateRef in ctx.code["templates"], f"unknown template {templateRef!r}")
        ctx.require(all(isinstance(p, bytes) and len(p) == 32 for p in params), "parameters are 32-byte digests")
        ctx.require(isinstance(tick, int) and tick >= 0, "bad tick")
        ctx.emit([BULK_EVENT, sha3(templateRef.encode("utf-8"))], word(tick) + b"".join(params))

    @external
    def addChildContract(self, child: bytes) -> None:
        ctx = self.ctx
        ctx.require(ctx.caller == self.controller, "only the controller links children")
        ctx.require(ctx.blueprint_of(child) == self.name, "child is not a deployed controller contract")
        ctx.require(ctx.view(child, "parentContract") == ctx.address, "child does not name this parent")
        mode = ctx.view(child, "joinMode")
        ctx.emit([CHILD_LINKED, address_word(child)], word(JOIN_MODES.index(mode)))

    @view
    def isMember(self, subject: bytes) -> bool:
        status = self._status(subject)
        if status:
            return status == MEMBER
        parent = self.ctx.code["parent"]
        if self.ctx.code["joinMode"] == AUTO_JOIN and parent is not None:
            return bool(self.ctx.view(bytes.fromhex(parent), "isMember", subject=subject))
        return False

    @view
    def parentContract(self) -> bytes | None:
        parent = self.ctx.code["parent"]
        return None if parent is None else bytes.fromhex(parent)

    @view
    def joinMode(self) -> str:
        return self.ctx.code["joinMode"]

    @view
    def policyTemplate(self) -> str:
        return self.ctx.code["policyTemplate"]

    @view
    def controllerAddress(self) -> bytes:
        return self.controller
