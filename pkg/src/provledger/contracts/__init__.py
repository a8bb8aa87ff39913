"""Deployable blueprints: per-controller subject contracts and shared controller contracts."""

from ..ledger.contract import Registry
from .controller import AUTO_JOIN, EXPLICIT_REJOIN, ControllerContract, member_slot
from .events import (
    BULK_EVENT, CHILD_LINKED, DATA_REFERENCE, JOINED, LEFT, TRANSFER_EVENT, USAGE_EVENT_RECORD, VIOLATION_EVENT,
    UsageRecord, is_usage_record,
)
from .subject import EVENT_LOGS, STATE_VARIABLES, SubjectContract


def register_all(registry: Registry) -> Registry:
    registry.register(SubjectContract)
    registry.register(ControllerContract)
    return registry


__all__ = [
    "AUTO_JOIN", "BULK_EVENT", "CHILD_LINKED", "ControllerContract", "DATA_REFERENCE", "EVENT_LOGS",
    "EXPLICIT_REJOIN", "JOINED", "LEFT", "STATE_VARIABLES", "SubjectContract", "TRANSFER_EVENT",
    "USAGE_EVENT_RECORD", "UsageRecord", "VIOLATION_EVENT", "is_usage_record", "member_slot", "register_all",
]
