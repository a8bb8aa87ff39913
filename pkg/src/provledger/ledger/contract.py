"""Native contract blueprints and their metered execution context.

Contracts are Python classes registered by name. They keep no state of
their own: everything persistent goes through :class:`CallContext`,
which charges gas for every storage access, log and compute step and
journals each mutation so a failed call can be rolled back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, ClassVar

from ..hashing import selector
from .gas import GasMeter, GasSchedule
from .state import ZERO_WORD, ContractInstance, Journal, WorldState


class Revert(Exception):
    pass


class ReadOnlyViolation(Exception):
    pass


@dataclass
class LogEvent:
    emitter: bytes
    topics: list[bytes]
    data: bytes
    block_number: int = 0
    tx_index: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "emitter": self.emitter.hex(),
            "topics": [t.hex() for t in self.topics],
            "data": self.data.hex(),
            "blockNumber": self.block_number,
            "txIndex": self.tx_index,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "LogEvent":
        return cls(
            bytes.fromhex(d["emitter"]),
            [bytes.fromhex(t) for t in d["topics"]],
            bytes.fromhex(d["data"]),
            d["blockNumber"],
            d["txIndex"],
        )


def external(fn: Callable) -> Callable:
    """Mark a state-mutating entry point."""
    fn._abi = "external"
    return fn


def view(fn: Callable) -> Callable:
    """Mark a read-only entry point."""
    fn._abi = "view"
    return fn


class NativeContract:
    name: ClassVar[str] = ""
    default_code_size: ClassVar[int] = 1000

    def __init__(self, ctx: "CallContext"):
        self.ctx = ctx

    @classmethod
    def code_size(cls, args: dict[str, Any]) -> int:
        return int(args.get("codeSize", cls.default_code_size))

    def constructor(self, **args: Any) -> None:
        pass

    @classmethod
    def entry_point(cls, function: str) -> tuple[str, Callable] | None:
        fn = getattr(cls, function, None)
        kind = getattr(fn, "_abi", None)
        return (kind, fn) if kind else None

    @classmethod
    def functions(cls) -> dict[str, str]:
        out = {}
        for attr in dir(cls):
            kind = getattr(getattr(cls, attr, None), "_abi", None)
            if kind:
                out[attr] = kind
        return out


class Registry:
    def __init__(self) -> None:
        self._by_name: dict[str, type[NativeContract]] = {}
        self._by_selector: dict[bytes, str] = {}

    def register(self, cls: type[NativeContract]) -> type[NativeContract]:
        if not cls.name:
            raise ValueError("contract class needs a name")
        self._by_name[cls.name] = cls
        self._by_selector[selector(cls.name)] = cls.name
        return cls

    def get(self, name: str) -> type[NativeContract]:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown blueprint {name!r}") from None

    def by_selector(self, sel: bytes) -> str:
        try:
            return self._by_selector[sel]
        except KeyError:
            raise KeyError(f"unknown blueprint selector {sel.hex()}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return sorted(self._by_name)


class CallContext:
    def __init__(
        self,
        *,
        state: WorldState,
        registry: Registry,
        instance: ContractInstance,
        caller: bytes,
        meter: GasMeter,
        journal: Journal,
        block_number: int,
        timestamp: int,
        read_only: bool,
        logs: list[LogEvent] | None = None,
        depth: int = 0,
        constructing: bool = False,
    ):
        self.state = state
        self.registry = registry
        self.instance = instance
        self.caller = caller
        self.meter = meter
        self.schedule: GasSchedule = meter.schedule
        self.journal = journal
        self.block_number = block_number
        self.timestamp = timestamp
        self.read_only = read_only
        self.logs = logs if logs is not None else []
        self.depth = depth
        self.constructing = constructing
        self.writes: list[bytes] = []

    @property
    def address(self) -> bytes:
        return self.instance.address

    @property
    def code(self) -> dict[str, Any]:
        return self.instance.code

    def set_code(self, key: str, value: Any) -> None:
        if not self.constructing:
            raise ReadOnlyViolation("contract code is fixed after construction")
        self.instance.code[key] = value

    def step(self, n: int = 1) -> None:
        self.meter.consume(n * self.schedule.compute_per_step, "compute")

    def sload(self, key: bytes) -> bytes:
        self.meter.consume(self.schedule.storage_read, "sload")
        return self.instance.get(key)

    def sstore(self, key: bytes, value: bytes) -> None:
        if self.read_only:
            raise ReadOnlyViolation("storage write during a read-only call")
        if len(key) != 32 or len(value) != 32:
            raise ValueError("storage keys and values are 32-byte words")
        inst = self.instance
        old = inst.storage.get(key)
        current = old if old is not None else ZERO_WORD
        if current == ZERO_WORD and value != ZERO_WORD:
            cost = self.schedule.storage_write_new_slot
        else:
            cost = self.schedule.storage_write_existing_slot
        self.meter.consume(cost, "sstore")
        was_touched = key in inst.touched

        def undo() -> None:
            if old is None:
                inst.storage.pop(key, None)
            else:
                inst.storage[key] = old
            if not was_touched:
                inst.touched.discard(key)

        self.journal.record(undo)
        if value == ZERO_WORD:
            inst.storage.pop(key, None)
        else:
            inst.storage[key] = value
        inst.touched.add(key)
        self.writes.append(key)

    def emit(self, topics: list[bytes], data: bytes = b"") -> None:
        if self.read_only:
            raise ReadOnlyViolation("log emission during a read-only call")
        if len(topics) > 4 or any(len(t) != 32 for t in topics):
            raise ValueError("a log carries at most four 32-byte topics")
        self.meter.consume(self.schedule.log_cost(len(topics), len(data)), "log")
        self.logs.append(LogEvent(self.address, list(topics), bytes(data)))

    def revert(self, reason: str) -> None:
        raise Revert(reason)

    def require(self, condition: bool, reason: str) -> None:
        if not condition:
            raise Revert(reason)

    def deactivate(self) -> None:
        if self.read_only:
            raise ReadOnlyViolation("deactivation during a read-only call")
        inst = self.instance

        def undo() -> None:
            inst.active = True

        self.journal.record(undo)
        inst.active = False

    def contract_exists(self, address: bytes) -> bool:
        return address in self.state.contracts

    def blueprint_of(self, address: bytes) -> str | None:
        inst = self.state.contracts.get(address)
        return inst.blueprint if inst else None

    def view(self, address: bytes, function: str, **args: Any) -> Any:
        """Read-only call into another contract, metered on this call's gas."""
        inst = self.state.contracts.get(address)
        if inst is None:
            raise Revert("call to a non-existent contract")
        cls = self.registry.get(inst.blueprint)
        entry = cls.entry_point(function)
        if entry is None or entry[0] != "view":
            raise Revert(f"{function} is not a view function")
        sub = CallContext(
            state=self.state,
            registry=self.registry,
            instance=inst,
            caller=self.address,
            meter=self.meter,
            journal=self.journal,
            block_number=self.block_number,
            timestamp=self.timestamp,
            read_only=True,
            depth=self.depth + 1,
        )
        return entry[1](cls(sub), **args)
