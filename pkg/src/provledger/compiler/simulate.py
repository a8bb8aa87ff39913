"""Off-chain execution of a blueprint against an in-memory slot map.

This runs the exact code path a subject contract runs, minus the ledger,
so large equivalence sweeps against the reference interpreter stay fast.
"""

from __future__ import annotations

from ..policy.ast import Event
from ..policy.interpreter import Observe, Probe, Tick
from .blueprint import ContractBlueprint
from .obfuscation import obfuscate_event
from .runtime import PolicyRuntime, initial_words


class CompiledPolicy:
    def __init__(self, blueprint: ContractBlueprint, nonce: bytes):
        self.bp = blueprint
        self.nonce = nonce
        self.storage: dict[int, int] = dict(initial_words(blueprint))
        self.last_touched: set[int] = set()
        self._obf: dict[Event, object] = {}

    def _event(self, event: Event):
        obf = self._obf.get(event)
        if obf is None:
            obf = self._obf[event] = obfuscate_event(event, self.nonce)
        return obf

    def _runtime(self) -> PolicyRuntime:
        return PolicyRuntime(self.bp, lambda s: self.storage.get(s, 0))

    def _commit(self, rt: PolicyRuntime) -> None:
        dirty = rt.dirty_words()
        self.storage.update(dirty)
        self.last_touched = set(dirty)

    def copy(self) -> "CompiledPolicy":
        other = object.__new__(CompiledPolicy)
        other.bp, other.nonce, other._obf = self.bp, self.nonce, self._obf
        other.storage = dict(self.storage)
        other.last_touched = set(self.last_touched)
        return other

    @property
    def tick(self) -> int:
        return self._runtime().tick

    def probe(self, event: Event, tick: int) -> str:
        rt = self._runtime()
        rt.advance(tick)
        return rt.decide(self._event(event))

    def observe(self, event: Event, tick: int) -> None:
        rt = self._runtime()
        rt.advance(tick)
        rt.observe(self._event(event))
        self._commit(rt)

    def advance(self, tick: int) -> None:
        rt = self._runtime()
        rt.advance(tick)
        self._commit(rt)

    def violated(self, tick: int) -> bool:
        rt = self._runtime()
        rt.advance(tick)
        return rt.violation_holds()

    def step(self, item: Probe | Observe | Tick) -> str | None:
        if isinstance(item, Probe):
            return self.probe(item.event, item.tick)
        if isinstance(item, Observe):
            self.observe(item.event, item.tick)
        else:
            self.advance(item.tick)
        return None
