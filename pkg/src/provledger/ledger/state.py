"""World state: account balances/nonces and contract instances."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable

from ..hashing import canonical_json, sha3

ZERO_WORD = bytes(32)


@dataclass
class AccountState:
    balance: int = 0
    nonce: int = 0


@dataclass
class ContractInstance:
    address: bytes
    blueprint: str
    code_size: int
    storage: dict[bytes, bytes] = field(default_factory=dict)
    active: bool = True
    # constructor-fixed values (the compiled policy, ACL addresses); paid for via code_size
    code: dict = field(default_factory=dict)
    # every key ever written; diagnostic only, not part of the state root
    touched: set[bytes] = field(default_factory=set)

    def get(self, key: bytes) -> bytes:
        return self.storage.get(key, ZERO_WORD)


class WorldState:
    def __init__(self) -> None:
        self.accounts: dict[bytes, AccountState] = {}
        self.contracts: dict[bytes, ContractInstance] = {}

    def account(self, address: bytes) -> AccountState:
        acct = self.accounts.get(address)
        if acct is None:
            acct = self.accounts[address] = AccountState()
        return acct

    def peek_account(self, address: bytes) -> AccountState:
        return self.accounts.get(address, AccountState())

    def root(self) -> bytes:
        doc = {
            "accounts": {a.hex(): [s.balance, s.nonce] for a, s in sorted(self.accounts.items())},
            "contracts": {
                a.hex(): [
                    c.blueprint,
                    c.code_size,
                    c.active,
                    c.code,
                    [[k.hex(), v.hex()] for k, v in sorted(c.storage.items())],
                ]
                for a, c in sorted(self.contracts.items())
            },
        }
        return sha3(canonical_json(doc))

    def clone(self) -> "WorldState":
        return copy.deepcopy(self)


class Journal:
    """Undo log for one transaction."""

    def __init__(self) -> None:
        self._undo: list[Callable[[], None]] = []

    def record(self, undo: Callable[[], None]) -> None:
        self._undo.append(undo)

    def rollback(self) -> None:
        while self._undo:
            self._undo.pop()()

    def __len__(self) -> int:
        return len(self._undo)
