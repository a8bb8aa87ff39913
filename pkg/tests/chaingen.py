"""Shared chain fixtures: a toy counter contract plus chain building and tampering helpers."""

import random

from provledger.hashing import sha3, word
from provledger.ledger.chain import Ledger
from provledger.ledger.contract import NativeContract, Registry, external, view
from provledger.ledger.keys import create_account


class Counter(NativeContract):
    name = "counter"
    default_code_size = 100

    def constructor(self, start: int = 0) -> None:
        if start:
            self.ctx.sstore(word(0), word(start))

    @external
    def bump(self, by: int = 1) -> int:
        value = int.from_bytes(self.ctx.sload(word(0)), "big") + by
        self.ctx.sstore(word(0), word(value))
        self.ctx.emit([sha3(b"Bumped")], word(value))
        return value

    @external
    def fail(self) -> None:
        self.ctx.sstore(word(1), word(1))
        self.ctx.revert("nope")

    @external
    def spin(self, n: int) -> None:
        self.ctx.step(n)

    @view
    def value(self) -> int:
        return int.from_bytes(self.ctx.sload(word(0)), "big")

    @view
    def sneaky(self) -> None:
        self.ctx.sstore(word(0), word(7))


REGISTRY = Registry()
REGISTRY.register(Counter)


def make_ledger(**kw) -> Ledger:
    return Ledger(registry=REGISTRY, **kw)


def build_chain(n_blocks: int, seed: int = 0) -> list:
    rng = random.Random(seed)
    alice = create_account(b"alice")
    led = make_ledger(alloc={alice.address: 10**9})
    addr = led.deploy(alice, "counter", {}).created_address
    while led.height < n_blocks - 1:
        if rng.random() < 0.5:
            led.invoke(alice, addr, "bump", {"by": rng.randint(1, 9)})
        else:
            led.transfer(alice, create_account(bytes([rng.randint(1, 200)])).address, 1)
    return led.blocks


def tamper(block, rng: random.Random) -> None:
    """Flip one byte (or bump one integer) somewhere inside ``block``."""
    targets = [("block", "parent_hash"), ("block", "state_root"), ("block", "block_hash"), ("block", "extra_data"),
               ("int", "timestamp"), ("int", "gas_used"), ("int", "pow_nonce")]
    for i, _ in enumerate(block.transactions):
        targets += [("tx", i, "payload"), ("tx", i, "signature"), ("tx", i, "sender")]
        targets += [("rc", i, "return_value"), ("rcint", i, "gas_used")]
    target = rng.choice(targets)
    kind = target[0]
    if kind == "int":
        setattr(block, target[1], getattr(block, target[1]) + 1)
        return
    if kind == "rcint":
        rc = block.receipts[target[1]]
        rc.gas_used += 1
        return
    obj = block if kind == "block" else (block.transactions if kind == "tx" else block.receipts)[target[1]]
    name = target[-1]
    raw = bytearray(getattr(obj, name))
    if not raw:
        raw = bytearray(b"\x00")
    pos = rng.randrange(len(raw))
    raw[pos] ^= rng.randint(1, 255)
    setattr(obj, name, bytes(raw))
