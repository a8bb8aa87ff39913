"""Hash-chained ledger with metered contract execution.

Pending transactions are executed only when a block is sealed, so the
live world state always equals the state after the last sealed block.
Queries therefore never observe pending work.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from ..hashing import canonical_json, selector, sha3
from .abi import AbiError, decode_args, encode_call, from_jsonable, to_jsonable
from .contract import CallContext, LogEvent, NativeContract, ReadOnlyViolation, Registry, Revert
from .gas import FreeMeter, GasMeter, GasSchedule, OutOfGas
from .keys import Account, address_from_public_key, verify_signature
from .state import ContractInstance, Journal, WorldState

DEFAULT_BLOCK_GAS_LIMIT = 4_000_000
DEFAULT_BLOCK_INTERVAL = 10
ZERO_HASH = bytes(32)

SUCCESS = "success"
REVERTED = "reverted"
OUT_OF_GAS = "out-of-gas"


class TransactionRejected(Exception):
    pass


class QueryError(Exception):
    pass


def _hex(b: bytes | None) -> str | None:
    return None if b is None else b.hex()


def _unhex(s: str | None) -> bytes | None:
    return None if s is None else bytes.fromhex(s)


@dataclass
class Transaction:
    sender: bytes
    nonce: int
    to: bytes | None  # None marks contract creation
    payload: bytes
    gas_limit: int
    value: int = 0
    public_key: bytes = b""
    signature: bytes = b""

    def signing_dict(self) -> dict[str, Any]:
        return {
            "sender": self.sender.hex(),
            "nonce": self.nonce,
            "to": _hex(self.to),
            "payload": self.payload.hex(),
            "gasLimit": self.gas_limit,
            "value": self.value,
            "publicKey": self.public_key.hex(),
        }

    def signing_bytes(self) -> bytes:
        return canonical_json(self.signing_dict())

    def to_dict(self) -> dict[str, Any]:
        d = self.signing_dict()
        d["signature"] = self.signature.hex()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Transaction":
        return cls(
            sender=bytes.fromhex(d["sender"]),
            nonce=d["nonce"],
            to=_unhex(d["to"]),
            payload=bytes.fromhex(d["payload"]),
            gas_limit=d["gasLimit"],
            value=d["value"],
            public_key=bytes.fromhex(d["publicKey"]),
            signature=bytes.fromhex(d["signature"]),
        )

    @property
    def hash(self) -> bytes:
        return sha3(canonical_json(self.to_dict()))

    @property
    def is_create(self) -> bool:
        return self.to is None

    def signature_valid(self) -> bool:
        if len(self.public_key) != 64 or address_from_public_key(self.public_key) != self.sender:
            return False
        return verify_signature(self.public_key, self.signature, self.signing_bytes())

    @classmethod
    def signed(
        cls, account: Account, nonce: int, to: bytes | None, payload: bytes, gas_limit: int, value: int = 0
    ) -> "Transaction":
        tx = cls(account.address, nonce, to, payload, gas_limit, value, account.public_key)
        tx.signature = account.sign(tx.signing_bytes())
        return tx


@dataclass
class Receipt:
    tx_hash: bytes
    status: str
    gas_used: int
    created_address: bytes | None = None
    logs: list[LogEvent] = field(default_factory=list)
    return_value: bytes = b""
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS

    def result(self) -> Any:
        if not self.return_value:
            return None
        return from_jsonable(json.loads(self.return_value))

    def to_dict(self) -> dict[str, Any]:
        return {
            "txHash": self.tx_hash.hex(),
            "status": self.status,
            "gasUsed": self.gas_used,
            "createdAddress": _hex(self.created_address),
            "logs": [log.to_dict() for log in self.logs],
            "returnValue": self.return_value.hex(),
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Receipt":
        return cls(
            bytes.fromhex(d["txHash"]),
            d["status"],
            d["gasUsed"],
            _unhex(d["createdAddress"]),
            [LogEvent.from_dict(x) for x in d["logs"]],
            bytes.fromhex(d["returnValue"]),
            d["reason"],
        )


@dataclass
class Block:
    number: int
    parent_hash: bytes
    timestamp: int
    transactions: list[Transaction]
    receipts: list[Receipt]
    gas_used: int
    gas_limit: int
    state_root: bytes
    extra_data: bytes = b""
    difficulty: int = 0
    pow_nonce: int = 0
    block_hash: bytes = ZERO_HASH

    def header_dict(self) -> dict[str, Any]:
        return {
            "number": self.number,
            "parentHash": self.parent_hash.hex(),
            "timestamp": self.timestamp,
            "transactions": [tx.to_dict() for tx in self.transactions],
            "receipts": [r.to_dict() for r in self.receipts],
            "gasUsed": self.gas_used,
            "gasLimit": self.gas_limit,
            "stateRoot": self.state_root.hex(),
            "extraData": self.extra_data.hex(),
            "difficulty": self.difficulty,
            "powNonce": self.pow_nonce,
        }

    def compute_hash(self) -> bytes:
        return sha3(canonical_json(self.header_dict()))

    def to_dict(self) -> dict[str, Any]:
        d = self.header_dict()
        d["blockHash"] = self.block_hash.hex()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Block":
        return cls(
            number=d["number"],
            parent_hash=bytes.fromhex(d["parentHash"]),
            timestamp=d["timestamp"],
            transactions=[Transaction.from_dict(t) for t in d["transactions"]],
            receipts=[Receipt.from_dict(r) for r in d["receipts"]],
            gas_used=d["gasUsed"],
            gas_limit=d["gasLimit"],
            state_root=bytes.fromhex(d["stateRoot"]),
            extra_data=bytes.fromhex(d["extraData"]),
            difficulty=d["difficulty"],
            pow_nonce=d["powNonce"],
            block_hash=bytes.fromhex(d["blockHash"]),
        )


def meets_difficulty(block_hash: bytes, difficulty: int) -> bool:
    return difficulty <= 0 or int.from_bytes(block_hash, "big") >> (256 - difficulty) == 0


@dataclass
class ChainVerification:
    ok: bool
    bad_index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def default_registry() -> Registry:
    from ..contracts import register_all

    return register_all(Registry())


class Ledger:
    def __init__(
        self,
        *,
        schedule: GasSchedule | None = None,
        block_gas_limit: int = DEFAULT_BLOCK_GAS_LIMIT,
        block_interval: int = DEFAULT_BLOCK_INTERVAL,
        registry: Registry | None = None,
        alloc: dict[bytes, int] | None = None,
        difficulty: int = 0,
        censor: Callable[[Transaction], bool] | None = None,
    ):
        self.schedule = schedule or GasSchedule()
        self.block_gas_limit = block_gas_limit
        self.block_interval = block_interval
        self.registry = registry or default_registry()
        self.difficulty = difficulty
        # sealing-authority hook: returning True keeps the tx out of blocks
        self.censor = censor
        self.state = WorldState()
        self.blocks: list[Block] = []
        self.pending: list[Transaction] = []
        self._pending_nonce: dict[bytes, int] = {}
        self._receipts: dict[bytes, Receipt] = {}
        self._tx_location: dict[bytes, tuple[int, int]] = {}
        self._lock = threading.RLock()
        alloc = alloc or {}
        for address, balance in sorted(alloc.items()):
            self.state.account(address).balance = balance
        genesis_config = {
            "schedule": self.schedule.to_dict(),
            "blockGasLimit": block_gas_limit,
            "blockInterval": block_interval,
            "difficulty": difficulty,
            "alloc": {a.hex(): b for a, b in sorted(alloc.items())},
        }
        genesis = Block(
            number=0,
            parent_hash=ZERO_HASH,
            timestamp=0,
            transactions=[],
            receipts=[],
            gas_used=0,
            gas_limit=block_gas_limit,
            state_root=self.state.root(),
            extra_data=canonical_json(genesis_config),
            difficulty=0,
        )
        genesis.block_hash = genesis.compute_hash()
        self.blocks.append(genesis)

    @classmethod
    def from_genesis(cls, genesis: Block, registry: Registry | None = None) -> "Ledger":
        cfg = json.loads(genesis.extra_data)
        return cls(
            schedule=GasSchedule.from_dict(cfg["schedule"]),
            block_gas_limit=cfg["blockGasLimit"],
            block_interval=cfg["blockInterval"],
            registry=registry,
            alloc={bytes.fromhex(a): b for a, b in cfg["alloc"].items()},
            difficulty=cfg["difficulty"],
        )

    # -- accessors ---------------------------------------------------------

    @property
    def head(self) -> Block:
        return self.blocks[-1]

    @property
    def height(self) -> int:
        return len(self.blocks) - 1

    def state_root(self) -> bytes:
        with self._lock:
            return self.state.root()

    def contract(self, address: bytes) -> ContractInstance:
        return self.state.contracts[address]

    def account_state(self, address: bytes):
        return self.state.peek_account(address)

    def receipt(self, tx_hash: bytes) -> Receipt | None:
        return self._receipts.get(tx_hash)

    def transaction(self, tx_hash: bytes) -> Transaction | None:
        loc = self._tx_location.get(tx_hash)
        if loc is None:
            return None
        return self.blocks[loc[0]].transactions[loc[1]]

    def block_of(self, tx_hash: bytes) -> int | None:
        loc = self._tx_location.get(tx_hash)
        return None if loc is None else loc[0]

    def next_nonce(self, address: bytes) -> int:
        with self._lock:
            return self._pending_nonce.get(address, self.state.peek_account(address).nonce)

    # -- submission and sealing --------------------------------------------

    def submit(self, tx: Transaction) -> bytes:
        with self._lock:
            if tx.gas_limit > self.block_gas_limit:
                raise TransactionRejected(
                    f"gas limit {tx.gas_limit} exceeds block gas limit {self.block_gas_limit}"
                )
            if not tx.signature_valid():
                raise TransactionRejected("invalid signature")
            expected = self.next_nonce(tx.sender)
            if tx.nonce != expected:
                raise TransactionRejected(f"nonce {tx.nonce} does not match expected {expected}")
            self.pending.append(tx)
            self._pending_nonce[tx.sender] = expected + 1
            return tx.hash

    def seal_block(self, now: int | None = None) -> Block:
        with self._lock:
            parent = self.head
            timestamp = parent.timestamp + self.block_interval if now is None else now
            if timestamp < parent.timestamp:
                raise ValueError("block timestamp precedes its parent")
            number = parent.number + 1
            included: list[Transaction] = []
            receipts: list[Receipt] = []
            remaining: list[Transaction] = []
            gas_left = self.block_gas_limit
            blocked: set[bytes] = set()
            stop = False
            for tx in self.pending:
                censored = self.censor is not None and self.censor(tx)
                if stop or censored or tx.sender in blocked:
                    # later txs from the same sender would hit a nonce gap
                    blocked.add(tx.sender)
                    remaining.append(tx)
                    continue
                if tx.gas_limit > gas_left:
                    stop = True
                    remaining.append(tx)
                    continue
                receipt = self._apply(tx, number, timestamp, len(included))
                gas_left -= receipt.gas_used
                included.append(tx)
                receipts.append(receipt)
            self.pending = remaining
            block = Block(
                number=number,
                parent_hash=parent.block_hash,
                timestamp=timestamp,
                transactions=included,
                receipts=receipts,
                gas_used=self.block_gas_limit - gas_left,
                gas_limit=self.block_gas_limit,
                state_root=self.state.root(),
                difficulty=self.difficulty,
            )
            self._finalize(block)
            return block

    def _finalize(self, block: Block) -> None:
        block.block_hash = block.compute_hash()
        while not meets_difficulty(block.block_hash, block.difficulty):
            block.pow_nonce += 1
            block.block_hash = block.compute_hash()
        self.blocks.append(block)
        for i, (tx, receipt) in enumerate(zip(block.transactions, block.receipts)):
            self._receipts[receipt.tx_hash] = receipt
            self._tx_location[tx.hash] = (block.number, i)

    def seal_until_empty(self, now: int | None = None, max_blocks: int = 10_000) -> list[Block]:
        """Seal blocks until the pool drains or a block includes nothing."""
        out: list[Block] = []
        while self.pending and len(out) < max_blocks:
            out.append(self.seal_block(now if not out else None))
            if not out[-1].transactions:
                break
        return out

    # -- execution ---------------------------------------------------------

    def _apply(self, tx: Transaction, block_number: int, timestamp: int, tx_index: int) -> Receipt:
        state = self.state
        state.account(tx.sender).nonce += 1
        meter = GasMeter(tx.gas_limit, self.schedule)
        journal = Journal()
        logs: list[LogEvent] = []
        created = None
        ret: Any = None
        reason = ""
        try:
            meter.consume(self.schedule.tx_base, "intrinsic")
            if tx.is_create:
                created = self._create(tx, meter, journal, logs, block_number, timestamp)
            elif tx.to in state.contracts:
                ret = self._call(tx, meter, journal, logs, block_number, timestamp)
            else:
                self._transfer(tx, journal)
            status = SUCCESS
        except OutOfGas as exc:
            journal.rollback()
            status, reason, created, logs = OUT_OF_GAS, str(exc), None, []
            meter.used = tx.gas_limit
        except (Revert, ReadOnlyViolation, AbiError, KeyError, ValueError, TypeError) as exc:
            journal.rollback()
            status, reason, created, logs = REVERTED, f"{type(exc).__name__}: {exc}", None, []
        for log in logs:
            log.block_number = block_number
            log.tx_index = tx_index
        return_value = canonical_json(to_jsonable(ret)) if status == SUCCESS and ret is not None else b""
        return Receipt(tx.hash, status, meter.used, created, logs, return_value, reason)

    def _transfer(self, tx: Transaction, journal: Journal) -> None:
        if tx.value == 0:
            return
        src = self.state.account(tx.sender)
        if src.balance < tx.value:
            raise Revert("insufficient balance")
        dst = self.state.account(tx.to)
        src.balance -= tx.value
        dst.balance += tx.value

        def undo() -> None:
            src.balance += tx.value
            dst.balance -= tx.value

        journal.record(undo)

    def _create(self, tx, meter, journal, logs, block_number, timestamp) -> bytes:
        if tx.value:
            raise Revert("value transfer to contracts is not supported")
        meter.consume(self.schedule.create_base, "create")
        sel, args = decode_args(tx.payload)
        name = self.registry.by_selector(sel)
        cls = self.registry.get(name)
        code_size = cls.code_size(args)
        if code_size < 0:
            raise Revert("negative code size")
        meter.consume(code_size * self.schedule.code_deposit_per_byte, "code deposit")
        address = sha3(tx.sender + tx.nonce.to_bytes(8, "big"))[-20:]
        if address in self.state.contracts:
            raise Revert("address collision")
        instance = ContractInstance(address, name, code_size)
        self.state.contracts[address] = instance
        journal.record(lambda: self.state.contracts.pop(address, None))
        ctx = self._context(instance, tx.sender, meter, journal, logs, block_number, timestamp, False)
        ctx.constructing = True
        cls(ctx).constructor(**{k: v for k, v in args.items() if k != "codeSize"})
        return address

    def _call(self, tx, meter, journal, logs, block_number, timestamp) -> Any:
        if tx.value:
            raise Revert("value transfer to contracts is not supported")
        instance = self.state.contracts[tx.to]
        if not instance.active:
            raise Revert("contract is inactive")
        cls = self.registry.get(instance.blueprint)
        sel, args = decode_args(tx.payload)
        function = _function_for_selector(cls, sel)
        if function is None:
            raise Revert(f"unknown function selector {sel.hex()}")
        kind, fn = cls.entry_point(function)
        ctx = self._context(instance, tx.sender, meter, journal, logs, block_number, timestamp, kind == "view")
        return fn(cls(ctx), **args)

    def _context(self, instance, caller, meter, journal, logs, block_number, timestamp, read_only) -> CallContext:
        return CallContext(
            state=self.state,
            registry=self.registry,
            instance=instance,
            caller=caller,
            meter=meter,
            journal=journal,
            block_number=block_number,
            timestamp=timestamp,
            read_only=read_only,
            logs=logs,
        )

    # -- convenience wrappers (submit + seal) ------------------------------

    def make_tx(
        self, account: Account, to: bytes | None, payload: bytes, gas_limit: int, value: int = 0
    ) -> Transaction:
        return Transaction.signed(account, self.next_nonce(account.address), to, payload, gas_limit, value)

    def deploy_tx(self, account: Account, blueprint: str, args: dict[str, Any], gas_limit: int) -> Transaction:
        self.registry.get(blueprint)
        return self.make_tx(account, None, encode_call(blueprint, args), gas_limit)

    def invoke_tx(
        self, account: Account, address: bytes, function: str, args: dict[str, Any] | None, gas_limit: int
    ) -> Transaction:
        return self.make_tx(account, address, encode_call(function, args), gas_limit)

    def _submit_and_seal(self, tx: Transaction, now: int | None) -> Receipt:
        with self._lock:
            tx_hash = self.submit(tx)
            while self.receipt(tx_hash) is None:
                before = len(self.pending)
                self.seal_block(now)
                now = None
                if len(self.pending) == before and self.receipt(tx_hash) is None:
                    raise TransactionRejected("transaction could not be included")
            return self.receipt(tx_hash)

    def deploy(
        self,
        account: Account,
        blueprint: str,
        args: dict[str, Any],
        gas_limit: int = DEFAULT_BLOCK_GAS_LIMIT,
        now: int | None = None,
    ) -> Receipt:
        return self._submit_and_seal(self.deploy_tx(account, blueprint, args, gas_limit), now)

    def invoke(
        self,
        account: Account,
        address: bytes,
        function: str,
        args: dict[str, Any] | None = None,
        gas_limit: int = 1_000_000,
        now: int | None = None,
    ) -> Receipt:
        return self._submit_and_seal(self.invoke_tx(account, address, function, args, gas_limit), now)

    def transfer(self, account: Account, to: bytes, value: int, now: int | None = None) -> Receipt:
        return self._submit_and_seal(self.make_tx(account, to, b"", self.schedule.tx_base, value), now)

    # -- read-only access --------------------------------------------------

    def query(self, address: bytes, function: str, caller: bytes | None = None, **args: Any) -> Any:
        """Evaluate a view function against the last sealed state. Free of gas."""
        with self._lock:
            instance = self.state.contracts.get(address)
            if instance is None:
                raise QueryError(f"no contract at {address.hex()}")
            cls = self.registry.get(instance.blueprint)
            entry = cls.entry_point(function)
            if entry is None:
                raise QueryError(f"{instance.blueprint} has no function {function!r}")
            journal = Journal()
            ctx = self._context(
                instance, caller or bytes(20), FreeMeter(self.schedule), journal, [],
                self.head.number, self.head.timestamp, True,
            )
            try:
                return entry[1](cls(ctx), **args)
            except ReadOnlyViolation:
                journal.rollback()
                raise
            except Revert as exc:
                raise QueryError(str(exc)) from exc

    def get_logs(
        self,
        address: bytes | None = None,
        topic0: bytes | None = None,
        block_range: tuple[int, int] | None = None,
        topic1: bytes | None = None,
    ) -> list[LogEvent]:
        lo, hi = block_range if block_range else (0, self.height)
        out = []
        for block in self.blocks[max(lo, 0) : hi + 1]:
            for receipt in block.receipts:
                for log in receipt.logs:
                    if address is not None and log.emitter != address:
                        continue
                    if topic0 is not None and (not log.topics or log.topics[0] != topic0):
                        continue
                    if topic1 is not None and (len(log.topics) < 2 or log.topics[1] != topic1):
                        continue
                    out.append(log)
        return out

    def verify(self) -> ChainVerification:
        return verify_chain(self.blocks, self.registry)


def _function_for_selector(cls: type[NativeContract], sel: bytes) -> str | None:
    for name in cls.functions():
        if selector(name) == sel:
            return name
    return None


def verify_chain(blocks: Iterable[Block], registry: Registry | None = None) -> ChainVerification:
    """Check hash links and proof-of-work, then replay everything from genesis.

    Returns the index of the first block that fails any check.
    """
    blocks = list(blocks)
    if not blocks:
        return ChainVerification(False, 0, "empty chain")
    genesis = blocks[0]
    if genesis.compute_hash() != genesis.block_hash:
        return ChainVerification(False, 0, "genesis hash mismatch")
    if genesis.number != 0 or genesis.parent_hash != ZERO_HASH or genesis.transactions:
        return ChainVerification(False, 0, "malformed genesis")
    try:
        replay = Ledger.from_genesis(genesis, registry)
    except (ValueError, KeyError, TypeError) as exc:
        return ChainVerification(False, 0, f"bad genesis config: {exc}")
    if replay.head.block_hash != genesis.block_hash:
        return ChainVerification(False, 0, "genesis does not reproduce")
    for i in range(1, len(blocks)):
        block, parent = blocks[i], blocks[i - 1]
        if block.compute_hash() != block.block_hash:
            return ChainVerification(False, i, "block hash mismatch")
        if not meets_difficulty(block.block_hash, block.difficulty):
            return ChainVerification(False, i, "proof of work below difficulty")
        if block.parent_hash != parent.block_hash or block.number != i:
            return ChainVerification(False, i, "broken parent link")
        if block.timestamp < parent.timestamp:
            return ChainVerification(False, i, "timestamp regression")
        if block.gas_used > block.gas_limit or block.gas_limit != replay.block_gas_limit:
            return ChainVerification(False, i, "block gas budget violated")
        if len(block.transactions) != len(block.receipts):
            return ChainVerification(False, i, "receipt count mismatch")
        receipts = []
        for j, tx in enumerate(block.transactions):
            expected_nonce = replay.state.peek_account(tx.sender).nonce
            if not tx.signature_valid() or tx.nonce != expected_nonce or tx.gas_limit > block.gas_limit:
                return ChainVerification(False, i, f"invalid transaction {j}")
            receipts.append(replay._apply(tx, block.number, block.timestamp, j))
        if [r.to_dict() for r in receipts] != [r.to_dict() for r in block.receipts]:
            return ChainVerification(False, i, "receipts do not replay")
        if sum(r.gas_used for r in receipts) != block.gas_used:
            return ChainVerification(False, i, "gas used does not replay")
        if replay.state.root() != block.state_root:
            return ChainVerification(False, i, "state root does not replay")
        replay.blocks.append(block)
    return ChainVerification(True)
