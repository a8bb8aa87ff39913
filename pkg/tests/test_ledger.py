import random

import pytest
from chaingen import REGISTRY, build_chain, make_ledger, tamper
from hypothesis import given, settings
from hypothesis import strategies as st

from provledger.hashing import encode_fields, salted_digest, selector, sha3, word
from provledger.ledger.abi import AbiError, decode_args, encode_call
from provledger.ledger.chain import (
    OUT_OF_GAS,
    REVERTED,
    QueryError,
    TransactionRejected,
    meets_difficulty,
    verify_chain,
)
from provledger.ledger.export import dumps_chain, loads_chain
from provledger.ledger.gas import GasMeter, GasSchedule, OutOfGas
from provledger.ledger.keys import SealedBoxError, create_account, seal, verify_signature


@pytest.fixture
def alice():
    return create_account(b"alice")


def test_hashing_encoding_is_length_prefixed():
    assert encode_fields("ab", "c") != encode_fields("a", "bc")
    assert encode_fields("ab") == b"\x00\x00\x00\x02ab"
    with pytest.raises(ValueError):
        salted_digest("x", nonce=b"short")


def test_abi_round_trip_and_errors():
    payload = encode_call("f", {"b": b"\x01\x02", "n": 3, "l": ["x", b"\xff"]})
    sel, args = decode_args(payload)
    assert sel == selector("f")
    assert args == {"b": b"\x01\x02", "n": 3, "l": ["x", b"\xff"]}
    with pytest.raises(AbiError):
        encode_call("f", {"s": "0xdead"})
    with pytest.raises(AbiError):
        decode_args(b"\x00")


def test_signatures_and_sealed_box(alice):
    bob = create_account(b"bob")
    msg = b"hello"
    assert verify_signature(alice.public_key, alice.sign(msg), msg)
    assert not verify_signature(bob.public_key, alice.sign(msg), msg)
    sealed = seal(bob.box_public, b"secret nonce", ephemeral_seed=b"e")
    assert bob.open(sealed) == b"secret nonce"
    with pytest.raises(SealedBoxError):
        alice.open(sealed)
    # pinned ephemeral seeds are reproducible, random ones are not
    assert sealed == seal(bob.box_public, b"secret nonce", ephemeral_seed=b"e")
    assert seal(bob.box_public, b"x") != seal(bob.box_public, b"x")


def test_gas_meter_and_schedule():
    s = GasSchedule()
    assert s.log_cost(2, 10) == 375 + 2 * 375 + 80
    m = GasMeter(100, s)
    m.consume(60)
    with pytest.raises(OutOfGas):
        m.consume(41)
    assert m.used == 100
    with pytest.raises(ValueError):
        GasSchedule(tx_base=0)
    assert GasSchedule.from_dict(s.to_dict()) == s


def test_deploy_invoke_and_gas_arithmetic(alice):
    led = make_ledger()
    r = led.deploy(alice, "counter", {"start": 5})
    assert r.ok
    # tx base + create base + code deposit + one new slot
    assert r.gas_used == 21000 + 32000 + 100 * 200 + 20000
    addr = r.created_address
    r2 = led.invoke(alice, addr, "bump", {"by": 2})
    assert r2.ok and r2.result() == 7
    # base + one read + one existing-slot write + one log (1 topic, 32 bytes)
    assert r2.gas_used == 21000 + 200 + 5000 + (375 + 375 + 32 * 8)
    assert led.query(addr, "value") == 7
    assert led.get_logs(address=addr, topic0=sha3(b"Bumped"))[0].data == word(7)


def test_revert_rolls_back_and_keeps_gas(alice):
    led = make_ledger()
    addr = led.deploy(alice, "counter", {}).created_address
    root = led.state.root()
    r = led.invoke(alice, addr, "fail")
    assert r.status == REVERTED and "nope" in r.reason
    assert led.contract(addr).get(word(1)) == bytes(32)
    assert led.state.root() != root  # the sender nonce still advanced
    r = led.invoke(alice, addr, "spin", {"n": 10**7}, gas_limit=50_000)
    assert r.status == OUT_OF_GAS and r.gas_used == 50_000


def test_views_are_read_only(alice):
    led = make_ledger()
    addr = led.deploy(alice, "counter", {}).created_address
    with pytest.raises(Exception):
        led.query(addr, "sneaky")
    assert led.query(addr, "value") == 0
    with pytest.raises(QueryError):
        led.query(bytes(20), "value")


def test_submit_rejections(alice):
    led = make_ledger(block_gas_limit=100_000)
    with pytest.raises(TransactionRejected):
        led.submit(led.make_tx(alice, None, encode_call("counter"), 200_000))
    tx = led.make_tx(alice, bytes(20), b"", 21000)
    tx.signature = bytes(64)
    with pytest.raises(TransactionRejected):
        led.submit(tx)


def test_block_gas_limit_splits_blocks(alice):
    led = make_ledger(block_gas_limit=50_000, alloc={alice.address: 10})
    bob = create_account(b"bob").address
    for _ in range(5):
        led.submit(led.make_tx(alice, bob, b"", 21000, value=1))
    blocks = led.seal_until_empty()
    assert [len(b.transactions) for b in blocks] == [2, 2, 1]
    assert led.account_state(bob).balance == 5


def test_censor_hook_holds_back_sender(alice):
    bob = create_account(b"bob")
    led = make_ledger(alloc={alice.address: 10, bob.address: 10}, censor=lambda tx: tx.sender == alice.address)
    led.submit(led.make_tx(alice, bob.address, b"", 21000, value=1))
    led.submit(led.make_tx(bob, alice.address, b"", 21000, value=1))
    block = led.seal_block()
    assert [tx.sender for tx in block.transactions] == [bob.address]
    assert len(led.pending) == 1


def test_proof_of_work():
    led = make_ledger(difficulty=8)
    block = led.seal_block()
    assert block.block_hash[0] == 0
    assert meets_difficulty(block.block_hash, 8)
    assert led.verify()


def test_untouched_chain_verifies():
    blocks = build_chain(20)
    assert verify_chain(blocks, REGISTRY)
    assert verify_chain(loads_chain(dumps_chain(blocks)), REGISTRY)


def test_tampering_is_located():
    blocks = build_chain(30, seed=3)
    text = dumps_chain(blocks)
    rng = random.Random(99)
    for _ in range(20):
        copy = loads_chain(text)
        i = rng.randrange(len(copy))
        tamper(copy[i], rng)
        result = verify_chain(copy, REGISTRY)
        assert not result and result.bad_index == i


def test_reordering_and_truncation():
    blocks = loads_chain(dumps_chain(build_chain(10)))
    assert verify_chain(blocks[:5], REGISTRY)
    swapped = blocks[:3] + [blocks[4], blocks[3]] + blocks[5:]
    assert verify_chain(swapped, REGISTRY).bad_index == 3
    assert not verify_chain([])


def test_loads_chain_reports_line():
    with pytest.raises(ValueError, match="line 1"):
        loads_chain("{not json}\n")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=50), min_size=1, max_size=8))
def test_export_replay_is_deterministic(bumps):
    def build():
        alice = create_account(b"alice")
        led = make_ledger()
        addr = led.deploy(alice, "counter", {}, now=100).created_address
        for i, b in enumerate(bumps):
            led.invoke(alice, addr, "bump", {"by": b}, now=200 + i * 10)
        return led

    a, b = build(), build()
    assert dumps_chain(a.blocks) == dumps_chain(b.blocks)
    assert a.query(a.blocks[1].receipts[0].created_address, "value") == sum(bumps)
