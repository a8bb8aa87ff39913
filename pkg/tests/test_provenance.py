import datetime as dt
import os
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from provledger.hashing import salted_digest, sha3
from provledger.provenance import (
    CONTROLLER,
    PROCESSOR,
    DataInstance,
    DataModel,
    DataReference,
    ProvenanceError,
    ProvenanceGraph,
    canonical_value,
    commit_all,
    commit_data,
    verify_commitment,
)

MODEL = DataModel.from_dict(
    {
        "primitives": {"text": "text", "day": "date", "amount": "number"},
        "composites": {"Person": {"fullname": "text", "email": "text", "born": "day"}, "Acct": {"limit": "amount"}},
        "roots": {"identity": "Person", "account": "Acct"},
    }
)
N1 = b"\x01" * 32
N2 = b"\x02" * 32
CTRL = b"\xc1" * 20
PROC = b"\xd1" * 20
CONTRACT = b"\xaa" * 20


def test_model_paths_and_resolution():
    assert MODEL.paths() == ["identity.fullname", "identity.email", "identity.born", "account.limit"]
    assert MODEL.resolve("identity.born") == "date"
    with pytest.raises(ProvenanceError):
        MODEL.resolve("identity")
    with pytest.raises(ProvenanceError):
        MODEL.resolve("identity.phone")
    assert DataModel.from_dict(MODEL.to_dict()) == MODEL


def test_model_validation():
    with pytest.raises(ProvenanceError, match="cyclic"):
        DataModel.from_dict({"primitives": {"t": "text"}, "composites": {"A": {"b": "B"}, "B": {"a": "A"}}})
    with pytest.raises(ProvenanceError, match="unknown kind"):
        DataModel.from_dict({"primitives": {"t": "blob"}})
    with pytest.raises(ProvenanceError, match="unknown type"):
        DataModel.from_dict({"primitives": {}, "roots": {"x": "Missing"}})


@pytest.mark.parametrize(
    "kind, value, text",
    [
        ("date", dt.date(1990, 5, 4), "1990-05-04"),
        ("date", "1990-05-04", "1990-05-04"),
        ("number", 2500, "2500"),
        ("number", 2500.0, "2500"),
        ("number", "1.50", "1.5"),
        ("number", Decimal("-0.0"), "0"),
        ("number", "1e3", "1000"),
        ("text", "Ünïcode", "Ünïcode"),
    ],
)
def test_canonical_values(kind, value, text):
    assert canonical_value(kind, value) == text


@pytest.mark.parametrize("kind, value", [("date", "04/05/1990"), ("number", "abc"), ("number", float("nan")),
                                         ("number", True), ("text", 3)])
def test_canonical_value_rejects(kind, value):
    with pytest.raises(ProvenanceError):
        canonical_value(kind, value)


@given(st.decimals(allow_nan=False, allow_infinity=False, places=4))
def test_number_canonical_form_is_stable(d):
    text = canonical_value("number", d)
    assert canonical_value("number", text) == text
    assert Decimal(text) == d


def test_commitment_binds_path_value_and_nonce():
    inst = MODEL.instance("identity.email", "alice@example.org")
    ref = commit_data(inst, N1)
    assert ref.instantiation_digest == salted_digest("identity.email", nonce=N1)
    assert ref.value_digest == salted_digest("identity.email", "alice@example.org", nonce=N1)
    assert verify_commitment(inst, N1, ref)
    assert not verify_commitment(DataInstance("identity.email", "alice@example.com"), N1, ref)
    assert not verify_commitment(inst, N2, ref)
    assert DataReference.fromhex(ref.hex()) == ref
    with pytest.raises(ProvenanceError):
        DataReference.from_bytes(b"\x00" * 63)
    with pytest.raises(ValueError):
        commit_data(inst, b"short")


def test_same_value_under_fresh_nonces_is_unlinkable():
    inst = DataInstance("identity.email", "alice@example.org")
    refs = {commit_data(inst, os.urandom(32)).value_digest for _ in range(500)}
    assert len(refs) == 500
    assert sha3(b"alice@example.org") not in refs


def _graph():
    g = ProvenanceGraph("alice")
    email = MODEL.instance("identity.email", "alice@example.org")
    name = MODEL.instance("identity.fullname", "Alice")
    g = g.record_transfer(CTRL, CONTROLLER, commit_all([email, name], N1), b"t1", contract=CONTRACT, nonce=N1)
    g = g.record_transfer(PROC, PROCESSOR, commit_all([email], N2), b"t2", contract=b"\xbb" * 20, nonce=N2,
                          parent=CTRL)
    return g


def test_graph_trail_and_forwarding_edges():
    g = _graph()
    trail = g.audit_trail("identity.email")
    assert [(t.recipient, t.role, t.via) for t in trail] == [(CTRL, CONTROLLER, None), (PROC, PROCESSOR, CTRL)]
    assert [t.recipient for t in g.audit_trail("identity.fullname")] == [CTRL]
    assert g.audit_trail("identity.born") == []


def test_graph_rules():
    g = _graph()
    email = MODEL.instance("identity.email", "alice@example.org")
    # re-recording the same grant changes nothing
    assert g.record_transfer(CTRL, CONTROLLER, commit_all([email], N1), b"t3", contract=CONTRACT, nonce=N1) is g
    with pytest.raises(ProvenanceError, match="different"):
        g.record_transfer(CTRL, CONTROLLER, commit_all([email], N2), b"t3", contract=CONTRACT, nonce=N2)
    with pytest.raises(ProvenanceError, match="controller parent"):
        ProvenanceGraph("bob").record_transfer(PROC, PROCESSOR, [], b"t", contract=CONTRACT, nonce=N1, parent=CTRL)
    bad = [(commit_data(email, N2), email)]
    with pytest.raises(ProvenanceError, match="recompute"):
        ProvenanceGraph("bob").record_transfer(CTRL, CONTROLLER, bad, b"t", contract=CONTRACT, nonce=N1)


def test_graph_persistence(tmp_path):
    g = _graph()
    path = tmp_path / "graph.json"
    g.save(path)
    assert ProvenanceGraph.load(path) == g
    d = g.disclosure(PROC)
    assert d["nonce"] == N2.hex() and d["data"] == [{"path": "identity.email", "value": "alice@example.org"}]
