"""Data model and salted data references, plus the subject-side provenance graph.

On-chain artifacts only ever carry :class:`DataReference` digests. The
plaintext values and the per-recipient nonces stay in the subject's
:class:`ProvenanceGraph`, which can be persisted and partially disclosed
to an auditor.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field, replace
from decimal import Context, Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .hashing import NONCE_SIZE, check_nonce, salted_digest

PRIMITIVE_KINDS = ("text", "date", "number")
CONTROLLER = "controller"
PROCESSOR = "processor"


class ProvenanceError(ValueError):
    pass


def canonical_value(kind: str, value: Any) -> str:
    """Byte-exact text form: ISO-8601 dates, shortest decimal numbers."""
    if kind == "text":
        if not isinstance(value, str):
            raise ProvenanceError(f"text value expected, got {type(value).__name__}")
        return value
    if kind == "date":
        if isinstance(value, _dt.datetime):
            value = value.date()
        if isinstance(value, _dt.date):
            return value.isoformat()
        try:
            return _dt.date.fromisoformat(str(value)).isoformat()
        except ValueError as exc:
            raise ProvenanceError(f"not an ISO-8601 date: {value!r}") from exc
    if kind == "number":
        if isinstance(value, bool):
            raise ProvenanceError("booleans are not numbers")
        if isinstance(value, float):
            if value != value or value in (float("inf"), float("-inf")):
                raise ProvenanceError("non-finite numbers have no canonical form")
            return str(int(value)) if value.is_integer() else repr(value)
        try:
            d = Decimal(str(value))
        except InvalidOperation as exc:
            raise ProvenanceError(f"not a number: {value!r}") from exc
        if not d.is_finite():
            raise ProvenanceError("non-finite numbers have no canonical form")
        # exact: the default 28-digit context would round long values
        d = d.normalize(Context(prec=max(28, len(d.as_tuple().digits))))
        text = format(d, "f")
        return "0" if text in ("-0", "0") else text
    raise ProvenanceError(f"unknown primitive kind {kind!r}")


@dataclass(frozen=True)
class DataModel:
    """Primitive and composite types plus the named top-level instantiations.

    A path such as ``identity.fullname`` starts at a top-level
    instantiation and follows composite fields down to a primitive.
    """

    primitives: Mapping[str, str]
    composites: Mapping[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)
    roots: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, kind in self.primitives.items():
            if kind not in PRIMITIVE_KINDS:
                raise ProvenanceError(f"primitive {name} has unknown kind {kind!r}")
        clash = set(self.primitives) & set(self.composites)
        if clash:
            raise ProvenanceError(f"type names defined twice: {', '.join(sorted(clash))}")
        for name, members in self.composites.items():
            names = [m for m, _ in members]
            if len(names) != len(set(names)):
                raise ProvenanceError(f"composite {name} repeats a field name")
            for _, t in members:
                self._check_type(t)
        for t in self.roots.values():
            self._check_type(t)
        for name in self.composites:
            self._check_acyclic(name, ())

    def _check_type(self, t: str) -> None:
        if t not in self.primitives and t not in self.composites:
            raise ProvenanceError(f"unknown type {t!r}")

    def _check_acyclic(self, name: str, stack: tuple[str, ...]) -> None:
        if name in stack:
            raise ProvenanceError(f"cyclic composition through {' -> '.join(stack + (name,))}")
        for _, t in self.composites.get(name, ()):
            self._check_acyclic(t, stack + (name,))

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DataModel":
        return cls(
            dict(d.get("primitives", {})),
            {k: tuple((f, t) for f, t in v.items()) for k, v in d.get("composites", {}).items()},
            dict(d.get("roots", {})),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "primitives": dict(self.primitives),
            "composites": {k: dict(v) for k, v in self.composites.items()},
            "roots": dict(self.roots),
        }

    def resolve(self, path: str) -> str:
        """Primitive kind at ``path``; raises for unknown or non-leaf paths."""
        head, *rest = path.split(".")
        t = self.roots.get(head)
        if t is None:
            raise ProvenanceError(f"unknown instantiation path {path!r}")
        for part in rest:
            members = dict(self.composites.get(t, ()))
            if part not in members:
                raise ProvenanceError(f"unknown instantiation path {path!r}")
            t = members[part]
        if t not in self.primitives:
            raise ProvenanceError(f"path {path!r} names a composite, not a value")
        return self.primitives[t]

    def paths(self) -> list[str]:
        out = []

        def walk(prefix: str, t: str) -> None:
            if t in self.primitives:
                out.append(prefix)
            for f, sub in self.composites.get(t, ()):
                walk(f"{prefix}.{f}", sub)

        for root, t in self.roots.items():
            walk(root, t)
        return out

    def instance(self, path: str, value: Any) -> "DataInstance":
        return DataInstance(path, canonical_value(self.resolve(path), value))


@dataclass(frozen=True, order=True)
class DataInstance:
    path: str
    value: str

    def to_dict(self) -> dict[str, str]:
        return {"path": self.path, "value": self.value}

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "DataInstance":
        return cls(d["path"], d["value"])


@dataclass(frozen=True)
class DataReference:
    instantiation_digest: bytes
    value_digest: bytes

    def to_bytes(self) -> bytes:
        return self.instantiation_digest + self.value_digest

    @classmethod
    def from_bytes(cls, raw: bytes) -> "DataReference":
        if len(raw) != 64:
            raise ProvenanceError("a data reference is exactly 64 bytes")
        return cls(raw[:32], raw[32:])

    def hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def fromhex(cls, text: str) -> "DataReference":
        return cls.from_bytes(bytes.fromhex(text))


def commit_data(instance: DataInstance, nonce: bytes, model: DataModel | None = None) -> DataReference:
    check_nonce(nonce)
    if model is not None:
        model.resolve(instance.path)
    return DataReference(
        salted_digest(instance.path, nonce=nonce),
        salted_digest(instance.path, instance.value, nonce=nonce),
    )


def verify_commitment(instance: DataInstance, nonce: bytes, ref: DataReference) -> bool:
    if len(nonce) != NONCE_SIZE:
        return False
    return commit_data(instance, nonce) == ref


@dataclass(frozen=True)
class Grant:
    ref: DataReference
    instance: DataInstance
    tx_hash: bytes

    def to_dict(self) -> dict[str, str]:
        return {"ref": self.ref.hex(), **self.instance.to_dict(), "tx": self.tx_hash.hex()}

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "Grant":
        return cls(DataReference.fromhex(d["ref"]), DataInstance.from_dict(d), bytes.fromhex(d["tx"]))


@dataclass(frozen=True)
class RecipientEntry:
    role: str
    contract: bytes
    nonce: bytes
    grants: tuple[Grant, ...] = ()
    parent: bytes | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "role": self.role,
            "contract": self.contract.hex(),
            "nonce": self.nonce.hex(),
            "grants": [g.to_dict() for g in self.grants],
            "parent": None if self.parent is None else self.parent.hex(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RecipientEntry":
        return cls(
            d["role"],
            bytes.fromhex(d["contract"]),
            bytes.fromhex(d["nonce"]),
            tuple(Grant.from_dict(g) for g in d["grants"]),
            None if d["parent"] is None else bytes.fromhex(d["parent"]),
        )


@dataclass(frozen=True)
class TrailEntry:
    recipient: bytes
    role: str
    via: bytes | None = None


@dataclass(frozen=True)
class ProvenanceGraph:
    """Immutable per-subject record; updates return a new graph."""

    subject: str
    entries: tuple[tuple[bytes, RecipientEntry], ...] = ()
    # (recipient, value digest) in grant order, used for audit trails
    log: tuple[tuple[bytes, bytes], ...] = ()

    def entry(self, recipient: bytes) -> RecipientEntry | None:
        for r, e in self.entries:
            if r == recipient:
                return e
        return None

    @property
    def recipients(self) -> list[bytes]:
        return [r for r, _ in self.entries]

    def record_transfer(
        self,
        recipient: bytes,
        role: str,
        grants: Iterable[tuple[DataReference, DataInstance]],
        tx_hash: bytes,
        *,
        contract: bytes,
        nonce: bytes,
        parent: bytes | None = None,
    ) -> "ProvenanceGraph":
        if role not in (CONTROLLER, PROCESSOR):
            raise ProvenanceError(f"unknown recipient role {role!r}")
        check_nonce(nonce)
        if role == PROCESSOR:
            parent_entry = None if parent is None else self.entry(parent)
            if parent_entry is None or parent_entry.role != CONTROLLER:
                raise ProvenanceError("a processor entry needs a controller parent already in the graph")
        elif parent is not None:
            raise ProvenanceError("controller entries have no parent")
        current = self.entry(recipient)
        if current is None:
            current = RecipientEntry(role, contract, bytes(nonce), (), parent)
        elif (current.role, current.contract, current.nonce, current.parent) != (role, contract, nonce, parent):
            raise ProvenanceError("recipient already recorded with different contract details")
        known = {g.ref for g in current.grants}
        added = []
        for ref, instance in grants:
            if not verify_commitment(instance, nonce, ref):
                raise ProvenanceError(f"reference for {instance.path} does not recompute from its plaintext")
            if ref not in known:
                known.add(ref)
                added.append(Grant(ref, instance, tx_hash))
        if not added and self.entry(recipient) is not None:
            return self
        updated = replace(current, grants=current.grants + tuple(added))
        entries = tuple((r, updated if r == recipient else e) for r, e in self.entries)
        if self.entry(recipient) is None:
            entries += ((recipient, updated),)
        log = self.log + tuple((recipient, g.ref.value_digest) for g in added)
        return ProvenanceGraph(self.subject, entries, log)

    def audit_trail(self, path: str) -> list[TrailEntry]:
        out: list[TrailEntry] = []
        seen: set[bytes] = set()
        for recipient, vdigest in self.log:
            if recipient in seen:
                continue
            entry = self.entry(recipient)
            if any(g.ref.value_digest == vdigest and g.instance.path == path for g in entry.grants):
                seen.add(recipient)
                out.append(TrailEntry(recipient, entry.role, entry.parent))
        return out

    def disclosure(self, recipient: bytes) -> dict[str, Any]:
        entry = self.entry(recipient)
        if entry is None:
            raise ProvenanceError("no such recipient")
        return {
            "recipient": recipient.hex(),
            "contract": entry.contract.hex(),
            "nonce": entry.nonce.hex(),
            "data": [g.instance.to_dict() for g in entry.grants],
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "entries": [[r.hex(), e.to_dict()] for r, e in self.entries],
            "log": [[r.hex(), v.hex()] for r, v in self.log],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ProvenanceGraph":
        return cls(
            d["subject"],
            tuple((bytes.fromhex(r), RecipientEntry.from_dict(e)) for r, e in d["entries"]),
            tuple((bytes.fromhex(r), bytes.fromhex(v)) for r, v in d["log"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "ProvenanceGraph":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ProvenanceGraph":
        return cls.loads(Path(path).read_text())


def commit_all(instances: Sequence[DataInstance], nonce: bytes) -> list[tuple[DataReference, DataInstance]]:
    return [(commit_data(i, nonce), i) for i in instances]
