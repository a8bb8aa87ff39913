"""Accounts with their signing keys, plus the sealed-box primitive.

An account owns two key pairs derived from one seed: Ed25519 for
transaction signatures and X25519 for receiving sealed boxes. The
64-byte public key is the concatenation of both public halves; the
address is the last 20 bytes of its SHA3-256 digest.

Sealed box: ephemeral X25519 key agreement, HKDF-SHA256, then
ChaCha20-Poly1305. Layout is ``ephemeral_pub(32) || ciphertext+tag``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ..hashing import sha3

ADDRESS_SIZE = 20
PUBLIC_KEY_SIZE = 64
_RAW = serialization.Encoding.Raw
_RAW_PUB = serialization.PublicFormat.Raw


class SealedBoxError(Exception):
    pass


def address_from_public_key(public_key: bytes) -> bytes:
    if len(public_key) != PUBLIC_KEY_SIZE:
        raise ValueError(f"public key must be {PUBLIC_KEY_SIZE} bytes")
    return sha3(public_key)[-ADDRESS_SIZE:]


@dataclass(frozen=True)
class KeyPair:
    signing: Ed25519PrivateKey = field(repr=False)
    box: X25519PrivateKey = field(repr=False)

    @classmethod
    def from_seed(cls, seed: bytes) -> "KeyPair":
        signing = Ed25519PrivateKey.from_private_bytes(sha3(b"sign:" + seed))
        box = X25519PrivateKey.from_private_bytes(sha3(b"box:" + seed))
        return cls(signing, box)

    @property
    def signing_public(self) -> bytes:
        return self.signing.public_key().public_bytes(_RAW, _RAW_PUB)

    @property
    def box_public(self) -> bytes:
        return self.box.public_key().public_bytes(_RAW, _RAW_PUB)

    @property
    def public_key(self) -> bytes:
        return self.signing_public + self.box_public

    def sign(self, message: bytes) -> bytes:
        return self.signing.sign(message)


@dataclass(frozen=True)
class Account:
    """Key holder identity. Balance and nonce live in the ledger state."""

    address: bytes
    keypair: KeyPair = field(repr=False)

    @property
    def public_key(self) -> bytes:
        return self.keypair.public_key

    @property
    def box_public(self) -> bytes:
        return self.keypair.box_public

    def sign(self, message: bytes) -> bytes:
        return self.keypair.sign(message)

    def open(self, sealed: bytes) -> bytes:
        return open_sealed(self.keypair, sealed)


def create_account(seed: bytes) -> Account:
    if not seed:
        raise ValueError("account seed must be non-empty")
    keypair = KeyPair.from_seed(bytes(seed))
    return Account(address_from_public_key(keypair.public_key), keypair)


def verify_signature(public_key: bytes, signature: bytes, message: bytes) -> bool:
    if len(public_key) != PUBLIC_KEY_SIZE:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key[:32]).verify(signature, message)
    except (InvalidSignature, ValueError):
        return False
    return True


def _box_key(shared: bytes, eph_pub: bytes, recipient_pub: bytes) -> bytes:
    return HKDF(
        algorithm=hashes.SHA256(), length=32, salt=eph_pub + recipient_pub, info=b"provledger-sealed-box"
    ).derive(shared)


def seal(recipient_box_public: bytes, plaintext: bytes, ephemeral_seed: bytes | None = None) -> bytes:
    """Encrypt for the holder of ``recipient_box_public``.

    ``ephemeral_seed`` pins the ephemeral key so simulations stay
    reproducible; omit it for a fresh random key.
    """
    if ephemeral_seed is None:
        eph = X25519PrivateKey.generate()
    else:
        eph = X25519PrivateKey.from_private_bytes(sha3(b"ephemeral:" + ephemeral_seed))
    eph_pub = eph.public_key().public_bytes(_RAW, _RAW_PUB)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(recipient_box_public))
    key = _box_key(shared, eph_pub, recipient_box_public)
    return eph_pub + ChaCha20Poly1305(key).encrypt(bytes(12), plaintext, None)


def open_sealed(keypair: KeyPair, sealed: bytes) -> bytes:
    if len(sealed) < 32 + 16:
        raise SealedBoxError("sealed payload too short")
    eph_pub, body = sealed[:32], sealed[32:]
    try:
        shared = keypair.box.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        key = _box_key(shared, eph_pub, keypair.box_public)
        return ChaCha20Poly1305(key).decrypt(bytes(12), body, None)
    except (InvalidTag, ValueError) as exc:
        raise SealedBoxError("sealed payload is not addressed to this key") from exc
