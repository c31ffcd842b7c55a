"""Ed25519 keypairs and wallet address derivation.

Wallets and the block-sealing authority both use Ed25519. A wallet address
is ``0x`` plus the last 20 bytes of SHA-256 of the raw public key, hex
encoded, which keeps addresses pseudonymous and fixed-length.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

ADDRESS_RE = re.compile(r"^0x[0-9a-f]{40}$")


def derive_address(public_key: bytes) -> str:
    """Address for a raw 32-byte Ed25519 public key."""
    digest = hashlib.sha256(public_key).digest()
    return "0x" + digest[-20:].hex()


def is_address(text: str) -> bool:
    return bool(ADDRESS_RE.match(text))


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 keypair held as raw bytes (32-byte seed, 32-byte public)."""

    secret: bytes
    public: bytes

    @classmethod
    def generate(cls) -> KeyPair:
        priv = Ed25519PrivateKey.generate()
        return cls(priv.private_bytes_raw(), priv.public_key().public_bytes_raw())

    @classmethod
    def from_secret(cls, secret: bytes) -> KeyPair:
        if len(secret) != 32:
            raise ValueError("Ed25519 secret must be 32 bytes")
        priv = Ed25519PrivateKey.from_private_bytes(secret)
        return cls(secret, priv.public_key().public_bytes_raw())

    @property
    def address(self) -> str:
        return derive_address(self.public)

    def sign(self, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(self.secret).sign(message)


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
