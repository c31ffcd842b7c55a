"""Off-chain encrypted store linking wallets to real-world data subjects.

Each identity link is encrypted under its own record key (ChaCha20-Poly1305)
and the record key is wrapped by a master key from configuration. Erasure is
crypto-shredding: the wrapped record key is destroyed and the ciphertext
record is overwritten with a tombstone, after which the link is permanently
unreadable while the pseudonymous chain stays intact. A wallet that never
existed and an erased one are indistinguishable on lookup, by design.

Every enroll/resolve/erase/rectify call — including failed ones — appends
exactly one audit entry; subject ids appear in the audit trail only hashed.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass
from pathlib import Path
from threading import Lock

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from . import roles
from .audit import AuditLog, subject_ref
from .canonical import canonical_json
from .errors import NotFound, StoreError, Unauthorized, UnknownSubject, WalletAlreadyLinked
from .keys import derive_address

RESOLVE_ROLES = (roles.CONTROLLER, roles.AUDITOR)


@dataclass(frozen=True)
class IdentityLink:
    subject_id: str
    display_name: str
    enrollment_attrs: dict[str, str]
    wallet: str
    created_at: int

    def to_dict(self) -> dict:
        return {
            "created_at": self.created_at,
            "display_name": self.display_name,
            "enrollment_attrs": dict(self.enrollment_attrs),
            "subject_id": self.subject_id,
            "wallet": self.wallet,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> IdentityLink:
        return cls(
            subject_id=obj["subject_id"],
            display_name=obj["display_name"],
            enrollment_attrs=dict(obj["enrollment_attrs"]),
            wallet=obj["wallet"],
            created_at=obj["created_at"],
        )


@dataclass
class _Record:
    record_id: str
    key_id: str | None      # None once shredded
    nonce: str | None
    ciphertext: str | None
    link: IdentityLink | None  # decrypted form, None once erased


class Vault:
    """Encrypted identity links with per-record keys wrapped by a master key."""

    def __init__(self, directory: Path | str, master_key: bytes,
                 audit: AuditLog, clock):
        if len(master_key) != 32:
            raise ValueError("master key must be 32 bytes")
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.records_path = self.dir / "records.jsonl"
        self.keys_path = self.dir / "keys.jsonl"
        self._master = ChaCha20Poly1305(master_key)
        self.audit = audit
        self.clock = clock
        self._lock = Lock()
        self._keys: dict[str, bytes] = {}
        self._records: dict[str, _Record] = {}
        self._load()

    # -- persistence -----------------------------------------------------------

    def _load(self) -> None:
        if self.keys_path.exists():
            for line in self.keys_path.read_text().splitlines():
                if not line:
                    continue
                obj = json.loads(line)
                try:
                    key = self._master.decrypt(
                        bytes.fromhex(obj["nonce"]),
                        bytes.fromhex(obj["wrapped"]),
                        obj["key_id"].encode(),
                    )
                except InvalidTag as exc:
                    raise StoreError("vault master key does not unwrap stored keys") from exc
                self._keys[obj["key_id"]] = key
        if self.records_path.exists():
            for line in self.records_path.read_text().splitlines():
                if not line:
                    continue
                obj = json.loads(line)
                record_id = obj["record_id"]
                if obj.get("erased"):
                    self._records[record_id] = _Record(record_id, None, None, None, None)
                    continue
                record = _Record(record_id, obj["key_id"], obj["nonce"],
                                 obj["ciphertext"], None)
                key = self._keys.get(record.key_id or "")
                if key is not None:
                    plaintext = ChaCha20Poly1305(key).decrypt(
                        bytes.fromhex(record.nonce),
                        bytes.fromhex(record.ciphertext),
                        record_id.encode(),
                    )
                    record.link = IdentityLink.from_dict(json.loads(plaintext))
                self._records[record_id] = record

    def _rewrite_files(self) -> None:
        tmp_keys = self.keys_path.with_suffix(".tmp")
        with tmp_keys.open("w") as fh:
            for key_id, key in self._keys.items():
                nonce = os.urandom(12)
                wrapped = self._master.encrypt(nonce, key, key_id.encode())
                fh.write(json.dumps({
                    "key_id": key_id,
                    "nonce": nonce.hex(),
                    "wrapped": wrapped.hex(),
                }, sort_keys=True) + "\n")
        tmp_keys.replace(self.keys_path)
        tmp_records = self.records_path.with_suffix(".tmp")
        with tmp_records.open("w") as fh:
            for record in self._records.values():
                if record.link is None and record.ciphertext is None:
                    fh.write(json.dumps({
                        "erased": True, "record_id": record.record_id,
                    }, sort_keys=True) + "\n")
                else:
                    fh.write(json.dumps({
                        "ciphertext": record.ciphertext,
                        "key_id": record.key_id,
                        "nonce": record.nonce,
                        "record_id": record.record_id,
                    }, sort_keys=True) + "\n")
        tmp_records.replace(self.records_path)

    def _encrypt_link(self, link: IdentityLink) -> _Record:
        record_id = uuid.uuid4().hex
        key_id = uuid.uuid4().hex
        key = ChaCha20Poly1305.generate_key()
        nonce = os.urandom(12)
        ciphertext = ChaCha20Poly1305(key).encrypt(
            nonce, canonical_json(link.to_dict()), record_id.encode())
        self._keys[key_id] = key
        record = _Record(record_id, key_id, nonce.hex(), ciphertext.hex(), link)
        self._records[record_id] = record
        return record

    def _shred(self, record: _Record) -> None:
        if record.key_id is not None:
            self._keys.pop(record.key_id, None)
        record.key_id = None
        record.nonce = None
        record.ciphertext = None
        record.link = None

    # -- lookups ---------------------------------------------------------------

    def _live_records(self) -> list[_Record]:
        return [r for r in self._records.values() if r.link is not None]

    def _by_wallet(self, wallet: str) -> _Record | None:
        for record in self._live_records():
            if record.link.wallet == wallet:
                return record
        return None

    def _by_subject(self, subject_id: str) -> list[_Record]:
        return [r for r in self._live_records()
                if r.link.subject_id == subject_id]

    # -- operations --------------------------------------------------------------

    def enroll(self, display_name: str, attrs: dict[str, str],
               wallet_public_key: bytes, actor: str,
               subject_id: str | None = None) -> tuple[str, str]:
        """Link a wallet to a (new or existing) subject. Identity proofing is
        a stub: the caller-supplied attributes are stored as given."""
        with self._lock:
            wallet = derive_address(wallet_public_key)
            if self._by_wallet(wallet) is not None:
                self.audit.append(actor, "enroll", wallet, "wallet-already-linked")
                raise WalletAlreadyLinked(wallet)
            subject = subject_id or uuid.uuid4().hex
            link = IdentityLink(
                subject_id=subject,
                display_name=display_name,
                enrollment_attrs=dict(attrs),
                wallet=wallet,
                created_at=self.clock.now(),
            )
            self._encrypt_link(link)
            self._rewrite_files()
            self.audit.append(actor, "enroll", wallet, "ok")
            return subject, wallet

    def resolve(self, wallet: str, actor: str) -> IdentityLink:
        """Decrypt the identity behind a wallet for an authorized role.
        Erased and never-enrolled wallets are indistinguishable."""
        with self._lock:
            if actor not in RESOLVE_ROLES:
                self.audit.append(actor, "resolve", wallet, "unauthorized")
                raise Unauthorized(f"role {actor} may not resolve identities")
            record = self._by_wallet(wallet)
            if record is None:
                self.audit.append(actor, "resolve", wallet, "not-found")
                raise NotFound(f"no identity link for {wallet}")
            self.audit.append(actor, "resolve", wallet, "ok")
            return record.link

    def erase(self, subject_id: str, actor: str) -> int:
        """Crypto-shred every link of a subject; returns how many wallets
        were unlinked. The chain is untouched."""
        with self._lock:
            records = self._by_subject(subject_id)
            if not records:
                self.audit.append(actor, "erase", subject_ref(subject_id),
                                  "unknown-subject")
                raise UnknownSubject(subject_id)
            for record in records:
                self._shred(record)
            self._rewrite_files()
            self.audit.append(actor, "erase", subject_ref(subject_id),
                              f"ok:unlinked={len(records)}")
            return len(records)

    def rectify(self, subject_id: str, actor: str,
                display_name: str | None = None,
                attrs: dict[str, str] | None = None) -> list[IdentityLink]:
        """Replace a subject's link records with corrected attributes; the
        old ciphertext is shredded, wallet linkage is preserved."""
        with self._lock:
            records = self._by_subject(subject_id)
            if not records:
                self.audit.append(actor, "rectify", subject_ref(subject_id),
                                  "unknown-subject")
                raise UnknownSubject(subject_id)
            updated = []
            for record in records:
                old = record.link
                new_link = IdentityLink(
                    subject_id=old.subject_id,
                    display_name=old.display_name if display_name is None else display_name,
                    enrollment_attrs=dict(old.enrollment_attrs if attrs is None else attrs),
                    wallet=old.wallet,
                    created_at=old.created_at,
                )
                self._shred(record)
                self._encrypt_link(new_link)
                updated.append(new_link)
            self._rewrite_files()
            self.audit.append(actor, "rectify", subject_ref(subject_id), "ok")
            return updated
