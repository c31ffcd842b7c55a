"""Hash-chained append-only audit trail.

Each entry carries the digest of its predecessor, so truncation or edits
anywhere in the file break the chain on re-verification. Entries hold
metadata only: roles, operation names, wallet addresses, and hashed subject
ids — never subject attributes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from threading import Lock

from .canonical import ZERO_DIGEST, canonical_json, sha256_hex


def subject_ref(subject_id: str) -> str:
    """Audit-safe reference to a subject: hash only, never the raw id."""
    return "subject:" + sha256_hex(subject_id.encode("utf-8"))


@dataclass(frozen=True)
class AuditEntry:
    actor: str
    operation: str
    target: str
    timestamp: int
    outcome: str
    prev: str
    digest: str

    @staticmethod
    def compute_digest(actor: str, operation: str, target: str,
                       timestamp: int, outcome: str, prev: str) -> str:
        return sha256_hex(canonical_json({
            "actor": actor,
            "operation": operation,
            "outcome": outcome,
            "prev": prev,
            "target": target,
            "timestamp": timestamp,
        }))

    def to_record(self) -> dict:
        return {
            "actor": self.actor,
            "digest": self.digest,
            "operation": self.operation,
            "outcome": self.outcome,
            "prev": self.prev,
            "target": self.target,
            "timestamp": self.timestamp,
        }


class AuditLog:
    def __init__(self, path: Path | str, clock):
        self.path = Path(path)
        self.clock = clock
        self._lock = Lock()
        self._entries: list[AuditEntry] = []
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        for line in self.path.read_text().splitlines():
            if not line:
                continue
            obj = json.loads(line)
            self._entries.append(AuditEntry(
                actor=obj["actor"], operation=obj["operation"],
                target=obj["target"], timestamp=obj["timestamp"],
                outcome=obj["outcome"], prev=obj["prev"], digest=obj["digest"],
            ))

    @property
    def head_digest(self) -> str:
        return self._entries[-1].digest if self._entries else ZERO_DIGEST

    def append(self, actor: str, operation: str, target: str, outcome: str) -> AuditEntry:
        with self._lock:
            timestamp = self.clock.now()
            prev = self.head_digest
            digest = AuditEntry.compute_digest(actor, operation, target,
                                               timestamp, outcome, prev)
            entry = AuditEntry(actor, operation, target, timestamp,
                               outcome, prev, digest)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as fh:
                fh.write(json.dumps(entry.to_record(), sort_keys=True) + "\n")
            self._entries.append(entry)
            return entry

    def entries(self) -> list[AuditEntry]:
        return list(self._entries)

    def verify(self) -> bool:
        """Recompute the whole hash chain."""
        prev = ZERO_DIGEST
        for entry in self._entries:
            if entry.prev != prev:
                return False
            expected = AuditEntry.compute_digest(
                entry.actor, entry.operation, entry.target,
                entry.timestamp, entry.outcome, entry.prev)
            if entry.digest != expected:
                return False
            prev = entry.digest
        return True
