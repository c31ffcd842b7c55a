"""Append-only chain of authority-sealed blocks of signed consent events.

Transactions are signed client-side over a canonical payload that excludes
the timestamp (the accepting node stamps it), then frozen into a canonical
record whose SHA-256 is the tx id. Block headers commit to the ordered tx
ids through ``tx_root``; the sealing authority signs the header; each
header carries the previous block's hash. Every byte of a sealed block is
therefore covered by either the seal or the tx root, which is what makes
single-bit tampering detectable.

Wire formats (golden; reproduced by clients):
  - tx signing payload: canonical JSON of
    ``{action, answers, public_key, template_cid, wallet}``.
  - tx record: signing payload fields plus ``signature`` and ``timestamp``;
    tx id = SHA-256 hex of the record bytes.
  - block record: ``{height, prev_hash, seal, timestamp, transactions,
    tx_root}``; header = ``{height, prev_hash, timestamp, tx_root}``;
    block hash = SHA-256 hex of the header bytes; seal = Ed25519 over the
    header bytes.
  - chain file: big-endian u32 length prefix + block record bytes, appended
    in height order; height 0 is the fixed genesis block (zero prev hash,
    timestamp 0, no transactions).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from threading import Lock
from typing import Callable, Protocol

from .canonical import ZERO_DIGEST, canonical_json, sha256_hex
from .errors import (
    AuthorityKeyUnavailable,
    BadSignature,
    EmptyPool,
    MalformedAnswers,
)
from .keys import derive_address, is_address, verify_signature
from .templates import ConsentTemplate


class Action(str, Enum):
    GRANT = "GRANT"
    EXTEND = "EXTEND"
    WITHDRAW = "WITHDRAW"


CHOICES = ("YES", "NO")

HEX64 = 64
HEX128 = 128


def _is_hex(text: str, length: int) -> bool:
    if len(text) != length:
        return False
    return all(c in "0123456789abcdef" for c in text)


Answers = tuple[tuple[str, str], ...]


def _check_answer_shape(answers: Answers) -> None:
    for item in answers:
        if len(item) != 2 or not isinstance(item[0], str) or item[1] not in CHOICES:
            raise ValueError(f"malformed answer entry: {item!r}")


def signing_payload(wallet: str, public_key: str, action: Action | str,
                    template_cid: str, answers: Answers) -> bytes:
    """Exact bytes a wallet signs; clients must reproduce these."""
    return canonical_json({
        "action": str(Action(action).value),
        "answers": [[qid, choice] for qid, choice in answers],
        "public_key": public_key,
        "template_cid": template_cid,
        "wallet": wallet,
    })


@dataclass(frozen=True)
class TxDraft:
    """A signed consent event as submitted, before the node stamps it."""

    wallet: str
    public_key: str
    action: Action
    template_cid: str
    answers: Answers
    signature: str

    def __post_init__(self):
        if not is_address(self.wallet):
            raise ValueError(f"malformed wallet address: {self.wallet!r}")
        if not _is_hex(self.public_key, HEX64):
            raise ValueError("public_key must be 64 hex chars")
        if not _is_hex(self.signature, HEX128):
            raise ValueError("signature must be 128 hex chars")
        _check_answer_shape(self.answers)

    def payload(self) -> bytes:
        return signing_payload(self.wallet, self.public_key, self.action,
                               self.template_cid, self.answers)

    @property
    def body_digest(self) -> str:
        return sha256_hex(self.payload())


def sign_draft(keypair, action: Action | str, template_cid: str,
               answers: Answers) -> TxDraft:
    """Build and sign a draft with a local wallet keypair."""
    action = Action(action)
    public_key = keypair.public.hex()
    wallet = keypair.address
    payload = signing_payload(wallet, public_key, action, template_cid, answers)
    return TxDraft(
        wallet=wallet,
        public_key=public_key,
        action=action,
        template_cid=template_cid,
        answers=tuple((q, c) for q, c in answers),
        signature=keypair.sign(payload).hex(),
    )


@dataclass(frozen=True)
class ConsentTransaction:
    wallet: str
    public_key: str
    action: Action
    template_cid: str
    answers: Answers
    timestamp: int
    signature: str

    def to_record(self) -> dict:
        return {
            "action": self.action.value,
            "answers": [[qid, choice] for qid, choice in self.answers],
            "public_key": self.public_key,
            "signature": self.signature,
            "template_cid": self.template_cid,
            "timestamp": self.timestamp,
            "wallet": self.wallet,
        }

    @property
    def tx_id(self) -> str:
        return sha256_hex(canonical_json(self.to_record()))

    def payload(self) -> bytes:
        return signing_payload(self.wallet, self.public_key, self.action,
                               self.template_cid, self.answers)

    @property
    def body_digest(self) -> str:
        return sha256_hex(self.payload())

    @classmethod
    def from_draft(cls, draft: TxDraft, timestamp: int) -> ConsentTransaction:
        return cls(
            wallet=draft.wallet,
            public_key=draft.public_key,
            action=draft.action,
            template_cid=draft.template_cid,
            answers=draft.answers,
            timestamp=timestamp,
            signature=draft.signature,
        )

    @classmethod
    def from_record(cls, obj: dict) -> ConsentTransaction:
        if not isinstance(obj, dict) or set(obj) != {
            "action", "answers", "public_key", "signature",
            "template_cid", "timestamp", "wallet",
        }:
            raise ValueError("malformed transaction record")
        if not isinstance(obj["timestamp"], int) or isinstance(obj["timestamp"], bool):
            raise ValueError("transaction timestamp must be an integer")
        if not is_address(obj["wallet"]):
            raise ValueError("malformed wallet address")
        if not _is_hex(obj["public_key"], HEX64) or not _is_hex(obj["signature"], HEX128):
            raise ValueError("malformed key or signature hex")
        answers = tuple((pair[0], pair[1]) for pair in obj["answers"])
        _check_answer_shape(answers)
        return cls(
            wallet=obj["wallet"],
            public_key=obj["public_key"],
            action=Action(obj["action"]),
            template_cid=obj["template_cid"],
            answers=answers,
            timestamp=obj["timestamp"],
            signature=obj["signature"],
        )


def tx_root_of(tx_ids: list[str]) -> str:
    return sha256_hex(b"".join(bytes.fromhex(t) for t in tx_ids))


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: str
    timestamp: int
    transactions: tuple[ConsentTransaction, ...]
    tx_root: str
    seal: str

    def header_bytes(self) -> bytes:
        return canonical_json({
            "height": self.height,
            "prev_hash": self.prev_hash,
            "timestamp": self.timestamp,
            "tx_root": self.tx_root,
        })

    @property
    def block_hash(self) -> str:
        return sha256_hex(self.header_bytes())

    def to_record(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash,
            "seal": self.seal,
            "timestamp": self.timestamp,
            "transactions": [tx.to_record() for tx in self.transactions],
            "tx_root": self.tx_root,
        }

    @classmethod
    def from_record(cls, obj: dict) -> Block:
        if not isinstance(obj, dict) or set(obj) != {
            "height", "prev_hash", "seal", "timestamp", "transactions", "tx_root",
        }:
            raise ValueError("malformed block record")
        for key in ("height", "timestamp"):
            if not isinstance(obj[key], int) or isinstance(obj[key], bool):
                raise ValueError(f"block {key} must be an integer")
        if obj["height"] < 0:
            raise ValueError("block height must be non-negative")
        if not _is_hex(obj["prev_hash"], HEX64) or not _is_hex(obj["tx_root"], HEX64):
            raise ValueError("malformed block digest hex")
        if not _is_hex(obj["seal"], HEX128):
            raise ValueError("malformed block seal hex")
        txs = tuple(ConsentTransaction.from_record(t) for t in obj["transactions"])
        return cls(
            height=obj["height"],
            prev_hash=obj["prev_hash"],
            timestamp=obj["timestamp"],
            transactions=txs,
            tx_root=obj["tx_root"],
            seal=obj["seal"],
        )


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    height: int | None = None
    reason: str | None = None

    @classmethod
    def passed(cls) -> ValidationReport:
        return cls(True)

    @classmethod
    def violation(cls, height: int, reason: str) -> ValidationReport:
        return cls(False, height, reason)


class SyncOutcome(Enum):
    ADOPTED = "adopted"
    KEPT = "kept"
    REJECTED = "rejected"


@dataclass(frozen=True)
class _CorruptBlock:
    """Placeholder for a chain-file record that failed to parse."""

    reason: str


class Clock(Protocol):
    def now(self) -> int: ...


TemplateLookup = Callable[[str], ConsentTemplate]


def _read_chain_file(path: Path) -> list[bytes | _CorruptBlock]:
    """Split the length-prefixed chain file; a bad prefix or truncated record
    poisons that entry and everything after it."""
    raw = path.read_bytes()
    records: list[bytes | _CorruptBlock] = []
    off = 0
    while off < len(raw):
        if off + 4 > len(raw):
            records.append(_CorruptBlock("truncated length prefix"))
            break
        (length,) = struct.unpack(">I", raw[off:off + 4])
        off += 4
        if off + length > len(raw):
            records.append(_CorruptBlock("record extends past end of file"))
            break
        records.append(raw[off:off + length])
        off += length
    return records


def _parse_blocks(records: list[bytes | _CorruptBlock]) -> list[Block | _CorruptBlock]:
    import json

    blocks: list[Block | _CorruptBlock] = []
    for rec in records:
        if isinstance(rec, _CorruptBlock):
            blocks.append(rec)
            continue
        try:
            blocks.append(Block.from_record(json.loads(rec.decode("utf-8"))))
        except (ValueError, UnicodeDecodeError) as exc:
            blocks.append(_CorruptBlock(f"malformed block record: {exc}"))
    return blocks


def check_chain(blocks: list[Block | _CorruptBlock],
                authority_public: bytes) -> ValidationReport:
    """Full re-verification: hashes, links, seals, and every tx signature."""
    if not blocks:
        return ValidationReport.violation(0, "chain is empty")
    prev: Block | None = None
    for height, block in enumerate(blocks):
        if isinstance(block, _CorruptBlock):
            return ValidationReport.violation(height, block.reason)
        if block.height != height:
            return ValidationReport.violation(height, "height out of sequence")
        if height == 0:
            if (block.prev_hash != ZERO_DIGEST or block.timestamp != 0
                    or block.transactions):
                return ValidationReport.violation(0, "genesis block malformed")
        else:
            assert prev is not None
            if block.prev_hash != prev.block_hash:
                return ValidationReport.violation(height, "hash link mismatch")
            if block.timestamp < prev.timestamp:
                return ValidationReport.violation(height, "timestamp regression")
        recomputed_root = tx_root_of([tx.tx_id for tx in block.transactions])
        if recomputed_root != block.tx_root:
            return ValidationReport.violation(height, "tx_root mismatch")
        if not verify_signature(authority_public, block.header_bytes(),
                                bytes.fromhex(block.seal)):
            return ValidationReport.violation(height, "seal invalid")
        for tx in block.transactions:
            if derive_address(bytes.fromhex(tx.public_key)) != tx.wallet:
                return ValidationReport.violation(
                    height, f"wallet does not match public key in tx {tx.tx_id[:12]}")
            if not verify_signature(bytes.fromhex(tx.public_key), tx.payload(),
                                    bytes.fromhex(tx.signature)):
                return ValidationReport.violation(
                    height, f"transaction signature invalid in tx {tx.tx_id[:12]}")
        prev = block
    return ValidationReport.passed()


class Ledger:
    """Single-writer chain plus an in-memory pending pool.

    All mutations (submit, seal, sync) serialize through one lock; readers
    see sealed state only. The pending pool is process-local and not
    persisted: a restart drops unsealed submissions.
    """

    def __init__(self, path: Path | str, authority_public: bytes,
                 authority_secret: bytes | None, clock: Clock,
                 template_lookup: TemplateLookup):
        self.path = Path(path)
        self.authority_public = authority_public
        self._authority_secret = authority_secret
        self.clock = clock
        self.template_lookup = template_lookup
        self._lock = Lock()
        self._pool: list[ConsentTransaction] = []
        self._blocks: list[Block | _CorruptBlock] = []
        self._wallet_index: dict[str, list[tuple[int, int]]] = {}
        if self.path.exists():
            self._blocks = _parse_blocks(_read_chain_file(self.path))
            self._rebuild_index()
        else:
            self._create_genesis()

    # -- construction helpers ------------------------------------------------

    def _sign_header(self, header_bytes: bytes) -> str:
        if self._authority_secret is None:
            raise AuthorityKeyUnavailable("no sealing key configured")
        from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
        key = Ed25519PrivateKey.from_private_bytes(self._authority_secret)
        return key.sign(header_bytes).hex()

    def _make_block(self, height: int, prev_hash: str, timestamp: int,
                    txs: tuple[ConsentTransaction, ...]) -> Block:
        root = tx_root_of([tx.tx_id for tx in txs])
        unsealed = Block(height, prev_hash, timestamp, txs, root, seal="0" * HEX128)
        seal = self._sign_header(unsealed.header_bytes())
        return Block(height, prev_hash, timestamp, txs, root, seal)

    def _create_genesis(self) -> None:
        genesis = self._make_block(0, ZERO_DIGEST, 0, ())
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._append_to_file(genesis)
        self._blocks = [genesis]

    def _append_to_file(self, block: Block) -> None:
        record = canonical_json(block.to_record())
        with self.path.open("ab") as fh:
            fh.write(struct.pack(">I", len(record)))
            fh.write(record)

    def _rewrite_file(self, blocks: list[Block]) -> None:
        tmp = self.path.with_suffix(".tmp")
        with tmp.open("wb") as fh:
            for block in blocks:
                record = canonical_json(block.to_record())
                fh.write(struct.pack(">I", len(record)))
                fh.write(record)
        tmp.replace(self.path)

    def _rebuild_index(self) -> None:
        self._wallet_index = {}
        for block in self._blocks:
            if isinstance(block, _CorruptBlock):
                continue
            for pos, tx in enumerate(block.transactions):
                self._wallet_index.setdefault(tx.wallet, []).append((block.height, pos))

    # -- read surface ----------------------------------------------------------

    @property
    def blocks(self) -> list[Block]:
        return [b for b in self._blocks if isinstance(b, Block)]

    @property
    def head(self) -> Block:
        last = self._blocks[-1]
        if isinstance(last, _CorruptBlock):
            raise ValueError("chain head is corrupt")
        return last

    @property
    def height(self) -> int:
        return self.head.height

    @property
    def pending(self) -> tuple[ConsentTransaction, ...]:
        return tuple(self._pool)

    def pending_for(self, wallet: str, template_cid: str) -> list[ConsentTransaction]:
        return [tx for tx in self._pool
                if tx.wallet == wallet and tx.template_cid == template_cid]

    def history(self, wallet: str) -> list[tuple[ConsentTransaction, int, int]]:
        """Sealed transactions of one wallet in chain order, with the height
        and timestamp of the block that sealed each."""
        out = []
        for height, pos in self._wallet_index.get(wallet, []):
            block = self._blocks[height]
            assert isinstance(block, Block)
            out.append((block.transactions[pos], height, block.timestamp))
        return out

    def dump(self) -> list[str]:
        lines = []
        for block in self._blocks:
            if isinstance(block, _CorruptBlock):
                raise ValueError(f"cannot dump corrupt chain: {block.reason}")
            lines.append(canonical_json(block.to_record()).decode("utf-8"))
        return lines

    # -- write surface ---------------------------------------------------------

    def _check_answers(self, draft: TxDraft, template: ConsentTemplate) -> None:
        question_ids = template.question_ids()
        seen: set[str] = set()
        for qid, _choice in draft.answers:
            if qid not in question_ids:
                raise MalformedAnswers(f"unknown question {qid}", qid)
            if qid in seen:
                raise MalformedAnswers(f"duplicate answer for {qid}", qid)
            seen.add(qid)
        if draft.action is Action.GRANT:
            missing = [q for q in question_ids if q not in seen]
            if missing:
                raise MalformedAnswers(f"missing answer for {missing[0]}", missing[0])
        elif draft.action is Action.EXTEND:
            if not draft.answers:
                raise MalformedAnswers("EXTEND requires at least one answer")
        elif draft.action is Action.WITHDRAW:
            if draft.answers:
                raise MalformedAnswers("WITHDRAW carries no answers",
                                       draft.answers[0][0])

    def submit(self, draft: TxDraft) -> str:
        """Admit a signed draft into the pending pool and return its tx id.

        Duplicate submissions of the same signed body are idempotent while
        the first is still pending.
        """
        with self._lock:
            if derive_address(bytes.fromhex(draft.public_key)) != draft.wallet:
                raise BadSignature("wallet does not match public key")
            if not verify_signature(bytes.fromhex(draft.public_key), draft.payload(),
                                    bytes.fromhex(draft.signature)):
                raise BadSignature("signature does not verify")
            template = self.template_lookup(draft.template_cid)
            self._check_answers(draft, template)
            digest = draft.body_digest
            for tx in self._pool:
                if tx.body_digest == digest:
                    return tx.tx_id
            tx = ConsentTransaction.from_draft(draft, self.clock.now())
            self._pool.append(tx)
            return tx.tx_id

    def seal_block(self) -> Block:
        """Drain the pool into a new sealed block appended to the chain."""
        with self._lock:
            if not self._pool:
                raise EmptyPool("nothing to seal")
            head = self.head
            timestamp = max(self.clock.now(), head.timestamp)
            block = self._make_block(head.height + 1, head.block_hash,
                                     timestamp, tuple(self._pool))
            self._append_to_file(block)
            self._blocks.append(block)
            for pos, tx in enumerate(block.transactions):
                self._wallet_index.setdefault(tx.wallet, []).append((block.height, pos))
            self._pool = []
            return block

    def validate_chain(self) -> ValidationReport:
        return check_chain(self._blocks, self.authority_public)

    def sync_from(self, peer_blocks: list[Block]) -> SyncOutcome:
        """Adopt a peer chain iff it fully validates, shares our genesis, and
        is strictly longer; ties and invalid input never displace local state."""
        with self._lock:
            report = check_chain(list(peer_blocks), self.authority_public)
            if not report.ok:
                return SyncOutcome.REJECTED
            ours = self._blocks
            if isinstance(ours[0], _CorruptBlock):
                return SyncOutcome.REJECTED
            if peer_blocks[0].block_hash != ours[0].block_hash:
                return SyncOutcome.KEPT
            if len(peer_blocks) <= len(ours):
                return SyncOutcome.KEPT
            adopted = list(peer_blocks)
            self._rewrite_file(adopted)
            self._blocks = list(adopted)
            self._rebuild_index()
            sealed_digests = {
                tx.body_digest for b in adopted for tx in b.transactions
            }
            self._pool = [tx for tx in self._pool
                          if tx.body_digest not in sealed_digests]
            return SyncOutcome.ADOPTED
