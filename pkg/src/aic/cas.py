"""Content-addressed chunk store with a flat Merkle-DAG root.

Content is split into fixed-size chunks, each stored once under the hash of
its bytes, so identical chunks are never written twice and every read is
verified against the identifier it was requested by. Content larger than one
chunk gets a single interior DAG node listing the chunk ids in order; the
root id is the hash of that node's canonical serialization.

Wire formats (fixed; golden tests depend on them):
  - Cid text: ``aic1`` + 64 lowercase hex chars of SHA-256 of the bytes.
  - DAG node: ``AICD`` magic, version byte 0x01, kind byte (0x01 = interior),
    big-endian u64 total byte length, big-endian u32 child count, then each
    child Cid as 68 ASCII bytes.
  - On disk: one file per chunk under a two-level fan-out of the first four
    digest hex chars; ``dag.idx`` maps root Cid -> hex of the node bytes,
    one entry per line.
"""

from __future__ import annotations

import hashlib
import os
import re
import struct
import tempfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from threading import Lock

from .errors import IntegrityViolation, NotFound, StoreError

CHUNK_SIZE = 262144
CID_PREFIX = "aic1"
CID_RE = re.compile(r"^aic1[0-9a-f]{64}$")
CID_TEXT_LEN = len(CID_PREFIX) + 64

DAG_MAGIC = b"AICD"
DAG_VERSION = 1


@dataclass(frozen=True)
class Cid:
    """Content identifier: ``aic1`` + SHA-256 hex of the addressed bytes."""

    text: str

    def __post_init__(self):
        if not CID_RE.match(self.text):
            raise ValueError(f"malformed cid: {self.text!r}")

    @classmethod
    def from_bytes(cls, data: bytes) -> Cid:
        return cls(CID_PREFIX + hashlib.sha256(data).hexdigest())

    @classmethod
    def parse(cls, text: str) -> Cid:
        return cls(text)

    @property
    def digest_hex(self) -> str:
        return self.text[len(CID_PREFIX):]

    def __str__(self) -> str:
        return self.text


def cid_of(data: bytes) -> Cid:
    """Pure content hash; identical bytes always yield the identical Cid."""
    return Cid.from_bytes(data)


def is_cid(text: str) -> bool:
    return bool(CID_RE.match(text))


@dataclass(frozen=True)
class Chunk:
    data: bytes
    cid: Cid


def chunk(data: bytes) -> list[Chunk]:
    """Fixed-size split; only the final chunk may be short. Empty input is
    one empty chunk so the empty document stays addressable."""
    if not data:
        return [Chunk(b"", cid_of(b""))]
    pieces = []
    for off in range(0, len(data), CHUNK_SIZE):
        piece = data[off:off + CHUNK_SIZE]
        pieces.append(Chunk(piece, cid_of(piece)))
    return pieces


class DagKind(Enum):
    LEAF = 0
    INTERIOR = 1


@dataclass(frozen=True)
class DagNode:
    """Interior node: ordered chunk ids plus the total byte length."""

    kind: DagKind
    children: tuple[Cid, ...]
    total_length: int

    def serialize(self) -> bytes:
        if self.kind is not DagKind.INTERIOR:
            raise ValueError("only interior nodes are serialized")
        out = bytearray()
        out += DAG_MAGIC
        out += struct.pack(">BBQI", DAG_VERSION, self.kind.value,
                           self.total_length, len(self.children))
        for child in self.children:
            out += child.text.encode("ascii")
        return bytes(out)

    @classmethod
    def deserialize(cls, raw: bytes) -> DagNode:
        if raw[:4] != DAG_MAGIC:
            raise ValueError("bad dag magic")
        version, kind, total_length, count = struct.unpack(">BBQI", raw[4:18])
        if version != DAG_VERSION or kind != DagKind.INTERIOR.value:
            raise ValueError("unsupported dag node")
        if count < 2:
            raise ValueError("interior node needs at least 2 children")
        body = raw[18:]
        if len(body) != count * CID_TEXT_LEN:
            raise ValueError("dag node length mismatch")
        children = tuple(
            Cid(body[i * CID_TEXT_LEN:(i + 1) * CID_TEXT_LEN].decode("ascii"))
            for i in range(count)
        )
        return cls(DagKind.INTERIOR, children, total_length)


def _plan(data: bytes) -> tuple[Cid, list[Chunk], bytes | None]:
    """Root cid, chunk list, and interior node bytes (None when single-chunk)."""
    chunks = chunk(data)
    if len(chunks) == 1:
        return chunks[0].cid, chunks, None
    node = DagNode(DagKind.INTERIOR, tuple(c.cid for c in chunks), len(data))
    raw = node.serialize()
    return cid_of(raw), chunks, raw


def verify(cid: Cid | str, data: bytes) -> bool:
    """True iff storing ``data`` would yield ``cid``. Malformed cid text is
    simply not a match."""
    if isinstance(cid, str):
        if not is_cid(cid):
            return False
        cid = Cid(cid)
    root, _, _ = _plan(data)
    return root == cid


class CasStore:
    """Chunk files plus a root->DAG index, all under one directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.objects_dir = self.root / "objects"
        self.index_path = self.root / "dag.idx"
        self.objects_dir.mkdir(parents=True, exist_ok=True)
        self._dag: dict[str, bytes] = {}
        self._lock = Lock()
        self._load_index()

    def _load_index(self) -> None:
        if not self.index_path.exists():
            return
        for line in self.index_path.read_text().splitlines():
            if not line:
                continue
            cid_text, node_hex = line.split(" ", 1)
            self._dag[cid_text] = bytes.fromhex(node_hex)

    def _object_path(self, cid: Cid) -> Path:
        h = cid.digest_hex
        return self.objects_dir / h[0:2] / h[2:4] / cid.text

    def has_chunk(self, cid: Cid) -> bool:
        return self._object_path(cid).exists()

    def stored_chunk_count(self) -> int:
        return sum(len(files) for _, _, files in os.walk(self.objects_dir))

    def _write_chunk(self, c: Chunk) -> None:
        path = self._object_path(c.cid)
        if path.exists():
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        # Write-then-rename so a failed write never leaves a readable object.
        try:
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(c.data)
            os.replace(tmp, path)
        except OSError as exc:
            raise StoreError(f"cannot persist chunk: {exc}") from exc

    def put(self, data: bytes) -> Cid:
        """Persist content chunk-wise and return its root Cid. Idempotent:
        re-putting identical bytes stores nothing new."""
        root, chunks, node_raw = _plan(data)
        with self._lock:
            for c in chunks:
                self._write_chunk(c)
            if node_raw is not None and root.text not in self._dag:
                try:
                    with self.index_path.open("a") as fh:
                        fh.write(f"{root.text} {node_raw.hex()}\n")
                except OSError as exc:
                    raise StoreError(f"cannot persist dag index: {exc}") from exc
                self._dag[root.text] = node_raw
        return root

    def _read_chunk(self, cid: Cid) -> bytes:
        path = self._object_path(cid)
        if not path.exists():
            raise NotFound(f"no content for {cid.text}")
        data = path.read_bytes()
        if cid_of(data) != cid:
            raise IntegrityViolation(f"chunk {cid.text} fails re-hash")
        return data

    def get(self, cid: Cid | str) -> bytes:
        """Fetch and re-verify content by Cid, recursing through the DAG."""
        if isinstance(cid, str):
            cid = Cid.parse(cid)
        # Chunk objects win over index entries: only literally-stored bytes
        # exist as objects, so single-chunk round-trips always hold.
        if self.has_chunk(cid):
            return self._read_chunk(cid)
        node_raw = self._dag.get(cid.text)
        if node_raw is None:
            raise NotFound(f"no content for {cid.text}")
        if cid_of(node_raw) != cid:
            raise IntegrityViolation(f"dag node {cid.text} fails re-hash")
        node = DagNode.deserialize(node_raw)
        data = b"".join(self._read_chunk(child) for child in node.children)
        if len(data) != node.total_length:
            raise IntegrityViolation(f"dag {cid.text} length mismatch")
        return data

    def contains(self, cid: Cid | str) -> bool:
        if isinstance(cid, str):
            if not is_cid(cid):
                return False
            cid = Cid(cid)
        return self.has_chunk(cid) or cid.text in self._dag
