"""Canonical byte encodings.

Everything that gets hashed or signed goes through ``canonical_json``:
UTF-8, keys sorted lexicographically, no insignificant whitespace. The
same encoding is reproduced client-side, so it must never change.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

ZERO_DIGEST = "0" * 64


def canonical_json(value: Any) -> bytes:
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
