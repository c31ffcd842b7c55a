"""Consent management platform.

Content-addressed template store, authority-sealed consent ledger,
deterministic consent state machine, encrypted identity vault with
crypto-shredding erasure, and an HTTP gateway tying them together.
"""

from .cas import CHUNK_SIZE, CasStore, Chunk, Cid, chunk, cid_of, verify
from .contract import ConsentEngine, ConsentState, Decision, PurposeDecision, fold, validate
from .keys import KeyPair, derive_address, verify_signature
from .ledger import (
    Action,
    Block,
    ConsentTransaction,
    Ledger,
    SyncOutcome,
    TxDraft,
    ValidationReport,
    sign_draft,
)
from .templates import (
    ConsentTemplate,
    Purpose,
    Question,
    load_template,
    parse_template,
    publish_template,
    serialize_template,
    validate_template,
)
from .vault import IdentityLink, Vault

__version__ = "0.1.0"
