"""Wires the store, ledger, contract engine, vault, and sessions together.

The node is the single place that owns on-disk state. The gateway and CLI
hold a ``Node`` and never reach around it, which is what keeps the
externally observable consent state a pure function of the sealed chain.
"""

from __future__ import annotations

import os
import secrets
from dataclasses import dataclass

from . import roles
from .audit import AuditLog
from .cas import CasStore, Cid
from .clocks import SystemClock
from .config import SEAL_BATCH, SEAL_INTERACTIVE, Config
from .contract import ConsentEngine, ConsentState, PurposeDecision, validate
from .errors import AicError, Unauthorized
from .keys import KeyPair
from .ledger import ConsentTransaction, Ledger, TxDraft
from .templates import (
    ConsentTemplate,
    load_template,
    publish_template,
    serialize_template,
)
from .vault import IdentityLink, Vault


class ConsentRejected(AicError):
    """Submission violated one or more consent elements."""

    code = "CONSENT_REJECTED"

    def __init__(self, rejections):
        super().__init__("; ".join(f"{r.element}: {r.message}" for r in rejections))
        self.rejections = rejections


@dataclass(frozen=True)
class Session:
    token: str
    role: str
    wallet: str | None
    expires_at: int


class SessionStore:
    """Stub token issuer; real identity proofing is the vault's enrollment."""

    def __init__(self, clock, ttl: int):
        self.clock = clock
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}

    def issue(self, role: str, wallet: str | None = None) -> Session:
        if role not in roles.ALL_ROLES:
            raise Unauthorized(f"unknown role {role!r}")
        if role == roles.SUBJECT and wallet is None:
            raise Unauthorized("subject sessions need a wallet")
        session = Session(
            token=secrets.token_urlsafe(24),
            role=role,
            wallet=wallet if role == roles.SUBJECT else None,
            expires_at=self.clock.now() + self.ttl,
        )
        self._sessions[session.token] = session
        return session

    def get(self, token: str) -> Session | None:
        session = self._sessions.get(token)
        if session is None or session.expires_at <= self.clock.now():
            return None
        return session


def _load_or_create_key(path, generate) -> bytes:
    if path.exists():
        return bytes.fromhex(path.read_text().strip())
    raw = generate()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(raw.hex() + "\n")
    os.chmod(path, 0o600)
    return raw


class _LedgerHistory:
    def __init__(self, ledger: Ledger):
        self._ledger = ledger

    def entries(self, wallet: str, template_cid: str):
        return [(tx, height) for tx, height, _ts in self._ledger.history(wallet)
                if tx.template_cid == template_cid]

    def head_height(self) -> int:
        return self._ledger.height

    def generation(self) -> int:
        return 0


class Node:
    def __init__(self, config: Config, clock=None):
        self.config = config
        self.clock = clock or SystemClock()
        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.cas = CasStore(config.data_dir / "cas")
        authority_secret = _load_or_create_key(
            config.authority_key_path, lambda: KeyPair.generate().secret)
        self.authority = KeyPair.from_secret(authority_secret)
        master_key = _load_or_create_key(
            config.master_key_path, lambda: os.urandom(32))
        self.audit = AuditLog(config.data_dir / "audit.log", self.clock)
        self.vault = Vault(config.data_dir / "vault", master_key,
                           self.audit, self.clock)
        self.ledger = Ledger(
            config.data_dir / "chain.log",
            authority_public=self.authority.public,
            authority_secret=self.authority.secret,
            clock=self.clock,
            template_lookup=self.load_template,
        )
        self.engine = ConsentEngine(_LedgerHistory(self.ledger), self.load_template)
        self.sessions = SessionStore(self.clock, config.session_ttl)
        self._last_seal = self.clock.now()

    # -- templates -------------------------------------------------------------

    def load_template(self, cid: str) -> ConsentTemplate:
        return load_template(self.cas, cid)

    def publish_template(self, template: ConsentTemplate) -> Cid:
        return publish_template(self.cas, template)

    def template_bytes(self, cid: str) -> bytes:
        # Round-trips through the parser so only actual templates are served.
        return serialize_template(self.load_template(cid))

    # -- consents ----------------------------------------------------------------

    def submit_consent(self, draft: TxDraft) -> str:
        """Contract validation, then ledger admission, then the seal policy."""
        template = self.load_template(draft.template_cid)
        prior = [tx for tx, _h, _ts in self.ledger.history(draft.wallet)
                 if tx.template_cid == draft.template_cid]
        prior += self.ledger.pending_for(draft.wallet, draft.template_cid)
        rejections = validate(draft, template, prior)
        if rejections:
            raise ConsentRejected(rejections)
        tx_id = self.ledger.submit(draft)
        self._maybe_seal()
        return tx_id

    def _maybe_seal(self) -> None:
        if not self.ledger.pending:
            return
        if self.config.seal_policy == SEAL_INTERACTIVE:
            self.ledger.seal_block()
        elif self.config.seal_policy == SEAL_BATCH:
            due = (len(self.ledger.pending) >= self.config.batch_max_txs
                   or self.clock.now() - self._last_seal >= self.config.batch_max_seconds)
            if due:
                self.ledger.seal_block()
        self._last_seal = self.clock.now()

    def consent_status(self, wallet: str, template_cid: str) -> tuple[
            ConsentState, list[tuple[ConsentTransaction, int, int]]]:
        state = self.engine.current_state(wallet, template_cid)
        rows = [(tx, height, ts) for tx, height, ts in self.ledger.history(wallet)
                if tx.template_cid == template_cid]
        return state, rows

    def check_purpose(self, wallet: str, template_cid: str,
                      question_id: str) -> PurposeDecision:
        return self.engine.check_purpose(wallet, template_cid, question_id)

    # -- identity ----------------------------------------------------------------

    def enroll(self, display_name: str, attrs: dict[str, str],
               wallet_public_key: bytes, actor: str,
               subject_id: str | None = None) -> tuple[str, str]:
        return self.vault.enroll(display_name, attrs, wallet_public_key,
                                 actor, subject_id)

    def resolve(self, wallet: str, actor: str) -> IdentityLink:
        return self.vault.resolve(wallet, actor)

    def erase_subject(self, subject_id: str, actor: str) -> int:
        return self.vault.erase(subject_id, actor)

    def rectify_subject(self, subject_id: str, actor: str,
                        display_name: str | None = None,
                        attrs: dict[str, str] | None = None) -> list[IdentityLink]:
        return self.vault.rectify(subject_id, actor, display_name, attrs)
