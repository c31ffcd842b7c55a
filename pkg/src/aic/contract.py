"""Deterministic consent state machine over the sealed chain.

Validation enforces the consent elements a transaction can violate —
explicit, unambiguous, specific, freely given — and rejections name the
element so auditors can trace why a submission failed. State derivation is
a pure fold over one wallet's chain-ordered history: a grant answers every
question, a supplementary statement (extend) overwrites just the questions
it lists, and a withdrawal turns every previously answered question to
WITHDRAWN without touching the record that granted it. Later transactions
always win, per question.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

from .errors import UnknownQuestion
from .ledger import Action, ConsentTransaction, TxDraft
from .templates import ConsentTemplate


class Decision(str, Enum):
    GRANTED = "GRANTED"
    DENIED = "DENIED"
    WITHDRAWN = "WITHDRAWN"
    NEVER_ASKED = "NEVER_ASKED"


# Consent elements a transaction can violate (templates cover "informed").
EXPLICIT = "explicit"
UNAMBIGUOUS = "unambiguous"
SPECIFIC = "specific"
FREELY_GIVEN = "freely-given"


@dataclass(frozen=True)
class Rejection:
    element: str
    question_id: str | None
    message: str


@dataclass(frozen=True)
class PurposeDecision:
    decision: Decision
    basis_tx: str | None
    basis_height: int | None


@dataclass(frozen=True)
class ConsentState:
    wallet: str
    template_cid: str
    per_question: dict[str, Decision]
    basis: dict[str, tuple[str, int]]
    as_of: int


def validate(tx: TxDraft | ConsentTransaction, template: ConsentTemplate,
             prior: list[ConsentTransaction] | None = None) -> list[Rejection]:
    """Consent-element check of one transaction against its template and the
    wallet's prior transactions on that template. Empty result means ok."""
    prior = prior or []
    rejections: list[Rejection] = []
    question_ids = template.question_ids()
    seen: set[str] = set()
    for qid, _choice in tx.answers:
        if qid not in question_ids:
            rejections.append(Rejection(
                SPECIFIC, qid, f"{qid} is not a question of this template"))
        if qid in seen:
            rejections.append(Rejection(
                UNAMBIGUOUS, qid, f"{qid} is answered more than once"))
        seen.add(qid)
    if tx.action is Action.GRANT:
        for qid in question_ids:
            if qid not in seen:
                rejections.append(Rejection(
                    EXPLICIT, qid, f"{qid} has no explicit YES/NO choice"))
    elif tx.action is Action.EXTEND:
        if not tx.answers:
            rejections.append(Rejection(
                EXPLICIT, None, "a supplementary statement must answer at least one question"))
        if not any(p.action is Action.GRANT for p in prior):
            rejections.append(Rejection(
                FREELY_GIVEN, None, "no initial consent exists to extend"))
    elif tx.action is Action.WITHDRAW:
        if tx.answers:
            rejections.append(Rejection(
                UNAMBIGUOUS, tx.answers[0][0], "withdrawal carries no answers"))
        if not any(p.action in (Action.GRANT, Action.EXTEND) for p in prior):
            rejections.append(Rejection(
                FREELY_GIVEN, None, "nothing to withdraw: no prior consent by this wallet"))
    return rejections


def fold(template: ConsentTemplate, wallet: str, template_cid: str,
         entries: list[tuple[ConsentTransaction, int]],
         as_of: int) -> ConsentState:
    """From-scratch fold of chain-ordered history into per-question state."""
    per_question = {qid: Decision.NEVER_ASKED for qid in template.question_ids()}
    basis: dict[str, tuple[str, int]] = {}
    state = ConsentState(wallet, template_cid, per_question, basis, as_of)
    for tx, height in entries:
        _apply(state, tx, height)
    return state


def _apply(state: ConsentState, tx: ConsentTransaction, height: int) -> None:
    if tx.action in (Action.GRANT, Action.EXTEND):
        for qid, choice in tx.answers:
            if qid not in state.per_question:
                continue
            state.per_question[qid] = (
                Decision.GRANTED if choice == "YES" else Decision.DENIED)
            state.basis[qid] = (tx.tx_id, height)
    elif tx.action is Action.WITHDRAW:
        for qid, decision in state.per_question.items():
            if decision in (Decision.GRANTED, Decision.DENIED):
                state.per_question[qid] = Decision.WITHDRAWN
                state.basis[qid] = (tx.tx_id, height)


class HistorySource(Protocol):
    """Where the engine reads sealed history from (the ledger, in production)."""

    def entries(self, wallet: str, template_cid: str) -> list[tuple[ConsentTransaction, int]]: ...

    def head_height(self) -> int: ...


TemplateLoader = Callable[[str], ConsentTemplate]


@dataclass
class _CachedFold:
    height: int
    state: ConsentState


class ConsentEngine:
    """Derives current consent state by folding sealed history.

    Keeps a per-(wallet, template) cache extended incrementally with blocks
    newer than the cached height; the cache is derived data and any query at
    an older height falls back to a from-scratch fold.
    """

    def __init__(self, history: HistorySource, load_template: TemplateLoader):
        self._history = history
        self._load_template = load_template
        self._cache: dict[tuple[str, str], _CachedFold] = {}

    def current_state(self, wallet: str, template_cid: str,
                      at_height: int | None = None) -> ConsentState:
        template = self._load_template(template_cid)
        head = self._history.head_height()
        target = head if at_height is None else min(at_height, head)
        entries = self._history.entries(wallet, template_cid)
        key = (wallet, template_cid)
        cached = self._cache.get(key)
        if cached is not None and cached.height <= target:
            state = ConsentState(
                wallet, template_cid,
                dict(cached.state.per_question),
                dict(cached.state.basis),
                target,
            )
            for tx, height in entries:
                if cached.height < height <= target:
                    _apply(state, tx, height)
        else:
            state = fold(template, wallet, template_cid,
                         [(tx, h) for tx, h in entries if h <= target], target)
        if target == head:
            self._cache[key] = _CachedFold(
                head,
                ConsentState(wallet, template_cid,
                             dict(state.per_question), dict(state.basis), head),
            )
        return state

    def check_purpose(self, wallet: str, template_cid: str,
                      question_id: str) -> PurposeDecision:
        """Data-use gate: the standing decision for one question, with the
        transaction that last set it as audit evidence."""
        state = self.current_state(wallet, template_cid)
        if question_id not in state.per_question:
            raise UnknownQuestion(
                f"{question_id} is not a question of {template_cid}")
        decision = state.per_question[question_id]
        tx_id, height = state.basis.get(question_id, (None, None))
        return PurposeDecision(decision, tx_id, height)

    def invalidate_cache(self) -> None:
        self._cache.clear()
