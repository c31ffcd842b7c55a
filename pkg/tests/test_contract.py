import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aic.contract import (
    ConsentEngine,
    Decision,
    EXPLICIT,
    FREELY_GIVEN,
    SPECIFIC,
    UNAMBIGUOUS,
    fold,
    validate,
)
from aic.errors import UnknownQuestion, UnknownTemplate
from aic.ledger import Action, ConsentTransaction
from aic.templates import ConsentTemplate, Purpose, Question

WALLET = "0x" + "1" * 40
CID = "aic1" + "c" * 64


def make_template(n_questions: int) -> ConsentTemplate:
    return ConsentTemplate(
        title="study",
        controller_identity="controller",
        questions=tuple(Question(f"Q{i}", f"prompt {i}")
                        for i in range(1, n_questions + 1)),
        purposes=tuple(Purpose(f"Q{i}", f"purpose {i}")
                       for i in range(1, n_questions + 1)),
        notices={k: f"notice {k}" for k in "abcdef"},
    )


def tx(action, answers=(), timestamp=0) -> ConsentTransaction:
    return ConsentTransaction(
        wallet=WALLET,
        public_key="0" * 64,
        action=Action(action),
        template_cid=CID,
        answers=tuple(answers),
        timestamp=timestamp,
        signature="0" * 128,
    )


def brute_force_fold(question_ids, entries):
    """Independent oracle: plain scan, reimplementing the stated rules."""
    state = {q: "NEVER_ASKED" for q in question_ids}
    basis = {}
    for t, height in entries:
        if t.action in (Action.GRANT, Action.EXTEND):
            for qid, choice in t.answers:
                if qid in state:
                    state[qid] = "GRANTED" if choice == "YES" else "DENIED"
                    basis[qid] = (t.tx_id, height)
        else:
            for qid in question_ids:
                if state[qid] in ("GRANTED", "DENIED"):
                    state[qid] = "WITHDRAWN"
                    basis[qid] = (t.tx_id, height)
    return state, basis


class TestValidate:
    def setup_method(self):
        self.template = make_template(3)
        self.grant = tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO")))

    def test_complete_grant_ok(self):
        assert validate(self.grant, self.template, []) == []

    def test_missing_answer_is_explicit_violation(self):
        partial = tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES")))
        rejections = validate(partial, self.template, [])
        assert [r.element for r in rejections] == [EXPLICIT]
        assert rejections[0].question_id == "Q3"

    def test_unknown_question_is_specific_violation(self):
        extra = tx(Action.GRANT,
                   (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO"), ("Q4", "YES")))
        rejections = validate(extra, self.template, [])
        assert [r.element for r in rejections] == [SPECIFIC]
        assert rejections[0].question_id == "Q4"

    def test_duplicate_answer_is_unambiguous_violation(self):
        doubled = tx(Action.GRANT,
                     (("Q1", "YES"), ("Q1", "NO"), ("Q2", "YES"), ("Q3", "NO")))
        rejections = validate(doubled, self.template, [])
        assert UNAMBIGUOUS in {r.element for r in rejections}

    def test_withdraw_without_prior_consent(self):
        rejections = validate(tx(Action.WITHDRAW), self.template, [])
        assert [r.element for r in rejections] == [FREELY_GIVEN]

    def test_withdraw_after_grant_ok(self):
        assert validate(tx(Action.WITHDRAW), self.template, [self.grant]) == []

    def test_extend_without_grant_rejected(self):
        ext = tx(Action.EXTEND, (("Q2", "YES"),))
        rejections = validate(ext, self.template, [])
        assert [r.element for r in rejections] == [FREELY_GIVEN]

    def test_extend_after_grant_ok(self):
        ext = tx(Action.EXTEND, (("Q2", "YES"),))
        assert validate(ext, self.template, [self.grant]) == []

    def test_extend_after_withdraw_reopens(self):
        ext = tx(Action.EXTEND, (("Q2", "YES"),))
        prior = [self.grant, tx(Action.WITHDRAW)]
        assert validate(ext, self.template, prior) == []

    def test_empty_extend_rejected(self):
        rejections = validate(tx(Action.EXTEND), self.template, [self.grant])
        assert EXPLICIT in {r.element for r in rejections}


class TestFold:
    def setup_method(self):
        self.template = make_template(3)

    def run_fold(self, entries):
        return fold(self.template, WALLET, CID, entries, as_of=len(entries))

    def test_grant_example(self):
        grant = tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO")))
        state = self.run_fold([(grant, 1)])
        assert state.per_question == {
            "Q1": Decision.GRANTED, "Q2": Decision.GRANTED, "Q3": Decision.DENIED}

    def test_grant_then_withdraw_all_withdrawn(self):
        entries = [
            (tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO"))), 1),
            (tx(Action.WITHDRAW), 2),
        ]
        state = self.run_fold(entries)
        assert set(state.per_question.values()) == {Decision.WITHDRAWN}

    def test_extend_overwrites_only_listed_questions(self):
        entries = [
            (tx(Action.GRANT, (("Q1", "YES"), ("Q2", "NO"), ("Q3", "NO"))), 1),
            (tx(Action.EXTEND, (("Q2", "YES"),)), 2),
        ]
        state = self.run_fold(entries)
        assert state.per_question == {
            "Q1": Decision.GRANTED, "Q2": Decision.GRANTED, "Q3": Decision.DENIED}

    def test_withdraw_leaves_never_asked_untouched(self):
        entries = [
            (tx(Action.GRANT, (("Q1", "YES"), ("Q2", "NO"), ("Q3", "NO"))), 1),
            (tx(Action.WITHDRAW), 2),
            (tx(Action.EXTEND, (("Q1", "YES"),)), 3),
        ]
        state = self.run_fold(entries)
        assert state.per_question["Q1"] is Decision.GRANTED
        assert state.per_question["Q2"] is Decision.WITHDRAWN

    def test_empty_history_all_never_asked(self):
        state = self.run_fold([])
        assert set(state.per_question.values()) == {Decision.NEVER_ASKED}
        assert state.basis == {}

    def test_second_withdraw_keeps_first_as_basis(self):
        w1 = tx(Action.WITHDRAW, timestamp=1)
        w2 = tx(Action.WITHDRAW, timestamp=2)
        entries = [
            (tx(Action.GRANT, (("Q1", "YES"), ("Q2", "NO"), ("Q3", "NO"))), 1),
            (w1, 2),
            (w2, 3),
        ]
        state = self.run_fold(entries)
        assert all(b == (w1.tx_id, 2) for b in state.basis.values())


class FakeHistory:
    """Synthetic chain history for engine tests: one entry per height."""

    def __init__(self):
        self.rows: list[tuple[ConsentTransaction, int]] = []

    def append(self, t: ConsentTransaction):
        self.rows.append((t, len(self.rows) + 1))

    def entries(self, wallet, template_cid):
        return [(t, h) for t, h in self.rows
                if t.wallet == wallet and t.template_cid == template_cid]

    def head_height(self) -> int:
        return len(self.rows)


def make_engine(template):
    history = FakeHistory()

    def load(cid):
        if cid != CID:
            raise UnknownTemplate(cid)
        return template

    return ConsentEngine(history, load), history


class TestEngine:
    def test_no_transactions_all_never_asked(self):
        engine, _history = make_engine(make_template(3))
        state = engine.current_state(WALLET, CID)
        assert set(state.per_question.values()) == {Decision.NEVER_ASKED}

    def test_unknown_template_errors(self):
        engine, _history = make_engine(make_template(3))
        with pytest.raises(UnknownTemplate):
            engine.current_state(WALLET, "aic1" + "d" * 64)

    def test_state_tracks_new_seals(self):
        engine, history = make_engine(make_template(2))
        history.append(tx(Action.GRANT, (("Q1", "YES"), ("Q2", "NO"))))
        first = engine.current_state(WALLET, CID)
        assert first.per_question["Q1"] is Decision.GRANTED
        history.append(tx(Action.WITHDRAW, timestamp=5))
        second = engine.current_state(WALLET, CID)
        assert set(second.per_question.values()) == {Decision.WITHDRAWN}
        assert second.as_of == 2

    def test_equals_scratch_fold_of_history(self):
        template = make_template(3)
        engine, history = make_engine(template)
        history.append(tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO"))))
        history.append(tx(Action.EXTEND, (("Q3", "YES"),), timestamp=3))
        state = engine.current_state(WALLET, CID)
        scratch = fold(template, WALLET, CID, history.entries(WALLET, CID), 2)
        assert state.per_question == scratch.per_question
        assert state.basis == scratch.basis


class TestCheckPurpose:
    def test_granted_with_grant_basis(self):
        engine, history = make_engine(make_template(3))
        grant = tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO")))
        history.append(grant)
        decision = engine.check_purpose(WALLET, CID, "Q1")
        assert decision.decision is Decision.GRANTED
        assert decision.basis_tx == grant.tx_id
        assert decision.basis_height == 1

    def test_withdrawn_with_withdraw_basis(self):
        engine, history = make_engine(make_template(3))
        history.append(tx(Action.GRANT, (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO"))))
        withdraw = tx(Action.WITHDRAW, timestamp=9)
        history.append(withdraw)
        decision = engine.check_purpose(WALLET, CID, "Q1")
        assert decision.decision is Decision.WITHDRAWN
        assert decision.basis_tx == withdraw.tx_id

    def test_never_asked_has_no_basis(self):
        engine, _history = make_engine(make_template(3))
        decision = engine.check_purpose(WALLET, CID, "Q2")
        assert decision.decision is Decision.NEVER_ASKED
        assert decision.basis_tx is None

    def test_unknown_question(self):
        engine, _history = make_engine(make_template(3))
        with pytest.raises(UnknownQuestion):
            engine.check_purpose(WALLET, CID, "Q9")


def random_history(rng: random.Random, n_questions: int, length: int):
    """Valid history: starts with GRANT, then any mix of the three actions."""
    qids = [f"Q{i}" for i in range(1, n_questions + 1)]
    txs = []
    for i in range(length):
        if i == 0 or rng.random() < 0.3:
            answers = tuple((q, rng.choice(["YES", "NO"])) for q in qids)
            txs.append(tx(Action.GRANT, answers, timestamp=i))
        elif rng.random() < 0.5:
            subset = rng.sample(qids, rng.randrange(1, n_questions + 1))
            answers = tuple((q, rng.choice(["YES", "NO"])) for q in subset)
            txs.append(tx(Action.EXTEND, answers, timestamp=i))
        else:
            txs.append(tx(Action.WITHDRAW, timestamp=i))
    return txs


class TestPrefixConsistency:
    def test_incremental_equals_scratch_at_every_height(self):
        rng = random.Random(99)
        for _ in range(60):
            n_questions = rng.randrange(1, 9)
            template = make_template(n_questions)
            engine, history = make_engine(template)
            for t in random_history(rng, n_questions, rng.randrange(1, 21)):
                history.append(t)
                state = engine.current_state(WALLET, CID)
                expected, expected_basis = brute_force_fold(
                    template.question_ids(), history.entries(WALLET, CID))
                assert {q: d.value for q, d in state.per_question.items()} == expected
                assert state.basis == expected_basis

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_basis_is_latest_touching_transaction(self, data):
        n_questions = data.draw(st.integers(1, 8))
        length = data.draw(st.integers(1, 12))
        seed = data.draw(st.integers(0, 2 ** 32))
        template = make_template(n_questions)
        rng = random.Random(seed)
        entries = [(t, h + 1) for h, t in
                   enumerate(random_history(rng, n_questions, length))]
        state = fold(template, WALLET, CID, entries, len(entries))
        _expected, expected_basis = brute_force_fold(
            template.question_ids(), entries)
        for qid, decision in state.per_question.items():
            if decision is Decision.NEVER_ASKED:
                assert qid not in state.basis
            else:
                assert state.basis[qid] == expected_basis[qid]
