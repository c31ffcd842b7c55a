"""Consent questionnaire templates and their canonical document form.

A template is the unfilled consent form: labeled YES/NO questions, the
purpose behind each question, the controller's identity, and the six
mandatory notice items (a)-(f):

  a. controller identity
  b. purpose of each processing operation
  c. what data will be collected and used
  d. the right to withdraw consent
  e. automated decision-making, where relevant
  f. risks of transfers absent adequacy/safeguards

The canonical byte form (sorted-key compact JSON, UTF-8) is what gets
content-addressed, so publishing the same template twice yields the same
Cid. Questions carry no default answer field at all: an unanswered
question is structurally unrepresentable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .canonical import canonical_json
from .cas import CasStore, Cid
from .errors import InvalidTemplate, NotFound, UnknownTemplate

QUESTION_ID_RE = re.compile(r"^Q[1-9][0-9]*$")
NOTICE_KEYS = ("a", "b", "c", "d", "e", "f")
OPTIONS = ("YES", "NO")


@dataclass(frozen=True)
class Question:
    question_id: str
    prompt: str


@dataclass(frozen=True)
class Purpose:
    question_id: str
    purpose_text: str


@dataclass(frozen=True)
class ConsentTemplate:
    title: str
    controller_identity: str
    questions: tuple[Question, ...]
    purposes: tuple[Purpose, ...]
    notices: dict[str, str]
    jurisdiction_tags: tuple[str, ...] = field(default_factory=tuple)

    def question_ids(self) -> list[str]:
        return [q.question_id for q in self.questions]

    def to_dict(self) -> dict:
        return {
            "controller_identity": self.controller_identity,
            "jurisdiction_tags": list(self.jurisdiction_tags),
            "notices": dict(self.notices),
            "purposes": [
                {"purpose_text": p.purpose_text, "question_id": p.question_id}
                for p in self.purposes
            ],
            "questions": [
                {"options": list(OPTIONS), "prompt": q.prompt,
                 "question_id": q.question_id}
                for q in self.questions
            ],
            "title": self.title,
        }


def validate_template(template: ConsentTemplate) -> list[str]:
    """All violated invariants, empty when the template is publishable."""
    violations = []
    if not template.title.strip():
        violations.append("title must be non-empty")
    if not template.controller_identity.strip():
        violations.append("controller_identity must be non-empty (informed: item a)")
    if not template.questions:
        violations.append("template needs at least one question")
    seen: set[str] = set()
    for q in template.questions:
        if not QUESTION_ID_RE.match(q.question_id):
            violations.append(
                f"question id {q.question_id!r} must be Q followed by a positive integer")
        if q.question_id in seen:
            violations.append(f"duplicate question id {q.question_id}")
        seen.add(q.question_id)
        if not q.prompt.strip():
            violations.append(f"question {q.question_id} has an empty prompt")
    purpose_seen: set[str] = set()
    for p in template.purposes:
        if p.question_id not in seen:
            violations.append(
                f"purpose references unknown question {p.question_id}")
        if p.question_id in purpose_seen:
            violations.append(f"duplicate purpose for question {p.question_id}")
        purpose_seen.add(p.question_id)
        if not p.purpose_text.strip():
            violations.append(f"purpose for {p.question_id} is empty (specific)")
    for key in NOTICE_KEYS:
        text = template.notices.get(key, "")
        if not isinstance(text, str) or not text.strip():
            violations.append(f"notice item ({key}) must be a non-empty string")
    for key in template.notices:
        if key not in NOTICE_KEYS:
            violations.append(f"unexpected notice item ({key})")
    return violations


def serialize_template(template: ConsentTemplate) -> bytes:
    return canonical_json(template.to_dict())


def parse_template(raw: bytes | str | dict) -> ConsentTemplate:
    """Strict parse of the document form; raises ValueError on any shape
    mismatch so corrupted documents never round-trip silently."""
    if isinstance(raw, (bytes, str)):
        obj = json.loads(raw)
    else:
        obj = raw
    if not isinstance(obj, dict):
        raise ValueError("template document must be an object")
    expected = {"controller_identity", "jurisdiction_tags", "notices",
                "purposes", "questions", "title"}
    if set(obj) != expected:
        raise ValueError(f"template keys must be exactly {sorted(expected)}")
    if not isinstance(obj["title"], str) or not isinstance(obj["controller_identity"], str):
        raise ValueError("title and controller_identity must be strings")
    notices = obj["notices"]
    if not isinstance(notices, dict) or not all(isinstance(v, str) for v in notices.values()):
        raise ValueError("notices must map item letters to strings")
    tags = obj["jurisdiction_tags"]
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ValueError("jurisdiction_tags must be a list of strings")
    questions = []
    for q in obj["questions"]:
        if set(q) != {"options", "prompt", "question_id"}:
            raise ValueError("question keys must be options/prompt/question_id")
        if tuple(q["options"]) != OPTIONS:
            raise ValueError("question options must be exactly YES, NO")
        if not isinstance(q["prompt"], str) or not isinstance(q["question_id"], str):
            raise ValueError("question fields must be strings")
        questions.append(Question(q["question_id"], q["prompt"]))
    purposes = []
    for p in obj["purposes"]:
        if set(p) != {"purpose_text", "question_id"}:
            raise ValueError("purpose keys must be purpose_text/question_id")
        purposes.append(Purpose(p["question_id"], p["purpose_text"]))
    return ConsentTemplate(
        title=obj["title"],
        controller_identity=obj["controller_identity"],
        questions=tuple(questions),
        purposes=tuple(purposes),
        notices=dict(notices),
        jurisdiction_tags=tuple(tags),
    )


def publish_template(store: CasStore, template: ConsentTemplate) -> Cid:
    """Validate, canonicalize, and store; the returned Cid is the template's
    permanent identifier cited by every transaction."""
    violations = validate_template(template)
    if violations:
        raise InvalidTemplate(violations)
    return store.put(serialize_template(template))


def load_template(store: CasStore, cid: Cid | str) -> ConsentTemplate:
    try:
        raw = store.get(cid)
    except NotFound as exc:
        raise UnknownTemplate(str(cid)) from exc
    except ValueError as exc:
        raise UnknownTemplate(f"malformed cid: {cid}") from exc
    try:
        return parse_template(raw)
    except (ValueError, json.JSONDecodeError) as exc:
        raise UnknownTemplate(f"{cid} is not a consent template") from exc
