"""HTTP gateway exposing the consent lifecycle under ``/v1``.

Handlers are stateless: every response is computed from the node's modules,
so the externally observable consent state is always the fold of the sealed
chain. Subjects sign transactions client-side; this service never holds a
subject's private key and treats itself as untrusted for authenticity.

Request bodies and logs never carry subject attributes outside the vault.
"""

from __future__ import annotations

from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Request, Response
from pydantic import BaseModel, Field

from . import roles
from .errors import (
    AicError,
    BadSignature,
    InvalidTemplate,
    MalformedAnswers,
    NotFound,
    Unauthorized,
    UnknownQuestion,
    UnknownSubject,
    UnknownTemplate,
    WalletAlreadyLinked,
)
from .ledger import Action, TxDraft
from .node import ConsentRejected, Node, Session
from .templates import parse_template, validate_template

# Allowed roles per route; the authz test sweeps every (role, route) pair
# against this table.
ROUTE_ROLES: dict[tuple[str, str], frozenset[str]] = {
    ("POST", "/v1/templates"): frozenset({roles.CONTROLLER}),
    ("GET", "/v1/templates/{cid}"): frozenset(roles.ALL_ROLES),
    ("POST", "/v1/consents"): frozenset({roles.SUBJECT}),
    ("GET", "/v1/consents/{wallet}"): frozenset(roles.ALL_ROLES),
    ("GET", "/v1/purposes/{wallet}/{cid}/{qid}"): frozenset({roles.CONTROLLER}),
    ("POST", "/v1/subjects"): frozenset({roles.CONTROLLER}),
    ("GET", "/v1/subjects/by-wallet/{wallet}"): frozenset({roles.CONTROLLER, roles.AUDITOR}),
    ("POST", "/v1/subjects/{subject_id}/erase"): frozenset({roles.CONTROLLER}),
    ("GET", "/v1/audit"): frozenset({roles.CONTROLLER, roles.AUDITOR}),
    ("GET", "/v1/chain/validate"): frozenset(roles.ALL_ROLES),
}


class LoginBody(BaseModel):
    role: str
    wallet: str | None = None


class ConsentBody(BaseModel):
    action: str
    template_cid: str
    wallet: str
    public_key: str
    answers: list[tuple[str, str]] = Field(default_factory=list)
    signature: str


class EnrollBody(BaseModel):
    display_name: str
    attrs: dict[str, str] = Field(default_factory=dict)
    wallet_public_key: str
    subject_id: str | None = None


def _tx_row(tx, height: int, timestamp: int) -> dict[str, Any]:
    return {"tx": tx.to_record(), "tx_id": tx.tx_id,
            "height": height, "timestamp": timestamp}


def create_app(node: Node) -> FastAPI:
    app = FastAPI(title="aic gateway", version="1")

    def current_session(authorization: str | None = Header(default=None)) -> Session:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(401, "missing bearer token")
        session = node.sessions.get(authorization.removeprefix("Bearer "))
        if session is None:
            raise HTTPException(401, "invalid or expired token")
        return session

    def require(session: Session, method: str, route: str) -> None:
        if session.role not in ROUTE_ROLES[(method, route)]:
            raise HTTPException(403, f"role {session.role} may not access this route")

    @app.exception_handler(AicError)
    async def _domain_error(_request: Request, exc: AicError):
        from fastapi.responses import JSONResponse
        status = {
            UnknownTemplate: 404,
            NotFound: 404,
            UnknownSubject: 404,
            UnknownQuestion: 404,
            InvalidTemplate: 400,
            BadSignature: 422,
            MalformedAnswers: 422,
            ConsentRejected: 422,
            WalletAlreadyLinked: 409,
            Unauthorized: 403,
        }.get(type(exc), 500)
        body: dict[str, Any] = {"error": exc.code, "message": exc.message}
        if isinstance(exc, InvalidTemplate):
            body["violations"] = exc.violations
        if isinstance(exc, ConsentRejected):
            body["rejections"] = [
                {"element": r.element, "question_id": r.question_id,
                 "message": r.message}
                for r in exc.rejections
            ]
        if isinstance(exc, MalformedAnswers):
            body["question_id"] = exc.question_id
        return JSONResponse(status_code=status, content=body)

    @app.post("/v1/auth/login")
    def login(body: LoginBody):
        session = node.sessions.issue(body.role, body.wallet)
        return {"token": session.token, "role": session.role,
                "wallet": session.wallet, "expires_at": session.expires_at}

    @app.post("/v1/templates", status_code=201)
    def publish(document: dict, session: Session = Depends(current_session)):
        require(session, "POST", "/v1/templates")
        try:
            template = parse_template(document)
        except ValueError as exc:
            raise InvalidTemplate([str(exc)])
        cid = node.publish_template(template)
        return {"cid": cid.text}

    @app.get("/v1/templates/{cid}")
    def fetch_template(cid: str, session: Session = Depends(current_session)):
        require(session, "GET", "/v1/templates/{cid}")
        raw = node.template_bytes(cid)
        # Body is the canonical document itself so it re-hashes to the cid.
        return Response(content=raw, media_type="application/json",
                        headers={"ETag": cid})

    @app.post("/v1/consents", status_code=202)
    def submit_consent(body: ConsentBody, session: Session = Depends(current_session)):
        require(session, "POST", "/v1/consents")
        if session.wallet != body.wallet:
            raise HTTPException(403, "subjects may only act on their own wallet")
        try:
            draft = TxDraft(
                wallet=body.wallet,
                public_key=body.public_key,
                action=Action(body.action),
                template_cid=body.template_cid,
                answers=tuple((q, c) for q, c in body.answers),
                signature=body.signature,
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        try:
            tx_id = node.submit_consent(draft)
        except UnknownTemplate as exc:
            raise HTTPException(422, f"unknown template: {exc.message}")
        return {"tx_id": tx_id, "status": "pending"}

    @app.get("/v1/consents/{wallet}")
    def consent_status(wallet: str, template: str,
                       session: Session = Depends(current_session)):
        require(session, "GET", "/v1/consents/{wallet}")
        if session.role == roles.SUBJECT and session.wallet != wallet:
            raise HTTPException(403, "subjects may only query their own wallet")
        state, rows = node.consent_status(wallet, template)
        return {
            "wallet": wallet,
            "template_cid": template,
            "as_of": state.as_of,
            "per_question": {qid: d.value for qid, d in state.per_question.items()},
            "history": [_tx_row(tx, h, ts) for tx, h, ts in rows],
        }

    @app.get("/v1/purposes/{wallet}/{cid}/{qid}")
    def purpose(wallet: str, cid: str, qid: str,
                session: Session = Depends(current_session)):
        require(session, "GET", "/v1/purposes/{wallet}/{cid}/{qid}")
        decision = node.check_purpose(wallet, cid, qid)
        return {
            "wallet": wallet,
            "template_cid": cid,
            "question_id": qid,
            "decision": decision.decision.value,
            "basis_tx": decision.basis_tx,
            "basis_height": decision.basis_height,
        }

    @app.post("/v1/subjects", status_code=201)
    def enroll(body: EnrollBody, session: Session = Depends(current_session)):
        require(session, "POST", "/v1/subjects")
        try:
            public_key = bytes.fromhex(body.wallet_public_key)
        except ValueError:
            raise HTTPException(422, "wallet_public_key must be hex")
        if len(public_key) != 32:
            raise HTTPException(422, "wallet_public_key must be 32 bytes")
        subject_id, wallet = node.enroll(
            body.display_name, body.attrs, public_key,
            actor=session.role, subject_id=body.subject_id)
        return {"subject_id": subject_id, "wallet": wallet}

    @app.get("/v1/subjects/by-wallet/{wallet}")
    def resolve(wallet: str, session: Session = Depends(current_session)):
        require(session, "GET", "/v1/subjects/by-wallet/{wallet}")
        link = node.resolve(wallet, actor=session.role)
        return link.to_dict()

    @app.post("/v1/subjects/{subject_id}/erase")
    def erase(subject_id: str, session: Session = Depends(current_session)):
        require(session, "POST", "/v1/subjects/{subject_id}/erase")
        count = node.erase_subject(subject_id, actor=session.role)
        return {"unlinked": count}

    @app.get("/v1/audit")
    def audit(session: Session = Depends(current_session)):
        require(session, "GET", "/v1/audit")
        return {"entries": [e.to_record() for e in node.audit.entries()]}

    @app.get("/v1/chain/validate")
    def chain_validate(session: Session = Depends(current_session)):
        require(session, "GET", "/v1/chain/validate")
        report = node.ledger.validate_chain()
        out: dict[str, Any] = {"ok": report.ok}
        if not report.ok:
            out["height"] = report.height
            out["reason"] = report.reason
        return out

    return app
