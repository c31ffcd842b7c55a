"""Domain error hierarchy.

Every error carries a stable machine-readable ``code`` that the CLI prints
as ``ERR:<code>:<message>`` and the gateway maps to an HTTP status.
"""

from __future__ import annotations


class AicError(Exception):
    """Base class for all domain errors."""

    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


class NotFound(AicError):
    code = "NOT_FOUND"


class IntegrityViolation(AicError):
    """Stored content no longer re-hashes to its identifier."""

    code = "INTEGRITY"


class InvalidTemplate(AicError):
    """Template failed validation; ``violations`` lists every broken rule."""

    code = "INVALID_TEMPLATE"

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class BadSignature(AicError):
    code = "BAD_SIGNATURE"


class UnknownTemplate(AicError):
    code = "UNKNOWN_TEMPLATE"


class MalformedAnswers(AicError):
    """Answer list does not match the referenced template's questions."""

    code = "MALFORMED_ANSWERS"

    def __init__(self, message: str, question_id: str | None = None):
        super().__init__(message)
        self.question_id = question_id


class EmptyPool(AicError):
    code = "EMPTY_POOL"


class AuthorityKeyUnavailable(AicError):
    code = "NO_AUTHORITY_KEY"


class WalletAlreadyLinked(AicError):
    code = "WALLET_LINKED"


class UnknownSubject(AicError):
    code = "UNKNOWN_SUBJECT"


class UnknownQuestion(AicError):
    code = "UNKNOWN_QUESTION"


class Unauthorized(AicError):
    code = "UNAUTHORIZED"


class StoreError(AicError):
    code = "STORE"
