"""Access roles shared by the vault and the HTTP gateway."""

SUBJECT = "SUBJECT"
CONTROLLER = "CONTROLLER"
AUDITOR = "AUDITOR"

ALL_ROLES = (SUBJECT, CONTROLLER, AUDITOR)
