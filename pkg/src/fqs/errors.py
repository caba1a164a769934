"""Error types shared across the package.

Every failure raised on purpose carries a short machine-readable ``code``
so callers (and the command line front end) can react without parsing
message text.  Two families exist:

* :class:`ValidationError` -- the caller handed us something that violates
  a documented precondition (bad weights, mismatched grids, empty input).
* :class:`MalformedInputError` -- bytes or files from outside the process
  could not be decoded (truncated wire messages, wrong magic, corrupt
  sketch payloads).

The command line maps the first family to exit code 2 and the second to
exit code 3; anything else is a plain crash.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_MALFORMED = 3


class AuditError(Exception):
    """Base class for deliberate failures; ``code`` is a stable slug."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class ValidationError(AuditError):
    """A documented precondition was violated by the caller."""


class MalformedInputError(AuditError):
    """External bytes/files could not be decoded safely."""


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, MalformedInputError):
        return EXIT_MALFORMED
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    return 1
