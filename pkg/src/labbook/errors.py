"""Exception types shared across the package.

Every error carries a stable short ``code`` so the CLI and the wire
protocol can map failures without string-matching messages.
"""


class LabbookError(Exception):
    code = "ERROR"


class NotFound(LabbookError):
    code = "NOT_FOUND"


class AlreadyExists(LabbookError):
    code = "ALREADY_EXISTS"


class InvalidName(LabbookError):
    code = "INVALID_NAME"


class InvalidInput(LabbookError):
    code = "INVALID_INPUT"


class IntegrityError(LabbookError):
    code = "INTEGRITY"


class CorruptBundle(LabbookError):
    code = "CORRUPT_BUNDLE"


class Unsupported(LabbookError):
    code = "UNSUPPORTED"


class RepoError(LabbookError):
    code = "REPO_ERROR"


class Inapplicable(LabbookError):
    code = "INAPPLICABLE"


class DegenerateGeometry(LabbookError):
    code = "DEGENERATE_GEOMETRY"


class InvalidSnapshot(InvalidInput):
    code = "INVALID_SNAPSHOT"


class ScriptError(LabbookError):
    code = "SCRIPT_ERROR"


class NoClient(LabbookError):
    code = "NO_CLIENT"


class ProtocolError(LabbookError):
    """Raised client-side when the peer answers with an error frame."""

    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code
