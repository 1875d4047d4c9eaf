"""Exception hierarchy shared across the package.

Every error carries a machine-readable ``category`` used by the CLI to pick
its exit code and by the HTTP layer to pick a status code.
"""


class RepmatchError(Exception):
    category = "error"


class InvalidInput(RepmatchError):
    category = "usage"


class NotFound(RepmatchError):
    category = "usage"


class ParseError(RepmatchError):
    category = "parse"

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class SchemaError(RepmatchError):
    category = "parse"


class ShapeError(RepmatchError):
    category = "numeric"


class NumericalError(RepmatchError):
    category = "numeric"


class DegenerateClassError(RepmatchError):
    category = "numeric"


class StorageError(RepmatchError):
    category = "io"


class EmptyEvaluationError(RepmatchError):
    category = "usage"


class SkipSignal(RepmatchError):
    """Raised by metric functions when a (document, requirement) pair has no
    relevant annotations and must be excluded from averaging."""

    category = "usage"
