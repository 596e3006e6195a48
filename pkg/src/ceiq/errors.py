"""Exception hierarchy shared by the library, the service and the CLI.

Every error carries a ``category`` used by the HTTP layer and the CLI to
pick status codes / exit codes: "io", "parse" or "numeric".
"""


class CeiqError(Exception):
    """Base class for all errors raised by this package."""

    category = "numeric"


class InvalidArgumentError(CeiqError, ValueError):
    """An argument violates a documented precondition."""

    category = "numeric"


class ImageError(CeiqError, IOError):
    """An image file is missing, unreadable or has an unsupported format."""

    category = "io"


class ManifestError(CeiqError):
    """A dataset manifest cannot be read or parsed."""

    category = "parse"


class ModelParseError(CeiqError):
    """A model file is malformed; message includes the offending line."""

    category = "parse"


class ConvergenceError(CeiqError):
    """The regression solver hit its iteration cap before converging.

    Carries the best primal objective reached so callers can inspect it.
    """

    category = "numeric"

    def __init__(self, message: str, achieved_objective: float):
        super().__init__(message)
        self.achieved_objective = achieved_objective


class DegenerateResultError(CeiqError):
    """A statistic is undefined for the given input (e.g. constant vector)."""

    category = "numeric"


class DegenerateImageError(CeiqError):
    """The image carries no usable contrast signal (e.g. constant image)."""

    category = "numeric"
