"""Exception taxonomy with stable machine-readable codes.

Every error raised by the library carries a ``code`` attribute that the CLI
serializes into its error JSON, so downstream tooling can dispatch on it
without parsing messages.
"""


class RandpressError(Exception):
    """Base class for all library errors."""

    code = "error"

    def to_json(self):
        return {"error": self.code, "message": str(self)}


class ConfigError(RandpressError):
    """Invalid configuration (unknown keys, out-of-range knobs, bad specs)."""

    code = "config"


class DomainError(RandpressError):
    """A fiber point lies outside the admissible target set."""

    code = "domain"


class OutsideRepellerError(RandpressError):
    """Forward map queried in a gap between branch domains."""

    code = "outside-repeller"


class SingularityError(RandpressError):
    """Degenerate inverse branch (d-th root at the critical value)."""

    code = "branch-singularity"


class NotUniformlyExpandingError(RandpressError):
    """Operation requires all expansion floors > 1; caller must induce first."""

    code = "not-uniformly-expanding"


class NotMeanExpandingError(RandpressError):
    """The mean expansion integral is not estimated positive."""

    code = "not-mean-expanding"


class DepthInsufficientError(RandpressError):
    """Window depth too small to resolve a non-trivial expanding set."""

    code = "depth-insufficient"


class ResourceLimitError(RandpressError):
    """A tree/cylinder enumeration would exceed the configured cap."""

    code = "resource-limit"


class ConvergenceError(RandpressError):
    """An iterative estimate failed to stabilize within its depth cap."""

    code = "non-convergence"


class NumericError(RandpressError):
    """Non-finite value encountered; carries the offending index if known."""

    code = "numeric"

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BracketError(RandpressError):
    """Root bracket failed to sign-separate after expansion."""

    code = "no-zero"


class RepresentationError(RandpressError):
    """Operation received an unsupported function representation."""

    code = "unsupported-representation"
