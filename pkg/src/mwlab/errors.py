"""Exception types shared across the package."""


class InputError(ValueError):
    """A caller handed an operation arguments outside its contract."""


class FixtureError(ValueError):
    """A fixture file made a claim that exact recomputation refuted."""


class ResourceLimitError(RuntimeError):
    """A configured cap was exceeded.

    Raised instead of silently truncating; the message names the cap so
    the caller can raise it deliberately.
    """


class CertificateError(RuntimeError):
    """A certificate failed re-validation of one of its invariants."""
