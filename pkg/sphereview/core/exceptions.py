# sphereview/core/exceptions.py
"""
Error hierarchy shared by the library and the CLI.

These deliberately do not derive from ValueError: pydantic wraps ValueError
raised inside validators into ValidationError, while any other exception
propagates unchanged, so a model validator raising DomainError surfaces as
DomainError to the caller.
"""


class SphereViewError(Exception):
    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigurationError(SphereViewError):
    """Invalid grid dimensions, settings, or configuration files."""

    exit_code = 3


class DomainError(SphereViewError):
    """A mathematical precondition does not hold (non-unit vector, rho <= 0, ...)."""

    exit_code = 4


class UsageError(SphereViewError):
    """Mismatched shapes or dims, empty parameter lists, bad flag combinations."""

    exit_code = 2


class InputFileError(SphereViewError):
    """An input file is missing, unreadable, or malformed."""

    exit_code = 5
