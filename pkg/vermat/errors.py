# vermat/errors.py
"""
Exception hierarchy shared by the library and the CLI.

Every error carries a human readable ``detail`` and the process exit code the
CLI uses when the error reaches it (0 accept / 1 reject / 2 malformed / 3 params).
"""
from typing import Optional


class VermatError(Exception):
    exit_code = 3

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ParameterError(VermatError):
    """Illegal parameters: bad modulus, bound violation, unknown protocol."""
    exit_code = 3


class DimensionError(ParameterError, ValueError):
    pass


class GroupMismatchError(ParameterError, TypeError):
    pass


class ChallengeBindingError(ParameterError):
    pass


class MalformedError(VermatError, ValueError):
    """Input that cannot be parsed: files, containers, encodings."""
    exit_code = 2


class IntegrityError(VermatError):
    """Container bytes do not match their digest; treated as a rejected proof."""
    exit_code = 1
