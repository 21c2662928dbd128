"""Exception types shared across the library.

Every failure mode that callers are expected to catch has its own class;
anything else surfaces as a plain ValueError from validation code.
"""

from __future__ import annotations


class IwafittError(Exception):
    """Base class for all library-specific errors."""


class InsufficientPrecision(IwafittError):
    """The requested result cannot be certified at the working precision."""


class RingMismatch(IwafittError):
    """Operands live over different coefficient rings, or an index is invalid."""


class NotTorsion(IwafittError):
    """A cokernel has (or may have, at this precision) a free summand."""


class NotASquare(IwafittError):
    """No pseudo-square root exists over the declared prime basis."""


class SupportCollision(IwafittError):
    """A specialization prime meets the support of the module being specialized."""


class ParityMismatch(IwafittError):
    """A stratum or Fitting index has the wrong parity for the requested formula."""


class EmptyStratum(IwafittError):
    """No index of the requested weight exists in the data."""


class PoolExhausted(IwafittError):
    """The admissible-prime pool is too small for the requested simulation."""


class NotMonotone(IwafittError):
    """Input sequence violates the required monotonicity."""


class NoStabilization(IwafittError):
    """A family did not stabilize within the supplied range."""


class InputError(IwafittError):
    """Malformed user input; carries a JSON-path pointer to the offending node."""

    def __init__(self, message: str, json_path: str = "$") -> None:
        super().__init__(f"{json_path}: {message}")
        self.message = message
        self.json_path = json_path
