"""Exception hierarchy.

The CLI maps each family to its own exit status, so new errors should
subclass the family they belong to rather than ``QLBridgeError`` directly.
"""


class QLBridgeError(Exception):
    """Base class for every error raised by the package."""


class InputError(QLBridgeError):
    """Malformed input: bad syntax, unknown identifiers, invalid documents."""


class WffSyntaxError(InputError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class UnknownIdentifierError(InputError):
    def __init__(self, name, kind="identifier"):
        self.name = name
        super().__init__(f"unknown {kind} {name!r}")


class FragmentError(InputError):
    """A construct not available in the active alphabet."""


class PreconditionError(QLBridgeError):
    """An operation was called outside its domain."""


class InvariantError(PreconditionError):
    """A numerical object (projection, state) fails its defining invariants."""


class ZeroMeasureError(PreconditionError):
    """Conditioning on a formula whose extension has measure zero."""


class NotTestableError(PreconditionError):
    pass


class StructureError(PreconditionError):
    """An order structure lacks a required property (closure, bounds, ...)."""


class TPrimeViolation(QLBridgeError):
    """The mean conditional probability depends on the chosen procedure."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class BudgetExhausted(QLBridgeError):
    """A search or enumeration ran past its configured budget."""
