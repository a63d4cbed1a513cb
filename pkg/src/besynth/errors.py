"""Exception types shared across the package."""


class BesynthError(Exception):
    """Base class for all errors raised by besynth."""


class ParseError(BesynthError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UndeclaredAtomError(ParseError):
    def __init__(self, token: str, position: int):
        super().__init__(f"undeclared atom {token!r}", position)
        self.token = token


class DomainSchemaError(BesynthError, ValueError):
    """A domain file does not match the expected schema."""


class ValidationFailed(BesynthError):
    """A domain violates one of the well-formedness rules."""

    def __init__(self, report):
        super().__init__("domain validation failed:\n" + report.describe())
        self.report = report


class StateBudgetExceeded(BesynthError):
    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded the state budget of {cap} states "
                         f"(raise it with BESYNTH_STATE_CAP)")
        self.cap = cap


class DfaError(BesynthError):
    """A DFA violates totality or determinism."""


class HistoryError(BesynthError, ValueError):
    """A history cannot be replayed through the strategy's arena."""


class ScriptError(BesynthError, ValueError):
    """A scripted environment ran out of reactions or emitted an illegal one."""
