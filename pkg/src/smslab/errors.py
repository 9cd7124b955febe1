from __future__ import annotations


class SmsError(Exception):
    """Base class for every error raised by smslab."""


class ValidationError(SmsError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid spec")


class HorizonError(SmsError):
    def __init__(self, message, bracket=None):
        self.bracket = bracket
        super().__init__(message)


class UnsupportedModeError(SmsError):
    pass


class ConditioningError(SmsError):
    """Raised when asked to condition on an event of probability zero."""

    def __init__(self, message, **context):
        self.context = context
        super().__init__(message)


class RepetitionError(SmsError):
    """A response distribution fails to normalize because vectors repeat a question."""


class PreconditionError(SmsError):
    pass


class SupportError(SmsError):
    pass


class DomainError(SmsError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class StructuralError(SmsError):
    pass


class BudgetError(SmsError):
    pass


class ScenarioError(SmsError):
    """Parse or resolution failure; ``where`` locates the problem in the input."""

    def __init__(self, message, where=None):
        self.where = where
        text = f"{where}: {message}" if where else message
        super().__init__(text)
