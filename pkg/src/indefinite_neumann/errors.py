"""Exception hierarchy."""


class NeumannError(Exception):
    """Base class for all package errors."""


class DomainError(NeumannError, ValueError):
    """An argument lies outside the domain of an operation."""


class ValidationError(NeumannError, ValueError):
    """Input data or parameters violate a stated precondition."""


class SignStructureError(ValidationError):
    """The weight does not have the positive/negative/positive hump pattern."""


class UnsupportedStructureError(SignStructureError):
    """The weight has more sign changes than the three-hump pattern allows."""


class InfeasibleError(NeumannError, ValueError):
    """A threshold formula has an empty parameter window or a zero denominator."""


class NumericalBlowUpError(NeumannError, ArithmeticError):
    """Integration produced a non-finite state or exhausted its step budget."""


class RefinementError(NeumannError):
    """An intersection seed could not be turned into a positive solution.

    ``kind`` is one of ``"bracket-lost"``, ``"trivial-zero"``, ``"trivial-one"``
    or ``"escaping"``.
    """

    def __init__(self, kind: str, message: str = ""):
        super().__init__(message or kind)
        self.kind = kind


class PreconditionError(ValidationError):
    """Parameters handed to a lemma check violate one of its hypotheses."""
