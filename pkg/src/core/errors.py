"""Exceptions shared by the model, the bound evaluators and the CLI."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class HypothesisError(DomainError):
    """A theorem's printed hypothesis does not hold for the given parameters."""

    def __init__(self, theorem: str, inequality: str):
        self.theorem = theorem
        self.inequality = inequality
        super().__init__(f"{theorem} requires {inequality}")
