"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ValidationError(ValueError):
    """A model object or configuration violates one of its invariants."""


class DegenerateRegimeError(DomainError):
    """A validity-region construction needs a coefficient that vanishes."""


class NoRealSolutionError(DomainError):
    """The scattering-length inversion has no real solution."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (instability, non-finite values)."""


class ContractError(DomainError):
    """A field handed to an operator does not satisfy its preconditions."""
