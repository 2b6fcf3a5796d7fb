"""Exception types shared across the package."""


class MeanineqError(Exception):
    """Base class for all library errors."""


class ConstructionError(MeanineqError, ValueError):
    """A spec or parameter object violates its invariants at build time."""


class DomainError(MeanineqError, ValueError):
    """An evaluation point lies outside the admissible open domain."""


class ShapeError(MeanineqError, ValueError):
    """Array arguments have inconsistent lengths or are not of the expected rank."""


class CapabilityError(MeanineqError, TypeError):
    """The operation needs derivative or inverse data the spec does not carry."""


class NumericError(MeanineqError, ArithmeticError):
    """Evaluation produced a non-finite value or an inverse map failed."""


class ContractError(MeanineqError, ValueError):
    """A caller-supplied object does not satisfy the operation's precondition."""


class ConfigError(MeanineqError, ValueError):
    """A problem configuration fails to parse or contains unknown fields."""
