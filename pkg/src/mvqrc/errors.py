"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes do not match the operation's contract."""


class DomainError(ValueError):
    """A scalar parameter lies outside its admissible range."""


class StabilityError(ArithmeticError):
    """A drift matrix is not Hurwitz; no stable steady state exists."""


class ConditioningError(ArithmeticError):
    """A linear system is too ill-conditioned to solve reliably."""


class SymmetryError(ValueError):
    """A matrix violates a required (Hermitian/symmetric) structure."""


class CapacityError(ValueError):
    """An encoding cannot accommodate the requested input dimension."""


class IntegrationError(ArithmeticError):
    """State evolution left the physical manifold (trace/positivity)."""


class RankDeficiencyError(ArithmeticError):
    """Feature rows are linearly dependent beyond repair by jitter."""


class UnphysicalStateError(ValueError):
    """A state object violates its physicality constraints."""
