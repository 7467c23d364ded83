"""Exception types shared across the package.

The CLI maps :class:`DomainError` to exit code 1 and :class:`GuardError`
to exit code 2.
"""


class DomainError(ValueError):
    """An input lies outside the domain where the quantity is defined."""


class GuardError(RuntimeError):
    """A numerical guard tripped (truncation, leakage, boundary, fit residual)."""


class VerificationError(GuardError):
    """An identity or oracle comparison exceeded its tolerance."""
