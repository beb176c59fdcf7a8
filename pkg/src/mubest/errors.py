"""Shared exception types."""


class ContractViolationError(ValueError):
    """An input failed a mathematical precondition (non-Hermitian, non-unitary, ...)."""


class DimensionMismatchError(ValueError):
    """Operand dimensions are incompatible."""


class GroupSizeError(RuntimeError):
    """Group closure exceeded the requested size bound."""


class DesignFormatError(ValueError):
    """A design file is malformed or fails validation."""


class InfeasibleDesignError(ValueError):
    """Requested design parameters cannot saturate the frame-potential bound."""
