"""Error types shared across the package."""


class SpecdenError(Exception):
    """Base class for all package errors."""


class ConfigError(SpecdenError):
    """Malformed or schema-invalid configuration input."""


class DegenerateMetricError(SpecdenError):
    """Metric not positive definite at the requested point."""


class NondegeneracyError(SpecdenError):
    """Magnetic 2-form degenerate at the requested point."""

    def __init__(self, msg, det=None):
        super().__init__(msg)
        self.det = det


class InconsistentJetError(SpecdenError):
    """A jet violates an identity it must satisfy (e.g. complex residue)."""


class NotApplicableError(SpecdenError):
    """Special-case formula applied outside its domain of validity."""


class TruncationError(SpecdenError):
    """Polynomial degree overflow in the model-space calculus."""


class KernelComponentError(SpecdenError):
    """Operator inversion requested for a function with a kernel component."""


class ConvergenceError(SpecdenError):
    """Iterative eigensolver failed to converge."""


class ResolutionError(SpecdenError):
    """Lattice too coarse for the requested tensor power."""

    def __init__(self, msg, required_n=None):
        super().__init__(msg)
        self.required_n = required_n


class FluxError(SpecdenError):
    """Magnetic flux fails the integrality requirement."""
