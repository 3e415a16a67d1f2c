"""Exception types shared across the toolkit."""


class StentLabError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(StentLabError, ValueError):
    """Invalid design, material, profile or configuration input."""


class ComputationError(StentLabError, RuntimeError):
    """Numerical operation produced an unusable result."""


class SolverBlowupError(ComputationError):
    """Non-finite kinematics detected during explicit stepping."""

    def __init__(self, message, time=None, node=None):
        super().__init__(message)
        self.time = time
        self.node = node


class RelaxationTimeoutError(ComputationError):
    """Dynamic relaxation failed to reach the kinetic energy target.

    Carries the sampled energy trace so callers can diagnose whether the
    run was still converging or oscillating.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class InfeasibleCrimpError(ValidationError):
    """Requested crimp diameter below the kinematic packing limit."""


class DeploymentError(ComputationError):
    """Deployment finished without establishing lumen contact."""


class DriftError(ComputationError):
    """Rigid-body drift detected during cyclic loading."""
