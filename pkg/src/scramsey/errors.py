"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for errors raised by this package."""


class InvalidStateError(SimulationError, ValueError):
    """A Bloch vector is outside the domain an operation accepts."""


class InvalidTimelineError(SimulationError, ValueError):
    """A timeline event is malformed (negative wait, bad frame, ...)."""


class InfeasibleTimingError(SimulationError, ValueError):
    """No non-negative delay satisfies the requested phase condition."""


class ProtocolMisconfigurationError(SimulationError, ValueError):
    """Protocol timings or areas violate the secure-choice conditions."""


class IndeterminateReadoutError(SimulationError, ValueError):
    """A readout probability sits exactly on the decision threshold."""


class ScenarioError(SimulationError, ValueError):
    """A scenario file failed validation.

    Carries the offending location and the violated constraint so callers
    can report machine-readable diagnostics.
    """

    def __init__(self, field: str, constraint: str):
        self.field = field
        self.constraint = constraint
        super().__init__(f"{field}: {constraint}")
