"""Exception hierarchy.

Validation problems derive from ``ValueError``; numeric breakdowns derive from
``NumericError`` so callers (and the CLI exit codes) can tell them apart.
"""


class BeatSyncError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BeatSyncError, ValueError):
    """Input violates a documented precondition."""


class ShapeMismatchError(ValidationError):
    pass


class SequenceTooShortError(ValidationError):
    pass


class NoBeatsError(ValidationError):
    pass


class BeatRangeError(ValidationError):
    pass


class NumericError(BeatSyncError, ArithmeticError):
    """A computation produced or met a numerically degenerate value."""


class DegenerateRotationError(NumericError):
    """6-DOF rotation input with a zero or parallel basis vector.

    ``frame`` and ``joint`` are set when the failure happened inside a
    motion sequence.
    """

    def __init__(self, message, frame=None, joint=None):
        if frame is not None or joint is not None:
            message = f"{message} (frame={frame}, joint={joint})"
        super().__init__(message)
        self.frame = frame
        self.joint = joint


class SamplingError(NumericError):
    """Denoiser failure during reverse diffusion; carries the step."""

    def __init__(self, message, step):
        super().__init__(f"step {step}: {message}")
        self.step = step
