"""Exception types shared across the toolkit."""


class QuadbetweenError(Exception):
    """Base class for all toolkit errors."""


class ShapeMismatch(QuadbetweenError):
    """An array argument has the wrong shape."""


class InvariantViolation(QuadbetweenError):
    """A domain-type invariant does not hold."""


class CodecError(QuadbetweenError):
    """A clip file could not be decoded; message carries frame/field diagnostics."""


class LengthMismatch(QuadbetweenError):
    """Two sequences that must be equally long are not."""


class ClipTooShort(QuadbetweenError):
    """Clip has fewer frames than the analysis window."""


class EmptySplit(QuadbetweenError):
    """A dataset split ratio produced zero members."""


class MissingCheckpoint(QuadbetweenError):
    """A required upstream checkpoint does not exist."""


class MissingDependency(QuadbetweenError):
    """A pipeline stage was invoked before its prerequisite stage."""


class NonFiniteState(QuadbetweenError):
    """Autoregressive generation produced NaN/Inf; message carries step diagnostics."""


class InsufficientData(QuadbetweenError):
    """Not enough samples to train the requested component."""


class DivergedTraining(QuadbetweenError):
    """A training loop produced a non-finite loss."""


class RTooShort(QuadbetweenError):
    """Replicated start sequence shorter than the convolution support."""


class UnknownModelLink(QuadbetweenError):
    """A link name is not part of the kinematic model."""


class NonUnitQuaternion(QuadbetweenError):
    """Quaternion norm deviates from 1 beyond tolerance."""
