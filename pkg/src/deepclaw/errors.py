"""Exception types shared across the package."""


class DeepClawError(Exception):
    """Base class for all errors raised by deepclaw."""


class InvalidDepthError(DeepClawError, ValueError):
    pass


class BehindCameraError(DeepClawError, ValueError):
    pass


class DegenerateInputError(DeepClawError, ValueError):
    pass


class NoObservationsError(DeepClawError, RuntimeError):
    pass


class InvalidPathError(DeepClawError, ValueError):
    pass


class OutOfWorkspaceError(DeepClawError, ValueError):
    pass


class SceneGenerationError(DeepClawError, RuntimeError):
    pass


class NoGraspError(DeepClawError, RuntimeError):
    pass


class NoMoveError(DeepClawError, ValueError):
    pass


class ConsistencyError(DeepClawError, RuntimeError):
    """Perceived world state disagrees with the task's internal state."""


class ConfigError(DeepClawError, ValueError):
    """A cell or task configuration violates its schema or invariants.

    ``violations`` holds one human-readable message per offending field.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UndefinedScoreError(DeepClawError, ValueError):
    pass
