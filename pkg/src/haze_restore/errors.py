"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A config value or a config/tensor mismatch that the caller must fix."""


class InputError(ValueError):
    """An input tensor, file, or directory violates a precondition."""


class CheckpointError(RuntimeError):
    """A checkpoint file is unreadable or incompatible with the requested config."""
