"""Exception hierarchy shared across the pipeline."""


class WasmDiffError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WasmDiffError):
    """A project configuration file could not be turned into a valid spec."""


class MissingFieldError(ConfigError):
    """A required configuration key is absent."""


class BadPathError(ConfigError):
    """A configured path does not exist or violates a path invariant."""


class SchemaViolationError(ConfigError):
    """A configuration value has the wrong shape or type."""


class EmptyTreeError(WasmDiffError):
    """A source scan matched zero files."""


class WrongTargetError(WasmDiffError):
    """An operation was invoked for a build target it does not apply to."""


class ToolchainMissingError(WasmDiffError):
    """A required external tool could not be resolved or probed."""


class WorkdirUnwritableError(WasmDiffError):
    """A build directory could not be created or written."""


class RuntimeMissingError(WasmDiffError):
    """The host runtime needed to execute an artifact is unavailable."""


class SpawnFailureError(WasmDiffError):
    """The OS refused to spawn a test process."""


class SerializationFailureError(WasmDiffError):
    """A report could not be serialized or parsed back."""
