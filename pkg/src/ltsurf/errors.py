"""Exception types shared across the package."""


class LtsurfError(Exception):
    """Base class for all package errors."""


class ConfigError(LtsurfError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class IncompatibleScenarioError(LtsurfError):
    """Scenario and formula variant cannot be combined (CLI exit code 3)."""


class NumericalAbort(LtsurfError):
    """Non-finite values encountered during simulation (CLI exit code 4)."""
