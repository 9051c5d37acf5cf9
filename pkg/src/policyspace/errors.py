"""Error taxonomy shared across the package.

Exit-code mapping used by the command line: ConfigError -> 2,
NumericError -> 3, IntegrityError -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad dimensions, unknown names, missing fields."""


class NumericError(ArithmeticError):
    """Non-finite value produced where the math requires finite numbers."""


class IntegrityError(RuntimeError):
    """Corrupt or tampered artifact (checkpoint checksum, replay log)."""
