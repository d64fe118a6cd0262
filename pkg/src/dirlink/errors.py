"""Exception types shared across the package."""


class InputError(ValueError):
    """A caller handed in data that violates a precondition."""


class ConfigError(ValueError):
    """A configuration value is out of range or internally inconsistent."""


class ParseError(ValueError):
    """A file could not be parsed; message carries path and line number."""


class ContractViolation(RuntimeError):
    """An internal invariant failed; indicates a bug, not bad input."""


class TrainingDiverged(RuntimeError):
    """A loss or gradient became non-finite during optimization."""
