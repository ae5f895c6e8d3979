"""Error taxonomy shared across the package."""


class ConfigError(ValueError):
    """Malformed or out-of-domain run configuration."""


class NumericFailure(RuntimeError):
    """A computation produced non-finite values or violated a hard invariant."""


class ConvergenceFailure(NumericFailure):
    """An adaptive procedure exhausted its budget without stabilizing."""
