"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input failed its structural contract (shape, sign, ordering)."""


class SingularMatrixError(ValidationError):
    """A solve required an invertible second-moment matrix but got a singular one."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class ConsistencyError(RuntimeError):
    """Two formulas that must agree produced different values; indicates a bug."""


class ConfigError(ValueError):
    """An experiment config file is malformed or internally inconsistent."""
