"""Exception hierarchy; each class maps onto a CLI exit code."""


class BipartitionError(Exception):
    exit_code = 1


class ConfigError(BipartitionError):
    """Malformed or inconsistent configuration document."""

    exit_code = 2

    def __init__(self, errors, path=None):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        self.path = path
        head = f"{path}: " if path else ""
        super().__init__(head + "; ".join(self.errors))


class PhysicsError(BipartitionError, ValueError):
    """Input violates a physical validity condition (canonicity, positivity, purity)."""

    exit_code = 3


class NumericalFailure(BipartitionError, RuntimeError):
    exit_code = 4
