"""Package exceptions, mapped to CLI exit codes by rbfilter.cli."""


class RbFilterError(Exception):
    """Base class for package errors."""


class ConfigError(RbFilterError, ValueError):
    """Invalid configuration. Carries the full list of violations, not just the first.

    CLI exit code 2.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DataError(RbFilterError, ValueError):
    """Malformed or inconsistent input data (grids, spectra, count streams).

    CLI exit code 3.
    """


class NumericalError(RbFilterError, RuntimeError):
    """A numerical routine failed to converge or produced non-finite output.

    CLI exit code 4.
    """
