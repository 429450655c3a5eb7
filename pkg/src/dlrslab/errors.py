"""Exceptions shared across workloads and the harness."""


class ConfigError(ValueError):
    """Invalid or unknown configuration; maps to exit code 2."""


class TrainingDivergedError(RuntimeError):
    """A run produced a non-finite loss; maps to exit code 3.

    Carries the records collected so far so the harness can persist a
    partial records.csv and the last valid checkpoint.
    """

    def __init__(self, message, records=None):
        super().__init__(message)
        self.records = records or []


class OutputExistsError(OSError):
    """Refusing to overwrite an existing run directory; maps to exit code 4."""
