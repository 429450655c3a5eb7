"""Learning-rate scheduling laboratory.

Trains small dense networks on two workloads — a 1-D acoustic
boundary-value problem and IDX-format digit classification — under
pluggable per-epoch learning-rate schedules, and records everything
needed to reproduce a run byte for byte.
"""

from .errors import ConfigError, OutputExistsError, TrainingDivergedError
from .scheduler import (
    AdacompSchedule,
    ConstantSchedule,
    DlrsConfig,
    DlrsSchedule,
    EpochLossSummary,
    ExponentialDecaySchedule,
    dlrs_update,
    make_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "AdacompSchedule",
    "ConfigError",
    "ConstantSchedule",
    "DlrsConfig",
    "DlrsSchedule",
    "EpochLossSummary",
    "ExponentialDecaySchedule",
    "OutputExistsError",
    "TrainingDivergedError",
    "dlrs_update",
    "make_schedule",
    "__version__",
]
