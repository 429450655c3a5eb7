"""Learning-rate policies behind one per-epoch stepping contract.

The dynamic policy (DLRS) classifies each epoch's normalized loss slope
into divergent / flat / convergent regimes and nudges the rate by an
amount matched to its current order of magnitude. Baselines: a
reconstructed Adacomp, constant rate, and exponential decay.
"""

import math
import struct
from dataclasses import dataclass
from typing import Optional

# regime labels reported in lr-trace output
CASE_DIVERGENT = "divergent"
CASE_FLAT = "flat"
CASE_CONVERGENT = "convergent"

SCHEDULER_NAMES = ("dlrs", "adacomp", "constant", "decay")


@dataclass
class EpochLossSummary:
    """Streaming first/last/mean of one epoch's batch losses.

    Holds exactly four scalars regardless of how many batches are
    recorded, so scheduler state stays O(1) in the batch count.
    """

    first_loss: float = 0.0
    last_loss: float = 0.0
    running_sum: float = 0.0
    count: int = 0

    def record(self, batch_loss):
        batch_loss = float(batch_loss)
        if not math.isfinite(batch_loss) or batch_loss < 0.0:
            raise ValueError(
                f"batch {self.count + 1}: loss {batch_loss!r} is not a finite "
                "non-negative number (diverged forward pass?)")
        if self.count == 0:
            self.first_loss = batch_loss
        self.last_loss = batch_loss
        self.running_sum += batch_loss
        self.count += 1
        return self

    @property
    def mean(self):
        if self.count < 1:
            raise ValueError("no batches recorded yet")
        return self.running_sum / self.count

    def to_bytes(self):
        """Fixed 32-byte encoding; size is independent of the batch count."""
        return struct.pack("<dddq", self.first_loss, self.last_loss,
                           self.running_sum, self.count)

    @classmethod
    def from_bytes(cls, blob):
        first, last, total, count = struct.unpack("<dddq", blob)
        return cls(first, last, total, count)

    def normalized_slope(self):
        """(last - first) / mean over the epoch's batch losses."""
        m = self.mean
        if m <= 0.0:
            raise ValueError(
                "mean batch loss is zero; slope is undefined (training done or broken)")
        return (self.last_loss - self.first_loss) / m


@dataclass(frozen=True)
class DlrsConfig:
    alpha0: float = 1e-3
    delta_d: float = 0.5
    delta_o: float = 1.0
    delta_i: float = 0.1
    alpha_min: float = 1e-8
    alpha_max: float = 1.0

    def __post_init__(self):
        if not (self.delta_d > 0 and self.delta_o > 0 and self.delta_i > 0):
            raise ValueError("all delta factors must be positive")
        if not (0.0 < self.alpha_min <= self.alpha0 <= self.alpha_max):
            raise ValueError(
                f"need 0 < alpha_min <= alpha0 <= alpha_max, got "
                f"{self.alpha_min}, {self.alpha0}, {self.alpha_max}")


@dataclass(frozen=True)
class DlrsState:
    alpha: float
    epoch: int = 0


@dataclass
class AdacompState:
    alpha: float
    previous_loss: Optional[float] = None


def floor_log10(x):
    """floor(log10(x)), exact at representable powers of ten."""
    if x <= 0.0:
        raise ValueError("floor_log10 needs a positive argument")
    n = math.floor(math.log10(x))
    # float log10 can land one off near exact powers of ten
    if 10.0 ** (n + 1) <= x:
        n += 1
    elif 10.0 ** n > x:
        n -= 1
    return n


def classify_slope(slope):
    """Map a finite slope to its regime; slope == 1 counts as flat."""
    if not math.isfinite(slope):
        raise ValueError(f"slope must be finite, got {slope!r}")
    if slope > 1.0:
        return CASE_DIVERGENT
    if slope >= 0.0:
        return CASE_FLAT
    return CASE_CONVERGENT


def dlrs_update(state, cfg, slope):
    """One scheduling step: alpha -= 10^floor(log10(alpha)) * delta * slope, clamped."""
    if not (cfg.alpha_min <= state.alpha <= cfg.alpha_max):
        raise ValueError(f"alpha {state.alpha} outside [{cfg.alpha_min}, {cfg.alpha_max}]")
    case = classify_slope(slope)
    delta = {CASE_DIVERGENT: cfg.delta_d,
             CASE_FLAT: cfg.delta_o,
             CASE_CONVERGENT: cfg.delta_i}[case]
    n = floor_log10(state.alpha)
    adjustment = 10.0 ** n * delta * slope
    alpha = min(max(state.alpha - adjustment, cfg.alpha_min), cfg.alpha_max)
    return DlrsState(alpha=alpha, epoch=state.epoch + 1)


def adacomp_update(state, current_loss, gamma=0.1, alpha_min=1e-8, alpha_max=1.0):
    """Sign-of-loss-difference multiplicative rule (reconstructed baseline)."""
    current_loss = float(current_loss)
    if not math.isfinite(current_loss):
        raise ValueError(f"loss {current_loss!r} is not finite")
    if state.previous_loss is None:
        return AdacompState(alpha=state.alpha, previous_loss=current_loss)
    diff = state.previous_loss - current_loss
    alpha = state.alpha
    if diff > 0.0:
        alpha *= 1.0 + gamma
    elif diff < 0.0:
        alpha *= 1.0 - gamma
    alpha = min(max(alpha, alpha_min), alpha_max)
    return AdacompState(alpha=alpha, previous_loss=current_loss)


@dataclass
class TraceRow:
    """One lr-trace line: the scheduler's decision for one epoch."""
    epoch: int
    slope: Optional[float]
    case: str
    alpha: float


class Schedule:
    """Uniform stepping contract: feed an epoch summary, get the next rate."""

    name = "base"

    def __init__(self, alpha0):
        self.alpha = float(alpha0)
        self.epoch = 0
        self.history = []

    def step(self, summary):
        raise NotImplementedError

    def _trace(self, slope, case):
        self.history.append(TraceRow(self.epoch, slope, case, self.alpha))


class ConstantSchedule(Schedule):
    name = "constant"

    def step(self, summary):
        self.epoch += 1
        self._trace(None, "")
        return self.alpha


class ExponentialDecaySchedule(Schedule):
    name = "decay"

    def __init__(self, alpha0, rate=0.9):
        super().__init__(alpha0)
        if not 0.0 < rate <= 1.0:
            raise ValueError("decay rate must be in (0, 1]")
        self.alpha0 = float(alpha0)
        self.rate = float(rate)

    def step(self, summary):
        self.epoch += 1
        self.alpha = self.alpha0 * self.rate ** self.epoch
        self._trace(None, "")
        return self.alpha


class DlrsSchedule(Schedule):
    name = "dlrs"

    def __init__(self, cfg):
        super().__init__(cfg.alpha0)
        self.cfg = cfg
        self.state = DlrsState(alpha=cfg.alpha0, epoch=0)

    def step(self, summary):
        slope = summary.normalized_slope()
        case = classify_slope(slope)
        self.state = dlrs_update(self.state, self.cfg, slope)
        self.alpha = self.state.alpha
        self.epoch = self.state.epoch
        self._trace(slope, case)
        return self.alpha


class AdacompSchedule(Schedule):
    """Adacomp (reconstructed): per-epoch step on the mean epoch loss."""

    name = "adacomp"

    def __init__(self, alpha0, gamma=0.1, alpha_min=1e-8, alpha_max=1.0):
        super().__init__(alpha0)
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        self.gamma = float(gamma)
        self.alpha_min = float(alpha_min)
        self.alpha_max = float(alpha_max)
        self.state = AdacompState(alpha=float(alpha0))

    def step(self, summary):
        self.state = adacomp_update(self.state, summary.mean, self.gamma,
                                    self.alpha_min, self.alpha_max)
        self.alpha = self.state.alpha
        self.epoch += 1
        self._trace(None, "")
        return self.alpha


def scheduler_step(policy, summary):
    """Advance any policy one epoch and return its new learning rate."""
    return policy.step(summary)


def make_schedule(name, alpha0, params=None):
    """Build a schedule from its config name and parameter dict."""
    params = dict(params or {})
    if name == "constant":
        return ConstantSchedule(alpha0)
    if name == "decay":
        return ExponentialDecaySchedule(alpha0, rate=params.get("rate", 0.9))
    if name == "dlrs":
        cfg = DlrsConfig(alpha0=alpha0,
                         delta_d=params.get("delta_d", 0.5),
                         delta_o=params.get("delta_o", 1.0),
                         delta_i=params.get("delta_i", 0.1),
                         alpha_min=params.get("alpha_min", 1e-8),
                         alpha_max=params.get("alpha_max", 1.0))
        return DlrsSchedule(cfg)
    if name == "adacomp":
        return AdacompSchedule(alpha0,
                               gamma=params.get("gamma", 0.1),
                               alpha_min=params.get("alpha_min", 1e-8),
                               alpha_max=params.get("alpha_max", 1.0))
    raise ValueError(f"unknown scheduler {name!r}; expected one of {SCHEDULER_NAMES}")
