"""Per-epoch run records and their CSV serialization.

One RunRecord per epoch is the contract between the training loops and
the harness; the CSV schema is fixed (header, '\n' newlines, repr-format
floats) so identical runs serialize byte-identically.
"""

from dataclasses import dataclass, field
from typing import List

RECORDS_HEADER = "epoch,alpha,train_loss,metric,wall_ms"


@dataclass
class RunRecord:
    epoch: int
    alpha: float
    train_loss: float
    metric: float
    wall_ms: int = 0


@dataclass
class TrainResult:
    """What a training loop hands back to the harness."""
    net: object
    records: List[RunRecord]
    batch_digests: List[str] = field(default_factory=list)  # batch-order hash per epoch
    epoch_ms: List[float] = field(default_factory=list)     # measured wall time per epoch


def format_value(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_records_csv(path, records: List[RunRecord]):
    lines = [RECORDS_HEADER]
    for r in records:
        lines.append(",".join([
            str(r.epoch),
            repr(float(r.alpha)),
            repr(float(r.train_loss)),
            repr(float(r.metric)),
            str(int(r.wall_ms)),
        ]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_records_csv(path):
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != RECORDS_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            epoch, alpha, loss, metric, wall = line.strip().split(",")
            records.append(RunRecord(int(epoch), float(alpha), float(loss),
                                     float(metric), int(wall)))
    return records
