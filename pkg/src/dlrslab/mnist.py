"""Image-classification workload on IDX-format digit data.

Reads the standard big-endian IDX container (optionally gzipped),
normalizes pixels to [0, 1], and trains a dense classifier with Adam and
a pluggable per-epoch learning-rate schedule. Weight init and batch
shuffling use separate RNG streams so the scheduler choice can never
shift the data order.
"""

import gzip
import hashlib
import struct
import time
from dataclasses import dataclass

import numpy as np

from .autodiff import Tape, grad
from .errors import TrainingDivergedError
from .network import cross_entropy_on_tape, forward_rows_on_tape, params_on_tape
from .optimizer import AdamState, adam_step, sgd_step
from .records import RunRecord, TrainResult
from .scheduler import EpochLossSummary

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    images: np.ndarray   # (N, 784) float64 in [0, 1], exactly pixel/255
    labels: np.ndarray   # (N,) int in [0, 9]
    split: str = "train"

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images vs {len(self.labels)} labels")

    def __len__(self):
        return len(self.labels)

    def subset(self, n):
        n = min(n, len(self))
        return Dataset(self.images[:n], self.labels[:n], self.split)


@dataclass(frozen=True)
class BatchPlan:
    batch_size: int
    seed: int = 0
    drop_last: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")


def _read_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
        fh.seek(0)
        if head == b"\x1f\x8b":
            return gzip.decompress(fh.read())
        return fh.read()


def _parse_header(data, path, expected_magic, n_dims):
    if len(data) < 4 * (1 + n_dims):
        raise ValueError(f"{path}: truncated IDX header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic != expected_magic:
        raise ValueError(f"{path}: bad magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    dims = struct.unpack(f">{n_dims}I", data[4:4 + 4 * n_dims])
    return dims, data[4 + 4 * n_dims:]


def read_idx(images_path, labels_path, split="train"):
    """Parse an images/labels IDX pair into a normalized Dataset."""
    (n, rows, cols), pixels = _parse_header(_read_maybe_gzip(images_path),
                                            images_path, IMAGES_MAGIC, 3)
    if len(pixels) != n * rows * cols:
        raise ValueError(f"{images_path}: truncated pixel payload "
                         f"({len(pixels)} bytes for {n}x{rows}x{cols})")
    (n_labels,), raw_labels = _parse_header(_read_maybe_gzip(labels_path),
                                            labels_path, LABELS_MAGIC, 1)
    if len(raw_labels) != n_labels:
        raise ValueError(f"{labels_path}: truncated label payload")
    if n != n_labels:
        raise ValueError(f"count mismatch: {n} images vs {n_labels} labels")
    images = np.frombuffer(pixels, dtype=np.uint8).reshape(n, rows * cols)
    labels = np.frombuffer(raw_labels, dtype=np.uint8).astype(np.int64)
    return Dataset(images.astype(np.float64) / 255.0, labels, split)


def write_idx(dataset, images_path, labels_path, side=28):
    """Serialize a Dataset back to raw IDX bytes (inverse of read_idx)."""
    n = len(dataset)
    pixels = np.rint(dataset.images * 255.0).astype(np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, side, side))
        fh.write(pixels.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABELS_MAGIC, n))
        fh.write(dataset.labels.astype(np.uint8).tobytes())


def epoch_batches(n, plan, rng):
    """Index batches for one epoch; advances the caller-owned rng stream."""
    perm = rng.permutation(n)
    stop = n - n % plan.batch_size if plan.drop_last else n
    return [perm[i:i + plan.batch_size] for i in range(0, stop, plan.batch_size)]


def _batch_digest(indices):
    return hashlib.sha256(np.ascontiguousarray(indices, dtype="<i8")
                          .tobytes()).hexdigest()[:16]


def evaluate_accuracy(net, dataset):
    """Argmax match rate; argmax ties resolve to the smallest class index."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    logits = net.forward_batch(dataset.images)
    return float(np.mean(np.argmax(logits, axis=1) == dataset.labels))


def _classifier_step(net, images, labels):
    tape = Tape()
    param_vars = params_on_tape(tape, net)
    logits = forward_rows_on_tape(net, param_vars, images)
    loss = cross_entropy_on_tape(logits, labels)
    gm = grad(loss, tape)
    return float(loss.value), [gm[v] for v in param_vars]


def train_classifier(train_set, test_set, net, schedule, epochs, plan,
                     optimizer="adam", beta1=0.9, beta2=0.999, eps=1e-8,
                     record_wall=False):
    """Mini-batch training with per-epoch learning-rate scheduling."""
    if optimizer not in ("adam", "sgd"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    params = net.parameter_arrays()
    adam = AdamState.init(params, beta1=beta1, beta2=beta2, eps=eps)
    shuffle_rng = np.random.default_rng(plan.seed)
    alpha = schedule.alpha
    records, digests, epoch_ms = [], [], []

    for epoch in range(epochs):
        t0 = time.perf_counter()
        batches = epoch_batches(len(train_set), plan, shuffle_rng)
        digests.append(_batch_digest(np.concatenate(batches)))
        summary = EpochLossSummary()
        for idx in batches:
            loss, grads = _classifier_step(net, train_set.images[idx],
                                           train_set.labels[idx])
            try:
                summary.record(loss)
            except ValueError as exc:
                raise TrainingDivergedError(str(exc), records=records) from exc
            if optimizer == "adam":
                params, adam = adam_step(params, grads, adam, alpha)
            else:
                params = sgd_step(params, grads, alpha)
            net.set_parameter_arrays(params)
        acc = evaluate_accuracy(net, test_set)
        ms = (time.perf_counter() - t0) * 1000.0
        epoch_ms.append(ms)
        records.append(RunRecord(epoch=epoch, alpha=alpha, train_loss=summary.mean,
                                 metric=acc, wall_ms=int(ms) if record_wall else 0))
        alpha = schedule.step(summary)

    return TrainResult(net=net, records=records, batch_digests=digests,
                       epoch_ms=epoch_ms)
