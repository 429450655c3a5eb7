"""1-D Helmholtz boundary-value workload.

The network output is wrapped in a trial solution that satisfies the two
boundary values exactly, so training only has to drive the interior
residual psi'' + k^2 psi to zero at collocation points. The closed-form
two-point solution serves as the accuracy reference.
"""

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .autodiff import Tape, grad
from .dual import Dual2
from .errors import TrainingDivergedError
from .network import forward_dual, params_on_tape
from .optimizer import AdamState, adam_step, sgd_step
from .records import RunRecord, TrainResult
from .scheduler import EpochLossSummary

EVAL_GRID_POINTS = 512


@dataclass(frozen=True)
class HelmholtzProblem:
    x1: float = 0.0
    x2: float = 1.0
    psi1: float = 1.0
    psi2: float = 0.0
    f: float = 100.0      # Hz
    c: float = 340.0      # m/s
    n_points: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not self.x2 > self.x1:
            raise ValueError(f"need x2 > x1, got [{self.x1}, {self.x2}]")
        if self.f <= 0 or self.c <= 0:
            raise ValueError("frequency and sound speed must be positive")
        if self.n_points < 2:
            raise ValueError("need at least the two boundary points")
        if abs(np.sin(self.k * (self.x2 - self.x1))) <= 1e-6:
            raise ValueError(
                f"resonant wavenumber k={self.k}: sin(k*(x2-x1)) ~ 0, "
                "the boundary-value problem is ill-posed")

    @property
    def k(self):
        """Wavenumber 2*pi*f/c in rad/m."""
        return 2.0 * np.pi * self.f / self.c


def sample_collocation(problem):
    """Uniform random interior points plus both endpoints, seed-deterministic."""
    rng = np.random.default_rng(problem.seed)
    interior = rng.uniform(problem.x1, problem.x2, size=problem.n_points - 2)
    return np.concatenate(([problem.x1], interior, [problem.x2]))


def _trial_dual(problem, x_pts, net_out):
    """Compose boundary interpolation with the weighted network output.

    x_pts is a constant (n,) array; net_out a Dual2 with (n,) components
    (ndarrays or tape Vars). The interpolation weights and their exact
    x-derivatives are constants, so only product-rule terms appear.
    """
    x1, x2 = problem.x1, problem.x2
    span = x2 - x1
    a = (x2 - x_pts) / span
    b = (x_pts - x1) / span
    lin = problem.psi1 * a + problem.psi2 * b
    lin1 = (problem.psi2 - problem.psi1) / span
    w = a * b
    w1 = (x1 + x2 - 2.0 * x_pts) / span ** 2
    w2 = -2.0 / span ** 2
    nv, n1, n2 = net_out.value, net_out.d1, net_out.d2
    value = lin + w * nv
    d1 = lin1 + w1 * nv + w * n1
    d2 = w2 * nv + 2.0 * w1 * n1 + w * n2
    return Dual2(value, d1, d2)


def trial_solution(problem, net, x):
    """(psi_t, dpsi_t/dx, d2psi_t/dx2) at x; boundary values hold exactly."""
    x = np.asarray(x, dtype=np.float64)
    pts = np.atleast_1d(x)
    out = forward_dual(net, pts)
    flat = Dual2(*(np.asarray(c)[0] for c in (out.value, out.d1, out.d2)))
    t = _trial_dual(problem, pts, flat)
    if x.ndim == 0:
        return float(t.value[0]), float(t.d1[0]), float(t.d2[0])
    return t.value, t.d1, t.d2


def trial_values(problem, net, x_pts):
    """psi_t values only (no derivatives), vectorized."""
    x_pts = np.asarray(x_pts, dtype=np.float64)
    psi_hat = net.forward_batch(x_pts.reshape(-1, 1)).ravel()
    span = problem.x2 - problem.x1
    a = (problem.x2 - x_pts) / span
    b = (x_pts - problem.x1) / span
    return problem.psi1 * a + problem.psi2 * b + a * b * psi_hat


def residual_loss(problem, net, points):
    """Mean squared psi_t'' + k^2 psi_t over the given points."""
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        raise ValueError("need at least one collocation point")
    value, _, d2 = trial_solution(problem, net, points)
    r = d2 + problem.k ** 2 * value
    bad = ~np.isfinite(r)
    if bad.any():
        raise TrainingDivergedError(
            f"non-finite residual at x={points[bad][0]!r}")
    return float(np.mean(r ** 2))


def analytic_solution(problem, x):
    """Closed-form solution of psi'' + k^2 psi = 0 with the boundary values."""
    x = np.asarray(x, dtype=np.float64)
    k, x1, x2 = problem.k, problem.x1, problem.x2
    denom = np.sin(k * (x2 - x1))
    return (problem.psi1 * np.sin(k * (x2 - x)) +
            problem.psi2 * np.sin(k * (x - x1))) / denom


def relative_error(predicted, truth):
    """L2-norm discrepancy as a percentage of the truth norm."""
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth grids differ in length")
    norm = np.linalg.norm(truth)
    if norm == 0.0:
        raise ValueError("truth field has zero norm; relative error undefined")
    return float(np.linalg.norm(predicted - truth) / norm * 100.0)


def _batch_loss_and_grads(problem, net, xs):
    """One taped step: residual loss over xs and gradients for all parameters."""
    tape = Tape()
    param_vars = params_on_tape(tape, net)
    pairs = [(param_vars[2 * i],
              param_vars[2 * i + 1].reshape((net.layers[i].weight.shape[0], 1)))
             for i in range(len(net.layers))]
    out = forward_dual(net, xs, param_pairs=pairs)
    n = xs.size
    flat = Dual2(out.value.reshape((n,)), out.d1.reshape((n,)), out.d2.reshape((n,)))
    t = _trial_dual(problem, xs, flat)
    r = t.d2 + problem.k ** 2 * t.value
    loss = (r * r).mean()
    gm = grad(loss, tape)
    return float(loss.value), [gm[v] for v in param_vars]


def _digest(indices):
    return hashlib.sha256(np.ascontiguousarray(indices, dtype="<i8")
                          .tobytes()).hexdigest()[:16]


def train_pinn(problem, net, schedule, epochs, n_batches=10, shuffle_seed=0,
               optimizer="adam", beta1=0.9, beta2=0.999, eps=1e-8,
               record_wall=False):
    """Training on shuffled collocation batches with per-epoch scheduling."""
    points = sample_collocation(problem)
    if n_batches < 1 or n_batches > points.size:
        raise ValueError(f"n_batches must be in [1, {points.size}]")
    if optimizer not in ("adam", "sgd"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    grid = np.linspace(problem.x1, problem.x2, EVAL_GRID_POINTS)
    truth = analytic_solution(problem, grid)
    params = net.parameter_arrays()
    adam = AdamState.init(params, beta1=beta1, beta2=beta2, eps=eps)
    shuffle_rng = np.random.default_rng(shuffle_seed)
    alpha = schedule.alpha
    records, digests, epoch_ms = [], [], []

    for epoch in range(epochs):
        t0 = time.perf_counter()
        perm = shuffle_rng.permutation(points.size)
        digests.append(_digest(perm))
        summary = EpochLossSummary()
        for batch_idx in np.array_split(perm, n_batches):
            xs = points[batch_idx]
            loss, grads = _batch_loss_and_grads(problem, net, xs)
            try:
                summary.record(loss)
            except ValueError as exc:
                raise TrainingDivergedError(str(exc), records=records) from exc
            if optimizer == "adam":
                params, adam = adam_step(params, grads, adam, alpha)
            else:
                params = sgd_step(params, grads, alpha)
            net.set_parameter_arrays(params)
        err = relative_error(trial_values(problem, net, grid), truth)
        ms = (time.perf_counter() - t0) * 1000.0
        epoch_ms.append(ms)
        records.append(RunRecord(epoch=epoch, alpha=alpha, train_loss=summary.mean,
                                 metric=err, wall_ms=int(ms) if record_wall else 0))
        alpha = schedule.step(summary)

    return TrainResult(net=net, records=records, batch_digests=digests,
                       epoch_ms=epoch_ms)


def field_profile(problem, net, n=EVAL_GRID_POINTS):
    """(x, psi_predicted, psi_true) columns on a uniform grid."""
    grid = np.linspace(problem.x1, problem.x2, n)
    return grid, trial_values(problem, net, grid), analytic_solution(problem, grid)
