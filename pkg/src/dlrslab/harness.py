"""Experiment orchestration: build objects from a resolved config, train,
and persist the reproducibility surface (config echo, records CSV,
checkpoint, figures, batch-order hashes)."""

from pathlib import Path

from . import config as cfgmod
from . import plots
from .digits import make_digit_corpus
from .errors import ConfigError, OutputExistsError, TrainingDivergedError
from .mnist import BatchPlan, read_idx, train_classifier
from .network import alternating_activations, build, save_checkpoint
from .pinn import HelmholtzProblem, field_profile, train_pinn
from .records import write_records_csv
from .scheduler import make_schedule

TRACE_HEADER = "epoch,delta_l,case,alpha"
COMBINED_HEADER = "scheduler,epoch,alpha,train_loss,metric"
BATCH_HASHES_HEADER = "scheduler,epoch,digest"

_METRIC_LABELS = {"pinn": "relative error [%]", "mnist": "test accuracy"}


def build_schedule(cfg):
    params = {key.split(".", 1)[1]: value for key, value in cfg.items()
              if key.startswith("scheduler.")}
    alpha0 = params.pop("alpha0")
    return make_schedule(cfg["scheduler"], alpha0, params)


def _hidden_activations(cfg):
    tag = cfg["net.activation"]
    n_hidden = len(cfg["net.hidden"])
    if tag == "alternate":
        return alternating_activations(n_hidden, first="sin")
    if tag == "alternate-cos":
        return alternating_activations(n_hidden, first="cos")
    return [tag] * n_hidden + ["identity"]


def build_net(cfg):
    seed = [cfg["seed"], 0]
    if cfg["workload"] == "pinn":
        sizes = [1] + cfg["net.hidden"] + [1]
    else:
        sizes = [784] + cfg["net.hidden"] + [10]
    return build(sizes, _hidden_activations(cfg), seed=seed)


def build_problem(cfg):
    return HelmholtzProblem(
        x1=cfg["pinn.x1"], x2=cfg["pinn.x2"],
        psi1=cfg["pinn.psi1"], psi2=cfg["pinn.psi2"],
        f=cfg["pinn.frequency_hz"], c=cfg["pinn.sound_speed"],
        n_points=cfg["pinn.n_points"], seed=(cfg["seed"], 2))


def load_datasets(cfg):
    """Explicit IDX paths win; otherwise render the synthetic corpus."""
    path_keys = ("mnist.train_images", "mnist.train_labels",
                 "mnist.test_images", "mnist.test_labels")
    if all(k in cfg for k in path_keys):
        train = read_idx(cfg["mnist.train_images"], cfg["mnist.train_labels"], "train")
        test = read_idx(cfg["mnist.test_images"], cfg["mnist.test_labels"], "test")
        return (train.subset(cfg["mnist.train_subset"]),
                test.subset(cfg["mnist.test_subset"]))
    return make_digit_corpus(cfg["mnist.train_subset"], cfg["mnist.test_subset"],
                             seed=cfg["seed"])


def validate(cfg):
    """Construct every configured object without training."""
    if cfg["workload"] != "trace":
        build_net(cfg)
    build_schedule(cfg)
    if cfg["workload"] == "pinn":
        try:
            build_problem(cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if cfg["workload"] == "mnist":
        BatchPlan(cfg["batch.size"], seed=0, drop_last=cfg["batch.drop_last"])
        for key in ("mnist.train_images", "mnist.train_labels",
                    "mnist.test_images", "mnist.test_labels"):
            if key in cfg and not Path(cfg[key]).exists():
                raise ConfigError(f"config field {key!r}: file not found: {cfg[key]}")
    return cfg


def _prepare_out(cfg, out_dir, force):
    out = Path(out_dir)
    if (out / "records.csv").exists() and not force:
        raise OutputExistsError(
            f"{out}/records.csv already exists; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    (out / "config-echo.json").write_text(cfgmod.echo_json(cfg))
    return out


def _write_timings(path, epoch_ms):
    lines = ["epoch,epoch_ms"]
    lines += [f"{i},{ms!r}" for i, ms in enumerate(epoch_ms)]
    path.write_text("\n".join(lines) + "\n")


def _write_batch_hashes(path, groups):
    lines = [BATCH_HASHES_HEADER]
    for name, digests in groups.items():
        lines += [f"{name},{epoch},{d}" for epoch, d in enumerate(digests)]
    path.write_text("\n".join(lines) + "\n")


def _persist(cfg, out, result, extra_header):
    write_records_csv(out / "records.csv", result.records)
    _write_timings(out / "timings.csv", result.epoch_ms)
    _write_batch_hashes(out / "batch-hashes.csv", {cfg["scheduler"]: result.batch_digests})
    save_checkpoint(result.net, out / "net.ckpt", extra=extra_header)
    if result.records:
        plots.plot_run(result.records, out / "run.png",
                       _METRIC_LABELS[cfg["workload"]])


def _execute(cfg, out, schedule=None):
    """Train per config into a prepared out dir; returns (result, schedule)."""
    workload = cfg["workload"]
    if workload == "trace":
        raise ConfigError("the trace workload is only valid for lr-trace")
    schedule = schedule or build_schedule(cfg)
    net = build_net(cfg)
    opt = dict(optimizer=cfg["optimizer"], beta1=cfg["optimizer.beta1"],
               beta2=cfg["optimizer.beta2"], eps=cfg["optimizer.eps"])
    extra = {"seed": cfg["seed"], "workload": workload}
    try:
        if workload == "pinn":
            problem = build_problem(cfg)
            result = train_pinn(problem, net, schedule, epochs=cfg["epochs"],
                                n_batches=cfg["pinn.n_batches"],
                                shuffle_seed=[cfg["seed"], 1],
                                record_wall=cfg["timing"], **opt)
        else:
            train_set, test_set = load_datasets(cfg)
            plan = BatchPlan(cfg["batch.size"], seed=(cfg["seed"], 1),
                             drop_last=cfg["batch.drop_last"])
            result = train_classifier(train_set, test_set, net, schedule,
                                      epochs=cfg["epochs"], plan=plan,
                                      record_wall=cfg["timing"], **opt)
    except TrainingDivergedError as exc:
        # keep what we have: partial records plus the last valid parameters
        write_records_csv(out / "records.csv", exc.records)
        save_checkpoint(net, out / "net.ckpt", extra=extra)
        raise
    _persist(cfg, out, result, extra)
    if workload == "pinn":
        x, predicted, true = field_profile(problem, result.net)
        lines = ["x,psi_predicted,psi_true"]
        lines += [f"{xi!r},{p!r},{t!r}" for xi, p, t in zip(x, predicted, true)]
        (out / "field.csv").write_text("\n".join(lines) + "\n")
        plots.plot_field(x, predicted, true, out / "field.png")
    return result, schedule


def run(cfg, out_dir, force=False):
    """Train one configured run; artifacts land in out_dir."""
    out = _prepare_out(cfg, out_dir, force)
    result, _ = _execute(cfg, out)
    return result


def _sub_config(cfg, scheduler):
    raw = {k: v for k, v in cfg.items()
           if not k.startswith("scheduler.")
           or k in cfgmod.SCHEDULER_PARAM_KEYS[scheduler]}
    raw["scheduler"] = scheduler
    return cfgmod.resolve_config(raw)


def compare(cfg, schedulers, out_dir, force=False):
    """Run each scheduler with identical seeds and data order; emit a
    long-format CSV plus per-epoch batch-order hashes."""
    if len(schedulers) != len(set(schedulers)):
        raise ConfigError(f"duplicate scheduler names in {schedulers}")
    if not schedulers:
        raise ConfigError("need at least one scheduler to compare")
    out = Path(out_dir)
    if (out / "combined.csv").exists() and not force:
        raise OutputExistsError(
            f"{out}/combined.csv already exists; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)

    results, failures, hash_groups = {}, {}, {}
    for name in schedulers:
        sub_cfg = _sub_config(cfg, name)
        sub_out = _prepare_out(sub_cfg, out / name, force=True)
        try:
            result, _ = _execute(sub_cfg, sub_out)
        except TrainingDivergedError as exc:
            failures[name] = str(exc)
            continue
        results[name] = result
        hash_groups[name] = result.batch_digests

    digest_sets = {tuple(d) for d in hash_groups.values()}
    if len(digest_sets) > 1:
        raise RuntimeError("scheduler choice perturbed the batch order: "
                           f"{sorted(hash_groups)}")

    lines = [COMBINED_HEADER]
    for name, result in results.items():
        for r in result.records:
            lines.append(f"{name},{r.epoch},{r.alpha!r},{r.train_loss!r},{r.metric!r}")
    (out / "combined.csv").write_text("\n".join(lines) + "\n")
    _write_batch_hashes(out / "batch-hashes.csv", hash_groups)
    if results:
        plots.plot_compare({n: r.records for n, r in results.items()},
                           out / "compare.png", _METRIC_LABELS[cfg["workload"]])
    return results, failures


def _scripted_trace(cfg):
    from .scheduler import EpochLossSummary

    schedule = build_schedule(cfg)
    for losses in cfg["trace.losses"]:
        summary = EpochLossSummary()
        for loss in losses:
            summary.record(loss)
        schedule.step(summary)
    return schedule


def trace_lines(schedule):
    lines = [TRACE_HEADER]
    for row in schedule.history:
        slope = "" if row.slope is None else repr(row.slope)
        lines.append(f"{row.epoch},{slope},{row.case},{row.alpha!r}")
    return lines


def lr_trace(cfg, out_dir, force=False):
    """Log the scheduler's per-epoch decisions, from scripted losses or a
    real training run."""
    out = Path(out_dir)
    if (out / "trace.csv").exists() and not force:
        raise OutputExistsError(
            f"{out}/trace.csv already exists; pass --force to overwrite")
    if cfg["workload"] == "trace":
        out.mkdir(parents=True, exist_ok=True)
        (out / "config-echo.json").write_text(cfgmod.echo_json(cfg))
        schedule = _scripted_trace(cfg)
    else:
        out = _prepare_out(cfg, out, force)
        _, schedule = _execute(cfg, out)
    (out / "trace.csv").write_text("\n".join(trace_lines(schedule)) + "\n")
    return schedule
