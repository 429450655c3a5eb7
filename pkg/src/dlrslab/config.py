"""Flat key=value experiment configuration.

The on-disk format is one `key = value` pair per line with `#` comments.
Resolution fills every default that will influence the run and rejects
unknown keys; the resolved mapping is echoed to config-echo.json, which
can itself be fed back in (JSON is accepted transparently) to reproduce
the run byte for byte.
"""

import json

from .errors import ConfigError

WORKLOADS = ("pinn", "mnist", "trace")
SCHEDULERS = ("dlrs", "adacomp", "constant", "decay")
OPTIMIZERS = ("adam", "sgd")
ACTIVATION_CHOICES = ("alternate", "alternate-cos", "tanh", "relu", "sin", "cos")


def _parse_bool(v):
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("true", "yes", "1"):
        return True
    if str(v).lower() in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _parse_int(v):
    if isinstance(v, bool):
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def _parse_float(v):
    return float(v)


def _parse_str(v):
    s = str(v)
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        s = s[1:-1]
    return s


def _parse_int_list(v):
    if isinstance(v, list):
        return [_parse_int(x) for x in v]
    return [_parse_int(tok) for tok in str(v).split(",") if tok.strip()]


def _parse_loss_groups(v):
    """Scripted per-epoch batch losses: '2,4,6; 6,4,2; 3,3,3'."""
    if isinstance(v, list):
        return [[float(x) for x in group] for group in v]
    groups = []
    for part in str(v).split(";"):
        part = part.strip()
        if part:
            groups.append([float(tok) for tok in part.split(",")])
    if not groups:
        raise ValueError("empty loss script")
    return groups


# key -> parser; None markers in defaults are filled per workload/scheduler
_COMMON_KEYS = {
    "workload": _parse_str,
    "out": _parse_str,
    "seed": _parse_int,
    "epochs": _parse_int,
    "timing": _parse_bool,
    "scheduler": _parse_str,
    "scheduler.alpha0": _parse_float,
    "scheduler.delta_d": _parse_float,
    "scheduler.delta_o": _parse_float,
    "scheduler.delta_i": _parse_float,
    "scheduler.alpha_min": _parse_float,
    "scheduler.alpha_max": _parse_float,
    "scheduler.gamma": _parse_float,
    "scheduler.rate": _parse_float,
    "optimizer": _parse_str,
    "optimizer.beta1": _parse_float,
    "optimizer.beta2": _parse_float,
    "optimizer.eps": _parse_float,
    "net.hidden": _parse_int_list,
    "net.activation": _parse_str,
}

_PINN_KEYS = {
    "pinn.x1": _parse_float,
    "pinn.x2": _parse_float,
    "pinn.psi1": _parse_float,
    "pinn.psi2": _parse_float,
    "pinn.frequency_hz": _parse_float,
    "pinn.sound_speed": _parse_float,
    "pinn.n_points": _parse_int,
    "pinn.n_batches": _parse_int,
}

_MNIST_KEYS = {
    "mnist.train_images": _parse_str,
    "mnist.train_labels": _parse_str,
    "mnist.test_images": _parse_str,
    "mnist.test_labels": _parse_str,
    "mnist.synthetic": _parse_bool,
    "mnist.train_subset": _parse_int,
    "mnist.test_subset": _parse_int,
    "batch.size": _parse_int,
    "batch.drop_last": _parse_bool,
}

_TRACE_KEYS = {
    "trace.losses": _parse_loss_groups,
}

ALL_KEYS = {**_COMMON_KEYS, **_PINN_KEYS, **_MNIST_KEYS, **_TRACE_KEYS}

SCHEDULER_PARAM_KEYS = {
    "dlrs": ("scheduler.alpha0", "scheduler.delta_d", "scheduler.delta_o",
             "scheduler.delta_i", "scheduler.alpha_min", "scheduler.alpha_max"),
    "adacomp": ("scheduler.alpha0", "scheduler.gamma",
                "scheduler.alpha_min", "scheduler.alpha_max"),
    "constant": ("scheduler.alpha0",),
    "decay": ("scheduler.alpha0", "scheduler.rate"),
}

_SCHEDULER_DEFAULTS = {
    "scheduler.delta_d": 0.5,
    "scheduler.delta_o": 1.0,
    "scheduler.delta_i": 0.1,
    "scheduler.alpha_min": 1e-8,
    "scheduler.alpha_max": 1.0,
    "scheduler.gamma": 0.1,
    "scheduler.rate": 0.9,
}

_WORKLOAD_DEFAULTS = {
    "pinn": {
        "epochs": 2000,
        "scheduler.alpha0": 1e-3,
        "net.hidden": [32, 32, 32],
        "net.activation": "alternate",
        "pinn.x1": 0.0,
        "pinn.x2": 1.0,
        "pinn.psi1": 1.0,
        "pinn.psi2": 0.0,
        "pinn.frequency_hz": 100.0,
        "pinn.sound_speed": 340.0,
        "pinn.n_points": 2000,
        "pinn.n_batches": 10,
    },
    "mnist": {
        "epochs": 10,
        "scheduler.alpha0": 0.01,
        "net.hidden": [128],
        "net.activation": "tanh",
        "mnist.synthetic": True,
        "mnist.train_subset": 6000,
        "mnist.test_subset": 1000,
        "batch.size": 64,
        "batch.drop_last": False,
    },
    "trace": {
        "scheduler.alpha0": 1e-3,
    },
}

_COMMON_DEFAULTS = {
    "seed": 42,
    "timing": False,
    "scheduler": "dlrs",
    "optimizer": "adam",
    "optimizer.beta1": 0.9,
    "optimizer.beta2": 0.999,
    "optimizer.eps": 1e-8,
}


def parse_config_text(text):
    """Parse key=value lines into a raw string-valued mapping."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def load_config_file(path):
    """Read a key=value config or a JSON echo into a raw mapping."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: JSON config must be an object")
        return data
    return parse_config_text(text)


def _workload_keys(workload, scheduler):
    keys = dict(_COMMON_KEYS)
    if workload == "pinn":
        keys.update(_PINN_KEYS)
    elif workload == "mnist":
        keys.update(_MNIST_KEYS)
    elif workload == "trace":
        keys.update(_TRACE_KEYS)
    # drop parameters of the schedulers that are not selected
    selected = set(SCHEDULER_PARAM_KEYS[scheduler])
    for k in [k for k in keys if k.startswith("scheduler.") and k not in selected]:
        del keys[k]
    return keys


def resolve_config(raw, overrides=None):
    """Validate a raw mapping and fill every default that affects the run."""
    raw = dict(raw)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})

    unknown = sorted(set(raw) - set(ALL_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    workload = _parse_str(raw.get("workload", ""))
    if workload not in WORKLOADS:
        raise ConfigError(f"workload must be one of {WORKLOADS}, got {workload!r}")
    scheduler = _parse_str(raw.get("scheduler", _COMMON_DEFAULTS["scheduler"]))
    if scheduler not in SCHEDULERS:
        raise ConfigError(f"scheduler must be one of {SCHEDULERS}, got {scheduler!r}")

    keys = _workload_keys(workload, scheduler)
    out_of_scope = sorted(set(raw) - set(keys))
    if out_of_scope:
        raise ConfigError(
            f"keys not applicable to workload={workload} scheduler={scheduler}: "
            f"{', '.join(out_of_scope)}")

    resolved = {}
    for key, parser in keys.items():
        if key in raw:
            try:
                resolved[key] = parser(raw[key])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"config field {key!r}: {exc}") from exc
        elif key in _WORKLOAD_DEFAULTS[workload]:
            resolved[key] = _WORKLOAD_DEFAULTS[workload][key]
        elif key in _SCHEDULER_DEFAULTS:
            resolved[key] = _SCHEDULER_DEFAULTS[key]
        elif key in _COMMON_DEFAULTS:
            resolved[key] = _COMMON_DEFAULTS[key]
    resolved["workload"] = workload
    resolved["scheduler"] = scheduler

    _validate_resolved(resolved)
    return resolved


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _validate_resolved(cfg):
    workload = cfg["workload"]
    if workload == "trace":
        _require("trace.losses" in cfg, "config field 'trace.losses' is required")
        cfg.setdefault("epochs", len(cfg["trace.losses"]))
        _require(cfg["epochs"] == len(cfg["trace.losses"]),
                 "config field 'epochs': must match the number of scripted epochs")
    _require("epochs" in cfg, "config field 'epochs' is required")
    _require(cfg["epochs"] >= 0, f"config field 'epochs': must be >= 0, got {cfg['epochs']}")
    _require(cfg["optimizer"] in OPTIMIZERS,
             f"config field 'optimizer': must be one of {OPTIMIZERS}")
    _require(cfg["scheduler.alpha0"] > 0,
             f"config field 'scheduler.alpha0': must be positive")
    for key in ("scheduler.delta_d", "scheduler.delta_o", "scheduler.delta_i"):
        if key in cfg:
            _require(cfg[key] > 0, f"config field {key!r}: must be positive, got {cfg[key]}")
    if "scheduler.alpha_min" in cfg:
        _require(0 < cfg["scheduler.alpha_min"] <= cfg["scheduler.alpha0"]
                 <= cfg["scheduler.alpha_max"],
                 "config: need 0 < scheduler.alpha_min <= scheduler.alpha0 "
                 "<= scheduler.alpha_max")
    if "scheduler.gamma" in cfg:
        _require(0 < cfg["scheduler.gamma"] < 1,
                 f"config field 'scheduler.gamma': must be in (0, 1)")
    if "scheduler.rate" in cfg:
        _require(0 < cfg["scheduler.rate"] <= 1,
                 f"config field 'scheduler.rate': must be in (0, 1]")
    if workload != "trace":
        _require(all(h > 0 for h in cfg["net.hidden"]),
                 "config field 'net.hidden': sizes must be positive")
        _require(cfg["net.activation"] in ACTIVATION_CHOICES,
                 f"config field 'net.activation': must be one of {ACTIVATION_CHOICES}")
    if workload == "pinn":
        _require(cfg["pinn.x2"] > cfg["pinn.x1"], "config: need pinn.x2 > pinn.x1")
        _require(cfg["pinn.frequency_hz"] > 0, "config field 'pinn.frequency_hz': must be positive")
        _require(cfg["pinn.sound_speed"] > 0, "config field 'pinn.sound_speed': must be positive")
        _require(cfg["pinn.n_points"] >= 2, "config field 'pinn.n_points': need at least 2")
        _require(1 <= cfg["pinn.n_batches"] <= cfg["pinn.n_points"],
                 "config field 'pinn.n_batches': must be in [1, pinn.n_points]")
    if workload == "mnist":
        _require(cfg["batch.size"] >= 1, "config field 'batch.size': must be positive")
        has_paths = all(f"mnist.{k}" in cfg for k in
                        ("train_images", "train_labels", "test_images", "test_labels"))
        _require(has_paths or cfg["mnist.synthetic"],
                 "config: supply the four mnist.*_images/_labels paths or set "
                 "mnist.synthetic = true")


def echo_json(cfg):
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"
