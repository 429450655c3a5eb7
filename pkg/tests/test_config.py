import json

import pytest

from dlrslab.config import (
    echo_json,
    load_config_file,
    parse_config_text,
    resolve_config,
)
from dlrslab.errors import ConfigError


def resolve_text(text, **overrides):
    return resolve_config(parse_config_text(text), overrides=overrides or None)


def test_parse_key_value_with_comments():
    raw = parse_config_text("""
    # a comment
    workload = pinn   # trailing comment
    epochs = 12
    """)
    assert raw == {"workload": "pinn", "epochs": "12"}


def test_parse_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config_text("workload = pinn\nepochs = 1\nworkload = mnist\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("just words\n")


def test_defaults_fill_in():
    cfg = resolve_text("workload = pinn")
    assert cfg["epochs"] == 2000
    assert cfg["scheduler"] == "dlrs"
    assert cfg["scheduler.alpha0"] == 1e-3
    assert cfg["scheduler.delta_d"] == 0.5
    assert cfg["scheduler.delta_o"] == 1.0
    assert cfg["scheduler.delta_i"] == 0.1
    assert cfg["seed"] == 42
    assert cfg["net.hidden"] == [32, 32, 32]
    assert cfg["pinn.frequency_hz"] == 100.0


def test_mnist_defaults():
    cfg = resolve_text("workload = mnist")
    assert cfg["scheduler.alpha0"] == 0.01
    assert cfg["batch.size"] == 64
    assert cfg["net.hidden"] == [128]
    assert cfg["mnist.synthetic"] is True


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config keys: bogus"):
        resolve_text("workload = pinn\nbogus = 1")


def test_out_of_scope_key_rejected():
    with pytest.raises(ConfigError, match="not applicable"):
        resolve_text("workload = pinn\nbatch.size = 8")
    with pytest.raises(ConfigError, match="scheduler.gamma"):
        resolve_text("workload = pinn\nscheduler = dlrs\nscheduler.gamma = 0.2")


def test_field_errors_name_the_field():
    with pytest.raises(ConfigError, match="'epochs'"):
        resolve_text("workload = pinn\nepochs = soon")
    with pytest.raises(ConfigError, match="scheduler.alpha0"):
        resolve_text("workload = pinn\nscheduler.alpha0 = -1")
    with pytest.raises(ConfigError, match="alpha_min"):
        resolve_text("workload = pinn\nscheduler.alpha_min = 0.5\n"
                     "scheduler.alpha0 = 1e-3")
    with pytest.raises(ConfigError, match="net.activation"):
        resolve_text("workload = pinn\nnet.activation = sigmoid")
    with pytest.raises(ConfigError, match="workload"):
        resolve_text("workload = cfd")


def test_seed_override_wins():
    cfg = resolve_text("workload = pinn\nseed = 7", seed=99)
    assert cfg["seed"] == 99


def test_trace_workload_needs_matching_epochs():
    cfg = resolve_text("workload = trace\ntrace.losses = 1,2; 2,1")
    assert cfg["epochs"] == 2
    assert cfg["trace.losses"] == [[1.0, 2.0], [2.0, 1.0]]
    with pytest.raises(ConfigError, match="epochs"):
        resolve_text("workload = trace\ntrace.losses = 1,2\nepochs = 5")
    with pytest.raises(ConfigError, match="trace.losses"):
        resolve_text("workload = trace")


def test_echo_round_trips_through_json(tmp_path):
    cfg = resolve_text("workload = pinn\nepochs = 3")
    path = tmp_path / "echo.json"
    path.write_text(echo_json(cfg))
    again = resolve_config(load_config_file(path))
    assert again == cfg


def test_load_config_file_accepts_both_formats(tmp_path):
    kv = tmp_path / "a.cfg"
    kv.write_text("workload = mnist\n")
    assert load_config_file(kv) == {"workload": "mnist"}
    js = tmp_path / "b.json"
    js.write_text(json.dumps({"workload": "mnist"}))
    assert load_config_file(js) == {"workload": "mnist"}


def test_pinn_bounds_checks():
    with pytest.raises(ConfigError, match="pinn.x2"):
        resolve_text("workload = pinn\npinn.x1 = 2\npinn.x2 = 1")
    with pytest.raises(ConfigError, match="n_batches"):
        resolve_text("workload = pinn\npinn.n_batches = 0")
