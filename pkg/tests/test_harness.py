import numpy as np
import pytest

from dlrslab import cli, harness
from dlrslab.config import parse_config_text, resolve_config
from dlrslab.errors import ConfigError, OutputExistsError
from dlrslab.network import load_checkpoint
from dlrslab.records import read_records_csv

TINY_PINN = """
workload = pinn
epochs = 2
pinn.n_points = 60
pinn.n_batches = 3
net.hidden = 8,8
"""

TINY_MNIST = """
workload = mnist
epochs = 1
mnist.train_subset = 60
mnist.test_subset = 30
batch.size = 16
net.hidden = 16
"""

SCRIPTED = """
workload = trace
scheduler = dlrs
scheduler.alpha0 = 1e-3
trace.losses = 2,4,6; 6,4,2; 3,3,3
"""


def cfg_of(text):
    return resolve_config(parse_config_text(text))


def test_validate_catches_ill_posed_problem():
    cfg = cfg_of(TINY_PINN + "pinn.frequency_hz = 170\n")
    with pytest.raises(ConfigError, match="resonant"):
        harness.validate(cfg)


def test_validate_catches_missing_dataset_file():
    cfg = cfg_of(TINY_MNIST + """
mnist.train_images = /nonexistent/a
mnist.train_labels = /nonexistent/b
mnist.test_images = /nonexistent/c
mnist.test_labels = /nonexistent/d
""")
    with pytest.raises(ConfigError, match="file not found"):
        harness.validate(cfg)


def test_run_writes_reproducibility_surface(tmp_path):
    cfg = cfg_of(TINY_PINN)
    out = tmp_path / "r"
    result = harness.run(cfg, out)
    for name in ("records.csv", "config-echo.json", "timings.csv",
                 "batch-hashes.csv", "net.ckpt", "run.png",
                 "field.csv", "field.png"):
        assert (out / name).exists(), name
    assert len(result.records) == 2
    assert read_records_csv(out / "records.csv")[0].epoch == 0
    net, header = load_checkpoint(out / "net.ckpt")
    np.testing.assert_array_equal(net.flat_params(), result.net.flat_params())
    assert header["workload"] == "pinn"


def test_run_refuses_existing_output_without_force(tmp_path):
    cfg = cfg_of(TINY_PINN)
    out = tmp_path / "r"
    harness.run(cfg, out)
    with pytest.raises(OutputExistsError):
        harness.run(cfg, out)
    harness.run(cfg, out, force=True)  # explicit overwrite is fine


def test_run_from_echo_is_byte_identical(tmp_path):
    cfg = cfg_of(TINY_PINN)
    harness.run(cfg, tmp_path / "a")
    echoed = resolve_config(__import__("json").loads(
        (tmp_path / "a" / "config-echo.json").read_text()))
    harness.run(echoed, tmp_path / "b")
    assert (tmp_path / "a" / "records.csv").read_bytes() == \
        (tmp_path / "b" / "records.csv").read_bytes()


def test_lr_trace_scripted_matches_hand_trajectory(tmp_path):
    out = tmp_path / "t"
    harness.lr_trace(cfg_of(SCRIPTED), out)
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == harness.TRACE_HEADER
    rows = [line.split(",") for line in lines[1:]]
    assert [r[2] for r in rows] == ["flat", "convergent", "flat"]
    alphas = [float(r[3]) for r in rows]
    assert alphas == pytest.approx([1e-8, 1.1e-8, 1.1e-8], abs=1e-15)


def test_lr_trace_flat_losses_keep_alpha_constant(tmp_path):
    cfg = cfg_of("workload = trace\ntrace.losses = 5,5; 5,5; 5,5")
    schedule = harness.lr_trace(cfg, tmp_path / "t")
    assert [row.alpha for row in schedule.history] == [1e-3] * 3
    assert all(row.slope == 0.0 for row in schedule.history)


def test_lr_trace_constant_scheduler_has_empty_case(tmp_path):
    cfg = cfg_of("workload = trace\nscheduler = constant\n"
                 "scheduler.alpha0 = 0.01\ntrace.losses = 1,2; 2,1")
    harness.lr_trace(cfg, tmp_path / "t")
    lines = (tmp_path / "t" / "trace.csv").read_text().splitlines()[1:]
    assert all(line.split(",")[1] == "" and line.split(",")[2] == ""
               for line in lines)


def test_compare_rejects_duplicates(tmp_path):
    with pytest.raises(ConfigError, match="duplicate"):
        harness.compare(cfg_of(TINY_PINN), ["dlrs", "dlrs"], tmp_path / "c")


def test_compare_groups_share_batch_order(tmp_path):
    out = tmp_path / "c"
    results, failures = harness.compare(cfg_of(TINY_MNIST),
                                        ["constant", "dlrs"], out)
    assert not failures
    assert set(results) == {"constant", "dlrs"}
    assert results["constant"].batch_digests == results["dlrs"].batch_digests
    lines = (out / "combined.csv").read_text().splitlines()
    assert lines[0] == harness.COMBINED_HEADER
    assert {line.split(",")[0] for line in lines[1:]} == {"constant", "dlrs"}
    assert (out / "compare.png").exists()
    assert (out / "constant" / "records.csv").exists()
    assert (out / "dlrs" / "records.csv").exists()


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text(SCRIPTED)
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n")
    out = tmp_path / "out"

    assert cli.main(["validate", "--config", str(good)]) == 0
    assert cli.main(["validate", "--config", str(bad)]) == 2
    assert cli.main(["lr-trace", "--config", str(good), "--out", str(out)]) == 0
    assert cli.main(["lr-trace", "--config", str(good), "--out", str(out)]) == 4
    assert cli.main(["lr-trace", "--config", str(good), "--out", str(out),
                     "--force"]) == 0
    capsys.readouterr()


def test_cli_seed_override_changes_echo(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text(TINY_PINN)
    out = tmp_path / "run"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out),
                     "--seed", "7"]) == 0
    echo = __import__("json").loads((out / "config-echo.json").read_text())
    assert echo["seed"] == 7
