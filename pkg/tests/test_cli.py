import os
import re

import pytest

from everkin.everkin import cli_main
from everkin.config import VERSION
from everkin.utils.calibration import emit_mocap_csv, simulate_pull_log
from everkin.utils.settings import ENV_CONFIG


@pytest.fixture(autouse = True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(ENV_CONFIG, raising = False)


def run(capsys, *args):
    code = cli_main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_version_and_help(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip() == VERSION
    code, out, _ = run(capsys, "-h")
    assert code == 0 and "Commands:" in out


def test_unknown_command(capsys):
    code, _, err = run(capsys, "spin")
    assert code == 1
    assert "wrong command" in err
    assert run(capsys)[0] == 1


def test_fk(capsys):
    code, out, _ = run(capsys, "fk", "--phi", "100", "0", "0")
    assert code == 0
    assert out == "alpha=10.4 theta=0\n"
    code, out, _ = run(capsys, "fk", "--phi", "50", "50", "0")
    assert out == "alpha=5.2 theta=60\n"


def test_fk_errors(capsys):
    code, _, err = run(capsys, "fk", "--phi", "1", "1", "1")
    assert code == 1
    assert "Error:" in err
    assert run(capsys, "fk")[0] == 1
    assert run(capsys, "fk", "--phi", "1", "x", "0")[0] == 1
    assert run(capsys, "fk", "--bogus")[0] == 1


def test_ik(capsys):
    code, out, _ = run(capsys, "ik", "--alpha", "5.2", "--theta", "60", "--verbose")
    assert code == 0
    assert out == "phi=50 50 0\nsector=S1 idle=3\n"
    code, out, _ = run(capsys, "ik", "--alpha", "0", "--theta", "123")
    assert out == "phi=0 0 0\n"
    assert run(capsys, "ik", "--alpha", "95", "--theta", "0")[0] == 1
    assert run(capsys, "ik", "--xyz", "0", "0", "0")[0] == 1


def test_workspace(capsys):
    code, out, _ = run(capsys, "workspace", "--R", "1.2", "--alpha", "60", "--theta", "200")
    assert code == 0
    assert out.startswith("in_workspace=true reachable=true")
    code, out, _ = run(capsys, "workspace", "--R", "0.6", "--alpha", "10.4",
                       "--theta", "350", "--sag", "0")
    assert "reachable=true" in out
    code, out, _ = run(capsys, "workspace", "--R", "0.6", "--alpha", "10.4", "--theta", "350")
    assert "reachable=false" in out
    code, out, _ = run(capsys, "workspace", "--xyz", "0.1", "0", "0", "--pressure", "5")
    assert out == "in_workspace=false reachable=false max_payload=0.7\n"


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "calibrate", str(tmp_path / "none.csv"))
    assert code == 2
    code, _, _ = run(capsys, "sim", "--config", str(tmp_path / "none.json"), "-q")
    assert code == 2


def test_bad_config_is_validation_error(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"loop": {"dtt": 0.01}}')
    code, _, err = run(capsys, "sim", "--config", str(path), "-q")
    assert code == 1
    assert "loop.dtt" in err


def test_calibrate(capsys, tmp_path):
    samples = simulate_pull_log(pressure = 3.0) + \
              simulate_pull_log(pressure = 9.0, t0 = 10.0)
    path = str(tmp_path / "pull.csv")
    emit_mocap_csv(samples, path)
    code, out, _ = run(capsys, "calibrate", path, "-q", "--summary")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("k=0.104 r2=1 ")
    assert lines[0].endswith(" n=40")
    assert lines[1].startswith("groups=2 ")
    assert lines[1].endswith("exceeded=false")
    assert len(lines) == 5


def test_sim_writes_run_log(capsys, tmp_path):
    code, out, _ = run(capsys, "sim", "--duration", "1", "--seed", "3", "-O",
                       str(tmp_path), "-q")
    assert code == 0
    assert out.startswith("settling_time=")
    assert os.path.exists(str(tmp_path / "sim.csv"))
    with open(str(tmp_path / "sim.csv")) as fp:
        head = fp.read()
    assert "# experiment=sim" in head
    assert "# seed=3" in head
    assert run(capsys, "sim", "extra")[0] == 1
    assert run(capsys, "sim", "--dt", "0.5", "-q")[0] == 1


def test_experiment_command(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "step-compare", "--duration", "2",
                       "-O", str(tmp_path), "-q")
    assert code == 0
    assert out.startswith("settling_ff=")
    for name in ("step_compare_ff.csv", "step_compare_noff.csv", "step_compare_summary.csv"):
        assert os.path.exists(str(tmp_path / name))

    code, out, _ = run(capsys, "experiment", "estimate-k", "-O", str(tmp_path), "-q",
                       "--summary")
    assert code == 0
    assert "pooled k_hat=" in out
    assert os.path.exists(str(tmp_path / "estimate_k_mocap.csv"))

    assert run(capsys, "experiment", "spiral", "-q")[0] == 1
    assert run(capsys, "experiment", "estimate-k", "circle-sweep", "-q")[0] == 1
    assert run(capsys, "experiment", "workspace-map", "-j", "0", "-q")[0] == 1


def test_experiment_named_by_config(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"experiment": {"name": "estimate-k", "pressures": [4.0, 8.0]}}')
    code, out, _ = run(capsys, "experiment", "--config", str(path), "-O", str(tmp_path),
                       "-q", "--summary")
    assert code == 0
    assert "pooled k_hat=" in out
    assert os.path.exists(str(tmp_path / "estimate_k_summary.csv"))

    path.write_text('{"experiment": {"name": "spiral"}}')
    code, _, err = run(capsys, "experiment", "--config", str(path), "-q")
    assert code == 1
    assert "experiment.name" in err


def test_workspace_map_progress_ends_at_100(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"experiment": {"theta_step": 7, "r_levels": [0.6]}}')
    code, _, err = run(capsys, "experiment", "workspace-map", "--config", str(path),
                       "-O", str(tmp_path))
    assert code == 0
    percents = [float(v) for v in re.findall(r"([0-9.]+)% done", err)]
    assert len(percents) == 52
    assert percents[-1] == 100.0


def test_non_utf8_input_is_validation_error(capsys, tmp_path):
    path = tmp_path / "pull.csv"
    path.write_bytes(b"\xff\xfe")
    code, _, err = run(capsys, "calibrate", str(path), "-q")
    assert code == 1
    assert "UTF-8" in err

    path = tmp_path / "cfg.json"
    path.write_bytes(b'{"loop": {"dt": 0.01}, "x": "\xff"}')
    code, _, err = run(capsys, "sim", "--config", str(path), "-q")
    assert code == 1
    assert "UTF-8" in err
