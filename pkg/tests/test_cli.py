import hashlib
import json
import subprocess
import sys

import pytest

from vvkrr.cli import main

QUICK = """[experiment]
config_id = quick
ns = 16, 32, 64, 128
n_seeds = 3
tolerance = 0.5
[spectral]
I_max = 64
[target]
d_Y = 2
"""


@pytest.fixture
def quick_config(tmp_path):
    path = tmp_path / "quick.ini"
    path.write_text(QUICK)
    return path


def run(args):
    return main([str(a) for a in args])


def test_run_rates_artifacts_and_determinism(quick_config, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["run-rates", quick_config, "--output-dir", out1]) == 0
    assert run(["run-rates", quick_config, "--output-dir", out2]) == 0
    for name in ("cells.csv", "summary.txt", "rates.dat"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["master_seed"] == 0 and manifest["command"] == "run-rates"
    assert set(manifest["versions"]) >= {"vvkrr", "numpy", "scipy", "python"}
    for name, digest in manifest["artifacts"].items():
        assert hashlib.sha256((out1 / name).read_bytes()).hexdigest() == digest
    assert "[target]" in manifest["config"]


def test_seed_changes_data(quick_config, tmp_path):
    run(["run-rates", quick_config, "--output-dir", tmp_path / "a"])
    run(["run-rates", quick_config, "--output-dir", tmp_path / "b", "--seed", "7"])
    assert (tmp_path / "a/cells.csv").read_bytes() != (tmp_path / "b/cells.csv").read_bytes()
    assert json.loads((tmp_path / "b/manifest.json").read_text())["master_seed"] == 7


def test_wrong_theory_exponent_fails(quick_config, tmp_path):
    code = run(["run-rates", quick_config, "--output-dir", tmp_path,
                "--set", "experiment.theory_exponent=3", "--set", "experiment.tolerance=0.12"])
    assert code == 1


def test_config_errors_exit_2(quick_config, tmp_path, capsys):
    assert run(["run-rates", quick_config, "--set", "target.beta=3"]) == 2
    assert "(0, 2]" in capsys.readouterr().err
    assert run(["run-rates", quick_config, "--set", "target.colour=red"]) == 2
    assert "target.colour" in capsys.readouterr().err
    assert run(["run-rates", quick_config, "--set", "broken"]) == 2


def test_missing_config_file_exit_3(tmp_path, capsys):
    assert run(["edim", tmp_path / "absent.ini"]) == 3
    assert "absent.ini" in capsys.readouterr().err


def test_bias_check(tmp_path):
    assert run(["bias-check", "--output-dir", tmp_path]) == 0
    lines = (tmp_path / "bias.csv").read_text().splitlines()
    assert lines[0] == "lambda,bias,bound" and len(lines) == 26
    for line in lines[1:]:
        lam, bias, bound = map(float, line.split(","))
        assert bias <= bound


def test_edim(tmp_path):
    assert run(["edim", "--output-dir", tmp_path]) == 0
    assert run(["edim", "--output-dir", tmp_path, "--set", "spectral.p=0.25"]) == 1
    assert (tmp_path / "edim.csv").read_text().startswith("lambda,N,N_lambda_p\n")


def test_lower_bound_demo(tmp_path, capsys):
    code = run(["lower-bound-demo", "--output-dir", tmp_path, "--set", "lowerbound.trials=200",
                "--set", "lowerbound.pairs=2", "--set", "spectral.I_max=64"])
    assert code == 0
    out = capsys.readouterr().out
    assert "0 violations in 200 trials" in out and out.rstrip().endswith("PASS")
    assert len((tmp_path / "kl.csv").read_text().splitlines()) == 1 + 2 * 3


def test_sobolev_demo(tmp_path):
    args = ["sobolev-demo", "--output-dir", tmp_path, "--set", "kernel.family=matern",
            "--set", "target.kind=kernel-expansion", "--set", "experiment.ns=32,64,128,256",
            "--set", "experiment.n_seeds=2", "--set", "experiment.tolerance=1.0",
            "--set", "sobolev.nystrom_m=400"]
    assert run(args) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert 0.35 <= manifest["result"]["p_hat"] <= 0.65
    assert {"cells.csv", "summary.txt", "rates.dat", "nystrom.csv"} <= set(manifest["artifacts"])
    assert run(["sobolev-demo", "--output-dir", tmp_path]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vvkrr", "edim", "--output-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
