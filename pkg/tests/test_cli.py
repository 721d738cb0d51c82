import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from responsum import cli
from responsum.config import dumps, parse_config, parse_dict, system_to_dict
from responsum.errors import NonConvergence, ParseError, ValidationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

LINEAR = {
    "system": {"m": 1, "d": 1, "omega": [1.0], "damping": [[1.0]], "potential": "0.5 x1^2",
               "forcing": [{"nu": [1], "re": [1.0], "im": [0.0]}]},
    "solve": {"epsilon": 0.1},
}


def write(tmp_path, obj, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_parse_minimal(tmp_path):
    cfg = parse_config(write(tmp_path, LINEAR))
    assert cfg.system.m == 1
    assert cfg.solve["K_max"] == 8 and cfg.solve["epsilon"] == 0.1
    assert cfg.system.forcing[(-1,)] == pytest.approx([1.0])


def test_parse_errors(tmp_path):
    bad = json.loads(json.dumps(LINEAR))
    bad["system"].update(m=2, damping=[[1, 2], [0, 1]], potential="0.5 x1^2 + 0.5 x2^2", forcing=[])
    with pytest.raises(ValidationError, match="damping not symmetric"):
        parse_config(write(tmp_path, bad))
    neg = json.loads(json.dumps(LINEAR))
    neg["solve"]["epsilon"] = -0.1
    with pytest.raises(ValidationError):
        parse_config(write(tmp_path, neg))
    (tmp_path / "broken.json").write_text('{"system":\n  [1, 2,\n')
    with pytest.raises(ParseError, match="line"):
        parse_config(tmp_path / "broken.json")
    with pytest.raises(ParseError, match="unknown"):
        parse_dict({**LINEAR, "extra": 1})
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.json")


def test_inconsistent_hermitian_pair_warns():
    obj = json.loads(json.dumps(LINEAR))
    obj["system"]["forcing"] = [{"nu": [1], "re": [1.0], "im": [0.0]}, {"nu": [-1], "re": [2.0], "im": [0.0]}]
    with pytest.warns(UserWarning, match="not conjugate"):
        cfg = parse_dict(obj)
    assert cfg.system.forcing[(-1,)] == pytest.approx([1.0])


@pytest.mark.parametrize("name", ["linear", "cubic", "two_frequency", "forced_potential"])
def test_round_trip(name):
    cfg = parse_config(CONFIGS / f"{name}.json")
    again = parse_dict(json.loads(json.dumps(cfg.to_dict())))
    assert dumps(again.to_dict()) == dumps(cfg.to_dict())
    assert system_to_dict(again.system) == system_to_dict(cfg.system)


def test_dumps_canonical():
    text = dumps({"b": [1.0, float("nan")], "a": {"y": 0.1, "x": np.float64(1 / 3)}, "c": True})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "0.10000000000000001" in text and "null" in text
    assert json.loads(text)["a"]["x"] == 1 / 3


def test_solve_linear(tmp_path):
    assert cli.main(["solve", "--config", str(CONFIGS / "linear.json"), "--out", str(tmp_path)]) == 0
    sol = json.loads((tmp_path / "solution.json").read_text())
    modes = {tuple(m["nu"]): complex(m["re"][0], m["im"][0]) for m in sol["modes"]}
    assert modes[(1,)] == pytest.approx(-0.1j, abs=1e-16)
    assert modes[(-1,)] == pytest.approx(0.1j, abs=1e-16)
    assert sol["zeta"] == [0.0] and sol["u_sup_norm"] == pytest.approx(0.2)


def test_oracle_cubic(tmp_path):
    rc = cli.main(["oracle", "--config", str(CONFIGS / "cubic.json"), "--out", str(tmp_path), "--k", "4", "--nu", "3"])
    assert rc == 0
    rep = json.loads((tmp_path / "oracle.json").read_text())
    assert rep["abs_diff"] <= 1e-10
    assert rep["counting_checks"]["all_pass"]
    assert rep["k"] == 4 and rep["nu"] == [3]


def test_bounds_two_frequency(tmp_path):
    rc = cli.main(["bounds", "--config", str(CONFIGS / "two_frequency.json"), "--out", str(tmp_path), "--N", "2"])
    assert rc == 0
    rep = json.loads((tmp_path / "bounds.json").read_text())
    assert rep["sN"] == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert rep["violations"] == 0


def test_sweep_linear(tmp_path):
    assert cli.main(["sweep", "--config", str(CONFIGS / "linear.json"), "--out", str(tmp_path)]) == 0
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["epsilon"]) for r in rows] == [0.1, 0.01, 0.001, 0.0001]
    for r in rows:
        assert float(r["u_sup_norm"]) == pytest.approx(2 * float(r["epsilon"]), abs=1e-12)


def test_verify_and_integrate(tmp_path):
    args = ["--config", str(CONFIGS / "forced_potential.json"), "--out", str(tmp_path)]
    assert cli.main(["verify"] + args) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["residual"]["sup"] <= 1e-8
    assert rep["attractor_deviation"] <= 1e-5
    assert rep["integrator"]["steps"] > 0
    assert cli.main(["integrate"] + args) == 0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,x_1,x_2,v_1,v_2"


def test_exit_codes(tmp_path, monkeypatch, capsys):
    bad = json.loads(json.dumps(LINEAR))
    bad["solve"]["epsilon"] = -1.0
    assert cli.main(["solve", "--config", str(write(tmp_path, bad))]) == 3
    assert "responsum.config" in capsys.readouterr().err

    def boom(*args, **kwargs):
        raise NonConvergence("forced failure")

    monkeypatch.setattr(cli.bifurcation, "solve_zeta", boom)
    assert cli.main(["solve", "--config", str(write(tmp_path, LINEAR)), "--out", str(tmp_path)]) == 2
    assert "forced failure" in capsys.readouterr().err


def test_overrides(tmp_path):
    args = ["solve", "--config", str(CONFIGS / "linear.json"), "--out", str(tmp_path), "--epsilon", "0.01",
            "--kmax", "2", "--ntrunc", "3"]
    assert cli.main(args) == 0
    sol = json.loads((tmp_path / "solution.json").read_text())
    assert sol["epsilon"] == 0.01 and len(sol["per_order_norms"]) == 2


def test_deterministic_output(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / str(i)
        assert cli.main(["solve", "--config", str(CONFIGS / "two_frequency.json"), "--out", str(out)]) == 0
        outs.append((out / "solution.json").read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "responsum", "bounds", "--config", str(CONFIGS / "linear.json"),
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "bounds.json").exists()
