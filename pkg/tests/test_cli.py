import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from orlicz_lab import cli, elliptic
from orlicz_lab.fields import Grid, save_field


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = cli.main([*args, "--out", str(out)])
    return code, out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_conjugate_pass_writes_outputs(tmp_path):
    code, out = _run(tmp_path, "conjugate", "--function", '{"family": "power", "q": 3}')
    assert code == 0
    rows = _rows(out / "conjugate.csv")
    assert rows and set(rows[0]) == {"check", "anchor", "value", "target", "tolerance", "verdict"}
    assert all(r["verdict"] == "pass" for r in rows)
    doc = json.loads((out / "conjugate.json").read_text())
    assert doc["config"]["command"] == "conjugate"
    assert (out / "conjugate-curve.csv").exists()
    svgs = list(out.glob("*.svg"))
    assert svgs and svgs[0].read_text().lstrip().startswith("<?xml")


def test_no_plots(tmp_path):
    code, out = _run(tmp_path, "conjugate", "--no-plots")
    assert code == 0 and not list(out.glob("*.svg"))


def test_failed_check_exit_1(tmp_path, capsys):
    code, out = _run(tmp_path, "class-c", "--space", '{"kind": "lorentz", "p": 3, "q": 2}')
    assert code == 1
    assert any(r["verdict"] == "fail" for r in _rows(out / "class-c.csv"))
    assert "FAILED" in capsys.readouterr().err


@pytest.mark.parametrize("args,path", [
    (["conjugate", "--function", '{"family": "power", "q": 0.5}'], "function.q"),
    (["conjugate", "--function", '{"family": "nope"}'], "function.family"),
    (["conjugate", "--function", '{"family": "power", "q": "x"}'], "function.q"),
    (["conjugate", "--function", "{bad json"], "--function"),
    (["class-c", "--space", '{"p": 3}'], "space"),
    (["verify-estimate", "--grid", "3"], "grid"),
    (["boyd", "--c-max", "0.5"], "c_max"),
])
def test_invalid_input_exit_2(tmp_path, capsys, args, path):
    code, _ = _run(tmp_path, *args)
    assert code == 2
    err = capsys.readouterr().err
    assert "invalid input" in err and f"{path}:" in err


def test_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema": "orlicz-lab/1", "bogus": 1}))
    assert _run(tmp_path, "conjugate", "--config", str(cfg))[0] == 2
    assert "bogus: unknown key" in capsys.readouterr().err
    cfg.write_text(json.dumps({"schema": "other/9"}))
    assert _run(tmp_path, "conjugate", "--config", str(cfg))[0] == 2
    assert "schema:" in capsys.readouterr().err
    cfg.write_text(json.dumps({"schema": "orlicz-lab/1", "function": {"family": "power", "q": 1.0}}))
    assert _run(tmp_path, "conjugate", "--config", str(cfg))[0] == 2
    assert "function.q:" in capsys.readouterr().err
    cfg.write_text("[1, 2]")
    assert _run(tmp_path, "conjugate", "--config", str(cfg))[0] == 2
    assert _run(tmp_path, "conjugate", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema": "orlicz-lab/1", "seed": 5,
                               "function": {"family": "power", "q": 3}}))
    code, out = _run(tmp_path, "conjugate", "--config", str(cfg), "--seed", "9")
    doc = json.loads((out / "conjugate.json").read_text())
    assert code == 0 and doc["config"]["seed"] == 9
    assert doc["config"]["function"] == {"family": "power", "q": 3}


def test_precondition_exit_3(tmp_path, capsys):
    # t^3 grows like t^d in three dimensions: the contraction bracket needs growth below that
    code, _ = _run(tmp_path, "contraction", "--function", '{"family": "power", "q": 3}')
    assert code == 3
    assert "Error" in capsys.readouterr().err


def test_deterministic_csv(tmp_path):
    args = ["verify-estimate", "--grid", "9", "--ensemble", "2", "--seed", "4", "--no-plots"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert cli.main(args + ["--out", str(a)]) == cli.main(args + ["--out", str(b)])
    for name in ("verify-estimate.csv", "verify-estimate-ratios.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = tmp_path / "c"
    cli.main(["verify-estimate", "--grid", "9", "--ensemble", "2", "--seed", "5", "--no-plots",
              "--out", str(c)])
    assert (a / "verify-estimate-ratios.csv").read_bytes() != (c / "verify-estimate-ratios.csv").read_bytes()


def test_manifest_with_field_files(tmp_path):
    grid = Grid.cube(9, dim=3)
    F, g = elliptic.random_data(grid, 3)
    save_field(tmp_path / "F.bin", F)
    save_field(tmp_path / "g.bin", g)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "schema": "orlicz-lab/1",
        "manifest": {"function": {"family": "power", "q": 4},
                     "instances": [{"grid": 9, "F": str(tmp_path / "F.bin"),
                                    "g": str(tmp_path / "g.bin")}]}}))
    code, out = _run(tmp_path, "verify-estimate", "--config", str(cfg), "--no-plots")
    assert code in (0, 1)
    rows = _rows(out / "verify-estimate-ratios.csv")
    assert len(rows) == 1 and float(rows[0]["ratio"]) > 0

    # a missing partner file names the field
    bad = json.loads(cfg.read_text())
    del bad["manifest"]["instances"][0]["g"]
    cfg.write_text(json.dumps(bad))
    assert _run(tmp_path, "verify-estimate", "--config", str(cfg))[0] == 2


def test_bad_manifest(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"manifest": {"instances": 3}}))
    assert _run(tmp_path, "verify-estimate", "--config", str(cfg))[0] == 2
    assert "manifest.instances:" in capsys.readouterr().err


@pytest.mark.parametrize("cmd,extra", [
    ("sobolev-conjugate", []), ("associated", []), ("class-c", []), ("boyd", []),
    ("riesz-check", []), ("table1", []),
])
def test_commands_run(tmp_path, cmd, extra):
    code, out = _run(tmp_path, cmd, "--no-plots", *extra)
    assert code in (0, 1)
    assert (out / f"{cmd}.csv").exists() and (out / f"{cmd}.json").exists()


def test_python_m_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "orlicz_lab", "class-c", "--no-plots",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
