import csv
import io
import json
import math

import pytest

from twistlab import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def stable(report):
    report = json.loads(json.dumps(report))
    del report["provenance"]["volatile"]
    return report


def test_norm_exact(capsys):
    code, out, _ = run_cli(capsys, "norm", "-p", 'vector={"3": 1, "4": 1, "5": 1}')
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["exact"] == "3/2"
    assert row["value"] == 1.5
    assert row["kind"] == "norm" and row["seed"] == 0


def test_norm_spaces(capsys):
    code, out, _ = run_cli(capsys, "norm", "-p", "vector=[3, 4]", "-p", "space=l2")
    assert json.loads(out)["rows"][0]["value"] == 5
    code, out, err = run_cli(capsys, "norm", "-p", "vector=[1]", "-p", "space=T7")
    assert code == 2 and "parameters.space" in err


def test_growth_and_dn(capsys):
    _, out, _ = run_cli(capsys, "growth", "-p", "omega=kalton-peck", "-p", "ns=[4, 16]")
    rows = json.loads(out)["rows"]
    assert [r["value"] for r in rows] == pytest.approx([math.log(2), math.log(4)])
    _, out, _ = run_cli(capsys, "dn", "-p", "space=l2", "-p", "n=4",
                        "-p", 'budget={"placements": 2, "restarts": 1, "max_evals": 200}')
    row = json.loads(out)["rows"][0]
    assert row["estimate"] == pytest.approx(2.0)
    assert row["status"] == "lower bound only"
    assert len(row["witnessId"]) == 12


def test_lsd_and_jl(capsys):
    code, out, _ = run_cli(capsys, "lsd", "-p", "n=12", "-p", "subspaces=3", "--seed", "5")
    assert code == 0
    assert all(not r["violated"] and r["dimF"] <= r["limit"] for r in json.loads(out)["rows"])
    code, out, _ = run_cli(capsys, "jl", "-p", "n=8", "-p", "M=16", "-p", "samples=5")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["distortion"] >= 1 and row["logBase"] == "e"
    code, _, err = run_cli(capsys, "jl", "-p", "n=8", "-p", "M=16", "-p", "targetDim=2")
    assert code == 2 and "floor" in err


def test_duality_rows(capsys):
    code, out, _ = run_cli(capsys, "duality", "-p", "omega=kalton-peck", "-p", "samples=50",
                           "-p", "deltaHat=0.5", "-p", "witnesses=3")
    rows = json.loads(out)["rows"]
    assert [r["check"] for r in rows] == ["upper", "witness", "witness", "witness"]
    assert code == 0
    assert all(r["normW"] == pytest.approx(6.0) for r in rows[1:])


def test_flagged_violation_exit_code(capsys):
    code, out, err = run_cli(capsys, "commutator", "-p", "omega=kalton-peck",
                             "-p", "blocks=[[1], [0, 0, 1], [0, 0, 0, 0, 1]]", "-p", "slack=0.01")
    assert code == 1
    assert json.loads(out)["rows"][0]["violated"]
    assert "violation" in err


def test_determinism_modulo_volatile(tmp_path):
    cfg = {"kind": "delta", "parameters": {"omega": "kalton-peck", "dim": 5, "samples": 200}, "seed": 3}
    a, _ = cli.run(cfg)
    b, _ = cli.run(cfg)
    assert stable(a) == stable(b)
    assert set(a["provenance"]["volatile"]) == {"timestamp", "runtimeSeconds"}
    assert a["provenance"]["engine"]["numpy"]
    c, _ = cli.run({**cfg, "seed": 4})
    assert stable(c) != stable(a)


def test_config_file_and_csv(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    out = tmp_path / "o.csv"
    cfg.write_text(json.dumps({"kind": "centralizer", "format": "csv", "outputPath": str(out),
                               "parameters": {"vector": [1.0, 2.0], "omega": "kalton-peck"}}))
    code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg))
    assert code == 0 and stdout == ""
    raw = out.read_bytes()
    assert b"\r\n" in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert rows[0]["kind"] == "centralizer"
    assert json.loads(rows[0]["value"]).keys() == {"1", "2"}
    assert not list(tmp_path.glob(".tmp-*"))


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "norm", "seed": -1, "extra": 1}))
    code, _, err = run_cli(capsys, "run", "--config", str(bad))
    assert code == 2
    assert "seed" in err and "extra" in err
    code, _, err = run_cli(capsys, "run")
    assert code == 2
    code, _, err = run_cli(capsys, "growth", "--config", str(bad))
    assert code == 2 and "does not match" in err
    code, _, err = run_cli(capsys, "growth", "-p", "ns=[4, 2]")
    assert code == 2 and "parameters.ns" in err
    code, _, err = run_cli(capsys, "dual", "-p", "vector=[1,1,1,1,1,1,1,1,1]")
    assert code == 2 and "cap" in err
    with pytest.raises(SystemExit):
        cli.main(["nope"])


def test_row_schema():
    with pytest.raises(Exception):
        cli.jsonschema.validate({"kind": "norm", "seed": 0}, cli.ROW_SCHEMA)
    cli.jsonschema.validate({"kind": "norm", "seed": 0, "space": "T", "value": 1.0}, cli.ROW_SCHEMA)


def test_cache(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path))
    run_cli(capsys, "norm", "-p", "vector=[0, 0, 1, 1, 1]")
    path = tmp_path / "tsirelson-v1.json"
    table = json.loads(path.read_text())
    assert table["version"] == 1
    assert list(table["entries"].values()) == ["3/2"]
    key = next(iter(table["entries"]))
    assert key.startswith("3-5:")
    # a poisoned entry is served back, showing the cache is consulted
    table["entries"][key] = "7/3"
    path.write_text(json.dumps(table))
    _, out, _ = run_cli(capsys, "norm", "-p", "vector=[0, 0, 1, 1, 1]")
    assert json.loads(out)["rows"][0]["exact"] == "7/3"
