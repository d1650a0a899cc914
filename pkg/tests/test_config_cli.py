import csv
import json
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc import cli
from monoloc.config import PRESETS, ExperimentConfig, load, parse_ini, preset
from monoloc.emit import SCHEMAS, dumps, emit_plotdata, sha256
from monoloc.errors import ConfigError


def test_presets_valid():
    for name in PRESETS:
        cfg = preset(name)
        assert cfg.operator().lam == cfg.lam


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="lamda"):
        parse_ini("[operator]\nlamda = 3\n")
    with pytest.raises(ConfigError, match="section"):
        parse_ini("[operatr]\nlambda = 3\n")


def test_infeasible_scale_lists_available():
    with pytest.raises(ConfigError, match="available: \\[1, 2, 3, 5, 8, 13"):
        parse_ini("[scales]\nqk = 13, 35\n")


def test_tolerance_range():
    with pytest.raises(ConfigError):
        ExperimentConfig(eig_tol=1e-16)


def test_ini_roundtrip():
    cfg = preset("silver-blend0.5-lambda10").with_(seed=7, lam=3.5)
    again = parse_ini(cfg.to_ini())
    assert again == cfg


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 50), st.floats(0, 1, exclude_max=True), st.integers(0, 10**6))
def test_roundtrip_property(lam, x, seed):
    cfg = ExperimentConfig(lam=lam, x=x, seed=seed)
    assert parse_ini(cfg.to_ini()) == cfg


def test_load_file(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[operator]\nlambda = 2\n[energy]\nE = 1.0\n")
    cfg = load(str(p), "golden-sawtooth-lambda10")
    assert cfg.lam == 2.0 and cfg.E == 1.0 and cfg.freq == "golden"


def test_emit_schema(tmp_path):
    rows = [{"E": 0.1, "N": 0.5, "n": 10, "samples": 20, "bc": "periodic"}]
    paths = emit_plotdata(str(tmp_path), "ids", rows, {"a": float("nan")}, gnuplot=True)
    with open(paths[0]) as fh:
        assert next(csv.reader(fh)) == SCHEMAS["ids"]
    assert json.load(open(paths[1])) == {"a": "nan"}
    assert paths[2].endswith("ids.gp")


def test_dumps_sorted():
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')


def run(args, tmp_path, name):
    out = str(tmp_path / name)
    code = cli.main(args + ["--out", out])
    return code, out


def test_cli_lyapunov_free(tmp_path, capsys):
    code, out = run(["lyapunov", "--lambda", "0", "--E", "3"], tmp_path, "ly")
    assert code == 0
    assert "0.9624" in capsys.readouterr().out
    with open(os.path.join(out, "lyapunov.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["gamma_n"]) == pytest.approx(0.9624237, abs=1e-3)


def test_cli_arith(tmp_path):
    code, out = run(["arith", "--freq", "golden", "--depth", "15"], tmp_path, "ar")
    assert code == 0
    with open(os.path.join(out, "gaps.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["q_k"]) for r in rows] == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610]
    s = json.load(open(os.path.join(out, "summary.json")))
    assert s["q"] == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987]


def test_cli_ids_header(tmp_path):
    code, out = run(["ids", "--preset", "golden-sawtooth-lambda2"], tmp_path, "ids")
    assert code == 0
    assert open(os.path.join(out, "ids.csv")).readline().strip() == "E,N,n,samples,bc"


def test_cli_localize_outputs(tmp_path):
    code, out = run(["localize", "--preset", "golden-sawtooth-lambda10", "--n", "600"], tmp_path, "loc")
    assert code == 0
    assert {"pairs.csv", "summary.json", "resolved-config.ini"} <= set(os.listdir(out))


def test_cli_config_error_exit(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[operator]\nlambdaa = 3\n")
    assert cli.main(["ids", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert cli.main(["ldt", "--scales", "13,35", "--out", str(tmp_path / "y")]) == 2


def test_cli_resolved_config_reruns(tmp_path):
    code, out = run(["spectrum", "--preset", "golden-sawtooth-lambda2", "--n", "34"], tmp_path, "a")
    assert code == 0
    code2, out2 = run(["spectrum", "--config", os.path.join(out, "resolved-config.ini"), "--n", "34"],
                      tmp_path, "b")
    assert code2 == 0
    assert sha256(os.path.join(out, "spectrum.csv")) == sha256(os.path.join(out2, "spectrum.csv"))


def test_cli_deterministic_across_threads(tmp_path):
    outs = []
    for t in ("1", "3"):
        code, out = run(["thouless", "--preset", "golden-sawtooth-lambda10", "--threads", t], tmp_path, "t" + t)
        assert code == 0
        outs.append(out)
    for f in ("thouless.csv", "summary.json"):
        assert sha256(os.path.join(outs[0], f)) == sha256(os.path.join(outs[1], f))
