import json
from pathlib import Path

import pytest

from symrecur import __version__
from symrecur.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def _csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# schema: recur-csv/1")
    assert lines[1].startswith("# units: ")
    units = dict(kv.split("=", 1) for kv in lines[1][len("# units: "):].split(","))
    header = lines[2].split(",")
    return units, header, [ln.split(",") for ln in lines[3:]]


def test_schedule_make_stdout(capsys):
    rc, out, _ = run(capsys, "schedule", "make", "--a", "0.5", "--b", "1", "--P", "50")
    assert rc == 0
    units, header, rows = _csv(out)
    assert header[:5] == ["p", "ell", "gamma", "gamma_ell", "exp_gamma_ell_log"]
    assert set(header) <= set(units) and len(rows) == 50


def test_moran_a_gt_b(capsys, tmp_path):
    rc, _, err = run(capsys, "moran", "build", "--a", "1", "--b", "0.5", "--k", "9",
                     "--target", "1000", "--seed", "1", "--out", str(tmp_path / "d"))
    assert rc == 1 and "a must not exceed b" in err and len(err.strip().splitlines()) == 1


def test_lang_enum_budget(capsys, monkeypatch):
    rc, _, err = run(capsys, "lang", "enum", "--n", "40")
    assert rc == 2 and "budget" in err
    monkeypatch.setenv("RECUR_BUDGET", "100")
    assert run(capsys, "lang", "enum", "--n", "7")[0] == 2
    assert run(capsys, "lang", "enum", "--n", "6")[0] == 0


@pytest.mark.parametrize("argv", [
    ["lang", "entropy", "--nmax", "4", "--bogus"],
    ["schedule", "make", "--a", "0.5"],
    ["map", "digits", "--alpha", "0", "--beta", "0.5", "--x", "0.1", "--n", "3"],
    ["schedule", "make", "--a", "x", "--b", "1", "--P", "3"],
    ["recur", "ow", "--n", "4", "--horizon", "10", "--seed", "-1"],
])
def test_domain_and_usage_errors_exit_1(capsys, argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 1 and err.strip() and len(err.strip().splitlines()) == 1


@pytest.mark.parametrize("argv,cols", [
    (["lang", "enum", "--n", "4"], ["index", "word"]),
    (["lang", "entropy", "--nmax", "6"], None),
    (["map", "digits", "--alpha", "0", "--beta", "2", "--x", "0.3", "--n", "6"], ["k", "orbit_x", "digit", "flag"]),
    (["map", "cylinder", "--alpha", "0", "--beta", "2", "--word", "011"], None),
    (["diagram", "gap", "--N", "3"], None),
    (["recur", "trace", "--seed", "4", "--length", "2000", "--nmax", "8"], ["n", "tau", "ratio", "determined"]),
    (["recur", "ow", "--n", "4", "--samples", "5", "--horizon", "1000", "--seed", "1"], None),
])
def test_csv_outputs_carry_schema_and_units(capsys, argv, cols):
    rc, out, _ = run(capsys, *argv)
    assert rc == 0
    units, header, rows = _csv(out)
    assert set(header) <= set(units)
    if cols:
        assert header == cols
    assert rows and all(len(r) == len(header) for r in rows)


def test_json_mode(capsys):
    rc, out, _ = run(capsys, "schedule", "make", "--a", "0.5", "--b", "1", "--P", "4", "--json")
    doc = json.loads(out)
    assert rc == 0 and doc["schema"] == "recur-json/1" and len(doc["records"]) == 4
    assert set(doc["records"][0]) <= set(doc["units"])


def test_out_writes_one_manifest_and_replays(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rc, _, _ = run(capsys, "schedule", "make", "--a", "0.5", "--b", "1", "--P", "6", "--out", "s.csv",
                   "--plot", "s.png")
    assert rc == 0
    manifests = list(tmp_path.glob("*manifest*.json"))
    assert len(manifests) == 1
    man = json.loads(manifests[0].read_text())
    assert man["schema"] == "recur-manifest/1" and man["version"] == __version__
    assert "s.csv" in man["artifacts"] and "s.png" not in man["artifacts"]
    assert Path("s.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    first = Path("s.csv").read_bytes()
    rc, out, err = run(capsys, "replay", str(manifests[0]))
    assert rc == 0 and "match" in (out + err)
    assert Path("s.csv").read_bytes() == first


def test_replay_detects_edited_manifest(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run(capsys, "schedule", "make", "--a", "0.5", "--b", "1", "--P", "6", "--out", "s.csv")
    mf = next(tmp_path.glob("*manifest*.json"))
    man = json.loads(mf.read_text())
    man["digest"] = "0" * 64
    mf.write_text(json.dumps(man))
    assert run(capsys, "replay", str(mf))[0] == 1


SCHED = "ell,gamma\n12,0.35\n22,0.24545454545454545\n32,0.20625\n"


def test_moran_build_verify_dim(capsys, tmp_path):
    (tmp_path / "sch.csv").write_text(SCHED)
    d = tmp_path / "mb"
    rc, out, err = run(capsys, "moran", "build", "--a", "0", "--b", "0", "--k", "5", "--target", "3000",
                       "--seed", "1", "--schedule", str(tmp_path / "sch.csv"), "--out", str(d))
    assert rc == 0, err
    assert sorted(p.name for p in d.iterdir()) == ["ledger.json", "manifest.json", "prefix.txt", "verify.csv"]
    assert json.loads((d / "ledger.json").read_text())["schema"] == "recur-ledger/1"
    rc, out, _ = run(capsys, "moran", "verify", "--dir", str(d))
    units, header, rows = _csv(out)
    assert rc == 0 and len(rows) == 3
    assert all(r[header.index("equal")] == "true" for r in rows)
    rc, out, _ = run(capsys, "moran", "dim", "--dir", str(d), "--json")
    assert rc == 0 and json.loads(out)["meta"]["bound"] > 0
    rc, out, err = run(capsys, "replay", str(d / "manifest.json"))
    assert rc == 0 and "match" in (out + err)


def test_moran_verify_fails_on_tampered_prefix(capsys, tmp_path):
    (tmp_path / "sch.csv").write_text(SCHED)
    d = tmp_path / "mb"
    run(capsys, "moran", "build", "--a", "0", "--b", "0", "--k", "5", "--target", "3000",
        "--seed", "1", "--schedule", str(tmp_path / "sch.csv"), "--out", str(d))
    text = (d / "prefix.txt").read_text()
    (d / "prefix.txt").write_text(text.replace("01", "10", 1))
    assert run(capsys, "moran", "verify", "--dir", str(d))[0] == 1


def test_diagram_build_dump(capsys, tmp_path):
    out = tmp_path / "d.txt"
    assert run(capsys, "diagram", "build", "--N", "3", "--out", str(out))[0] == 0
    assert out.read_text().splitlines()[0].endswith("recur-diagram/1")


def test_model_file(capsys, tmp_path):
    f = tmp_path / "gm.txt"
    f.write_text(json.dumps({"schema": "recur-model/1", "kind": "sft", "m": 2, "forbidden": ["11"]}))
    rc, out, err = run(capsys, "lang", "enum", "--model", str(f), "--n", "5")
    assert rc == 0, err
    _, _, rows = _csv(out)
    assert len(rows) == 13
