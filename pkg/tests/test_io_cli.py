from __future__ import annotations

import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from upbv.cli import CSV_COLUMNS, main
from upbv.errors import DomainError
from upbv.families import same_ray_set, upb_ddd
from upbv.io import CONVENTION, dumps, from_dict, loads, read_state_set, to_dict, write_state_set
from upbv.lemmas import Certificate


def test_round_trip_is_lossless(s444, t34, tmp_path):
    for s in (s444, t34):
        path = tmp_path / "s.json"
        write_state_set(s, path)
        back = read_state_set(path)
        assert back.labels == s.labels and back.dims == s.dims and back.name == s.name
        assert np.abs(back.vectors() - s.vectors()).max() <= 1e-15
        assert same_ray_set(back, s)


def test_document_layout(s333):
    doc = json.loads(dumps(s333))
    assert doc["convention"] == CONVENTION
    assert doc["dims"] == [3, 3, 3]
    f = doc["states"][0]["factors"][0]
    assert all(len(z) == 2 for z in f)


@pytest.mark.parametrize(
    "bad",
    [
        "not json",
        "[]",
        '{"dims": [2]}',
        '{"dims": [2, 2], "states": [{"factors": [[[1, 0], [0, 0]]]}]}',
        '{"dims": [2], "states": [{"factors": [[[1, 0, 0]]]}]}',
        '{"dims": [0], "states": []}',
    ],
)
def test_malformed_documents(bad):
    with pytest.raises(DomainError):
        loads(bad)


def test_from_dict_defaults(s333):
    doc = to_dict(s333)
    del doc["name"], doc["notes"], doc["convention"]
    for st in doc["states"]:
        del st["label"]
    back = from_dict(doc)
    assert back.labels[0] == "s0" and len(back) == 19


def test_construct(tmp_path, capsys):
    out = tmp_path / "upb4.json"
    assert main(["construct", "--family", "ddd", "-d", "4", "-o", str(out)]) == 0
    assert len(read_state_set(out)) == 56
    assert main(["construct", "--family", "tiles34", "-o", str(tmp_path / "t.json")]) == 0
    assert len(read_state_set(tmp_path / "t.json")) == 8
    assert main(["construct", "--family", "ddd", "-d", "2", "-o", str(tmp_path / "x.json")]) == 3
    assert main(["construct", "--family", "ddd", "-o", str(tmp_path / "x.json")]) == 3
    assert main(["construct", "--family", "phi3", "-o", str(tmp_path / "x.json")]) == 3
    with pytest.raises(SystemExit) as exc:
        main(["construct", "--family", "nope", "-o", str(tmp_path / "x.json")])
    assert exc.value.code == 3


def test_verify_all_checks(tmp_path, capsys):
    path = tmp_path / "upb4.json"
    write_state_set(upb_ddd(4), path)
    rep = tmp_path / "rep.json"
    assert main(["verify", str(path), "--json", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert {c["verdict"] for c in doc["checks"].values()} == {"PASS"}
    assert set(doc["checks"]) == {"orth", "upb", "strong[BC]", "strong[CA]", "strong[AB]", "ppt"}
    assert doc["tolerances"]["gap_min"] == 1e6 and doc["version"]
    text = capsys.readouterr().out
    assert "gap ratio" in text and "gap_min" in text


def test_verify_tiles_strong_fails_on_b(tmp_path, t34, capsys):
    path = tmp_path / "t.json"
    write_state_set(t34, path)
    assert main(["verify", str(path), "--checks", "strong"]) == 1
    out = capsys.readouterr().out
    line = next(ln for ln in out.splitlines() if "strong[B]" in ln)
    assert "FAIL" in line and "NONTRIVIAL" in line


def test_verify_skips_and_inconclusive(tmp_path, s333, capsys):
    path = tmp_path / "s.json"
    write_state_set(s333, path)
    assert main(["verify", str(path), "--checks", "upb,strong", "--upb-max-d", "2", "--opm-max-d", "2"]) == 0
    assert "SKIPPED" in capsys.readouterr().out
    # a coarse rank tolerance cuts inside the singular spectrum: no confident verdict
    assert main(["verify", str(path), "--checks", "strong", "--tol-rank", "0.3"]) == 2
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_verify_fail_and_usage(tmp_path, s333, capsys):
    path = tmp_path / "s.json"
    write_state_set(s333.without("S"), path)
    assert main(["verify", str(path), "--checks", "orth,upb"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"dims": [2], "states": [')
    assert main(["verify", str(bad)]) == 3
    assert main(["verify", str(tmp_path / "missing.json")]) == 3
    assert main(["verify", str(path), "--checks", "bogus"]) == 3


def test_certify_command(tmp_path, t34, capsys):
    src = tmp_path / "s.json"
    write_state_set(upb_ddd(3), src)
    prefix = tmp_path / "cert333"
    assert main(["certify", str(src), "--cut", "BC", "-o", str(prefix)]) == 0
    cert = Certificate.from_json((tmp_path / "cert333.json").read_text())
    assert cert.residual_dim == 1
    text = (tmp_path / "cert333.txt").read_text()
    steps = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert len(steps) == len(cert.steps) and steps[0].startswith("R1 | ")
    assert "# note: B1 index set read as" in text
    two = tmp_path / "t.json"
    write_state_set(t34, two)
    assert main(["certify", str(two), "-o", str(tmp_path / "c")]) == 3


def test_report_command(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["report", "--dmin", "3", "--dmax", "4", "-o", str(out), "--jobs", "2"]) == 0
    with open(out) as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == CSV_COLUMNS
        rows = list(reader)
    assert [r["size"] for r in rows] == ["19", "56"]
    assert all(r["size"] == r["expected"] for r in rows)
    assert all(r[f"opm_{c}_dim"] == "1" for r in rows for c in ("bc", "ca", "ab"))
    assert main(["report", "--dmin", "5", "--dmax", "4", "-o", str(out)]) == 3
    assert main(["report", "--dmin", "2", "--dmax", "3", "-o", str(out)]) == 3


def test_jobs_env_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("UPBV_JOBS", "3")
    path = tmp_path / "s.json"
    write_state_set(upb_ddd(3), path)
    assert main(["verify", str(path), "--checks", "strong"]) == 0


def test_entry_point(tmp_path):
    exe = shutil.which("upbv")
    cmd = [exe] if exe else [sys.executable, "-m", "upbv.cli"]
    out = tmp_path / "t.json"
    res = subprocess.run(cmd + ["construct", "--family", "tiles34", "-o", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run(cmd + ["verify", str(out), "--checks", "orth,upb"], capture_output=True, text=True)
    assert res.returncode == 0, res.stdout + res.stderr
