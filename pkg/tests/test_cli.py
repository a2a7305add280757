import json
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import pytest

from helpers import boiler, two_hubs
from hubflow.casestudy import case_study_path, load_case_study
from hubflow.cli import main
from hubflow.lp.mps import read_mps
from hubflow.model import Process
from hubflow.scenario_io import save_scenario, scenario_to_document


def write(scenario, path):
    save_scenario(scenario, path)
    return str(path)


def manifest(out):
    return json.loads((Path(out) / "manifest.json").read_text())


def last_line(text):
    return [ln for ln in text.splitlines() if ln.startswith("hubflow:")][-1]


# -- validate ---------------------------------------------------------------------


def test_validate_case_study(capsys):
    assert main(["validate", str(case_study_path())]) == 0
    out = capsys.readouterr().out
    assert "COEFFICIENT_CONVERTED" in out and "0 fatal" in out


def test_validate_fraction_sum(tmp_path, capsys):
    s = boiler()
    bad = Process("bad", "h", 0.9, (("gas", 0.5), ("gas", 0.6)), (("heat", 1.0),))
    doc = scenario_to_document(replace(s, processes=(bad,)))
    doc["hubs"][0]["processes"][0]["inlets"] = {"gas": 0.5}
    (tmp_path / "s.json").write_text(json.dumps(doc))
    assert main(["validate", str(tmp_path / "s.json")]) == 1
    assert "FRACTION_SUM" in capsys.readouterr().out


def test_validate_missing_series_file(tmp_path, capsys):
    doc = scenario_to_document(boiler(T=2))
    doc["hubs"][0]["ports"][1]["load"] = {"file": "nowhere.csv"}
    (tmp_path / "s.json").write_text(json.dumps(doc))
    assert main(["validate", str(tmp_path / "s.json")]) == 2
    assert "SERIES_FILE" in capsys.readouterr().err


def test_validate_unreadable(tmp_path):
    assert main(["validate", str(tmp_path / "absent.json")]) == 2


# -- solve ------------------------------------------------------------------------


def test_solve_boiler_toy(tmp_path, capsys):
    code = main(["solve", write(boiler(), tmp_path / "b.json"), str(tmp_path / "out")])
    assert code == 0
    m = manifest(tmp_path / "out")
    assert m["objective"] == pytest.approx(100.0, rel=1e-12)
    assert m["status"] == "optimal" and m["exit_status"] == 0
    assert last_line(capsys.readouterr().out).startswith("hubflow: optimal objective=")
    assert (tmp_path / "out" / "totals.csv").is_file()


def test_solve_records_mps_hash(tmp_path):
    out = tmp_path / "out"
    mps = tmp_path / "lp" / "b.mps"
    assert main(["solve", write(boiler(), tmp_path / "b.json"), str(out), "--export-mps", str(mps)]) == 0
    import hashlib
    entry = manifest(out)["outputs"]["mps"]
    assert entry["sha256"] == hashlib.sha256(mps.read_bytes()).hexdigest()
    assert entry["format"] == "free-mps"
    assert read_mps(mps).n == 7


def test_solve_fixed_mps_writes_sidecar(tmp_path):
    mps = tmp_path / "b.mps"
    main(["solve", write(boiler(), tmp_path / "b.json"), str(tmp_path / "o"), "--export-mps", str(mps),
          "--mps-format", "mps"])
    assert (tmp_path / "b.mps.names.json").is_file()


def test_solve_loss_orientation_flag(tmp_path):
    path = write(two_hubs(loss=0.05, load=100.0), tmp_path / "t.json")
    assert main(["solve", path, str(tmp_path / "p")]) == 0
    assert manifest(tmp_path / "p")["objective"] == pytest.approx(105.0)
    assert main(["solve", path, str(tmp_path / "q"), "--loss-orientation", "paper"]) == 0
    m = manifest(tmp_path / "q")
    assert m["options"]["loss_orientation"] == "paper"
    assert m["objective"] < 100.0


def test_solve_infeasible_names_row(tmp_path, capsys):
    s = load_case_study(6)
    ports = tuple(replace(p, load=tuple(100.0 * v for v in p.load)) if p.kind == "load" else p for p in s.ports)
    path = write(replace(s, ports=ports), tmp_path / "x100.json")
    assert main(["solve", path, str(tmp_path / "out")]) == 3
    line = last_line(capsys.readouterr().err)
    fields = dict(f.split("=", 1) for f in line.split()[2:])
    assert line.startswith("hubflow: infeasible row=")
    assert fields["tag"] == "EQ6" and fields["hub"] in ("hub2", "hub3")
    assert float(fields["infeasibility"]) > 0
    m = manifest(tmp_path / "out")
    assert m["exit_status"] == 3 and m["status"] == "infeasible"


def test_solve_unbounded(tmp_path, capsys):
    s = boiler()
    s = replace(s, ports=s.ports + (type(s.ports[0])("h", "heat", "export", price=(50.0,)),))
    assert main(["solve", write(s, tmp_path / "u.json"), str(tmp_path / "out")]) == 4
    assert last_line(capsys.readouterr().err).startswith("hubflow: unbounded")


def test_solve_iteration_limit(tmp_path, capsys):
    path = write(load_case_study(2), tmp_path / "c.json")
    assert main(["solve", path, str(tmp_path / "out"), "--max-iterations", "3"]) == 5
    assert manifest(tmp_path / "out")["options"]["max_iterations"] == 3


def test_solve_fatal_scenario(tmp_path):
    doc = scenario_to_document(boiler())
    doc["hubs"][0]["processes"][0]["inlets"] = {"gas": 0.7}
    (tmp_path / "s.json").write_text(json.dumps(doc))
    assert main(["solve", str(tmp_path / "s.json"), str(tmp_path / "out")]) == 1
    assert manifest(tmp_path / "out")["exit_status"] == 1


def test_solve_unreadable_still_writes_manifest(tmp_path):
    assert main(["solve", str(tmp_path / "absent.json"), str(tmp_path / "out")]) == 2
    assert manifest(tmp_path / "out")["exit_status"] == 2


def test_repeated_solves_are_byte_identical(tmp_path):
    path = write(load_case_study(6), tmp_path / "c.json")
    assert main(["solve", path, str(tmp_path / "a"), "--seed", "1"]) == 0
    assert main(["solve", path, str(tmp_path / "b"), "--seed", "2"]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir() if p.name != "manifest.json")
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    ma, mb = manifest(tmp_path / "a"), manifest(tmp_path / "b")
    assert ma["objective"] == mb["objective"]
    assert ma["outputs"]["bundle"] == mb["outputs"]["bundle"]
    assert (ma["options"]["seed"], mb["options"]["seed"]) == (1, 2)


def test_manifest_hash_tracks_scenario_bytes(tmp_path):
    a = write(boiler(), tmp_path / "a.json")
    b = write(boiler(), tmp_path / "b.json")
    c = write(boiler(load=8.0), tmp_path / "c.json")
    for p, o in ((a, "oa"), (b, "ob"), (c, "oc")):
        main(["solve", p, str(tmp_path / o)])
    ha, hb, hc = (manifest(tmp_path / o)["scenario"]["sha256"] for o in ("oa", "ob", "oc"))
    assert ha == hb != hc


# -- report -----------------------------------------------------------------------


def test_report_fresh_dir(tmp_path, capsys):
    main(["solve", write(boiler(), tmp_path / "b.json"), str(tmp_path / "out")])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "h        import   gas" in out and "audit:" in out


def test_report_tampered_csv(tmp_path, capsys):
    main(["solve", write(boiler(T=3), tmp_path / "b.json"), str(tmp_path / "out")])
    p = tmp_path / "out" / "h__IMP.csv"
    p.write_text("\n".join(p.read_text().splitlines()[:-1]) + "\n")
    assert main(["report", str(tmp_path / "out")]) == 2
    assert "checksum mismatch" in capsys.readouterr().err


def test_report_empty_dir(tmp_path):
    assert main(["report", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "hubflow", "validate", str(case_study_path())],
                         capture_output=True, text=True)
    assert res.returncode == 0
    res = subprocess.run([sys.executable, "-m", "hubflow", "report", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 2
