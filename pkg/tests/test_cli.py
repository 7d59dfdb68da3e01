import csv
import json
import shutil
import subprocess

import pytest

from snapkit.cli import main
from snapkit.model import load_framework, save_framework

from conftest import fixture_path
from test_rigidity import collinear_triangle


@pytest.fixture()
def collinear_file(tmp_path):
    fw, cfg = collinear_triangle()
    p = tmp_path / "collinear.json"
    save_framework(fw, cfg, str(p))
    return str(p)


@pytest.fixture()
def missing_edge_file(tmp_path):
    doc = json.load(open(fixture_path("ex1_bars_gl")))
    doc["edges"] = doc["edges"][:-1]
    p = tmp_path / "missing_edge.json"
    p.write_text(json.dumps(doc))
    return str(p)


def run_json(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_check_valid_framework(tmp_path):
    code, doc = run_json(["check", fixture_path("ex1_bars_gl")], tmp_path)
    assert code == 0
    assert doc["valid"] and doc["isostatic"] and not doc["shaky"]
    assert doc["violations"] == []


def test_check_missing_edge_fails(missing_edge_file, tmp_path):
    code, doc = run_json(["check", missing_edge_file], tmp_path)
    assert code == 1
    assert not doc["valid"]
    assert any("count condition" in v for v in doc["violations"])


def test_check_shaky_fails(collinear_file, tmp_path):
    code, doc = run_json(["check", collinear_file], tmp_path)
    assert code == 1
    assert doc["shaky"]
    assert "realization is shaky" in doc["violations"]


def test_snap_on_shaky_input_is_precondition_error(collinear_file, capsys):
    code = main(["snap", collinear_file])
    assert code == 2
    assert "precondition error" in capsys.readouterr().err


def test_malformed_json_is_validation_error(tmp_path, capsys):
    p = tmp_path / "garbage.json"
    p.write_text("{oops")
    assert main(["check", str(p)]) == 1
    assert "validation error" in capsys.readouterr().err


def test_model_override_rejects_ce_plates(capsys):
    assert main(["check", fixture_path("ex1_plate_gl"), "--model", "ce"]) == 1
    assert "bar-only" in capsys.readouterr().err


def test_energy_report(tmp_path):
    code, doc = run_json(["energy", fixture_path("ex1_plate_gl_red")], tmp_path)
    assert code == 0
    assert len(doc["edge_lengths"]) == 6
    labels = [e["element"] for e in doc["elements"]]
    assert labels == ["bar(1,4)", "bar(2,5)", "bar(3,6)", "plate(4,5,6)"]
    total = sum(e["energy"] for e in doc["elements"])
    assert total == pytest.approx(doc["total_energy"], rel=1e-12)
    assert doc["density"] == pytest.approx(doc["total_energy"] / 44.0, rel=1e-12)


def test_critical_newton_report(tmp_path):
    code, doc = run_json(["critical", fixture_path("ex1_bars_ce"),
                          "--starts", "800", "--seed", "0"], tmp_path)
    assert code == 0
    assert doc["solver"] == "newton"
    assert doc["path_statistics"] is None
    dens = doc["quotient_densities"]
    assert dens == sorted(dens)
    assert doc["quotient_size"] == len(dens) > 0


def test_snap_reports_are_byte_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["snap", fixture_path("ex1_bars_ce"), "--starts", "1500"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["value"] == pytest.approx(1.8285641e-06, rel=1e-5)


def test_seed_env_fallback(tmp_path, monkeypatch):
    args = ["snap", fixture_path("ex1_bars_ce"), "--starts", "1000"]
    monkeypatch.setenv("SNAPKIT_SEED", "3")
    env_out = run_json(args, tmp_path, "env.json")[1]
    monkeypatch.delenv("SNAPKIT_SEED")
    flag_out = run_json(args + ["--seed", "3"], tmp_path, "flag.json")[1]
    assert env_out == flag_out


def test_track_between_fixtures(tmp_path):
    csv_path = tmp_path / "path.csv"
    code, doc = run_json(["track", fixture_path("ex1_bars_gl"),
                          "--target", fixture_path("ex1_bars_gl_red"),
                          "--csv", str(csv_path)], tmp_path)
    assert code == 0
    assert doc["success"]
    assert doc["endpoint_gap"] < 1e-8
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    assert header[0] == "t"
    assert header[1:4] == ["k1x", "k1y", "k2x"]
    assert header[-1] == "bar(5,6)"
    assert len(rows) == doc["samples"] + 1


def test_plot_overlay_svg(tmp_path):
    svg = tmp_path / "fig.svg"
    code = main(["plot", fixture_path("ex1_plate_gl"),
                 "--overlay", fixture_path("ex1_plate_gl_red"),
                 "--overlay", fixture_path("ex1_bars_gl"),
                 "--svg", str(svg)])
    assert code == 0
    text = svg.read_text()
    assert text.count("<g id=") == 3
    assert text.count("<text") == 6          # knot labels on the base layer
    assert text.count("<polygon") == 3       # plate drawn in every layer
    svg2 = tmp_path / "fig2.svg"
    main(["plot", fixture_path("ex1_plate_gl"),
          "--overlay", fixture_path("ex1_plate_gl_red"),
          "--overlay", fixture_path("ex1_bars_gl"),
          "--svg", str(svg2)])
    assert svg.read_bytes() == svg2.read_bytes()


def test_plot_without_svg_flag_fails(capsys):
    assert main(["plot", fixture_path("ex1_bars_gl")]) == 1
    capsys.readouterr()


def test_compare_prints_table(tmp_path, capsys):
    code = main(["compare", fixture_path("ex1_bars_ce"),
                 fixture_path("ex1_bars_ce_red"), "--starts", "1200",
                 "--out", str(tmp_path / "cmp.json")])
    assert code == 0
    table = capsys.readouterr().out
    assert table.splitlines()[0].startswith("variant")
    assert "ex1_bars_ce.json" in table
    doc = json.loads((tmp_path / "cmp.json").read_text())
    assert len(doc["rows"]) == 2


@pytest.mark.skipif(shutil.which("snapkit") is None,
                    reason="console script not installed")
def test_console_script_roundtrip(tmp_path):
    out = subprocess.run(["snapkit", "check", fixture_path("ex1_bars_gl")],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["valid"]
