import csv
import io
import json
import math
import subprocess
import sys

import pytest

from noded_schottky.cli import CSV_COLUMNS, check_report, main, parse_path
from noded_schottky.family import NODED_POINT, ParameterPoint


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_deep_interior(capsys):
    code, out, err = run(capsys, "check", "--p", "0.9", "--r", "0.1")
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "pass"
    assert [row["class"] for row in report["pinch"]["rows"]] == ["loxodromic"] * 6


def test_check_noded(capsys):
    code, out, _ = run(capsys, "check", "--p", "noded", "--r", "noded")
    assert code == 0
    rows = json.loads(out)["pinch"]["rows"]
    assert all(row["class"] == "parabolic" for row in rows)
    assert all(abs(complex(*row["trace_squared"]) - 4) < 1e-9 for row in rows)


def test_check_outside_domain(capsys):
    code, out, _ = run(capsys, "check", "--p", "0.4", "--r", "0.1")
    assert code == 1
    report = json.loads(out)
    assert report["membership"]["violated"] == "p>1/2"
    assert report["verdict"] == "fail"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", "--p", "abc", "--r", "0.1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    code, out, err = run(capsys, "check", "--p", "0.9")
    assert code == 2 and out == "" and "required" in err
    code, _, _ = run(capsys, "sweep", "--grid", "0.5:0.9:0,0.1:0.2:3")
    assert code == 2


def test_json_is_byte_stable(capsys):
    _, out, _ = run(capsys, "check", "--p", "0.7", "--r", "0.2")
    assert json.dumps(json.loads(out), indent=2) + "\n" == out


def test_noded_token_is_exact():
    assert NODED_POINT.r == (math.sqrt(7.0) - math.sqrt(3.0)) / 2
    pts = parse_path("noded", "noded", 1)
    assert pts[0] == NODED_POINT


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_path_into_noded_point(capsys):
    code, out, _ = run(capsys, "sweep", "--path-from", "0.9,0.1", "--path-to", "noded", "--steps", "50")
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0]) == CSV_COLUMNS
    assert len(rows) == 50
    assert float(rows[0]["p"]) == 0.9 and float(rows[-1]["r"]) == NODED_POINT.r
    for g in ("g1", "g2", "g3", "g4", "g5", "g6"):
        lengths = [float(r[f"length_{g}"]) for r in rows]
        assert lengths[-1] < 0.05
        assert lengths[-1] == min(lengths)


def test_single_point_sweep_matches_check(capsys):
    _, out, _ = run(capsys, "sweep", "--grid", "0.9:0.9:1,0.1:0.1:1")
    (row,) = read_csv(out)
    report = check_report(ParameterPoint(0.9, 0.1))
    for k, pinch in enumerate(report["pinch"]["rows"], start=1):
        assert float(row[f"t2_re_g{k}"]) == pinch["trace_squared"][0]
        assert float(row[f"length_g{k}"]) == pinch["translation_length"]


def test_sweep_rows_outside_domain(capsys):
    _, out, _ = run(capsys, "sweep", "--grid", "0.3:0.9:3,0.1:0.1:1")
    rows = read_csv(out)
    assert rows[0]["in_F"] == "false"
    assert all(rows[0][c] == "" for c in CSV_COLUMNS[3:])
    assert rows[2]["in_F"] == "true"


def test_limitset_writes_identical_files(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    code, out, err = run(capsys, "limitset", "--p", "0.9", "--r", "0.1", "--out", str(a))
    assert code == 0 and out == ""
    assert "points" in err and "merged" in err
    run(capsys, "limitset", "--p", "0.9", "--r", "0.1", "--out", str(b), "--workers", "3")
    assert a.read_bytes() == b.read_bytes()
    points = int(err.split("points ")[1].split()[0])
    assert points >= 1000


def test_limitset_depth_zero_and_ppm(tmp_path, capsys):
    out_file = tmp_path / "e.ppm"
    code, _, err = run(capsys, "limitset", "--p", "0.9", "--r", "0.1", "--depth", "0",
                       "--format", "ppm", "--out", str(out_file))
    assert code == 0 and "warning" in err
    assert out_file.read_bytes().startswith(b"P6")


def test_limitset_unwritable(capsys):
    code, _, err = run(capsys, "limitset", "--p", "0.9", "--r", "0.1", "--depth", "2",
                       "--out", "/nonexistent-dir/x.svg")
    assert code == 2 and "cannot write" in err


def test_limitset_bad_viewport(capsys):
    code, _, _ = run(capsys, "limitset", "--p", "0.9", "--r", "0.1", "--viewport", "1,1,0,1",
                     "--out", "/tmp/never.svg")
    assert code == 2


def test_witness_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "--p", "0.9", "--r", "0.1")
    assert code == 0
    assert json.loads(out)["verdict"] == "witness-found"
    code, out, _ = run(capsys, "witness", "--p", "0.51", "--r", "0.45")
    assert code == 3
    payload = json.loads(out)
    assert payload["margin_trace"] and "note" in payload
    target = tmp_path / "w.json"
    code, out, _ = run(capsys, "witness", "--p", "0.9", "--r", "0.1", "--budget", "0", "--out", str(target))
    assert code == 3 and out == ""
    assert json.loads(target.read_text())["iterations"] == 0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "noded_schottky", "check", "--p", "0.9", "--r", "0.1"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["verdict"] == "pass"
