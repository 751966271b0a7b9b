import csv
import io
import json
import subprocess
import sys

import pytest

from nullcontact.cli import main

BALL = {"kind": "ellipsoid", "a": 1, "b": 1}
SPECS = {
    "ball": BALL,
    "e12": {"kind": "ellipsoid", "a": 1, "b": 2},
    "diamond": {"kind": "diamond"},
    "dilated": {"kind": "transformed", "base": BALL, "dilate": 2.0},
    "boosted": {"kind": "transformed", "base": BALL, "boost": {"rapidity": 0.5, "axis": [1, 0]},
                "translate": [0.3, 0.2, -0.1]},
    "flat": {"kind": "revolution", "rho_poly": [1, 0, 1, 0, -1]},
    "negative": {"kind": "ellipsoid", "a": -1, "b": 1},
}


@pytest.fixture(scope="module")
def spec_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("specs")
    for name, spec in SPECS.items():
        (d / f"{name}.json").write_text(json.dumps(spec))
    (d / "broken.json").write_text('{"kind": "ellipsoid", "a": 1')
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rotation_both(capsys, spec_dir):
    code, out, _ = run(capsys, "rotation", "--region", spec_dir / "ball.json")
    doc = json.loads(out)
    assert code == 0
    assert doc["header"]["command"] == "rotation"
    assert doc["result"]["delta"] < 1e-4


def test_rotation_diamond(capsys, spec_dir):
    code, out, _ = run(capsys, "rotation", "--region", spec_dir / "diamond.json", "--method", "trace")
    assert code == 0 and abs(json.loads(out)["result"]["total_angle"]) < 1e-6


def test_rotation_quadrature_needs_revolution(capsys, spec_dir):
    code, _, err = run(capsys, "rotation", "--region", spec_dir / "diamond.json",
                       "--method", "quadrature")
    assert code == 3 and "error" in err


def test_rotation_disagreement_exit(capsys, spec_dir):
    code, _, _ = run(capsys, "rotation", "--region", spec_dir / "ball.json", "--method", "both",
                     "--tol-agree", "1e-18")
    assert code == 4


@pytest.mark.parametrize("other, expected", [("diamond", 0), ("dilated", 1), ("e12", 0)])
def test_compare_exit_codes(capsys, spec_dir, other, expected):
    code, out, _ = run(capsys, "compare", "--region", spec_dir / "ball.json",
                       "--region", spec_dir / f"{other}.json")
    assert code == expected
    assert json.loads(out)["result"]["verdict"] in ("Distinguished", "IndistinguishableByInvariant")


@pytest.mark.slow
def test_compare_boosted(capsys, spec_dir):
    code, out, _ = run(capsys, "compare", "--region", spec_dir / "ball.json",
                       "--region", spec_dir / "boosted.json")
    assert code == 1


def test_compare_needs_two_regions(capsys, spec_dir):
    code, _, _ = run(capsys, "compare", "--region", spec_dir / "ball.json")
    assert code == 2


@pytest.mark.parametrize("name, code", [("broken", 2), ("negative", 3), ("missing", 2)])
def test_spec_failures(capsys, spec_dir, name, code):
    assert run(capsys, "classify", "--region", spec_dir / f"{name}.json")[0] == code


def test_classify_diamond_is_invalid(capsys, spec_dir):
    assert run(capsys, "classify", "--region", spec_dir / "diamond.json")[0] == 3


def test_bad_flags_exit_2(spec_dir):
    with pytest.raises(SystemExit) as exc:
        main(["rotation", "--region", str(spec_dir / "ball.json"), "--samples", "4"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_classify_csv(capsys, spec_dir):
    code, out, _ = run(capsys, "classify", "--region", spec_dir / "ball.json", "--samples", "9")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == (9 + 2) * 8  # the two latitudes are added to the grid
    assert {r["class"] for r in rows} >= {"TimelikePart", "SpacelikePart", "LightlikePart"}


def test_check_convexity(capsys, spec_dir):
    code, out, _ = run(capsys, "check-convexity", "--region", spec_dir / "ball.json", "--samples", "8")
    assert code == 0 and json.loads(out)["result"]["passed"]
    code, out, _ = run(capsys, "check-convexity", "--region", spec_dir / "flat.json", "--samples", "8")
    assert code == 3 and not json.loads(out)["result"]["passed"]


def test_foliation_and_torus(capsys, spec_dir, tmp_path):
    torus = tmp_path / "torus.csv"
    code, out, _ = run(capsys, "foliation", "--region", spec_dir / "ball.json", "--samples", "8",
                       "--torus", torus)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and {r["branch"] for r in rows} >= {"Plus", "Minus"}
    assert len(torus.read_text().splitlines()) == 65


def test_dividing(capsys, spec_dir):
    code, out, _ = run(capsys, "dividing", "--region", spec_dir / "e12.json", "--samples", "8",
                       "--format", "json")
    res = json.loads(out)["result"]
    assert code == 0 and res["count"] == 2 and res["report"]["ok"]


def test_seventeen_digits(capsys, spec_dir):
    _, out, _ = run(capsys, "rotation", "--region", spec_dir / "ball.json", "--method", "quadrature")
    assert '"total_angle": 2.6025805691372139' in out


def test_outputs_are_deterministic(spec_dir, tmp_path):
    for cmd, extra in (("foliation", ["--samples", "8"]), ("rotation", [])):
        outs = []
        for k in range(2):
            path = tmp_path / f"{cmd}{k}"
            assert main([cmd, "--region", str(spec_dir / "ball.json"), "--out", str(path)] + extra) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


def test_selftest_quick_and_forced_failure(capsys):
    code, out, _ = run(capsys, "selftest", "--quick")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "selftest", "--quick", "--tol-trace", "1e-15", "--format", "json")
    results = json.loads(out)["result"]
    assert code == 5
    assert [c["criterion"] for c in results if not c["passed"]] == [1]


def test_console_entry_point(spec_dir):
    proc = subprocess.run([sys.executable, "-m", "nullcontact.cli", "compare",
                           "--region", str(spec_dir / "ball.json"),
                           "--region", str(spec_dir / "diamond.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "Distinguished" in proc.stdout
