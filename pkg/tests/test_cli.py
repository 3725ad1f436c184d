import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from dispersion import cli, experiments
from dispersion.pointsio import PointFileError, read_points

SCHEMA = cli.load_schema()


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    return report


@pytest.fixture
def center(tmp_path):
    f = tmp_path / "center.csv"
    f.write_text("x1,x2\n0.5,0.5\n")
    return f


class TestCompute:
    def test_exact(self, capsys, center):
        r = run_json(capsys, "compute", center, "--method", "exact")
        assert r["result"]["value"] == 0.5
        assert r["result"]["witness"]["empty"] is True
        assert r["manifest"]["subcommand"] == "compute"

    def test_cover(self, capsys, center):
        res = run_json(capsys, "compute", center, "--method", "cover", "--delta", "0.5")["result"]
        assert res["lower"] <= 0.5 <= res["upper"]
        assert res["upper"] - res["lower"] <= 0.5

    def test_brute_and_periodic(self, capsys, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("0.1\n0.6\n")
        assert run_json(capsys, "compute", f, "--method", "brute")["result"]["value"] == pytest.approx(0.5)
        res = run_json(capsys, "compute", f, "--periodic")["result"]
        assert res["value"] == pytest.approx(0.5) and res["witness"]["kind"] == "periodic"
        res = run_json(capsys, "compute", f, "--periodic", "--method", "cover", "--delta", "0.25")["result"]
        assert res["lower"] <= 0.5 <= res["upper"]

    def test_malformed_coordinate(self, capsys, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("x,y\n0.5,0.5\n1.2,0.1\n")
        code, out, err = run(capsys, "compute", f)
        assert code != 0 and out == ""
        assert "row 3" in err and "column 1" in err

    def test_unparsable_cell(self, capsys, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("0.5,0.5\n0.3,abc\n")
        code, _, err = run(capsys, "compute", f)
        assert code == 1 and "row 2, column 2" in err

    def test_ragged_rows(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("0.5,0.5\n0.3\n")
        with pytest.raises(PointFileError, match="row 2"):
            read_points(f)

    def test_method_unavailable(self, capsys, center):
        code, _, err = run(capsys, "compute", center, "--periodic")
        assert code == 1 and "d = 1" in err
        code, _, err = run(capsys, "compute", center, "--method", "cover")
        assert code == 1 and "--delta" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "compute", tmp_path / "nope.csv")
        assert code == 1 and "cannot read" in err

    def test_budget(self, capsys, tmp_path):
        f = tmp_path / "pts.csv"
        np.savetxt(f, np.random.default_rng(0).random((12, 3)), delimiter=",")
        code, _, err = run(capsys, "compute", f, "--method", "brute", "--budget", "100")
        assert code == 1 and "budget" in err

    def test_csv_format(self, capsys, center):
        code, out, _ = run(capsys, "compute", center, "--format", "csv")
        rows = dict(csv.reader(io.StringIO(out)))
        assert float(rows["value"]) == 0.5


class TestEstimate:
    def test_deterministic(self, capsys):
        args = ("estimate", "--n", 8, "--d", 1, "--reps", 1000, "--seed", 7)
        a = run_json(capsys, *args)
        b = run_json(capsys, *args)
        assert cli.payload_bytes(a) == cli.payload_bytes(b)

    def test_no_comparison_when_n_not_above_d(self, capsys):
        res = run_json(capsys, "estimate", "--n", 4, "--d", 4, "--reps", 20, "--seed", 1)["result"]
        assert res["lower_ok"] is None and "requires n > d" in " ".join(res["notes"])

    def test_verdicts(self, capsys):
        res = run_json(capsys, "estimate", "--n", 64, "--d", 2, "--reps", 4000, "--seed", 1)["result"]
        assert res["lower_ok"] is True and res["upper_ok"] is True

    def test_invalid_method_combination(self, capsys):
        code, _, err = run(capsys, "estimate", "--n", 4, "--d", 2, "--reps", 5, "--seed", 1, "--periodic")
        assert code == 1 and "certified" in err

    def test_seed_required(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["estimate", "--n", "4", "--d", "2", "--reps", "5"])
        capsys.readouterr()

    def test_strict(self, capsys, monkeypatch):
        report = experiments.estimate_expected_dispersion(experiments.SimConfig(5, 1, 10, 1))
        report.comparisons[0].ok = False
        monkeypatch.setattr(experiments, "estimate_expected_dispersion", lambda cfg: report)
        args = ["estimate", "--n", 5, "--d", 1, "--reps", 10, "--seed", 1]
        assert run(capsys, *args)[0] == 0
        code, _, err = run(capsys, *args, "--strict")
        assert code == cli.EXIT_VERDICT and "comparisons.0.ok" in err


class TestInverse:
    def test_two_points(self, capsys):
        res = run_json(capsys, "inverse", "--eps", 0.7, "--d", 1, "--reps", 4000, "--seed", 1)["result"]
        assert res["estimate"] == 2 and res["bracket"] == [1, 2]


class TestBounds:
    def test_expected(self, capsys):
        res = run_json(capsys, "bounds", "--n", 100, "--d", 2)["result"]
        row = next(e for e in res["entries"] if e["name"] == "expected_lower")
        assert row["value"] == pytest.approx(0.0051170, abs=2e-7)

    def test_minimal(self, capsys):
        res = run_json(capsys, "bounds", "--eps", 0.1, "--d", 2)["result"]
        assert next(e for e in res["entries"] if e["name"] == "digital_net")["value"] == 327680

    def test_flagged(self, capsys):
        res = run_json(capsys, "bounds", "--eps", 0.5, "--d", 2)["result"]
        minimal = [e for e in res["entries"] if e["name"].startswith("minimal_")]
        assert minimal and not any(e["valid"] for e in minimal)

    def test_log_space_marker(self, capsys):
        res = run_json(capsys, "bounds", "--eps", 0.01, "--d", 300)["result"]
        row = next(e for e in res["entries"] if e["name"] == "digital_net")
        assert row["log_space"] and row["value"] is None and row["log10"] > 300

    @pytest.mark.parametrize("extra", [(), ("--n", 5, "--eps", 0.1)])
    def test_exactly_one_input(self, capsys, extra):
        code, _, err = run(capsys, "bounds", "--d", 2, *extra)
        assert code == 1 and "exactly one" in err

    def test_csv_table(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", 100, "--d", 2, "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[0]["name"] == "expected_lower" and code == 0


class TestSimulate:
    def test_coupon(self, capsys):
        res = run_json(capsys, "simulate", "coupon", "--ell", 64, "--n", 175, "--reps", 20000, "--seed", 1)["result"]
        assert res["tail_prob"] > 0.5

    def test_gaps(self, capsys):
        res = run_json(capsys, "simulate", "gaps", "--n", 10000, "--reps", 2000, "--seed", 1)["result"]
        assert abs(res["statistic"]["mean"] - experiments.EULER_GAMMA) <= 0.1

    def test_anchored(self, capsys):
        res = run_json(capsys, "simulate", "anchored", "--ell", 2, "--d", 2, "--reps", 20000, "--seed", 1)["result"]
        assert abs(res["product"]["mean"] - 4 / 9) <= 4 * res["product"]["stderr"]

    def test_split(self, capsys):
        res = run_json(capsys, "simulate", "split", "--n", 3, "--reps", 10, "--seed", 1)["result"]
        assert res["p_empty"] == 1.0
        code, _, err = run(capsys, "simulate", "split", "--n", 2, "--reps", 10, "--seed", 1)
        assert code == 1 and "n >= 3" in err

    def test_seed_and_reps_required(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["simulate", "gaps", "--n", "10", "--reps", "5"])
        with pytest.raises(SystemExit):
            cli.main(["simulate", "gaps", "--n", "10", "--seed", "5"])
        capsys.readouterr()


class TestGen:
    def test_empty(self, capsys, tmp_path):
        f = tmp_path / "e.csv"
        run_json(capsys, "gen", "--n", 0, "--d", 2, "--seed", 1, "-o", f)
        assert f.read_text() == "x1,x2\n"
        assert run_json(capsys, "compute", f)["result"]["value"] == 1.0

    def test_same_seed_same_file(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_json(capsys, "gen", "--n", 5, "--d", 3, "--seed", 9, "-o", a)
        run_json(capsys, "gen", "--n", 5, "--d", 3, "--seed", 9, "-o", b)
        assert a.read_bytes() == b.read_bytes()

    def test_shape_and_round_trip(self, capsys, tmp_path):
        f = tmp_path / "g.csv"
        run_json(capsys, "gen", "--n", 5, "--d", 3, "--seed", 2, "-o", f)
        p = read_points(f)
        assert len(p) == 5 and p.dim == 3
        assert np.all((p.points >= 0) & (p.points < 1))
        rows = f.read_text().splitlines()
        assert rows[0] == "x1,x2,x3" and len(rows) == 6
        assert run_json(capsys, "compute", f)["result"]["n"] == 5

    def test_unwritable(self, capsys, tmp_path):
        code, _, err = run(capsys, "gen", "--n", 2, "--d", 1, "--seed", 1, "-o", tmp_path / "no" / "x.csv")
        assert code == 1 and "cannot write" in err


class TestRerun:
    def test_rerun_matches_across_workers(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        first = run_json(capsys, "estimate", "--n", 20, "--d", 2, "--reps", 200, "--seed", 3, "--out", out)
        again = run_json(capsys, "rerun", out, "--workers", 4)
        assert cli.payload_bytes(first) == cli.payload_bytes(again)
        assert again["manifest"]["config"]["workers"] == 4

    def test_manifest_only(self, capsys, tmp_path):
        first = run_json(capsys, "bounds", "--n", 10, "--d", 1)
        f = tmp_path / "m.json"
        f.write_text(json.dumps(first["manifest"]))
        assert cli.payload_bytes(run_json(capsys, "rerun", f)) == cli.payload_bytes(first)

    def test_bad_manifest(self, capsys, tmp_path):
        f = tmp_path / "m.json"
        f.write_text("{}")
        code, _, err = run(capsys, "rerun", f)
        assert code == 1 and "report_schema_v1" in err


def test_manifest_fields(capsys):
    m = run_json(capsys, "simulate", "gaps", "--n", 10, "--reps", 5, "--seed", 4)["manifest"]
    assert m["seed"] == 4 and m["schema"] == "report_schema_v1" and m["tool_version"]
    assert m["config"] == {"kind": "gaps", "n": 10, "reps": 5, "seed": 4, "confidence": 0.95, "workers": 1}


def test_verdict_failures():
    assert cli.verdict_failures({"a_ok": False, "b": [{"ok": True}, {"ok": False}], "c_ok": None}) == ["a_ok", "b.1.ok"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "dispersion", "bounds", "--n", "100", "--d", "2"],
                         capture_output=True, text=True, check=True)
    jsonschema.validate(json.loads(out.stdout), SCHEMA)
