import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from quarticsos.ar3 import CSV_HEADER
from quarticsos.cli import EXIT_INPUT, EXIT_NOT_CERTIFIED, EXIT_NOT_STATIONARY, EXIT_OK, loglog_slope, main
from quarticsos.io import load_model, model_to_dict, save_model
from quarticsos.problems import make_ahmadi, make_euclidean_example

from reference import random_model


@pytest.fixture
def euclid_file(tmp_path):
    p = tmp_path / "euclid.json"
    save_model(make_euclidean_example(1.0), p)
    return str(p)


@pytest.fixture
def ahmadi_file(tmp_path):
    p = tmp_path / "ahmadi.json"
    p.write_text(json.dumps(model_to_dict(make_ahmadi(4.0))))
    return str(p)


def _run(capsys, *args):
    code = main(list(args))
    return code, capsys.readouterr().out


class TestCertify:
    def test_euclidean_certified(self, capsys, euclid_file):
        code, out = _run(capsys, "certify", euclid_file)
        assert code == EXIT_OK
        assert json.loads(out)["certificate"]["kind"] == "QQR"

    def test_ahmadi_violated(self, capsys, ahmadi_file):
        code, out = _run(capsys, "certify", ahmadi_file)
        assert code == EXIT_NOT_CERTIFIED
        assert "-2.2" in out

    def test_explicit_point(self, capsys, euclid_file):
        s = ",".join(repr(float(x)) for x in np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0))
        code, _ = _run(capsys, "certify", euclid_file, "--s-star", s)
        assert code == EXIT_OK

    def test_not_stationary(self, capsys, euclid_file):
        code, _ = _run(capsys, "certify", euclid_file, "--s-star", "1,2,3")
        assert code == EXIT_NOT_STATIONARY

    def test_malformed(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert _run(capsys, "certify", str(bad))[0] == EXIT_INPUT

    def test_wrong_length_point(self, capsys, euclid_file):
        assert _run(capsys, "certify", euclid_file, "--s-star", "1,2")[0] == EXIT_INPUT

    def test_missing_file(self, capsys, tmp_path):
        assert _run(capsys, "certify", str(tmp_path / "none.json"))[0] == EXIT_INPUT


class TestReports:
    def test_byte_identical(self, capsys, tmp_path, rng):
        p = tmp_path / "m.json"
        save_model(random_model(rng, 3), p)
        a = _run(capsys, "minimize", str(p), "--seed", "7")[1]
        b = _run(capsys, "minimize", str(p), "--seed", "7")[1]
        assert a == b

    def test_json_report_fields(self, capsys, euclid_file):
        _, out = _run(capsys, "minimize", euclid_file, "--json")
        rep = json.loads(out)
        assert set(rep) == {"command", "inputs_digest", "outputs", "seed", "wall_time", "version"}
        assert rep["command"] == "minimize" and len(rep["inputs_digest"]) == 64

    def test_sigma_bound(self, capsys, tmp_path, rng):
        p = tmp_path / "m.json"
        save_model(random_model(rng, 2), p)
        code, out = _run(capsys, "sigma-bound", str(p))
        assert code == EXIT_OK
        assert "sos_sigma" in json.loads(out)["thresholds"]

    def test_sigma_bound_zero_gradient(self, capsys, euclid_file):
        _, out = _run(capsys, "sigma-bound", euclid_file)
        assert json.loads(out)["thresholds"]["sos_sigma"] == "inf"

    def test_round_trip(self, tmp_path, rng):
        m = random_model(rng, 4)
        p = tmp_path / "m.json"
        save_model(m, p)
        assert load_model(p) == m

    def test_console_entry(self, euclid_file):
        res = subprocess.run([sys.executable, "-m", "quarticsos.cli", "certify", euclid_file], capture_output=True)
        assert res.returncode == EXIT_OK


class TestAr3Commands:
    def test_trace(self, capsys, tmp_path):
        trace = tmp_path / "t.csv"
        code, out = _run(capsys, "ar3", "--problem", "rosenbrock", "--trace", str(trace))
        assert code == EXIT_OK
        rows = list(csv.reader(trace.open()))
        assert rows[0] == CSV_HEADER
        assert len(rows) - 1 == json.loads(out)["iterations"]

    def test_bad_problem(self, capsys):
        assert _run(capsys, "ar3", "--problem", "nope")[0] == EXIT_INPUT

    def test_basin_rows(self, capsys, tmp_path):
        out_csv = tmp_path / "b.csv"
        code, _ = _run(capsys, "basin", "--problem", "nesterov_chebyshev", "--steps", "3", "--out", str(out_csv))
        assert code == EXIT_OK
        rows = list(csv.DictReader(out_csv.open()))
        assert len(rows) == 9
        assert set(rows[0]) == {"x0_1", "x0_2", "converged", "iters", "final_dist", "status"}


class TestSweep:
    def test_small_sweep(self, capsys, tmp_path):
        out_csv = tmp_path / "s.csv"
        code, out = _run(
            capsys, "sweep", "--family", "fig1_nonhomog", "--grid", "1,10,100", "--instances", "2",
            "--nstarts", "6", "--out", str(out_csv),
        )
        assert code == EXIT_OK
        rows = list(csv.DictReader(out_csv.open()))
        assert len(rows) == 6
        assert [float(r["sigma"]) for r in rows] == [1.0, 1.0, 10.0, 10.0, 100.0, 100.0]
        assert set(json.loads(out)) >= {"rows", "certified_fraction", "slope"}

    def test_empty_grid(self, capsys, tmp_path):
        assert _run(capsys, "sweep", "--family", "fig1_homog", "--grid", "", "--out", str(tmp_path / "x.csv"))[0] == EXIT_INPUT

    def test_slope_helper(self):
        rows = [{"sigma": s, "certified": True, "s_norm": s ** (-1.0 / 3.0)} for s in (1.0, 8.0, 27.0)]
        assert loglog_slope(rows) == pytest.approx(-1.0 / 3.0)
