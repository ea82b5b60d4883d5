import json
import math

import numpy as np
import pytest

from cmld import DegreeDistribution, StatePoint, lln_path
from cmld.cli import main
from cmld.serialize import (
    dump_degree_distribution,
    dump_state_point,
    fluid_path_from_csv,
    fluid_path_to_csv,
    load_degree_distribution,
    load_state_point,
)

P13 = {"degrees": {"1": 0.5, "3": 0.5}}
Q13 = {"degrees": {"1": 0.1, "3": 0.3}}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, payload in [
        ("p", P13),
        ("q", Q13),
        ("qbad", {"degrees": {"1": 0.9, "3": 0.3}}),
        ("x1", {"x0": 0.0, "xk": {"3": 1.0}}),
        ("x2", {"x0": 0.0, "xk": {"3": 0.5}}),
    ]:
        f = tmp_path / f"{name}.json"
        f.write_text(json.dumps(payload))
        paths[name] = str(f)
    paths["tmp"] = tmp_path
    return paths


class TestRateCommands:
    def test_dreg_prints_rate_and_limit(self, files, capsys):
        assert main(["rate", "dreg", "--D", "3", "--q", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "0.3465736" in out and "-0.3465736" in out

    def test_degree_payload(self, files, capsys):
        assert main(["rate", "degree", "--p", files["p"], "--q", files["q"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["rate"] == pytest.approx(0.11250700879527151, abs=1e-9)
        assert payload["limit"] == -payload["rate"]
        assert payload["bound_kind"] == "lower_only"

    def test_size(self, files, tmp_path, capsys):
        p = tmp_path / "p3.json"
        p.write_text(json.dumps({"degrees": {"3": 1.0}}))
        assert main(["rate", "size", "--p", str(p), "--r", "0.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["rate"] == pytest.approx(0.5 * math.log(2), abs=1e-6)

    def test_largest_conj_flagged(self, files, capsys):
        assert main(["rate", "largest-conj", "--D", "3", "--x", "0.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["conjecture"] is True

    def test_missing_file_exit_1(self, files):
        assert main(["rate", "degree", "--p", "/nonexistent.json", "--q", files["q"]]) == 1


class TestInfeasibleInputs:
    def test_estimate_q_above_p_exit_2(self, files, capsys):
        code = main(["estimate", "--p", files["p"], "--q", files["qbad"],
                     "--n", "100", "--eps", "0.05", "--reps", "10", "--seed", "1"])
        assert code == 2
        assert "q <= p" in capsys.readouterr().err

    def test_dreg_low_degree_exit_2(self, files):
        assert main(["rate", "dreg", "--D", "2", "--q", "0.5"]) == 2


class TestTrajectoryCommands:
    def test_lln_writes_csv_and_sidecar(self, files, capsys):
        out = str(files["tmp"] / "lln.csv")
        assert main(["lln", "--p", files["p"], "--T", "1.2", "--grid", "301",
                     "--out", out]) == 0
        meta = json.loads((files["tmp"] / "lln.meta.json").read_text())
        assert meta["rho"] == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert meta["giant_fraction"] == pytest.approx(22.0 / 27.0, abs=1e-9)
        fp = fluid_path_from_csv(out)
        assert fp.grid[0] == 0.0

    def test_path_reports_costs(self, files, capsys):
        assert main(["path", "--x1", files["x1"], "--x2", files["x2"],
                     "--grid", "2001"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["case"] == "case_i"
        assert payload["residual"] <= 1e-6
        assert payload["cost_closed"] == pytest.approx(0.5 * math.log(2), abs=1e-12)

    def test_simulate_deterministic_under_seed(self, files, capsys):
        argv = ["simulate", "--p", files["p"], "--n", "500", "--seed", "12"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second

    def test_estimate_json_line(self, files, capsys):
        assert main(["estimate", "--p", files["p"], "--q", files["q"], "--n", "60",
                     "--eps", "0.2", "--reps", "400", "--seed", "5"]) == 0
        payload = json.loads(capsys.readouterr().out.strip())
        assert payload["reps"] == 400
        assert 0.0 <= payload["ci_low"] <= payload["p_hat"] <= payload["ci_high"] <= 1.0


class TestRoundTrip:
    def test_degree_distribution_roundtrip(self, tmp_path):
        p = DegreeDistribution({2: 0.125, 7: 0.875})
        f = tmp_path / "p.json"
        dump_degree_distribution(p, f)
        assert load_degree_distribution(f).weights == p.weights

    def test_state_point_roundtrip(self, tmp_path):
        x = StatePoint(0.7071067811865476, {3: 1.0 / 3.0})
        f = tmp_path / "x.json"
        dump_state_point(x, f)
        back = load_state_point(f)
        assert back.x0 == x.x0
        assert back.xk == x.xk

    def test_fluid_path_csv_exact_roundtrip(self, tmp_path):
        fp = lln_path(DegreeDistribution({1: 0.5, 3: 0.5}), T=1.2, grid_points=101)
        f = tmp_path / "traj.csv"
        fluid_path_to_csv(fp, f)
        back = fluid_path_from_csv(f)
        assert np.array_equal(back.grid, fp.grid)
        assert np.array_equal(back.psi, fp.psi)
        assert np.array_equal(back.zeta0, fp.zeta0)
        for k in fp.degrees:
            assert np.array_equal(back.zeta(k), fp.zeta(k))

    def test_estimate_json_line_roundtrip(self):
        from cmld import estimate_event_prob
        from cmld.serialize import estimate_from_json_line, estimate_to_json_line

        res = estimate_event_prob((1, 1, 3, 3), {3: 0.5}, eps=0.3, reps=300, seed=9)
        assert estimate_from_json_line(estimate_to_json_line(res)) == res


class TestDegreeSequenceInput:
    def test_simulate_accepts_json_array(self, tmp_path, capsys):
        f = tmp_path / "seq.json"
        f.write_text(json.dumps([1, 1, 3, 3, 2, 2]))
        assert main(["simulate", "--p", str(f), "--n", "6", "--seed", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 6 and payload["m"] == 6

    def test_simulate_array_length_mismatch_exit_1(self, tmp_path):
        f = tmp_path / "seq.json"
        f.write_text(json.dumps([1, 1]))
        assert main(["simulate", "--p", str(f), "--n", "6", "--seed", "3"]) == 1


class TestVerifyCommand:
    def test_fast_battery_passes(self, capsys):
        assert main(["verify", "--fast"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
