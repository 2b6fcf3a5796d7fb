import json

import numpy as np
import pytest

from meanineq import GiniParams, Weights, gini_mean
from meanineq.cli import main
from meanineq.report import ProblemConfig, analyze, from_machine, to_machine


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def power_config(p, **overrides):
    cfg = {
        "n": 2,
        "phi": "sum",
        "outer": {"family": "power", "p": p},
        "inner": [{"family": "power", "p": p}, {"family": "power", "p": p}],
        "budget": 20_000,
    }
    cfg.update(overrides)
    return cfg


class TestEval:
    def test_gini(self, capsys):
        assert main(["eval", "gini", "r=2", "s=1", "w=0.5,0.5", "x=1,3"]) == 0
        assert float(capsys.readouterr().out.strip()) == pytest.approx(2.5, rel=1e-12)

    def test_chi_zero(self, capsys):
        assert main(["eval", "chi", "r=2", "s=1", "t=1"]) == 0
        assert float(capsys.readouterr().out.strip()) == 0.0

    def test_power(self, capsys):
        assert main(["eval", "power", "p=2", "w=0.5,0.5", "x=1,7"]) == 0
        assert float(capsys.readouterr().out.strip()) == pytest.approx(5.0, rel=1e-12)

    def test_gamma(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "phi": "sum",
                "outer": {"family": "gini", "r": 2, "s": 0},
                "inner": [
                    {"family": "gini", "r": 1.5, "s": 1.5},
                    {"family": "gini", "r": 1.5, "s": 1.5},
                ],
            },
        )
        assert main(["eval", "gamma", "--config", cfg, "y=1,1", "--format", "machine"]) == 0
        out = json.loads(capsys.readouterr().out)
        np.testing.assert_allclose(out["matrix"], [[1.5, -0.5], [-0.5, 1.5]], atol=1e-14)

    def test_bad_args(self, capsys):
        assert main(["eval", "gini", "r=2"]) == 64
        assert main(["eval", "gini", "r=2", "s=1", "w=0.5,0.5", "x=1,3", "zz=1"]) == 64

    def test_domain_error_exit(self, capsys):
        assert main(["eval", "chi", "r=2", "s=1", "t=-3"]) == 65


class TestAnalyze:
    def test_holds_exit_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, power_config(2.0))
        assert main(["analyze", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "holds_global" in out
        assert "counterexample: none" in out

    def test_fails_exit_one_with_witness(self, tmp_path, capsys):
        cfg = write_config(tmp_path, power_config(0.5))
        assert main(["analyze", "--config", cfg, "--format", "machine"]) == 1
        rep = json.loads(capsys.readouterr().out)
        assert rep["status"] == 1
        cex = rep["counterexample"]
        assert cex is not None and cex["gap"] < -1e-6
        assert rep["counterexample_shrunk"]["distance_to_diagonal"] <= cex[
            "distance_to_diagonal"
        ]

    def test_conjugate_hoelder_holds_with_boundary_local(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "n": 2,
                "phi": "product",
                "outer": {"family": "power", "p": 1},
                "inner": [{"family": "power", "p": 2}, {"family": "power", "p": 2}],
                "budget": 5000,
            },
        )
        assert main(["analyze", "--config", cfg, "--format", "machine"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["local"]["verdict"] == "boundary"
        assert rep["global"]["any_n_decider"]["verdict"] == "holds_global"

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**power_config(2.0), "bogus": 1})
        assert main(["analyze", "--config", cfg]) == 64
        cfg2 = write_config(tmp_path, {"phi": "sum"}, "c2.json")
        assert main(["analyze", "--config", cfg2]) == 64
        assert main(["analyze", "--config", str(tmp_path / "missing.json")]) == 64

    def test_overrides(self, tmp_path, capsys):
        cfg = write_config(tmp_path, power_config(0.5))
        assert main(["analyze", "--config", cfg, "--budget", "0", "--format", "machine"]) == 1
        rep = json.loads(capsys.readouterr().out)
        assert rep["counterexample"] is None
        assert rep["config"]["budget"] == 0


class TestReportFormat:
    def test_round_trip_bytes(self, tmp_path):
        cfg = ProblemConfig.from_dict(power_config(0.5, seed=7))
        rep, status = analyze(cfg)
        assert status == 1
        text = to_machine(rep)
        again = to_machine(from_machine(text))
        assert text == again
        assert text.encode("utf-8") == again.encode("utf-8")

    def test_stable_field_set(self):
        cfg = ProblemConfig.from_dict(power_config(2.0))
        rep, _ = analyze(cfg)
        assert list(sorted(rep)) == [
            "config",
            "counterexample",
            "counterexample_shrunk",
            "derivative_check",
            "global",
            "local",
            "status",
            "timings",
            "weights",
        ]

    def test_witness_revalidates_through_means(self):
        cfg = ProblemConfig.from_dict(power_config(0.5, seed=3))
        rep, _ = analyze(cfg)
        cex = rep["counterexample"]
        x = np.array(cex["x"])
        w = Weights(rep["weights"]["lambda"])
        p = GiniParams(0.5, 0.0)
        lhs = gini_mean(p, w, x.sum(axis=1))
        rhs = sum(gini_mean(p, w, x[:, j]) for j in range(x.shape[1]))
        assert lhs == pytest.approx(cex["lhs"], rel=1e-12)
        assert rhs == pytest.approx(cex["rhs"], rel=1e-12)
        assert rhs - lhs == pytest.approx(cex["gap"], rel=1e-9)

    def test_witness_revalidates_through_cmd_eval(self, capsys):
        cfg = ProblemConfig.from_dict(power_config(0.5, seed=3))
        rep, _ = analyze(cfg)
        cex = rep["counterexample"]
        x = np.array(cex["x"])
        rows = ",".join(repr(float(v)) for v in x.sum(axis=1))
        assert main(["eval", "gini", "r=0.5", "s=0", "w=0.5,0.5", f"x={rows}"]) == 0
        lhs = float(capsys.readouterr().out.strip())
        rhs = 0.0
        for j in range(x.shape[1]):
            col = ",".join(repr(float(v)) for v in x[:, j])
            assert main(["eval", "gini", "r=0.5", "s=0", "w=0.5,0.5", f"x={col}"]) == 0
            rhs += float(capsys.readouterr().out.strip())
        assert lhs == pytest.approx(cex["lhs"], rel=1e-12)
        assert rhs == pytest.approx(cex["rhs"], rel=1e-12)

    def test_determinism_modulo_timings(self):
        cfg = ProblemConfig.from_dict(power_config(0.5, seed=1))
        rep1, _ = analyze(cfg)
        rep2, _ = analyze(cfg)
        rep1.pop("timings")
        rep2.pop("timings")
        assert to_machine(rep1) == to_machine(rep2)

    def test_golden_structure(self, tmp_path):
        # deterministic fields of the p = 2 report, frozen
        cfg = ProblemConfig.from_dict(power_config(2.0))
        rep, _ = analyze(cfg)
        assert rep["status"] == 0
        assert rep["weights"]["lambda"] == [0.5, 0.5]
        assert rep["local"]["verdict"] == "boundary"
        assert rep["counterexample"] is None
        assert rep["global"]["any_n_decider"]["verdict"] == "holds_global"
        assert rep["global"]["two_variable_decider"]["verdict"] == "holds_global"
        assert rep["global"]["pointwise_checker"]["verdict"] == "holds_global"
        assert rep["config"]["box"] == [[0.0, None], [0.0, None]]


class TestSelftest:
    def test_passes(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "suites failed" in out
        assert "FAIL" not in out

    def test_inject_fault_reports(self, capsys):
        assert main(["selftest", "--inject-fault"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_seeded_runs_identical(self, capsys):
        assert main(["selftest", "--seed", "5"]) == 0
        first = capsys.readouterr().out
        assert main(["selftest", "--seed", "5"]) == 0
        second = capsys.readouterr().out
        assert first == second
