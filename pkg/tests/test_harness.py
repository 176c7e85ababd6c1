"""Orchestration, outputs, config handling and the CLI."""

import json
import os

import numpy as np
import pytest

from ltsurf import (ConfigError, ScenarioConfig, convergence_study,
                    emit_bundles, run_scenario)
from ltsurf.cli import main, read_config_file
from ltsurf.harness import derive_path_seed
from ltsurf.scenarios import REGISTRY, build_parts, list_scenarios

REQUIRED_SCENARIOS = ["tanaka_bm", "peskir_diffusion", "glued_quadratic_jump",
                      "smooth_fit_sqrt_surface", "generator_lambda",
                      "surfaces_strong"]


class TestRegistry:
    def test_required_names_present(self):
        for name in REQUIRED_SCENARIOS:
            assert name in REGISTRY

    def test_listing_is_stable_and_complete(self):
        a = list_scenarios()
        b = list_scenarios()
        assert [e["name"] for e in a] == [e["name"] for e in b]
        assert all(e["variant"] and e["formula"] for e in a)

    def test_param_override_and_validation(self):
        _, parts = build_parts("tanaka_bm", {"mu": 0.5})
        assert parts.spec.mu_x == 0.5
        with pytest.raises(ConfigError):
            build_parts("tanaka_bm", {"nonsense": 1.0})
        with pytest.raises(ConfigError):
            build_parts("no_such_scenario")


class TestRunScenario:
    def test_single_path_bit_identical(self):
        cfg = dict(scenario="tanaka_bm", dt=1e-2, n_paths=1, seed=4)
        s1 = run_scenario(ScenarioConfig(**cfg))
        s2 = run_scenario(ScenarioConfig(**cfg))
        assert s1.to_json() == s2.to_json()

    def test_smooth_quadratic_residual_scale(self):
        # Euler strong-order heuristic: median below 10 sqrt(dt)
        for dt in (1e-2, 1e-3):
            cfg = ScenarioConfig(scenario="smooth_quadratic", dt=dt,
                                 n_paths=50, seed=2)
            s = run_scenario(cfg)
            assert s.residual_stats["abs_median"] < 10 * np.sqrt(dt)

    def test_rhs_column_is_exact_term_sum(self, tmp_path):
        cfg = ScenarioConfig(scenario="glued_quadratic_jump", dt=1e-2,
                             n_paths=5, seed=6, output=str(tmp_path))
        run_scenario(cfg)
        lines = (tmp_path / "verify.csv").read_text().strip().split("\n")
        header = lines[0].split(",")
        terms = [h for h in header if h.startswith("term_")]
        for row in lines[1:]:
            vals = dict(zip(header, row.split(",")))
            acc = 0.0
            for t in terms:
                acc += float(vals[t])
            assert float(vals["rhs"]) == acc
            assert float(vals["residual"]) == float(vals["lhs"]) - acc

    def test_csv_floats_have_17_significant_digits(self, tmp_path):
        cfg = ScenarioConfig(scenario="tanaka_bm", dt=1e-2, n_paths=2,
                             seed=3, output=str(tmp_path))
        s = run_scenario(cfg, keep_reports=True)
        lines = (tmp_path / "verify.csv").read_text().strip().split("\n")
        lhs_str = lines[1].split(",")[1]
        assert float(lhs_str) == s.reports[0][0]  # round-trips exactly

    def test_worker_invariance(self, tmp_path):
        outs = []
        for workers in (1, 3):
            out = tmp_path / f"w{workers}"
            cfg = ScenarioConfig(scenario="glued_quadratic_jump", dt=1e-2,
                                 n_paths=12, seed=9, workers=workers,
                                 output=str(out))
            run_scenario(cfg)
            outs.append((out / "verify.csv").read_bytes()
                        + (out / "summary.json").read_bytes())
        assert outs[0] == outs[1]

    def test_derived_seeds_are_stable_and_distinct(self):
        s = [derive_path_seed(7, i) for i in range(100)]
        assert len(set(s)) == 100
        assert s[0] == derive_path_seed(7, 0)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="tanaka_bm", dt=-1.0)
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="tanaka_bm", n_paths=0)
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="tanaka_bm", qv_mode="weird")
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="tanaka_bm", bandwidth_rule=-0.1)


class TestConvergence:
    def test_single_dt_rejected(self):
        cfg = ScenarioConfig(scenario="tanaka_bm", n_paths=2, seed=1)
        with pytest.raises(ConfigError):
            convergence_study(cfg, [1e-2])
        with pytest.raises(ConfigError):
            convergence_study(cfg, [1e-3, 1e-2])  # not decreasing

    def test_smooth_quadratic_order_probe(self):
        cfg = ScenarioConfig(scenario="smooth_quadratic", n_paths=150, seed=2,
                             workers=2)
        table = convergence_study(cfg, [1e-2, 1e-3, 1e-4])
        meds = [r["median_abs_residual"] for r in table["rows"]]
        assert table["monotone_nonincreasing"]
        for a, b in zip(meds, meds[1:]):
            assert a / b >= 1.5


class TestCli:
    def test_scenarios_exit_zero(self, capsys):
        assert main(["scenarios"]) == 0
        out = capsys.readouterr().out
        for name in REQUIRED_SCENARIOS:
            assert name in out

    def test_unknown_scenario_exit_2(self, capsys):
        assert main(["verify", "--scenario", "nope", "--paths", "1"]) == 2

    def test_incompatible_variant_exit_3(self, capsys):
        rc = main(["verify", "--scenario", "glued_quadratic_jump",
                   "--variant", "ltc_diffusion", "--dt", "1e-2",
                   "--paths", "1"])
        assert rc == 3

    def test_verify_writes_outputs(self, tmp_path, capsys):
        rc = main(["verify", "--scenario", "tanaka_bm", "--dt", "1e-2",
                   "--paths", "2", "--seed", "1", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "verify.csv").exists()
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["n_paths"] == 2

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("scenario = smooth_quadratic\ndt = 1e-2\n"
                       "param.mu = 0.25\nseed = 3\n")
        rc = main(["verify", "--config", str(cfg), "--paths", "1",
                   "--dt", "2e-2"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["config"]["dt"] == 2e-2  # flag wins over file
        assert out["config"]["params"]["mu"] == 0.25
        assert out["config"]["scenario"] == "smooth_quadratic"

    def test_bad_config_file_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mystery = 1\n")
        assert main(["verify", "--config", str(cfg), "--paths", "1"]) == 2

    def test_localtime_subcommand(self, capsys):
        rc = main(["localtime", "--scenario", "tanaka_bm", "--dt", "1e-2",
                   "--paths", "3", "--seed", "2"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out) >= {"occupation", "mollifier", "tanaka"}

    def test_envelope_subcommand(self, tmp_path, capsys):
        rc = main(["envelope", "--surface", "abs", "--m", "1,100",
                   "--grid-n", "4", "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "envelope.csv").read_text().strip().split("\n")
        assert lines[0] == "m,t,a,envelope,b"
        assert len(lines) == 1 + 2 * 4 * 4

    def test_envelope_unknown_surface_exit_2(self):
        assert main(["envelope", "--surface", "nope"]) == 2

    def test_converge_subcommand(self, capsys):
        rc = main(["converge", "--scenario", "smooth_quadratic",
                   "--dts", "1e-2,1e-3", "--paths", "20", "--seed", "1"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["rows"]) == 2

    def test_simulate_subcommand(self, tmp_path, capsys):
        rc = main(["simulate", "--scenario", "exact_drift_jump",
                   "--dt", "1e-2", "--paths", "2", "--out", str(tmp_path)])
        assert rc == 0
        header = (tmp_path / "paths.csv").read_text().split("\n")[0]
        assert header.startswith("path_id,t,jump,brownian")


def test_read_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("just a line without equals\n")
    with pytest.raises(ConfigError):
        read_config_file(str(bad))
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "missing.cfg"))


def test_emit_bundles_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        cfg = ScenarioConfig(scenario="glued_quadratic_jump", dt=1e-2,
                             n_paths=3, seed=5)
        emit_bundles(cfg, str(out))
    assert (a / "paths.csv").read_bytes() == (b / "paths.csv").read_bytes()
