import pytest

import fahvsim.acceptance as acceptance
import fahvsim.cli as cli
from fahvsim import ParseError, ScenarioConfig, ValidationError
from fahvsim.config import (apply_overrides, config_to_flat, known_keys,
                            parse_config, parse_text, serialize_config)
from fahvsim.engine import COLUMNS


class TestParsing:
    def test_empty_file_is_default_scenario(self):
        cfg = parse_config("")
        assert cfg.gains.kv1 == 3.0
        assert cfg.gains.kv2 == 2.0
        assert cfg.gains.kv3 == 1.0
        assert cfg.perf_h.xi_a == 40.6
        assert cfg.fault.lambda_phi == 0.8
        assert cfg.tracker.d_h == 20.0

    def test_sections_and_comments(self):
        cfg = parse_config("""
# comment
[fault]
lambda_phi = 0.9   # trailing comment
t_fault = 42
[performance.velocity]
xi_a = 7.5
""")
        assert cfg.fault.lambda_phi == 0.9
        assert cfg.fault.t_fault == 42.0
        assert cfg.perf_v.xi_a == 7.5

    def test_parse_error_carries_line(self):
        with pytest.raises(ParseError) as exc:
            parse_text("[fault]\nnot a key value\n")
        assert exc.value.line == 2

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            parse_config("[fault]\nbogus = 1\n")

    def test_invariant_violation_named(self):
        with pytest.raises(ValidationError) as exc:
            parse_config("[fault]\nlambda_phi = 1.2\n")
        assert "lambda_phi" in str(exc.value)

    def test_trim_keyword(self):
        cfg = parse_config("[initial]\ntheta = trim\n")
        assert cfg.initial.theta is None
        cfg = parse_config("[initial]\ntheta = 0.01\n")
        assert cfg.initial.theta == 0.01

    def test_disturbance_terms(self):
        cfg = parse_config("""
[disturbance.V]
const = 0.25
sin1 = 0.5, 0.2, 0.1
""")
        assert cfg.disturbance.V.const == 0.25
        term = cfg.disturbance.V.terms[0]
        assert (term.amplitude, term.frequency, term.phase) == (0.5, 0.2, 0.1)


class TestRoundTrip:
    def test_serialize_parse_identity(self):
        cfg = ScenarioConfig()
        text = serialize_config(cfg)
        again = serialize_config(parse_config(text))
        assert text == again

    def test_documented_value_round_trips(self):
        cfg = parse_config("[performance.altitude]\nxi_a = 40.6\n")
        flat = config_to_flat(cfg)
        assert flat["performance.altitude.xi_a"] == "40.6"

    def test_every_key_round_trips(self):
        cfg = ScenarioConfig()
        flat = config_to_flat(cfg)
        assert set(flat) == set(known_keys())
        # feed every key back through the override path
        cfg2 = ScenarioConfig()
        apply_overrides(cfg2, [f"{k}={v}" for k, v in flat.items()])
        assert config_to_flat(cfg2) == flat


class TestOverrides:
    def test_basic(self):
        cfg = ScenarioConfig()
        apply_overrides(cfg, ["gains.kv1=4.5", "scenario.duration=120"])
        assert cfg.gains.kv1 == 4.5
        assert cfg.duration == 120.0

    def test_validation_failure(self):
        with pytest.raises(ValidationError):
            apply_overrides(ScenarioConfig(), ["fault.lambda_phi=1.2"])

    def test_malformed(self):
        with pytest.raises(ValidationError):
            apply_overrides(ScenarioConfig(), ["no-equals-sign"])


def short_scenario_text() -> str:
    return """
[scenario]
duration = 31
[performance.velocity]
T_s = 10
[performance.altitude]
T_s = 30
"""


class TestCliRun:
    def test_run_emits_artifacts(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text())
        out = tmp_path / "out"
        rc = cli.main(["run", "--scenario", str(scen), "--out", str(out)])
        assert rc == 0
        assert (out / "trajectory.csv").exists()
        assert (out / "metrics.txt").exists()
        svgs = sorted(p.name for p in out.glob("*.svg"))
        assert svgs == ["commands.svg", "disturbance_estimates.svg",
                        "reconstruction.svg", "tracking_errors.svg"]
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == ",".join(COLUMNS)

    def test_run_no_plot(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text())
        out = tmp_path / "out"
        rc = cli.main(["run", "--scenario", str(scen), "--out", str(out),
                       "--no-plot"])
        assert rc == 0
        assert (out / "trajectory.csv").exists()
        assert not list(out.glob("*.svg"))

    def test_zero_dt_is_usage_error(self, tmp_path):
        rc = cli.main(["run", "--out", str(tmp_path / "o"),
                       "--set", "scenario.dt=0"])
        assert rc == 2

    def test_divergence_exit_code(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text())
        rc = cli.main(["run", "--scenario", str(scen),
                       "--out", str(tmp_path / "o"),
                       "--set", "scenario.divergence_ceiling=1e-6",
                       "--no-plot"])
        assert rc == 1


class TestCliCompare:
    def test_inside_bounds_both_clean(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text() + """
[initial]
v_err = 0.2
h_err = 0.5
""")
        out = tmp_path / "cmp"
        rc = cli.main(["compare", "--scenario", str(scen), "--out", str(out)])
        assert rc == 0
        report = (out / "comparison.txt").read_text()
        rows = [ln for ln in report.splitlines()
                if ln.startswith(("proposed", "baseline"))]
        assert len(rows) == 2
        for row in rows:
            cells = row.split()
            assert cells[1] == "ok"
            assert cells[2] == "0" and cells[3] == "0"
        assert (out / "comparison.svg").exists()
        assert (out / "trajectory_proposed.csv").exists()
        assert (out / "trajectory_baseline.csv").exists()

    def test_initial_error_outside_baseline_bound(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text() + """
[performance.altitude]
xi_a = 30
""")
        out = tmp_path / "cmp"
        rc = cli.main(["compare", "--scenario", str(scen), "--out", str(out),
                       "--no-plot"])
        assert rc == 0
        report = (out / "comparison.txt").read_text()
        prop = next(r for r in report.splitlines() if r.startswith("proposed"))
        base = next(r for r in report.splitlines() if r.startswith("baseline"))
        assert prop.split()[3] == "0"          # no altitude violations
        assert int(base.split()[3]) > 0        # breach recorded

    def test_identical_variant_metrics_deterministic(self):
        cfg = parse_config(short_scenario_text())
        a = cli._run_variant(cfg, "proposed")
        b = cli._run_variant(cfg, "proposed")
        assert a["metrics"].exact == b["metrics"].exact


class TestCliSweep:
    def test_grid_product(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text())
        out = tmp_path / "sweep"
        rc = cli.main(["sweep", "--scenario", str(scen), "--out", str(out),
                       "--grid", "initial.h_err=0,30",
                       "--grid", "transform.altitude.beta=auto",
                       "--no-plot", "--jobs", "2"])
        assert rc == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert len(rows) == 3  # header + 2 cells
        assert rows[0].startswith("cell,status")
        # cells must reflect their own overrides, not a shared config
        assert "initial.h_err=0" in rows[1]
        assert "initial.h_err=30" in rows[2]
        assert rows[1].split(",")[-4] != rows[2].split(",")[-4]

    def test_missing_grid(self, tmp_path):
        rc = cli.main(["sweep", "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_seeded_sampling(self, tmp_path):
        scen = tmp_path / "s.cfg"
        scen.write_text(short_scenario_text())
        out = tmp_path / "sub"
        rc = cli.main(["sweep", "--scenario", str(scen), "--out", str(out),
                       "--grid", "initial.h_err=0,10,20,30",
                       "--sample", "2", "--seed", "7"])
        assert rc == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert len(rows) == 3  # header + 2 sampled cells


class TestCliCheck:
    def test_forced_criterion_failure(self):
        cfg = ScenarioConfig()
        apply_overrides(cfg, ["acceptance.smooth_sign_c=0.5"])
        result = acceptance.criterion_1(cfg)
        assert not result.passed

    def test_exit_codes(self, tmp_path, monkeypatch):
        good = [acceptance.CriterionResult("x", True, "ok")]
        bad = [acceptance.CriterionResult("x", False, "nope")]
        monkeypatch.setattr(acceptance, "run_all", lambda cfg: good)
        assert cli.main(["check", "--out", str(tmp_path / "a")]) == 0
        monkeypatch.setattr(acceptance, "run_all", lambda cfg: bad)
        assert cli.main(["check", "--out", str(tmp_path / "b")]) == 1

    def test_report_lists_each_criterion_once(self):
        results = [acceptance.CriterionResult(f"{i}-name", True, "d")
                   for i in range(1, 10)]
        report = acceptance.format_report(results)
        lines = [ln for ln in report.splitlines() if ln.startswith("PASS")]
        assert len(lines) == 9
        names = [ln.split()[1].rstrip(":") for ln in lines]
        assert len(set(names)) == 9
