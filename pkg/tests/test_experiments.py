"""Experiment configs, runners, reports, and the command line driver."""
import json
import os
from pathlib import Path

import numpy as np
import pytest

import cocyclelab.experiments as ex
import cocyclelab.experiments.cli as cli
import cocyclelab.experiments.config as cf
import cocyclelab.experiments.parallel as par
import cocyclelab.experiments.report as rp
import cocyclelab.experiments.runners as rn
import cocyclelab.shifts as sh

CONFIG_DIR = Path(ex.__file__).parent / "configs"
SHIPPED = sorted(CONFIG_DIR.glob("e*.json"))

FULL2 = sh.SftSpec.full_shift(2, theta=0.5)


def load(name):
    return cf.load_config(str(CONFIG_DIR / name))


class TestConfig:
    def test_all_shipped_configs_validate(self):
        assert len(SHIPPED) == 5
        for path in SHIPPED:
            cfg = cf.validate_config(cf.load_config(str(path)), source=str(path))
            assert cfg["schema_version"] == cf.SCHEMA_VERSION

    def test_parse_error_is_line_anchored(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{\n  "schema_version": 1,\n  "oops"\n}')
        with pytest.raises(cf.ConfigError, match=r"bad\.json:4:1: Expecting"):
            cf.load_config(str(bad))

    def test_missing_file(self):
        with pytest.raises(cf.ConfigError, match="nope.json"):
            cf.load_config("/nowhere/nope.json")

    def test_schema_violation_names_json_path(self):
        cfg = load("e3.json")
        cfg["schema_version"] = 2
        with pytest.raises(cf.ConfigError, match=r"\$\.schema_version"):
            cf.validate_config(cfg)

    def test_missing_experiment_block(self):
        cfg = load("e3.json")
        del cfg["toral"]
        with pytest.raises(cf.ConfigError, match="toral"):
            cf.validate_config(cfg)

    def test_nested_anchor(self):
        cfg = load("e2.json")
        cfg["suites"][0]["theta0"] = -1.0
        with pytest.raises(cf.ConfigError, match=r"\$\.suites\[0\]\.theta0"):
            cf.validate_config(cfg)

    def test_top_level_must_be_object(self):
        with pytest.raises(cf.ConfigError, match="top level"):
            cf.validate_config([1, 2, 3])

    def test_build_base_kinds(self):
        assert cf.build_base({"kind": "full_shift", "symbols": 3}).alphabet_size == 3
        gm = cf.build_base({"kind": "golden_mean", "theta": 0.4})
        assert gm.theta == 0.4 and not gm.is_allowed(1, 1)
        tr = cf.build_base({"kind": "transitions",
                            "transitions": [[1, 1], [1, 0]], "theta": 0.5})
        assert np.array_equal(tr.transitions, gm.transitions)

    def test_build_measure_kinds(self):
        parry = cf.build_measure(FULL2, {"kind": "parry"})
        assert parry.cylinder("0") == pytest.approx(0.5)
        markov = cf.build_measure(FULL2, {"kind": "markov",
                                          "P": [[0.7, 0.3], [0.4, 0.6]]})
        assert markov.pi @ markov.P == pytest.approx(markov.pi)
        bern = cf.build_measure(FULL2, {"kind": "bernoulli", "p": [0.3, 0.7]})
        assert bern.cylinder("11") == pytest.approx(0.49)
        gibbs = cf.build_measure(FULL2, {"kind": "gibbs",
                                         "phi": {"00": 0.1, "01": 0.0,
                                                 "10": 0.0, "11": -0.1}})
        assert gibbs.potential is not None

    def test_bad_bernoulli_vector(self):
        with pytest.raises(cf.ConfigError, match="probability vector"):
            cf.build_measure(FULL2, {"kind": "bernoulli", "p": [0.3, 0.3]})


class TestReport:
    def test_canonical_json_sorts_and_converts(self):
        s = rp.canonical_json({"b": np.float64(1.5), "a": np.array([1, 2])})
        assert s == '{"a":[1,2],"b":1.5}'

    def test_digest_tracks_content(self):
        a = rp.config_digest({"x": 1})
        assert a == rp.config_digest({"x": 1})
        assert a != rp.config_digest({"x": 2})

    def test_csv_cells(self):
        text = rp.render_csv(["a", "b", "c"],
                             [[True, 0.1, [1.5, 2.5]], [False, np.float64(2), "w"]])
        lines = text.splitlines()
        assert lines[0] == "a,b,c"
        assert lines[1] == "true,0.1,1.5;2.5"
        assert lines[2] == "false,2.0,w"

    def test_write_report_layout(self, tmp_path):
        result = {
            "verdicts": [rp.verdict("check-one", True, "some invariant", value=1.0)],
            "tables": {"t": {"header": ["x"], "rows": [[1]]}},
        }
        paths = rp.write_report(str(tmp_path), "E9", {"seed": 0}, 0, result)
        assert [os.path.basename(p) for p in paths] == ["e9.json", "e9_t.csv"]
        doc = json.loads((tmp_path / "e9.json").read_text())
        assert doc["experiment"] == "E9"
        assert doc["traceability"] == [
            {"verdict": "check-one", "invariant": "some invariant"}
        ]
        assert doc["verdicts"][0]["passed"] is True
        assert "timestamp" not in doc and "time" not in doc

    def test_all_passed(self):
        good = {"verdicts": [rp.verdict("a", True, "i")]}
        bad = {"verdicts": [rp.verdict("a", True, "i"), rp.verdict("b", False, "i")]}
        assert rp.all_passed(good) and not rp.all_passed(bad)


class TestParallel:
    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("COCYCLE_LAB_THREADS", "2")
        assert par.worker_count() == 2
        monkeypatch.setenv("COCYCLE_LAB_THREADS", "0")
        with pytest.raises(ValueError, match="positive integer"):
            par.worker_count()
        monkeypatch.setenv("COCYCLE_LAB_THREADS", "many")
        with pytest.raises(ValueError, match="positive integer"):
            par.worker_count()

    def test_pmap_preserves_order(self, monkeypatch):
        monkeypatch.setenv("COCYCLE_LAB_THREADS", "4")
        assert par.pmap(lambda v: v * v, range(20)) == [v * v for v in range(20)]
        monkeypatch.setenv("COCYCLE_LAB_THREADS", "1")
        assert par.pmap(lambda v: -v, [3, 1, 2]) == [-3, -1, -2]


def run_shipped(name):
    cfg = cf.validate_config(load(name))
    return cfg, rn.run_experiment(cfg, int(cfg["seed"]))


class TestRunners:
    def test_e1_reduced(self):
        cfg = load("e1.json")
        cfg["n_steps"] = 20000
        cfg["suite"] = [m for m in cfg["suite"] if m["name"] == "stretch-rotate-d2"]
        out = rn.run_e1(cfg, 2024)
        assert all(v["passed"] for v in out["verdicts"])
        names = [v["name"] for v in out["verdicts"]]
        assert "control-degenerate-cluster" in names
        assert "informative-one-way" in names
        rows = out["tables"]["spectra"]["rows"]
        ctrl = [r for r in rows if r[0] == "duplicated-block"]
        assert ctrl and all(max(r[7]) >= 2 for r in ctrl)

    def test_e2_shipped(self):
        _, out = run_shipped("e2.json")
        assert all(v["passed"] for v in out["verdicts"])
        pipeline = {r[0]: r for r in out["tables"]["pipeline"]["rows"]}
        # commuting pair only touches the real axis: located by golden search
        assert pipeline["commuting-d2"][3] == "golden"
        assert pipeline["commuting-d2"][4] is True
        # the symplectic pair opens a real window: a scan point lands inside
        assert pipeline["symplectic-d4"][3] == "interior"
        assert pipeline["symplectic-d4"][5] is True

    def test_e2_commuting_collision_matches_closed_form(self):
        cfg = cf.validate_config(load("e2.json"))
        out = rn.run_e2(cfg, 7)
        row = [r for r in out["tables"]["pipeline"]["rows"]
               if r[0] == "commuting-d2"][0]
        # base argument over the n=8 closed word is 16*0.9 + 0.35 - 4*pi;
        # the insertion adds 6.4*s, so the full turn lands at a known s
        theta_start = 16 * 0.9 + 0.35 - 4 * np.pi
        s_expected = (2 * np.pi - theta_start) / 6.4
        assert row[2] == pytest.approx(s_expected, abs=1e-7)

    def test_e3_shipped(self):
        _, out = run_shipped("e3.json")
        assert all(v["passed"] for v in out["verdicts"])
        by_name = {v["name"]: v for v in out["verdicts"]}
        assert by_name["exponential-rate"]["detail"]["relative_error"] < 1e-10
        gaps = out["tables"]["period_gaps"]["rows"]
        assert len(gaps) == 64

    def test_e4_shipped(self):
        _, out = run_shipped("e4.json")
        assert all(v["passed"] for v in out["verdicts"])
        by_name = {v["name"]: v for v in out["verdicts"]}
        assert by_name["integral-height"]["detail"]["error"] <= 1e-12

    def test_e5_shipped(self):
        _, out = run_shipped("e5.json")
        assert all(v["passed"] for v in out["verdicts"])
        rows = out["tables"]["ladders"]["rows"]
        assert rows[0][0] == "base"
        ladders = {r[0] for r in rows}
        assert ladders == {"base", "cocycle", "measure", "family"}


class TestCli:
    def test_list(self, capsys):
        assert cli.main(["--list"]) == 0
        out = capsys.readouterr().out
        for exp in ("E1", "E2", "E3", "E4", "E5"):
            assert exp in out

    def test_validate_shipped(self, capsys):
        assert cli.main(["--config", str(CONFIG_DIR / "e2.json"), "--validate"]) == 0
        assert "ok (E2)" in capsys.readouterr().out

    def test_config_required(self, capsys):
        assert cli.main([]) == 1
        assert "--config is required" in capsys.readouterr().err

    def test_malformed_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert cli.main(["--config", str(bad), "--validate"]) == 1
        assert "bad.json:1:2" in capsys.readouterr().err

    def test_experiment_mismatch(self, capsys):
        code = cli.main(["--config", str(CONFIG_DIR / "e3.json"),
                         "--experiment", "E1"])
        assert code == 1
        assert "describes E3" in capsys.readouterr().err

    def test_bad_thread_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("COCYCLE_LAB_THREADS", "-3")
        code = cli.main(["--config", str(CONFIG_DIR / "e3.json"),
                         "--out", str(tmp_path)])
        assert code == 1
        assert "COCYCLE_LAB_THREADS" in capsys.readouterr().err

    def test_run_writes_reports_and_exit_zero(self, tmp_path, capsys):
        code = cli.main(["--config", str(CONFIG_DIR / "e3.json"),
                         "--experiment", "E3", "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS  exponential-rate" in out
        assert (tmp_path / "e3.json").exists()
        assert (tmp_path / "e3_toral.csv").exists()

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["--config", str(CONFIG_DIR / "e5.json"), "--out", str(a)]) == 0
        assert cli.main(["--config", str(CONFIG_DIR / "e5.json"), "--out", str(b)]) == 0
        for name in sorted(os.listdir(a)):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_override_changes_report(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["--config", str(CONFIG_DIR / "e3.json"), "--out", str(a)]) == 0
        assert cli.main(["--config", str(CONFIG_DIR / "e3.json"), "--out", str(b),
                         "--seed", "99"]) == 0
        assert json.loads((b / "e3.json").read_text())["seed"] == 99
        assert (a / "e3.json").read_bytes() != (b / "e3.json").read_bytes()

    def test_verdict_failure_exits_two(self, tmp_path, capsys):
        cfg = load("e4.json")
        cfg["integrals"][0]["expected"] = 0.9
        doctored = tmp_path / "e4_fail.json"
        doctored.write_text(json.dumps(cfg))
        code = cli.main(["--config", str(doctored), "--out", str(tmp_path)])
        assert code == 2
        assert "FAIL  integral-unit" in capsys.readouterr().out
