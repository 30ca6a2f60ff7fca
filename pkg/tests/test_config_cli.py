import csv
import json

import pytest

from rpdw.cli import fmt, run_command
from rpdw.config import DEFAULTS, parse_config, resolve
from rpdw.errors import ConfigError
from rpdw.experiments import p_crit
from rpdw.parallel import ordered_map, thread_cap


def problems_of(raw, command):
    with pytest.raises(ConfigError) as exc:
        resolve(raw, command)
    return exc.value.problems


class TestParseConfig:
    def test_minimal_linear_decay(self):
        cfg = parse_config('{"command": "linear-decay"}')
        assert cfg.command == "linear-decay"
        assert cfg["decay"]["count"] == 24 and cfg["problem"]["n"] == DEFAULTS["problem"]["n"]

    def test_override_keeps_sibling_defaults(self):
        cfg = parse_config('{"problem": {"q": 0.3}}', "evolve")
        assert cfg["problem"]["q"] == 0.3 and cfg["problem"]["gamma"] == DEFAULTS["problem"]["gamma"]

    def test_q_hypothesis(self):
        (msg,) = problems_of({"problem": {"n": 1, "q": 0.9}}, "evolve")
        assert "q < n/2" in msg and "pseudo-measure" in msg

    def test_every_violation_listed(self):
        probs = problems_of({"problem": {"q": 0.9, "p": 0.5, "epsilon": -1}, "solver": {"h": 0.0}}, "evolve")
        assert len(probs) == 4

    def test_critical_p_in_sweep(self):
        pc = p_crit(1, 0.4, 0.2)
        raw = {"problem": {"p": pc}, "solver": {"riesz": "regularized"}}
        (msg,) = problems_of(raw, "lifespan-sweep")
        assert "theory exponent infinite at critical p" in msg

    def test_sweep_needs_regularized_mode(self):
        assert any("regularized" in m for m in problems_of({}, "lifespan-sweep"))

    def test_short_eps_span_is_a_note(self):
        cfg = resolve({"solver": {"riesz": "regularized"}}, "lifespan-sweep")
        assert any("less than one decade" in n for n in cfg.notes)

    def test_functional_box_and_cadence(self):
        raw = {"grid": {"L": 32.0}, "functional": {"R_list": [4.0, 16.0], "snapshot_cadence": 1.0}, "solver": {"T": 100.0}}
        probs = problems_of(raw, "blowup-functional")
        assert len(probs) == 3

    def test_syntax_error_position(self):
        with pytest.raises(ConfigError, match="line 2, column 11"):
            parse_config('{"problem":\n  {"n": 1,,}}')

    def test_unknown_keys(self):
        assert any("unknown" in m for m in problems_of({"problme": {}}, "evolve"))

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            parse_config("{}", "plot")

    def test_gn_window_note(self):
        cfg = resolve({"problem": {"n": 3, "q": 1.0, "gamma": 0.5, "p": 6.0}, "grid": {"N": 32}}, "evolve")
        assert any("Gagliardo-Nirenberg" in n for n in cfg.notes)


class TestFmt:
    def test_seventeen_digits(self):
        assert fmt(0.1) == "0.10000000000000001"
        assert fmt(None) == "" and fmt(True) == "true" and fmt(3) == "3"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestRunCommand:
    def test_kernel_table(self, tmp_path):
        assert run_command(["kernel-table", "--t", "0,1,2", "--r", "0,0.5,1", "--output-dir", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "kernel-table.csv")
        assert rows[0] == ["t", "r", "k_hat", "dk_hat", "g0_hat"]
        assert len(rows) == 10
        assert rows[4][:2] == ["1", "0"] and float(rows[4][2]) == pytest.approx(0.6321206, abs=1e-7)
        meta = json.loads((tmp_path / "kernel-table.json").read_text())
        assert meta["config"]["kernel"]["t"] == [0.0, 1.0, 2.0]
        assert {"version", "wall_clock_seconds", "started_utc"} <= set(meta)

    def test_lf_line_endings(self, tmp_path):
        run_command(["kernel-table", "--output-dir", str(tmp_path)])
        data = (tmp_path / "kernel-table.csv").read_bytes()
        assert b"\r" not in data and data.endswith(b"\n")

    def test_evolve_zero_data(self, tmp_path):
        argv = ["evolve", "--data", "zero", "--N", "64", "--L", "8", "--T", "1", "--h", "0.1",
                "--record-every", "2", "--output-dir", str(tmp_path)]
        assert run_command(argv) == 0
        rows = read_csv(tmp_path / "evolve.csv")
        assert all(float(x) == 0 for row in rows[1:] for x in row[1:])
        assert json.loads((tmp_path / "evolve.json").read_text())["summary"]["status"] == "completed"

    def test_validation_exit_code(self, tmp_path, capsys):
        assert run_command(["evolve", "--q", "0.9", "--output-dir", str(tmp_path)]) == 1
        assert "q < n/2" in capsys.readouterr().err
        assert not any(tmp_path.iterdir())

    def test_config_file_with_flag_override(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"kernel": {"t": [5.0], "r": [0.0, 1.0]}}))
        out = tmp_path / "out"
        assert run_command(["kernel-table", "--config", str(conf), "--r", "2", "--output-dir", str(out)]) == 0
        rows = read_csv(out / "kernel-table.csv")
        assert [r[:2] for r in rows[1:]] == [["5", "2"]]

    def test_bad_config_file(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text("{nope")
        assert run_command(["kernel-table", "--config", str(conf)]) == 1

    def test_sweep_summary_file(self, tmp_path):
        argv = ["lifespan-sweep", "--riesz", "regularized", "--N", "128", "--L", "32", "--T", "1", "--h", "0.1",
                "--eps-list", "1e-4,2e-4,4e-4,8e-4,1.6e-3,3.2e-3", "--output-dir", str(tmp_path)]
        assert run_command(argv) == 0
        assert read_csv(tmp_path / "lifespan-sweep.csv")[0] == ["epsilon", "T_low", "T_high", "status"]
        summ = read_csv(tmp_path / "lifespan-sweep_summary.csv")
        assert summ[0] == ["fitted_exponent", "theory_exponent", "gap"]
        assert summ[1] == ["", "-1.25", ""]


class TestDeterminism:
    def test_evolve_byte_identical(self, tmp_path):
        argv = ["evolve", "--N", "256", "--L", "32", "--T", "2", "--h", "0.05", "--record-every", "4"]
        assert run_command(argv + ["--output-dir", str(tmp_path / "a")]) == 0
        assert run_command(argv + ["--output-dir", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "evolve.csv").read_bytes() == (tmp_path / "b" / "evolve.csv").read_bytes()


class TestParallel:
    def test_order_preserved(self):
        assert ordered_map(abs, [-3, 1, -2], max_workers=2) == [3, 1, 2]

    def test_thread_cap_env(self, monkeypatch):
        monkeypatch.setenv("RPDW_THREADS", "3")
        assert thread_cap() == 3
        monkeypatch.setenv("RPDW_THREADS", "many")
        with pytest.raises(ValueError):
            thread_cap()
