import csv
import json
import math

import pytest
import yaml

from certbound.cli import main
from certbound.errors import NoConvergence


def read_csv(path):
    comments, rows = [], []
    with open(path) as fh:
        lines = [line for line in fh]
    data_lines = []
    for line in lines:
        (comments if line.startswith("#") else data_lines).append(line)
    reader = csv.DictReader(data_lines)
    for row in reader:
        rows.append(row)
    return comments, rows


def as_float(cell):
    return float(cell) if cell not in ("", None) else None


class TestSumCdfCommand:
    def test_fig1_preset_rows_and_containment(self, tmp_path):
        out = tmp_path / "fig1.csv"
        assert main(["sum-cdf", "--preset", "fig1", "--out", str(out)]) == 0
        comments, rows = read_csv(out)
        assert len(rows) == 31
        assert any("config.distribution.p: 0.2" in c for c in comments)
        for row in rows:
            exact = as_float(row["exact"])
            assert as_float(row["sp_lo"]) <= exact <= as_float(row["sp_hi"])
            assert as_float(row["normal_lo"]) <= exact <= as_float(row["normal_hi"])

    def test_single_point_at_the_mean_has_double_width(self, tmp_path):
        cfg = {
            "distribution": {"family": "bernoulli", "p": 0.2, "n": 100},
            "grid": {"start": 20.0, "stop": 20.0, "step": 1.0},
        }
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(cfg))
        out = tmp_path / "one.csv"
        assert main(["sum-cdf", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        _, rows = read_csv(out)
        (row,) = rows
        sp_width = as_float(row["sp_hi"]) - as_float(row["sp_lo"])
        be_width = as_float(row["normal_hi"]) - as_float(row["normal_lo"])
        assert sp_width == pytest.approx(2.0 * be_width, rel=1e-9)

    def test_out_of_hull_rows_flagged_not_fatal(self, tmp_path):
        out = tmp_path / "fig2.csv"
        assert main(["sum-cdf", "--preset", "fig2", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert rows[0]["a"] == "0"
        assert rows[0]["flag"] == "out_of_hull"
        assert rows[0]["sp_center"] == ""
        assert rows[1]["flag"] == ""


class TestCurveCommands:
    def test_dt_curve_from_config_file(self, tmp_path):
        cfg = {
            "channel": {"kind": "bsc", "delta": 0.11},
            "rate": 0.32,
            "grid": {"start": 200, "stop": 600, "step": 200},
        }
        cfg_path = tmp_path / "dt.yaml"
        cfg_path.write_text(yaml.safe_dump(cfg))
        out = tmp_path / "dt.csv"
        assert main(["dt-curve", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert [row["n"] for row in rows] == ["200", "400", "600"]
        for row in rows:
            exact = as_float(row["exact"])
            assert as_float(row["g"]) <= exact <= as_float(row["s"])
            assert row["gamma"] == ""

    def test_mc_curve_with_validation_block(self, tmp_path):
        cfg = {
            "channel": {"kind": "bsc", "delta": 0.11},
            "rate": 0.42,
            "grid": {"start": 200, "stop": 400, "step": 200},
            "validation": {"samples": 20000, "seed": 9},
        }
        cfg_path = tmp_path / "mc.yaml"
        cfg_path.write_text(yaml.safe_dump(cfg))
        out = tmp_path / "mc.csv"
        assert main(["mc-curve", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        _, rows = read_csv(out)
        for row in rows:
            assert as_float(row["gamma"]) > 0.0
            assert row["mc_value"] != ""
            assert as_float(row["mc_ci_low"]) <= as_float(row["mc_ci_high"])

    def test_figure_preset_without_validation_has_no_mc_columns(self, tmp_path):
        out = tmp_path / "fig3a.csv"
        assert main(["figure", "--preset", "fig3a", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert "mc_value" not in rows[0]
        assert len(rows) == 20

    def test_beta_trend_diagnostic(self, tmp_path):
        # below capacity the center should fall with n; warn-only diagnostic
        out = tmp_path / "fig3a.csv"
        assert main(["figure", "--preset", "fig3a", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        betas = [as_float(row["beta"]) for row in rows]
        bumps = sum(1 for a, b in zip(betas, betas[1:]) if b >= a)
        print(f"beta trend bumps across fig3a rows: {bumps}")


class TestJsonOutput:
    def test_round_trip(self, tmp_path):
        out = tmp_path / "fig1.json"
        assert main(["sum-cdf", "--preset", "fig1", "--out", str(out),
                     "--format", "json"]) == 0
        payload = json.loads(out.read_text())
        assert payload["artifact"].startswith("certbound")
        assert len(payload["rows"]) == 31
        # emitting the parsed object again reproduces the file byte for byte
        text = json.dumps(payload, indent=1) + "\n"
        assert text == out.read_text()
        row = payload["rows"][0]
        assert row["a"] == 5.0
        assert row["sp_lo"] <= row["exact"] <= row["sp_hi"]


class TestCliErrors:
    def test_bad_config_exits_2_and_writes_nothing(self, tmp_path):
        cfg_path = tmp_path / "bad.yaml"
        cfg_path.write_text(yaml.safe_dump({
            "channel": {"kind": "bsc", "delta": 0.7},
            "rate": 0.32,
            "grid": {"start": 100, "stop": 200, "step": 100},
        }))
        out = tmp_path / "never.csv"
        assert main(["dt-curve", "--config", str(cfg_path),
                     "--out", str(out)]) == 2
        assert not out.exists()

    def test_missing_required_field_names_the_path(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad2.yaml"
        cfg_path.write_text(yaml.safe_dump({
            "channel": {"kind": "bi_awgn"},
            "rate": 0.4,
            "grid": {"start": 100, "stop": 200, "step": 100},
        }))
        assert main(["dt-curve", "--config", str(cfg_path)]) == 2
        assert "channel.snr" in capsys.readouterr().err

    def test_preset_command_mismatch(self, tmp_path):
        assert main(["mc-curve", "--preset", "fig1",
                     "--out", str(tmp_path / "x.csv")]) == 2

    def test_numeric_failure_exits_3(self, tmp_path, monkeypatch):
        import certbound.cli as cli_mod
        monkeypatch.setattr(cli_mod, "dt_bounds",
                            lambda *a, **k: (_ for _ in ()).throw(
                                NoConvergence("forced")))
        out = tmp_path / "fail.csv"
        assert main(["dt-curve", "--preset", "fig3a", "--out", str(out)]) == 3
        assert not out.exists()


class TestDeterminism:
    def test_fig1_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sum-cdf", "--preset", "fig1"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        content_a = a.read_bytes().replace(str(a).encode(), b"OUT")
        content_b = b.read_bytes().replace(str(b).encode(), b"OUT")
        assert content_a == content_b
