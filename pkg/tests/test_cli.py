"""CLI behavior: CSV validity, manifests, replay, exit codes."""

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from qghz.cli import main

# Fast parameter overrides so every CLI test stays cheap.
FAST_FIG3A = [
    "--set", "n_eta=5", "--set", "mc_etas=[0.5]",
    "--shots", "400", "--seed", "3",
]


def run_cli(argv, env=None):
    """Run the CLI in a subprocess (needed for env-var isolation)."""
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "qghz.cli", *argv],
        capture_output=True,
        text=True,
        env=full_env,
    )


def read_csv(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestFigureCommand:
    def test_writes_csvs_and_manifest(self, tmp_path):
        out = tmp_path / "fig3b"
        assert main(["figure", "fig3b", "--out", str(out)]) == 0
        files = sorted(p.name for p in out.iterdir())
        assert files == ["attempts.csv", "manifest.json", "p_ghz.csv"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"][:2] == ["figure", "fig3b"]
        assert "artifact_version" in manifest

    def test_csvs_are_rfc4180(self, tmp_path):
        out = tmp_path / "fig2a"
        assert main(["figure", "fig2a", "--out", str(out)]) == 0
        for path in out.glob("*.csv"):
            raw = path.read_bytes()
            assert b"\r\n" in raw  # CRLF line endings
            rows = read_csv(path)
            header, data = rows[0], rows[1:]
            assert len(header) >= 2
            assert all(len(r) == len(header) for r in data)
            for r in data:
                for cell in r:
                    float(cell)  # every cell parses as a number

    def test_unknown_figure_exits_2(self, tmp_path):
        proc = run_cli(["figure", "nope", "--out", str(tmp_path)])
        assert proc.returncode == 2

    def test_bad_set_exits_2(self, tmp_path):
        assert main(["figure", "fig3b", "--out", str(tmp_path), "--set", "x"]) == 2

    def test_config_overrides_defaults(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[emitters]\nd = 4\np = 0.2\n")
        out = tmp_path / "fig3b"
        assert main(
            ["figure", "fig3b", "--config", str(cfg), "--out", str(out)]
        ) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"] == str(cfg)


class TestReplay:
    def test_replay_reproduces_bytes(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["figure", "fig3a", "--out", str(out1), *FAST_FIG3A]) == 0
        assert main(
            ["replay", str(out1 / "manifest.json"), "--out", str(out2)]
        ) == 0
        for path in sorted(out1.glob("*.csv")):
            assert (out2 / path.name).read_bytes() == path.read_bytes()

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        outs = {}
        for threads in ("1", "3"):
            out = tmp_path / f"w{threads}"
            proc = run_cli(
                ["figure", "fig3a", "--out", str(out), *FAST_FIG3A],
                env={"QGHZ_THREADS": threads},
            )
            assert proc.returncode == 0, proc.stderr
            outs[threads] = out
        for path in sorted(outs["1"].glob("*.csv")):
            assert (outs["3"] / path.name).read_bytes() == path.read_bytes()


class TestCheckCommand:
    def test_passes_and_reports(self, tmp_path):
        out = tmp_path / "check"
        assert main(["check", "--out", str(out), "--shots", "4000"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["pass"] is True
        assert report["max_closed_form_deviation"] < 1e-9
        assert len(report["closed_form_rows"]) == 2 * 3 * 4 * 3

    def test_injected_typo_fails_with_named_formula(self, tmp_path):
        out = tmp_path / "check"
        code = main(
            ["check", "--out", str(out), "--shots", "2000", "--inject-typo"]
        )
        assert code == 3
        report = json.loads((out / "report.json").read_text())
        assert report["pass"] is False
        assert report["worst_formula"] == "w_metrics_threshold"


class TestSweepCommand:
    def test_row_count_single_field(self, tmp_path):
        out = tmp_path / "s"
        assert main(
            ["sweep", "--out", str(out), "--vary", "p=0.05:0.3:10"]
        ) == 0
        rows = read_csv(out / "sweep.csv")
        assert len(rows) == 11  # header + 10

    def test_cartesian_order_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        args = ["--vary", "p=0.1:0.3:5", "--vary", "eta2=0.4,0.8"]
        assert main(["sweep", "--out", str(out1), *args]) == 0
        assert main(["sweep", "--out", str(out2), *args]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
        assert len(read_csv(out1 / "sweep.csv")) == 1 + 10

    def test_key_rate_monotone_in_d(self, tmp_path):
        out = tmp_path / "s"
        assert main(
            ["sweep", "--out", str(out), "--vary", "d=2,3,4,5"]
        ) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["key_rate_monotone_in_d"] is True

    def test_unknown_field_exits_2(self, tmp_path):
        assert main(
            ["sweep", "--out", str(tmp_path), "--vary", "flux=1:2:3"]
        ) == 2

    def test_requires_vary(self, tmp_path):
        assert main(["sweep", "--out", str(tmp_path)]) == 2
