import csv
import json
from pathlib import Path

import pytest

from ulmuting import classify_regime, load_config
from ulmuting.cli import (SweepSpec, apply_sweep_value, load_sweep, main,
                          report, run)

CONFIG = Path(__file__).resolve().parents[1] / "src/ulmuting/data/table3.toml"


def _write_sweep(path, text):
    path.write_text(text)
    return path


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    sweep = _write_sweep(tmp / "sweep.toml", """
parameter = "i0_dbm"
grid = [-90.0, -60.0]
engines = "both"
schemes = ["IAM", "IAFPC"]
""")
    out = tmp / "out"
    code = run(CONFIG, sweep, out, seed=7, n_drops=60,
               gamma_grid_db=(-10.0, 0.0, 10.0, 20.0))
    assert code == 0
    return out


def test_outputs_exist_with_schema(run_dir):
    for name in ("pr_active", "mean_power_w", "mean_interference_w",
                 "var_interference_w2", "mean_se_bps_hz", "mean_br_bps"):
        path = run_dir / f"{name}.csv"
        assert path.exists()
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        assert set(rows[0]) == {"sweep_value", "scheme", "engine", "metric",
                                "value", "ci_low", "ci_high"}
        # no analytic rows for IAFPC (no framework), MC rows for both schemes
        assert not any(r["scheme"] == "IAFPC" and r["engine"] == "analytic"
                       for r in rows)
        assert any(r["scheme"] == "IAFPC" and r["engine"] == "montecarlo"
                   for r in rows)
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert len(manifest["points"]) == 4


def test_rerun_is_byte_identical(run_dir, tmp_path):
    sweep = _write_sweep(tmp_path / "sweep.toml", """
parameter = "i0_dbm"
grid = [-90.0, -60.0]
engines = "both"
schemes = ["IAM", "IAFPC"]
""")
    out2 = tmp_path / "out2"
    assert run(CONFIG, sweep, out2, seed=7, n_drops=60,
               gamma_grid_db=(-10.0, 0.0, 10.0, 20.0)) == 0
    for path in sorted(run_dir.glob("*.csv")):
        assert (out2 / path.name).read_bytes() == path.read_bytes()


def test_report_prints_deviations_and_regimes(run_dir, capsys):
    assert report(run_dir, make_figures=True) == 0
    out = capsys.readouterr().out
    assert "max |analytic-mc|" in out
    assert "pr_active" in out
    # regime labels match classify_regime of the resolved configs
    cfg = load_config(CONFIG)
    want_m90 = classify_regime(cfg).value
    want_m60 = classify_regime(cfg.with_caps(i0=10 ** ((-60 - 30) / 10))).value
    assert want_m90 in out and want_m60 in out
    figures = list((run_dir / "figures").glob("*.png"))
    assert len(figures) >= 9


def test_report_analytic_only_shows_na(tmp_path, capsys):
    sweep = _write_sweep(tmp_path / "s.toml", """
parameter = "weight_ratio_db"
grid = [0.0, 9.0]
engines = "analytic"
schemes = ["IAM"]
""")
    out = tmp_path / "o"
    assert run(CONFIG, sweep, out, seed=1, n_drops=10,
               gamma_grid_db=(0.0,)) == 0
    assert report(out, make_figures=False) == 0
    assert "n/a" in capsys.readouterr().out


def test_empty_grid_rejected(tmp_path, capsys):
    sweep = _write_sweep(tmp_path / "bad.toml", """
parameter = "i0_dbm"
grid = []
""")
    code = run(CONFIG, sweep, tmp_path / "o", seed=1, n_drops=10)
    assert code != 0
    assert "ERROR" in capsys.readouterr().err


def test_missing_files_rejected(tmp_path, capsys):
    assert run(tmp_path / "nope.toml", tmp_path / "nope2.toml",
               tmp_path / "o", 1, 10) != 0
    assert report(tmp_path / "empty") != 0


def test_sweep_validation():
    assert SweepSpec("bogus", (1.0,)).validate()
    assert SweepSpec("i0_dbm", ()).validate()
    assert SweepSpec("i0_dbm", (1.0,), engines="magic").validate()
    assert SweepSpec("i0_dbm", (1.0,), schemes=("XYZ",)).validate()
    assert not SweepSpec("i0_dbm", (-90.0,), "both", ("IAM",)).validate()


def test_apply_sweep_value():
    cfg = load_config(CONFIG)
    assert apply_sweep_value(cfg, "epsilon", 0.5).epsilon == 0.5
    assert apply_sweep_value(cfg, "lambda_scale", 2.0).tiers[0].density \
        == pytest.approx(4e-6)
    w = apply_sweep_value(cfg, "weight_ratio_db", 12.0)
    assert w.tiers[0].assoc_weight == pytest.approx(10 ** 1.2)


def test_main_entry(tmp_path):
    sweep = _write_sweep(tmp_path / "s.toml", """
parameter = "i0_dbm"
grid = [-90.0]
engines = "analytic"
schemes = ["IAM"]
""")
    out = tmp_path / "o"
    assert main(["run", "--config", str(CONFIG), "--sweep", str(sweep),
                 "--out", str(out), "--seed", "1", "--drops", "5"]) == 0
    assert main(["report", "--out", str(out), "--no-figures"]) == 0
