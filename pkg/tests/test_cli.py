from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from aoi_contract.cli import OUT_ENV, main
from aoi_contract.config import load_config
from aoi_contract.errors import DomainError
from aoi_contract.harness import rises_then_falls, run_sweep

GOLDEN = Path(__file__).parent / "golden" / "csv_headers.txt"


def cfg_file(tmp_path, obj) -> str:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(obj))
    return str(path)


def header(path: Path) -> str:
    return path.read_text().splitlines()[0]


class TestSolve:
    def test_defaults(self, tmp_path):
        assert main(["solve", "--out", str(tmp_path)]) == 0
        menu = json.loads((tmp_path / "menu.json").read_text())
        assert menu["pt"]["notes"] and "coincides" in menu["pt"]["notes"][0]
        assert menu["config"]["ladder"]["N"] == 10
        rows = list(csv.DictReader((tmp_path / "report.csv").open()))
        assert len(rows) == 20 and rows[0]["solver"] == "eut"

    def test_single_type(self, tmp_path):
        cfg = cfg_file(tmp_path, {"ladder": {"gamma": [0.004]}})
        assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
        menu = json.loads((tmp_path / "menu.json").read_text())
        item = menu["eut"]["items"][0]
        assert len(menu["eut"]["items"]) == 1
        assert item["worker_utility"] == pytest.approx(0.0, abs=1e-12)

    def test_mixed_regime_report(self, tmp_path):
        cfg = cfg_file(tmp_path, {"preferences": {"eta": 0.5, "u_ref": 121.0}})
        assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
        pt = json.loads((tmp_path / "menu.json").read_text())["pt"]
        assert pt["case_tag"] == "Mixed"
        assert pt["adjusted_types"] == list(range(1, pt["m"] + 1))

    def test_bad_config_exits_one(self, tmp_path, capsys):
        cfg = cfg_file(tmp_path, {"timing": {"a": 0}})
        assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 1
        assert "a >= 1" in capsys.readouterr().err

    def test_output_directory_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
        assert main(["solve"]) == 0
        assert (tmp_path / "envout" / "menu.json").exists()


class TestSweep:
    def test_unit_beta_reports_soft_failure(self, tmp_path):
        assert main(["sweep", "--axis", "a", "--out", str(tmp_path)]) == 2
        rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
        assert len(rows) == 13 * 4 * 10

    def test_beta5_preset_rises_then_falls(self, tmp_path):
        assert main(["sweep", "--axis", "a", "--preset", "table1-beta5", "--out", str(tmp_path)]) == 0
        rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
        ca = [float(r["provider_utility"]) for r in rows if r["mechanism"] == "CA" and r["type_index"] == "1"]
        assert rises_then_falls(ca)

    def test_axis_must_match_case(self, tmp_path, capsys):
        assert main(["sweep", "--axis", "c", "--out", str(tmp_path)]) == 1
        assert "fixed_update" in capsys.readouterr().err
        cfg = load_config()
        with pytest.raises(DomainError):
            run_sweep(cfg, "q", [1], tmp_path)

    def test_c_axis_under_fixed_update(self, tmp_path):
        cfg = cfg_file(tmp_path, {"timing": {"case": "fixed_update", "c": 2}})
        code = main(["sweep", "--config", cfg, "--axis", "c", "--values", "1,2,3", "--out", str(tmp_path)])
        assert code in (0, 2)
        assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 1 + 3 * 4 * 10

    def test_eta_axis(self, tmp_path):
        cfg = cfg_file(tmp_path, {"preferences": {"u_ref": 121.0}})
        assert main(["sweep", "--config", cfg, "--axis", "eta", "--values", "0.5,1,1.5", "--out", str(tmp_path)]) == 0
        rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
        assert {r["mechanism"] for r in rows} == {"CA"} and len(rows) == 30

    def test_eta_axis_needs_values(self, tmp_path):
        assert main(["sweep", "--axis", "eta", "--out", str(tmp_path)]) == 1

    def test_integer_axis_rejects_fractions(self, tmp_path):
        assert main(["sweep", "--axis", "a", "--values", "1.5", "--out", str(tmp_path)]) == 1

    def test_parallel_matches_serial(self, tmp_path):
        cfg = load_config()
        run_sweep(cfg, "a", [1, 4, 9], tmp_path / "one", jobs=1)
        run_sweep(cfg, "a", [1, 4, 9], tmp_path / "two", jobs=2)
        for name in ("sweep.csv", "sweep.json"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


class TestValidateAndSimulate:
    def test_validate_with_oracle(self, tmp_path):
        assert main(["validate", "--oracle", "--out", str(tmp_path)]) == 0
        out = json.loads((tmp_path / "validate.json").read_text())
        assert out["enumeration"]["cases"] == 338
        assert out["oracle"] and out["oracle"][0]["ok"]
        dev = {(r["c"], r["a"]): r for r in out["printed_latency_deviation"]}
        assert dev[(2, 3)]["printed"] == pytest.approx(5.2)
        assert dev[(2, 3)]["enumerated"] == pytest.approx(3.2)
        for n in ("4", "6"):
            curve = out["ic_curves"][n]["utility"]
            assert out["ic_curves"][n]["peaks_at_own"]
            assert curve[int(n) - 1] >= max(curve) - 1e-9

    def test_simulate(self, tmp_path):
        assert main(["simulate", "--samples", "20000", "--out", str(tmp_path)]) == 0
        rows = list(csv.DictReader((tmp_path / "simulate.csv").open()))
        assert [int(r["c"]) for r in rows] == list(range(1, 14))
        assert all(r["within_5se"] == "true" for r in rows)

    def test_compare(self, tmp_path):
        assert main(["compare", "--preset", "table1-beta5", "--out", str(tmp_path)]) == 0
        assert main(["compare", "--out", str(tmp_path)]) == 2

    def test_enumerated_latency_flag(self, tmp_path):
        assert main(["solve", "--latency-model", "enumerated", "--out", str(tmp_path)]) == 0
        menu = json.loads((tmp_path / "menu.json").read_text())
        assert menu["eut"]["latency_model"] == "enumerated"


def test_csv_headers_are_pinned(tmp_path):
    main(["solve", "--out", str(tmp_path)])
    main(["sweep", "--axis", "a", "--values", "2,3", "--out", str(tmp_path)])
    main(["compare", "--out", str(tmp_path)])
    main(["simulate", "--samples", "100", "--out", str(tmp_path)])
    got = "".join(
        f"{name}: {header(tmp_path / name)}\n"
        for name in ("report.csv", "sweep.csv", "compare.csv", "simulate.csv")
    )
    assert got == GOLDEN.read_text()


def test_same_seed_gives_identical_files(tmp_path):
    for run in ("x", "y"):
        d = str(tmp_path / run)
        main(["validate", "--seed", "11", "--out", d])
        main(["sweep", "--axis", "a", "--out", d])
        main(["simulate", "--seed", "11", "--samples", "5000", "--out", d])
    for name in ("validate.json", "sweep.csv", "sweep.json", "simulate.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "aoi_contract", "solve", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "menu.json" in proc.stdout
