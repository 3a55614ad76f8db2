import json
import subprocess
import sys

import pytest

from dealersim.cli import _build_config, build_parser, main

SMALL = ["--set", "population.fundamentalists=45",
         "--set", "population.chartists=45",
         "--set", "population.noise=10"]


def test_run_prints_summary(capsys):
    code = main(["run", "--steps", "200", "--seed", "t"] + SMALL)
    assert code == 0
    out = capsys.readouterr().out
    summary = json.loads(out)
    assert summary["seed"] == "t"
    assert summary["steps"] == 200
    assert summary["cash_conserved"] is True


def test_run_writes_and_is_byte_identical(tmp_path, capsys):
    for name in ("a", "b"):
        code = main(["run", "--steps", "150", "--seed", "bytes",
                     "--out", str(tmp_path / name)] + SMALL)
        assert code == 0
    for name in ("series.csv", "trades.csv", "meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_sweep_axis_by_name(tmp_path, capsys):
    code = main(["sweep", "risk_aversion_2_over_gamma",
                 "--steps", "150", "--runs", "1", "--seed", "s",
                 "--kinds", "as", "--out", str(tmp_path)] + SMALL)
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "axis,point,axis_value,kind,run,metric,value"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["grid"] == ["5", "10", "20", "40", "80"]


def test_sweep_spec_file(tmp_path, capsys):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps({
        "axis": "phi_max_asymmetric",
        "grid": [[10000, 1000], [1000, 10000]],
        "kinds": ["ir"],
        "runs": 1,
        "master_seed": "file-seed",
    }))
    out_dir = tmp_path / "out"
    code = main(["sweep", str(spec_file), "--steps", "150",
                 "--out", str(out_dir)] + SMALL)
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["master_seed"] == "file-seed"
    assert summary["grid"] == ["10000/1000", "1000/10000"]
    assert summary["kinds"] == ["ir"]


def test_sweep_spec_file_rejects_unknown_fields(tmp_path, capsys):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps({"axis": "phi_max_symmetric",
                                     "jitter": 3}))
    code = main(["sweep", str(spec_file), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "jitter" in capsys.readouterr().err


def test_sweep_failure_exit_code(tmp_path, capsys):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps({
        "axis": "risk_aversion_2_over_gamma",
        "grid": [10.0, -1.0],
        "kinds": ["as"],
        "runs": 1,
    }))
    code = main(["sweep", str(spec_file), "--steps", "150", "--seed", "f",
                 "--out", str(tmp_path / "o")] + SMALL)
    assert code == 1
    err = capsys.readouterr().err
    assert "point=-1" in err


def test_baselines_stdout_and_files(tmp_path, capsys):
    code = main(["baselines", "--steps", "150", "--runs", "1",
                 "--seed", "b", "--out", str(tmp_path)] + SMALL)
    assert code == 0
    out = capsys.readouterr().out
    assert "naive" in out
    lines = (tmp_path / "baselines.csv").read_text().splitlines()
    assert lines[0].startswith("kind,mean_total_return")
    assert [line.split(",")[0] for line in lines[1:]] == ["as", "ir", "naive"]
    payload = json.loads((tmp_path / "baselines.json").read_text())
    assert payload["runs"] == 1


def test_probsim_deterministic_and_csv(tmp_path, capsys):
    for name in ("a", "b"):
        code = main(["probsim", "--runs", "20", "--seed", "p",
                     "--variants", "as_unit,naive15",
                     "--out", str(tmp_path / name)])
        assert code == 0
    for name in ("runs.csv", "moments.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()
    lines = (tmp_path / "a" / "runs.csv").read_text().splitlines()
    assert lines[0] == "variant,run,terminal_wealth,terminal_inventory"
    assert len(lines) == 1 + 2 * 20
    moments = json.loads((tmp_path / "a" / "moments.json").read_text())
    assert set(moments) == {"as_unit", "naive15"}


def test_probsim_rejects_unknown_variant(capsys):
    code = main(["probsim", "--runs", "5", "--variants", "hedger"])
    assert code == 2
    assert "hedger" in capsys.readouterr().err


def test_skew_curve_stdout(capsys):
    code = main(["skew-curve", "--q-max", "50", "--q-step", "25"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "q,size_low_skew,size_high_skew"
    assert len(lines) == 4
    assert lines[1].startswith("0,5000.0,5000.0")


def test_skew_curve_file(tmp_path, capsys):
    out_file = tmp_path / "curve.csv"
    code = main(["skew-curve", "--q-max", "100", "--q-step", "50",
                 "--out", str(out_file)])
    assert code == 0
    assert out_file.read_text().splitlines()[0] == \
        "q,size_low_skew,size_high_skew"


def test_scale_defaults_and_overrides(tmp_path):
    parser = build_parser()
    args = parser.parse_args(["baselines"])
    assert _build_config(args).steps == 10_000
    assert _build_config(args).runs == 20
    args = parser.parse_args(["baselines", "--full-scale"])
    assert _build_config(args).steps == 40_000
    assert _build_config(args).runs == 100
    args = parser.parse_args(["baselines", "--steps", "123", "--runs", "4"])
    cfg = _build_config(args)
    assert cfg.steps == 123 and cfg.runs == 4
    # a config file pins the scale unless a flag overrides it
    ini = tmp_path / "base.ini"
    ini.write_text("[run]\nsteps = 777\nruns = 3\n")
    args = parser.parse_args(["baselines", "--config", str(ini)])
    cfg = _build_config(args)
    assert cfg.steps == 777 and cfg.runs == 3
    args = parser.parse_args(["baselines", "--config", str(ini),
                              "--steps", "55"])
    assert _build_config(args).steps == 55
    # --set pins the scale the same way the file does
    args = parser.parse_args(["baselines", "--set", "run.steps=444"])
    assert _build_config(args).steps == 444


def test_config_precedence_file_then_set_then_flag(tmp_path, capsys):
    ini = tmp_path / "m.ini"
    ini.write_text("[market]\ninitial_price = 500\n[dealer]\nkind = ir\n")
    parser = build_parser()
    args = parser.parse_args(["run", "--config", str(ini),
                              "--set", "market.initial_price=750"])
    cfg = _build_config(args)
    assert cfg.initial_price == 750.0
    assert cfg.dealer_kind == "ir"


def test_unknown_override_is_reported(capsys):
    code = main(["run", "--steps", "10", "--set", "market.slippage=1"])
    assert code == 2
    assert "slippage" in capsys.readouterr().err


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "dealersim.cli", "--version"],
        capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.startswith("dealersim ")
