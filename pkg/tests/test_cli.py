import json
import subprocess
import sys
import warnings

import pytest
import yaml

from swelab.cli import main

BASE = {
    "kind": "qv-time",
    "sigma": "constant:1",
    "replicates": 12,
    "lattice": {"h": 0.0625, "t_max": 1.0, "x_lo": -2.0, "x_hi": 2.0},
    "params": {"t": 0.5, "x": 0.0, "n_pieces": 4},
}


def write_cfg(tmp_path, name="cfg.yaml", **kw):
    d = dict(BASE)
    d.update(kw)
    path = tmp_path / name
    path.write_text(yaml.safe_dump(d))
    return str(path)


def test_exit_zero_without_thresholds(tmp_path, capsys):
    code = main(["qv", write_cfg(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "done (no thresholds declared)" in out
    assert "kind=qv-time" in out


def test_exit_zero_with_passing_thresholds(tmp_path, capsys):
    cfg = write_cfg(tmp_path, thresholds=[
        {"stat": "qv_vs_exact_sigmas", "max": 10.0},
    ])
    code = main(["qv", cfg])
    out = capsys.readouterr().out
    assert code == 0
    assert "check qv_vs_exact_sigmas" in out
    assert out.rstrip().endswith("PASS")


def test_exit_one_when_a_threshold_fails(tmp_path, capsys):
    cfg = write_cfg(tmp_path, thresholds=[{"stat": "qv_mean", "max": -1.0}])
    code = main(["qv", cfg])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out


def test_exit_two_for_configuration_problems(tmp_path, capsys):
    code = main(["qv", str(tmp_path / "missing.yaml")])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err

    code = main(["clt", write_cfg(tmp_path)])  # kind does not match subcommand
    err = capsys.readouterr().err
    assert code == 2
    assert "accepts kinds ('clt',)" in err

    code = main(["qv", write_cfg(tmp_path), "--pieces", "5"])
    err = capsys.readouterr().err
    assert code == 2
    assert "not admissible" in err

    bad = tmp_path / "broken.yaml"
    bad.write_text("kind: [unclosed")
    code = main(["qv", str(bad)])
    assert code == 2
    assert "not valid YAML" in capsys.readouterr().err


def test_exit_three_for_runtime_failures(tmp_path, capsys):
    # an absurd coefficient overflows the field; the failing seed is named
    cfg = write_cfg(tmp_path, sigma="linear:1e300", replicates=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        code = main(["qv", cfg])
    err = capsys.readouterr().err
    assert code == 3
    assert "runtime error" in err and "seed" in err


def test_multi_count_pieces_require_a_ladder_config(tmp_path, capsys):
    code = main(["qv", write_cfg(tmp_path), "--pieces", "2,4"])
    assert code == 2
    assert "requires a ladder config" in capsys.readouterr().err
    ladder = write_cfg(
        tmp_path, "ladder.yaml", kind="ladder", replicates=110,
        params={"axis": "time", "t": 0.5, "x": 0.0, "counts": [1, 2]},
    )
    code = main(["qv", ladder, "--pieces", "1,2,4"])
    assert code == 0
    capsys.readouterr()


def test_verbose_prints_notes_and_stats(tmp_path, capsys):
    code = main(["qv", write_cfg(tmp_path), "-v"])
    out = capsys.readouterr().out
    assert code == 0
    assert "note: admissible temporal piece counts" in out
    assert "stat qv_mean" in out


def test_seed_override_changes_results(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["qv", cfg, "--seed", "1", "--out-dir", str(out_a)]) == 0
    assert main(["qv", cfg, "--seed", "2", "--out-dir", str(out_b)]) == 0
    capsys.readouterr()
    rep_a = json.loads((out_a / "study_report.json").read_text())
    rep_b = json.loads((out_b / "study_report.json").read_text())
    assert rep_a["config"]["base_seed"] == 1
    assert rep_a["stats"]["qv_mean"] != rep_b["stats"]["qv_mean"]


def test_csv_bytes_are_identical_for_any_worker_count(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out_1, out_2 = tmp_path / "w1", tmp_path / "w2"
    assert main(["qv", cfg, "--workers", "1", "--out-dir", str(out_1)]) == 0
    assert main(["qv", cfg, "--workers", "2", "--out-dir", str(out_2)]) == 0
    capsys.readouterr()
    csv_1 = (out_1 / "study_replicates.csv").read_bytes()
    csv_2 = (out_2 / "study_replicates.csv").read_bytes()
    assert csv_1 == csv_2


def test_report_subcommand_round_trips_the_verdict(tmp_path, capsys):
    cfg = write_cfg(tmp_path, out_dir=str(tmp_path / "out"),
                    thresholds=[{"stat": "qv_vs_exact_sigmas", "max": 10.0}])
    assert main(["qv", cfg]) == 0
    capsys.readouterr()
    report_path = tmp_path / "out" / "study_report.json"
    code = main(["report", str(report_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "kind=qv-time" in out and "PASS" in out

    assert main(["report", str(tmp_path / "nope.json")]) == 2
    capsys.readouterr()
    mangled = tmp_path / "mangled.json"
    mangled.write_text("{not json")
    assert main(["report", str(mangled)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    cfg = write_cfg(tmp_path)
    proc = subprocess.run(
        [sys.executable, "-m", "swelab.cli", "qv", cfg, "--replicates", "4"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "replicates=4" in proc.stdout
