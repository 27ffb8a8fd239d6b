import csv
import json
from pathlib import Path

import numpy as np
import pytest

from probmut import write_pool
from probmut.cli import main
from tests.conftest import synthetic_pool


@pytest.fixture(scope="module")
def pool_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("pools")
    write_pool(synthetic_pool(0.0, "healthy", 0, size=200), d / "healthy.csv")
    write_pool(synthetic_pool(0.8, "mid", 1, size=200), d / "trd_mid.csv")
    write_pool(synthetic_pool(10.0, "extreme", 2, size=200), d / "trd_extreme.csv")
    return d


def read_density(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    xs = np.array([float(r["x"]) for r in rows])
    dens = np.array([float(r["density"]) for r in rows])
    return xs, dens


def test_validate_ok(pool_dir, capsys):
    assert main(["validate", str(pool_dir / "healthy.csv")]) == 0
    assert "OK (200 records" in capsys.readouterr().out


def test_validate_bad_file_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("instance_id,seed,metric\na,1,nan\n")
    assert main(["validate", str(bad)]) == 3
    assert "data error" in capsys.readouterr().err


def test_simulate_roundtrip(tmp_path, capsys):
    out_file = tmp_path / "sim.csv"
    code = main(
        [
            "simulate", "--law", "truncated-normal", "--mu", "0.9", "--sigma", "0.01",
            "--size", "50", "--label", "sim", "--seed", "5", "--out-file", str(out_file),
        ]
    )
    assert code == 0
    assert main(["validate", str(out_file)]) == 0


def test_simulate_bernoulli_outcomes(tmp_path):
    out_file = tmp_path / "bern.csv"
    code = main(
        [
            "simulate", "--law", "per-input-bernoulli", "--p", "0.7", "--t-len", "20",
            "--size", "10", "--label", "bern", "--seed", "5", "--out-file", str(out_file),
        ]
    )
    assert code == 0
    header = out_file.read_text().splitlines()[0]
    assert header.endswith("o_18,o_19")


def test_test_subcommand(pool_dir, capsys):
    code = main(
        ["test", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_extreme.csv"), "--seed", "3"]
    )
    assert code == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["killed"] is True
    assert verdict["n1"] == 20


def test_strict_requires_seed(pool_dir, tmp_path, capsys):
    code = main(
        [
            "posterior", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_mid.csv"),
            "--strict", "--out", str(tmp_path),
        ]
    )
    assert code == 2
    assert "master seed" in capsys.readouterr().err


def test_posterior_export_normalized(pool_dir, tmp_path, capsys):
    code = main(
        [
            "posterior", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_extreme.csv"),
            "--seed", "17", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    xs, dens = read_density(tmp_path / "trd_extreme_density.csv")
    assert len(xs) == 1001
    assert np.trapezoid(dens, xs) == pytest.approx(1.0, abs=1e-3)
    # degenerate all-kill pools peak adjacent to 1
    assert xs[int(np.argmax(dens))] > 0.95
    summary = json.loads((tmp_path / "trd_extreme_posterior.json").read_text())
    assert len(summary["components"]) == 100
    assert summary["estimates"]["mmse"] > 0.95


def test_decide_full_run(pool_dir, tmp_path, capsys):
    code = main(
        [
            "decide", str(pool_dir / "healthy.csv"),
            str(pool_dir / "trd_mid.csv"), str(pool_dir / "trd_extreme.csv"),
            "--include-identity", "--seed", "101", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    labels = [m["label"] for m in report["mutants"]]
    assert labels[0] == "identity"
    assert report["mutants"][0]["protocol"] == "split-halves"
    identity_ratio = report["mutants"][0]["effect"]["raw_ratio"]
    extreme = next(m for m in report["mutants"] if m["label"] == "trd_extreme")
    assert identity_ratio < 0.97
    assert extreme["effect"]["display_ratio"] == ">2"
    assert extreme["effect"]["verdict"] == "likely-killed"
    assert 0.0 <= report["mutation_score"] <= 1.0
    out = capsys.readouterr().out
    assert "mutation score" in out
    # exports exist for every mutant
    for m in report["mutants"]:
        assert (tmp_path / m["exports"]["density_csv"]).exists()
        assert (tmp_path / m["exports"]["summary_json"]).exists()
    assert (tmp_path / "run_meta.json").exists()


def test_decide_usage_error_without_mutants(pool_dir):
    with pytest.raises(SystemExit) as exc:
        main(["decide", str(pool_dir / "healthy.csv")])
    assert exc.value.code == 2


def test_decide_stage_failure_writes_nothing(pool_dir, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("instance_id,seed,metric\na,1,nan\n")
    out = tmp_path / "out"
    code = main(
        [
            "decide", str(pool_dir / "healthy.csv"),
            str(pool_dir / "trd_mid.csv"), str(bad),
            "--seed", "101", "--out", str(out),
        ]
    )
    assert code == 3
    err = capsys.readouterr().err
    assert "bad.csv" in err  # stage-tagged message
    assert not (out / "report.json").exists()
    assert not list(out.glob("*_density.csv"))  # no partial results


def test_simulate_writes_config_sidecar(tmp_path):
    out_file = tmp_path / "sim.csv"
    main(
        [
            "simulate", "--mu", "0.9", "--sigma", "0.01", "--size", "20",
            "--label", "sim", "--seed", "5", "--out-file", str(out_file),
        ]
    )
    meta = json.loads(out_file.with_suffix(".meta.json").read_text())
    assert meta["master_seed"] == 5
    assert meta["population"]["size"] == 20


def test_score_recomputes(pool_dir, tmp_path, capsys):
    main(
        [
            "decide", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_mid.csv"),
            str(pool_dir / "trd_extreme.csv"), "--seed", "101", "--out", str(tmp_path),
        ]
    )
    capsys.readouterr()
    assert main(["score", str(tmp_path / "report.json"), "--theta", "1.15"]) == 0
    out = capsys.readouterr().out
    assert "mutation score" in out


def test_flakiness_table(pool_dir, tmp_path, capsys):
    code = main(
        [
            "flakiness", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_extreme.csv"),
            "--k", "20", "--samplings", "20", "--partitions", "3",
            "--seed", "7", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    means = report["mean_kill_probability"]
    assert means["identity"] < 0.15
    assert means["trd_extreme"] == pytest.approx(1.0, abs=0.01)
    rows = list(csv.DictReader(open(tmp_path / "flakiness.csv")))
    assert len(rows) == 3 * 2  # partitions x columns


def test_flakiness_k_too_large(pool_dir, tmp_path):
    code = main(
        [
            "flakiness", str(pool_dir / "healthy.csv"), "--k", "150",
            "--seed", "7", "--out", str(tmp_path),
        ]
    )
    assert code == 2


def test_flakiness_single_sampling_deterministic(pool_dir, tmp_path):
    args = [
        "flakiness", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_extreme.csv"),
        "--k", "20", "--samplings", "1", "--partitions", "1", "--seed", "7",
    ]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    ra = json.loads((tmp_path / "a" / "report.json").read_text())
    rb = json.loads((tmp_path / "b" / "report.json").read_text())
    assert ra["mean_kill_probability"] == rb["mean_kill_probability"]
    for v in ra["mean_kill_probability"].values():
        assert v in (0.0, 1.0)  # a single test is a single verdict


def test_tradeoff_csv_structure(pool_dir, tmp_path):
    code = main(
        [
            "tradeoff", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_mid.csv"),
            "--sizes", "25,60", "--n-pop", "2", "--n-reps", "2",
            "--seed", "23", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "tradeoff.csv")))
    assert len(rows) == 2 * 2
    assert set(rows[0]) == {
        "size", "pop_draw", "estimate_mu", "se_mu", "ci_lo_mu", "ci_hi_mu",
        "estimate_var", "se_var", "ci_lo_var", "ci_hi_var",
    }


def test_tradeoff_sizes_range_syntax(pool_dir, tmp_path):
    code = main(
        [
            "tradeoff", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_mid.csv"),
            "--sizes", "25:60:35", "--n-pop", "1", "--n-reps", "2",
            "--seed", "23", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "tradeoff.csv")))
    assert sorted({r["size"] for r in rows}) == ["25", "60"]


def test_export_plot(pool_dir, tmp_path):
    code = main(
        [
            "export-plot", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_mid.csv"),
            "--grid", "101", "--seed", "31", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    assert (tmp_path / "trd_mid_density.csv").exists()
    ideal_rows = list(csv.DictReader(open(tmp_path / "ideal_densities.csv")))
    assert len(ideal_rows) == 101
    assert {"x", "q_not_killed", "q_killed"} <= set(ideal_rows[0])
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["command"] == "export-plot"
    assert report["config"]["N"] == 100


def test_decide_determinism_byte_identical(pool_dir, tmp_path):
    args = [
        "decide", str(pool_dir / "healthy.csv"), str(pool_dir / "trd_mid.csv"),
        "--include-identity", "--seed", "424242",
    ]
    assert main(args + ["--out", str(tmp_path / "run1")]) == 0
    assert main(args + ["--out", str(tmp_path / "run2")]) == 0
    b1 = (tmp_path / "run1" / "report.json").read_bytes()
    b2 = (tmp_path / "run2" / "report.json").read_bytes()
    assert b1 == b2
