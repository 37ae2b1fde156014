import csv
import json
import subprocess
import sys

import pytest

from devine import __version__
from devine.cli import main


def _base_flags(tmp_path, extra=()):
    return [
        "--servers", "10", "--link-prob", "0.6", "--duration", "30",
        "--leaders", "2", "--alpha", "3", "--beta", "2", "--seed", "5",
        "--out-dir", str(tmp_path), *extra,
    ]


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_validate_prints_resolved_config_and_dispersion_rule(capsys):
    code = main(["validate", "--servers", "25", "--leaders", "7", "--x", "2.5", "--injective"])
    assert code == 0
    out = capsys.readouterr().out
    config = json.loads(out[: out.rindex("}") + 1])
    assert config["generator"]["server_count"] == 25
    assert config["election"]["leaders"] == 7
    assert config["election"]["x"] == 2.5
    assert config["election"]["injective"] is True
    assert "second interpreted as variance" in out


def test_flags_override_config_file(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "algorithm": "firstfit",
        "duration": 30,
        "generator": {"server_count": 10, "arrival_rate": 1.5},
    }))
    code = main(["validate", "--config", str(config_path), "--duration", "44"])
    assert code == 0
    out = capsys.readouterr().out
    config = json.loads(out[: out.rindex("}") + 1])
    assert config["algorithm"] == "firstfit"
    assert config["duration"] == 44.0  # flag wins
    assert config["generator"]["arrival_rate"] == 1.5  # file survives elsewhere


def test_run_writes_all_artifacts(tmp_path, capsys):
    code = main(["run", *_base_flags(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "accepted" in out and f"outputs written to {tmp_path}" in out

    series = _read_csv(tmp_path / "series.csv")
    assert series[0][:4] == ["time", "arrivals", "acceptances", "acceptance_ratio"]
    assert len(series) == 4  # header + samples at 10, 20, 30

    per_arrival = _read_csv(tmp_path / "per_arrival.csv")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(per_arrival) - 1 == summary["arrivals"]
    assert summary["algorithm"] == "devine"
    assert summary["conservation_ok"] is True

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["tool"] == "devine"
    assert manifest["version"] == __version__
    assert manifest["master_seed"] == 5
    assert manifest["config"]["generator"]["server_count"] == 10

    trace_lines = (tmp_path / "trace.jsonl").read_text().splitlines()
    assert trace_lines
    assert {json.loads(line)["kind"] for line in trace_lines} <= {"EMBEDDING", "EMBEDDED", "DROP"}


def test_baseline_run_skips_the_trace_file(tmp_path):
    assert main(["run", "--algorithm", "grc", *_base_flags(tmp_path)]) == 0
    assert not (tmp_path / "trace.jsonl").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["embedding_messages"] == 0


def test_repeat_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", *_base_flags(a)]) == 0
    assert main(["run", *_base_flags(b)]) == 0
    for name in ("series.csv", "per_arrival.csv", "summary.json", "trace.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_manifest_reruns_the_same_simulation(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["run", *_base_flags(first)]) == 0
    assert main([
        "run", "--config", str(first / "manifest.json"), "--out-dir", str(second),
    ]) == 0
    assert (first / "series.csv").read_bytes() == (second / "series.csv").read_bytes()
    assert (first / "per_arrival.csv").read_bytes() == (second / "per_arrival.csv").read_bytes()


def test_out_dir_env_variable_is_honored(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DEVINE_OUT_DIR", str(tmp_path / "from_env"))
    assert main(["run", "--servers", "10", "--link-prob", "0.6", "--duration", "20",
                 "--leaders", "2", "--alpha", "3", "--beta", "2", "--seed", "5"]) == 0
    assert (tmp_path / "from_env" / "summary.json").exists()


def test_compare_writes_tables_and_notes_the_absent_algorithm(tmp_path, capsys):
    code = main([
        "compare", "--algorithms", "devine,firstfit", "--seeds", "1,2",
        *_base_flags(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "median_acceptance_ratio" in out
    assert "note: neurovine is not implemented" in out

    comparison = _read_csv(tmp_path / "comparison.csv")
    assert comparison[0][0] == "algorithm"
    assert len(comparison) == 5  # header + 2 algorithms x 2 seeds
    digest_col = comparison[0].index("workload_digest")
    seed_col = comparison[0].index("seed")
    by_seed = {}
    for row in comparison[1:]:
        by_seed.setdefault(row[seed_col], set()).add(row[digest_col])
    assert all(len(digests) == 1 for digests in by_seed.values())

    aggregate = _read_csv(tmp_path / "aggregate.csv")
    assert len(aggregate) == 3
    long_rows = _read_csv(tmp_path / "comparison_long.csv")
    assert len(long_rows) == 1 + 4 * 6  # 4 runs x 6 metrics

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["algorithms"] == ["devine", "firstfit"]
    assert manifest["seeds"] == [1, 2]


def test_compare_full_grid_row_count(tmp_path):
    code = main([
        "compare", "--seeds", "1,2,3",
        "--servers", "10", "--link-prob", "0.6", "--duration", "20",
        "--leaders", "2", "--alpha", "3", "--beta", "2",
        "--out-dir", str(tmp_path),
    ])
    assert code == 0
    comparison = _read_csv(tmp_path / "comparison.csv")
    assert len(comparison) == 13  # header + 4 algorithms x 3 seeds


def test_config_errors_exit_1(tmp_path, capsys):
    cases = [
        ["run", "--algorithm", "neurovine", "--out-dir", str(tmp_path)],
        ["run", "--algorithm", "mystery", "--out-dir", str(tmp_path)],
        ["validate", "--servers", "0"],
        ["validate", "--leaders", "0"],
        ["compare", "--algorithms", "devine,neurovine", "--out-dir", str(tmp_path)],
        ["compare", "--algorithms", "devine", "--seeds", "1,x", "--out-dir", str(tmp_path)],
        ["validate", "--config", str(tmp_path / "missing.json")],
    ]
    for argv in cases:
        assert main(argv) == 1, argv
        assert "config error:" in capsys.readouterr().err


def test_neurovine_message_names_it(capsys):
    assert main(["run", "--algorithm", "neurovine"]) == 1
    err = capsys.readouterr().err
    assert "neurovine" in err and "not implemented" in err


def test_malformed_config_file_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--config", str(bad)]) == 1
    assert "config error:" in capsys.readouterr().err


def test_runtime_failures_exit_2(tmp_path, capsys):
    # 3 servers with link probability 0 can never form a connected substrate
    code = main([
        "run", "--servers", "3", "--link-prob", "0", "--duration", "10",
        "--leaders", "2", "--out-dir", str(tmp_path),
    ])
    assert code == 2
    assert "runtime error:" in capsys.readouterr().err


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "devine", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert __version__ in proc.stdout
