import json
import subprocess
import sys
from pathlib import Path

import pytest

from greedylab import cli

DATA = Path(__file__).parent / "data"
GOLDEN_CONFIG = DATA / "golden_config.json"


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


L1_DIM3 = {
    "spaces": [{"builtin": "lp", "dimension": 3, "p": 1}],
    "grid": {"magnitudes": [0, 0.5, 1]},
    "renorm": {"multipliers": [1, 2]},
    "axiom_samples": 500,
}


def test_full_pipeline_l1(tmp_path, capsys):
    cfg = write_config(tmp_path, L1_DIM3)
    code, out, _ = run(["run", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    assert json.loads(out)["findings"] == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    (item,) = report["spaces"].values()
    assert all(e["value"] == 1.0 for e in item["constants"]["estimates"].values())
    assert all(r["status"] == "PASS" for r in item["ledger"])
    assert item["renorm"]["C_pg_renormed"]["value"] == 1.0
    assert item["axioms"]["passed"]
    assert report["schema_version"] == 1 and "timings" not in json.dumps(report)
    for name in ("axioms.json", "estimates.json", "ledger.json", "ledger.csv", "renorm.json", "annex.csv", "timings.json"):
        assert (tmp_path / "o" / name).exists(), name


def test_zero_weight_is_a_finding(tmp_path, capsys):
    cfg = {
        "spaces": [{"name": "bad", "dimension": 3, "p": 1, "norm": {"kind": "weighted_lp", "weights": [1, 0, 1]}}],
        "axiom_samples": 200,
    }
    code, _, _ = run(["spaces", "validate", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)], capsys)
    assert code == cli.EXIT_FINDINGS
    ax = json.loads((tmp_path / "axioms.json").read_text())
    assert not ax["spaces"]["bad"]["axioms"]["passed"]


def test_zero_weight_infinite_estimate_exit_code(tmp_path, capsys):
    cfg = {"spaces": [{"name": "bad", "dimension": 3, "p": 1, "norm": {"kind": "weighted_lp", "weights": [1, 0, 1]}}]}
    code, _, err = run(
        ["constants", "estimate", "--only", "Delta", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)],
        capsys,
    )
    assert code == cli.EXIT_DEGENERATE
    msg = json.loads(err.strip().splitlines()[-1])
    assert msg["error"] == "degenerate" and "witness" in msg


def test_phases_separately_and_only(tmp_path, capsys):
    cfg = write_config(tmp_path, L1_DIM3)
    out = str(tmp_path / "o")
    code, _, _ = run(["constants", "estimate", "--only", "C_pg,D", "--config", cfg, "--out", out], capsys)
    assert code == 0
    est = json.loads((tmp_path / "o" / "estimates.json").read_text())
    (entry,) = est["spaces"].values()
    assert sorted(entry["estimates"]) == ["C_pg", "D"]
    assert run(["theorems", "check", "--config", cfg, "--out", out], capsys)[0] == 0
    assert run(["renorm", "verify", "--config", cfg, "--out", out], capsys)[0] == 0
    assert run(["report", "export", "--format", "json", "--config", cfg, "--out", out], capsys)[0] == 0
    ledger = json.loads((tmp_path / "o" / "ledger.json").read_text())
    statuses = {r["id"]: r["status"] for r in next(iter(ledger["spaces"].values()))}
    assert statuses["thm4.1"] == "PASS" and statuses["prop3.7b.1"] == "NOT-APPLICABLE"


def test_missing_artifact_is_dependency_error(tmp_path, capsys):
    cfg = write_config(tmp_path, L1_DIM3)
    code, _, err = run(["theorems", "check", "--config", cfg, "--out", str(tmp_path / "empty")], capsys)
    assert code == cli.EXIT_DEPENDENCY
    msg = json.loads(err.strip())
    assert msg["error"] == "dependency" and "estimates.json" in msg["message"]


def test_stale_artifact_is_dependency_error(tmp_path, capsys):
    out = str(tmp_path / "o")
    run(["constants", "estimate", "--only", "D", "--config", write_config(tmp_path, L1_DIM3), "--out", out], capsys)
    other = write_config(tmp_path, {**L1_DIM3, "seed": 9}, "other.json")
    assert run(["theorems", "check", "--config", other, "--out", out], capsys)[0] == cli.EXIT_DEPENDENCY


def test_size_error_names_flag(tmp_path, capsys):
    cfg = write_config(tmp_path, L1_DIM3)
    code, _, err = run(["constants", "estimate", "--max-dim", "2", "--config", cfg, "--out", str(tmp_path)], capsys)
    assert code == cli.EXIT_SIZE
    assert "--max-dim" in json.loads(err.strip())["message"]


@pytest.mark.parametrize(
    "argv",
    [
        ["constants", "estimate", "--only", "C_xx"],
        ["constants", "bogus"],
        ["run", "--workers", "two"],
    ],
)
def test_usage_errors(tmp_path, capsys, argv):
    cfg = write_config(tmp_path, L1_DIM3)
    code = None
    try:
        code = cli.main(argv + ["--config", cfg, "--out", str(tmp_path)])
    except SystemExit as exc:
        code = exc.code
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert code == cli.EXIT_USAGE
    assert json.loads(err)["exit_code"] == cli.EXIT_USAGE


def test_bad_config_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path, {"spaces": [{"builtin": "lp", "dimension": 3, "p": 3}]})
    assert run(["spaces", "validate", "--config", cfg], capsys)[0] == cli.EXIT_USAGE
    assert run(["spaces", "validate", "--config", str(tmp_path / "nope.json")], capsys)[0] == cli.EXIT_USAGE


def test_annex_csv_golden(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert run(["constants", "estimate", "--config", str(GOLDEN_CONFIG), "--out", out], capsys)[0] == 0
    assert run(["report", "export", "--format", "csv", "--config", str(GOLDEN_CONFIG), "--out", out], capsys)[0] == 0
    got = (tmp_path / "o" / "annex.csv").read_text(encoding="utf-8")
    assert got == (DATA / "golden_annex.csv").read_text(encoding="utf-8")
    assert got.splitlines()[0] == "symbol,name,value,witness_ref"


def test_same_config_twice_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, {**L1_DIM3, "spaces": [{"builtin": "summing", "dimension": 3, "p": 0.5}]})
    a, b = tmp_path / "a", tmp_path / "b"
    run(["run", "--config", cfg, "--out", str(a), "--workers", "1"], capsys)
    run(["run", "--config", cfg, "--out", str(b), "--workers", "3"], capsys)
    for name in ("report.json", "annex.csv", "ledger.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "greedylab.cli", "--version"], capture_output=True, text=True, check=True
    )
    assert proc.stdout.startswith("greedylab ")
