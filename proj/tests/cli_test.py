"""Command-line contract checks; run by ctest with the qfno binary path."""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

QFNO = sys.argv[1]
failures = []


def run(*args, expect=0):
    p = subprocess.run([QFNO, *map(str, args)], capture_output=True, text=True)
    if p.returncode != expect:
        failures.append(f"{' '.join(map(str, args))}: exit {p.returncode}, wanted {expect}\n{p.stderr}")
    return p


def check(cond, what):
    if not cond:
        failures.append(what)


with tempfile.TemporaryDirectory() as tmp:
    t = Path(tmp)

    # Data generation is deterministic and validated.
    gen = ["gen-burgers", "--count", 10, "--resolution", 64, "--seed", 0, "--fine-resolution", 1024]
    out = json.loads(run(*gen, "--out", t / "a.bin").stdout)
    check(out["count"] == 10 and out["resolution"] == 64, "gen summary")
    run(*gen, "--out", t / "b.bin")
    check((t / "a.bin").read_bytes() == (t / "b.bin").read_bytes(), "gen not byte-identical")
    bad = run("gen-burgers", "--count", 10, "--resolution", 100, "--out", t / "c.bin", expect=2)
    check("resolution must be a power of two" in bad.stderr, "bad resolution message")
    check(bad.stdout == "", "stdout must stay empty on usage errors")
    run("gen-burgers", "--count", 4, "--resolution", 64, "--seed", 1, "--fine-resolution", 1024,
        "--out", t / "test.csv")

    # Train, then evaluate the checkpoint on the same test rows.
    common = ["--train-data", t / "a.bin", "--test-data", t / "test.csv", "--nc", 4, "--k", 2,
              "--epochs", 3, "--batch-size", 5, "--no-timing"]
    rows = {}
    for variant in ["sequential", "classical"]:
        d = t / variant
        summary = json.loads(run("train", *common, "--variant", variant, "--out-dir", d).stdout)
        for name in ["model.json", "metrics.csv", "summary.json", "run_config.json"]:
            check((d / name).exists(), f"{variant}: missing {name}")
        header = (d / "metrics.csv").read_text().splitlines()[0]
        check(header == "epoch,train_loss,test_rel_err,seconds", f"metrics header {header!r}")
        rows[variant] = list(csv.DictReader((d / "metrics.csv").open()))
        ev = json.loads(run("eval", "--model", d / "model.json", "--data", t / "test.csv").stdout)
        check(abs(ev["relative_error"] - summary["final_test_rel_err"]) <= 1e-12, f"{variant}: eval mismatch")
        check(summary["complexity_report"]["variant"] == variant, "summary complexity")
        check(summary["output_reduction"] == "real part", "summary records the real-part reduction")
    check(len(rows["sequential"]) == len(rows["classical"]) == 3, "metrics row counts")

    # Reproducible metrics into a fresh directory, and the saved run config replays.
    run("train", *common, "--variant", "sequential", "--out-dir", t / "again")
    check((t / "again/metrics.csv").read_bytes() == (t / "sequential/metrics.csv").read_bytes(), "metrics differ")
    run("train", "--config", t / "sequential/run_config.json", "--out-dir", t / "replay", "--no-timing")
    check((t / "replay/metrics.csv").read_bytes() == (t / "sequential/metrics.csv").read_bytes(), "replay differs")

    # RunConfig strictness and usage errors.
    (t / "bad.json").write_text(json.dumps({"learning_rate": 0.01, "bogus": 1}))
    run("train", "--config", t / "bad.json", "--train-data", t / "a.bin", "--n-test", 2, "--out-dir", t / "x", expect=2)
    run("train", "--train-data", t / "a.bin", "--out-dir", t / "x", expect=2)
    run("train", "--train-data", t / "a.bin", "--n-test", 2, "--out-dir", t / "x", "--variant", "quantum", expect=2)
    run("eval", "--model", t / "missing.json", "--data", t / "a.bin", expect=1)
    model = json.loads((t / "sequential/model.json").read_text())
    model["schema_version"] = 7
    (t / "future.json").write_text(json.dumps(model))
    fut = run("eval", "--model", t / "future.json", "--data", t / "test.csv", expect=1)
    check("7" in fut.stderr, "schema mismatch message names the version")

# Complexity table.
table = json.loads(run("report-complexity", "--variant", "all", "--nc", 8, "--ns", 64, "--k", 4).stdout)
check(len(table) == 4 and all(r["qubits"] == 72 for r in table), "4 rows with 72 qubits")
par = [r for r in table if r["variant"] == "parallel"][0]
check(par["circuit_count"] == 4, "parallel circuit count")
seq = json.loads(run("report-complexity", "--variant", "sequential", "--nc", 8, "--ns", 64, "--k", 4).stdout)[0]
seq2 = json.loads(run("report-complexity", "--variant", "sequential", "--nc", 8, "--ns", 128, "--k", 4).stdout)[0]
check(seq2["formula_depth"] - seq["formula_depth"] == 10, "doubling N_s adds N_c + 2")
run("report-complexity", "--nc", 0, expect=2)

# Verification suites.
rep = json.loads(run("verify", "--suite", "uqft").stdout)
names = {p["name"]: p["status"] for p in rep["properties"]}
check(names.get("F_n/√n equivalence n=2..64") == "pass", "uqft suite entry")
rep = json.loads(run("verify", "--suite", "equiv").stdout)
check(rep["pass"] and any("sequential" in p["name"] for p in rep["properties"]), "equiv suite")
run("verify", "--suite", "nonsense", expect=2)

if failures:
    print("\n".join(failures))
    sys.exit(1)
print("cli checks passed")
