#!/usr/bin/env python3
"""Run the CLI on small studies and validate every JSON report against the schema.

usage: check_schema.py CLI SCHEMA WORKDIR [REPORT.json ...]

Extra reports (for example the shipped reference files) are validated as well.
"""
import copy
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema

RUNS = {
    "table1": ["--reps", "3", "--m", "50", "--m", "100"],
    "table2": ["--reps", "3", "--m", "100", "--eps", "0.05"],
    "table3": ["--reps", "3", "--n", "20", "--eps", "0.1"],
    "table4": ["--reps", "3", "--n", "20", "--eps", "0.1"],
    "table5": ["--reps", "20"],
    # starved budget: every replication fails and the cell carries nulls
    "starved": ["--reps", "2", "--m", "1000", "--eps", "0.001", "--max-draws", "2000"],
}


def run(cli, name, args, out):
    sub = "table1" if name == "starved" else name
    cmd = [cli, sub, "--format", "json", "--out-dir", str(out), "--seed", "7", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(cmd)} exited {proc.returncode}: {proc.stderr}")
    return json.loads((out / f"{sub}.json").read_text())


def consistent(doc):
    errors = []
    for t in doc["tables"]:
        for row in t["rows"]:
            if len(row) != len(t["columns"]):
                errors.append(f"{t['name']}: row width {len(row)} != {len(t['columns'])}")
    for c in doc["cells"]:
        kept = len(c["replicate_values"])
        if kept + c["excluded"] != c["replications"]:
            errors.append(f"{c['estimator']}: kept + excluded != replications")
        if len(c["failures"]) != c["excluded"]:
            errors.append(f"{c['estimator']}: failures list length != excluded")
        if (c["boxplot"] is None) != (kept == 0):
            errors.append(f"{c['estimator']}: boxplot presence does not match replicates")
    return errors


def main():
    cli, schema_path, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    shutil.rmtree(work, ignore_errors=True)

    failed = False
    docs = {}
    for name, args in RUNS.items():
        out = work / name
        doc = run(cli, name, args, out)
        docs[name] = doc
        problems = [e.message for e in validator.iter_errors(doc)] + consistent(doc)
        print(f"{'PASS' if not problems else 'FAIL'} {name}")
        for p in problems:
            print("   ", p)
        failed |= bool(problems)

    for extra in sys.argv[4:]:
        doc = json.loads(pathlib.Path(extra).read_text())
        problems = [e.message for e in validator.iter_errors(doc)] + consistent(doc)
        print(f"{'PASS' if not problems else 'FAIL'} {extra}")
        for p in problems:
            print("   ", p)
        failed |= bool(problems)

    if docs["starved"]["cells"][0]["mean"] is not None:
        print("FAIL starved cell should have a null mean")
        failed = True

    # the validator must reject malformed reports
    bad = copy.deepcopy(docs["table5"])
    bad["cells"][0]["mse"] = -1.0
    bad2 = copy.deepcopy(docs["table5"])
    del bad2["metadata"]["seed"]
    bad3 = copy.deepcopy(docs["table5"])
    bad3["schema_version"] = 2
    for label, d in (("negative mse", bad), ("missing seed", bad2), ("schema version", bad3)):
        if validator.is_valid(d):
            print(f"FAIL schema accepted a report with {label}")
            failed = True
        else:
            print(f"PASS schema rejects {label}")

    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
