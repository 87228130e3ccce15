#!/usr/bin/env python3
"""Smoke-test `compare`: table and gap report exist and are coherent."""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def main() -> int:
    binary, config = sys.argv[1], sys.argv[2]
    with tempfile.TemporaryDirectory() as tmp:
        cmd = [
            binary, "compare", config,
            "--runs", "20",
            "--horizon", "300",
            "--seed", "7",
            "--out", tmp,
        ]
        subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)

        with open(Path(tmp) / "compare.csv", newline="") as f:
            rows = list(csv.reader(f))
        if rows[0] != ["schedule", "J", "std_error"]:
            print("unexpected compare.csv header:", rows[0])
            return 1
        values = {r[0]: float(r[1]) for r in rows[1:]}
        for key in ("offline", "greedy", "mdp", "LB"):
            if key not in values:
                print("missing row:", key)
                return 1
        if not values["LB"] <= min(values["offline"], values["greedy"],
                                   values["mdp"]) + 1e-6:
            print("lower bound exceeds a simulated schedule:", values)
            return 1

        report = json.loads((Path(tmp) / "gap_report.json").read_text())
        for key in ("lower_bound", "schedules"):
            if key not in report:
                print("gap report missing field:", key)
                return 1
        for name, entry in report["schedules"].items():
            gap = entry["optimality_gap_upper_bound"]
            if abs(gap - (entry["mean_J"] - report["lower_bound"])) > 1e-9:
                print("inconsistent gap for", name)
                return 1
    print("compare outputs coherent")
    return 0


if __name__ == "__main__":
    sys.exit(main())
