"""Acceptance suite: one PASS/FAIL line per criterion.

Runs ``beltrami suite --seed 42`` twice into the same directory.  The first
run supplies criteria 1-8, the pair supplies the determinism criterion 9.
Lines are collected for the terminal summary (see ``conftest.py``); run this
file directly to print them without pytest.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

import pytest

from beltrami.cli import main

# wall-clock budgets in seconds, per criterion
BUDGETS = {1: 120, 2: 60, 4: 120, 7: 180, 8: 300}
TITLES = {9: "determinism: suite --seed 42 twice gives bitwise-identical report.json"}

LINES: dict[int, str] = {}


def _run_suite(out: Path) -> tuple[int, bytes, dict]:
    status = main(["suite", "--seed", "42", "--out", str(out)])
    report = (out / "report.json").read_bytes()
    timings = json.loads((out / "timings.json").read_text())
    return status, report, timings


@pytest.fixture(scope="session")
def suite_runs():
    out = Path(tempfile.mkdtemp(prefix="beltrami-suite-"))
    try:
        first = _run_suite(out)
        second = _run_suite(out)
    finally:
        shutil.rmtree(out, ignore_errors=True)
    return first, second


def evaluate(number: int, runs) -> tuple[bool, str]:
    (status, raw, timings), (_, raw2, _) = runs
    if number == 9:
        ok = raw == raw2
        detail = "" if ok else " (report.json differs between runs)"
        return ok, f"[{'PASS' if ok else 'FAIL'}] criterion 9: {TITLES[9]}{detail}"
    report = json.loads(raw)
    res = report["results"][str(number)]
    prefix = f"criterion {number}: "
    failed = [a["name"][len(prefix):] for a in report["assertions"]
              if a["name"].startswith(prefix) and not a["pass"]]
    seconds = float(timings[str(number)])
    budget = BUDGETS.get(number)
    if budget is not None and seconds > budget:
        failed.append(f"runtime {seconds:.1f}s > {budget}s")
    ok = res["pass"] and not failed
    tail = f" (failed: {'; '.join(failed)})" if failed else ""
    limit = f" / {budget}s" if budget else ""
    status = "PASS" if ok else "FAIL"
    return ok, f"[{status}] criterion {number}: {res['title']} [{seconds:.1f}s{limit}]{tail}"


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number, suite_runs):
    ok, line = evaluate(number, suite_runs)
    LINES[number] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    out = Path(tempfile.mkdtemp(prefix="beltrami-suite-"))
    runs = (_run_suite(out), _run_suite(out))
    shutil.rmtree(out, ignore_errors=True)
    results = [evaluate(n, runs) for n in range(1, 10)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
