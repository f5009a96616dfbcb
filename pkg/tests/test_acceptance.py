"""Acceptance criteria 1-10, one fresh process per criterion.

Each test prints ``ACk PASS|FAIL <time>s (limit <L>s) <criterion>``; the
lines are also repeated in the terminal summary.
"""

import json
import os
import subprocess
import sys

import pytest

from acceptance_checks import CHECKS

HERE = os.path.dirname(os.path.abspath(__file__))
LINES = []


def run_check(name: str) -> dict:
    res = subprocess.run([sys.executable, os.path.join(HERE, "acceptance_checks.py"), name],
                         capture_output=True, text=True, check=False, cwd=HERE)
    if res.returncode != 0:
        return {"ok": False, "detail": None, "error": res.stderr.strip().splitlines()[-1:], "seconds": float("nan")}
    return json.loads(res.stdout.strip().splitlines()[-1])


@pytest.mark.parametrize("name", list(CHECKS))
def test_acceptance(name):
    _, limit, desc = CHECKS[name]
    rec = run_check(name)
    in_time = rec["seconds"] < limit
    passed = rec["ok"] and in_time
    line = f"{name:<5} {'PASS' if passed else 'FAIL'}  {rec['seconds']:7.2f}s (limit {limit}s)  {desc}"
    if not rec["ok"]:
        line += f"  detail={rec['detail']} error={rec['error']}"
    elif not in_time:
        line += "  [too slow]"
    LINES.append(line)
    print(line)
    assert rec["ok"], rec
    assert in_time, f"{name} took {rec['seconds']:.2f}s, limit {limit}s"
