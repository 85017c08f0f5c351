"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import subprocess
import sys
import time

import pytest

from sievekit.selfcheck import (
    criterion_chebotarev,
    criterion_constants,
    criterion_counting,
    criterion_excluded,
    criterion_lod,
    criterion_permutations,
    criterion_sifting,
    criterion_thresholds,
)

# seconds; None where no limit is set
RUNTIME_LIMITS = {1: 60, 2: 5, 3: None, 4: 30, 5: None, 6: 180, 7: None, 8: 300}


def report(capsys, number, name, passed, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if passed else 'FAIL'} criterion {number} ({name}): {detail}")


def check(capsys, number, run):
    start = time.perf_counter()
    crit = run()
    elapsed = time.perf_counter() - start
    limit = RUNTIME_LIMITS[number]
    in_time = limit is None or elapsed <= limit
    timing = f"{elapsed:.1f}s" + (f" (limit {limit}s)" if limit else "")
    report(capsys, number, crit.name, crit.passed and in_time,
           f"measured {crit.measured} expected {crit.expected} in {timing}")
    assert crit.passed
    assert in_time


def test_criterion_1_thresholds(capsys):
    check(capsys, 1, criterion_thresholds)


def test_criterion_2_excluded_degrees(capsys):
    check(capsys, 2, criterion_excluded)


def test_criterion_3_constants(capsys):
    check(capsys, 3, criterion_constants)


def test_criterion_4_permutations(capsys):
    check(capsys, 4, criterion_permutations)


def test_criterion_5_counting(capsys):
    check(capsys, 5, criterion_counting)


def test_criterion_6_chebotarev(capsys):
    check(capsys, 6, lambda: criterion_chebotarev(10 ** 6))


def test_criterion_7_sifting(capsys):
    check(capsys, 7, criterion_sifting)


def test_criterion_8_level_of_distribution(capsys):
    check(capsys, 8, criterion_lod)


def test_criterion_9_determinism(capsys):
    cmd = [sys.executable, "-m", "sievekit", "selfcheck"]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    same = first.stdout == second.stdout and len(first.stdout) > 0
    report(capsys, 9, "determinism", same and first.returncode == 0,
           f"{len(first.stdout)} bytes, identical={same}, exit codes {first.returncode},{second.returncode}")
    assert first.returncode == 0 == second.returncode
    assert same
