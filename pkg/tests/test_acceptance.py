"""Acceptance suite: one test per criterion at its stated tolerance.

Every result line is printed immediately and repeated in the pytest
terminal summary. Run standalone with ``python tests/test_acceptance.py``.
"""

import sys

import pytest

from deepstrong import regression

ACCEPTANCE_LINES: list[str] = []


def _run(fn):
    res = regression.run_one(fn)
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    return res


def _check(fn):
    res = _run(fn)
    assert res.passed, res.line()


def test_criterion_01_eta_mapping():
    _check(regression.check_eta_mapping)


def test_criterion_02_oracle_equivalence():
    _check(regression.check_oracle_equivalence)


def test_criterion_03_mode_counts():
    _check(regression.check_mode_counts)


def test_criterion_04_asymptotics():
    _check(regression.check_asymptotics)


@pytest.mark.slow
def test_criterion_05_time_frequency():
    _check(regression.check_time_frequency)


def test_criterion_06_energy_conservation():
    _check(regression.check_energy_conservation)


def test_criterion_07_ground_statistics():
    _check(regression.check_ground_statistics)


def test_criterion_08_detuning():
    _check(regression.check_detuning)


def test_criterion_09_scaling():
    _check(regression.check_scaling)


def test_criterion_10_table_trend():
    _check(regression.check_table_trend)


if __name__ == "__main__":
    results = [_run(fn) for fn in regression.CHECKS]
    sys.exit(0 if all(r.passed for r in results) else 1)
