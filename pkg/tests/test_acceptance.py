"""Acceptance gate: every criterion at its stated tolerance.

Run with ``pytest -v -s tests/test_acceptance.py`` to see one pass/fail
line per criterion; ``rmt verify --suite all`` drives the same checks.
"""

import pytest

from rmtlab import acceptance


def _run(check):
    result = check()
    print(f"\n{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail}")
    assert result.passed, result.detail


def test_criterion_01_rg_flow_prints_catalan_series():
    _run(acceptance.check_rg_flow_catalan)


def test_criterion_02_flow_equals_wick_oracle():
    _run(acceptance.check_flow_wick_equivalence)


def test_criterion_03_exact_finite_n_moments():
    _run(acceptance.check_finite_n_moments)


def test_criterion_04_monte_carlo_universality():
    _run(acceptance.check_universality)


def test_criterion_05_violation_detection():
    _run(acceptance.check_violation_detection)


def test_criterion_06_damped_dependence_keeps_semicircle():
    _run(acceptance.check_damped_positive_direction)


def test_criterion_07_combinatorial_ground_truth():
    _run(acceptance.check_combinatorial_ground_truth)


def test_criterion_08_eigensolver_contract():
    _run(acceptance.check_eigensolver)


def test_criterion_09_quartic_invariant_deviation():
    _run(acceptance.check_quartic_deviation)


def test_criterion_10_byte_identical_reruns():
    _run(acceptance.check_reproducibility)
