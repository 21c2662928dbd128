"""One test per acceptance criterion, driving the shared registry.

The CLI selftest runs the same registry, so a criterion passing here is
the same fact as `iwafitt selftest` reporting it green.
"""

import time

import pytest

from iwafitt import acceptance
from iwafitt.cli import main


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in acceptance.run()}


def _check(results, number):
    r = results[number]
    print(r.line())
    assert r.passed, r.detail


def test_criterion_01_minors_match_structure(results):
    _check(results, 1)


def test_criterion_02_diagonal_spot_values(results):
    _check(results, 2)


def test_criterion_03_functorial_laws(results):
    _check(results, 3)


def test_criterion_04_class_calculus(results):
    _check(results, 4)


def test_criterion_05_odd_from_even(results):
    _check(results, 5)


def test_criterion_06_slope_and_parity(results):
    _check(results, 6)


def test_criterion_07_simulated_strata(results):
    _check(results, 7)


def test_criterion_08_shape_round_trip(results):
    _check(results, 8)


def test_criterion_09_reciprocity(results):
    _check(results, 9)


def test_criterion_10_companion_pipeline(results):
    _check(results, 10)


def test_criterion_11_selftest_deterministic_under_budget(capsys):
    t0 = time.perf_counter()
    code1 = main(["selftest"])
    out1 = capsys.readouterr().out
    code2 = main(["selftest"])
    out2 = capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    print(f"[{'PASS' if code1 == 0 else 'FAIL'}] 11 selftest: "
          f"two full runs in {elapsed:.1f}s")
    assert code1 == 0 and code2 == 0
    assert out1 == out2, "selftest output is not deterministic"
    assert elapsed < 120
