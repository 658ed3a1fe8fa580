"""Acceptance gate: one test per exit criterion, at the stated tolerances.

Each test prints the measured one-line verdict (visible with ``pytest -s``
or on failure) and asserts the criterion.  Criteria 8 and 9 encode
statements that cannot hold at these sizes (see the failure messages and
README); they are asserted faithfully rather than weakened, so the suite
reports them red.
"""

import math

import pytest

import toeplab.acceptance as acc
from toeplab.harness import ExperimentConfig

CONFIG = ExperimentConfig()


def _run(fn):
    result = fn(CONFIG)
    print(result.line())
    assert result.passed, "; ".join(result.failures)
    return result


def test_criterion_01_variational_constant():
    r = _run(acc.criterion_01_variational_constant)
    assert abs(r.details["K1_squared"] - acc.GARSIA_CONSTANT_SQ) <= 1e-4


def test_criterion_02_scaling_law():
    r = _run(acc.criterion_02_scaling_law)
    assert r.details["gap_half"] <= 1e-6
    assert r.details["gap_four"] <= 1e-6


def test_criterion_03_norm_chain():
    r = _run(acc.criterion_03_norm_chain)
    assert 0.0 < r.details["gap_at_512"] <= 0.05
    assert abs(r.details["sine_estimate"] - r.details["K1"]) <= 2e-3


def test_criterion_04_spectral_identity():
    r = _run(acc.criterion_04_spectral_identity)
    assert r.details["worst_dense"] <= 1e-8
    assert r.details["worst_matrix_free"] <= 1e-8


def test_criterion_05_wrap_independence():
    r = _run(acc.criterion_05_wrap_independence)
    assert r.details["worst"] <= 1e-10


def test_criterion_06_covariance():
    r = _run(acc.criterion_06_covariance)
    assert r.details["worst_closed_form"] <= 1e-12
    assert r.details["max_sigma"] <= 5.0


def test_criterion_07_threshold_gap():
    r = _run(acc.criterion_07_threshold_gap)
    assert r.details["worst_excess"] <= 0.0


def test_criterion_08_partition_statistics():
    # Expected to fail: the admissibility conditions are an asymptotic
    # statement and the threshold set is far too dense at n = 2**12.
    _run(acc.criterion_08_partition_statistics)


def test_criterion_09_block_reduction():
    # Expected to fail: the brick construction needs n >= 686, so the
    # stated n = 2**9 cannot run.
    _run(acc.criterion_09_block_reduction)


def test_criterion_10_swapping_bound():
    r = _run(acc.criterion_10_swapping_bound)
    assert r.details["bump_held"] == 20


def test_criterion_11_ratio_trend():
    r = _run(acc.criterion_11_ratio_trend)
    for ensemble in ("gaussian", "rademacher"):
        assert 0.70 <= r.details["means"][ensemble][-1] <= 1.00
    assert r.details["universality_gap"] <= 0.03


def test_criterion_12_determinism():
    _run(acc.criterion_12_determinism)


def test_mutation_in_covariance_is_caught(monkeypatch):
    # fault injection: a 1e-3 bias in the covariance formula must flip
    # criterion 6 to FAIL
    orig = acc.diagonal_covariance
    monkeypatch.setattr(acc, "diagonal_covariance",
                        lambda j, k, n: orig(j, k, n) + 1e-3)
    result = acc.criterion_06_covariance(CONFIG)
    assert not result.passed


def test_pipeline_runs_heavy_tailed_entries_without_truncation():
    # raw student_t entries flow through the eigenvalue pipeline unchanged;
    # the truncation transforms remain available and bounded when applied
    from toeplab.ensemble import (EntrySpec, rescale_unit_variance,
                                  sample_entries, truncate_center)
    from toeplab.harness import run_trial
    spec = EntrySpec("student_t", df=5.0, gamma=3.5)
    rec = run_trial(spec, 2**10, 0, seed=123, tol=1e-8, max_iter=400)
    assert not rec.failed
    assert 0.2 < rec.ratio < 2.0
    arr = sample_entries(spec, 2**10, seed=123)
    chained = rescale_unit_variance(truncate_center(arr))
    assert abs(chained.values).max() <= 4.0 * 1024 ** (1 / 3.5)
