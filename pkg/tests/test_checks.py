import inspect

import pytest

from mogdm.checks import (gdf_gradient_error, hypervolume_failures, run_checks, theorem_violations,
                          va_identity_failures)


def test_va_identities_hold():
    assert va_identity_failures(samples=1_000, seed=0) == []


def test_gdf_gradient_agrees_with_differences():
    assert gdf_gradient_error(samples=20, seed=0) < 1e-5


def test_hypervolume_oracles():
    assert hypervolume_failures(fronts=3, mc_samples=50_000, seed=0) == []


def test_monte_carlo_draws_come_in_antithetic_pairs():
    assert inspect.signature(hypervolume_failures).parameters["mc_samples"].default == 1_000_000
    assert hypervolume_failures(fronts=2, mc_samples=20_001, seed=3) == []


def test_descent_guarantees_on_convex_pair():
    counts = theorem_violations(samples=100, seed=0)
    assert counts["sampled"] == 100
    assert counts["exclusion"] == 0
    assert counts["descent"] == 0
    assert counts["stationary"] == 0
    assert counts["rejected"] == 0


@pytest.mark.slow
def test_full_check_suite():
    results = run_checks(seed=0, quick=False)
    assert [r.name for r in results] == ["va-identities", "gradients", "hypervolume", "theorems"]
    assert all(r.ok for r in results), [r.detail for r in results if not r.ok]
