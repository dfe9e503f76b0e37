import logging

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mogdm.core import ContractViolation, Undefined, Unsupported, dominates, make_rng
from mogdm.metrics import (curves_frame, delta_spread, evaluate_front, front_distance, hypervolume,
                           pareto_filter, performance_profile, profile_costs, reference_point, spacing_deviation)


class TestParetoFilter:

    def test_small(self):
        assert_array_equal(pareto_filter([[0, 1], [1, 0], [1, 1]]), [0, 1])

    def test_identical_points_kept(self):
        assert_array_equal(pareto_filter([[1, 1]] * 4), [0, 1, 2, 3])

    def test_matches_brute_force(self):
        P = make_rng(5).random((300, 3))
        expected = [i for i in range(len(P)) if not any(dominates(P[j], P[i]) for j in range(len(P)))]
        assert_array_equal(pareto_filter(P), expected)

    def test_idempotent(self):
        P = make_rng(6).random((100, 2))
        once = P[pareto_filter(P)]
        assert_array_equal(once[pareto_filter(once)], once)

    def test_empty(self):
        assert pareto_filter([]).size == 0


class TestHypervolume:

    def test_unit_square(self):
        assert hypervolume([[0.0, 0.0]], [1.0, 1.0]) == 1.0

    def test_two_rectangles(self):
        assert hypervolume([[1.0, 2.0], [2.0, 1.0]], [3.0, 3.0]) == 3.0

    def test_three_objectives(self):
        assert hypervolume([[0.0, 0.0, 0.0]], [1.0, 1.0, 1.0]) == 1.0
        assert hypervolume([[0.0, 0.0, 0.5], [0.5, 0.5, 0.0]], [1.0, 1.0, 1.0]) == pytest.approx(0.625)

    def test_single_objective(self):
        assert hypervolume([[0.2], [0.5]], [1.0]) == pytest.approx(0.8)

    def test_points_beyond_reference_discarded(self, caplog):
        with caplog.at_level(logging.WARNING, logger="mogdm.metrics"):
            assert hypervolume([[0.0, 0.0], [2.0, 2.0], [0.5, 1.0]], [1.0, 1.0]) == 1.0
        assert "discarded 2 point(s)" in caplog.text

    def test_empty(self):
        assert hypervolume([], [1.0, 1.0]) == 0.0

    def test_four_objectives_unsupported(self):
        with pytest.raises(Unsupported):
            hypervolume([[0.0] * 4], [1.0] * 4)

    def test_reference_shape(self):
        with pytest.raises(ContractViolation):
            hypervolume([[0.0, 0.0]], [1.0, 1.0, 1.0])

    def test_monotone(self):
        ref = np.array([1.0, 1.0])
        P = np.array([[0.1, 0.8], [0.5, 0.4], [0.8, 0.1]])
        base = hypervolume(P, ref)
        assert hypervolume(np.vstack([P, [0.6, 0.6]]), ref) == pytest.approx(base)
        assert hypervolume(np.vstack([P, [0.3, 0.5]]), ref) > base

    def test_translation(self):
        P = make_rng(7).random((20, 3))
        P = P[pareto_filter(P)]
        shift = np.array([3.0, -2.0, 0.5])
        ref = np.ones(3) * 1.1
        assert hypervolume(P + shift, ref + shift) == pytest.approx(hypervolume(P, ref), rel=1e-9)

    def test_grid_oracle(self):
        # exact area of a staircase on a lattice
        P = np.array([[0.0, 0.75], [0.25, 0.5], [0.5, 0.25], [0.75, 0.0]])
        assert hypervolume(P, [1.0, 1.0]) == pytest.approx(0.25 * (0.25 + 0.5 + 0.75 + 1.0))


class TestReferencePoint:

    def test_union(self):
        assert_allclose(reference_point([[[0.0, 1.0]], [[1.0, 0.0]]]), [1.1, 1.1])

    def test_flat_component(self):
        assert_allclose(reference_point([[[2.0, 3.0]]]), [2.1, 3.1])

    def test_empty(self):
        with pytest.raises(Undefined):
            reference_point([np.empty((0, 0))])


class TestSpread:

    def test_uniform_front_with_extremes(self):
        P = [[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]]
        assert delta_spread(P, ([0.0, 2.0], [2.0, 0.0])) == pytest.approx(0.0, abs=1e-12)

    def test_single_point(self):
        assert delta_spread([[0.3, 0.4]]) == 1.0

    def test_uneven_gaps(self):
        # gaps 1 and 3 along a unit direction
        d = np.array([0.6, -0.8])
        P = np.array([[0.0, 4.0], [0.0, 4.0] + d, [0.0, 4.0] + 4.0 * d])
        assert delta_spread(P, (P[0], P[-1])) == pytest.approx(0.5)

    def test_extremes_order_and_input_order_ignored(self):
        P = np.array([[2.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
        a = delta_spread(P, ([2.0, 0.0], [0.0, 2.5]))
        b = delta_spread(P[::-1], ([0.0, 2.5], [2.0, 0.0]))
        assert a == pytest.approx(b)
        assert a > 0.0

    def test_empty(self):
        with pytest.raises(Undefined):
            delta_spread(np.empty((0, 2)))

    def test_three_objectives(self):
        with pytest.raises(Unsupported):
            delta_spread([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])

    def test_spacing(self):
        P = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        assert spacing_deviation(P) == pytest.approx(0.0)


class TestEvaluate:

    def test_bi_objective(self):
        rep = evaluate_front([[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], [2.0, 2.0], f_evals=10)
        assert rep.n_nondominated == 2
        assert rep.delta_kind == "delta"
        assert rep.hypervolume == pytest.approx(3.0)
        assert rep.f_evals == 10

    def test_three_objectives(self):
        rep = evaluate_front([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [2.0, 2.0, 2.0])
        assert rep.delta_kind == "spacing"
        assert rep.delta_spread == pytest.approx(0.0)

    def test_front_distance(self):
        front = np.column_stack([np.linspace(0, 1, 11), 1.0 - np.linspace(0, 1, 11)])
        d = front_distance([[0.5, 0.5], [1.5, 1.5]], front)
        assert_allclose(d, [0.0, np.sqrt(2.0)], atol=1e-12)


class TestPerformanceProfile:

    def test_one_solver_best(self):
        curves = performance_profile([[1.0, 1.0], [2.0, 3.0]], ["a", "b"])
        assert curves[0].at(1.0) == 1.0
        assert curves[1].at(1.0) == 0.0

    def test_ties(self):
        curves = performance_profile([[2.0, 5.0], [2.0, 5.0]], ["a", "b"])
        assert curves[0].at(1.0) == curves[1].at(1.0) == 1.0

    def test_hand_table(self):
        costs = np.array([
            [1.0, 2.0, 3.0, 1.0, 2.0],
            [2.0, 1.0, 3.0, 1.0, 4.0],
            [4.0, 2.0, 1.0, 1.0, 8.0],
        ])
        curves = performance_profile(costs, ["A", "B", "C"])
        assert_allclose(curves[0].taus, [1.0, 2.0, 3.0, 4.0])
        assert_allclose(curves[0].values, [0.6, 0.8, 1.0, 1.0])
        assert_allclose(curves[1].values, [0.4, 0.8, 1.0, 1.0])
        assert_allclose(curves[2].values, [0.4, 0.6, 0.6, 1.0])
        for c in curves:
            assert np.all(np.diff(c.values) >= 0.0)

    def test_failures(self, caplog):
        costs = [[1.0, np.nan, np.inf], [2.0, 3.0, np.nan]]
        with caplog.at_level(logging.WARNING, logger="mogdm.metrics"):
            curves = performance_profile(costs, ["a", "b"])
        assert "excluded" in caplog.text
        assert curves[0].ratios.size == 2
        assert curves[0].at(1e9) == 0.5
        assert curves[1].at(1.0) == 0.5

    def test_all_failed(self):
        with pytest.raises(Undefined):
            performance_profile([[np.nan], [np.inf]], ["a", "b"])

    def test_nonpositive_cost(self):
        with pytest.raises(ContractViolation):
            performance_profile([[0.0], [1.0]], ["a", "b"])

    def test_profile_costs_and_frame(self):
        summary = pd.DataFrame([
            {"problem": "P", "solver": "mogdm", "hypervolume": 2.0, "delta": 0.0, "f_evals": 100},
            {"problem": "P", "solver": "local-only", "hypervolume": 1.0, "delta": 0.5, "f_evals": 50},
        ])
        hv = profile_costs(summary, "hv")
        assert hv.loc["mogdm", "P"] == pytest.approx(1.0)
        assert hv.loc["local-only", "P"] == pytest.approx(2.0)
        delta = profile_costs(summary, "delta")
        assert delta.loc["mogdm", "P"] == pytest.approx(1e-12)
        curves = performance_profile(profile_costs(summary, "fevals").to_numpy(), ["local-only", "mogdm"])
        frame = curves_frame(curves)
        assert list(frame.columns) == ["solver", "tau", "rho"]
        assert frame.loc[frame["solver"] == "local-only", "rho"].iloc[0] == 1.0

    def test_unknown_metric(self):
        with pytest.raises(ContractViolation):
            profile_costs(pd.DataFrame(), "igd")
