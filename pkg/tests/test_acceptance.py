import numpy as np
import pytest
from numpy.testing import assert_array_equal

from mogdm.core import SolverParams, dominates, estimate_bounds, make_rng, strictly_better
from mogdm.globalsearch import mogdm_front, mogdm_run
from mogdm.initialization import sample_starts
from mogdm.metrics import front_distance, hypervolume, reference_point
from mogdm.problems import CLIFF_AT, convex_pair, get_problem, get_spec, registry, true_front_sample


def _front(name, starts, **kw):
    problem = get_problem(name) if isinstance(name, str) else name
    return mogdm_front(problem, SolverParams(n_starts=starts, seed=kw.pop("seed", 0)), spread=False, **kw)


def _shared_hv(rep):
    ref = reference_point([rep.pf.values(), rep.pfg.values()])
    return hypervolume(rep.pf.values(), ref), hypervolume(rep.pfg.values(), ref)


def test_same_seed_same_report():
    a = _front("GDTEST2", 10, seed=4)
    b = _front("GDTEST2", 10, seed=4)
    assert_array_equal(a.pfg.values(), b.pfg.values())
    assert_array_equal(a.pf.points(), b.pf.points())
    assert (a.f_evals, a.jac_evals, a.iterations) == (b.f_evals, b.jac_evals, b.iterations)


def test_pfg_is_mutually_nondominated():
    rep = _front("GDTEST2", 15)
    V = rep.pfg.values()
    assert len(V) >= 1
    for i in range(len(V)):
        assert not any(dominates(V[j], V[i]) for j in range(len(V)) if j != i)


def test_convex_pair_gains_nothing():
    rep = _front(convex_pair(5), 12)
    assert_array_equal(rep.pf.values(), rep.pfg.values())
    assert rep.iterations.get("reanchors", 0) == 0


@pytest.mark.slow
def test_worker_count_does_not_change_results():
    a = _front("GDTEST2", 20, jobs=1)
    b = _front("GDTEST2", 20, jobs=2)
    assert_array_equal(a.pfg.values(), b.pfg.values())
    assert a.f_evals == b.f_evals


@pytest.mark.slow
@pytest.mark.parametrize("name", ["GDTEST1", "GDTEST2", "DTLZ1n2", "DTLZ3n2"])
def test_escape_problems_double_the_front(name):
    rep = _front(name, 200)
    assert len(rep.pf) >= 1
    assert len(rep.pfg) >= 2 * len(rep.pf)
    hv_pf, hv_pfg = _shared_hv(rep)
    assert hv_pfg >= hv_pf - 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("name", ["GDTEST1", "GDTEST2"])
def test_plateau_starts_escape_and_keep_improving(name):
    problem = get_problem(name)
    params = SolverParams(seed=0).resolve(problem)
    bounds = estimate_bounds(problem, params.bounds_samples, params.seed)
    stuck = escaped = 0
    for i, z0 in enumerate(sample_starts(problem, 100, seed=0)):
        traj = mogdm_run(problem, params, z0, seed=make_rng(0, 100 + i), bounds=bounds)
        for prev, nxt in zip(traj.values, traj.values[1:]):
            assert strictly_better(nxt, prev)
        if traj.anchors[0][0] < CLIFF_AT:
            stuck += 1
            escaped += strictly_better(traj.values[-1], traj.values[0])
    assert stuck > 0
    assert escaped >= 0.9 * stuck


SLOW_SOLVES = {"AL2", "LP1", "LR1"}


@pytest.mark.slow
@pytest.mark.parametrize("name", [
    pytest.param(n, marks=pytest.mark.long) if n in SLOW_SOLVES else n for n in sorted(registry())
])
def test_global_front_is_never_smaller(name):
    rep = _front(name, 50)
    assert len(rep.pfg) >= len(rep.pf)
    hv_pf, hv_pfg = _shared_hv(rep)
    assert hv_pfg >= hv_pf - 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("name", ["ZDT1", "ZDT2"])
def test_zdt_fronts_are_reached(name):
    rep = _front(name, 200)
    assert len(rep.pf) > 1
    assert len(rep.pfg) > 1
    d = front_distance(rep.pfg.values(), true_front_sample(get_spec(name), 2000))
    assert np.median(d) < 1e-2
