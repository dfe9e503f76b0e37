# mogdm/initialization.py
"""
Start-point planning: uniform sampling, payoff-table ideal/nadir estimates,
and a max-min spread filter in normalized objective space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.distance import cdist

from .core import BoxProblem, ContractViolation, SolverParams, make_rng
from .globalsearch import mogdm_run

log = logging.getLogger("mogdm.initialization")


@dataclass(frozen=True)
class InitPlan:
    starts: np.ndarray
    ideal: np.ndarray
    nadir: np.ndarray
    seed: int
    payoff: Optional[np.ndarray] = None


def sample_starts(problem: BoxProblem, N: int = 200, seed: Any = 0) -> np.ndarray:
    """N x n uniform samples in the box."""
    if N < 1:
        raise ContractViolation(f"N must be >= 1, got {N}")
    rng = make_rng(seed, stream=1)
    return problem.lb + (problem.ub - problem.lb) * rng.random((N, problem.n))


def spread_filter(starts: np.ndarray, f_values: np.ndarray, ideal: np.ndarray, nadir: np.ndarray,
                  keep: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Greedy max-min selection of `keep` starts in objective space scaled by
    (nadir - ideal), seeded with each objective's minimizer. Ties go to the
    lower index. Returns (selected starts, their indices), in input order.
    """
    starts = np.asarray(starts, dtype=float)
    F = np.asarray(f_values, dtype=float)
    total = len(starts)
    if not 1 <= keep <= total:
        raise ContractViolation(f"keep must be in [1, {total}], got {keep}")
    if keep == total:
        idx = np.arange(total)
        return starts[idx], idx

    span = np.maximum(np.asarray(nadir, dtype=float) - np.asarray(ideal, dtype=float), 1e-12)
    Z = (F - ideal) / span

    chosen: List[int] = []
    for j in range(Z.shape[1]):
        i = int(np.argmin(Z[:, j]))
        if i not in chosen and len(chosen) < keep:
            chosen.append(i)

    mind = np.min(cdist(Z, Z[chosen]), axis=1)
    mind[chosen] = -np.inf
    while len(chosen) < keep:
        i = int(np.argmax(mind))
        chosen.append(i)
        mind = np.minimum(mind, cdist(Z, Z[i : i + 1]).ravel())
        mind[chosen] = -np.inf

    idx = np.sort(np.array(chosen))
    return starts[idx], idx


def _best_scalar(problem: BoxProblem, params: SolverParams, j: int, seed: int) -> np.ndarray:
    sub = problem.restrict(j)
    # same box, so the resolved defaults carry over unchanged
    sub_params = params if params.is_resolved else params.resolve(sub)
    best, best_f = None, np.inf
    for k, z0 in enumerate((sub.lb, sub.midpoint, sub.ub)):
        z, fz = mogdm_run(sub, sub_params, z0, seed=make_rng(seed, 10 * j + k + 2)).best
        if fz[0] < best_f:
            best, best_f = z, float(fz[0])
    return best


def payoff_table(problem: BoxProblem, params: SolverParams, jobs: int = 1,
                 seed: int = 0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Minimize each objective alone (from lb, the midpoint and ub) with the
    single-objective specialization of the global solver.
    Returns (ideal, nadir, payoff) with payoff[j] = f(z_j*).
    """
    if problem.m < 2:
        raise ContractViolation("payoff_table needs m >= 2")
    minimizers = Parallel(n_jobs=jobs)(
        delayed(_best_scalar)(problem, params, j, seed) for j in range(problem.m)
    )
    payoff = np.vstack([problem.eval(z) for z in minimizers])
    return payoff.min(axis=0), payoff.max(axis=0), payoff


def build_plan(problem: BoxProblem, params: SolverParams, n_starts: int, seed: int = 0,
               spread: bool = True, jobs: int = 1) -> InitPlan:
    """
    With spread, oversample, estimate ideal/nadir via the payoff table and keep
    the n_starts best-spread samples. Without it, plain uniform samples with
    ideal/nadir taken from their own objective values.
    """
    if not spread:
        starts = sample_starts(problem, n_starts, seed)
        F = np.vstack([problem.eval(z) for z in starts])
        return InitPlan(starts=starts, ideal=F.min(axis=0), nadir=F.max(axis=0), seed=seed)

    pool = sample_starts(problem, n_starts * params.spread_oversample, seed)
    F = np.vstack([problem.eval(z) for z in pool])
    ideal, nadir, payoff = payoff_table(problem, params, jobs=jobs, seed=seed)
    starts, _ = spread_filter(pool, F, ideal, nadir, n_starts)
    log.debug("%s: spread filter kept %d of %d samples", problem.name, len(starts), len(pool))
    return InitPlan(starts=starts, ideal=ideal, nadir=nadir, seed=seed, payoff=payoff)
