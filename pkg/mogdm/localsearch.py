# mogdm/localsearch.py
"""
Local phase: projected multiobjective steepest descent with a vector Armijo rule.
A point is critical when the minimal-norm convex combination of the
(box-reduced) gradients vanishes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import BoxProblem, ContractViolation, LineSearchStalled
from .gdf import min_norm_combination

log = logging.getLogger("mogdm.localsearch")

ACTIVE_TOL = 1e-10
MAX_CONTRACTIONS = 60
SCALE_FLOOR = 1e-3


@dataclass(frozen=True)
class DescentStep:
    direction: np.ndarray
    multipliers: np.ndarray
    theta: float
    jac: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.direction))


@dataclass(frozen=True)
class LocalResult:
    x: np.ndarray
    fx: np.ndarray
    step: DescentStep
    iterations: int
    stalled: bool = False


def blocked_coordinates(problem: BoxProblem, z: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Mask of coordinates sitting on a bound with d pointing out of the box."""
    at_lb = (z - problem.lb < ACTIVE_TOL) & (d < 0.0)
    at_ub = (problem.ub - z < ACTIVE_TOL) & (d > 0.0)
    return at_lb | at_ub


def objective_scales(fz: np.ndarray, reference: Optional[np.ndarray]) -> Optional[np.ndarray]:
    """
    Per-objective weights proportional to f(z0) - reference, largest one 1.
    Descending the weighted objectives moves f(z) toward the reference along
    the ray through f(z0). Objectives already at the reference get the floor.
    """
    if reference is None:
        return None
    gap = np.maximum(np.asarray(fz, dtype=float) - np.asarray(reference, dtype=float), 0.0)
    top = float(gap.max())
    if top <= 0.0:
        return np.ones_like(gap)
    return np.maximum(gap, SCALE_FLOOR * top) / top


def steepest_direction(problem: BoxProblem, z: np.ndarray, jac: Optional[np.ndarray] = None,
                       scales: Optional[np.ndarray] = None) -> DescentStep:
    """
    Minimal-norm convex combination of the box-reduced gradients, negated.
    With scales, row j is divided by scales[j] first; step.jac stays unscaled.
    """
    z = np.asarray(z, dtype=float)
    J = problem.jac(z) if jac is None else np.asarray(jac, dtype=float)
    reduced = J.copy() if scales is None else J / np.asarray(scales, dtype=float)[:, None]
    blocked = np.zeros(problem.n, dtype=bool)
    # active set: block outward coordinates and re-solve on the rest
    for _ in range(problem.n + 1):
        lam, comb = min_norm_combination(reduced)
        d = -comb
        d[blocked] = 0.0
        new = blocked_coordinates(problem, z, d) & ~blocked
        if not new.any():
            break
        blocked |= new
        reduced[:, blocked] = 0.0
    return DescentStep(direction=d, multipliers=lam, theta=-0.5 * float(d @ d), jac=J)


def armijo_vector_search(problem: BoxProblem, z: np.ndarray, step: DescentStep, beta: float = 1e-4,
                         r: float = 0.5, alpha0: float = 1.0, fz: Optional[np.ndarray] = None,
                         max_step: Optional[float] = None) -> Tuple[np.ndarray, float, np.ndarray]:
    """
    Largest alpha in {alpha0 * r**k} with, for every j,
        f_j(clip(z + alpha d)) <= f_j(z) + beta * alpha * g_j . d
    alpha0 is first cut so that |alpha0 d| <= max_step.
    Returns (z_new, alpha, f(z_new)).
    """
    if not step.theta < 0.0:
        raise ContractViolation("armijo_vector_search needs a nonzero descent direction")
    if alpha0 <= 0.0:
        raise ContractViolation(f"alpha0 must be > 0, got {alpha0}")
    z = np.asarray(z, dtype=float)
    if fz is None:
        fz = problem.eval(z)
    if max_step is not None:
        alpha0 = min(alpha0, max_step / step.norm)
    slope = step.jac @ step.direction
    alpha = alpha0
    for _ in range(MAX_CONTRACTIONS + 1):
        z_try = problem.clip(z + alpha * step.direction)
        f_try = problem.eval(z_try)
        if np.any(z_try != z) and np.all(f_try <= fz + beta * alpha * slope):
            return z_try, alpha, f_try
        alpha *= r
    raise LineSearchStalled(f"no sufficient decrease after {MAX_CONTRACTIONS} contractions")


def local_solve(problem: BoxProblem, z0: np.ndarray, tol: Optional[float] = None, max_iter: int = 2000,
                beta: float = 1e-4, r: float = 0.5, alpha0: float = 1.0, max_step: Optional[float] = None,
                reference: Optional[np.ndarray] = None) -> LocalResult:
    """
    Steepest descent from z0 until ||d|| <= tol (default 1e-6 sqrt(n)) or max_iter.

    With a reference point (an ideal estimate) the objectives are weighted by
    objective_scales(f(z0), reference) for the whole solve.
    """
    z = np.asarray(z0, dtype=float).copy()
    if z.shape != (problem.n,) or not problem.contains(z):
        raise ContractViolation(f"start point must lie in the box of {problem.name}")
    if tol is None:
        tol = 1e-6 * math.sqrt(problem.n)
    fz = problem.eval(z)
    scales = objective_scales(fz, reference) if problem.m > 1 else None
    stalled = False
    it = 0
    step = steepest_direction(problem, z, scales=scales)
    while step.norm > tol and it < max_iter:
        try:
            z, _, fz = armijo_vector_search(problem, z, step, beta=beta, r=r, alpha0=alpha0, fz=fz,
                                            max_step=max_step)
        except LineSearchStalled:
            log.debug("line search stalled at iteration %d (|d|=%.3g); treating as critical", it, step.norm)
            stalled = True
            break
        it += 1
        step = steepest_direction(problem, z, scales=scales)
    if it >= max_iter and step.norm > tol:
        log.debug("local solve hit max_iter=%d with |d|=%.3g", max_iter, step.norm)
    return LocalResult(x=z, fx=fz, step=step, iterations=it, stalled=stalled)
