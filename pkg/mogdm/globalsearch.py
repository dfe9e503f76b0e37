# mogdm/globalsearch.py
"""
Global phase and the full solver driver.

From a local weak efficient anchor, candidates are placed just outside a
deleted eps-neighborhood and G is descended along the ray away from the anchor.
Any point strictly better than the anchor in every objective becomes the start
of a new local solve, and the search restarts there. When a round of
candidates yields nothing, rho shrinks and mu resets; the run ends once rho
falls below rho_L.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .core import (BoundsInfo, BoxProblem, CandidateExhausted, CandidateRejected, ContractViolation,
                   CountedProblem, RunReport, SolverParams, estimate_bounds, make_rng, strictly_better)
from .gdf import GdfContext, VParams, a_mu_prime, gdf_grads, gdf_values
from .localsearch import MAX_CONTRACTIONS, local_solve

log = logging.getLogger("mogdm.globalsearch")

SOLVERS = ("mogdm", "local-only")
CLIP_TOL = 1e-12
REDRAWS = 100


class Reason(str, enum.Enum):
    ESCAPE = "EscapeFound"
    BOUNDARY = "BoundaryHit"
    ITERATION_CAP = "IterationCap"
    PARAM_FLOOR = "ParamFloor"
    STALLED = "Stalled"


@dataclass
class GlobalPhaseState:
    problem: BoxProblem
    params: SolverParams
    anchor: np.ndarray
    f_anchor: np.ndarray
    mu: float
    rho: float
    rho_L: float
    bounds: Optional[BoundsInfo] = None
    candidates: List[np.ndarray] = field(default_factory=list)
    index: int = 0
    reductions: int = 0

    @classmethod
    def fresh(cls, problem: BoxProblem, params: SolverParams, anchor: np.ndarray, f_anchor: np.ndarray,
              bounds: Optional[BoundsInfo] = None) -> "GlobalPhaseState":
        state = cls(problem=problem, params=params, anchor=np.array(anchor, dtype=float),
                    f_anchor=np.array(f_anchor, dtype=float), mu=params.mu_ini, rho=params.rho_ini,
                    rho_L=params.rho_L, bounds=bounds)
        state.mu = state.mu_start()
        return state

    def mu_start(self) -> float:
        """mu_ini, cut to mu_hat * rho / L when a Lipschitz estimate is known."""
        if self.bounds is None:
            return self.params.mu_ini
        return min(self.params.mu_ini, self.params.mu_hat * self.rho / self.bounds.L)

    def context(self, mu: Optional[float] = None, rho: Optional[float] = None) -> GdfContext:
        return GdfContext(anchor=self.anchor, f_anchor=self.f_anchor,
                          v=_vparams(self.params, self.mu if mu is None else mu),
                          rho=self.rho if rho is None else rho, problem=self.problem)


def _vparams(params: SolverParams, mu: float) -> VParams:
    return VParams(mu=mu, c=params.c, tau=params.tau)


@dataclass
class DescentOutcome:
    point: np.ndarray
    values: np.ndarray
    reason: Reason
    steps: int


@dataclass
class Trajectory:
    """Anchors visited by one run, first (local phase only) to last."""

    anchors: List[np.ndarray]
    values: List[np.ndarray]
    events: Dict[str, int] = field(default_factory=dict)

    @property
    def first(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.anchors[0], self.values[0]

    @property
    def best(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.anchors[-1], self.values[-1]

    def bump(self, key: str, k: int = 1) -> None:
        self.events[key] = self.events.get(key, 0) + k


# ----------------------
# Candidates
# ----------------------
def generate_candidates(problem: BoxProblem, anchor: np.ndarray, eps: float, seed: Any = 0) -> List[np.ndarray]:
    """
    Up to 2n points outside the eps-ball around the anchor: anchor + r_i e_i for
    every i, then anchor - r_i e_i, with r_i = max(2 eps, 0.05 (ub_i - lb_i)).
    Slots swallowed by the ball after clipping are redrawn uniformly in the box.
    """
    if eps <= 0.0:
        raise ContractViolation(f"eps must be > 0, got {eps}")
    anchor = np.asarray(anchor, dtype=float)
    rng = make_rng(seed)
    width = problem.ub - problem.lb
    radius = np.maximum(2.0 * eps, 0.05 * width)
    out: List[np.ndarray] = []
    dropped = 0
    for sign in (1.0, -1.0):
        for i in range(problem.n):
            p = anchor.copy()
            p[i] += sign * radius[i]
            p = problem.clip(p)
            if np.linalg.norm(p - anchor) <= eps:
                p = None
                for _ in range(REDRAWS):
                    q = problem.lb + width * rng.random(problem.n)
                    if np.linalg.norm(q - anchor) > eps:
                        p = q
                        break
            if p is None:
                dropped += 1
                continue
            out.append(p)
    if not out:
        raise CandidateExhausted(f"no candidate outside the eps={eps} ball around the anchor in {problem.name}")
    if dropped:
        log.debug("dropped %d candidate slots around anchor", dropped)
    return out


# ----------------------
# Parameter control
# ----------------------
def rho_L_candidate(state: GlobalPhaseState, z_cur: np.ndarray, fz: Optional[np.ndarray] = None,
                    jac: Optional[np.ndarray] = None) -> float:
    """
    Smallest rho keeping s = z_cur - anchor uphill for G on the improved objectives:
    max over improved j with s.grad f_j > 0 of A'(f_j(z) - f_j(anchor)) (s.grad f_j) |s| / (s.s).
    """
    z_cur = np.asarray(z_cur, dtype=float)
    s = z_cur - state.anchor
    ss = float(s @ s)
    if ss == 0.0:
        raise ContractViolation("rho_L update needs z_cur != anchor")
    fz = state.problem.eval(z_cur) if fz is None else fz
    improving = fz < state.f_anchor
    if not improving.any():
        return 0.0
    J = state.problem.jac(z_cur) if jac is None else jac
    slopes = J @ s
    mask = improving & (slopes > 0.0)
    if not mask.any():
        return 0.0
    C = np.atleast_1d(a_mu_prime(fz - state.f_anchor, _vparams(state.params, state.mu)))
    return float(np.max(C[mask] * slopes[mask])) * np.sqrt(ss) / ss


def update_rho_L(state: GlobalPhaseState, z_cur: np.ndarray, fz: Optional[np.ndarray] = None,
                 jac: Optional[np.ndarray] = None) -> float:
    """Adopt the candidate bound when it is below rho_U, else reset to the nominal floor."""
    floor = state.params.rho_L
    bound = rho_L_candidate(state, z_cur, fz, jac)
    state.rho_L = max(bound, floor) if bound < state.params.rho_U else floor
    return state.rho_L


def _certified(grads: np.ndarray, s: np.ndarray, kappa: float) -> bool:
    return bool(np.all(np.linalg.norm(grads, axis=1) > kappa) and np.all(grads @ s < 0.0))


def reduce_params(state: GlobalPhaseState, z_cur: np.ndarray, kappa: Optional[float] = None,
                  mu_hat: Optional[float] = None, rho_hat: Optional[float] = None, l: Optional[int] = None,
                  max_reductions: Optional[int] = None, fz: Optional[np.ndarray] = None,
                  jac: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """
    Shrink (mu, rho) by (mu_hat**l, rho_hat**l) until every G_j at z_cur has
    gradient norm above kappa and decreases along s = z_cur - anchor.
    Accepted values are written back to the state.
    """
    p = state.params
    kappa = p.kappa if kappa is None else kappa
    mu_hat = p.mu_hat if mu_hat is None else mu_hat
    rho_hat = p.rho_hat if rho_hat is None else rho_hat
    l = p.l if l is None else l
    max_reductions = p.max_param_reductions if max_reductions is None else max_reductions

    z_cur = np.asarray(z_cur, dtype=float)
    s = z_cur - state.anchor
    fz = state.problem.eval(z_cur) if fz is None else fz
    J = state.problem.jac(z_cur) if jac is None else jac
    for k in range(max_reductions + 1):
        mu_k = mu_hat ** (l * k) * state.mu
        rho_k = rho_hat ** (l * k) * state.rho
        grads = gdf_grads(state.context(mu_k, rho_k), z_cur, fz, J)
        if _certified(grads, s, kappa):
            state.mu, state.rho = mu_k, rho_k
            state.reductions += k
            return mu_k, rho_k
    raise CandidateRejected(f"descent not certified after {max_reductions} reductions")


# ----------------------
# Descent on G
# ----------------------
def gdf_descent(state: GlobalPhaseState, z_start: np.ndarray) -> DescentOutcome:
    """Backtracking descent on G along the ray from the anchor through the current point."""
    problem, p = state.problem, state.params
    z = np.asarray(z_start, dtype=float).copy()
    fz = problem.eval(z)
    for step in range(p.descent_max_steps):
        if strictly_better(fz, state.f_anchor):
            return DescentOutcome(z, fz, Reason.ESCAPE, step)
        J = problem.jac(z)
        try:
            reduce_params(state, z, fz=fz, jac=J)
        except CandidateRejected:
            return DescentOutcome(z, fz, Reason.PARAM_FLOOR, step)
        ctx = state.context()
        G = gdf_values(ctx, z, fz)
        grads = gdf_grads(ctx, z, fz, J)
        s = z - state.anchor
        D = s / np.linalg.norm(s)

        if np.all(problem.clip(z + D) == z):
            # ray leaves the box right here
            return DescentOutcome(z, fz, Reason.BOUNDARY, step)

        alpha = p.alpha_bar_U
        accepted = None
        for _ in range(MAX_CONTRACTIONS + 1):
            z_try = problem.clip(z + alpha * D)
            disp = z_try - z
            if np.any(disp != 0.0):
                f_try = problem.eval(z_try)
                if np.all(gdf_values(ctx, z_try, f_try) <= G + p.beta * (grads @ disp)):
                    accepted = (z_try, f_try, alpha)
                    break
            alpha *= p.r
        if accepted is None:
            return DescentOutcome(z, fz, Reason.STALLED, step)
        z_try, f_try, alpha = accepted
        clipped = float(np.max(np.abs(z + alpha * D - z_try))) > CLIP_TOL
        z, fz = z_try, f_try
        if clipped:
            reason = Reason.ESCAPE if strictly_better(fz, state.f_anchor) else Reason.BOUNDARY
            return DescentOutcome(z, fz, reason, step + 1)
    if strictly_better(fz, state.f_anchor):
        return DescentOutcome(z, fz, Reason.ESCAPE, p.descent_max_steps)
    return DescentOutcome(z, fz, Reason.ITERATION_CAP, p.descent_max_steps)


# ----------------------
# Driver
# ----------------------
def _local(problem: BoxProblem, params: SolverParams, z0: np.ndarray, reference: Optional[np.ndarray] = None):
    return local_solve(problem, z0, tol=params.local_tol, max_iter=params.local_max_iter,
                       beta=params.beta, r=params.r, alpha0=params.local_alpha0,
                       max_step=params.local_max_step, reference=reference)


def mogdm_run(problem: BoxProblem, params: SolverParams, z0: np.ndarray, seed: Any = 0,
              bounds: Optional[BoundsInfo] = None, reference: Optional[np.ndarray] = None) -> Trajectory:
    """
    One start: local solve, then alternate global escapes and local re-solves.
    `reference` is the ideal estimate handed to every local solve.
    """
    if not params.is_resolved:
        params = params.resolve(problem)
    if bounds is None:
        bounds = estimate_bounds(problem, params.bounds_samples, params.seed)
    rng = make_rng(seed)
    first = _local(problem, params, z0, reference)
    traj = Trajectory(anchors=[first.x], values=[first.fx])
    state = GlobalPhaseState.fresh(problem, params, first.x, first.fx, bounds)

    while state.rho >= state.rho_L:
        try:
            state.candidates = generate_candidates(problem, state.anchor, params.eps_neighborhood, rng)
        except CandidateExhausted as e:
            log.debug("%s", e)
            traj.bump("candidate_exhausted")
            break
        escaped = None
        for state.index, z in enumerate(state.candidates):
            fz = problem.eval(z)
            J = problem.jac(z)
            update_rho_L(state, z, fz, J)
            if strictly_better(fz, state.f_anchor):
                escaped = z
                traj.bump("entry_escape")
                break
            try:
                reduce_params(state, z, fz=fz, jac=J)
            except CandidateRejected:
                traj.bump("rejected")
                continue
            outcome = gdf_descent(state, z)
            traj.bump(outcome.reason.value)
            if outcome.reason is Reason.ESCAPE:
                escaped = outcome.point
                break
        traj.bump("rounds")

        if escaped is not None:
            if len(traj.anchors) - 1 >= params.max_reanchors:
                log.warning("%s: re-anchoring cap (%d) reached", problem.name, params.max_reanchors)
                break
            nxt = _local(problem, params, escaped, reference)
            traj.anchors.append(nxt.x)
            traj.values.append(nxt.fx)
            log.debug("re-anchored (%d) f=%s", len(traj.anchors) - 1, np.array2string(nxt.fx, precision=6))
            state = GlobalPhaseState.fresh(problem, params, nxt.x, nxt.fx, bounds)
            continue

        state.rho *= params.rho_hat
        state.mu = state.mu_start()

    traj.bump("reductions", state.reductions)
    return traj


def _solve_start(problem: BoxProblem, params: SolverParams, z0: np.ndarray, seed: int, stream: int,
                 solver: str, bounds: Optional[BoundsInfo], reference: Optional[np.ndarray]) -> RunReport:
    counted = CountedProblem(problem)
    part = RunReport(problem=problem.name, solver=solver, seed=seed)
    if solver == "local-only":
        res = _local(counted, params, z0, reference)
        anchors, values = [res.x], [res.fx]
        part.count("local_iterations", res.iterations)
    else:
        traj = mogdm_run(counted, params, z0, seed=make_rng(seed, stream), bounds=bounds, reference=reference)
        anchors, values = traj.anchors, traj.values
        for k, v in traj.events.items():
            part.count(k, v)
    part.local_solutions.extend(anchors)
    part.wpf.insert(anchors[0], values[0])
    part.wpfg.insert(anchors[-1], values[-1])
    part.count("reanchors", len(anchors) - 1)
    part.f_evals, part.jac_evals = counted.f_evals, counted.jac_evals
    return part


def mogdm_front(problem: BoxProblem, params: SolverParams, starts: Optional[Sequence[np.ndarray]] = None,
                solver: str = "mogdm", jobs: int = 1, spread: bool = True) -> RunReport:
    """
    Multi-start front construction. WPF collects each start's local-phase
    anchor, WPFG its final anchor; PF/PFG are their nondominated filterings.
    The local-only solver stops after the local phase, so PFG equals PF.

    With local_scaling="ideal" every local solve is steered toward the
    payoff-table ideal point (computed here when the plan has none).

    Evaluation counters cover the per-start solves only; bound estimation,
    start planning and the payoff table are shared setup and are not
    charged to a solver.
    """
    from .initialization import build_plan, payoff_table

    if solver not in SOLVERS:
        raise ContractViolation(f"unknown solver '{solver}' (expected one of {SOLVERS})")
    t0 = time.perf_counter()
    params = params if params.is_resolved else params.resolve(problem)
    report = RunReport(problem=problem.name, solver=solver, seed=params.seed)

    report.bounds = estimate_bounds(problem, params.bounds_samples, params.seed)
    plan = None
    if starts is None:
        plan = build_plan(problem, params, params.n_starts, params.seed, spread=spread, jobs=jobs)
        starts = plan.starts
    reference = None
    if params.local_scaling == "ideal" and problem.m > 1:
        if plan is not None and plan.payoff is not None:
            reference = plan.ideal
        else:
            reference = payoff_table(problem, params, jobs=jobs, seed=params.seed)[0]
        log.debug("%s: local solves steered toward ideal %s", problem.name, np.array2string(reference, precision=6))

    parts = Parallel(n_jobs=jobs)(
        delayed(_solve_start)(problem, params, np.asarray(z0, dtype=float), params.seed, 100 + i, solver,
                              report.bounds, reference)
        for i, z0 in enumerate(starts)
    )
    for part in parts:
        report.absorb(part)
    report.finalize()
    report.wall_time = time.perf_counter() - t0
    log.info("%s/%s: %d starts, |PF|=%d |PFG|=%d, %d f-evals",
             problem.name, solver, len(parts), len(report.pf), len(report.pfg), report.f_evals)
    return report
