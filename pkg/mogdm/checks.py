# mogdm/checks.py
"""
Invariant suites run by `mogdm check`: V/A identities, gradient checks,
hypervolume oracles and the descent guarantees of G on a convex pair.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .core import CandidateRejected, SolverParams, check_jacobian, make_rng
from .gdf import GdfContext, VParams, a_mu, a_mu_prime, gdf_grads, gdf_values, min_norm_combination, v_mu, v_mu_prime
from .globalsearch import GlobalPhaseState, reduce_params, rho_L_candidate
from .metrics import hypervolume, pareto_filter
from .problems import convex_pair, registry

log = logging.getLogger("mogdm.checks")

MUS = (0.05, 0.1, 0.3, 0.5, 0.9)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def va_identity_failures(samples: int = 10_000, seed: int = 0) -> List[str]:
    """Boundary values, bounds and monotonicity of V and A for c = 0.5, tau = 1."""
    rng = make_rng(seed, 11)
    bad: List[str] = []
    for mu in MUS:
        p = VParams(mu=mu)
        if abs(v_mu(-1.0, p) - 1.0) >= 1e-12 or abs(v_mu(0.0, p) - mu) >= 1e-12:
            bad.append(f"mu={mu}: V(-tau)/V(0) off")
        if abs(a_mu_prime(0.0, p) - mu) >= 1e-12:
            bad.append(f"mu={mu}: A'(0) != mu")
        y = rng.uniform(-50.0, 50.0, samples)
        if np.any(v_mu(y, p) < p.c * mu - 1e-12):
            bad.append(f"mu={mu}: V below c*mu")
        if np.any(v_mu_prime(y, p) >= 0.0):
            bad.append(f"mu={mu}: V' not negative")
        below = y[y < -1.0]
        if np.any(v_mu(below, p) <= 1.0):
            bad.append(f"mu={mu}: V <= 1 below -tau")
        above = y[y >= 0.0]
        if np.any(v_mu(above, p) > mu + 1e-12) or np.any(a_mu_prime(above[above > 0], p) > mu + 1e-12):
            bad.append(f"mu={mu}: V or A' above mu on y >= 0")
        y1 = rng.uniform(-20.0, -1.0, samples)
        y2 = rng.uniform(-20.0, -1.0, samples)
        lo, hi = np.minimum(y1, y2), np.maximum(y1, y2)
        keep = hi > lo
        gap = a_mu(hi[keep], p) - a_mu(lo[keep], p)
        if np.any(gap <= hi[keep] - lo[keep]):
            bad.append(f"mu={mu}: A gap inequality fails below -tau")
    return bad


def gdf_gradient_error(samples: int = 200, seed: int = 0) -> float:
    """Worst relative error of gdf_grads vs central differences of gdf_values on the convex pair."""
    problem = convex_pair(5)
    rng = make_rng(seed, 12)
    worst = 0.0
    for _ in range(samples):
        anchor = rng.uniform(-1.0, 1.0, problem.n)
        z = anchor + rng.uniform(0.1, 0.5, problem.n) * rng.choice([-1.0, 1.0], problem.n)
        ctx = GdfContext.at(problem, anchor, mu=float(rng.choice(MUS)), rho=float(rng.uniform(0.01, 1.0)))
        g = gdf_grads(ctx, z)
        fd = np.empty_like(g)
        for i in range(problem.n):
            h = 1e-6 * (1.0 + abs(z[i]))
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            fd[:, i] = (gdf_values(ctx, zp) - gdf_values(ctx, zm)) / (2.0 * h)
        worst = max(worst, float(np.max(np.abs(g - fd))) / max(1.0, float(np.max(np.abs(fd)))))
    return worst


def jacobian_errors(points: int = 20, seed: int = 0, names: Optional[Sequence[str]] = None) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for name, spec in registry().items():
        if names is not None and name not in names:
            continue
        prob = spec.problem
        rng = make_rng(seed, 13)
        width = prob.ub - prob.lb
        pts = [prob.lb + width * rng.uniform(0.05, 0.95, prob.n) for _ in range(points)]
        out[name] = check_jacobian(prob, pts)
    return out


def hypervolume_failures(fronts: int = 20, mc_samples: int = 1_000_000, seed: int = 0) -> List[str]:
    bad: List[str] = []
    if hypervolume([[0.0, 0.0]], [1.0, 1.0]) != 1.0:
        bad.append("unit square")
    if hypervolume([[1.0, 2.0], [2.0, 1.0]], [3.0, 3.0]) != 3.0:
        bad.append("two rectangles")
    rng = make_rng(seed, 14)
    ref = np.array([1.0, 1.0])
    for k in range(fronts):
        P = rng.random((int(rng.integers(1, 30)), 2))
        P = P[pareto_filter(P)]
        hv = hypervolume(P, ref)
        half = rng.random((mc_samples // 2, 2))
        # antithetic pairs u, 1 - u
        U = np.vstack([half, 1.0 - half])
        hit = np.zeros(len(U), dtype=bool)
        for p in P:
            hit |= np.all(U >= p, axis=1)
        est = hit.mean()
        se = math.sqrt(max(est * (1.0 - est), 1e-12) / len(U))
        if abs(hv - est) > 3.0 * se + 1e-9:
            bad.append(f"front {k}: exact {hv:.6f} vs monte carlo {est:.6f}")
    return bad


def theorem_violations(samples: int = 500, seed: int = 0, n: int = 5) -> Dict[str, int]:
    """
    On (|z|^2, |z - e|^2) over [-2, 2]^n, with the anchor on the efficient segment,
    mu below 0.05 / L and rho above both 0.05 and twice the rho_L bound at z,
    count points of the basin complement where
      exclusion: no G_j is negative,
      descent: some s . grad G_j >= 0,
      stationary: the minimal-norm convex combination of grad G is <= kappa.
    """
    problem = convex_pair(n)
    L = 2.0 * 3.0 * math.sqrt(n)
    params = SolverParams().resolve(problem)
    rng = make_rng(seed, 15)
    counts = {"exclusion": 0, "descent": 0, "stationary": 0, "rejected": 0, "sampled": 0}
    width = problem.ub - problem.lb
    while counts["sampled"] < samples:
        anchor = rng.uniform(0.0, 1.0) * np.ones(n)
        fa = problem.eval(anchor)
        z = problem.lb + width * rng.uniform(0.001, 0.999, n)
        fz = problem.eval(z)
        if np.all(fz < fa) or np.linalg.norm(z - anchor) < 1e-6:
            continue
        counts["sampled"] += 1
        J = problem.jac(z)
        state = GlobalPhaseState.fresh(problem, params, anchor, fa)
        state.mu = 0.25 * 0.05 / L
        bound = rho_L_candidate(state, z, fz, J)
        state.rho = max(0.05, 2.0 * bound)
        try:
            reduce_params(state, z, fz=fz, jac=J)
        except CandidateRejected:
            counts["rejected"] += 1
            continue
        ctx = state.context()
        s = z - anchor
        G = gdf_values(ctx, z, fz)
        grads = gdf_grads(ctx, z, fz, J)
        if not np.any(G < 0.0):
            counts["exclusion"] += 1
        if np.any(grads @ s >= 0.0):
            counts["descent"] += 1
        _, comb = min_norm_combination(grads)
        if np.linalg.norm(comb) <= params.kappa:
            counts["stationary"] += 1
    return counts


def _suite(name: str, fn: Callable[[], CheckResult]) -> CheckResult:
    try:
        return fn()
    except Exception as e:
        log.exception("check %s crashed", name)
        return CheckResult(name, False, f"crashed: {e}")


def run_checks(seed: int = 0, quick: bool = False) -> List[CheckResult]:
    def va():
        bad = va_identity_failures(1_000 if quick else 10_000, seed)
        return CheckResult("va-identities", not bad, "; ".join(bad) or "all identities hold")

    def grads():
        err = gdf_gradient_error(50 if quick else 200, seed)
        jac = jacobian_errors(5 if quick else 20, seed)
        worst = max(jac, key=jac.get)
        ok = err < 1e-5 and all(v < 1e-4 for v in jac.values())
        return CheckResult("gradients", ok, f"gdf {err:.2e}; worst problem {worst} {jac[worst]:.2e}")

    def hv():
        bad = hypervolume_failures(5 if quick else 20, 20_000 if quick else 1_000_000, seed)
        return CheckResult("hypervolume", not bad, "; ".join(bad) or "exact and monte carlo agree")

    def theorems():
        c = theorem_violations(100 if quick else 500, seed)
        ok = c["exclusion"] == c["descent"] == c["stationary"] == c["rejected"] == 0
        return CheckResult("theorems", ok, ", ".join(f"{k}={v}" for k, v in c.items()))

    return [_suite(n, f) for n, f in (("va-identities", va), ("gradients", grads),
                                       ("hypervolume", hv), ("theorems", theorems))]
