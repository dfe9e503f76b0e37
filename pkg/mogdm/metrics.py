# mogdm/metrics.py
"""
Front quality indicators and solver comparison.

hypervolume is exact for m = 2 (slab sum) and m = 3 (slices along f3).
delta_spread is the bi-objective spread indicator; spacing_deviation is the
stand-in reported for m = 3 fronts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .core import ContractViolation, Undefined, Unsupported

log = logging.getLogger("mogdm.metrics")

METRICS = ("hv", "delta", "fevals")
COST_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricReport:
    hypervolume: float
    ref: np.ndarray
    delta_spread: float
    delta_kind: str
    n_nondominated: int
    f_evals: int = 0
    jac_evals: int = 0


@dataclass(frozen=True)
class ProfileCurve:
    solver: str
    ratios: np.ndarray
    taus: np.ndarray
    values: np.ndarray = field(repr=False)

    def at(self, tau: float) -> float:
        """Fraction of problems solved within ratio tau."""
        if self.ratios.size == 0:
            return 0.0
        return float(np.count_nonzero(self.ratios <= tau)) / self.ratios.size


def _as_matrix(points) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return P.reshape(0, 0)
    return np.atleast_2d(P)


# ----------------------
# Nondominance
# ----------------------
def pareto_filter(points) -> np.ndarray:
    """Sorted indices of the nondominated rows."""
    P = _as_matrix(points)
    if P.shape[0] == 0:
        return np.empty(0, dtype=int)
    le = np.all(P[:, None, :] <= P[None, :, :], axis=2)
    lt = np.any(P[:, None, :] < P[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    return np.flatnonzero(~dominated)


# ----------------------
# Hypervolume
# ----------------------
def _hv2(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[pareto_filter(P)]
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    right = np.append(P[1:, 0], ref[0])
    return float(np.sum((right - P[:, 0]) * (ref[1] - P[:, 1])))


def hypervolume(front, ref) -> float:
    P = _as_matrix(front)
    ref = np.asarray(ref, dtype=float)
    if P.shape[0] == 0:
        return 0.0
    m = P.shape[1]
    if ref.shape != (m,):
        raise ContractViolation(f"reference point has shape {ref.shape}, front has m={m}")
    if m > 3:
        raise Unsupported(f"hypervolume supports m <= 3, got m={m}")
    inside = np.all(P < ref, axis=1)
    if not inside.all():
        log.warning("hypervolume: discarded %d point(s) not strictly better than the reference",
                    int(np.count_nonzero(~inside)))
    P = P[inside]
    if P.shape[0] == 0:
        return 0.0
    if m == 1:
        return float(ref[0] - P[:, 0].min())
    if m == 2:
        return _hv2(P, ref)
    levels = np.unique(P[:, 2])
    uppers = np.append(levels[1:], ref[2])
    total = 0.0
    for lo, hi in zip(levels, uppers):
        total += _hv2(P[P[:, 2] <= lo][:, :2], ref[:2]) * (hi - lo)
    return float(total)


def reference_point(fronts: Iterable) -> np.ndarray:
    """f^N + 0.1 (f^N - f^I) over the union of the given fronts; flat components get a unit span."""
    mats = [_as_matrix(f) for f in fronts]
    mats = [M for M in mats if M.shape[0] > 0]
    if not mats:
        raise Undefined("reference point of an empty union of fronts")
    U = np.vstack(mats)
    f_ideal, f_nadir = U.min(axis=0), U.max(axis=0)
    span = f_nadir - f_ideal
    span = np.where(span > 0.0, span, 1.0)
    return f_nadir + 0.1 * span


# ----------------------
# Spread
# ----------------------
def delta_spread(front, extremes: Optional[Sequence] = None) -> float:
    """
    (d_f + d_l + sum |d_i - mean d|) / (d_f + d_l + (N-1) mean d) over the front
    sorted by f1; extremes default to the front's own endpoints.
    """
    P = _as_matrix(front)
    if P.shape[0] == 0:
        raise Undefined("delta spread of an empty front")
    if P.shape[1] != 2:
        raise Unsupported(f"delta spread is bi-objective only, got m={P.shape[1]}")
    if P.shape[0] == 1:
        return 1.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    gaps = np.linalg.norm(np.diff(P, axis=0), axis=1)
    d_bar = float(gaps.mean())
    if extremes is None:
        d_f = d_l = 0.0
    else:
        first, last = (np.asarray(e, dtype=float) for e in extremes)
        # first extreme pairs with the smallest-f1 end
        if first[0] > last[0]:
            first, last = last, first
        d_f = float(np.linalg.norm(first - P[0]))
        d_l = float(np.linalg.norm(last - P[-1]))
    den = d_f + d_l + (len(P) - 1) * d_bar
    if den == 0.0:
        return 1.0
    return float((d_f + d_l + np.sum(np.abs(gaps - d_bar))) / den)


def spacing_deviation(front) -> float:
    """Mean |d_i - mean d| / mean d over nearest-neighbor distances (m = 3 substitute for delta)."""
    P = _as_matrix(front)
    if P.shape[0] == 0:
        raise Undefined("spacing of an empty front")
    if P.shape[0] == 1:
        return 1.0
    D = cdist(P, P)
    np.fill_diagonal(D, np.inf)
    d = D.min(axis=1)
    d_bar = float(d.mean())
    if d_bar == 0.0:
        return 0.0
    return float(np.mean(np.abs(d - d_bar)) / d_bar)


def front_distance(values, front_samples) -> np.ndarray:
    """Distance of each value to the nearest point of a dense sample of the analytic front."""
    V = _as_matrix(values)
    if V.shape[0] == 0:
        return np.empty(0)
    dist, _ = cKDTree(_as_matrix(front_samples)).query(V)
    return np.asarray(dist, dtype=float)


def evaluate_front(values, ref, extremes: Optional[Sequence] = None, f_evals: int = 0,
                   jac_evals: int = 0) -> MetricReport:
    V = _as_matrix(values)
    ref = np.asarray(ref, dtype=float)
    nd = V[pareto_filter(V)] if V.shape[0] else V
    hv = hypervolume(nd, ref) if V.shape[0] else 0.0
    if nd.shape[0] == 0:
        spread, kind = float("nan"), "none"
    elif nd.shape[1] == 2:
        spread, kind = delta_spread(nd, extremes), "delta"
    else:
        spread, kind = spacing_deviation(nd), "spacing"
    return MetricReport(hypervolume=hv, ref=ref, delta_spread=spread, delta_kind=kind,
                        n_nondominated=int(nd.shape[0]), f_evals=f_evals, jac_evals=jac_evals)


# ----------------------
# Performance profiles
# ----------------------
def performance_profile(costs, solvers: Sequence[str]) -> List[ProfileCurve]:
    """
    costs: solvers x problems, NaN or inf marking a failure.
    Ratio to the best solver per problem; problems every solver failed are dropped.
    """
    C = np.array(costs, dtype=float)
    if C.ndim != 2 or C.shape[0] != len(solvers):
        raise ContractViolation(f"costs must be {len(solvers)} x problems, got shape {C.shape}")
    C[~np.isfinite(C)] = np.inf
    if np.any(C <= 0.0):
        raise ContractViolation("profile costs must be > 0")
    ok = np.isfinite(C).any(axis=0)
    if not ok.all():
        log.warning("performance profile: %d problem(s) failed by every solver were excluded",
                    int(np.count_nonzero(~ok)))
    C = C[:, ok]
    if C.shape[1] == 0:
        raise Undefined("no problem was solved by any solver")
    R = C / C.min(axis=0)
    finite = R[np.isfinite(R)]
    taus = np.unique(np.concatenate([[1.0], finite]))
    curves = []
    for s, label in enumerate(solvers):
        r = np.sort(R[s])
        values = np.array([np.count_nonzero(r <= t) / r.size for t in taus])
        curves.append(ProfileCurve(solver=label, ratios=r, taus=taus, values=values))
    return curves


def profile_costs(summary: pd.DataFrame, metric: str) -> pd.DataFrame:
    """
    Pivot a summary table into a solvers x problems cost table.
    hv is a benefit: cost = best hv on the problem / hv. delta is floored at
    COST_FLOOR; fevals uses objective-vector evaluations.
    """
    if metric not in METRICS:
        raise ContractViolation(f"unknown metric '{metric}' (expected one of {METRICS})")
    column = {"hv": "hypervolume", "delta": "delta", "fevals": "f_evals"}[metric]
    table = summary.pivot_table(index="solver", columns="problem", values=column, aggfunc="first")
    table = table.astype(float)
    if metric == "hv":
        best = table.max(axis=0)
        table = best / table.where(table > 0.0)
    elif metric == "delta":
        table = table.clip(lower=COST_FLOOR)
    else:
        table = table.where(table > 0.0)
    return table


def curves_frame(curves: Sequence[ProfileCurve]) -> pd.DataFrame:
    """Long-form (solver, tau, rho) table of step-function values."""
    rows: List[Dict] = []
    for c in curves:
        rows.extend({"solver": c.solver, "tau": t, "rho": v} for t, v in zip(c.taus, c.values))
    return pd.DataFrame(rows, columns=["solver", "tau", "rho"])
