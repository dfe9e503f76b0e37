# mogdm/gdf.py
"""
Two-parameter global descent function family.

    V(y) = mu * [(1 - c) * b**(y/tau) + c],   b = mu(1-c) / (1 - c*mu)
    A(y) = y * V(y)
    G_j(z) = A(f_j(z) - f_j(anchor)) - rho * ||z - anchor||

All functions accept scalars or numpy arrays for y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import AnchorSingularity, BoxProblem, ContractViolation

# clamp for exp() arguments
_EXP_CLAMP = 700.0
# A and A' saturate at +-exp(_LOG_CAP)
_LOG_CAP = 300.0
_ANCHOR_TOL = 1e-12


@dataclass(frozen=True)
class VParams:
    mu: float
    c: float = 0.5
    tau: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.mu < 1.0:
            raise ContractViolation(f"mu must be in (0,1), got {self.mu}")
        if not 0.0 < self.c < 1.0:
            raise ContractViolation(f"c must be in (0,1), got {self.c}")
        if self.tau <= 0.0:
            raise ContractViolation(f"tau must be > 0, got {self.tau}")

    @property
    def base(self) -> float:
        return self.mu * (1.0 - self.c) / (1.0 - self.c * self.mu)

    @property
    def log_base(self) -> float:
        return math.log(self.base)


def _pow_b(y, p: VParams):
    e = np.clip(np.asarray(y, dtype=float) / p.tau * p.log_base, -_EXP_CLAMP, _EXP_CLAMP)
    return np.exp(e)


def _times_pow_b(coef, y, p: VParams):
    """coef * b**(y/tau), computed in log space and saturated."""
    coef = np.asarray(coef, dtype=float)
    e = np.asarray(y, dtype=float) / p.tau * p.log_base
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(coef)) + e
    return np.sign(coef) * np.exp(np.minimum(log_mag, _LOG_CAP))


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def v_mu(y, p: VParams):
    return _out(p.mu * ((1.0 - p.c) * _pow_b(y, p) + p.c))


def v_mu_prime(y, p: VParams):
    return _out(p.mu * (1.0 - p.c) * p.log_base / p.tau * _pow_b(y, p))


def a_mu(y, p: VParams):
    y = np.asarray(y, dtype=float)
    return _out(p.mu * p.c * y + _times_pow_b(p.mu * (1.0 - p.c) * y, y, p))


def a_mu_prime(y, p: VParams):
    """V + y V', finite for any finite y."""
    y = np.asarray(y, dtype=float)
    slope = 1.0 + y * p.log_base / p.tau
    return _out(p.mu * p.c + _times_pow_b(p.mu * (1.0 - p.c) * slope, y, p))


def c_prime(p: VParams) -> float:
    """(1 - c)|ln b| / tau; mu * c_prime bounds |V'| on y >= 0."""
    return (1.0 - p.c) * abs(p.log_base) / p.tau


# ----------------------
# Context
# ----------------------
@dataclass(frozen=True, eq=False)
class GdfContext:
    anchor: np.ndarray
    f_anchor: np.ndarray
    v: VParams
    rho: float
    problem: BoxProblem

    def __post_init__(self) -> None:
        if self.rho <= 0.0:
            raise ContractViolation(f"rho must be > 0, got {self.rho}")
        object.__setattr__(self, "anchor", np.array(self.anchor, dtype=float))
        object.__setattr__(self, "f_anchor", np.array(self.f_anchor, dtype=float))

    @classmethod
    def at(cls, problem: BoxProblem, anchor: np.ndarray, mu: float, rho: float,
           c: float = 0.5, tau: float = 1.0, f_anchor: Optional[np.ndarray] = None) -> "GdfContext":
        anchor = np.asarray(anchor, dtype=float)
        fa = problem.eval(anchor) if f_anchor is None else f_anchor
        return cls(anchor=anchor, f_anchor=fa, v=VParams(mu=mu, c=c, tau=tau), rho=rho, problem=problem)

    def with_params(self, mu: float, rho: float) -> "GdfContext":
        return GdfContext(self.anchor, self.f_anchor, VParams(mu=mu, c=self.v.c, tau=self.v.tau), rho, self.problem)


def gdf_values(ctx: GdfContext, z: np.ndarray, fz: Optional[np.ndarray] = None) -> np.ndarray:
    """All m values G_j(z); pass fz to skip the objective evaluation."""
    z = np.asarray(z, dtype=float)
    if fz is None:
        fz = ctx.problem.eval(z)
    return np.asarray(a_mu(fz - ctx.f_anchor, ctx.v)) - ctx.rho * np.linalg.norm(z - ctx.anchor)


def gdf_value(ctx: GdfContext, j: int, z: np.ndarray) -> float:
    return float(gdf_values(ctx, z)[j])


def gdf_grads(ctx: GdfContext, z: np.ndarray, fz: Optional[np.ndarray] = None,
              jac: Optional[np.ndarray] = None) -> np.ndarray:
    """m x n matrix whose row j is the gradient of G_j at z."""
    z = np.asarray(z, dtype=float)
    s = z - ctx.anchor
    dist = float(np.linalg.norm(s))
    if dist < _ANCHOR_TOL:
        raise AnchorSingularity(f"gradient of G requested at the anchor (|z - x| = {dist:.3g})")
    if fz is None:
        fz = ctx.problem.eval(z)
    if jac is None:
        jac = ctx.problem.jac(z)
    scale = np.atleast_1d(a_mu_prime(fz - ctx.f_anchor, ctx.v))
    return scale[:, None] * jac - ctx.rho * (s / dist)[None, :]


def gdf_grad(ctx: GdfContext, j: int, z: np.ndarray) -> np.ndarray:
    return gdf_grads(ctx, z)[j]


def in_basin_complement(ctx: GdfContext, z: np.ndarray, fz: Optional[np.ndarray] = None) -> bool:
    """z != anchor and f_j(z) >= f_j(anchor) for at least one j."""
    z = np.asarray(z, dtype=float)
    if np.array_equal(z, ctx.anchor):
        return False
    if fz is None:
        fz = ctx.problem.eval(z)
    return bool(np.any(fz >= ctx.f_anchor))


# ----------------------
# Minimal-norm convex combination
# ----------------------
def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1} (sort-based)."""
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    cond = u - cssv / ind > 0
    rho = np.count_nonzero(cond)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def min_norm_combination(grads: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> Tuple[np.ndarray, np.ndarray]:
    """
    lam on the simplex minimizing ||lam @ grads||; returns (lam, lam @ grads).

    m = 1 and m = 2 are closed form; m >= 3 runs projected gradient on the simplex.
    """
    grads = np.atleast_2d(np.asarray(grads, dtype=float))
    m = grads.shape[0]
    if m == 1:
        lam = np.ones(1)
    elif m == 2:
        g1, g2 = grads
        diff = g1 - g2
        den = float(diff @ diff)
        t = 0.5 if den < 1e-300 else float(np.clip(-(diff @ g2) / den, 0.0, 1.0))
        lam = np.array([t, 1.0 - t])
    else:
        Q = grads @ grads.T
        L = float(np.linalg.norm(Q, 2))
        lam = np.full(m, 1.0 / m)
        if L > 0.0:
            step = 1.0 / L
            for _ in range(max_iter):
                nxt = project_simplex(lam - step * (Q @ lam))
                if np.linalg.norm(nxt - lam) < tol:
                    lam = nxt
                    break
                lam = nxt
    return lam, lam @ grads
