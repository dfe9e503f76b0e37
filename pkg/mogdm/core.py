# mogdm/core.py
"""
Shared domain types: box problems, solver parameters, Pareto archives,
run reports, bound estimates, and the seeded generators every module draws from.

Problems and params are immutable once built and safe to share between
workers; archives, counters and reports belong to a single run and are
merged after the workers join.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

log = logging.getLogger("mogdm.core")

ArrayFn = Callable[[np.ndarray], np.ndarray]

# Two points closer than this are the same archive entry.
DEDUP_TOL = 1e-10


# ----------------------
# Errors
# ----------------------
class MogdmError(RuntimeError):
    """Base class for every solver/harness failure."""


class ContractViolation(MogdmError, ValueError):
    """A caller broke an operation's precondition."""


class ProblemDefinitionError(MogdmError):
    """A problem returned something unusable (non-finite gradients, bad bounds)."""


class AnchorSingularity(MogdmError):
    """Gradient of G requested at (or within 1e-12 of) the anchor."""


class LineSearchStalled(MogdmError):
    """Backtracking ran out of contractions."""


class CandidateExhausted(MogdmError):
    """No candidate point could be placed outside the deleted neighborhood."""


class CandidateRejected(MogdmError):
    """Parameter reduction hit its cap or floor without certifying descent."""


class NotFound(MogdmError, KeyError):
    """Unknown problem name."""


class Unsupported(MogdmError):
    """Requested computation is outside the supported range (e.g. m > 3 hypervolume)."""


class Undefined(MogdmError):
    """Metric is undefined for the given input (e.g. empty front)."""


# ----------------------
# Randomness
# ----------------------
def make_rng(seed: Any = 0, stream: int = 0) -> np.random.Generator:
    """
    Counter-based generator keyed by (seed, stream).
    Passing a Generator returns it unchanged so callers can thread one through.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    seed = int(seed)
    if seed < 0 or stream < 0:
        raise ContractViolation(f"seed and stream must be >= 0, got {seed}, {stream}")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ----------------------
# Problems
# ----------------------
@dataclass(frozen=True, eq=False)
class BoxProblem:
    """A differentiable m-objective problem over the box [lb, ub]."""

    name: str
    lb: np.ndarray
    ub: np.ndarray
    m: int
    objectives: ArrayFn
    jacobian: ArrayFn
    front_oracle: Optional[Callable[[int], np.ndarray]] = None

    def __post_init__(self) -> None:
        lb = np.array(self.lb, dtype=float).ravel()
        ub = np.array(self.ub, dtype=float).ravel()
        if lb.shape != ub.shape or lb.size == 0:
            raise ProblemDefinitionError(f"{self.name}: lb/ub shapes differ or are empty")
        if not np.all(lb < ub):
            raise ProblemDefinitionError(f"{self.name}: need lb < ub componentwise")
        if self.m < 1:
            raise ProblemDefinitionError(f"{self.name}: m must be >= 1, got {self.m}")
        lb.flags.writeable = False
        ub.flags.writeable = False
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def n(self) -> int:
        return int(self.lb.size)

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lb + self.ub)

    def eval(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.objectives(np.asarray(z, dtype=float)), dtype=float).reshape(self.m)

    def jac(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.jacobian(np.asarray(z, dtype=float)), dtype=float).reshape(self.m, self.n)

    def clip(self, z: np.ndarray) -> np.ndarray:
        return np.clip(z, self.lb, self.ub)

    def contains(self, z: np.ndarray, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.lb - tol) and np.all(z <= self.ub + tol))

    def restrict(self, j: int) -> "BoxProblem":
        """Single-objective problem made of objective j alone (payoff-table solves)."""
        if not 0 <= j < self.m:
            raise ContractViolation(f"objective index {j} out of range for m={self.m}")
        f, J = self.objectives, self.jacobian
        return BoxProblem(
            name=f"{self.name}[f{j}]",
            lb=self.lb,
            ub=self.ub,
            m=1,
            objectives=lambda z: np.asarray(f(z), dtype=float)[j : j + 1],
            jacobian=lambda z: np.asarray(J(z), dtype=float)[j : j + 1, :],
        )


class CountedProblem:
    """
    Per-run view of a BoxProblem that counts objective-vector and Jacobian calls.
    One f-vector call counts 1, whatever m is.
    """

    def __init__(self, problem: BoxProblem):
        self.problem = problem
        self.f_evals = 0
        self.jac_evals = 0

    def __getattr__(self, item: str) -> Any:
        if item == "problem":
            raise AttributeError(item)
        return getattr(self.problem, item)

    def eval(self, z: np.ndarray) -> np.ndarray:
        self.f_evals += 1
        return self.problem.eval(z)

    def jac(self, z: np.ndarray) -> np.ndarray:
        self.jac_evals += 1
        return self.problem.jac(z)


def check_jacobian(problem: BoxProblem, points: Iterable[np.ndarray], rel_step: float = 1e-6) -> float:
    """
    Largest relative error between problem.jac and central differences
    (step rel_step*(1+|z_i|)) over the given points.
    """
    worst = 0.0
    for z in points:
        z = np.asarray(z, dtype=float)
        J = problem.jac(z)
        fd = np.empty_like(J)
        for i in range(problem.n):
            h = rel_step * (1.0 + abs(z[i]))
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            fd[:, i] = (problem.eval(zp) - problem.eval(zm)) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(fd))))
        worst = max(worst, float(np.max(np.abs(J - fd))) / scale)
    return worst


# ----------------------
# Dominance and archives
# ----------------------
def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a <= b componentwise and a != b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractViolation(f"dominance needs equal lengths, got {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def strictly_better(a: np.ndarray, b: np.ndarray) -> bool:
    """a < b in every component."""
    return bool(np.all(np.asarray(a) < np.asarray(b)))


class ParetoArchive:
    """
    (point, objective-vector) pairs.

    raw: weak front, every insertion appended.
    filtered: mutually nondominated entries, near-duplicate points dropped.
    """

    def __init__(self, mode: str = "filtered"):
        if mode not in ("raw", "filtered"):
            raise ContractViolation(f"unknown archive mode: {mode}")
        self.mode = mode
        self.entries: List[Tuple[np.ndarray, np.ndarray]] = []

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def insert(self, z: np.ndarray, fz: np.ndarray) -> bool:
        z = np.array(z, dtype=float)
        fz = np.array(fz, dtype=float)
        if self.mode == "raw":
            self.entries.append((z, fz))
            return True
        for zi, fi in self.entries:
            if dominates(fi, fz):
                return False
            if np.linalg.norm(zi - z) < DEDUP_TOL:
                return False
        self.entries = [(zi, fi) for zi, fi in self.entries if not dominates(fz, fi)]
        self.entries.append((z, fz))
        return True

    def extend(self, pairs: Iterable[Tuple[np.ndarray, np.ndarray]]) -> "ParetoArchive":
        for z, fz in pairs:
            self.insert(z, fz)
        return self

    def filtered(self) -> "ParetoArchive":
        return ParetoArchive("filtered").extend(self.entries)

    def points(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, 0))
        return np.vstack([z for z, _ in self.entries])

    def values(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, 0))
        return np.vstack([fz for _, fz in self.entries])

    def to_records(self) -> List[Dict[str, Any]]:
        return [{"z": z.tolist(), "f": fz.tolist()} for z, fz in self.entries]


def archive_insert(arch: ParetoArchive, z: np.ndarray, fz: np.ndarray) -> ParetoArchive:
    arch.insert(z, fz)
    return arch


# ----------------------
# Bounds (K, M, L)
# ----------------------
@dataclass(frozen=True)
class BoundsInfo:
    K: float
    M: float
    L: float


def estimate_bounds(problem: BoxProblem, sample_count: int = 64, seed: Any = 0) -> BoundsInfo:
    """
    K is the box diameter; M is the largest sampled gradient norm (x1.2);
    the sampled bound doubles as the Lipschitz estimate L.
    """
    if sample_count < 1:
        raise ContractViolation("sample_count must be >= 1")
    rng = make_rng(seed, stream=7)
    K = float(np.linalg.norm(problem.ub - problem.lb))
    width = problem.ub - problem.lb
    M = 0.0
    for _ in range(sample_count):
        # interior: stay 1% away from the faces
        z = problem.lb + width * (0.01 + 0.98 * rng.random(problem.n))
        J = problem.jac(z)
        if not np.all(np.isfinite(J)):
            raise ProblemDefinitionError(f"{problem.name}: non-finite gradient at {z}")
        M = max(M, float(np.max(np.linalg.norm(J, axis=1))))
    M = max(1.2 * M, 1e-8)
    return BoundsInfo(K=K, M=M, L=M)


# ----------------------
# Parameters
# ----------------------
class SolverParams(BaseModel):
    """
    Every tunable of the global descent method. Problem-dependent entries are
    None until resolve(problem) fills them with problem-scaled defaults.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    mu_ini: float = Field(0.5, gt=0.0, lt=1.0)
    rho_ini: Optional[float] = Field(None, gt=0.0)
    rho_L: float = Field(1e-5, gt=0.0)
    rho_U: Optional[float] = Field(None, gt=0.0)
    rho_hat: float = Field(0.35, gt=0.0, lt=1.0)
    mu_hat: float = Field(0.1, gt=0.0, lt=1.0)
    kappa: Optional[float] = Field(None, gt=0.0)
    eps_neighborhood: Optional[float] = Field(None, gt=0.0)
    alpha_bar_U: float = Field(0.1, gt=0.0)
    beta: float = Field(1e-4, gt=0.0, lt=1.0)
    r: float = Field(0.5, gt=0.0, lt=1.0)
    delta: float = Field(0.01, gt=0.0)
    l: int = Field(1, ge=1)
    tau: float = Field(1.0, gt=0.0)
    c: float = Field(0.5, gt=0.0, lt=1.0)
    n_starts: int = Field(200, ge=1)
    max_param_reductions: int = Field(50, ge=0)
    seed: int = Field(0, ge=0)

    local_tol: Optional[float] = Field(None, gt=0.0)
    local_max_iter: int = Field(2000, ge=1)
    local_alpha0: float = Field(1.0, gt=0.0)
    local_max_step: Optional[float] = Field(None, gt=0.0)
    local_scaling: Literal["ideal", "none"] = "ideal"
    descent_max_steps: int = Field(500, ge=1)
    max_reanchors: int = Field(100, ge=0)
    bounds_samples: int = Field(64, ge=1)
    spread_oversample: int = Field(2, ge=1)

    @model_validator(mode="after")
    def _check_rho_range(self) -> "SolverParams":
        if self.rho_ini is not None and self.rho_ini <= self.rho_L:
            raise ValueError(f"rho_ini={self.rho_ini} must exceed rho_L={self.rho_L}")
        return self

    @property
    def is_resolved(self) -> bool:
        return None not in (self.rho_ini, self.rho_U, self.kappa, self.eps_neighborhood,
                            self.local_tol, self.local_max_step)

    def resolve(self, problem: BoxProblem) -> "SolverParams":
        """Fill the problem-dependent defaults; explicit values win."""
        n = problem.n
        K = float(np.linalg.norm(problem.ub - problem.lb))
        eps = self.eps_neighborhood
        if eps is None:
            eps = 1.0 if float(np.min(problem.ub - problem.lb)) > 10.0 else 0.1
        fills = {
            "rho_ini": self.delta / (K + 1e-3),
            "rho_U": self.delta / K,
            "kappa": 1e-4 * math.sqrt(n),
            "eps_neighborhood": eps,
            "local_tol": 1e-6 * math.sqrt(n),
            "local_max_step": 0.05 * K,
        }
        update = {k: v for k, v in fills.items() if getattr(self, k) is None}
        # model_copy skips validation; rebuild so range checks still run
        return SolverParams(**{**self.model_dump(), **update})


# ----------------------
# Run report
# ----------------------
@dataclass
class RunReport:
    problem: str
    solver: str
    seed: int
    f_evals: int = 0
    jac_evals: int = 0
    wall_time: float = 0.0
    local_solutions: List[np.ndarray] = field(default_factory=list)
    wpf: ParetoArchive = field(default_factory=lambda: ParetoArchive("raw"))
    wpfg: ParetoArchive = field(default_factory=lambda: ParetoArchive("raw"))
    pf: ParetoArchive = field(default_factory=lambda: ParetoArchive("filtered"))
    pfg: ParetoArchive = field(default_factory=lambda: ParetoArchive("filtered"))
    iterations: Dict[str, int] = field(default_factory=dict)
    bounds: Optional[BoundsInfo] = None

    def count(self, key: str, k: int = 1) -> None:
        self.iterations[key] = self.iterations.get(key, 0) + k

    def absorb(self, other: "RunReport") -> None:
        """Merge another worker's report into this one (counters sum)."""
        self.f_evals += other.f_evals
        self.jac_evals += other.jac_evals
        self.local_solutions.extend(other.local_solutions)
        self.wpf.extend(other.wpf)
        self.wpfg.extend(other.wpfg)
        for k, v in other.iterations.items():
            self.count(k, v)

    def finalize(self) -> "RunReport":
        self.pf = self.wpf.filtered()
        self.pfg = self.wpfg.filtered()
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem": self.problem,
            "solver": self.solver,
            "seed": self.seed,
            "f_evals": self.f_evals,
            "jac_evals": self.jac_evals,
            "wall_time": self.wall_time,
            "iterations": dict(sorted(self.iterations.items())),
            "bounds": None if self.bounds is None else vars(self.bounds),
            "local_solutions": [z.tolist() for z in self.local_solutions],
            "wpf": self.wpf.to_records(),
            "wpfg": self.wpfg.to_records(),
            "pf": self.pf.to_records(),
            "pfg": self.pfg.to_records(),
        }
