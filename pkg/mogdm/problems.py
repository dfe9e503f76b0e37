# mogdm/problems.py
"""
Benchmark problem registry.

Every problem ships an analytic Jacobian. Known Pareto fronts are exposed
through `true_front_sample`; the multimodal pairs (AL1, AL2, LP1, LR1)
have none.

To add a problem, build a BoxProblem and register it:

    register(ProblemSpec(problem=BoxProblem(...), multimodal=False, source="mine"))
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit, logit

from .core import BoxProblem, ContractViolation, NotFound

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ProblemSpec:
    problem: BoxProblem
    multimodal: bool
    source: str

    @property
    def name(self) -> str:
        return self.problem.name

    @property
    def signature(self) -> Tuple[int, int]:
        return self.problem.m, self.problem.n

    @property
    def has_front(self) -> bool:
        return self.problem.front_oracle is not None


# ---------- single-objective building blocks: (value, gradient) ----------
def _ackley(z: np.ndarray, c1: float = 20.0, c2: float = 0.2, c3: float = TWO_PI) -> Tuple[float, np.ndarray]:
    n = z.size
    r = math.sqrt(float(z @ z) / n)
    C = float(np.sum(np.cos(c3 * z)))
    e1 = math.exp(-c2 * r)
    e2 = math.exp(C / n)
    val = c1 + math.e - c1 * e1 - e2
    g = e2 * c3 * np.sin(c3 * z) / n
    if r > 0.0:
        g = g + c1 * c2 * e1 * z / (n * r)
    return val, g


def _levy(z: np.ndarray, k: float = 10.0, a: float = 1.0) -> Tuple[float, np.ndarray]:
    """pi/n [k sin^2(pi z1) + sum (z_i-a)^2 (1 + k sin^2(pi z_{i+1})) + (z_n-a)^2]"""
    n = z.size
    w = z - a
    s2 = np.sin(math.pi * z) ** 2
    ds2 = math.pi * np.sin(TWO_PI * z)
    val = k * s2[0] + float(np.sum(w[:-1] ** 2 * (1.0 + k * s2[1:]))) + w[-1] ** 2
    g = np.zeros(n)
    g[0] += k * ds2[0]
    g[:-1] += 2.0 * w[:-1] * (1.0 + k * s2[1:])
    g[1:] += w[:-1] ** 2 * k * ds2[1:]
    g[-1] += 2.0 * w[-1]
    scale = math.pi / n
    return scale * val, scale * g


def _levy_scaled(z: np.ndarray, l0: float = 3.0, l1: float = 2.0, k0: float = 1.0, k1: float = 0.1,
                 a: float = 1.0) -> Tuple[float, np.ndarray]:
    """Levy variant with frequency multipliers l0, l1 and an oscillating last term."""
    n = z.size
    w = z - a
    f0 = math.pi * l0
    f1 = math.pi * l1
    f2 = 2.0 * math.pi * l1
    s_mid = np.sin(f1 * z[1:]) ** 2
    s_last = math.sin(f2 * z[-1]) ** 2
    val = (math.sin(f0 * z[0]) ** 2
           + float(np.sum(w[:-1] ** 2 * (1.0 + k0 * s_mid)))
           + w[-1] ** 2 * (1.0 + k0 * s_last))
    g = np.zeros(n)
    g[0] += f0 * math.sin(2.0 * f0 * z[0])
    g[:-1] += 2.0 * w[:-1] * (1.0 + k0 * s_mid)
    g[1:] += w[:-1] ** 2 * k0 * f1 * np.sin(2.0 * f1 * z[1:])
    g[-1] += 2.0 * w[-1] * (1.0 + k0 * s_last) + w[-1] ** 2 * k0 * f2 * math.sin(2.0 * f2 * z[-1])
    return k1 * val, k1 * g


def _styblinski(z: np.ndarray) -> Tuple[float, np.ndarray]:
    return 0.5 * float(np.sum(z ** 4 - 16.0 * z ** 2 + 5.0 * z)), 0.5 * (4.0 * z ** 3 - 32.0 * z + 5.0)


def _rastrigin(z: np.ndarray, A: float = 10.0, omega: float = TWO_PI) -> Tuple[float, np.ndarray]:
    val = A * z.size + float(np.sum(z ** 2 - A * np.cos(omega * z)))
    return val, 2.0 * z + A * omega * np.sin(omega * z)


def _pair(first: Callable, second: Callable, name: str, n: int, lo: float, hi: float) -> BoxProblem:
    def objectives(z):
        return np.array([first(z)[0], second(z)[0]])

    def jacobian(z):
        return np.vstack([first(z)[1], second(z)[1]])

    return BoxProblem(name=name, lb=np.full(n, lo), ub=np.full(n, hi), m=2,
                      objectives=objectives, jacobian=jacobian)


# ---------- ZDT ----------
def _zdt(variant: int, n: int = 30) -> BoxProblem:
    gscale = 9.0 / (n - 1)

    def parts(z):
        x1 = z[0]
        g = 1.0 + gscale * float(np.sum(z[1:]))
        return x1, g

    def objectives(z):
        x1, g = parts(z)
        if variant == 1:
            f2 = g - math.sqrt(max(x1, 0.0) * g)
        elif variant == 2:
            f2 = g - x1 ** 2 / g
        else:
            f2 = g - math.sqrt(max(x1, 0.0) * g) - x1 * math.sin(10.0 * math.pi * x1)
        return np.array([x1, f2])

    def jacobian(z):
        x1, g = parts(z)
        J = np.zeros((2, n))
        J[0, 0] = 1.0
        x1s = max(x1, 1e-12)
        if variant == 1:
            J[1, 0] = -0.5 * math.sqrt(g / x1s)
            dg = 1.0 - 0.5 * math.sqrt(x1 / g)
        elif variant == 2:
            J[1, 0] = -2.0 * x1 / g
            dg = 1.0 + (x1 / g) ** 2
        else:
            J[1, 0] = (-0.5 * math.sqrt(g / x1s) - math.sin(10.0 * math.pi * x1)
                       - 10.0 * math.pi * x1 * math.cos(10.0 * math.pi * x1))
            dg = 1.0 - 0.5 * math.sqrt(x1 / g)
        J[1, 1:] = dg * gscale
        return J

    return BoxProblem(name=f"ZDT{variant}", lb=np.zeros(n), ub=np.ones(n), m=2,
                      objectives=objectives, jacobian=jacobian,
                      front_oracle=lambda count: zdt_front(variant, count))


# disconnected pieces of the ZDT3 front, as x1 intervals
ZDT3_SEGMENTS = (
    (0.0, 0.0830015349),
    (0.1822287280, 0.2577623634),
    (0.4093136748, 0.4538821041),
    (0.6183967944, 0.6525117038),
    (0.8233317983, 0.8518328654),
)


def zdt_front(variant: int, count: int) -> np.ndarray:
    if variant == 3:
        lengths = np.array([b - a for a, b in ZDT3_SEGMENTS])
        total = float(lengths.sum())
        # spread `count` points along the concatenated segments
        t = np.linspace(0.0, total, count)
        edges = np.concatenate([[0.0], np.cumsum(lengths)])
        idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(lengths) - 1)
        x1 = np.array([ZDT3_SEGMENTS[i][0] for i in idx]) + (t - edges[idx])
        f2 = 1.0 - np.sqrt(x1) - x1 * np.sin(10.0 * math.pi * x1)
    elif variant == 2:
        x1 = np.linspace(0.0, 1.0, count)
        f2 = 1.0 - x1 ** 2
    else:
        # even in f2 so the curved end is not oversampled
        t = np.linspace(0.0, 1.0, count)
        x1 = t ** 2
        f2 = 1.0 - t
    return np.column_stack([x1, f2])


# ---------- DTLZ (general M) ----------
def _shape_linear(x: np.ndarray, M: int) -> Tuple[np.ndarray, np.ndarray]:
    factors = [[(i, "x") for i in range(M - 1 - j)] + ([(M - 1 - j, "1-x")] if j > 0 else []) for j in range(M)]
    return _product_shape(x, factors, {"x": (lambda v: v, lambda v: 1.0),
                                       "1-x": (lambda v: 1.0 - v, lambda v: -1.0)})


def _shape_sphere(x: np.ndarray, M: int) -> Tuple[np.ndarray, np.ndarray]:
    h = 0.5 * math.pi
    factors = [[(i, "cos") for i in range(M - 1 - j)] + ([(M - 1 - j, "sin")] if j > 0 else []) for j in range(M)]
    return _product_shape(x, factors, {"cos": (lambda v: math.cos(h * v), lambda v: -h * math.sin(h * v)),
                                       "sin": (lambda v: math.sin(h * v), lambda v: h * math.cos(h * v))})


def _product_shape(x: np.ndarray, factors, funcs) -> Tuple[np.ndarray, np.ndarray]:
    """Products of per-coordinate factors and their product-rule derivatives."""
    M = len(factors)
    h = np.ones(M)
    dh = np.zeros((M, max(M - 1, 0)))
    for j, row in enumerate(factors):
        vals = [funcs[kind][0](x[i]) for i, kind in row]
        h[j] = float(np.prod(vals)) if vals else 1.0
        for a, (i, kind) in enumerate(row):
            others = vals[:a] + vals[a + 1:]
            dh[j, i] = funcs[kind][1](x[i]) * (float(np.prod(others)) if others else 1.0)
    return h, dh


def _g_rastrigin(xm: np.ndarray) -> Tuple[float, np.ndarray]:
    y = xm - 0.5
    val = 100.0 * (xm.size + float(np.sum(y ** 2 - np.cos(20.0 * math.pi * y))))
    return val, 100.0 * (2.0 * y + 20.0 * math.pi * np.sin(20.0 * math.pi * y))


def _g_sphere(xm: np.ndarray) -> Tuple[float, np.ndarray]:
    y = xm - 0.5
    return float(y @ y), 2.0 * y


def _dtlz(variant: int, M: int, n: int, name: Optional[str] = None) -> BoxProblem:
    if n < M:
        raise ContractViolation(f"DTLZ needs n >= M, got n={n}, M={M}")
    scale, shape, gfun = {
        1: (0.5, _shape_linear, _g_rastrigin),
        2: (1.0, _shape_sphere, _g_sphere),
        3: (1.0, _shape_sphere, _g_rastrigin),
    }[variant]

    def objectives(z):
        h, _ = shape(z[: M - 1], M)
        g, _ = gfun(z[M - 1:])
        return scale * (1.0 + g) * h

    def jacobian(z):
        h, dh = shape(z[: M - 1], M)
        g, dg = gfun(z[M - 1:])
        J = np.zeros((M, n))
        J[:, : M - 1] = scale * (1.0 + g) * dh
        J[:, M - 1:] = scale * h[:, None] * dg[None, :]
        return J

    return BoxProblem(name=name or f"DTLZ{variant}", lb=np.zeros(n), ub=np.ones(n), m=M,
                      objectives=objectives, jacobian=jacobian,
                      front_oracle=lambda count: dtlz_front(variant, M, count))


def _simplex_lattice(M: int, count: int) -> np.ndarray:
    """Evenly spread points of the unit simplex in R^M, subsampled to `count`."""
    if M == 2:
        t = np.linspace(0.0, 1.0, count)
        return np.column_stack([t, 1.0 - t])
    H = 1
    while math.comb(H + M - 1, M - 1) < count:
        H += 1
    pts = np.array([c for c in itertools.product(range(H + 1), repeat=M) if sum(c) == H], dtype=float) / H
    idx = np.unique(np.round(np.linspace(0, len(pts) - 1, count)).astype(int))
    return pts[idx]


def dtlz_front(variant: int, M: int, count: int) -> np.ndarray:
    w = _simplex_lattice(M, count)
    if variant == 1:
        return 0.5 * w
    return w / np.linalg.norm(w, axis=1, keepdims=True)


# ---------- MOP2 (Fonseca-Fleming) ----------
def _mop2(n: int = 4) -> BoxProblem:
    shift = 1.0 / math.sqrt(n)

    def objectives(z):
        return np.array([1.0 - math.exp(-float(np.sum((z - shift) ** 2))),
                         1.0 - math.exp(-float(np.sum((z + shift) ** 2)))])

    def jacobian(z):
        e1 = math.exp(-float(np.sum((z - shift) ** 2)))
        e2 = math.exp(-float(np.sum((z + shift) ** 2)))
        return np.vstack([2.0 * (z - shift) * e1, 2.0 * (z + shift) * e2])

    def front(count):
        t = np.linspace(-shift, shift, count)
        return np.array([objectives(np.full(n, ti)) for ti in t])

    return BoxProblem(name="MOP2", lb=np.full(n, -4.0), ub=np.full(n, 4.0), m=2,
                      objectives=objectives, jacobian=jacobian, front_oracle=front)


# ---------- synthetic escape tests ----------
# A shallow conflicting pair with a smooth cliff at z1 = 2.5: the left plateau is a
# locally efficient but dominated front, the right one is the global front.
CLIFF_AT = 2.5
CLIFF_STEEPNESS = 1000.0
CLIFF_DEPTH = 5.0
SLOPE = 0.01


def _cliff(z1: float) -> Tuple[float, float]:
    u = float(expit(CLIFF_STEEPNESS * (z1 - CLIFF_AT)))
    return u, CLIFF_STEEPNESS * u * (1.0 - u)


def cliff_front_start() -> float:
    """Smallest z1 from which the right plateau is conflicting again."""
    q = 1.0 / (CLIFF_DEPTH * CLIFF_STEEPNESS)
    u = 0.5 * (1.0 + math.sqrt(1.0 - 4.0 * q))
    return CLIFF_AT + float(logit(u)) / CLIFF_STEEPNESS


def _cliff_values(z1: float) -> np.ndarray:
    u, _ = _cliff(z1)
    return SLOPE * np.array([z1 - CLIFF_DEPTH * u, -z1 - CLIFF_DEPTH * u])


def _cliff_grads(z1: float) -> np.ndarray:
    _, du = _cliff(z1)
    return SLOPE * np.array([1.0 - CLIFF_DEPTH * du, -1.0 - CLIFF_DEPTH * du])


def _cliff_front(count: int, hi: float = 4.0) -> np.ndarray:
    z = np.linspace(cliff_front_start(), hi, count)
    return np.array([_cliff_values(zi) for zi in z])


def _gdtest1() -> BoxProblem:
    return BoxProblem(name="GDTEST1", lb=np.array([0.0]), ub=np.array([4.0]), m=2,
                      objectives=lambda z: _cliff_values(float(z[0])),
                      jacobian=lambda z: _cliff_grads(float(z[0]))[:, None],
                      front_oracle=_cliff_front)


def _gdtest2() -> BoxProblem:
    def objectives(z):
        return _cliff_values(float(z[0])) + 0.5 * (z[1] - 1.0) ** 2

    def jacobian(z):
        J = np.empty((2, 2))
        J[:, 0] = _cliff_grads(float(z[0]))
        J[:, 1] = z[1] - 1.0
        return J

    return BoxProblem(name="GDTEST2", lb=np.array([0.0, 0.0]), ub=np.array([4.0, 2.0]), m=2,
                      objectives=objectives, jacobian=jacobian, front_oracle=_cliff_front)


def convex_pair(n: int = 5, lo: float = -2.0, hi: float = 2.0) -> BoxProblem:
    """(|z|^2, |z - e|^2) with e the all-ones vector; efficient set is the segment [0, e]."""
    e = np.ones(n)

    def objectives(z):
        return np.array([float(z @ z), float((z - e) @ (z - e))])

    def front(count):
        t = np.linspace(0.0, 1.0, count)
        return np.column_stack([n * t ** 2, n * (1.0 - t) ** 2])

    return BoxProblem(name=f"CONVEX{n}", lb=np.full(n, lo), ub=np.full(n, hi), m=2,
                      objectives=objectives, jacobian=lambda z: np.vstack([2.0 * z, 2.0 * (z - e)]),
                      front_oracle=front)


# ---------- registry ----------
_EXTRA: Dict[str, ProblemSpec] = {}


@lru_cache(maxsize=1)
def _builtin() -> Dict[str, ProblemSpec]:
    specs: List[ProblemSpec] = [
        ProblemSpec(_pair(_ackley, _levy, "AL1", 20, -0.5, 1.5), True, "multimodal-pair"),
        ProblemSpec(_pair(_ackley, _levy_scaled, "AL2", 50, -0.5, 1.5), True, "multimodal-pair"),
        ProblemSpec(_pair(_levy, _styblinski, "LP1", 50, -3.0, 2.0), True, "multimodal-pair"),
        ProblemSpec(_pair(_levy, _rastrigin, "LR1", 50, -2.0, 2.0), True, "multimodal-pair"),
        ProblemSpec(_zdt(1), False, "zitzler2000"),
        ProblemSpec(_zdt(2), False, "zitzler2000"),
        ProblemSpec(_zdt(3), False, "zitzler2000"),
        ProblemSpec(_dtlz(1, 3, 7), True, "deb2002"),
        ProblemSpec(_dtlz(2, 3, 12), False, "deb2002"),
        ProblemSpec(_dtlz(3, 3, 12), True, "deb2002"),
        ProblemSpec(_dtlz(1, 2, 2, "DTLZ1n2"), True, "deb2002"),
        ProblemSpec(_dtlz(2, 2, 2, "DTLZ2n2"), False, "deb2002"),
        ProblemSpec(_dtlz(3, 2, 2, "DTLZ3n2"), True, "deb2002"),
        ProblemSpec(_mop2(), False, "fonseca1995"),
        ProblemSpec(_gdtest1(), True, "synthetic"),
        ProblemSpec(_gdtest2(), True, "synthetic"),
    ]
    return {s.name: s for s in specs}


def registry() -> Dict[str, ProblemSpec]:
    return {**_builtin(), **_EXTRA}


def register(spec: ProblemSpec) -> None:
    if spec.name in _builtin():
        raise ContractViolation(f"{spec.name} is a built-in problem")
    _EXTRA[spec.name] = spec


def get_spec(name: str) -> ProblemSpec:
    specs = registry()
    if name not in specs:
        raise NotFound(f"unknown problem '{name}' (known: {', '.join(sorted(specs))})")
    return specs[name]


def get_problem(name: str) -> BoxProblem:
    return get_spec(name).problem


def true_front_sample(spec: ProblemSpec, count: int) -> Optional[np.ndarray]:
    """count x m points spread over the analytic front, or None when it is unknown."""
    if count < 1:
        raise ContractViolation("count must be >= 1")
    oracle = spec.problem.front_oracle
    if oracle is None:
        return None
    return np.asarray(oracle(count), dtype=float)
