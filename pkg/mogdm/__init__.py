"""Multi-objective global descent: local fronts first, then escapes to dominating regions."""

from .core import (BoxProblem, MogdmError, ParetoArchive, RunReport, SolverParams, dominates,
                   estimate_bounds, make_rng)
from .globalsearch import mogdm_front, mogdm_run
from .localsearch import local_solve
from .problems import get_problem, registry

__all__ = [
    "BoxProblem",
    "MogdmError",
    "ParetoArchive",
    "RunReport",
    "SolverParams",
    "dominates",
    "estimate_bounds",
    "get_problem",
    "local_solve",
    "make_rng",
    "mogdm_front",
    "mogdm_run",
    "registry",
]
