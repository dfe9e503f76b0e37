# mogdm/cli.py
"""
Experiment runner.

    python -m mogdm run --config configs/small.env --out results/small
    python -m mogdm profile results/small/summary.csv --metric hv --out results/small
    python -m mogdm front GDTEST1 --solver mogdm --starts 50 --out results/gdtest1
    python -m mogdm list-problems
    python -m mogdm check --quick

Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import orjson
import pandas as pd
from dotenv import dotenv_values
from joblib import cpu_count
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .checks import run_checks
from .core import MogdmError, NotFound, RunReport, SolverParams
from .globalsearch import SOLVERS, mogdm_front
from .metrics import (METRICS, curves_frame, evaluate_front, front_distance, performance_profile, profile_costs,
                      reference_point)
from .problems import get_spec, registry, true_front_sample

log = logging.getLogger("mogdm.cli")

FLOAT_FMT = "%.17g"
SUMMARY_COLUMNS = ["problem", "m", "n", "solver", "n_nondominated", "hypervolume", "delta", "f_evals", "jac_evals"]
LIST_KEYS = ("problems", "solvers")
JSON_OPTS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problems: List[str] = Field(default_factory=lambda: ["all"])
    solvers: List[str] = Field(default_factory=lambda: list(SOLVERS))
    starts: int = Field(200, ge=1)
    seed: int = Field(0, ge=0)
    out: str = "results"
    jobs: int = Field(default_factory=cpu_count)
    emit_csv: bool = True
    emit_json: bool = True
    emit_plotdata: bool = True
    spread: bool = True
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("problems", "solvers")
    @classmethod
    def _non_empty(cls, v: List[str]) -> List[str]:
        v = [s.strip() for s in v if s.strip()]
        if not v:
            raise ValueError("needs at least one entry")
        return v

    @field_validator("solvers")
    @classmethod
    def _known_solvers(cls, v: List[str]) -> List[str]:
        bad = [s for s in v if s not in SOLVERS]
        if bad:
            raise ValueError(f"unknown solver(s) {bad}; expected a subset of {list(SOLVERS)}")
        return v

    @model_validator(mode="after")
    def _check_params(self) -> "ExperimentConfig":
        self.solver_params()
        return self

    def solver_params(self) -> SolverParams:
        return SolverParams(**{**self.params, "n_starts": self.starts, "seed": self.seed})

    def problem_names(self) -> List[str]:
        if any(p.lower() == "all" for p in self.problems):
            return sorted(registry())
        for p in self.problems:
            get_spec(p)
        return list(self.problems)


def load_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Flat key=value file; `param_<name>` keys override SolverParams; lists are comma-separated."""
    raw: Dict[str, Any] = {}
    if path:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        for key, value in dotenv_values(path).items():
            key = key.strip().lower()
            if value is None:
                continue
            if key.startswith("param_"):
                raw.setdefault("params", {})[key[len("param_"):]] = value
            elif key in LIST_KEYS:
                raw[key] = [s.strip() for s in value.split(",")]
            else:
                raw[key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    return ExperimentConfig(**raw)


# ---------- writers ----------
def _write_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=FLOAT_FMT, lineterminator="\n")


def _write_dat(values: np.ndarray, path: Path, header: str) -> None:
    values = np.atleast_2d(values) if len(values) else np.empty((0, 0))
    with open(path, "w") as f:
        f.write(f"# {header}\n")
        for row in values:
            f.write(" ".join(FLOAT_FMT % v for v in row) + "\n")


def front_rows(report: RunReport) -> List[Dict[str, Any]]:
    rows = []
    for z, fz in report.pfg:
        row: Dict[str, Any] = {"solver": report.solver, "problem": report.problem}
        row.update({f"z{i}": v for i, v in enumerate(z)})
        row.update({f"f{j}": v for j, v in enumerate(fz)})
        rows.append(row)
    return rows


def _extremes(name: str):
    spec = get_spec(name)
    if spec.problem.m != 2 or not spec.has_front:
        return None
    ends = true_front_sample(spec, 2)
    return ends[0], ends[-1]


def summarize(reports: Sequence[RunReport]) -> pd.DataFrame:
    """One summary row per report; all reports of a problem share one reference point."""
    rows = []
    by_problem: Dict[str, List[RunReport]] = {}
    for r in reports:
        by_problem.setdefault(r.problem, []).append(r)
    for name, group in by_problem.items():
        spec = get_spec(name)
        fronts = [r.pfg.values() for r in group] + [r.pf.values() for r in group]
        ref = reference_point(fronts)
        extremes = _extremes(name)
        for r in group:
            mr = evaluate_front(r.pfg.values(), ref, extremes, r.f_evals, r.jac_evals)
            rows.append({"problem": name, "m": spec.problem.m, "n": spec.problem.n, "solver": r.solver,
                         "n_nondominated": mr.n_nondominated, "hypervolume": mr.hypervolume,
                         "delta": mr.delta_spread, "f_evals": mr.f_evals, "jac_evals": mr.jac_evals})
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def write_cell(report: RunReport, out: Path, emit_json: bool, emit_plotdata: bool) -> None:
    stem = f"{report.problem}_{report.solver}"
    if emit_json:
        (out / f"report_{stem}.json").write_bytes(orjson.dumps(report.to_dict(), option=JSON_OPTS))
    if emit_plotdata:
        for label, arch in (("pf", report.pf), ("pfg", report.pfg)):
            _write_dat(arch.values(), out / f"{label}_{stem}.dat", f"{label.upper()} {stem}: one point per line, f0 f1 ...")


# ---------- commands ----------
def cmd_run(config: ExperimentConfig) -> int:
    out = Path(config.out)
    if config.emit_csv or config.emit_json or config.emit_plotdata:
        out.mkdir(parents=True, exist_ok=True)
    params = config.solver_params()
    reports: List[RunReport] = []
    failures: List[Dict[str, str]] = []
    front_tables: Dict[str, List[Dict[str, Any]]] = {}

    for name in config.problem_names():
        problem = get_spec(name).problem
        for solver in config.solvers:
            log.info("running %s with %s (%d starts)", name, solver, config.starts)
            try:
                report = mogdm_front(problem, params, solver=solver, jobs=config.jobs, spread=config.spread)
            except (MogdmError, ValueError, FloatingPointError) as e:
                log.warning("%s/%s failed: %s", name, solver, e)
                failures.append({"problem": name, "solver": solver, "error": f"{type(e).__name__}: {e}"})
                continue
            reports.append(report)
            front_tables.setdefault(name, []).extend(front_rows(report))
            write_cell(report, out, config.emit_json, config.emit_plotdata)

    summary = summarize(reports)
    for _, row in summary.iterrows():
        log.info("%s/%s: %d nondominated, hv=%.6g", row["problem"], row["solver"], row["n_nondominated"],
                 row["hypervolume"])
    if config.emit_csv:
        _write_csv(summary, out / "summary.csv")
        timings = pd.DataFrame([{"problem": r.problem, "solver": r.solver, "wall_time": r.wall_time}
                                for r in reports], columns=["problem", "solver", "wall_time"])
        _write_csv(timings, out / "timings.csv")
        for name, rows in front_tables.items():
            _write_csv(pd.DataFrame(rows), out / f"fronts_{name}.csv")
        if failures:
            _write_csv(pd.DataFrame(failures, columns=["problem", "solver", "error"]), out / "failures.csv")
        print(f"✅ Wrote summary to {out / 'summary.csv'} ({len(summary)} rows)")
    if failures:
        print(f"⚠️ {len(failures)} run(s) failed; see log" + (" and failures.csv" if config.emit_csv else ""))
        return EXIT_RUNTIME
    return EXIT_OK


def read_summaries(paths: Sequence[str]) -> pd.DataFrame:
    frames = []
    for p in paths:
        if not Path(p).is_file():
            raise FileNotFoundError(f"summary not found: {p}")
        frames.append(pd.read_csv(p))
    return pd.concat(frames, ignore_index=True)


def cmd_profile(summaries: Sequence[str], metric: str, out: str) -> int:
    df = read_summaries(summaries).drop_duplicates(subset=["problem", "solver"], keep="first")
    solvers = sorted(df["solver"].unique())
    if len(solvers) < 2:
        raise MogdmError(f"profiles need at least two solvers, found {solvers}")
    shared = set.intersection(*(set(df.loc[df["solver"] == s, "problem"]) for s in solvers))
    if not shared:
        raise MogdmError("solvers share no problem")
    costs = profile_costs(df[df["problem"].isin(shared)], metric).reindex(index=solvers)
    curves = performance_profile(costs.to_numpy(), solvers)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(curves_frame(curves), out_dir / f"profile_{metric}.csv")
    with open(out_dir / f"profile_{metric}.dat", "w") as f:
        for c in curves:
            f.write(f"# {c.solver}: tau rho ({metric}, {len(c.ratios)} problems)\n")
            for t, v in zip(c.taus, c.values):
                f.write(f"{FLOAT_FMT % t} {FLOAT_FMT % v}\n")
            f.write("\n\n")
    print(f"✅ Wrote {metric} profile for {', '.join(solvers)} over {len(shared)} problem(s) to {out_dir}")
    return EXIT_OK


def cmd_front(problem: str, solver: str, config: ExperimentConfig) -> int:
    spec = get_spec(problem)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    report = mogdm_front(spec.problem, config.solver_params(), solver=solver, jobs=config.jobs,
                         spread=config.spread)
    write_cell(report, out, emit_json=config.emit_json, emit_plotdata=True)
    _write_csv(pd.DataFrame(front_rows(report)), out / f"fronts_{problem}_{solver}.csv")
    _write_csv(summarize([report]), out / f"summary_{problem}_{solver}.csv")
    msg = f"✅ {problem}/{solver}: |PF|={len(report.pf)} |PFG|={len(report.pfg)}"
    if spec.has_front and len(report.pfg):
        d = front_distance(report.pfg.values(), true_front_sample(spec, 2000))
        msg += f", median distance to front {np.median(d):.3g}"
    print(msg)
    return EXIT_OK


def cmd_list_problems() -> int:
    rows = [{"name": s.name, "m": s.problem.m, "n": s.problem.n, "multimodal": s.multimodal,
             "known_front": s.has_front, "source": s.source} for s in registry().values()]
    print(pd.DataFrame(rows).to_string(index=False))
    return EXIT_OK


def cmd_check(seed: int, quick: bool) -> int:
    results = run_checks(seed=seed, quick=quick)
    for r in results:
        print(f"{'✅' if r.ok else '❌'} {r.name}: {r.detail}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_RUNTIME


# ---------- argument parsing ----------
class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mogdm", description="Multi-objective global descent solver and benchmark harness")
    ap.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    ap.add_argument("--quiet", "-q", action="store_true", help="warnings only")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value experiment file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    common.add_argument("--starts", type=int, help="number of start points N")
    common.add_argument("--no-spread", dest="spread", action="store_false", default=None,
                        help="skip the payoff table and spread filter")

    run = sub.add_parser("run", parents=[common], help="run every (problem, solver) cell")
    run.add_argument("--problems", help="comma-separated names or 'all'")
    run.add_argument("--solver", help=f"comma-separated subset of {','.join(SOLVERS)}")

    prof = sub.add_parser("profile", help="performance profiles from summary CSVs")
    prof.add_argument("summaries", nargs="+")
    prof.add_argument("--metric", choices=METRICS, default="hv")
    prof.add_argument("--out", default=".")

    front = sub.add_parser("front", parents=[common], help="one problem, one solver, plus scatter data")
    front.add_argument("problem")
    front.add_argument("--solver", choices=SOLVERS, default="mogdm")

    sub.add_parser("list-problems", help="show the problem registry")

    chk = sub.add_parser("check", help="run the invariant suites")
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--quick", action="store_true")
    return ap


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    o: Dict[str, Any] = {k: getattr(args, k, None) for k in ("out", "seed", "jobs", "starts", "spread")}
    if getattr(args, "problems", None):
        o["problems"] = args.problems.split(",")
    if args.command == "run" and args.solver:
        o["solvers"] = args.solver.split(",")
    return o


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "list-problems":
            return cmd_list_problems()
        if args.command == "check":
            return cmd_check(args.seed, args.quick)
        if args.command == "profile":
            return cmd_profile(args.summaries, args.metric, args.out)
        config = load_config(args.config, _overrides(args))
        if args.command == "front":
            return cmd_front(args.problem, args.solver, config)
        config.problem_names()
        return cmd_run(config)
    except (ValidationError, NotFound, FileNotFoundError) as e:
        log.error("%s", e)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except MogdmError as e:
        log.error("%s", e)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
