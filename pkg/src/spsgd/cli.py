"""Command-line entry point.

    spsgd run    --config exp.ini [--jobs N] [--out DIR]
    spsgd check  --config exp.ini [--jobs N] [--out DIR]
    spsgd gen    --config exp.ini --out DIR
    spsgd fistar logistic 1.0 1.0

Exit codes: 0 success (and PASS for ``check``), 1 invalid input, 2 numerical
abort, 3 bound check FAIL.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import problems as P
from .analysis import BoundSpec, check_bound
from .config import ExperimentConfig, parse_config
from .core import FiniteSumProblem, ProblemConstants, RunConfig, Trajectory
from .engine import NumericalAbort, run_ensemble
from .losses import fi_star_exponential_l2, fi_star_hinge_l2, fi_star_logistic_l2
from .stepsize import OracleInconsistencyError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_FAIL = 0, 1, 2, 3


@dataclass
class Prepared:
    problem: FiniteSumProblem
    constants: ProblemConstants | None
    x0: np.ndarray
    run_config: RunConfig


def build_problem(cfg: ExperimentConfig) -> tuple[FiniteSumProblem, ProblemConstants | None]:
    """The configured problem and, when an exact oracle exists, its constants."""
    p = dict(cfg.problem_params)
    g = cfg.generator
    if g == "synthetic_classification":
        return P.generate_synthetic_classification(**p)
    if g == "least_squares":
        problem = P.generate_least_squares(**p)
    elif g == "separable_hinge":
        problem = P.generate_separable_hinge(**p)
    elif g == "linear_system":
        if "m" not in p or "d" not in p:
            raise ValueError("[problem] linear_system needs m and d")
        problem = P.generate_linear_system(**p)
    elif g == "matrix_factorization":
        if "rank_k" not in p:
            raise ValueError("[problem] matrix_factorization needs rank_k")
        return P.generate_matrix_factorization(**p), None
    else:
        problem = P.load_problem(p["path"])
    try:
        return problem, P.solve_exact(problem).constants
    except ValueError:
        # no exact oracle for this problem type (e.g. matrix factorization from a file)
        return problem, None


def initial_point(cfg: ExperimentConfig, problem: FiniteSumProblem) -> np.ndarray:
    if cfg.x0 == "zeros":
        return np.zeros(problem.dim)
    if isinstance(problem, P.MatrixFactorizationProblem):
        return problem.initial_point(cfg.x0_seed, cfg.x0_scale)
    return cfg.x0_scale * np.random.default_rng(cfg.x0_seed).standard_normal(problem.dim)


def prepare(cfg: ExperimentConfig) -> Prepared:
    problem, constants = build_problem(cfg)
    x0 = initial_point(cfg, problem)
    if cfg.rule.kind == "deterministic_polyak" and constants is None:
        raise ValueError("the deterministic Polyak rule needs an exact f*")
    rc = RunConfig(seed=cfg.seeds[0], iterations=cfg.iterations, step_rule=cfg.rule,
                   batch_schedule=cfg.schedule(constants), record_every=cfg.record_every)
    return Prepared(problem, constants, x0, rc)


def execute(prep: Prepared, seeds, jobs: int = 1) -> list[Trajectory]:
    k = prep.constants
    return run_ensemble(prep.problem, prep.run_config, list(seeds), prep.x0,
                        x_star=None if k is None else k.x_star, f_star=None if k is None else k.f_star,
                        subgradient=not prep.problem.smooth, jobs=jobs)


def _write_outputs(cfg: ExperimentConfig, prep: Prepared, trajs: list[Trajectory], out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for t in trajs:
        name = f"seed_{t.seed}.csv"
        (out / name).write_text(t.to_csv(), encoding="utf-8")
        files.append(name)
    manifest = {
        "config_hash": cfg.config_hash,
        "config": cfg.canonical(),
        "seeds": list(cfg.seeds),
        "files": files,
        "constants": None if prep.constants is None else prep.constants.to_dict(),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=_jsonable) + "\n", encoding="utf-8")
    return path


def _jsonable(o):
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def bound_spec(cfg: ExperimentConfig, prep: Prepared) -> BoundSpec:
    """BoundSpec for the ``[check]`` section, rejecting theorems that do not fit the problem."""
    theorem = cfg.check.theorem
    problem, k = prep.problem, prep.constants
    if k is None:
        raise ValueError(f"{theorem} needs exact problem constants")
    is_system = isinstance(problem, P.LinearSystemProblem)
    if (theorem == "linear_system_B3") != is_system:
        raise ValueError(f"{theorem} does not apply to {type(problem).__name__}")
    if not problem.smooth and theorem != "nonsmooth_C1":
        raise ValueError(f"{theorem} needs a smooth problem")
    if theorem == "nonsmooth_C1" and problem.smooth:
        raise ValueError("nonsmooth_C1 is checked on non-smooth problems only")
    overrides = dict(cfg.check.overrides)
    rho, delta = overrides.pop("rho", None), overrides.pop("delta", None)
    if overrides:
        k = ProblemConstants.from_dict({**k.to_dict(), **overrides})
    d0 = prep.x0 - k.x_star
    spec = BoundSpec(theorem, k, c=cfg.rule.c, gamma_b=cfg.rule.gamma_b, dist0_sq=float(d0 @ d0),
                     gap0=problem.full_value(prep.x0) - k.f_star, rho=rho, delta=delta)
    spec.check()
    return spec


def cmd_run(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    prep = prepare(cfg)
    trajs = execute(prep, cfg.seeds, jobs)
    print(_write_outputs(cfg, prep, trajs, out))
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    if cfg.check is None:
        raise ValueError("check needs a [check] section")
    prep = prepare(cfg)
    spec = bound_spec(cfg, prep)
    trajs = execute(prep, cfg.seeds, jobs)
    _write_outputs(cfg, prep, trajs, out)
    report = check_bound(trajs, spec, slack=cfg.check.slack)
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    verdict = "PASS" if report.passed else f"FAIL (first violation at k={report.first_violation_k})"
    print(f"{spec.theorem}: {verdict}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_gen(cfg: ExperimentConfig, out: Path) -> int:
    problem, _ = build_problem(cfg)
    print(P.save_problem(problem, out))
    return EXIT_OK


def cmd_fistar(family: str, norm_z: float, lam: float) -> int:
    fn = {"logistic": fi_star_logistic_l2, "exponential": fi_star_exponential_l2, "hinge": fi_star_hinge_l2}[family]
    alpha, fstar = fn(norm_z, lam)
    print(f"{alpha!r} {fstar!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spsgd", description="Polyak step-size SGD experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run a seed sweep and write trajectory CSVs"),
                        ("check", "run a seed sweep and check a convergence bound"),
                        ("gen", "generate the configured problem and write it to --out")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides [output] dir)")
        if name != "gen":
            p.add_argument("--jobs", type=int, default=1, help="worker processes for the seed sweep")
    p = sub.add_parser("fistar", help="closed-form per-component infimum of a regularized loss")
    p.add_argument("family", choices=("logistic", "exponential", "hinge"))
    p.add_argument("norm_z", type=float)
    p.add_argument("lam", type=float)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fistar":
            return cmd_fistar(args.family, args.norm_z, args.lam)
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
        out = args.out or Path(cfg.output_dir)
        if args.command == "gen":
            return cmd_gen(cfg, out)
        if args.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        return (cmd_run if args.command == "run" else cmd_check)(cfg, out, args.jobs)
    except (NumericalAbort, OracleInconsistencyError, P.NewtonFailure) as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
