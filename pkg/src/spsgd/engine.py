"""SGD and stochastic subgradient loops with pluggable sampling, step rules and batch schedules."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Sequence

import numpy as np

from .core import BatchSchedule, FiniteSumProblem, RunConfig, Trajectory, TrajectoryRecord
from .stepsize import OracleInconsistencyError


class NumericalAbort(ArithmeticError):
    def __init__(self, iteration: int, detail: str = "non-finite iterate"):
        super().__init__(f"iteration {iteration}: {detail}")
        self.iteration = iteration


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; each seed is an independent stream."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class Sampler:
    """I.i.d. index draws across iterations; a batch holds distinct indices."""

    probabilities: np.ndarray | None = None

    def __post_init__(self):
        if self.probabilities is not None:
            p = np.asarray(self.probabilities, dtype=np.float64)
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("sampling probabilities must be nonnegative and sum to 1")
            object.__setattr__(self, "probabilities", p)

    @classmethod
    def for_problem(cls, problem: FiniteSumProblem) -> "Sampler":
        return cls(problem.weights)

    def draw(self, rng: np.random.Generator, n: int, b: int = 1) -> np.ndarray:
        if self.probabilities is None:
            if b == 1:
                return rng.integers(0, n, size=1)
            return rng.choice(n, size=b, replace=False)
        return rng.choice(n, size=b, replace=False, p=self.probabilities)


def next_batch_size(schedule: BatchSchedule, quantity: float, n: int) -> int:
    """Batch size for the next stretch of iterations.

    ``quantity`` is ``||grad f(x^k)||`` for the strongly convex schedule and
    ``f(x^k) - f*`` for the PL schedule; the result is the ceiling of the
    lower bound on ``b_k``, clamped to ``[1, n]``.
    """
    if schedule.kind == "fixed":
        return min(schedule.b, n)
    if quantity < 0 or math.isnan(quantity):
        raise ValueError("schedule state must be a nonnegative number")
    s = schedule
    if s.kind == "strongly_convex":
        need = {"gamma_b": s.gamma_b, "z_sq": s.z_sq, "mu_min": s.mu_min, "mu": s.mu, "L_max": s.L_max, "L": s.L}
    else:
        need = {"gamma_b": s.gamma_b, "z_sq": s.z_sq, "mu_min": s.mu_min, "mu": s.mu, "L_max": s.L_max,
                "L": s.L, "c": s.c}
    missing = [k for k, v in need.items() if v is None]
    if missing:
        raise ValueError(f"{s.kind} batch schedule is missing {missing}")
    if s.z_sq == 0:
        return 1
    if s.kind == "strongly_convex":
        r = quantity / s.L
        extra = s.mu_min * s.mu / (4 * s.gamma_b * s.z_sq * s.L_max) * (r * r)
    else:
        v = pl_schedule_rate(s)
        extra = 2 * s.mu_min * v / (s.gamma_b * s.z_sq * s.c * s.L) * quantity
    if math.isinf(extra):
        return 1
    b = math.ceil(1.0 / (1.0 / n + extra) * (1 - 1e-12))
    return int(min(max(b, 1), n))


def pl_schedule_rate(s: BatchSchedule) -> float:
    """``v = 1 - gamma_b (1/alpha - 2 mu + L_max/(2c))``, required to lie in (0, 1)."""
    alpha = min(1.0 / (2 * s.c * s.L_max), s.gamma_b)
    v = 1.0 - s.gamma_b * (1.0 / alpha - 2 * s.mu + s.L_max / (2 * s.c))
    if not 0 < v < 1:
        raise ValueError(f"PL batch schedule needs v in (0, 1), got {v!r}")
    return v


def _iterate(problem: FiniteSumProblem, config: RunConfig, x0: np.ndarray, sampler: Sampler | None,
             x_star: np.ndarray | None, f_star: float | None) -> Trajectory:
    rule = config.step_rule
    step = rule.stepper(problem.n)
    deterministic = rule.kind == "deterministic_polyak"
    if deterministic and f_star is None:
        raise ValueError("the deterministic Polyak rule needs f_star")
    sampler = sampler or Sampler.for_problem(problem)
    schedule = config.batch_schedule
    rng = make_rng(config.seed)
    n = problem.n
    x = np.array(x0, dtype=np.float64).reshape(problem.dim)
    x_sum = np.zeros_like(x)
    records: list[TrajectoryRecord] = []
    avg_loss: list[float | None] = []

    def record(k: int, idx: tuple[int, ...], gamma: float, b: int) -> tuple[float, float]:
        loss = problem.full_value(x)
        g = problem.full_gradient(x)
        gn = float(g @ g)
        dist = None if x_star is None else float((x - x_star) @ (x - x_star))
        records.append(TrajectoryRecord(k, idx, float(gamma), dist, loss, gn, b))
        avg_loss.append(None if k == 0 else problem.full_value(x_sum / k))
        return loss, gn

    def schedule_state(loss: float, gn: float) -> float:
        if schedule.kind == "strongly_convex":
            return math.sqrt(gn)
        return max(loss - schedule.f_star, 0.0)

    # overflow is detected explicitly through the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        loss, gn = record(0, (), 0.0, 0)
        b = next_batch_size(schedule, 0.0 if schedule.kind == "fixed" else schedule_state(loss, gn), n)
        for k in range(config.iterations):
            if deterministic:
                idx = ()
                val, g, inf, bk = problem.full_value(x), problem.full_gradient(x), f_star, n
            else:
                draw = sampler.draw(rng, n, b)
                idx = tuple(int(i) for i in draw)
                val, g = problem.batch_value_and_gradient(draw, x)
                inf, bk = problem.batch_infimum(draw), b
            try:
                # a batch's mean infimum only lower-bounds its infimum
                gamma = step(val, inf, float(g @ g), bk, strict=deterministic or len(idx) == 1)
            except OracleInconsistencyError as e:
                raise OracleInconsistencyError(str(e), iteration=k) from e
            x_sum += x
            x = x - gamma * g
            if not np.all(np.isfinite(x)):
                raise NumericalAbort(k + 1)
            if (k + 1) % config.record_every == 0 or k + 1 == config.iterations:
                loss, gn = record(k + 1, idx, gamma, bk)
                if schedule.kind != "fixed":
                    b = next_batch_size(schedule, schedule_state(loss, gn), n)
    K = config.iterations
    return Trajectory(records, x, x_sum / K if K else None, avg_loss, config.seed)


def run_sgd(problem: FiniteSumProblem, config: RunConfig, x0: np.ndarray, *, sampler: Sampler | None = None,
            x_star: np.ndarray | None = None, f_star: float | None = None) -> Trajectory:
    """``x^{k+1} = x^k - gamma_k grad f_B(x^k)`` with ``gamma_k`` from the configured rule.

    A mini-batch ``B`` is treated as one sampled component: its mean value,
    mean gradient and mean infimum feed the step-size formula. Full-pass
    statistics (loss, gradient norm, distance to ``x_star``, loss of the
    running average) are recorded every ``config.record_every`` iterations.
    """
    if not problem.smooth:
        raise ValueError("run_sgd needs a smooth problem; use run_subgradient")
    return _iterate(problem, config, x0, sampler, x_star, f_star)


def run_subgradient(problem: FiniteSumProblem, config: RunConfig, x0: np.ndarray, *,
                    sampler: Sampler | None = None, x_star: np.ndarray | None = None,
                    f_star: float | None = None) -> Trajectory:
    """Stochastic subgradient method; with the deterministic Polyak rule, the full subgradient method.

    The trajectory's ``x_avg`` is ``(1/K) sum_{k<K} x^k``.
    """
    return _iterate(problem, config, x0, sampler, x_star, f_star)


def _run_seed(seed: int, problem, config, x0, x_star, f_star, subgradient):
    fn = run_subgradient if subgradient else run_sgd
    return fn(problem, replace(config, seed=seed), x0, x_star=x_star, f_star=f_star)


def run_ensemble(problem: FiniteSumProblem, config: RunConfig, seeds: Sequence[int], x0: np.ndarray, *,
                 x_star: np.ndarray | None = None, f_star: float | None = None, subgradient: bool = False,
                 jobs: int = 1) -> list[Trajectory]:
    """One trajectory per seed, optionally across ``jobs`` worker processes."""
    work = partial(_run_seed, problem=problem, config=config, x0=x0, x_star=x_star, f_star=f_star,
                   subgradient=subgradient)
    if jobs <= 1 or len(seeds) <= 1:
        return [work(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, seeds))
