"""Closed-form convergence bounds and their empirical check over seed ensembles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .core import ProblemConstants, Trajectory

Theorem = Literal["strongly_convex_3_1", "convex_3_2", "pl_3_4", "nonconvex_3_5", "linear_system_B3", "nonsmooth_C1"]
Quantity = Literal["dist_sq", "suboptimality", "min_grad_sq", "avg_iterate_suboptimality"]

THEOREM_QUANTITY: dict[str, str] = {
    "strongly_convex_3_1": "dist_sq",
    "convex_3_2": "avg_iterate_suboptimality",
    "pl_3_4": "suboptimality",
    "nonconvex_3_5": "min_grad_sq",
    "linear_system_B3": "dist_sq",
    "nonsmooth_C1": "avg_iterate_suboptimality",
}


class BoundPreconditionError(ValueError):
    pass


@dataclass
class BoundSpec:
    """A theorem, the problem constants it needs and the step-rule parameters.

    ``dist0_sq`` is ``||x^0 - x*||^2`` and ``gap0`` is ``f(x^0) - f*``;
    ``rho``/``delta`` are the growth-condition constants of the non-convex
    bound.
    """

    theorem: Theorem
    constants: ProblemConstants
    c: float = 0.5
    gamma_b: float = math.inf
    dist0_sq: float | None = None
    gap0: float | None = None
    rho: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.theorem not in THEOREM_QUANTITY:
            raise ValueError(f"unknown theorem {self.theorem!r}")
        if self.c <= 0 or self.gamma_b <= 0:
            raise BoundPreconditionError("c and gamma_b must be positive")

    @property
    def alpha(self) -> float:
        return min(1.0 / (2 * self.c * self.constants.L_max), self.gamma_b)

    @property
    def nu(self) -> float:
        k = self.constants
        return self.gamma_b * (1.0 / self.alpha - 2 * k.mu + k.L_max / (2 * self.c))

    @property
    def gamma_b_bar(self) -> float:
        L, rho = self.constants.L, self._rho()
        disc = (rho - 1) ** 2 + 4 * L * rho * (rho + 1) / (2 * self.c * self.constants.L_max)
        return (-(rho - 1) + math.sqrt(disc)) / (2 * L * rho)

    @property
    def zeta(self) -> float:
        L, rho, gb, a = self.constants.L, self._rho(), self.gamma_b, self.alpha
        return (gb + a) - rho * (gb - a + L * gb * gb)

    def _rho(self) -> float:
        if self.rho is None:
            raise BoundPreconditionError("non-convex bound needs rho")
        return self.rho

    def check(self) -> None:
        """Raise ``BoundPreconditionError`` naming the first violated precondition."""
        k, t = self.constants, self.theorem
        if t == "strongly_convex_3_1":
            if self.c < 0.5:
                raise BoundPreconditionError(f"needs c >= 1/2, got c={self.c}")
            if k.mu <= 0:
                raise BoundPreconditionError("needs mu > 0")
            if self.mu_alpha > 1:
                raise BoundPreconditionError(f"needs mu*alpha <= 1, got {self.mu_alpha}")
        elif t == "convex_3_2":
            if self.c != 1:
                raise BoundPreconditionError(f"needs c = 1, got c={self.c}")
        elif t == "pl_3_4":
            if k.mu <= 0 or not self.c > k.L_max / (4 * k.mu):
                raise BoundPreconditionError(f"needs c > L_max/(4 mu) = {k.L_max / (4 * k.mu) if k.mu else math.inf}")
            if not 0 < self.nu <= 1:
                raise BoundPreconditionError(f"needs nu in (0, 1], got nu={self.nu}")
        elif t == "nonconvex_3_5":
            rho = self._rho()
            if self.delta is None:
                raise BoundPreconditionError("non-convex bound needs delta")
            if not self.c > rho * k.L / (4 * k.L_max):
                raise BoundPreconditionError(f"needs c > rho L/(4 L_max) = {rho * k.L / (4 * k.L_max)}")
            limit = max(2 / (k.L * rho), self.gamma_b_bar)
            if not self.gamma_b < limit:
                raise BoundPreconditionError(f"needs gamma_b < max(2/(L rho), gamma_b_bar) = {limit}")
            if not self.zeta > 0:
                raise BoundPreconditionError(f"needs zeta > 0, got zeta={self.zeta}")
        elif t == "linear_system_B3":
            if k.lambda_min_plus_W is None or not 0 < k.lambda_min_plus_W <= 1:
                raise BoundPreconditionError("needs lambda_min_plus_W in (0, 1]")
        elif t == "nonsmooth_C1":
            if k.G is None or k.G <= 0:
                raise BoundPreconditionError("needs a subgradient bound G > 0")
            if k.sigma_sq > 1e-12:
                raise BoundPreconditionError("needs interpolation (sigma^2 = 0)")

    @property
    def mu_alpha(self) -> float:
        return self.constants.mu * self.alpha

    def _need(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise BoundPreconditionError(f"{self.theorem} needs {name}")
        return v


def _neighborhood(scale: float, sigma_sq: float) -> float:
    # inf * 0 is taken as 0: an unbounded cap costs nothing under interpolation
    return 0.0 if sigma_sq == 0 else scale * sigma_sq


def bound_strongly_convex(k: int, spec: BoundSpec) -> float:
    """``(1 - mu alpha)^k ||x^0 - x*||^2 + 2 gamma_b sigma^2 / (mu alpha)``."""
    spec.check()
    a, mu = spec.alpha, spec.constants.mu
    return (1 - mu * a) ** k * spec._need("dist0_sq") + _neighborhood(2 * spec.gamma_b / (mu * a), spec.constants.sigma_sq)


def bound_convex(K: int, spec: BoundSpec) -> float:
    """Bound on ``E[f(x_avg^K) - f*]``: ``||x^0 - x*||^2/(alpha K) + 2 sigma^2 gamma_b / alpha``."""
    spec.check()
    if K < 1:
        raise ValueError("K must be at least 1")
    a = spec.alpha
    return spec._need("dist0_sq") / (a * K) + _neighborhood(2 * spec.gamma_b / a, spec.constants.sigma_sq)


def bound_pl(k: int, spec: BoundSpec) -> float:
    """``nu^k (f(x^0) - f*) + L sigma^2 gamma_b / (2 (1 - nu) c)``."""
    spec.check()
    nu, kc = spec.nu, spec.constants
    tail = 0.0 if kc.sigma_sq == 0 else (math.inf if nu == 1 else kc.L * kc.sigma_sq * spec.gamma_b / (2 * (1 - nu) * spec.c))
    return nu ** k * spec._need("gap0") + tail


def bound_nonconvex(K: int, spec: BoundSpec) -> float:
    """Bound on ``min_k E||grad f(x^k)||^2``."""
    spec.check()
    if K < 1:
        raise ValueError("K must be at least 1")
    z, gb, a, L = spec.zeta, spec.gamma_b, spec.alpha, spec.constants.L
    return 2 / (z * K) * spec._need("gap0") + (gb - a + L * gb * gb) * spec.delta / z


def bound_linear_system(k: int, spec: BoundSpec) -> float:
    """``(1 - lambda_min^+(W))^k ||x^0 - x*||^2``."""
    spec.check()
    return (1 - spec.constants.lambda_min_plus_W) ** k * spec._need("dist0_sq")


def bound_nonsmooth(K: int, spec: BoundSpec) -> float:
    """``G ||x^0 - x*|| / sqrt(K)``."""
    spec.check()
    if K < 1:
        raise ValueError("K must be at least 1")
    return spec.constants.G * math.sqrt(spec._need("dist0_sq")) / math.sqrt(K)


BOUNDS = {
    "strongly_convex_3_1": bound_strongly_convex,
    "convex_3_2": bound_convex,
    "pl_3_4": bound_pl,
    "nonconvex_3_5": bound_nonconvex,
    "linear_system_B3": bound_linear_system,
    "nonsmooth_C1": bound_nonsmooth,
}


def evaluate_bound(k: int, spec: BoundSpec) -> float:
    return BOUNDS[spec.theorem](k, spec)


def estimate_growth_constants(problem, probes: Sequence[np.ndarray]) -> tuple[float, float]:
    """Estimate ``(rho, delta)`` in ``E||grad f_i||^2 <= rho ||grad f||^2 + delta`` from probe points.

    ``rho`` is the largest observed ratio and ``delta`` the largest second
    moment at probes where the full gradient is negligible. These are
    estimates, not certified constants.
    """
    rho, delta = 1.0, 0.0
    w = problem.weight_vector
    for x in probes:
        second = sum(w[i] * float(np.sum(problem.component_gradient(i, x) ** 2)) for i in range(problem.n))
        full = float(np.sum(problem.full_gradient(x) ** 2))
        if full > 1e-12 * max(second, 1e-300):
            rho = max(rho, second / full)
        else:
            delta = max(delta, second)
    return rho, delta


# --------------------------------------------------------------------------
# empirical check


@dataclass
class BoundReport:
    theorem: str
    quantity: str
    constants: dict
    passed: bool
    first_violation_k: int | None
    ks: list[int] = field(default_factory=list)
    empirical: list[float] = field(default_factory=list)
    bound: list[float] = field(default_factory=list)
    margin_curve: list[float] = field(default_factory=list)
    slack: float = 0.1
    n_seeds: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "theorem": self.theorem,
            "quantity": self.quantity,
            "constants": self.constants,
            "pass": self.passed,
            "first_violation_k": self.first_violation_k,
            "margin_curve": [[k, m] for k, m in zip(self.ks, self.margin_curve)],
            "slack": self.slack,
            "n_seeds": self.n_seeds,
        }, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    raise TypeError(type(o))


def ensemble_quantity(trajectories: Sequence[Trajectory], quantity: Quantity, f_star: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Seed-mean of ``quantity`` at the common recorded iterations."""
    ks = trajectories[0].ks
    for t in trajectories[1:]:
        if not np.array_equal(t.ks, ks):
            raise ValueError("trajectories must share their recorded iterations")
    if quantity == "dist_sq":
        cols = [t.column("dist_sq") for t in trajectories]
    elif quantity in ("suboptimality", "min_grad_sq"):
        cols = [t.column("loss") - f_star if quantity == "suboptimality" else t.column("grad_norm_sq")
                for t in trajectories]
    elif quantity == "avg_iterate_suboptimality":
        cols = [t.column("avg_loss") - f_star for t in trajectories]
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    mean = np.mean(cols, axis=0)
    if quantity == "min_grad_sq":
        # min over k < K of the mean gradient norm, aligned so index j holds K = ks[j]
        mean = np.concatenate([[np.nan], np.minimum.accumulate(mean)[:-1]])
    return ks, mean


def check_bound(trajectories: Sequence[Trajectory], spec: BoundSpec, quantity: Quantity | None = None,
                slack: float = 0.1) -> BoundReport:
    """PASS iff the seed-mean of ``quantity`` stays below ``(1 + slack) * bound`` at every recorded k.

    Horizon-type bounds (averaged iterate, min gradient) are compared for
    ``k >= 1`` with ``K = k``.
    """
    if len(trajectories) < 2:
        raise ValueError("check_bound needs at least two seeds to form an ensemble mean")
    expected = THEOREM_QUANTITY[spec.theorem]
    quantity = quantity or expected
    if quantity != expected:
        raise ValueError(f"{spec.theorem} bounds {expected}, not {quantity}")
    seeds = [t.seed for t in trajectories]
    if None not in seeds and len(set(seeds)) != len(seeds):
        raise ValueError("ensemble trajectories must come from distinct seeds")
    ks, mean = ensemble_quantity(trajectories, quantity, spec.constants.f_star)
    if quantity == "min_grad_sq" and np.any(np.diff(ks) != 1):
        raise ValueError("the minimum over k needs every iteration recorded (record_every = 1)")
    rows = [(int(k), float(m)) for k, m in zip(ks, mean) if not np.isnan(m)]
    bounds = [evaluate_bound(k, spec) for k, _ in rows]
    margins = [(1 + slack) * b - m for (_, m), b in zip(rows, bounds)]
    first = next((k for (k, _), m in zip(rows, margins) if m < 0), None)
    return BoundReport(
        theorem=spec.theorem, quantity=quantity, constants=spec.constants.to_dict(), passed=first is None,
        first_violation_k=first, ks=[k for k, _ in rows], empirical=[m for _, m in rows], bound=bounds,
        margin_curve=margins, slack=slack, n_seeds=len(trajectories),
    )
