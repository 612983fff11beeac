"""Polyak-type step-size rules.

All rules share the ratio ``(f_i(x) - f_i*) / (c ||grad f_i(x)||^2)``. A
component that is already stationary and at its infimum yields a *skipped*
step (``gamma = 0``); a stationary component strictly above its declared
infimum means the oracle is inconsistent and raises. When the declared
infimum is only a lower bound (a mini-batch scored against the mean of its
members' infima), that case is skipped too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

EPS_GRAD = 1e-14
EPS_GAP = 1e-14

RuleKind = Literal["sps", "sps_max", "smoothed_sps_max", "constant", "deterministic_polyak"]


class OracleInconsistencyError(ValueError):
    """Gradient vanishes while the value sits strictly above the declared infimum."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


def _polyak_ratio(val: float, inf: float, grad_norm_sq: float, c: float, strict: bool = True) -> float:
    gap = val - inf
    if gap < -1e-12 * max(1.0, abs(inf)):
        raise OracleInconsistencyError(f"value {val!r} lies below declared infimum {inf!r}")
    gap = max(gap, 0.0)
    if grad_norm_sq <= EPS_GRAD:
        if gap <= EPS_GAP:
            return 0.0
        # a small gap next to a small gradient is ordinary near-convergence; only a
        # gap that would need curvature below EPS_GRAD to explain it is inconsistent
        if grad_norm_sq <= EPS_GRAD * min(1.0, gap):
            if not strict:
                return 0.0
            raise OracleInconsistencyError(
                f"stationary point (||g||^2={grad_norm_sq:.3e}) with gap {gap:.3e} above the declared infimum"
            )
    return gap / (c * grad_norm_sq)


def sps(fi_val: float, fi_star: float, grad_norm_sq: float, c: float, *, strict: bool = True) -> float:
    """Stochastic Polyak step; returns 0.0 for a skipped (stationary) component.

    ``strict=False`` declares ``fi_star`` a lower bound rather than the
    infimum, so a stationary point above it is skipped instead of raising.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    return _polyak_ratio(fi_val, fi_star, grad_norm_sq, c, strict)


def sps_max(fi_val: float, fi_star: float, grad_norm_sq: float, c: float, gamma_b: float, *,
            strict: bool = True) -> float:
    if gamma_b <= 0:
        raise ValueError("gamma_b must be positive")
    return min(sps(fi_val, fi_star, grad_norm_sq, c, strict=strict), gamma_b)


def smoothed_bound_update(prev_gamma: float, tau: float, b: int, n: int) -> float:
    """Cap for the current iteration: ``tau**(b/n) * prev_gamma``."""
    if prev_gamma <= 0:
        raise ValueError("prev_gamma must be positive")
    if not 1 <= b <= n:
        raise ValueError("batch size must lie in [1, n]")
    return tau ** (b / n) * prev_gamma


def deterministic_polyak(f_val: float, f_star: float, subgrad_norm_sq: float) -> float:
    return _polyak_ratio(f_val, f_star, subgrad_norm_sq, 1.0)


def sps_bounds(c: float, L_i: float, mu_i: float) -> tuple[float, float]:
    """Bracket ``[1/(2 c L_i), 1/(2 c mu_i)]`` for a mu_i-strongly convex, L_i-smooth component."""
    if c <= 0 or L_i <= 0:
        raise ValueError("c and L_i must be positive")
    if mu_i < 0:
        raise ValueError("mu_i must be nonnegative")
    upper = math.inf if mu_i == 0 else 1.0 / (2 * c * mu_i)
    return 1.0 / (2 * c * L_i), upper


@dataclass(frozen=True)
class StepSizeRule:
    kind: RuleKind = "sps"
    c: float = 0.5
    gamma_b: float = math.inf
    tau: float = 2.0
    gamma: float = 1.0
    gamma_b_init: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sps", "sps_max", "smoothed_sps_max", "constant", "deterministic_polyak"):
            raise ValueError(f"unknown step rule {self.kind!r}")
        if self.c <= 0 or self.gamma_b <= 0 or self.gamma <= 0 or self.gamma_b_init <= 0:
            raise ValueError("step-size parameters must be positive")
        if self.kind == "smoothed_sps_max" and self.tau <= 1:
            raise ValueError("smoothing needs tau > 1")

    @classmethod
    def sps(cls, c: float = 0.5) -> "StepSizeRule":
        return cls("sps", c=c)

    @classmethod
    def sps_max(cls, c: float = 0.5, gamma_b: float = 1.0) -> "StepSizeRule":
        return cls("sps_max", c=c, gamma_b=gamma_b)

    @classmethod
    def smoothed(cls, c: float = 0.5, gamma_b_init: float = 1.0, tau: float = 2.0) -> "StepSizeRule":
        return cls("smoothed_sps_max", c=c, gamma_b_init=gamma_b_init, tau=tau)

    @classmethod
    def constant(cls, gamma: float) -> "StepSizeRule":
        return cls("constant", gamma=gamma)

    @classmethod
    def deterministic(cls) -> "StepSizeRule":
        return cls("deterministic_polyak", c=1.0)

    def stepper(self, n: int) -> "StepState":
        return StepState(self, n)


class StepState:
    """Per-run state of a rule; only the smoothed rule carries memory."""

    def __init__(self, rule: StepSizeRule, n: int):
        self.rule = rule
        self.n = n
        self.prev_gamma = rule.gamma_b_init

    def __call__(self, val: float, inf: float, grad_norm_sq: float, b: int = 1, *, strict: bool = True) -> float:
        r = self.rule
        if r.kind == "constant":
            return r.gamma
        if r.kind == "sps":
            return sps(val, inf, grad_norm_sq, r.c, strict=strict)
        if r.kind == "sps_max":
            return sps_max(val, inf, grad_norm_sq, r.c, r.gamma_b, strict=strict)
        if r.kind == "deterministic_polyak":
            return deterministic_polyak(val, inf, grad_norm_sq)
        cap = smoothed_bound_update(self.prev_gamma, r.tau, b, self.n)
        gamma = sps_max(val, inf, grad_norm_sq, r.c, cap, strict=strict)
        # a skipped step would pin the cap at zero forever
        if gamma > 0:
            self.prev_gamma = gamma
        return gamma
