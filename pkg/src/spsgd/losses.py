"""Binary and regression losses with closed-form per-component infima.

For an l2-regularized linear loss ``phi(<z, x>) + lam/2 ||x||^2`` the
infimum is attained along ``x = alpha * z/||z||`` and reduces to a 1-D
problem ``g(alpha)``. For the logistic and exponential losses the
stationarity condition of ``g`` is solved by the r-Lambert function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

Family = Literal["logistic", "exponential", "squared", "hinge"]
FAMILIES = ("logistic", "exponential", "squared", "hinge")

_MAX_ITER = 200


# --------------------------------------------------------------------------
# vectorised link functions on margins m = b <a, x> (classification) or
# residuals r = <a, x> - y (squared)


def link_value(family: Family, t: np.ndarray) -> np.ndarray:
    if family == "logistic":
        return np.logaddexp(0.0, -t)
    if family == "exponential":
        return np.exp(-t)
    if family == "squared":
        return 0.5 * t * t
    if family == "hinge":
        return np.maximum(0.0, 1.0 - t)
    raise ValueError(f"unknown loss family {family!r}")


def link_derivative(family: Family, t: np.ndarray) -> np.ndarray:
    """d/dt of ``link_value``; the hinge kink at ``t = 1`` gets 0."""
    if family == "logistic":
        # -sigmoid(-t), written to avoid overflow for large |t|
        return -0.5 * (1.0 - np.tanh(0.5 * t))
    if family == "exponential":
        return -np.exp(-t)
    if family == "squared":
        return np.asarray(t, dtype=np.float64).copy()
    if family == "hinge":
        return np.where(t < 1.0, -1.0, 0.0)
    raise ValueError(f"unknown loss family {family!r}")


@dataclass(frozen=True)
class LossSpec:
    family: Family
    features: np.ndarray
    label: float = 1.0
    l2_lambda: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown loss family {self.family!r}")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be nonnegative")
        if self.family != "squared" and self.label not in (-1.0, 1.0, -1, 1):
            raise ValueError("classification labels must be +1 or -1")
        object.__setattr__(self, "features", np.asarray(self.features, dtype=np.float64))

    def _arg(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.features.shape:
            raise ValueError(f"dimension mismatch: x has shape {x.shape}, features {self.features.shape}")
        dot = float(self.features @ x)
        # squared loss stores the regression target in ``label``
        return dot - self.label if self.family == "squared" else self.label * dot


def loss_value(spec: LossSpec, x: np.ndarray) -> float:
    t = spec._arg(x)
    x = np.asarray(x, dtype=np.float64)
    return float(link_value(spec.family, np.array(t))) + 0.5 * spec.l2_lambda * float(x @ x)


def loss_gradient(spec: LossSpec, x: np.ndarray) -> np.ndarray:
    t = spec._arg(x)
    x = np.asarray(x, dtype=np.float64)
    d = float(link_derivative(spec.family, np.array(t)))
    scale = d if spec.family == "squared" else d * spec.label
    return scale * spec.features + spec.l2_lambda * x


# --------------------------------------------------------------------------
# Lambert machinery


def r_lambert(r: float, a: float) -> float:
    """Principal solution ``w >= 0`` of ``w e^w + r w = a`` for ``r, a >= 0``.

    Safeguarded Newton from ``log(1 + a)``, which upper-bounds the root; the
    map is convex and increasing so Newton iterates descend monotonically,
    and any step leaving the bracket falls back to bisection.
    """
    if r < 0 or a < 0 or not (math.isfinite(r) and math.isfinite(a)):
        raise ValueError("r_lambert is defined here only for finite r >= 0, a >= 0")
    if a == 0.0:
        return 0.0
    lo, hi = 0.0, math.log1p(a)
    w = hi
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        h = w * ew + r * w - a
        if h > 0:
            hi = w
        elif h < 0:
            lo = w
        else:
            return w
        step = h / ((w + 1.0) * ew + r)
        w_new = w - step
        if not lo <= w_new <= hi:
            w_new = 0.5 * (lo + hi)
        if abs(w_new - w) <= 4e-16 * max(1.0, w):
            w = w_new
            break
        w = w_new
    return w


def lambert_w0(a: float) -> float:
    """Principal branch of the Lambert W function on ``a >= 0``."""
    if a < 0:
        raise ValueError("lambert_w0 is restricted to a >= 0")
    return r_lambert(0.0, a)


def _check_positive(norm_z: float, lam: float):
    if not (norm_z > 0 and lam > 0):
        raise ValueError("norm_z and lambda must be positive")


def fi_star_logistic_l2(norm_z: float, lam: float) -> tuple[float, float]:
    """``(alpha*, f_i*)`` for ``log(1 + e^{-<z, x>}) + lam/2 ||x||^2`` with ``||z|| = norm_z``."""
    _check_positive(norm_z, lam)
    c = norm_z
    alpha = r_lambert(1.0, c * c / lam) / c
    return alpha, float(np.logaddexp(0.0, -alpha * c)) + 0.5 * lam * alpha * alpha


def fi_star_exponential_l2(norm_z: float, lam: float) -> tuple[float, float]:
    """``(alpha*, f_i*)`` for ``e^{-<z, x>} + lam/2 ||x||^2`` with ``||z|| = norm_z``."""
    _check_positive(norm_z, lam)
    c = norm_z
    alpha = lambert_w0(c * c / lam) / c
    return alpha, math.exp(-alpha * c) + 0.5 * lam * alpha * alpha


def fi_star_squared_l2(norm_a: float, target: float, lam: float) -> tuple[float, float]:
    """``(alpha*, f_i*)`` for ``1/2 (<a, x> - y)^2 + lam/2 ||x||^2``; ``alpha`` signed along ``a``."""
    if lam == 0:
        return (target / norm_a if norm_a > 0 else 0.0), (0.0 if norm_a > 0 else 0.5 * target * target)
    alpha = norm_a * target / (norm_a * norm_a + lam)
    return alpha, 0.5 * target * target * lam / (norm_a * norm_a + lam)


def fi_star_hinge_l2(norm_z: float, lam: float) -> tuple[float, float]:
    """``(alpha*, f_i*)`` for ``max(0, 1 - <z, x>) + lam/2 ||x||^2``."""
    if norm_z == 0:
        return 0.0, 1.0
    if lam == 0:
        return 1.0 / norm_z, 0.0
    if norm_z * norm_z >= lam:
        alpha = 1.0 / norm_z
        return alpha, 0.5 * lam * alpha * alpha
    alpha = norm_z / lam
    return alpha, 1.0 - 0.5 * norm_z * norm_z / lam


def component_infimum(spec: LossSpec) -> float:
    """``inf_x f_i(x)`` for any family; exactly 0 for unregularized losses with nonzero features."""
    norm = float(np.linalg.norm(spec.features))
    lam = spec.l2_lambda
    fam = spec.family
    if fam == "squared":
        return fi_star_squared_l2(norm, float(spec.label), lam)[1]
    if fam == "hinge":
        return fi_star_hinge_l2(norm, lam)[1]
    if norm == 0:
        # constant component: value at the origin
        return math.log(2.0) if fam == "logistic" else 1.0
    if lam == 0:
        return 0.0
    if fam == "logistic":
        return fi_star_logistic_l2(norm, lam)[1]
    return fi_star_exponential_l2(norm, lam)[1]
