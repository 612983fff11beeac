"""Shared data model: finite-sum problems, problem constants, run configs and trajectories."""

from __future__ import annotations

import csv
import io
import json
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Literal, Sequence

import numpy as np

from .stepsize import StepSizeRule

ConvexityKind = Literal["strongly_convex", "convex", "pl", "nonconvex"]

CSV_HEADER = ("k", "idx", "gamma", "dist_sq", "loss", "grad_norm_sq", "batch")


@dataclass(frozen=True)
class Convexity:
    kind: ConvexityKind = "convex"
    mu: float = 0.0
    rho: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("strongly_convex", "convex", "pl", "nonconvex"):
            raise ValueError(f"unknown convexity kind {self.kind!r}")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")


class FiniteSumProblem(ABC):
    """``f(x) = sum_i w_i f_i(x)`` with uniform weights ``w_i = 1/n`` by default.

    Subclasses provide ``component_value`` and ``component_gradient``; the
    per-component infima are passed in at construction and never recomputed.
    Non-uniform ``weights`` exist for reformulations whose expectation is taken
    under a non-uniform sampling distribution (randomized Kaczmarz).
    """

    smooth: bool = True

    def __init__(
        self,
        n: int,
        dim: int,
        infima: Sequence[float] | np.ndarray,
        *,
        weights: np.ndarray | None = None,
        smoothness: np.ndarray | None = None,
        convexity: Convexity | None = None,
    ):
        if n < 1 or dim < 1:
            raise ValueError("n and dim must be positive")
        infima = np.asarray(infima, dtype=np.float64)
        if infima.shape != (n,):
            raise ValueError(f"expected {n} infima, got shape {infima.shape}")
        self.n = int(n)
        self.dim = int(dim)
        self.infima = infima
        self.infima.setflags(write=False)
        if weights is not None:
            weights = np.asarray(weights, dtype=np.float64)
            if weights.shape != (n,) or np.any(weights < 0):
                raise ValueError("weights must be a nonnegative vector of length n")
            if abs(weights.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1")
            weights.setflags(write=False)
        self.weights = weights
        if smoothness is not None:
            smoothness = np.asarray(smoothness, dtype=np.float64)
            if smoothness.shape != (n,):
                raise ValueError("smoothness must list one L_i per component")
        self.smoothness = smoothness
        self.convexity = convexity or Convexity()

    @abstractmethod
    def component_value(self, i: int, x: np.ndarray) -> float: ...

    @abstractmethod
    def component_gradient(self, i: int, x: np.ndarray) -> np.ndarray: ...

    def component_infimum(self, i: int) -> float:
        return float(self.infima[i])

    @property
    def L_max(self) -> float | None:
        return None if self.smoothness is None else float(self.smoothness.max())

    @property
    def weight_vector(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.n, 1.0 / self.n)
        return self.weights

    def component_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.component_value(i, x) for i in range(self.n)])

    def batch_value_and_gradient(self, indices: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Mean value and mean (sub)gradient of the listed components."""
        vals = [self.component_value(i, x) for i in indices]
        grads = [self.component_gradient(i, x) for i in indices]
        return float(np.mean(vals)), np.mean(grads, axis=0)

    def batch_infimum(self, indices: np.ndarray) -> float:
        return float(np.mean(self.infima[indices]))

    def full_value(self, x: np.ndarray) -> float:
        return float(self.weight_vector @ self.component_values(x))

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        w = self.weight_vector
        g = np.zeros(self.dim)
        for i in range(self.n):
            g += w[i] * self.component_gradient(i, x)
        return g

    def mean_infimum(self) -> float:
        return float(self.weight_vector @ self.infima)


class FunctionProblem(FiniteSumProblem):
    """Finite sum assembled from plain callables; handy for small hand-built cases."""

    def __init__(
        self,
        values: Sequence[Callable[[np.ndarray], float]],
        gradients: Sequence[Callable[[np.ndarray], np.ndarray]],
        infima: Sequence[float],
        dim: int,
        *,
        smooth: bool = True,
        **kwargs,
    ):
        if len(values) != len(gradients):
            raise ValueError("need one gradient per component")
        super().__init__(len(values), dim, infima, **kwargs)
        self._values = list(values)
        self._gradients = list(gradients)
        self.smooth = smooth

    def component_value(self, i, x):
        return float(self._values[i](np.asarray(x, dtype=np.float64)))

    def component_gradient(self, i, x):
        return np.asarray(self._gradients[i](np.asarray(x, dtype=np.float64)), dtype=np.float64).reshape(self.dim)


@dataclass
class ProblemConstants:
    """Constants consumed by the bound evaluators. ``None`` marks "not applicable"."""

    mu: float
    L_max: float
    L: float
    sigma_sq: float
    x_star: np.ndarray
    f_star: float
    G: float | None = None
    z_sq: float | None = None
    mu_min: float | None = None
    lambda_min_plus_W: float | None = None

    def __post_init__(self):
        self.x_star = np.asarray(self.x_star, dtype=np.float64)
        if self.mu < 0 or self.sigma_sq < -1e-12:
            raise ValueError("mu and sigma_sq must be nonnegative")
        if self.L_max <= 0 or self.L <= 0:
            raise ValueError("smoothness constants must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x_star"] = self.x_star.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemConstants":
        return cls(**{**d, "x_star": np.asarray(d["x_star"], dtype=np.float64)})


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostic:
    kind: Literal["infimum", "gradient", "full_value"]
    component: int | None
    probe: tuple[float, ...]
    detail: str

    def __str__(self):
        where = "" if self.component is None else f" (component {self.component})"
        return f"{self.kind} violated at probe x={list(self.probe)}{where}: {self.detail}"


def _central_difference(fun: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for j in range(x.size):
        e[j] = h
        g[j] = (fun(x + e) - fun(x - e)) / (2 * h)
        e[j] = 0.0
    return g


def validate_problem(
    problem: FiniteSumProblem,
    *,
    n_probes: int = 5,
    max_components: int = 20,
    h: float = 1e-6,
    rtol: float = 1e-5,
    seed: int = 0,
    scale: float = 1.0,
) -> list[Diagnostic]:
    """Probe a problem's oracles and return the violated invariants (empty on success).

    The origin is always the first probe. Gradient checks run only on smooth problems.
    """
    rng = np.random.default_rng(seed)
    probes = [np.zeros(problem.dim)] + [scale * rng.standard_normal(problem.dim) for _ in range(n_probes)]
    if problem.n <= max_components:
        comps = np.arange(problem.n)
    else:
        comps = np.sort(rng.choice(problem.n, size=max_components, replace=False))
    report: list[Diagnostic] = []
    for x in probes:
        key = tuple(float(v) for v in x[:8])
        vals = problem.component_values(x)
        for i in np.flatnonzero(vals < problem.infima - 1e-12 * np.maximum(1.0, np.abs(problem.infima))):
            report.append(Diagnostic("infimum", int(i), key,
                                     f"f_i(x)={vals[i]!r} < declared f_i*={problem.infima[i]!r}"))
        full = problem.full_value(x)
        expected = math.fsum(problem.weight_vector * vals)
        if abs(full - expected) > 1e-12 * problem.n * max(1.0, abs(expected)):
            report.append(Diagnostic("full_value", None, key, f"{full!r} != weighted sum {expected!r}"))
        if not problem.smooth:
            continue
        fd = _central_difference(problem.full_value, x, h)
        g = problem.full_gradient(x)
        if np.linalg.norm(g - fd) > rtol * max(1.0, np.linalg.norm(fd)):
            report.append(Diagnostic("gradient", None, key, f"full gradient off by {np.linalg.norm(g - fd):.3e}"))
        for i in comps[:3]:
            i = int(i)
            fd = _central_difference(lambda z: problem.component_value(i, z), x, h)
            g = problem.component_gradient(i, x)
            if np.linalg.norm(g - fd) > rtol * max(1.0, np.linalg.norm(fd)):
                report.append(Diagnostic("gradient", i, key, f"component gradient off by {np.linalg.norm(g - fd):.3e}"))
    return report


# --------------------------------------------------------------------------
# run configuration


BatchKind = Literal["fixed", "strongly_convex", "pl"]


@dataclass(frozen=True)
class BatchSchedule:
    """Mini-batch size policy.

    ``fixed`` uses ``b`` throughout. The increasing schedules follow the
    oracle lower bounds on ``b_k`` driven by ``||grad f(x^k)||`` (strongly
    convex) or ``f(x^k) - f*`` (PL); they need the listed constants.
    """

    kind: BatchKind = "fixed"
    b: int = 1
    gamma_b: float | None = None
    z_sq: float | None = None
    mu_min: float | None = None
    mu: float | None = None
    L_max: float | None = None
    L: float | None = None
    c: float | None = None
    f_star: float | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "strongly_convex", "pl"):
            raise ValueError(f"unknown batch schedule {self.kind!r}")
        if self.b < 1:
            raise ValueError("batch size must be at least 1")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    iterations: int = 100
    step_rule: StepSizeRule = field(default_factory=lambda: StepSizeRule.sps(0.5))
    batch_schedule: BatchSchedule = field(default_factory=BatchSchedule)
    record_every: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")

    def to_text(self) -> str:
        """Flat ``key = value`` text, one entry per line, nested fields dotted."""
        lines = [f"seed = {self.seed}", f"iterations = {self.iterations}", f"record_every = {self.record_every}"]
        for prefix, obj in (("rule", self.step_rule), ("schedule", self.batch_schedule)):
            for f in fields(obj):
                v = getattr(obj, f.name)
                if v is not None:
                    lines.append(f"{prefix}.{f.name} = {_fmt(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        top: dict = {}
        nested: dict[str, dict] = {"rule": {}, "schedule": {}}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            prefix, _, name = key.rpartition(".")
            if prefix:
                if prefix not in nested:
                    raise ValueError(f"line {lineno}: unknown section {prefix!r}")
                nested[prefix][name] = value
            else:
                top[key] = value
        unknown = set(top) - {"seed", "iterations", "record_every"}
        if unknown:
            raise ValueError(f"unknown keys: {sorted(unknown)}")
        rule = _build(StepSizeRule, nested["rule"])
        schedule = _build(BatchSchedule, nested["schedule"])
        return cls(
            seed=int(top.get("seed", 0)),
            iterations=int(top.get("iterations", 100)),
            record_every=int(top.get("record_every", 1)),
            step_rule=rule,
            batch_schedule=schedule,
        )


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _build(cls, raw: dict):
    types = {f.name: f.type for f in fields(cls)}
    unknown = set(raw) - set(types)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for k, v in raw.items():
        t = str(types[k])
        if t.startswith("int"):
            kwargs[k] = int(v)
        elif "float" in t:
            kwargs[k] = float(v)
        else:
            kwargs[k] = v
    return cls(**kwargs)


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class TrajectoryRecord:
    """State at iteration ``k`` and the step that produced it.

    ``idx``/``gamma`` describe the step from ``x^{k-1}`` to ``x^k``; the
    ``k = 0`` record has no step (empty ``idx``, ``gamma = 0``). A zero
    ``gamma`` elsewhere flags a skipped step. ``dist_sq`` is ``None`` when
    ``x*`` is unknown.
    """

    k: int
    idx: tuple[int, ...]
    gamma: float
    dist_sq: float | None
    loss: float
    grad_norm_sq: float
    batch: int

    @property
    def skipped(self) -> bool:
        return self.k > 0 and self.gamma == 0.0


@dataclass(eq=False)
class Trajectory:
    records: list[TrajectoryRecord]
    x_final: np.ndarray
    x_avg: np.ndarray | None = None
    avg_loss: list[float | None] = field(default_factory=list)
    seed: int | None = None

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.records == other.records
            and np.array_equal(self.x_final, other.x_final)
            and ((self.x_avg is None and other.x_avg is None)
                 or (self.x_avg is not None and other.x_avg is not None and np.array_equal(self.x_avg, other.x_avg)))
            and self.avg_loss == other.avg_loss
            and self.seed == other.seed
        )

    def __len__(self):
        return len(self.records)

    @property
    def ks(self) -> np.ndarray:
        return np.array([r.k for r in self.records])

    def column(self, name: str) -> np.ndarray:
        """A record field (or ``avg_loss``) as a float array, ``None`` mapped to NaN."""
        if name == "avg_loss":
            vals = self.avg_loss
        else:
            vals = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in vals], dtype=np.float64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.records:
            w.writerow([
                r.k,
                " ".join(map(str, r.idx)),
                repr(r.gamma),
                "" if r.dist_sq is None else repr(r.dist_sq),
                repr(r.loss),
                repr(r.grad_norm_sq),
                r.batch,
            ])
        return buf.getvalue()

    @staticmethod
    def records_from_csv(text: str) -> list[TrajectoryRecord]:
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        out = []
        for row in reader:
            k, idx, gamma, dist_sq, loss, gn, batch = row
            out.append(TrajectoryRecord(
                k=int(k),
                idx=tuple(int(s) for s in idx.split()),
                gamma=float(gamma),
                dist_sq=None if dist_sq == "" else float(dist_sq),
                loss=float(loss),
                grad_norm_sq=float(gn),
                batch=int(batch),
            ))
        return out

    def to_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "records": self.to_csv(),
            "x_final": [repr(v) for v in self.x_final.tolist()],
            "x_avg": None if self.x_avg is None else [repr(v) for v in self.x_avg.tolist()],
            "avg_loss": [None if v is None else repr(v) for v in self.avg_loss],
        })

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        d = json.loads(text)
        return cls(
            records=cls.records_from_csv(d["records"]),
            x_final=np.array([float(v) for v in d["x_final"]]),
            x_avg=None if d["x_avg"] is None else np.array([float(v) for v in d["x_avg"]]),
            avg_loss=[None if v is None else float(v) for v in d["avg_loss"]],
            seed=d["seed"],
        )
