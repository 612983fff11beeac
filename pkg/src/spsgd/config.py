"""Sectioned experiment configuration files.

Grammar (INI style, ``#`` starts a comment)::

    [problem]   generator = <name>, then that generator's parameters
    [rule]      kind, c, gamma_b, tau, gamma, gamma_b_init
    [run]       seeds, iterations, record_every, batch, b, x0, x0_scale, x0_seed
    [check]     theorem, slack, and optional overrides mu, L_max, sigma_sq, rho, delta
    [output]    dir

``seeds`` accepts ``1-20``, ``1,2,5`` or a mix. Every key is validated
before any computation; unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .analysis import THEOREM_QUANTITY
from .core import BatchSchedule
from .stepsize import StepSizeRule


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _str(s: str) -> str:
    return s.strip()


# generator -> {key: converter}; keys absent from a file take the generator default
GENERATORS: dict[str, dict[str, Callable[[str], Any]]] = {
    "synthetic_classification": {
        "n": int, "d": int, "sparsity": float, "lam": float, "seed": int, "family": _str,
        "label_noise": float, "fistar": _str, "normalize_rows": _bool,
    },
    "least_squares": {"n": int, "d": int, "seed": int, "noise": float, "lam": float},
    "separable_hinge": {"n": int, "d": int, "seed": int, "min_margin": float},
    "linear_system": {"m": int, "d": int, "seed": int},
    "matrix_factorization": {
        "rank_k": int, "num_samples": int, "cond_number": float, "seed": int, "spectrum": _str,
    },
    "file": {"path": _str},
}

RULE_KEYS = {"kind": _str, "c": float, "gamma_b": float, "tau": float, "gamma": float, "gamma_b_init": float}
RUN_KEYS = {
    "seeds": _str, "iterations": int, "record_every": int, "batch": _str, "b": int,
    "x0": _str, "x0_scale": float, "x0_seed": int,
}
CHECK_KEYS = {
    "theorem": _str, "slack": float, "mu": float, "L_max": float, "sigma_sq": float,
    "rho": float, "delta": float,
}
OUTPUT_KEYS = {"dir": _str}
SECTIONS = ("problem", "rule", "run", "check", "output")


def parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep:
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(a, b + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("seed list is empty")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seed list has duplicates")
    if min(seeds) < 0:
        raise ValueError("seeds must be nonnegative")
    return seeds


@dataclass(frozen=True)
class CheckSpec:
    theorem: str
    slack: float = 0.1
    overrides: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    generator: str
    problem_params: dict[str, Any]
    rule: StepSizeRule
    seeds: tuple[int, ...] = (0,)
    iterations: int = 100
    record_every: int = 1
    batch: str = "fixed"
    b: int = 1
    x0: str = "zeros"
    x0_scale: float = 1.0
    x0_seed: int = 0
    check: CheckSpec | None = None
    output_dir: str = "out"
    source: str = ""

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical rendering; comments and key order do not matter."""
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def canonical(self) -> str:
        lines = ["[problem]", f"generator = {self.generator}"]
        lines += [f"{k} = {self.problem_params[k]!r}" for k in sorted(self.problem_params)]
        r = self.rule
        lines += ["[rule]"] + [f"{k} = {getattr(r, k)!r}" for k in sorted(RULE_KEYS)]
        lines += ["[run]", f"seeds = {list(self.seeds)}", f"iterations = {self.iterations}",
                  f"record_every = {self.record_every}", f"batch = {self.batch}", f"b = {self.b}",
                  f"x0 = {self.x0}", f"x0_scale = {self.x0_scale!r}", f"x0_seed = {self.x0_seed}"]
        if self.check is not None:
            lines += ["[check]", f"theorem = {self.check.theorem}", f"slack = {self.check.slack!r}"]
            lines += [f"{k} = {v!r}" for k, v in sorted(self.check.overrides.items())]
        return "\n".join(lines) + "\n"

    def schedule(self, constants=None) -> BatchSchedule:
        """Batch policy; the increasing schedules take their constants from the exact oracle."""
        if self.batch == "fixed":
            return BatchSchedule("fixed", self.b)
        if constants is None:
            raise ValueError(f"batch schedule {self.batch!r} needs exact problem constants")
        return BatchSchedule(
            self.batch, gamma_b=self.rule.gamma_b, z_sq=constants.z_sq, mu_min=constants.mu_min,
            mu=constants.mu, L_max=constants.L_max, L=constants.L, c=self.rule.c, f_star=constants.f_star,
        )


def _convert(section: str, raw: dict[str, str], table: dict[str, Callable]) -> dict[str, Any]:
    unknown = sorted(set(raw) - set(table))
    if unknown:
        raise ValueError(f"[{section}] unknown keys: {unknown}")
    out = {}
    for k, v in raw.items():
        try:
            out[k] = table[k](v)
        except ValueError as e:
            raise ValueError(f"[{section}] {k} = {v!r}: {e}") from None
    return out


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       comment_prefixes=("#",), strict=True)
    parser.optionxform = str  # keep L_max as written
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ValueError(f"malformed config: {e}") from None
    unknown = sorted(set(parser.sections()) - set(SECTIONS))
    if unknown:
        raise ValueError(f"unknown sections: {unknown}")
    sec = {s: dict(parser[s]) if parser.has_section(s) else {} for s in SECTIONS}

    prob = dict(sec["problem"])
    generator = prob.pop("generator", None)
    if generator not in GENERATORS:
        raise ValueError(f"[problem] generator must be one of {sorted(GENERATORS)}, got {generator!r}")
    params = _convert("problem", prob, GENERATORS[generator])
    if generator == "synthetic_classification" and params.get("lam", 0.0) > 0 and "fistar" not in params:
        raise ValueError("[problem] lam > 0 needs an explicit f_i* mode: set fistar = lambert")
    if generator == "file" and "path" not in params:
        raise ValueError("[problem] file generator needs path")

    rule_kw = _convert("rule", sec["rule"], RULE_KEYS)
    rule = StepSizeRule(**rule_kw)

    run = _convert("run", sec["run"], RUN_KEYS)
    seeds = tuple(parse_seeds(run.pop("seeds", "0")))
    if run.get("batch", "fixed") not in ("fixed", "strongly_convex", "pl"):
        raise ValueError(f"[run] unknown batch {run['batch']!r}")
    if run.get("x0", "zeros") not in ("zeros", "normal"):
        raise ValueError(f"[run] x0 must be zeros or normal, got {run['x0']!r}")
    if run.get("iterations", 100) < 0 or run.get("record_every", 1) < 1 or run.get("b", 1) < 1:
        raise ValueError("[run] need iterations >= 0, record_every >= 1 and b >= 1")
    if run.get("batch", "fixed") != "fixed" and not math.isfinite(rule.gamma_b):
        raise ValueError("[run] increasing batch schedules need a finite rule.gamma_b")

    check = None
    if sec["check"]:
        ck = _convert("check", sec["check"], CHECK_KEYS)
        theorem = ck.pop("theorem", None)
        if theorem not in THEOREM_QUANTITY:
            raise ValueError(f"[check] theorem must be one of {sorted(THEOREM_QUANTITY)}, got {theorem!r}")
        slack = ck.pop("slack", 0.1)
        if slack < 0:
            raise ValueError("[check] slack must be nonnegative")
        if len(seeds) < 2:
            raise ValueError("[check] needs at least two seeds")
        check = CheckSpec(theorem, slack, ck)

    out = _convert("output", sec["output"], OUTPUT_KEYS)
    return ExperimentConfig(generator=generator, problem_params=params, rule=rule, seeds=seeds, check=check,
                            output_dir=out.get("dir", "out"), source=text, **run)
